"""Compare the compiled kernels with the numpy fallback.

    python benchmarks/bench_kernels.py [--repeat 5]

The end-to-end rows run a short sampled protocol in a subprocess per backend,
since the backend is fixed at import time.
"""

from __future__ import annotations

import argparse
import os
import subprocess
import sys
import timeit

import numpy as np

from teleportkit import _kernels_py

try:
    from teleportkit import _kernels as _compiled
except ImportError:
    _compiled = None

CNOT = np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex)
H = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)

END_TO_END = (
    "from teleportkit.core import BlochParams; from teleportkit.protocols import run_two_step; "
    "run_two_step(BlochParams(0.7, 1.1), mode='sample', shots=2000)"
)


def _cases(rng):
    cases = []
    for n in (3, 6, 8):
        v = rng.normal(size=1 << n) + 1j * rng.normal(size=1 << n)
        v /= np.linalg.norm(v)
        cases.append((f"apply_matrix 1q n={n}", "apply_matrix", (v, n, H, np.array([n - 1], dtype=np.intc))))
        cases.append((f"apply_matrix 2q n={n}", "apply_matrix", (v, n, CNOT, np.array([0, n - 1], dtype=np.intc))))
    a = rng.integers(0, 2, 100_000, dtype=np.uint8)
    b = rng.integers(0, 2, 100_000, dtype=np.uint8)
    cases.append(("xor_bits 1e5", "xor_bits", (a, b)))
    probs = np.full(16, 1 / 16)
    cases.append(("pick_index 16", "pick_index", (probs, 0.73)))
    return cases


def _time(fn, args, repeat, number):
    return min(timeit.repeat(lambda: fn(*args), repeat=repeat, number=number)) / number


def _end_to_end(pure: bool, repeat: int) -> float:
    env = dict(os.environ, TELEPORTKIT_PURE_PYTHON="1" if pure else "0")
    code = f"import timeit; print(min(timeit.repeat({END_TO_END!r}, repeat={repeat}, number=1)))"
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    return float(out.stdout)


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--number", type=int, default=200)
    args = ap.parse_args(argv)

    if _compiled is None:
        print("compiled extension not built; run `pip install -e . --no-build-isolation` first")
    rows = []
    for name, fn, fargs in _cases(np.random.default_rng(0)):
        py = _time(getattr(_kernels_py, fn), fargs, args.repeat, args.number)
        cy = _time(getattr(_compiled, fn), fargs, args.repeat, args.number) if _compiled else float("nan")
        rows.append((name, py, cy))
    rows.append(("two-step sample 2000 shots", _end_to_end(True, 3), _end_to_end(False, 3) if _compiled else float("nan")))

    print(f"{'case':<30}{'numpy (us)':>14}{'cython (us)':>14}{'speedup':>10}")
    for name, py, cy in rows:
        print(f"{name:<30}{py * 1e6:>14.2f}{cy * 1e6:>14.2f}{py / cy:>9.1f}x")
    return 0


if __name__ == "__main__":
    sys.exit(main())
