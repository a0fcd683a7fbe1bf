"""One-time pad as classical teleportation, and XOR delocalisation of a bit.

Exact claims are checked by enumeration with ``fractions.Fraction`` weights;
sampled runs draw from seeded streams.
"""

from __future__ import annotations

import csv
import enum
import io
import math
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product
from typing import Iterable, Sequence

import numpy as np

from teleportkit import kernels
from teleportkit.rng import DEFAULT_SEED, substream


class Bit(enum.IntEnum):
    ZERO = 0
    ONE = 1

    def __xor__(self, other):
        return Bit((int(self) ^ int(other)) & 1)

    __rxor__ = __xor__

    def __invert__(self):
        return Bit(1 - int(self))

    def __str__(self):
        return str(int(self))


class KeyReuseError(RuntimeError):
    """A one-time pad key pair was requested a second time."""


def otp_encode(a: int, key_a: int) -> Bit:
    return Bit(a) ^ Bit(key_a)


def otp_decode(c: int, key_b: int) -> Bit:
    return Bit(c) ^ Bit(key_b)


def delocalize(d: int, x: int) -> Bit:
    """New value of Alice's shared bit; ``d`` now lives only in the parity with Bob's ``y``."""
    return Bit(d) ^ Bit(x)


def localize(x_tilde: int, y: int) -> Bit:
    return Bit(x_tilde) ^ Bit(y)


@dataclass
class BitSource:
    """Emits 0 with probability ``p``."""

    p: float
    rng: np.random.Generator = field(default_factory=lambda: substream(DEFAULT_SEED, "source"))

    def __post_init__(self):
        if not 0.0 <= self.p <= 1.0:
            raise ValueError(f"p={self.p} outside [0, 1]")

    def draw(self, n: int) -> np.ndarray:
        return (self.rng.random(n) >= self.p).astype(np.uint8)


class SharedKey:
    """Correlated key pairs ``(A, B)`` with ``A == B``, each usable once."""

    def __init__(self, pairs: Iterable[tuple[int, int]]):
        self.pairs = [(Bit(a), Bit(b)) for a, b in pairs]
        self._used = np.zeros(len(self.pairs), dtype=bool)

    @classmethod
    def generate(cls, n: int, rng: np.random.Generator) -> "SharedKey":
        bits = rng.integers(0, 2, size=n)
        return cls(zip(bits, bits))

    def __len__(self):
        return len(self.pairs)

    @property
    def remaining(self) -> int:
        return int((~self._used).sum())

    def take(self, index: int) -> tuple[Bit, Bit]:
        if self._used[index]:
            raise KeyReuseError(f"key pair {index} already consumed")
        self._used[index] = True
        return self.pairs[index]

    def take_block(self, start: int, n: int) -> tuple[np.ndarray, np.ndarray]:
        """Consume pairs ``start .. start+n-1`` at once; returns the A and B arrays."""
        if start < 0 or start + n > len(self.pairs):
            raise ValueError(f"key holds {len(self.pairs)} pairs, asked for {start}..{start + n - 1}")
        block = self._used[start : start + n]
        if block.any():
            raise KeyReuseError(f"key pair {start + int(np.argmax(block))} already consumed")
        block[:] = True
        arr = np.array(self.pairs[start : start + n], dtype=np.uint8).reshape(n, 2)
        return arr[:, 0].copy(), arr[:, 1].copy()


@dataclass(frozen=True)
class ClassicalTranscript:
    input: Bit
    key: tuple[Bit, Bit]
    communicated: Bit
    recovered: Bit
    # Alice's local copy of ``input`` after encoding; None in destroy-copy mode.
    alice_copy: Bit | None = field(default=None, compare=False)


def bias_of(stream: Sequence[int] | np.ndarray) -> tuple[float, float]:
    """Frequency of 0 and its binomial standard error ``sqrt(f(1-f)/N)``."""
    arr = np.asarray(stream)
    if arr.size == 0:
        raise ValueError("empty bit stream")
    f = float(np.count_nonzero(arr == 0)) / arr.size
    return f, math.sqrt(f * (1.0 - f) / arr.size)


@dataclass
class OTPRun:
    records: list[ClassicalTranscript]
    inputs: np.ndarray
    communicated: np.ndarray
    recovered: np.ndarray

    def statistics(self) -> dict[str, dict[str, float]]:
        out = {}
        for name in ("inputs", "communicated", "recovered"):
            f, se = bias_of(getattr(self, name))
            out[name] = {"p0": f, "stderr": se}
        return out


def run_otp(
    source: BitSource,
    key: SharedKey,
    shots: int,
    keep_copy: bool = True,
    start: int = 0,
) -> OTPRun:
    """Send ``shots`` source bits through the pad, one fresh key pair per bit."""
    if shots < 1:
        raise ValueError("shots must be >= 1")
    if len(key) - start < shots:
        raise ValueError(f"key has {len(key) - start} pairs left for {shots} shots")
    a = source.draw(shots)
    key_a, key_b = key.take_block(start, shots)
    c = kernels.xor_bits(a, key_a)
    recovered = kernels.xor_bits(c, key_b)
    records = [
        ClassicalTranscript(Bit(ai), (Bit(ka), Bit(kb)), Bit(ci), Bit(ri), Bit(ai) if keep_copy else None)
        for ai, ka, kb, ci, ri in zip(a.tolist(), key_a.tolist(), key_b.tolist(), c.tolist(), recovered.tolist())
    ]
    return OTPRun(records, a, c, recovered)


def sample_otp(p: float, shots: int, seed: int = DEFAULT_SEED, keep_copy: bool = True) -> OTPRun:
    source = BitSource(p, substream(seed, "otp", "source"))
    key = SharedKey.generate(shots, substream(seed, "otp", "key"))
    return run_otp(source, key, shots, keep_copy=keep_copy)


# --- exact enumeration -------------------------------------------------------

OTP_COLUMNS = ("a", "A", "B", "a^A", "(a^A)^B")
DELOC_COLUMNS = ("d", "x", "y", "x~=d^x", "x~^y")


def _weights(p) -> tuple[Fraction, Fraction]:
    # floats go through their shortest repr so 0.1 becomes 1/10
    p = Fraction(repr(p)) if isinstance(p, float) else Fraction(p)
    if not 0 <= p <= 1:
        raise ValueError(f"p={p} outside [0, 1]")
    return p, 1 - p


def otp_table(p=Fraction(1, 2)) -> list[dict]:
    """Four rows of the pad truth table, source bit weighted ``{p, 1-p}``, key unbiased."""
    w = _weights(p)
    rows = []
    for a, k in product((0, 1), repeat=2):
        c = otp_encode(a, k)
        rows.append(
            {"a": Bit(a), "A": Bit(k), "B": Bit(k), "a^A": c, "(a^A)^B": otp_decode(c, k), "weight": w[a] / 2}
        )
    return rows


def delocalize_table(p=Fraction(1, 2)) -> list[dict]:
    w = _weights(p)
    rows = []
    for d, x in product((0, 1), repeat=2):
        xt = delocalize(d, x)
        rows.append({"d": Bit(d), "x": Bit(x), "y": Bit(x), "x~=d^x": xt, "x~^y": localize(xt, x), "weight": w[d] / 2})
    return rows


def marginal(rows: list[dict], column: str) -> dict[int, Fraction]:
    dist = {0: Fraction(0), 1: Fraction(0)}
    for r in rows:
        dist[int(r[column])] += r["weight"]
    return dist


def joint(rows: list[dict], c1: str, c2: str) -> dict[tuple[int, int], Fraction]:
    dist = {k: Fraction(0) for k in product((0, 1), repeat=2)}
    for r in rows:
        dist[int(r[c1]), int(r[c2])] += r["weight"]
    return dist


def table_csv(rows: list[dict], columns: Sequence[str]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(list(columns) + ["weight"])
    for r in rows:
        writer.writerow([int(r[c]) for c in columns] + [str(r["weight"])])
    return buf.getvalue()


def sample_delocalize(p: float, shots: int, seed: int = DEFAULT_SEED) -> dict[str, np.ndarray]:
    """Draw ``d`` from the source and shared ``x == y``; return d, x, y, x~ and the recovered parity."""
    d = BitSource(p, substream(seed, "delocalize", "source")).draw(shots)
    x = substream(seed, "delocalize", "shared").integers(0, 2, size=shots).astype(np.uint8)
    y = x.copy()
    xt = kernels.xor_bits(d, x)
    return {"d": d, "x": x, "y": y, "x_tilde": xt, "parity": kernels.xor_bits(xt, y)}
