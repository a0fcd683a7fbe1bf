"""Command line: ``teleportkit run`` and ``teleportkit verify``.

Exit codes: 0 success, 1 an invariant failed, 2 bad flags or configuration.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from collections import Counter
from dataclasses import asdict, dataclass
from typing import Sequence

from teleportkit import classical, serialize, verify
from teleportkit.core import TOL, BlochParams, DomainError
from teleportkit.protocols import run_standard, run_two_step
from teleportkit.rng import DEFAULT_SEED

QUANTUM = ("standard", "two-step")
CLASSICAL = ("otp", "delocalize")


class ConfigError(ValueError):
    pass


class InvariantViolation(RuntimeError):
    pass


@dataclass
class RunConfig:
    protocol: str
    theta: float | None = None
    phi: float | None = None
    resource: str | None = None
    stop_after: str | None = None
    mode: str = "enumerate"
    shots: int | None = None
    seed: int = DEFAULT_SEED
    p: float | None = None
    format: str = "json"
    output: str | None = None

    def validate(self) -> None:
        quantum = self.protocol in QUANTUM
        if not quantum and (self.resource is not None or self.stop_after is not None):
            raise ConfigError(f"--resource/--stop-after do not apply to {self.protocol}")
        if self.protocol == "two-step":
            self.resource = self.resource or "entangled"
            self.stop_after = self.stop_after or "step2"
        if self.protocol == "standard" and self.stop_after is not None:
            raise ConfigError("--stop-after applies to the two-step protocol only")
        if quantum and (self.theta is None or self.phi is None):
            raise ConfigError(f"--theta and --phi are required for {self.protocol}")
        if not quantum and (self.theta is not None or self.phi is not None):
            raise ConfigError(f"--theta/--phi do not apply to {self.protocol}")
        if quantum and self.p is not None:
            raise ConfigError(f"--p does not apply to {self.protocol}")
        if not quantum and self.p is None:
            raise ConfigError(f"--p is required for {self.protocol}")
        if self.p is not None and not 0.0 <= self.p <= 1.0:
            raise ConfigError(f"--p {self.p} outside [0, 1]")
        if (self.mode == "sample") != (self.shots is not None):
            raise ConfigError("--shots is required with --mode sample and only then")
        if self.shots is not None and self.shots < 1:
            raise ConfigError("--shots must be >= 1")
        if self.format == "csv" and quantum:
            raise ConfigError("csv output covers the classical protocols only")
        if self.protocol == "standard" and self.resource not in (None, "entangled"):
            raise ConfigError("the standard protocol runs on the entangled resource only")
        if not 0 <= self.seed < 2**64:
            raise ConfigError("--seed must be a 64-bit unsigned integer")
        if quantum:
            try:
                BlochParams(self.theta, self.phi)
            except DomainError as exc:
                raise ConfigError(str(exc)) from None


def _config_json(cfg: RunConfig) -> dict:
    d = asdict(cfg)
    d.pop("output")
    return {k: v for k, v in d.items() if v is not None}


def _quantum(cfg: RunConfig) -> str:
    params = BlochParams(cfg.theta, cfg.phi)
    shots = cfg.shots or 1
    if cfg.protocol == "standard":
        ts = run_standard(params, cfg.mode, cfg.seed, shots)
    else:
        ts = run_two_step(params, cfg.resource, cfg.stop_after, cfg.mode, cfg.seed, shots)

    for t in ts:
        t.check_causality()
    summary: dict = {"min_fidelity": min(t.fidelity for t in ts)}
    if cfg.mode == "enumerate":
        total = math.fsum(t.probability for t in ts)
        summary["total_probability"] = total
        if abs(total - 1.0) > TOL:
            raise InvariantViolation(f"branch probabilities sum to {total}")
    else:
        counts = Counter("".join(t.outcome) for t in ts)
        summary["frequencies"] = {k: counts[k] / shots for k in sorted(counts)}
    exact_transfer = cfg.protocol == "standard" or (cfg.resource == "entangled" and cfg.stop_after == "step2")
    if exact_transfer and summary["min_fidelity"] < 1.0 - TOL:
        raise InvariantViolation(f"teleported fidelity {summary['min_fidelity']} below 1")

    branches = [serialize.transcript_to_json(t) for t in ts]
    return serialize.dumps(serialize.document(_config_json(cfg), branches, summary))


def _otp_events(values: dict) -> list[dict]:
    return [
        {"kind": "gate", "party": "Alice", "detail": {"gate": "XOR", "inputs": ["a", "A"], "value": values["a^A"]}},
        {"kind": "message", "party": "Alice", "detail": {"to": "Bob", "bits": [values["a^A"]], "step": "otp"}},
        {"kind": "gate", "party": "Bob", "detail": {"gate": "XOR", "inputs": ["a^A", "B"], "value": values["(a^A)^B"]}},
    ]


def _deloc_events(values: dict) -> list[dict]:
    return [
        {"kind": "gate", "party": "Alice", "detail": {"gate": "XOR", "inputs": ["d", "x"], "value": values["x~=d^x"]}},
        {"kind": "message", "party": "Alice", "detail": {"to": "Bob", "bits": [values["x~=d^x"]], "step": "localize"}},
        {"kind": "gate", "party": "Bob", "detail": {"gate": "XOR", "inputs": ["x~", "y"], "value": values["x~^y"]}},
    ]


def _classical(cfg: RunConfig) -> str:
    otp = cfg.protocol == "otp"
    columns = classical.OTP_COLUMNS if otp else classical.DELOC_COLUMNS
    events = _otp_events if otp else _deloc_events
    table = classical.otp_table(cfg.p) if otp else classical.delocalize_table(cfg.p)
    weights = {tuple(int(r[c]) for c in columns): r["weight"] for r in table}

    if cfg.mode == "enumerate":
        rows = [{c: int(r[c]) for c in columns} for r in table]
        summary = {
            "p_communicated_0": classical.marginal(table, columns[3])[0],
            "p_recovered_0": classical.marginal(table, columns[4])[0],
        }
    elif otp:
        run = classical.sample_otp(cfg.p, cfg.shots, cfg.seed)
        rows = [
            {"a": int(r.input), "A": int(r.key[0]), "B": int(r.key[1]), "a^A": int(r.communicated), "(a^A)^B": int(r.recovered)}
            for r in run.records
        ]
        summary = run.statistics()
    else:
        s = classical.sample_delocalize(cfg.p, cfg.shots, cfg.seed)
        rows = [
            {"d": int(d), "x": int(x), "y": int(y), "x~=d^x": int(xt), "x~^y": int(par)}
            for d, x, y, xt, par in zip(s["d"], s["x"], s["y"], s["x_tilde"], s["parity"])
        ]
        summary = {k: {"p0": f, "stderr": se} for k, (f, se) in ((k, classical.bias_of(s[k])) for k in ("d", "x_tilde", "parity"))}

    for r in rows:
        if r[columns[4]] != r[columns[0]]:
            raise InvariantViolation(f"recovered bit differs from input in {r}")

    if cfg.format == "csv":
        if cfg.mode == "enumerate":
            return classical.table_csv(table, columns)
        lines = [",".join(columns)] + [",".join(str(r[c]) for c in columns) for r in rows]
        return "\n".join(lines) + "\n"

    branches = []
    for r in rows:
        w = weights[tuple(r[c] for c in columns)]
        branches.append({"probability": float(w), "exact_probability": str(w), "values": r, "events": events(r)})
    return serialize.dumps(serialize.document(_config_json(cfg), branches, summary))


def cmd_run(cfg: RunConfig) -> tuple[int, str]:
    """Return the exit code and the serialised output."""
    cfg.validate()
    text = _quantum(cfg) if cfg.protocol in QUANTUM else _classical(cfg)
    return 0, text


def cmd_verify(suite: str = "all", seed: int = DEFAULT_SEED, corrections=None) -> tuple[int, dict]:
    results = verify.run_suite(suite, seed, corrections)
    report = {
        "schema_version": serialize.VERIFY_SCHEMA_VERSION,
        "suite": suite,
        "seed": seed,
        "results": [r.to_dict() for r in results],
        "passed": all(r.passed for r in results),
    }
    return (0 if report["passed"] else 1), report


def _emit(text: str, output: str | None) -> None:
    if output:
        with open(output, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="teleportkit", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run one protocol and print its transcripts")
    run.add_argument("--protocol", required=True, choices=QUANTUM + CLASSICAL)
    run.add_argument("--theta", type=float, help="radians, in [0, pi/2]")
    run.add_argument("--phi", type=float, help="radians, in [0, 2pi)")
    run.add_argument("--resource", choices=("entangled", "classical"), help="two-step only; default entangled")
    run.add_argument("--stop-after", choices=("step1", "step2"), help="two-step only; default step2")
    run.add_argument("--mode", default="enumerate", choices=("enumerate", "sample"))
    run.add_argument("--shots", type=int)
    run.add_argument("--seed", type=int, default=DEFAULT_SEED)
    run.add_argument("--p", type=float, help="probability that the classical source emits 0")
    run.add_argument("--format", default="json", choices=("json", "csv"))
    run.add_argument("--output", help="write here instead of stdout")

    ver = sub.add_parser("verify", help="check every invariant and print a JSON report")
    ver.add_argument("--suite", default="all", choices=("all", "quantum", "classical"))
    ver.add_argument("--seed", type=int, default=DEFAULT_SEED)
    ver.add_argument("--output")
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "verify":
        code, report = cmd_verify(args.suite, args.seed)
        _emit(json.dumps(report, indent=2) + "\n", args.output)
        return code

    cfg = RunConfig(
        protocol=args.protocol,
        theta=args.theta,
        phi=args.phi,
        resource=args.resource,
        stop_after=args.stop_after,
        mode=args.mode,
        shots=args.shots,
        seed=args.seed,
        p=args.p,
        format=args.format,
        output=args.output,
    )
    try:
        code, text = cmd_run(cfg)
    except ConfigError as exc:
        parser.error(str(exc))
    except InvariantViolation as exc:
        print(f"teleportkit: invariant violated: {exc}", file=sys.stderr)
        return 1
    _emit(text, cfg.output)
    return code


if __name__ == "__main__":
    sys.exit(main())
