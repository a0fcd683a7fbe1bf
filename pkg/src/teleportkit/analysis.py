"""Ensemble-level checks: theta from Bob's z statistics, phi scans, sampled vs exact."""

from __future__ import annotations

import itertools
import math
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from teleportkit.core import (
    Z_BASIS,
    BlochParams,
    DensityMatrix,
    State,
    measure,
    mix,
    reduced,
    trace_distance,
)
from teleportkit.protocols import (
    ResourceKind,
    run_standard,
    run_two_step,
    two_step_branches,
)
from teleportkit.rng import DEFAULT_SEED, substream

SIGMAS = 3.0


def estimate_theta(f0: float) -> float:
    """Invert ``f0 = cos^2(theta)``; ``f0`` is the frequency of z-outcome 0 on B."""
    return math.acos(math.sqrt(min(1.0, max(0.0, f0))))


def binomial_bound(p: float, shots: int, sigmas: float = SIGMAS) -> float:
    return sigmas * math.sqrt(p * (1.0 - p) / shots)


@dataclass(frozen=True)
class Check:
    name: str
    observed: float
    expected: float
    bound: float

    @property
    def deviation(self) -> float:
        return abs(self.observed - self.expected)

    @property
    def passed(self) -> bool:
        return self.deviation <= self.bound


@dataclass
class EnsembleReport:
    shots: int
    frequencies: dict[str, float] = field(default_factory=dict)
    estimates: dict[str, float] = field(default_factory=dict)
    checks: list[Check] = field(default_factory=list)

    @property
    def max_deviation(self) -> float:
        return max((c.deviation for c in self.checks), default=0.0)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def to_dict(self) -> dict:
        return {
            "shots": self.shots,
            "frequencies": self.frequencies,
            "estimates": self.estimates,
            "checks": [
                {
                    "name": c.name,
                    "observed": c.observed,
                    "expected": c.expected,
                    "deviation": c.deviation,
                    "bound": c.bound,
                    "passed": c.passed,
                }
                for c in self.checks
            ],
            "max_deviation": self.max_deviation,
            "passed": self.passed,
        }


def compare_frequencies(
    report: EnsembleReport,
    prefix: str,
    counts: Mapping[str, int],
    exact: Mapping[str, float],
    shots: int,
) -> EnsembleReport:
    """Append one 3-sigma check per outcome of ``exact``."""
    for key, p in exact.items():
        f = counts.get(key, 0) / shots
        report.frequencies[f"{prefix}{key}"] = f
        report.checks.append(Check(f"{prefix}{key}", f, p, binomial_bound(p, shots)))
    return report


def _distribution(transcripts, key) -> dict[str, float]:
    dist: dict[str, float] = {}
    for t in transcripts:
        k = key(t)
        dist[k] = dist.get(k, 0.0) + t.probability
    return dist


def cross_check(params: BlochParams, seed: int = DEFAULT_SEED, shots: int = 10_000) -> EnsembleReport:
    """Sampled Bell outcomes and two-step bits against their enumerated distributions."""
    if shots < 1:
        raise ValueError("shots must be >= 1")
    report = EnsembleReport(shots)

    exact_std = _distribution(run_standard(params), lambda t: t.outcome[0])
    sampled_std = Counter(t.outcome[0] for t in run_standard(params, "sample", seed, shots))
    compare_frequencies(report, "standard:", sampled_std, exact_std, shots)

    two = run_two_step(params, "entangled", "step2", "sample", seed, shots)
    exact_two = _distribution(run_two_step(params), lambda t: "".join(t.outcome))
    compare_frequencies(report, "two-step:", Counter("".join(t.outcome) for t in two), exact_two, shots)
    exact_a = _distribution(run_two_step(params), lambda t: t.outcome[0])
    compare_frequencies(report, "two-step:A=", Counter(t.outcome[0] for t in two), exact_a, shots)
    return report


def sample_b_after_step1(
    params: BlochParams,
    resource: ResourceKind | str,
    shots: int,
    seed: int = DEFAULT_SEED,
) -> np.ndarray:
    """Bob's z-outcomes on B after step 1, one per shot.

    The stream does not depend on ``resource``: equal probabilities on Bob's
    side give equal samples, so the two resources can be compared draw by draw.
    """
    resource = ResourceKind(resource)
    rng = substream(seed, "b-local")
    out = np.empty(shots, dtype=np.uint8)
    for i in range(shots):
        t = next(two_step_branches(params, resource, "step1", rng))
        out[i] = int(measure(t.final_state, Z_BASIS, "B", "sample", rng).branches[0].outcome[0])
    return out


def b_local_report(
    params: BlochParams,
    resource: ResourceKind | str = ResourceKind.ENTANGLED,
    shots: int = 10_000,
    seed: int = DEFAULT_SEED,
) -> EnsembleReport:
    """What Bob alone sees after step 1: his exact marginal and a sampled theta estimate."""
    report = EnsembleReport(shots)
    rho_b = step1_marginal(params, resource)
    p0 = float(rho_b.matrix[0, 0].real)
    outcomes = sample_b_after_step1(params, resource, shots, seed)
    f0 = float(np.count_nonzero(outcomes == 0)) / shots
    report.frequencies["B=0"] = f0
    report.estimates["theta_hat"] = estimate_theta(f0)
    report.estimates["rho_B_00"] = p0
    report.estimates["rho_B_11"] = float(rho_b.matrix[1, 1].real)
    report.estimates["rho_B_01_abs"] = float(abs(rho_b.matrix[0, 1]))
    report.checks.append(Check("B=0", f0, math.cos(params.theta) ** 2, binomial_bound(math.cos(params.theta) ** 2, shots)))
    return report


def step1_marginal(params: BlochParams, resource: ResourceKind | str, label: str = "B") -> DensityMatrix:
    """Branch-averaged reduced state of ``label`` after the step-1 correction."""
    branches = run_two_step(params, resource, "step1")
    return mix([(t.probability, reduced(t.snapshots["step1"], label)) for t in branches])


@dataclass
class PhiScan:
    theta: float
    phis: tuple[float, ...]
    stop_after: str
    deviation_b: float
    deviation_a: float = 0.0
    fidelities: tuple[float, ...] = ()
    min_pairwise_distance: float = 0.0


def _max_abs(states: Sequence[State]) -> float:
    mats = [s.matrix for s in states]
    return max((float(np.max(np.abs(m1 - m2))) for m1, m2 in itertools.combinations(mats, 2)), default=0.0)


def phi_scan(
    theta: float,
    phis: Iterable[float],
    stop_after: str = "step1",
    resource: ResourceKind | str = ResourceKind.ENTANGLED,
) -> PhiScan:
    """Compare local states across ``phis`` at fixed ``theta``.

    At step 1 the entrywise deviation of rho_B and rho_a is reported per
    A-outcome branch. At step 2 the corrected B states are compared with their
    targets and with each other.
    """
    phis = tuple(float(p) for p in phis)
    if len(phis) < 2:
        raise ValueError("need at least two phi values")
    runs = [run_two_step(BlochParams(theta, phi), resource, stop_after) for phi in phis]
    if stop_after == "step1":
        dev_b = dev_a = 0.0
        for outcome in ("0", "1"):
            per_phi = [next(t for t in ts if t.outcome == (outcome,)) for ts in runs]
            dev_b = max(dev_b, _max_abs([reduced(t.snapshots["step1"], "B") for t in per_phi]))
            dev_a = max(dev_a, _max_abs([reduced(t.snapshots["step1"], "a") for t in per_phi]))
        return PhiScan(theta, phis, stop_after, dev_b, dev_a)

    fids = tuple(min(t.fidelity for t in ts) for ts in runs)
    finals = [mix([(t.probability, t.final_state) for t in ts]) for ts in runs]
    dist = min(trace_distance(r1, r2) for r1, r2 in itertools.combinations(finals, 2))
    return PhiScan(theta, phis, stop_after, _max_abs(finals), 0.0, fids, dist)

