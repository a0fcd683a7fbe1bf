"""Named invariant checks run by ``teleportkit verify``.

Each check returns a measured value and the bound it must not exceed. Exact
checks use tolerance ``TOL``; sampled ones use 3-sigma binomial bounds with
seeds derived from the suite seed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Mapping, Sequence

import numpy as np

from teleportkit import analysis, classical
from teleportkit.core import (
    TOL,
    BlochParams,
    Gate,
    StateVector,
    apply_gate,
    concurrence,
    density_from,
    fidelity,
    mix,
    reduced,
    X,
    Z,
    CNOT,
)
from teleportkit.protocols import (
    CORRECTIONS,
    ProtocolError,
    make_resource,
    run_standard,
    run_two_step,
    _prepare,
    ResourceKind,
)
from teleportkit.rng import DEFAULT_SEED, substream

SAMPLE_SHOTS = 10_000
P_GRID = (0, 0.1, 0.5, 0.9, 1)
PHI_SET = (0.0, 1.0, 2.0, 3.0, math.pi / 2, math.pi)


@dataclass(frozen=True)
class CheckResult:
    name: str
    suite: str
    value: float
    bound: float
    passed: bool
    detail: str = ""

    def to_dict(self) -> dict:
        d = {"name": self.name, "suite": self.suite, "value": float(self.value), "bound": float(self.bound), "passed": bool(self.passed)}
        if self.detail:
            d["detail"] = self.detail
        return d


def _result(name, suite, value, bound, detail=""):
    return CheckResult(name, suite, float(value), float(bound), bool(value <= bound), detail)


def random_params(rng: np.random.Generator, n: int) -> list[BlochParams]:
    thetas = rng.uniform(0.0, math.pi / 2, n)
    phis = rng.uniform(0.0, 2 * math.pi, n)
    return [BlochParams(float(t), float(p)) for t, p in zip(thetas, phis)]


def theta_grid(n: int = 50) -> list[float]:
    return [float(t) for t in np.linspace(0.0, math.pi / 2, n)]


class Context:
    def __init__(self, seed: int, corrections: Mapping[str, Sequence[Gate]] | None = None):
        self.seed = seed
        self.corrections = corrections

    def params(self, name: str, n: int) -> list[BlochParams]:
        return random_params(substream(self.seed, "verify", name), n)


# --- quantum -------------------------------------------------------------------


def check_bell_uniformity(ctx: Context) -> CheckResult:
    worst = 0.0
    counts = set()
    for p in ctx.params("bell-uniformity", 100):
        ts = run_standard(p, corrections=ctx.corrections)
        counts.add(len(ts))
        worst = max(worst, max(abs(t.probability - 0.25) for t in ts))
    if counts != {4}:
        worst = max(worst, 1.0)
    return _result("bell-branch-uniformity (1/4,1/4,1/4,1/4)", "quantum", worst, TOL, f"branch counts {sorted(counts)}")


def check_teleportation_standard(ctx: Context) -> CheckResult:
    worst = 0.0
    for p in ctx.params("correctness", 1000):
        worst = max(worst, max(1.0 - t.fidelity for t in run_standard(p, corrections=ctx.corrections)))
    return _result("teleportation-correctness:standard", "quantum", worst, TOL, "1 - min branch fidelity")


def check_teleportation_two_step(ctx: Context) -> CheckResult:
    worst = 0.0
    for p in ctx.params("correctness", 1000):
        worst = max(worst, max(1.0 - t.fidelity for t in run_two_step(p)))
    return _result("teleportation-correctness:two-step", "quantum", worst, TOL, "1 - min branch fidelity")


def check_step1_marginal(ctx: Context) -> CheckResult:
    worst = 0.0
    for theta in theta_grid():
        expected = np.diag([math.cos(theta) ** 2, math.sin(theta) ** 2])
        for resource in ResourceKind:
            for t in run_two_step(BlochParams(theta, 0.7), resource, "step1"):
                worst = max(worst, float(np.max(np.abs(t.final_state.matrix - expected))))
    return _result("step1-marginal diag(cos^2, sin^2)", "quantum", worst, TOL, "both resources, 50-point theta grid")


def check_phi_delocalization(ctx: Context) -> CheckResult:
    worst = 0.0
    for theta in theta_grid(10):
        scan = analysis.phi_scan(theta, PHI_SET, "step1")
        worst = max(worst, scan.deviation_b, scan.deviation_a)
    return _result("phi-delocalization", "quantum", worst, TOL, "max-abs rho_B / rho_a difference across phi")


def check_classical_step2(ctx: Context) -> CheckResult:
    worst = 0.0
    for theta in theta_grid():
        expected = math.cos(theta) ** 4 + math.sin(theta) ** 4
        for t in run_two_step(BlochParams(theta, 1.0), "classical", "step2"):
            worst = max(worst, abs(t.fidelity - expected))
    return _result("classical-resource step2 fidelity cos^4+sin^4", "quantum", worst, TOL)


def check_entanglement_swap(ctx: Context) -> CheckResult:
    worst = abs(concurrence(make_resource("entangled")) - 1.0)
    worst = max(worst, concurrence(make_resource("classical")))
    for theta in theta_grid():
        for t in run_two_step(BlochParams(theta, 0.3), "entangled", "step1"):
            worst = max(worst, abs(concurrence(t.snapshots["step1"]) - abs(math.sin(2 * theta))))
        for t in run_two_step(BlochParams(theta, 0.3), "classical", "step1"):
            worst = max(worst, concurrence(t.snapshots["step1"]))
    return _result("entanglement-swap", "quantum", worst, 1e-9, "concurrence(A,B) before, (a,B) after step 1")


def check_measurement_order(ctx: Context) -> CheckResult:
    worst = 0.0
    for p in ctx.params("order", 200):
        std = {t.outcome[0]: t for t in run_standard(p, corrections=ctx.corrections)}
        two = {t.bell_outcome: t for t in run_two_step(p)}
        if set(std) != set(two):
            return _result("measurement-order-equivalence", "quantum", 1.0, TOL, "outcome sets differ")
        for kind, ts in std.items():
            tt = two[kind]
            worst = max(
                worst,
                abs(ts.probability - tt.probability),
                abs(ts.fidelity - tt.fidelity),
                1.0 - fidelity(tt.uncorrected_state, ts.uncorrected_state),
            )
    return _result("measurement-order-equivalence", "quantum", worst, TOL, "two-step vs Bell measurement, branch-matched")


def check_message_unbiasedness(ctx: Context) -> CheckResult:
    worst = 0.0
    for p in ctx.params("unbiased", 100):
        for ts in (run_standard(p, corrections=ctx.corrections), run_two_step(p), run_two_step(p, "classical")):
            for i in range(2):
                p0 = math.fsum(t.probability for t in ts if t.bits[i] == 0)
                worst = max(worst, abs(p0 - 0.5))
    return _result("message-unbiasedness", "quantum", worst, TOL, "P(bit = 0) for every bit Alice sends")


def check_no_signaling(ctx: Context) -> CheckResult:
    worst = 0.0
    for p in ctx.params("no-signaling", 50):
        state, _ = _prepare(p, ResourceKind.ENTANGLED)
        before = reduced(state, "B").matrix
        for ts in (run_standard(p, corrections=ctx.corrections), run_two_step(p), run_two_step(p, stop_after="step1")):
            after = mix([(t.probability, t.uncorrected_state) for t in ts]).matrix
            worst = max(worst, float(np.max(np.abs(after - before))))
    return _result("no-signaling", "quantum", worst, TOL, "uncorrected branch mixture vs initial rho_B")


def check_causality(ctx: Context) -> CheckResult:
    bad = 0
    for p in ctx.params("causality", 20):
        for ts in (run_standard(p, corrections=ctx.corrections), run_two_step(p), run_two_step(p, "classical", "step1")):
            for t in ts:
                try:
                    t.check_causality()
                except ProtocolError:
                    bad += 1
    return _result("causal-order", "quantum", bad, 0, "corrections preceding their message")


def check_born_and_norm(ctx: Context) -> CheckResult:
    worst = 0.0
    for p in ctx.params("born", 100):
        for ts in (
            run_standard(p, corrections=ctx.corrections),
            run_two_step(p),
            run_two_step(p, stop_after="step1"),
            run_two_step(p, "classical"),
        ):
            worst = max(worst, abs(math.fsum(t.probability for t in ts) - 1.0))
        state, _ = _prepare(p, ResourceKind.ENTANGLED)
        for gate, targets in ((CNOT, ("a", "A")), (X, ("B",)), (Z, ("a",))):
            out = apply_gate(state, gate, targets)
            worst = max(worst, abs(float(np.vdot(out.amplitudes, out.amplitudes).real) - 1.0))
    return _result("born-completeness and norm-preservation", "quantum", worst, TOL)


def check_global_phase(ctx: Context) -> CheckResult:
    worst = 0.0
    rng = substream(ctx.seed, "verify", "phase")
    for p in ctx.params("phase", 50):
        t = run_standard(p)[0].target
        phase = np.exp(1j * rng.uniform(0, 2 * math.pi))
        shifted = StateVector(t.labels, t.amplitudes * phase)
        rho = density_from(run_two_step(p, stop_after="step1")[0].final_state)
        worst = max(
            worst,
            abs(fidelity(rho, shifted) - fidelity(rho, t)),
            float(np.max(np.abs(density_from(shifted).matrix - density_from(t).matrix))),
        )
    return _result("global-phase-robustness", "quantum", worst, TOL)


def check_estimator(ctx: Context) -> CheckResult:
    worst = 0.0
    for theta in np.linspace(0.0, math.pi / 2, 100):
        worst = max(worst, abs(analysis.estimate_theta(math.cos(theta) ** 2) - theta))
    return _result("estimator-consistency", "quantum", worst, TOL, "exact f0 -> theta over 100-point grid")


def check_resource_indistinguishability(ctx: Context) -> CheckResult:
    worst = 0.0
    p = BlochParams(1.0, 2.0)
    ent = analysis.b_local_report(p, "entangled", 2000, ctx.seed)
    cls = analysis.b_local_report(p, "classical", 2000, ctx.seed)
    for key in ent.estimates:
        worst = max(worst, abs(ent.estimates[key] - cls.estimates[key]))
    for key in ent.frequencies:
        worst = max(worst, abs(ent.frequencies[key] - cls.frequencies[key]))
    return _result("resource-indistinguishability at step 1", "quantum", worst, TOL, "B-local quantities")


def check_quantum_sampling(ctx: Context) -> CheckResult:
    report = analysis.cross_check(BlochParams(math.pi / 3, 1.1), ctx.seed, SAMPLE_SHOTS)
    b = analysis.b_local_report(BlochParams(0.7, 0.0), "classical", SAMPLE_SHOTS, ctx.seed)
    checks = report.checks + b.checks
    ratio = max(c.deviation / c.bound for c in checks)
    return _result("sampling-consistency:quantum", "quantum", ratio, 1.0, "max deviation / 3-sigma bound")


# --- classical -----------------------------------------------------------------


def check_otp_correctness(ctx: Context) -> CheckResult:
    bad = sum(int(classical.otp_decode(classical.otp_encode(a, k), k)) != a for a in (0, 1) for k in (0, 1))
    bad += sum(int(r["(a^A)^B"]) != int(r["a"]) for r in classical.otp_table())
    return _result("otp-correctness (Table 1)", "classical", bad, 0)


def check_otp_unbiased(ctx: Context) -> CheckResult:
    worst = Fraction(0)
    for p in P_GRID:
        dist = classical.marginal(classical.otp_table(p), "a^A")
        worst = max(worst, abs(dist[0] - Fraction(1, 2)))
    return _result("otp-communicated-bit (1/2,1/2)", "classical", float(worst), 0)


def check_otp_independence(ctx: Context) -> CheckResult:
    worst = Fraction(0)
    for p in P_GRID:
        rows = classical.otp_table(p)
        pa = classical.marginal(rows, "a")
        pc = classical.marginal(rows, "a^A")
        for (a, c), pj in classical.joint(rows, "a", "a^A").items():
            worst = max(worst, abs(pj - pa[a] * pc[c]))
    return _result("otp-independence P(a,c)=P(a)P(c)", "classical", float(worst), 0)


def check_distribution_transport(ctx: Context) -> CheckResult:
    worst = Fraction(0)
    for p in P_GRID:
        rec = classical.marginal(classical.otp_table(p), "(a^A)^B")
        worst = max(worst, abs(rec[0] - Fraction(repr(float(p)))))
    return _result("distribution-transport", "classical", float(worst), 0)


def check_one_output_xor(ctx: Context) -> CheckResult:
    keep = classical.sample_otp(0.3, 1000, ctx.seed, keep_copy=True)
    drop = classical.sample_otp(0.3, 1000, ctx.seed, keep_copy=False)
    diff = sum(k != d for k, d in zip(keep.records, drop.records)) + abs(len(keep.records) - len(drop.records))
    return _result("one-output-xor (keep vs destroy copy)", "classical", diff, 0)


def check_delocalize_identity(ctx: Context) -> CheckResult:
    bad = sum(int(classical.localize(classical.delocalize(d, x), x)) != d for d in (0, 1) for x in (0, 1))
    bad += sum(int(r["x~^y"]) != int(r["d"]) for r in classical.delocalize_table())
    return _result("localize-after-delocalize identity", "classical", bad, 0)


def check_delocalize_unbiased(ctx: Context) -> CheckResult:
    worst = Fraction(0)
    for p in P_GRID + (Fraction(1, 3),):
        worst = max(worst, abs(classical.marginal(classical.delocalize_table(p), "x~=d^x")[0] - Fraction(1, 2)))
    return _result("delocalize P(x~=0)=1/2", "classical", float(worst), 0)


def check_key_reuse(ctx: Context) -> CheckResult:
    key = classical.SharedKey([(0, 0), (1, 1)])
    key.take(0)
    try:
        key.take(0)
    except classical.KeyReuseError:
        return _result("key-reuse-rejected", "classical", 0, 0)
    return _result("key-reuse-rejected", "classical", 1, 0)


def check_classical_sampling(ctx: Context) -> CheckResult:
    ratios = []
    for p in (0.1, 0.5, 0.9):
        run = classical.sample_otp(p, SAMPLE_SHOTS, ctx.seed)
        for stream, expected in ((run.inputs, p), (run.communicated, 0.5), (run.recovered, p)):
            f, _ = classical.bias_of(stream)
            bound = analysis.binomial_bound(expected, SAMPLE_SHOTS)
            ratios.append(abs(f - expected) / bound if bound else float(f != expected) * math.inf)
        dl = classical.sample_delocalize(p, SAMPLE_SHOTS, ctx.seed)
        f, _ = classical.bias_of(dl["x_tilde"])
        ratios.append(abs(f - 0.5) / analysis.binomial_bound(0.5, SAMPLE_SHOTS))
        if not np.array_equal(dl["parity"], dl["d"]):
            ratios.append(math.inf)
    return _result("sampling-consistency:classical", "classical", max(ratios), 1.0, "max deviation / 3-sigma bound")


QUANTUM: tuple[Callable[[Context], CheckResult], ...] = (
    check_bell_uniformity,
    check_teleportation_standard,
    check_teleportation_two_step,
    check_step1_marginal,
    check_phi_delocalization,
    check_classical_step2,
    check_entanglement_swap,
    check_measurement_order,
    check_message_unbiasedness,
    check_no_signaling,
    check_causality,
    check_born_and_norm,
    check_global_phase,
    check_estimator,
    check_resource_indistinguishability,
    check_quantum_sampling,
)

CLASSICAL: tuple[Callable[[Context], CheckResult], ...] = (
    check_otp_correctness,
    check_otp_unbiased,
    check_otp_independence,
    check_distribution_transport,
    check_one_output_xor,
    check_delocalize_identity,
    check_delocalize_unbiased,
    check_key_reuse,
    check_classical_sampling,
)


def run_suite(
    suite: str = "all",
    seed: int = DEFAULT_SEED,
    corrections: Mapping[str, Sequence[Gate]] | None = None,
) -> list[CheckResult]:
    if suite not in ("all", "quantum", "classical"):
        raise ValueError(f"unknown suite {suite!r}")
    ctx = Context(seed, corrections)
    checks = ()
    if suite in ("all", "quantum"):
        checks += QUANTUM
    if suite in ("all", "classical"):
        checks += CLASSICAL
    return [check(ctx) for check in checks]


def swapped_corrections() -> dict[str, tuple[Gate, ...]]:
    """Correction table with X and Z exchanged; every check that uses it should fail."""
    swap = {X.name: Z, Z.name: X}
    return {k: tuple(swap.get(g.name, g) for g in gates) for k, gates in CORRECTIONS.items()}
