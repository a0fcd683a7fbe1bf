import itertools
import math

import numpy as np
import pytest
from hypothesis import given

from conftest import thetas
from teleportkit.analysis import (
    Check,
    EnsembleReport,
    b_local_report,
    binomial_bound,
    cross_check,
    estimate_theta,
    phi_scan,
    sample_b_after_step1,
    step1_marginal,
)
from teleportkit.core import TOL, BlochParams

PHIS = (0.0, 1.0, 2.0, 3.0, math.pi / 2, math.pi)


@pytest.mark.parametrize("f0, theta", [(1.0, 0.0), (0.0, math.pi / 2), (0.5, math.pi / 4), (0.75, math.pi / 6)])
def test_estimate_theta_examples(f0, theta):
    assert estimate_theta(f0) == pytest.approx(theta, abs=1e-12)


def test_estimate_theta_clips():
    assert estimate_theta(1.0000001) == 0.0
    assert estimate_theta(-1e-9) == pytest.approx(math.pi / 2)


@given(thetas)
def test_estimate_theta_inverts_exact_population(theta):
    # arccos is ill-conditioned near the poles, so compare populations instead of angles
    f0 = math.cos(theta) ** 2
    assert math.cos(estimate_theta(f0)) ** 2 == pytest.approx(f0, abs=TOL)


def test_binomial_bound():
    assert binomial_bound(0.5, 10_000) == pytest.approx(0.015)
    assert binomial_bound(1.0, 100) == 0.0


def test_check_and_report():
    r = EnsembleReport(10, checks=[Check("x", 0.4, 0.5, 0.2), Check("y", 0.1, 0.5, 0.2)])
    assert r.max_deviation == pytest.approx(0.4)
    assert not r.passed
    d = r.to_dict()
    assert [c["passed"] for c in d["checks"]] == [True, False]


@pytest.mark.parametrize("resource", ["entangled", "classical"])
@pytest.mark.parametrize("theta", np.linspace(0, math.pi / 2, 7))
def test_step1_marginal_is_decohered(resource, theta):
    rho = step1_marginal(BlochParams(theta, 0.8), resource)
    np.testing.assert_allclose(rho.matrix, np.diag([math.cos(theta) ** 2, math.sin(theta) ** 2]), atol=TOL)


@pytest.mark.parametrize("resource", ["entangled", "classical"])
@pytest.mark.parametrize("theta", [0.0, 0.3, math.pi / 4, 1.3])
def test_phi_scan_step1_shows_no_phi(resource, theta):
    scan = phi_scan(theta, PHIS, "step1", resource)
    assert scan.deviation_b < TOL
    assert scan.deviation_a < TOL


def test_phi_scan_step2_restores_phi():
    scan = phi_scan(math.pi / 4, PHIS, "step2")
    assert all(f == pytest.approx(1.0, abs=TOL) for f in scan.fidelities)
    # pure-state trace distance: sqrt(1 - |<psi1|psi2>|^2) = |sin(dphi/2)| sin(2 theta)
    gap = min(abs(p - q) for p, q in itertools.combinations(PHIS, 2))
    assert scan.min_pairwise_distance == pytest.approx(math.sin(gap / 2), abs=1e-9)


def test_phi_scan_step2_classical_loses_phi():
    scan = phi_scan(math.pi / 4, PHIS, "step2", "classical")
    assert scan.min_pairwise_distance < 1e-12
    assert all(f == pytest.approx(0.5, abs=TOL) for f in scan.fidelities)


def test_phi_scan_needs_two_values():
    with pytest.raises(ValueError):
        phi_scan(0.3, [0.1])


@pytest.mark.parametrize("theta, phi", [(0.4, 0.3), (math.pi / 4, 2.0), (1.4, 5.5)])
def test_cross_check_within_three_sigma(theta, phi):
    report = cross_check(BlochParams(theta, phi), shots=2_000)
    assert report.passed, report.to_dict()
    assert set(report.frequencies) >= {"standard:Phi+", "two-step:0+", "two-step:A=1"}


def test_cross_check_rejects_zero_shots():
    with pytest.raises(ValueError):
        cross_check(BlochParams(0.1, 0.1), shots=0)


def test_bob_cannot_tell_the_resources_apart():
    params = BlochParams(0.7, 1.9)
    ent = sample_b_after_step1(params, "entangled", 2_000)
    cl = sample_b_after_step1(params, "classical", 2_000)
    assert np.array_equal(ent, cl)
    np.testing.assert_allclose(step1_marginal(params, "entangled").matrix, step1_marginal(params, "classical").matrix, atol=TOL)


def test_b_local_report_estimates_theta():
    theta = 0.9
    report = b_local_report(BlochParams(theta, 0.4), shots=4_000)
    assert report.passed
    assert report.estimates["rho_B_01_abs"] < TOL
    assert report.estimates["rho_B_00"] == pytest.approx(math.cos(theta) ** 2, abs=TOL)
    # delta method: sd(theta_hat) = sd(f0) / |sin 2 theta|
    sd = math.sqrt(math.cos(theta) ** 2 * math.sin(theta) ** 2 / 4_000) / abs(math.sin(2 * theta))
    assert abs(report.estimates["theta_hat"] - theta) <= 3 * sd
