import cmath
import math

import numpy as np
import pytest
from hypothesis import given

from conftest import phis, thetas
from teleportkit.core import TOL, BlochParams, DensityMatrix, I, X, Z, concurrence, reduced
from teleportkit.protocols import (
    BELL_BITS,
    BITS_BELL,
    BOB,
    ALICE,
    CORRECTIONS,
    Event,
    ProtocolError,
    ResourceKind,
    Transcript,
    correction_for,
    make_resource,
    run_standard,
    run_two_step,
    step1_correction,
    step2_correction,
)

# Independent oracle: plain 8x8 matrices over (a, A, B), first label most significant.
_I2 = np.eye(2)
_X = np.array([[0, 1], [1, 0]], dtype=complex)
_Z = np.diag([1.0, -1.0]).astype(complex)
_P0, _P1 = np.diag([1.0, 0.0]), np.diag([0.0, 1.0])
_PLUS = np.array([1, 1]) / math.sqrt(2)
_MINUS = np.array([1, -1]) / math.sqrt(2)


def _k(*ops):
    out = np.eye(1)
    for op in ops:
        out = np.kron(out, op)
    return out


def _payload(theta, phi):
    return np.array([math.cos(theta), cmath.exp(1j * phi) * math.sin(theta)])


def _oracle_two_step(theta, phi, resource="entangled"):
    """Dict (bitA, x-outcome) -> (probability, Bob's corrected 2x2 state), via density matrices."""
    psi = _payload(theta, phi)
    if resource == "entangled":
        phi_plus = np.array([1, 0, 0, 1]) / math.sqrt(2)
        shared = np.outer(phi_plus, phi_plus.conj())
    else:
        shared = np.diag([0.5, 0, 0, 0.5])
    rho = np.kron(np.outer(psi, psi.conj()), shared)
    cnot = _k(_P0, _I2, _I2) + _k(_P1, _X, _I2)
    rho = cnot @ rho @ cnot.conj().T
    out = {}
    for bit1, pa in ((0, _P0), (1, _P1)):
        for sym, vec in (("+", _PLUS), ("-", _MINUS)):
            proj = _k(np.outer(vec, vec.conj()), pa, _I2)
            r = proj @ rho @ proj
            p = np.trace(r).real
            if p < 1e-14:
                continue
            fix = _k(_I2, _I2, (_Z if sym == "-" else _I2) @ (_X if bit1 else _I2))
            r = fix @ r @ fix.conj().T / p
            rb = np.einsum("abcabd->cd", r.reshape(2, 2, 2, 2, 2, 2))
            out[(str(bit1), sym)] = (p, rb)
    return out


def test_oracle_self_consistency():
    res = _oracle_two_step(0.4, 0.9)
    assert math.fsum(p for p, _ in res.values()) == pytest.approx(1.0, abs=TOL)


@pytest.mark.parametrize("theta, phi", [(math.pi / 3, 1.1), (0.2, 4.0), (math.pi / 4, 0.0), (0.0, 0.0)])
def test_two_step_entangled_against_kron_oracle(theta, phi):
    params = BlochParams(theta, phi)
    oracle = _oracle_two_step(theta, phi)
    ts = run_two_step(params)
    assert {t.outcome for t in ts} == set(oracle)
    psi = _payload(theta, phi)
    for t in ts:
        p, rb = oracle[t.outcome]
        assert t.probability == pytest.approx(p, abs=TOL)
        assert t.fidelity == pytest.approx(np.vdot(psi, rb @ psi).real, abs=TOL)
        assert t.fidelity == pytest.approx(1.0, abs=TOL)


@given(thetas, phis)
def test_classical_resource_step2_matches_density_oracle(theta, phi):
    oracle = _oracle_two_step(theta, phi, "classical")
    psi = _payload(theta, phi)
    ts = run_two_step(BlochParams(theta, phi), "classical", "step2")
    for t in ts:
        p, rb = oracle[t.outcome]
        assert t.probability == pytest.approx(p, abs=TOL)
        f = np.vdot(psi, rb @ psi).real
        assert t.fidelity == pytest.approx(f, abs=TOL)
        assert t.fidelity == pytest.approx(math.cos(theta) ** 4 + math.sin(theta) ** 4, abs=TOL)


def test_classical_step2_at_quarter_pi_is_one_half():
    ts = run_two_step(BlochParams(math.pi / 4, 0.3), "classical")
    assert all(t.fidelity == pytest.approx(0.5, abs=TOL) for t in ts)


@given(thetas, phis)
def test_standard_branches_uniform_and_exact(theta, phi):
    ts = run_standard(BlochParams(theta, phi))
    assert [t.outcome[0] for t in ts] == ["Phi+", "Phi-", "Psi+", "Psi-"]
    for t in ts:
        assert t.probability == pytest.approx(0.25, abs=TOL)
        assert t.fidelity == pytest.approx(1.0, abs=TOL)
        t.check_causality()


def test_uncorrected_branch_states_match_expansion():
    theta, phi = 0.6, 2.0
    c, s = math.cos(theta), cmath.exp(1j * phi) * math.sin(theta)
    expected = {"Phi+": [c, s], "Phi-": [c, -s], "Psi+": [s, c], "Psi-": [-s, c]}
    for t in run_standard(BlochParams(theta, phi)):
        got = t.uncorrected_state.amplitudes
        want = np.array(expected[t.outcome[0]])
        assert abs(abs(np.vdot(want, got)) - 1) < TOL


@pytest.mark.parametrize("bit, gate", [(0, I), (1, X)])
def test_step1_correction(bit, gate):
    assert step1_correction(bit) is gate


@pytest.mark.parametrize("bit, gate", [(0, I), (1, Z), ("+", I), ("-", Z)])
def test_step2_correction(bit, gate):
    assert step2_correction(bit) is gate


@pytest.mark.parametrize("bad", [2, -1])
def test_correction_bad_bits(bad):
    with pytest.raises(ValueError):
        step1_correction(bad)
    with pytest.raises(ValueError):
        step2_correction(bad)


def test_correction_table():
    assert correction_for("Psi-") == (X, Z)
    assert correction_for("Phi+") == (I,)
    with pytest.raises(ValueError):
        correction_for("Chi")


def test_bell_bit_encoding_is_a_bijection():
    assert set(BELL_BITS.values()) == {(0, 0), (0, 1), (1, 0), (1, 1)}
    assert all(BITS_BELL[b] == k for k, b in BELL_BITS.items())


def test_make_resource():
    ent = make_resource("entangled")
    assert concurrence(ent) == pytest.approx(1.0, abs=TOL)
    cl = make_resource(ResourceKind.CLASSICAL)
    assert isinstance(cl, DensityMatrix)
    np.testing.assert_allclose(cl.matrix, np.diag([0.5, 0, 0, 0.5]))
    assert concurrence(cl) == pytest.approx(0.0, abs=TOL)
    with pytest.raises(ValueError):
        make_resource("quantum")


def test_parties_hold_only_their_particles():
    ALICE.require(("a", "A"))
    BOB.require(("B",))
    with pytest.raises(ProtocolError):
        BOB.require(("A",))
    with pytest.raises(ProtocolError):
        ALICE.require(("B",))


def test_causality_violation_detected():
    t = run_standard(BlochParams(0.3, 0.3))[0]
    swapped = [e for e in t.events if e.kind != "message"] + [e for e in t.events if e.kind == "message"]
    bad = Transcript(**{**t.__dict__, "events": tuple(swapped)})
    with pytest.raises(ProtocolError):
        bad.check_causality()


def test_every_message_goes_from_alice_to_bob():
    for t in run_two_step(BlochParams(0.5, 0.5)) + run_standard(BlochParams(0.5, 0.5)):
        assert all(m.sender == "Alice" and m.receiver == "Bob" for m in t.messages)
        corrections = [e for e in t.events if e.kind == "correction"]
        assert corrections and all(e.party == "Bob" for e in corrections)


@given(thetas, phis)
def test_messages_are_unbiased(theta, phi):
    std = run_standard(BlochParams(theta, phi))
    for pos in (0, 1):
        assert math.fsum(t.probability for t in std if t.bits[pos] == 0) == pytest.approx(0.5, abs=TOL)
    two = run_two_step(BlochParams(theta, phi))
    for pos in (0, 1):
        assert math.fsum(t.probability for t in two if t.bits[pos] == 0) == pytest.approx(0.5, abs=TOL)


@given(thetas, phis)
def test_no_signaling_before_correction(theta, phi):
    # averaged over Alice's outcomes, Bob's uncorrected state is I/2 whatever the payload
    for ts in (run_standard(BlochParams(theta, phi)), run_two_step(BlochParams(theta, phi))):
        avg = sum(t.probability * _density(t.uncorrected_state) for t in ts)
        np.testing.assert_allclose(avg, np.eye(2) / 2, atol=TOL)


def _density(state):
    if isinstance(state, DensityMatrix):
        return state.matrix
    return np.outer(state.amplitudes, state.amplitudes.conj())


@given(thetas, phis)
def test_two_step_matches_standard_via_bit_encoding(theta, phi):
    params = BlochParams(theta, phi)
    std = {t.outcome[0]: t for t in run_standard(params)}
    two = run_two_step(params)
    assert {t.bell_outcome for t in two} == set(std)
    for t in two:
        s = std[t.bell_outcome]
        assert t.probability == pytest.approx(s.probability, abs=TOL)
        assert abs(t.fidelity - s.fidelity) < TOL


def test_step1_snapshot_and_entanglement_swap():
    theta, phi = 0.5, 1.7
    for t in run_two_step(BlochParams(theta, phi), "entangled", "step1"):
        assert t.snapshots["step1"].labels == ("a", "B")
        assert concurrence(t.snapshots["step1"]) == pytest.approx(abs(math.sin(2 * theta)), abs=1e-9)
        np.testing.assert_allclose(
            reduced(t.snapshots["step1"], "B").matrix, np.diag([math.cos(theta) ** 2, math.sin(theta) ** 2]), atol=TOL
        )
    for t in run_two_step(BlochParams(theta, phi), "classical", "step1"):
        assert concurrence(t.snapshots["step1"]) == pytest.approx(0.0, abs=1e-9)


def test_sampling_is_deterministic_per_seed():
    params = BlochParams(0.9, 0.1)
    a = [t.outcome for t in run_two_step(params, mode="sample", seed=7, shots=50)]
    b = [t.outcome for t in run_two_step(params, mode="sample", seed=7, shots=50)]
    c = [t.outcome for t in run_two_step(params, mode="sample", seed=8, shots=50)]
    assert a == b and a != c
    assert all(t.fidelity == pytest.approx(1.0, abs=TOL) for t in run_standard(params, "sample", 3, 20))


def test_bad_arguments():
    params = BlochParams(0.1, 0.1)
    with pytest.raises(ValueError):
        run_standard(params, "guess")
    with pytest.raises(ValueError):
        run_two_step(params, stop_after="step3")
    with pytest.raises(ValueError):
        run_two_step(params, mode="sample", shots=0)


def test_event_kinds():
    kinds = {e.kind for t in run_two_step(BlochParams(0.2, 0.2)) for e in t.events}
    assert kinds == {"prepare", "gate", "measure", "message", "correction"}
    assert isinstance(run_standard(BlochParams(0.2, 0.2))[0].events[0], Event)
