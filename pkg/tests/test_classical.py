from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from teleportkit.classical import (
    DELOC_COLUMNS,
    OTP_COLUMNS,
    Bit,
    BitSource,
    KeyReuseError,
    SharedKey,
    bias_of,
    delocalize,
    delocalize_table,
    joint,
    localize,
    marginal,
    otp_decode,
    otp_encode,
    otp_table,
    run_otp,
    sample_delocalize,
    sample_otp,
    table_csv,
)
from teleportkit.rng import DEFAULT_SEED, substream

HALF = Fraction(1, 2)
fractions_p = st.fractions(min_value=0, max_value=1, max_denominator=1000)

# (a, A, B, a^A, (a^A)^B), in enumeration order
OTP_TRUTH = [(0, 0, 0, 0, 0), (0, 1, 1, 1, 0), (1, 0, 0, 1, 1), (1, 1, 1, 0, 1)]
DELOC_TRUTH = [(0, 0, 0, 0, 0), (0, 1, 1, 1, 0), (1, 0, 0, 1, 1), (1, 1, 1, 0, 1)]


def test_bit_arithmetic():
    assert Bit(1) ^ Bit(1) is Bit.ZERO
    assert 1 ^ Bit(0) == Bit.ONE and isinstance(1 ^ Bit(0), Bit)
    assert ~Bit.ZERO is Bit.ONE
    assert str(Bit.ONE) == "1"


@pytest.mark.parametrize("a, k", [(0, 0), (0, 1), (1, 0), (1, 1)])
def test_otp_round_trip(a, k):
    c = otp_encode(a, k)
    assert c == a ^ k
    assert otp_decode(c, k) == a


@pytest.mark.parametrize("d, x", [(0, 0), (0, 1), (1, 0), (1, 1)])
def test_localize_inverts_delocalize(d, x):
    assert localize(delocalize(d, x), x) == d


def test_otp_table_rows():
    rows = otp_table(Fraction(1, 3))
    assert [tuple(int(r[c]) for c in OTP_COLUMNS) for r in rows] == OTP_TRUTH
    assert [r["weight"] for r in rows] == [Fraction(1, 6)] * 2 + [Fraction(1, 3)] * 2
    assert sum(r["weight"] for r in rows) == 1


def test_delocalize_table_rows():
    rows = delocalize_table(0.3)
    assert [tuple(int(r[c]) for c in DELOC_COLUMNS) for r in rows] == DELOC_TRUTH
    assert [r["weight"] for r in rows] == [Fraction(3, 20)] * 2 + [Fraction(7, 20)] * 2


@pytest.mark.parametrize("p", [0, 0.1, 0.5, 0.9, 1])
def test_otp_communicated_bit_is_uniform_and_independent(p):
    rows = otp_table(p)
    assert marginal(rows, "a^A") == {0: HALF, 1: HALF}
    assert all(r["(a^A)^B"] == r["a"] for r in rows)
    pa = marginal(rows, "a")
    j = joint(rows, "a", "a^A")
    assert all(j[a, c] == pa[a] * HALF for a in (0, 1) for c in (0, 1))


def test_float_p_goes_through_repr():
    assert otp_table(0.1)[0]["weight"] == Fraction(1, 20)


@given(fractions_p)
def test_exact_marginals_for_any_p(p):
    assert marginal(otp_table(p), "a^A") == {0: HALF, 1: HALF}
    assert marginal(delocalize_table(p), "x~=d^x") == {0: HALF, 1: HALF}
    assert marginal(delocalize_table(p), "x~^y") == {0: p, 1: 1 - p}
    assert marginal(otp_table(p), "(a^A)^B") == marginal(otp_table(p), "a")


@pytest.mark.parametrize("p", [-0.1, 1.5, Fraction(3, 2)])
def test_p_out_of_range(p):
    with pytest.raises(ValueError):
        otp_table(p)
    if isinstance(p, float):
        with pytest.raises(ValueError):
            BitSource(p)


def test_table_csv_column_order():
    text = table_csv(otp_table(HALF), OTP_COLUMNS)
    lines = text.splitlines()
    assert lines[0] == "a,A,B,a^A,(a^A)^B,weight"
    assert lines[1] == "0,0,0,0,0,1/4"
    assert len(lines) == 5


def test_key_single_use():
    key = SharedKey([(0, 0), (1, 1), (1, 1)])
    assert key.take(1) == (Bit.ONE, Bit.ONE)
    with pytest.raises(KeyReuseError):
        key.take(1)
    assert key.remaining == 2
    with pytest.raises(KeyReuseError):
        key.take_block(0, 2)
    a, b = key.take_block(2, 1)
    assert a.tolist() == b.tolist() == [1]


def test_run_otp_refuses_short_key():
    key = SharedKey.generate(5, substream(1, "k"))
    with pytest.raises(ValueError):
        run_otp(BitSource(0.5, substream(1, "s")), key, 6)


def test_run_otp_refuses_reused_key():
    key = SharedKey.generate(10, substream(1, "k"))
    run_otp(BitSource(0.5, substream(1, "s")), key, 5)
    with pytest.raises(KeyReuseError):
        run_otp(BitSource(0.5, substream(1, "s")), key, 5)
    run_otp(BitSource(0.5, substream(1, "s")), key, 5, start=5)
    assert key.remaining == 0


def test_generated_keys_agree():
    key = SharedKey.generate(100, substream(2, "k"))
    assert all(a == b for a, b in key.pairs)


@pytest.mark.parametrize(
    "stream, f0, se",
    [([0, 0, 1, 1], 0.5, 0.25), ([0, 0, 0, 0], 1.0, 0.0), ([1], 0.0, 0.0)],
)
def test_bias_of(stream, f0, se):
    assert bias_of(stream) == pytest.approx((f0, se))


def test_bias_of_empty():
    with pytest.raises(ValueError):
        bias_of([])


def test_keep_and_destroy_copy_agree_on_bob_side():
    kept = sample_otp(0.3, 200, seed=11, keep_copy=True)
    gone = sample_otp(0.3, 200, seed=11, keep_copy=False)
    assert kept.records == gone.records
    assert all(r.alice_copy == r.input for r in kept.records)
    assert all(r.alice_copy is None for r in gone.records)


@pytest.mark.parametrize("p", [0.0, 0.1, 0.5, 0.9, 1.0])
def test_sampled_otp_within_three_sigma(p):
    shots = 10_000
    run = sample_otp(p, shots, seed=DEFAULT_SEED)
    assert np.array_equal(run.recovered, run.inputs)
    for stream, expected in ((run.inputs, p), (run.communicated, 0.5)):
        f, _ = bias_of(stream)
        assert abs(f - expected) <= 3 * np.sqrt(expected * (1 - expected) / shots)


def test_sampled_delocalize():
    s = sample_delocalize(0.2, 10_000, seed=DEFAULT_SEED)
    assert np.array_equal(s["parity"], s["d"])
    assert np.array_equal(s["x"], s["y"])
    f, _ = bias_of(s["x_tilde"])
    assert abs(f - 0.5) <= 3 * np.sqrt(0.25 / 10_000)


def test_bit_source_extremes():
    assert not BitSource(1.0, substream(0, "x")).draw(100).any()
    assert BitSource(0.0, substream(0, "x")).draw(100).all()
