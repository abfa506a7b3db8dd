import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kljn.attacks import (
    AmbiguousMatchError,
    InconsistentMeasurementError,
    SignSeries,
    bilateral_attack,
    hypothetical_powers,
    invert_rp,
    reconstruct_alice_voltage,
    sign_quantize,
    survival_theory,
    unilateral_attack,
)
from kljn.channel import (
    BitSituation,
    Choice,
    GeneratorBank,
    PowerSeries,
    ResistorPair,
    WireObservation,
    make_bank,
    parallel_resistance,
    power_flow,
    simulate_wire,
)
from kljn.noise_gen import NoiseConfig, NoiseSeries

CFG = NoiseConfig()
PAIR = ResistorPair()


def measured(bank, situation):
    return sign_quantize(power_flow(simulate_wire(bank, situation, PAIR)))


def test_sign_quantize():
    s = sign_quantize(PowerSeries(np.array([0.5, -2.0, 3.1]), 1e-3))
    assert s.bits.tolist() == [1, -1, 1]
    assert sign_quantize(PowerSeries(np.zeros(5), 1e-3)).bits.tolist() == [1] * 5


def test_sign_series_rejects_other_values():
    with pytest.raises(ValueError):
        SignSeries(np.array([1, 0, -1]), 1.0)


def test_measured_signs_equal_true_hypothesis_signs():
    bank = make_bank(4, 1, 500, PAIR, CFG)
    hyp = hypothetical_powers(bank, PAIR)
    assert np.array_equal(measured(bank, BitSituation.LH).bits, sign_quantize(hyp[BitSituation.LH]).bits)


def test_true_hypothesis_reproduces_power():
    bank = make_bank(4, 2, 500, PAIR, CFG)
    hyp = hypothetical_powers(bank, PAIR)
    for s in BitSituation:
        p = power_flow(simulate_wire(bank, s, PAIR)).p_w
        assert np.max(np.abs(hyp[s].p_w - p)) <= 1e-12 * np.max(np.abs(p))


def test_swap_and_negate():
    bank = make_bank(5, 0, 300, PAIR, CFG)
    swapped = hypothetical_powers(bank.swapped(), PAIR)
    # independent evaluation for the original LH situation
    ua, ub = bank.u_la.samples, bank.u_hb.samples
    i = (ua - ub) / (PAIR.r_low_ohm + PAIR.r_high_ohm)
    u = i * PAIR.r_high_ohm + ub
    assert np.allclose(swapped[BitSituation.HL].p_w, -(u * i), rtol=1e-12, atol=0)


def test_duplicate_seed_bank_smoke():
    bank = make_bank(6, 0, 100, PAIR, CFG)
    dup = GeneratorBank(bank.u_ha, bank.u_la, bank.u_ha, bank.u_la)
    hyp = hypothetical_powers(dup, PAIR)
    assert set(hyp) == set(BitSituation)
    assert all(np.all(np.isfinite(p.p_w)) for p in hyp.values())


def test_bilateral_lh():
    bank = make_bank(7, 3, 2000, PAIR, CFG)
    v = bilateral_attack(bank, measured(bank, BitSituation.LH), PAIR)
    assert v.decided_situation is BitSituation.LH
    assert 1 <= v.decision_step <= 64
    assert v.survival_steps[BitSituation.LH] == 2000
    counts = v.surviving_hypotheses_per_step
    assert np.all(np.diff(counts) <= 0)
    assert counts[v.decision_step - 1] == 1


def test_bilateral_masks():
    bank = make_bank(7, 3, 50, PAIR, CFG)
    v = bilateral_attack(bank, measured(bank, BitSituation.HL), PAIR)
    masks = v.survivor_masks()
    assert len(masks) == 50
    # order HH, HL, LH, LL; the true HL bit is always set
    assert all(m[1] == "1" for m in masks)
    assert [m.count("1") for m in masks] == v.surviving_hypotheses_per_step.tolist()


def test_bilateral_true_hypothesis_never_eliminated():
    for t in range(40):
        bank = make_bank(8, t, 200, PAIR, CFG)
        for s in BitSituation:
            v = bilateral_attack(bank, measured(bank, s), PAIR)
            assert v.survival_steps[s] == 200


def test_bilateral_step_one_survival():
    survived = 0
    for t in range(1000):
        bank = make_bank(9, t, 1, PAIR, CFG)
        v = bilateral_attack(bank, measured(bank, BitSituation.LH), PAIR)
        survived += v.survival_steps[BitSituation.HL] >= 1
    # 3 sigma binomial at p = 1/2, M = 1000: 0.047
    assert abs(survived / 1000 - 0.5) < 0.05


def test_bilateral_undecided_when_too_short():
    # a single step can never separate all four hypotheses when two share a sign
    undecided = 0
    for t in range(50):
        bank = make_bank(10, t, 1, PAIR, CFG)
        v = bilateral_attack(bank, measured(bank, BitSituation.HL), PAIR)
        undecided += not v.decided
        if not v.decided:
            assert v.decision_step is None
    assert undecided > 0


def test_bilateral_rejects_empty():
    bank = make_bank(1, 0, 10, PAIR, CFG)
    with pytest.raises(ValueError):
        bilateral_attack(bank, SignSeries(np.array([], dtype=np.int8), 1e-3), PAIR)


def test_reconstruction_identity():
    bank = make_bank(11, 0, 1000, PAIR, CFG)
    obs = simulate_wire(bank, BitSituation.LH, PAIR)
    rec = reconstruct_alice_voltage(obs, PAIR.r_low_ohm).samples
    ua = bank.u_la.samples
    assert np.sqrt(np.mean((rec - ua) ** 2) / np.mean(ua**2)) < 1e-12
    wrong = reconstruct_alice_voltage(obs, PAIR.r_high_ohm).samples
    assert np.sqrt(np.mean((wrong - bank.u_ha.samples) ** 2)) > 1.0


def test_reconstruction_zero_current():
    u = NoiseSeries(np.linspace(-1, 1, 10), 1e-3)
    obs = WireObservation(u, NoiseSeries(np.zeros(10), 1e-3, units="A"))
    assert np.array_equal(reconstruct_alice_voltage(obs, 123.0).samples, u.samples)


@pytest.mark.parametrize("situation", [BitSituation.LH, BitSituation.HL])
def test_unilateral_secure(situation):
    bank = make_bank(12, 0, 10_000, PAIR, CFG)
    obs = simulate_wire(bank, situation, PAIR)
    v = unilateral_attack((bank.u_ha, bank.u_la), obs, PAIR, CFG)
    assert v.situation is situation
    assert v.residual_ratio >= 1e3
    assert v.estimated_rp == pytest.approx(9090.9, rel=0.05)
    assert v.estimated_rb > 0


def test_unilateral_wrong_seeds_is_ambiguous():
    bank = make_bank(13, 0, 2000, PAIR, CFG)
    other = make_bank(14, 0, 2000, PAIR, CFG)
    obs = simulate_wire(bank, BitSituation.LH, PAIR)
    with pytest.raises(AmbiguousMatchError):
        unilateral_attack((other.u_ha, other.u_la), obs, PAIR, CFG)


def test_unilateral_inconsistent_measurement():
    bank = make_bank(15, 0, 2000, PAIR, CFG)
    obs = simulate_wire(bank, BitSituation.LH, PAIR)
    hot = NoiseConfig(temperature_k=CFG.temperature_k / 10)
    with pytest.raises(InconsistentMeasurementError):
        unilateral_attack((bank.u_ha, bank.u_la), obs, PAIR, hot)


def test_invert_rp():
    assert invert_rp(9090.909090909091, 10e3) == pytest.approx(100e3, rel=1e-9)
    assert invert_rp(2.5, 5.0) == 5.0
    with pytest.raises(ValueError):
        invert_rp(10e3, 10e3)


@settings(max_examples=200, deadline=None)
@given(a=st.floats(1e3, 1e6), b=st.floats(1e3, 1e6))
def test_invert_rp_round_trip(a, b):
    assert invert_rp(parallel_resistance(a, b), a) == pytest.approx(b, rel=1e-12)


@settings(max_examples=100, deadline=None)
@given(a=st.floats(1.0, 1e7), b=st.floats(1.0, 1e7))
def test_invert_rp_round_trip_wide(a, b):
    # cancellation in r_a - rp grows with b / a
    assert invert_rp(parallel_resistance(a, b), a) == pytest.approx(b, rel=1e-15 * (1 + b / a) * 100)


def test_survival_theory():
    assert survival_theory(0) == 1.0
    assert survival_theory(1) == 0.5
    assert survival_theory(10) == 1 / 1024
    with pytest.raises(ValueError):
        survival_theory(-1)


def test_verdict_choice_types():
    bank = make_bank(16, 0, 4000, PAIR, CFG)
    v = unilateral_attack((bank.u_ha, bank.u_la), simulate_wire(bank, BitSituation.HL, PAIR), PAIR, CFG)
    assert v.alice_resistor is Choice.H and v.bob_resistor is Choice.L
