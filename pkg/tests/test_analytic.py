import math

import numpy as np
import pytest

from nemsent.analytic import eq4_tangle, oracle_coupling, single_excitation_oracle
from nemsent.model import ModelParams, rwa_coupling

import oracle_values as ov


def test_closed_form_values():
    assert eq4_tangle(0.0, 0.0) == 0.0
    assert eq4_tangle(math.pi / 4, 0.0) == pytest.approx(3.0, abs=1e-14)
    assert eq4_tangle(1.0, 1e4) < 1e-300
    assert eq4_tangle(3 * math.pi / 4, 0.0) == 0.0  # negative branch is clamped


def test_closed_form_envelope_is_decreasing_in_kappa():
    wt = math.pi / 4
    vals = [eq4_tangle(wt, k) for k in (0, 0.1, 0.5, 1, 5)]
    assert all(a > b for a, b in zip(vals, vals[1:]))
    with pytest.raises(ValueError):
        eq4_tangle(1.0, -0.1)


def test_oracle_coupling_matches_model():
    for v in (0.0, 0.5, 1.0, 3.0):
        p = ModelParams(v_gate=v)
        assert abs(oracle_coupling(p)) == pytest.approx(rwa_coupling(p), abs=1e-14)
    assert abs(oracle_coupling(ModelParams())) == pytest.approx(ov.RWA_G_EFF, abs=1e-14)


def test_lossless_rabi_revivals():
    p = ModelParams(v_gate=0.0, e_j=10.0, nu=10.0)
    t = np.linspace(0, 2 * math.pi, 801)
    tr = single_excitation_oracle(p, t)
    pops = tr.observables["p_g0"] + tr.observables["p_e0"] + tr.observables["p_g1"]
    assert np.allclose(pops, 1.0, atol=1e-10)
    # resonant: the excited dressed population returns fully every pi/g
    p_up = tr.observables["p_e0"]
    idx = np.argmin(np.abs(t - math.pi))
    assert p_up[idx] == pytest.approx(p_up[0], abs=1e-9)
    tau = tr.observables["tangle_qr"]
    assert tau.max() <= 1.0 + 1e-12
    # tangle vanishes at the population nodes k pi / 2
    for k in (1, 2, 3):
        assert tau[np.argmin(np.abs(t - k * math.pi / 2))] < 1e-12


def test_detuned_rabi_frequency():
    p = ModelParams(v_gate=1.0)
    t = np.linspace(0, 20, 4001)
    tr = single_excitation_oracle(p, t)
    p_g1 = tr.observables["p_g1"]
    spectrum = np.abs(np.fft.rfft(p_g1 - p_g1.mean(), n=1 << 18))
    freq = np.fft.rfftfreq(1 << 18, d=t[1] - t[0]) * 2 * math.pi
    assert freq[np.argmax(spectrum)] == pytest.approx(ov.RWA_RABI, abs=2e-3)
    assert tr.meta["g_eff"] == pytest.approx(ov.RWA_G_EFF, abs=1e-14)


def test_overdamped_tangle_is_small():
    p = ModelParams(v_gate=1.0, kappa=10.0)
    t = np.linspace(0, 50, 2000)
    tau = single_excitation_oracle(p, t).observables["tangle_qr"]
    assert tau[t >= 1].max() < 0.01


def test_oracle_rejects_unsupported_models():
    with pytest.raises(ValueError):
        single_excitation_oracle(ModelParams(n_qubits=2), [0.0, 1.0])
    with pytest.raises(ValueError):
        single_excitation_oracle(ModelParams(gamma=0.1), [0.0, 1.0])


def test_pipeline_zeros_follow_rabi_formula_at_resonance():
    from nemsent.features import match_points, zero_set
    from nemsent.scenarios import ScenarioConfig, simulate

    cfg = ScenarioConfig(
        model=ModelParams(v_gate=0.0, rwa=True), t_max=20.0, n_points=801,
        measures=("qubit_resonator_tangle",),
    )
    _, table, cols = simulate(cfg)
    t, tau = table[:, 0], table[:, cols.index("tangle_qr")]
    step = t[1] - t[0]
    predicted = np.arange(1, 13) * math.pi / 2 / rwa_coupling(cfg.model)
    ok, worst = match_points(zero_set(t, tau, t_min=step).all_points(), predicted, step)
    assert ok, worst
    assert table[:, cols.index("leakage")].max() <= 1e-10
