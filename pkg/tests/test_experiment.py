import math

import numpy as np
import pytest

from pnp_qkd.channel import ChannelParams, DetectorParams, expected_error, expected_gain, expected_monitor_gain
from pnp_qkd.config import ConfigError, parse_text, to_float_list
from pnp_qkd.experiment import (CONFIG_SCHEMA, MEASURED_GAINS_X, SWEEP_COLUMNS, SweepConfig, analytic_point,
                                build_config, calibrated_setup, curve, cutoff_length, decoy_soundness,
                                optimize_mu, pick_rows, run_montecarlo, run_table2, spot_check, sweep_fig3,
                                write_sweep_csv)
from pnp_qkd.optimize import golden_section_max, is_unimodal, maximize
from pnp_qkd.protocol import SessionConfig
from oracles import h2, table2_rate


def test_table2_chain():
    res = run_table2()
    assert res.estimates.delta0 == pytest.approx(0.0017, abs=5e-5)
    assert res.estimates.delta1 == pytest.approx(0.4797, rel=1e-2)
    assert res.estimates.e_m1 == pytest.approx(0.0008, abs=5e-5)
    assert res.report.skr == pytest.approx(4.956e-5, rel=5e-3)
    assert res.report.inputs.Q == MEASURED_GAINS_X.Q_u


def test_table2_without_errors():
    res = run_table2(e=0.0)
    est = res.estimates
    ref = 1.21e-4 * (est.delta1 - est.delta1 * h2(est.e_m1) + est.delta0)
    assert res.report.skr == pytest.approx(ref, rel=1e-12)


def test_table2_with_unit_reconciliation_efficiency():
    res = run_table2(f=1.0)
    est = res.estimates
    ref = table2_rate(1.21e-4, est.delta1, est.delta0, est.e_m1, 0.0064, 1.0)
    assert res.report.skr == pytest.approx(ref, rel=1e-12)
    assert res.report.skr == pytest.approx(5.1048e-5, rel=1e-4)


def test_calibrated_setup_matches_measurements():
    chan, bob, mon = calibrated_setup()
    bg = 0.8 * 0.6 + 0.1 * 0.2
    assert expected_gain(0.6, chan, bob, bg) == pytest.approx(1.21e-4, rel=1e-9)
    assert expected_error(0.6, chan, bob, bg) == pytest.approx(0.0064, abs=1e-5)
    assert expected_monitor_gain(0.6, chan, mon) == pytest.approx(1.97e-2, rel=1e-9)
    assert 0.5 < expected_gain(0.2, chan, bob, bg) / 3.96e-5 < 2


# ------------------------------------------------------------------ optimiser


def test_golden_section_finds_calculus_optimum():
    x, fx, _ = golden_section_max(lambda m: m * math.exp(-m), 0.0, 3.0, 1e-6)
    assert x == pytest.approx(1.0, abs=1e-5)
    r = maximize(lambda m: 3.7 * m * math.exp(-m))
    assert r.x == pytest.approx(1.0, abs=1e-3)
    assert r.method == "golden" and not r.non_unimodal and not r.zero_rate


def test_constant_objective_flags_non_unimodal():
    r = maximize(lambda m: 2.0)
    assert r.non_unimodal and r.method == "grid"
    assert 1e-4 <= r.x <= 1.5


def test_negative_objective_flags_zero_rate():
    r = maximize(lambda m: -(m - 0.4) ** 2 - 1)
    assert r.zero_rate
    assert r.x == pytest.approx(0.4, abs=1e-3)


def test_bimodal_objective_uses_grid():
    f = lambda m: math.exp(-((m - 0.3) / 0.05) ** 2) + 2 * math.exp(-((m - 1.2) / 0.05) ** 2)
    r = maximize(f)
    assert r.non_unimodal
    assert r.x == pytest.approx(1.2, abs=1e-3)


def test_unimodality_check():
    assert is_unimodal(np.array([1, 2, 3, 2, 1]))
    assert is_unimodal(np.array([1, 2, 3]))
    assert is_unimodal(np.array([3, 2, 1]))
    assert not is_unimodal(np.array([1, 3, 1, 3, 1]))
    assert not is_unimodal(np.array([2, 2, 2]))


def test_noiseless_optimum_matches_grid_oracle():
    chan = ChannelParams(backscatter_enabled=False, x_flip_prob=0.0, z_flip_prob=0.0)
    det = DetectorParams(dark_count_prob=0.0)
    r = optimize_mu(chan, det)
    grid = np.linspace(1e-3, 1.0, 20001)
    vals = [analytic_point(m, chan, det).report.skr_raw for m in grid]
    i = int(np.argmax(vals))
    assert r.value > 0
    assert r.value == pytest.approx(vals[i], rel=1e-6)
    assert r.x == pytest.approx(grid[i], abs=2e-3)


def test_operating_point_optimum_is_near_reference_intensity():
    r = optimize_mu(ChannelParams(fiber_length_km=50.4), DetectorParams())
    assert 0.3 <= r.x <= 0.9


# ------------------------------------------------------------------ sweep


@pytest.fixture(scope="module")
def small_sweep():
    return sweep_fig3(SweepConfig(lengths_km=tuple(float(x) for x in range(0, 181, 10))))


def test_sweep_properties(small_sweep):
    rows = small_sweep
    for rate, bs in SweepConfig().curves():
        c = curve(rows, rate, bs)
        rates = [r.skr for r in c]
        assert all(b <= a for a, b in zip(rates, rates[1:]))
        assert cutoff_length(c) is not None
    hi, lo = curve(rows, 1e9, False), curve(rows, 1e9, True)
    assert all(a.skr >= b.skr for a, b in zip(hi, lo))
    assert cutoff_length(curve(rows, 50e6, True)) > cutoff_length(lo)
    assert cutoff_length(hi) > cutoff_length(lo)


def test_sweep_rows_are_clamped_and_sorted(small_sweep):
    assert all(r.skr >= 0 and r.skr == max(r.skr_raw, 0) for r in small_sweep)
    keys = [(r.rate_hz, not r.backscatter, r.length_km) for r in small_sweep]
    assert keys == sorted(keys)


def test_sweep_csv(tmp_path, small_sweep):
    path = tmp_path / "s.csv"
    write_sweep_csv(small_sweep, path)
    lines = path.read_text().splitlines()
    assert lines[0].split(",") == list(SWEEP_COLUMNS)
    assert len(lines) == len(small_sweep) + 1


def test_sweep_config_validation():
    with pytest.raises(ConfigError):
        SweepConfig(lengths_km=())
    with pytest.raises(ConfigError):
        SweepConfig(backscatter="maybe")


def test_spot_check_agrees(small_sweep):
    row = pick_rows(small_sweep, [(10.0, 50e6, True)])[0]
    sc = spot_check(row, ChannelParams(), DetectorParams(), windows=200_000, seed=1)
    assert sc.passed()


# ------------------------------------------------------------------ Monte-Carlo


def test_intercept_resend_x_kills_the_key():
    chan = ChannelParams(fiber_length_km=1, coupler_split=0.5)
    res = run_montecarlo(SessionConfig(num_windows=200_000, seed=2), chan, DetectorParams(),
                         attack="intercept-resend-x", keep_transcript=False)
    assert res.stats.e_m == pytest.approx(0.25, abs=0.02)
    assert res.report.skr == 0.0
    assert not res.aborted


def test_estimation_failure_aborts():
    chan = ChannelParams(fiber_length_km=400)
    res = run_montecarlo(SessionConfig(num_windows=2_000, seed=2), chan, DetectorParams(dark_count_prob=0.0),
                         keep_transcript=False)
    assert res.aborted and res.report is None
    assert res.summary()["skr"] == 0.0


def test_soundness_on_short_link():
    chan = ChannelParams(fiber_length_km=5, coupler_split=0.3)
    res = run_montecarlo(SessionConfig(num_windows=1_000_000, seed=6), chan, DetectorParams(),
                         keep_transcript=False)
    chk = decoy_soundness(res.stats, res.estimates)
    assert chk.delta1_ok and chk.e_m1_ok
    # enough statistics that the check is not vacuous
    assert chk.delta1_sigma < 0.1


def test_collective_session_respects_holevo_bound():
    from pnp_qkd.security import holevo_from_attack
    chan = ChannelParams(fiber_length_km=1, coupler_split=0.5)
    res = run_montecarlo(SessionConfig(num_windows=300_000, seed=3), chan, DetectorParams(),
                         attack="collective", attack_seed=5, keep_transcript=False)
    from pnp_qkd.attacks import make_attack
    chi = holevo_from_attack(make_attack("collective", 5).overlaps)
    assert res.eve.bits <= chi + 3 * res.eve.stderr + res.eve.bias
    assert "gram_lambda1" in res.summary()


# ------------------------------------------------------------------ config


def test_config_parsing():
    raw = parse_text("""
        # comment
        experiment.mode = run
        experiment.attack = intercept-resend-z
        channel.fiber_length_km = 12.5   # trailing comment
        channel.backscatter_enabled = off
        detector.dark_count_prob = 1e-7
        session.num_windows = 1e5
        session.signal_fraction = 0.7
        session.decoy_fraction = 0.2
        sweep.lengths_km = 0:20:5
        sweep.rates_hz = 5e7, 1e9
    """, CONFIG_SCHEMA)
    cfg = build_config(raw)
    assert cfg.mode == "run" and cfg.attack == "intercept-resend-z"
    assert cfg.channel.fiber_length_km == 12.5 and not cfg.channel.backscatter_enabled
    assert cfg.detector.dark_count_prob == 1e-7
    assert cfg.session.num_windows == 100_000
    assert cfg.session.intensity_schedule.signal == 0.7
    assert cfg.sweep.lengths_km == (0.0, 5.0, 10.0, 15.0, 20.0)
    assert cfg.sweep.rates_hz == (5e7, 1e9)


def test_calibrated_preset_in_config():
    cfg = build_config(parse_text("experiment.preset = calibrated\nchannel.x_flip_prob = 0.001", CONFIG_SCHEMA))
    chan, bob, mon = calibrated_setup()
    assert cfg.channel.decode_loss_db == chan.decode_loss_db
    assert cfg.channel.x_flip_prob == 0.001
    assert cfg.monitor == mon


@pytest.mark.parametrize("text", [
    "channel.unknown = 1", "nosection = 1", "bogus.key = 1", "channel.fiber_length_km = abc",
    "channel.fiber_length_km = 1\nchannel.fiber_length_km = 2", "experiment.mode = fly",
    "just a line", "session.num_windows = 1.5", "sweep.lengths_km = 5:0:1",
])
def test_config_errors(text):
    with pytest.raises(ConfigError):
        build_config(parse_text(text, CONFIG_SCHEMA))


def test_semantic_config_errors():
    with pytest.raises(ConfigError):
        build_config(parse_text("session.p_monitor = 2", CONFIG_SCHEMA))
    with pytest.raises(ConfigError):
        build_config(parse_text("channel.coupler_split = 3", CONFIG_SCHEMA))


def test_float_list_range():
    assert to_float_list("0:1:0.25") == [0.0, 0.25, 0.5, 0.75, 1.0]
    assert to_float_list("3") == [3.0]
