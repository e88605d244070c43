import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from pnp_qkd import channel as ch
from pnp_qkd.channel import BACKSCATTER_OVERLAP, ChannelParams, DetectorParams, Segment
from oracles import poisson_gain


def test_db_conversion():
    assert ch.db_to_linear(0) == 1.0
    assert ch.db_to_linear(10) == pytest.approx(0.1)
    assert ch.db_to_linear(3) == pytest.approx(0.501187, rel=1e-5)


def test_round_trip_loss_at_50_km():
    # 10 dB of fibre each way plus 4 dB encoding and 5 dB decoding
    p = ChannelParams(fiber_length_km=50)
    assert ch.transmittance(p, Segment.FORWARD) == pytest.approx(0.1)
    assert ch.transmittance(p, Segment.ROUND_TRIP) == pytest.approx(10 ** -2.9)


def test_dead_time_windows():
    assert ch.dead_time_windows(15e-9, 50e6) == 0
    assert ch.dead_time_windows(15e-9, 1e9) == 15
    assert DetectorParams.for_rate(1e9).dead_time_windows == 15


def test_backscatter_noise_reference_value():
    p = ChannelParams()
    assert ch.backscatter_noise(0.6, p, 1.0) == pytest.approx(0.6 * 10 ** -4.05, rel=1e-12)
    assert ch.backscatter_noise(0.6, p, 1.0) == pytest.approx(5.3475e-5, rel=1e-4)
    assert ch.repetition_scale(p.replace(backscatter_enabled=False)) == 0.0


def test_backscatter_scales_with_rate():
    p = ChannelParams()
    assert ch.repetition_scale(p.replace(repetition_rate_hz=1e9)) == pytest.approx(20 * ch.repetition_scale(p))


def test_overlap_calibration_is_frozen():
    # 0.53 % backscatter error at 50.4 km, 50 MHz, mu = 0.6
    assert ch.calibrate_backscatter_overlap() == pytest.approx(BACKSCATTER_OVERLAP, abs=1e-4)
    p = ChannelParams(fiber_length_km=50.4)
    assert ch.backscatter_error_contribution(p, DetectorParams(), 0.6) == pytest.approx(0.0053, abs=2e-6)


@pytest.mark.parametrize("length", [0.0, 25.0, 50.4, 120.0])
@pytest.mark.parametrize("bs", [True, False])
def test_expected_gain_matches_photon_number_sum(length, bs):
    p = ChannelParams(fiber_length_km=length, backscatter_enabled=bs)
    det = DetectorParams()
    eta = ch.bob_efficiency(p, det)
    y0 = ch.background_yield(p, det, 0.6)
    ref, _ = poisson_gain(0.6, eta, y0)
    assert ch.expected_gain(0.6, p, det) == pytest.approx(ref, rel=1e-12)


def test_expected_error_noiseless_is_zero():
    p = ChannelParams(backscatter_enabled=False, x_flip_prob=0.0)
    assert ch.expected_error(0.5, p, DetectorParams(dark_count_prob=0.0)) == 0.0


@settings(max_examples=50)
@given(st.floats(0, 150), st.floats(0.1, 50), st.booleans())
def test_gain_non_increasing_in_length(length, extra, bs):
    det = DetectorParams()
    a = ChannelParams(fiber_length_km=length, backscatter_enabled=bs)
    b = a.replace(fiber_length_km=length + extra)
    assert ch.expected_gain(0.6, b, det) <= ch.expected_gain(0.6, a, det)


def test_detect_statistics():
    rng = np.random.default_rng(0)
    det = DetectorParams(efficiency=0.5, dark_count_prob=0.0)
    clicks = ch.detect(np.ones(100_000, dtype=int), det, rng)
    assert abs(clicks.mean() - 0.5) < 0.01
    assert not ch.detect(0, det, rng)
    with pytest.raises(ValueError):
        ch.detect(-1, det, rng)


def test_emit_pulse_mean():
    rng = np.random.default_rng(0)
    assert abs(ch.emit_pulse(0.6, rng, 200_000).mean() - 0.6) < 0.01
    with pytest.raises(ValueError):
        ch.emit_pulse(-0.1, rng)


@pytest.mark.parametrize("kw", [dict(fiber_length_km=-1), dict(coupler_split=1.5),
                                dict(backscatter_ratio_db=3), dict(repetition_rate_hz=0),
                                dict(x_flip_prob=2)])
def test_channel_validation(kw):
    with pytest.raises(ValueError):
        ChannelParams(**kw)


def test_detector_validation():
    with pytest.raises(ValueError):
        DetectorParams(efficiency=1.2)
    with pytest.raises(ValueError):
        DetectorParams(dead_time_windows=-1)


def test_single_photon_error_matches_definition():
    eta, y0, flip = 0.01, 1e-6, 0.001
    y1 = 1 - (1 - y0) * (1 - eta)
    assert ch.single_photon_error(eta, y0, flip) == pytest.approx((flip * eta + 0.5 * (1 - eta) * y0) / y1)
    assert math.isclose(ch.single_photon_yield(eta, 0.0), eta)
