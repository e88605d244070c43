"""Photonic layer: weak-coherent source, two-way fibre loss, threshold detectors,
dark counts and Rayleigh backscattering.

The module offers two views of the same model:

* stochastic primitives (:func:`emit_pulse`, :func:`detect`) used by the
  Monte-Carlo session, and
* closed-form means (:func:`expected_gain`, :func:`expected_error`, ...) used by
  the analytic sweeps and to cross-check the simulator.

Loss budget of one window (Bob -> Alice -> Bob)::

    forward   : fibre
    monitor   : fibre * coupler_split                        (Alice's Z detector)
    backward  : (1 - coupler_split) * encode section * fibre * decode section

Backscatter: a fixed fraction ``10**(beta_dB/10)`` of the light entering the
fibre is scattered back towards Bob and spread over the whole time axis, so it
is a constant background in every detection window, vacuum windows included.
The share landing in a detection gate grows with the repetition rate; it is
``backscatter_overlap * rate / 50 MHz`` times the decode-section transmittance.
``BACKSCATTER_OVERLAP`` is calibrated so that, at 50.4 km and 50 MHz with the
default losses and a 0.6-photon signal, backscatter adds 0.53 % to the X-basis
error rate.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from enum import Enum, IntEnum

import numpy as np

REFERENCE_RATE_HZ = 50e6
DEFAULT_RESET_TIME_S = 15e-9

# Solved by calibrate_backscatter_overlap(); see test_channel.py for the check.
BACKSCATTER_OVERLAP = 0.4159

NOISE_ERROR = 0.5


class Segment(Enum):
    FORWARD = "forward"
    BACKWARD = "backward"
    ROUND_TRIP = "round_trip"


class Intensity(IntEnum):
    VACUUM = 0
    DECOY = 1
    SIGNAL = 2


class ClickCause(IntEnum):
    NONE = 0
    SIGNAL_PHOTON = 1
    DARK_COUNT = 2
    BACKSCATTER = 3


@dataclass(frozen=True)
class IntensitySettings:
    """Mean photon numbers ``u`` (signal) and ``v`` (decoy); vacuum is 0."""

    signal: float = 0.6
    decoy: float = 0.2

    def __post_init__(self):
        if not self.signal > self.decoy > 0:
            raise ValueError(f"need signal > decoy > 0, got u={self.signal}, v={self.decoy}")

    def mean(self, cls: Intensity) -> float:
        return float(self.means[int(cls)])

    @property
    def means(self) -> np.ndarray:
        return np.array([0.0, self.decoy, self.signal])


@dataclass(frozen=True)
class ChannelParams:
    fiber_length_km: float = 0.0
    fiber_loss_db_per_km: float = 0.2
    encode_loss_db: float = 4.0
    decode_loss_db: float = 5.0
    backscatter_ratio_db: float = -40.5
    coupler_split: float = 0.10
    repetition_rate_hz: float = REFERENCE_RATE_HZ
    backscatter_overlap: float = BACKSCATTER_OVERLAP
    backscatter_enabled: bool = True
    # electronic modulation error on X outcomes, IM extinction error on Z outcomes
    x_flip_prob: float = 0.0007
    z_flip_prob: float = 0.0001

    def __post_init__(self):
        for name in ("fiber_length_km", "fiber_loss_db_per_km", "encode_loss_db", "decode_loss_db"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0")
        if self.backscatter_ratio_db > 0:
            raise ValueError("backscatter_ratio_db must be <= 0")
        if not 0 <= self.coupler_split <= 1:
            raise ValueError("coupler_split must lie in [0, 1]")
        if self.repetition_rate_hz <= 0:
            raise ValueError("repetition_rate_hz must be > 0")
        if self.backscatter_overlap < 0:
            raise ValueError("backscatter_overlap must be >= 0")
        for name in ("x_flip_prob", "z_flip_prob"):
            if not 0 <= getattr(self, name) <= 1:
                raise ValueError(f"{name} must lie in [0, 1]")

    def replace(self, **changes) -> "ChannelParams":
        return replace(self, **changes)


@dataclass(frozen=True)
class DetectorParams:
    efficiency: float = 0.85
    dark_count_prob: float = 5e-8
    dead_time_windows: int = 0

    def __post_init__(self):
        if not 0 <= self.efficiency <= 1:
            raise ValueError("efficiency must lie in [0, 1]")
        if not 0 <= self.dark_count_prob <= 1:
            raise ValueError("dark_count_prob must lie in [0, 1]")
        if self.dead_time_windows < 0:
            raise ValueError("dead_time_windows must be >= 0")

    @classmethod
    def for_rate(cls, repetition_rate_hz: float, reset_time_s: float = DEFAULT_RESET_TIME_S, **kw):
        return cls(dead_time_windows=dead_time_windows(reset_time_s, repetition_rate_hz), **kw)

    def replace(self, **changes) -> "DetectorParams":
        return replace(self, **changes)


def dead_time_windows(reset_time_s: float, repetition_rate_hz: float) -> int:
    """Windows blanked after a click: 15 ns gives 0 at 50 MHz and 15 at 1 GHz."""
    return int(math.floor(reset_time_s * repetition_rate_hz + 1e-9))


def db_to_linear(db: float) -> float:
    return 10.0 ** (-db / 10.0)


def transmittance(params: ChannelParams, segment: Segment) -> float:
    """Transmittance of one leg; coupler ports are not included.

    The encoding section sits on Alice's return path, so it is counted in the
    backward leg together with Bob's decoding section.
    """
    fiber_db = params.fiber_length_km * params.fiber_loss_db_per_km
    if segment is Segment.FORWARD:
        return db_to_linear(fiber_db)
    if segment is Segment.BACKWARD:
        return db_to_linear(fiber_db + params.encode_loss_db + params.decode_loss_db)
    return transmittance(params, Segment.FORWARD) * transmittance(params, Segment.BACKWARD)


def emit_pulse(mean_photons: float, rng: np.random.Generator, size=None):
    """Poissonian photon number of a weak coherent pulse."""
    if mean_photons < 0:
        raise ValueError("mean_photons must be >= 0")
    return rng.poisson(mean_photons, size)


def signal_click_prob(photons, efficiency: float):
    """Probability that at least one of ``photons`` photons is registered."""
    return 1.0 - (1.0 - efficiency) ** np.asarray(photons)


def detect(photons, det: DetectorParams, rng: np.random.Generator):
    """Threshold detection: photon click OR an independent dark count.

    Dead time is not handled here; the session blanks windows afterwards.
    """
    photons = np.asarray(photons)
    if np.any(photons < 0):
        raise ValueError("photon count must be >= 0")
    shape = photons.shape
    hit = rng.random(shape) < signal_click_prob(photons, det.efficiency)
    dark = rng.random(shape) < det.dark_count_prob
    click = hit | dark
    return bool(click) if click.ndim == 0 else click


def repetition_scale(params: ChannelParams) -> float:
    """Fraction of backscattered light that reaches Bob's detector inside a gate."""
    if not params.backscatter_enabled:
        return 0.0
    return (
        params.backscatter_overlap
        * params.repetition_rate_hz / REFERENCE_RATE_HZ
        * db_to_linear(params.decode_loss_db)
    )


def backscatter_noise(outgoing_mean_photons: float, params: ChannelParams, repetition_scale: float) -> float:
    """Mean backscattered photon number arriving in one backward detection window."""
    if outgoing_mean_photons < 0:
        raise ValueError("outgoing_mean_photons must be >= 0")
    return outgoing_mean_photons * 10.0 ** (params.backscatter_ratio_db / 10.0) * repetition_scale


def backscatter_click_prob(outgoing_mean_photons: float, params: ChannelParams, det: DetectorParams) -> float:
    noise = backscatter_noise(outgoing_mean_photons, params, repetition_scale(params))
    return -math.expm1(-det.efficiency * noise)


def background_yield(params: ChannelParams, det: DetectorParams, outgoing_mean_photons: float) -> float:
    """Bob's click probability with no signal photon: dark count or backscatter."""
    p_bs = backscatter_click_prob(outgoing_mean_photons, params, det)
    return 1.0 - (1.0 - det.dark_count_prob) * (1.0 - p_bs)


def bob_efficiency(params: ChannelParams, det: DetectorParams) -> float:
    """Per-photon probability that a photon Bob sends produces his click."""
    return transmittance(params, Segment.ROUND_TRIP) * (1.0 - params.coupler_split) * det.efficiency


def alice_efficiency(params: ChannelParams, det: DetectorParams) -> float:
    """Per-photon probability of a click on Alice's monitoring detector."""
    return transmittance(params, Segment.FORWARD) * params.coupler_split * det.efficiency


def expected_gain(mean_photons: float, params: ChannelParams, det: DetectorParams,
                  background_mean: float | None = None) -> float:
    """Closed-form X-basis gain at Bob: ``1 - (1 - Y0) exp(-eta * mu)``.

    ``background_mean`` is the average photon number entering the fibre, which
    sets the backscatter level; it defaults to ``mean_photons``.
    """
    if background_mean is None:
        background_mean = mean_photons
    y0 = background_yield(params, det, background_mean)
    eta = bob_efficiency(params, det)
    return 1.0 - (1.0 - y0) * math.exp(-eta * mean_photons)


def expected_error(mean_photons: float, params: ChannelParams, det: DetectorParams,
                   background_mean: float | None = None) -> float:
    """Closed-form X-basis error rate at Bob (noise-only clicks err with prob 1/2)."""
    if background_mean is None:
        background_mean = mean_photons
    y0 = background_yield(params, det, background_mean)
    p_sig = -math.expm1(-bob_efficiency(params, det) * mean_photons)
    gain = 1.0 - (1.0 - y0) * (1.0 - p_sig)
    if gain == 0:
        return 0.0
    return (params.x_flip_prob * p_sig + NOISE_ERROR * (1.0 - p_sig) * y0) / gain


def expected_monitor_gain(mean_photons: float, params: ChannelParams, det: DetectorParams) -> float:
    """Closed-form Z-basis gain at Alice's monitoring detector."""
    eta = alice_efficiency(params, det)
    return 1.0 - (1.0 - det.dark_count_prob) * math.exp(-eta * mean_photons)


def expected_monitor_error(mean_photons: float, params: ChannelParams, det: DetectorParams) -> float:
    p_sig = -math.expm1(-alice_efficiency(params, det) * mean_photons)
    d = det.dark_count_prob
    gain = 1.0 - (1.0 - d) * (1.0 - p_sig)
    if gain == 0:
        return 0.0
    return (params.z_flip_prob * p_sig + NOISE_ERROR * (1.0 - p_sig) * d) / gain


def single_photon_yield(eta: float, y0: float) -> float:
    return 1.0 - (1.0 - y0) * (1.0 - eta)


def single_photon_error(eta: float, y0: float, flip_prob: float) -> float:
    y1 = single_photon_yield(eta, y0)
    if y1 == 0:
        return 0.0
    return (flip_prob * eta + NOISE_ERROR * (1.0 - eta) * y0) / y1


def backscatter_error_contribution(params: ChannelParams, det: DetectorParams, mean_photons: float) -> float:
    """Increase of the X-basis error rate caused by backscatter alone."""
    quiet = params.replace(backscatter_enabled=False)
    return expected_error(mean_photons, params, det) - expected_error(mean_photons, quiet, det)


def calibrate_backscatter_overlap(target: float = 0.0053, length_km: float = 50.4,
                                  mean_photons: float = 0.6,
                                  params: ChannelParams | None = None,
                                  det: DetectorParams | None = None) -> float:
    """Overlap constant giving ``target`` backscatter error at the reference point."""
    from scipy.optimize import brentq

    params = (params or ChannelParams()).replace(
        fiber_length_km=length_km, repetition_rate_hz=REFERENCE_RATE_HZ, backscatter_enabled=True
    )
    det = det or DetectorParams()

    def excess(k):
        return backscatter_error_contribution(params.replace(backscatter_overlap=k), det, mean_photons) - target

    return brentq(excess, 0.0, 1e3, xtol=1e-12)
