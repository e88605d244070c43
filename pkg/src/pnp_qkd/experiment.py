"""Experiment runner: measured-gain reproduction, distance sweeps, mu optimisation
and Monte-Carlo sessions with decoy estimation and key-rate reports."""
from __future__ import annotations

import csv
import dataclasses
import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.optimize import brentq

from . import config as cfgio
from .attacks import ATTACK_NAMES, AdvantageEstimate, CollectiveUnitary, eve_advantage, make_attack
from .channel import (REFERENCE_RATE_HZ, ChannelParams, DetectorParams, Intensity, IntensitySettings,
                      alice_efficiency, background_yield, bob_efficiency, dead_time_windows,
                      expected_error, expected_gain, expected_monitor_gain, single_photon_error,
                      single_photon_yield)
from .decoy import (DecoyEstimates, EstimationError, GainSet, estimate, estimate_em1_raw,
                    yield_lower_bound_raw)
from .encoding import Basis
from .optimize import OptimizeResult, maximize
from .protocol import IntensitySchedule, SessionConfig, SessionStatistics, run_session
from .security import SecurityInputs, SecurityReport, secure_key_rate

MODES = ("table2", "run", "sweep", "optimize-mu")

# gains measured over an 80-minute run at 50.4 km (u = 0.6, v = 0.2, 50 MHz)
MEASURED_LENGTH_KM = 50.4
MEASURED_GAINS_X = GainSet(Basis.X, Q_u=1.21e-4, Q_v=3.96e-5, Q_0=3.67e-7)
MEASURED_GAINS_Z = GainSet(Basis.Z, Q_u=1.97e-2, Q_v=6.32e-3, Q_0=3.81e-7, E_v=0.0006)
MEASURED_BER_X = 0.0064
MEASURED_BER_Z = 0.0006
MEASURED_F = 1.2
# share of the X error attributed to Bob's dark counts in the calibrated model
DARK_ERROR_SHARE = 0.0004

SWEEP_COLUMNS = ("length_km", "rate_hz", "backscatter", "mu_opt", "Q", "e", "e_m1",
                 "delta0", "delta1", "skr_raw", "skr")


# --------------------------------------------------------------------------- measured gains


@dataclass(frozen=True)
class Table2Result:
    estimates: DecoyEstimates
    report: SecurityReport

    def row(self) -> dict[str, float]:
        inp = self.report.inputs
        return {"length_km": MEASURED_LENGTH_KM, "Q": inp.Q, "delta1": inp.delta1,
                "delta0": inp.delta0, "e_m1": inp.e_m1, "e": inp.e, "f": inp.f,
                "skr": self.report.skr}


def run_table2(f: float = MEASURED_F, e: float = MEASURED_BER_X) -> Table2Result:
    """Feed the measured gains through decoy estimation and the key-rate formula."""
    est = estimate(MEASURED_GAINS_X, MEASURED_GAINS_Z)
    inputs = SecurityInputs(Q=MEASURED_GAINS_X.Q_u, delta1=est.delta1, delta0=est.delta0,
                            e_m1=est.e_m1, e=e, f=f)
    return Table2Result(est, secure_key_rate(inputs))


# --------------------------------------------------------------------------- calibrated model


@lru_cache(maxsize=None)
def calibrated_setup(schedule: IntensitySchedule = IntensitySchedule(),
                     intensities: IntensitySettings = IntensitySettings()
                     ) -> tuple[ChannelParams, DetectorParams, DetectorParams]:
    """Channel, Bob's detector and Alice's monitor detector matching the measured run.

    The coupler split reproduces Alice's Z signal gain, Bob's decoding loss his X
    signal gain, Bob's dark-count probability a 0.04 % error share and the
    backscatter overlap the rest of the measured 0.64 % X error.
    Returns ``(channel, bob_detector, monitor_detector)``.
    """
    u = intensities.signal
    bg = float(schedule.probs @ intensities.means)
    monitor = DetectorParams(dark_count_prob=MEASURED_GAINS_Z.Q_0)
    base = ChannelParams(fiber_length_km=MEASURED_LENGTH_KM, z_flip_prob=MEASURED_BER_Z)

    split = brentq(lambda c: expected_monitor_gain(u, base.replace(coupler_split=c), monitor)
                   - MEASURED_GAINS_Z.Q_u, 1e-6, 1.0, xtol=1e-14)
    chan = base.replace(coupler_split=split)
    bob = DetectorParams(dark_count_prob=2 * DARK_ERROR_SHARE * MEASURED_GAINS_X.Q_u)
    target_bs = MEASURED_BER_X - chan.x_flip_prob - DARK_ERROR_SHARE

    def bs_error(k):
        c = chan.replace(backscatter_overlap=k)
        return expected_error(u, c, bob, bg) - expected_error(u, c.replace(backscatter_enabled=False), bob, bg)

    for _ in range(6):  # the three knobs interact weakly; a few sweeps converge
        loss = brentq(lambda db: expected_gain(u, chan.replace(decode_loss_db=db), bob, bg)
                      - MEASURED_GAINS_X.Q_u, 0.0, 60.0, xtol=1e-12)
        chan = chan.replace(decode_loss_db=loss)
        k = brentq(lambda k: bs_error(k) - target_bs, 0.0, 1e3, xtol=1e-12)
        chan = chan.replace(backscatter_overlap=k)
    return chan, bob, monitor


# --------------------------------------------------------------------------- analytic sweep


@dataclass(frozen=True)
class SweepRow:
    length_km: float
    rate_hz: float
    backscatter: bool
    mu_opt: float
    Q: float
    e: float
    e_m1: float
    delta0: float
    delta1: float
    skr_raw: float
    skr: float
    non_unimodal: bool = False

    def csv_row(self) -> list:
        return [f"{self.length_km:g}", f"{self.rate_hz:g}", int(self.backscatter)] + [
            f"{getattr(self, k):.10g}" for k in SWEEP_COLUMNS[3:]]


@dataclass(frozen=True)
class OperatingPoint:
    mu: float
    Q: float
    e: float
    e_m1: float
    delta0: float
    delta1: float
    report: SecurityReport


def analytic_point(mu: float, channel: ChannelParams, det: DetectorParams, f: float = 1.2,
                   monitor: DetectorParams | None = None) -> OperatingPoint:
    """Closed-form gains with decoy estimation taken as exact.

    Single-photon quantities come straight from the loss model: the X yield
    ``Y1 = 1 - (1 - Y0)(1 - eta_B)`` and the monitor error of a lone photon at
    Alice's detector.
    """
    monitor = monitor or det
    eta_b = bob_efficiency(channel, det)
    y0 = background_yield(channel, det, mu)
    q = expected_gain(mu, channel, det)
    e = expected_error(mu, channel, det)
    y1 = single_photon_yield(eta_b, y0)
    delta1 = mu * math.exp(-mu) * y1 / q
    delta0 = math.exp(-mu) * y0 / q
    e_m1 = single_photon_error(alice_efficiency(channel, monitor), monitor.dark_count_prob,
                               channel.z_flip_prob)
    report = secure_key_rate(SecurityInputs(q, delta1, delta0, e_m1, e, f))
    return OperatingPoint(mu, q, e, e_m1, delta0, delta1, report)


def overhead_factor(session: SessionConfig) -> float:
    """Fraction of windows that carry signal key bits: ``(1 - p)(1 - q) P(signal)``."""
    return (1 - session.p_monitor) * (1 - session.q_z_probability) * session.intensity_schedule.signal


def optimize_mu(channel: ChannelParams, det: DetectorParams, f: float = 1.2,
                monitor: DetectorParams | None = None, tol: float = 1e-4) -> OptimizeResult:
    """Signal mean photon number maximising the (raw) key rate at one operating point."""
    return maximize(lambda mu: analytic_point(mu, channel, det, f, monitor).report.skr_raw,
                    lo=1e-4, hi=1.5, tol=tol)


@dataclass(frozen=True)
class SweepConfig:
    lengths_km: tuple[float, ...] = tuple(float(x) for x in range(0, 202, 2))
    rates_hz: tuple[float, ...] = (REFERENCE_RATE_HZ, 1e9)
    backscatter: str = "both"  # on | off | both
    spot_checks: bool = False
    spot_check_windows: int = 10**6

    def __post_init__(self):
        if not self.lengths_km or not self.rates_hz:
            raise cfgio.ConfigError("sweep lengths and rates must be non-empty")
        if self.backscatter not in ("on", "off", "both"):
            raise cfgio.ConfigError(f"sweep.backscatter must be on, off or both, got {self.backscatter!r}")
        if any(x < 0 for x in self.lengths_km) or any(r <= 0 for r in self.rates_hz):
            raise cfgio.ConfigError("sweep lengths must be >= 0 and rates > 0")

    def curves(self) -> list[tuple[float, bool]]:
        flags = {"on": (True,), "off": (False,), "both": (True, False)}[self.backscatter]
        return [(r, b) for r in self.rates_hz for b in flags]


def channel_at(base: ChannelParams, length_km: float, rate_hz: float, backscatter: bool) -> ChannelParams:
    return base.replace(fiber_length_km=length_km, repetition_rate_hz=rate_hz, backscatter_enabled=backscatter)


def detector_at(base: DetectorParams, rate_hz: float, reset_time_s: float | None) -> DetectorParams:
    if reset_time_s is None:
        return base
    return base.replace(dead_time_windows=dead_time_windows(reset_time_s, rate_hz))


def sweep_fig3(sweep: SweepConfig, channel: ChannelParams | None = None, det: DetectorParams | None = None,
               f: float = 1.2, overhead: float = 1.0) -> list[SweepRow]:
    """Optimised key rate per pulse over the (length, rate, backscatter) grid.

    Rows are sorted by rate, backscatter (on first) and length.
    """
    channel = channel or ChannelParams()
    det = det or DetectorParams()
    rows = []
    for rate, bs in sweep.curves():
        for length in sweep.lengths_km:
            chan = channel_at(channel, length, rate, bs)
            opt = optimize_mu(chan, det, f)
            pt = analytic_point(opt.x, chan, det, f)
            raw = pt.report.skr_raw * overhead
            rows.append(SweepRow(length, rate, bs, opt.x, pt.Q, pt.e, pt.e_m1, pt.delta0, pt.delta1,
                                 raw, max(raw, 0.0), opt.non_unimodal))
    rows.sort(key=lambda r: (r.rate_hz, not r.backscatter, r.length_km))
    return rows


def curve(rows: list[SweepRow], rate_hz: float, backscatter: bool) -> list[SweepRow]:
    return [r for r in rows if r.rate_hz == rate_hz and r.backscatter == backscatter]


def cutoff_length(rows: list[SweepRow]) -> float | None:
    """First length along a curve at which the rate reaches zero, or None."""
    for r in sorted(rows, key=lambda r: r.length_km):
        if r.skr <= 0:
            return r.length_km
    return None


def write_sweep_csv(rows: list[SweepRow], path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(SWEEP_COLUMNS)
        for r in rows:
            w.writerow(r.csv_row())


# --------------------------------------------------------------------------- Monte-Carlo


@dataclass
class MonteCarloResult:
    stats: SessionStatistics
    estimates: DecoyEstimates | None
    report: SecurityReport | None
    attack: str
    eve: AdvantageEstimate
    aborted: bool = False
    abort_reason: str | None = None

    def summary(self) -> dict[str, object]:
        s = self.stats
        out: dict[str, object] = {
            "attack": self.attack,
            "windows": s.num_windows,
            "sifted_bits": int(len(s.sifted_bob)),
            "e": s.e,
            "e_m": s.e_m,
            "Q_u_x": s.gain(Basis.X, Intensity.SIGNAL),
            "Q_v_x": s.gain(Basis.X, Intensity.DECOY),
            "Q_0_x": s.gain(Basis.X, Intensity.VACUUM),
            "Q_u_z": s.gain(Basis.Z, Intensity.SIGNAL),
            "Q_v_z": s.gain(Basis.Z, Intensity.DECOY),
            "Q_0_z": s.gain(Basis.Z, Intensity.VACUUM),
            "eve_bits": self.eve.bits,
            "eve_stderr": self.eve.stderr,
            "eve_low_confidence": self.eve.low_confidence,
            "aborted": self.aborted,
        }
        if self.abort_reason:
            out["abort_reason"] = self.abort_reason
        if self.estimates is not None and self.estimates.diagnostics:
            out["diagnostics"] = "; ".join(self.estimates.diagnostics)
        if self.report is not None:
            out.update(self.report.as_flat_dict())
        else:
            out["skr"] = 0.0
        return out


def run_montecarlo(session: SessionConfig, channel: ChannelParams, det: DetectorParams,
                   attack: str = "none", attack_seed: int = 0, monitor: DetectorParams | None = None,
                   f: float = 1.2, workers: int = 1, keep_transcript: bool = True) -> MonteCarloResult:
    """One simulated session followed by decoy estimation and the key-rate report.

    A failed decoy estimate produces an aborted result with zero rate.
    """
    model = make_attack(attack, attack_seed)
    stats = run_session(session, channel, det, model, monitor, workers, keep_transcript)
    eve = eve_advantage(model, stats)
    try:
        est = estimate(stats.gain_set(Basis.X), stats.gain_set(Basis.Z))
        inputs = SecurityInputs(Q=stats.gain(Basis.X, Intensity.SIGNAL), delta1=est.delta1,
                                delta0=est.delta0, e_m1=est.e_m1, e=stats.e, f=f)
    except EstimationError as exc:
        return MonteCarloResult(stats, None, None, model.name, eve, True, str(exc))
    overlaps = model.overlaps if isinstance(model, CollectiveUnitary) else None
    return MonteCarloResult(stats, est, secure_key_rate(inputs, overlaps), model.name, eve)


@dataclass(frozen=True)
class SpotCheck:
    length_km: float
    rate_hz: float
    backscatter: bool
    mu: float
    expected_Q: float
    measured_Q: float
    stderr: float
    windows: int

    @property
    def z(self) -> float:
        return (self.measured_Q - self.expected_Q) / self.stderr if self.stderr else 0.0

    def passed(self, sigmas: float = 3.0) -> bool:
        return abs(self.z) <= sigmas


def spot_check(row: SweepRow, channel: ChannelParams, det: DetectorParams, windows: int = 10**6,
               seed: int = 0, reset_time_s: float | None = None) -> SpotCheck:
    """Monte-Carlo gain at one sweep grid point against its closed form.

    Every window carries a signal pulse at the row's optimised mean, so the
    backscatter level matches the analytic model exactly.
    """
    chan = channel_at(channel, row.length_km, row.rate_hz, row.backscatter)
    det = detector_at(det, row.rate_hz, reset_time_s)
    mu = row.mu_opt
    session = SessionConfig(num_windows=windows, seed=seed,
                            intensity_schedule=IntensitySchedule(signal=1.0, decoy=0.0, vacuum=0.0),
                            intensities=IntensitySettings(signal=mu, decoy=min(0.2, mu / 2)))
    stats = run_session(session, chan, det, keep_transcript=False)
    n = int(stats.x_windows[Intensity.SIGNAL])
    q = expected_gain(mu, chan, det, session.mean_outgoing_photons)
    return SpotCheck(row.length_km, row.rate_hz, row.backscatter, mu, q,
                     stats.gain(Basis.X, Intensity.SIGNAL), math.sqrt(q * (1 - q) / n) if n else 0.0, n)


def pick_rows(rows: list[SweepRow], targets: list[tuple[float, float, bool]]) -> list[SweepRow]:
    """Grid rows nearest in length to each ``(length, rate, backscatter)`` target."""
    picked = []
    for length, rate, bs in targets:
        cands = curve(rows, rate, bs)
        if cands:
            picked.append(min(cands, key=lambda r: abs(r.length_km - length)))
    return picked


DEFAULT_SPOT_TARGETS = [(0.0, REFERENCE_RATE_HZ, True), (50.0, REFERENCE_RATE_HZ, True), (25.0, 1e9, True)]


# --------------------------------------------------------------------------- estimator soundness


@dataclass(frozen=True)
class SoundnessCheck:
    delta1_est: float
    delta1_true: float
    delta1_sigma: float
    e_m1_est: float
    e_m1_true: float
    e_m1_sigma: float

    @property
    def delta1_ok(self) -> bool:
        return self.delta1_est - self.delta1_true <= 3 * self.delta1_sigma

    @property
    def e_m1_ok(self) -> bool:
        return self.e_m1_true - self.e_m1_est <= 3 * self.e_m1_sigma


def _prop_var(count: int, windows: int) -> float:
    # binomial variance of a measured rate, floored at one count so empty classes are not exact
    if windows == 0:
        return 0.0
    q = count / windows
    return max(count, 1) * max(1.0 - q, 0.0) / windows**2


def _delta_method(fn, x: np.ndarray, var: np.ndarray) -> float:
    grad = np.zeros_like(x)
    for i in range(len(x)):
        h = max(1e-6 * abs(x[i]), 1e-3 * math.sqrt(var[i]), 1e-15)
        up, dn = x.copy(), x.copy()
        up[i] += h
        dn[i] = max(dn[i] - h, 0.0)
        grad[i] = (fn(up) - fn(dn)) / (up[i] - dn[i])
    return float(math.sqrt(np.sum(grad**2 * var)))


def decoy_soundness(stats: SessionStatistics, estimates: DecoyEstimates) -> SoundnessCheck:
    """Compare decoy bounds with ground-truth photon-number bookkeeping.

    Each sigma combines the delta-method spread of the estimator (binomial
    noise on every gain and on the decoy error count) with the binomial spread
    of the true fraction.
    """
    u, v = stats.intensities.signal, stats.intensities.decoy
    order = (Intensity.SIGNAL, Intensity.DECOY, Intensity.VACUUM)

    xq = np.array([stats.x_clicks[i] / stats.x_windows[i] if stats.x_windows[i] else 0.0 for i in order])
    xv = np.array([_prop_var(stats.x_clicks[i], stats.x_windows[i]) for i in order])

    def delta1_fn(g):
        y = yield_lower_bound_raw(GainSet(Basis.X, *np.clip(g, 0, 1), u=u, v=v))
        return u * math.exp(-u) * y / g[0] if g[0] > 0 else 0.0

    n_x = int(stats.x_clicks[Intensity.SIGNAL])
    d1_true = stats.true_single_photon_fraction()
    d1_sigma = math.hypot(_delta_method(delta1_fn, xq, xv),
                          math.sqrt(d1_true * (1 - d1_true) / n_x) if n_x else 0.0)

    zw = [stats.z_windows[i] for i in order]
    zq = np.array([stats.z_clicks[i] / w if w else 0.0 for i, w in zip(order, zw)])
    zv = np.array([_prop_var(stats.z_clicks[i], w) for i, w in zip(order, zw)])
    w_v = stats.z_windows[Intensity.DECOY]
    err_rate = stats.z_errors[Intensity.DECOY] / w_v if w_v else 0.0  # E_v * Q_v per window
    zq = np.append(zq, err_rate)
    zv = np.append(zv, _prop_var(stats.z_errors[Intensity.DECOY], w_v))

    def em1_fn(g):
        q_u, q_v, q_0, eq_v = np.clip(g, 0, 1)
        e_v = min(eq_v / q_v, 1.0) if q_v > 0 else 0.0
        try:
            return estimate_em1_raw(GainSet(Basis.Z, q_u, q_v, q_0, u=u, v=v, E_v=e_v))[0]
        except EstimationError:
            return 0.5

    n_z1 = int(stats.z_clicks_n1.sum())
    em1_true = stats.true_single_photon_monitor_error()
    em1_sigma = math.hypot(_delta_method(em1_fn, zq, zv),
                           math.sqrt(max(em1_true * (1 - em1_true), 1.0 / max(n_z1, 1)) / n_z1) if n_z1 else 0.0)
    return SoundnessCheck(estimates.delta1, d1_true, d1_sigma,
                          estimates.e_m1 if estimates.e_m1 is not None else 0.5, em1_true, em1_sigma)


# --------------------------------------------------------------------------- configuration


@dataclass
class ExperimentConfig:
    mode: str = "table2"
    preset: str = "fig3"  # fig3 | calibrated
    channel: ChannelParams = field(default_factory=ChannelParams)
    detector: DetectorParams = field(default_factory=DetectorParams)
    monitor: DetectorParams | None = None
    reset_time_s: float | None = 15e-9
    session: SessionConfig = field(default_factory=lambda: SessionConfig(num_windows=10**6))
    sweep: SweepConfig = field(default_factory=SweepConfig)
    f: float = 1.2
    attack: str = "none"
    attack_seed: int = 0
    include_overheads: bool = False
    workers: int = 1
    output: str | None = None

    def __post_init__(self):
        if self.mode not in MODES:
            raise cfgio.ConfigError(f"mode must be one of {', '.join(MODES)}, got {self.mode!r}")
        if self.attack not in ATTACK_NAMES:
            raise cfgio.ConfigError(f"attack must be one of {', '.join(ATTACK_NAMES)}, got {self.attack!r}")
        if self.f < 1:
            raise cfgio.ConfigError("f must be >= 1")
        if self.workers < 1:
            raise cfgio.ConfigError("workers must be >= 1")

    def session_detector(self) -> DetectorParams:
        return detector_at(self.detector, self.channel.repetition_rate_hz, self.reset_time_s)


def _field_converters(cls, skip=()) -> dict:
    conv = {}
    for f in dataclasses.fields(cls):
        if f.name in skip or not f.init:
            continue
        kind = type(f.default) if f.default is not dataclasses.MISSING else float
        conv[f.name] = {bool: cfgio.to_bool, int: cfgio.to_int}.get(kind, cfgio.to_float)
    return conv


CONFIG_SCHEMA: cfgio.Schema = {
    "experiment": {
        "mode": cfgio.one_of(*MODES), "preset": cfgio.one_of("fig3", "calibrated"), "output": str,
        "f": cfgio.to_float, "attack": cfgio.one_of(*ATTACK_NAMES), "attack_seed": cfgio.to_int,
        "include_overheads": cfgio.to_bool, "workers": cfgio.to_int,
    },
    "channel": _field_converters(ChannelParams),
    "detector": {**_field_converters(DetectorParams), "reset_time_s": cfgio.to_float},
    "monitor": {"efficiency": cfgio.to_float, "dark_count_prob": cfgio.to_float},
    "session": {
        "num_windows": cfgio.to_int, "q_z_probability": cfgio.to_float, "p_monitor": cfgio.to_float,
        "seed": cfgio.to_int, "batch_size": cfgio.to_int, "signal_mean": cfgio.to_float,
        "decoy_mean": cfgio.to_float, "signal_fraction": cfgio.to_float,
        "decoy_fraction": cfgio.to_float, "vacuum_fraction": cfgio.to_float,
    },
    "sweep": {
        "lengths_km": cfgio.to_float_list, "rates_hz": cfgio.to_float_list,
        "backscatter": cfgio.one_of("on", "off", "both"), "spot_checks": cfgio.to_bool,
        "spot_check_windows": cfgio.to_int,
    },
}


def build_config(raw: dict[str, dict[str, object]]) -> ExperimentConfig:
    """Assemble a validated :class:`ExperimentConfig` from parsed sections."""
    exp = dict(raw.get("experiment", {}))
    sess = dict(raw.get("session", {}))
    try:
        schedule = IntensitySchedule(signal=sess.pop("signal_fraction", 0.8),
                                     decoy=sess.pop("decoy_fraction", 0.1),
                                     vacuum=sess.pop("vacuum_fraction", 0.1))
        intensities = IntensitySettings(signal=sess.pop("signal_mean", 0.6), decoy=sess.pop("decoy_mean", 0.2))
        session = SessionConfig(num_windows=sess.pop("num_windows", 10**6), intensity_schedule=schedule,
                                intensities=intensities, **sess)

        preset = exp.get("preset", "fig3")
        monitor = None
        if preset == "calibrated":
            channel, detector, monitor = calibrated_setup(schedule, intensities)
        else:
            channel, detector = ChannelParams(), DetectorParams()
        channel = channel.replace(**raw.get("channel", {}))
        det_keys = dict(raw.get("detector", {}))
        reset = det_keys.pop("reset_time_s", None if "dead_time_windows" in det_keys else 15e-9)
        detector = detector.replace(**det_keys)
        if raw.get("monitor"):
            monitor = (monitor or detector).replace(**raw["monitor"])

        sw = dict(raw.get("sweep", {}))
        for key in ("lengths_km", "rates_hz"):
            if key in sw:
                sw[key] = tuple(sw[key])
        sweep = SweepConfig(**sw)
        return ExperimentConfig(channel=channel, detector=detector, monitor=monitor, reset_time_s=reset,
                                session=session, sweep=sweep, **exp)
    except cfgio.ConfigError:
        raise
    except (ValueError, TypeError) as exc:
        raise cfgio.ConfigError(str(exc)) from None


def load_config(path) -> ExperimentConfig:
    return build_config(cfgio.parse_config(path, CONFIG_SCHEMA))
