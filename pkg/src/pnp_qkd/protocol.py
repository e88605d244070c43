"""Monte-Carlo execution of the two-way protocol.

One window::

    Bob prepares (alpha, basis, intensity) and emits a weak coherent pulse
      -> forward fibre (Eve acts here)
      -> Alice: monitor in Z with probability p, else encode I / sigma_Z and return
      -> backward fibre, Bob measures in X
    classical phase: MonitorReveal (Alice), SiftIndices (Bob), BerAnnounce (Bob)

Windows are simulated in fixed-size batches, each with its own child of the
session ``SeedSequence``. The batch layout depends only on ``batch_size``, so a
session gives identical results for any number of worker processes. Detector
dead time restarts at batch boundaries (frames are separated by a guard gap).
"""
from __future__ import annotations

import csv
from collections import deque
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from enum import Enum, IntEnum
from typing import Callable, Iterator, NamedTuple

import numpy as np

from . import channel as ch
from .attacks import EveModel, NoAttack
from .channel import ChannelParams, ClickCause, DetectorParams, Intensity, IntensitySettings, Segment
from .decoy import GainSet
from .encoding import Basis, state_index
from .framing import (NO_CLICK, Ack, BerAnnounce, FrameReader, MonitorReveal, SiftIndices,
                      frame_encode)

DEFAULT_BATCH = 1 << 18
NO_BIT = -1


class ConfigurationError(ValueError):
    pass


class ProtocolError(RuntimeError):
    """An endpoint received a message it cannot accept in its current phase."""


class AliceAction(IntEnum):
    MONITORED = 0
    ENCODED = 1


@dataclass(frozen=True)
class IntensitySchedule:
    signal: float = 0.8
    decoy: float = 0.1
    vacuum: float = 0.1

    @property
    def probs(self) -> np.ndarray:
        """Probabilities indexed by :class:`Intensity`."""
        return np.array([self.vacuum, self.decoy, self.signal])


@dataclass(frozen=True)
class SessionConfig:
    num_windows: int
    q_z_probability: float = 0.5
    p_monitor: float = 0.5
    intensity_schedule: IntensitySchedule = IntensitySchedule()
    intensities: IntensitySettings = IntensitySettings()
    seed: int = 0
    batch_size: int = DEFAULT_BATCH

    def __post_init__(self):
        if self.num_windows < 1:
            raise ConfigurationError(f"num_windows must be >= 1, got {self.num_windows}")
        for name in ("q_z_probability", "p_monitor"):
            val = getattr(self, name)
            if not 0 <= val <= 1:
                raise ConfigurationError(f"{name} must lie in [0, 1], got {val}")
        probs = self.intensity_schedule.probs
        if np.any(probs < 0) or abs(probs.sum() - 1) > 1e-9:
            raise ConfigurationError(f"intensity schedule must be a distribution, got {probs.tolist()}")
        if not 0 <= self.seed < 2**64:
            raise ConfigurationError("seed must be a 64-bit unsigned integer")
        if self.batch_size < 1:
            raise ConfigurationError("batch_size must be >= 1")

    @property
    def mean_outgoing_photons(self) -> float:
        return float(self.intensity_schedule.probs @ self.intensities.means)


class Schedule(NamedTuple):
    alpha: np.ndarray
    basis: np.ndarray
    intensity: np.ndarray


def bob_prepare_schedule(config: SessionConfig, rng: np.random.Generator, size: int | None = None) -> Schedule:
    """Bob's private choices per window: basis Z with probability q, uniform alpha."""
    size = config.num_windows if size is None else size
    basis = np.where(rng.random(size) < config.q_z_probability, Basis.Z, Basis.X).astype(np.int8)
    alpha = rng.integers(0, 2, size, dtype=np.int8)
    intensity = rng.choice(3, size=size, p=config.intensity_schedule.probs).astype(np.int8)
    return Schedule(alpha, basis, intensity)


class AliceBatch(NamedTuple):
    action: np.ndarray
    bit: np.ndarray  # key bit if encoded, Z outcome if monitored and clicked, else NO_BIT
    cause: np.ndarray
    clicked: np.ndarray


def alice_process(photons_at_alice: np.ndarray, p_z1: np.ndarray, config: SessionConfig,
                  channel: ChannelParams, det: DetectorParams, rng: np.random.Generator) -> AliceBatch:
    """Alice's branch for a batch of arrivals.

    With probability ``p_monitor`` the pulse goes to the monitoring detector
    through the coupler port and is measured in Z; otherwise a random key bit
    selects ``I`` or ``sigma_Z`` and the pulse is returned.
    """
    m = photons_at_alice.shape[0]
    monitored = rng.random(m) < config.p_monitor
    key = rng.integers(0, 2, m, dtype=np.int8)
    n_mon = rng.binomial(photons_at_alice, channel.coupler_split)
    hit = monitored & (rng.random(m) < ch.signal_click_prob(n_mon, det.efficiency))
    dark = monitored & (rng.random(m) < det.dark_count_prob)
    z_bit = (rng.random(m) < p_z1) ^ (rng.random(m) < channel.z_flip_prob)
    noise_bit = rng.integers(0, 2, m, dtype=np.int8)
    outcome = np.where(hit, z_bit, noise_bit).astype(np.int8)
    clicked = hit | dark
    cause = np.select([hit, dark], [ClickCause.SIGNAL_PHOTON, ClickCause.DARK_COUNT],
                      ClickCause.NONE).astype(np.int8)
    bit = np.where(monitored, np.where(clicked, outcome, NO_BIT), key).astype(np.int8)
    action = np.where(monitored, AliceAction.MONITORED, AliceAction.ENCODED).astype(np.int8)
    return AliceBatch(action, bit, cause, clicked)


def dead_time_mask(clicks: np.ndarray, dead_windows: int) -> np.ndarray:
    """Windows blanked by detector reset after each registered click."""
    n = clicks.shape[0]
    blanked = np.zeros(n, dtype=bool)
    if dead_windows == 0:
        return blanked
    next_free = -1
    for i in np.flatnonzero(clicks):
        if i < next_free:
            continue
        end = min(i + dead_windows + 1, n)
        blanked[i + 1:end] = True
        next_free = end
    return blanked


# --------------------------------------------------------------------------- transcript

TRANSCRIPT_FIELDS = ("intensity", "alpha", "basis", "photons", "action", "alice_bit",
                     "alice_cause", "alice_dead", "bob_outcome", "bob_cause", "bob_dead",
                     "eve_record")

CSV_COLUMNS = ("window_index", "intensity", "bob_alpha", "bob_basis", "alice_action",
               "alice_bit", "bob_outcome", "click_cause", "photons", "discarded")


@dataclass(frozen=True)
class PulseRecord:
    window_index: int
    intensity: Intensity
    bob_alpha: int
    bob_basis: Basis
    alice_action: AliceAction
    alice_bit: int | None
    bob_outcome: int | None
    click_cause: ClickCause
    photons: int
    discarded: bool

    def csv_row(self) -> list:
        return [self.window_index, self.intensity.name.lower(), self.bob_alpha, self.bob_basis.name,
                self.alice_action.name.lower(), "" if self.alice_bit is None else self.alice_bit,
                "" if self.bob_outcome is None else self.bob_outcome,
                self.click_cause.name.lower(), self.photons, int(self.discarded)]


@dataclass
class Transcript:
    """Column store of one session, one entry per window."""

    columns: dict[str, np.ndarray]

    def __len__(self) -> int:
        return len(self.columns["intensity"])

    def __getattr__(self, name):
        try:
            return self.__dict__["columns"][name]
        except KeyError:
            raise AttributeError(name) from None

    @classmethod
    def concatenate(cls, parts: list["Transcript"]) -> "Transcript":
        return cls({k: np.concatenate([p.columns[k] for p in parts]) for k in TRANSCRIPT_FIELDS})

    def record(self, i: int) -> PulseRecord:
        c = self.columns
        encoded = c["action"][i] == AliceAction.ENCODED
        cause = c["bob_cause"][i] if encoded else c["alice_cause"][i]
        dead = c["bob_dead"][i] if encoded else c["alice_dead"][i]
        a_bit = int(c["alice_bit"][i])
        b_out = int(c["bob_outcome"][i])
        return PulseRecord(
            window_index=i, intensity=Intensity(int(c["intensity"][i])), bob_alpha=int(c["alpha"][i]),
            bob_basis=Basis(int(c["basis"][i])), alice_action=AliceAction(int(c["action"][i])),
            alice_bit=None if a_bit == NO_BIT else a_bit, bob_outcome=None if b_out == NO_BIT else b_out,
            click_cause=ClickCause(int(cause)), photons=int(c["photons"][i]), discarded=bool(dead),
        )

    def records(self) -> Iterator[PulseRecord]:
        for i in range(len(self)):
            yield self.record(i)

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(CSV_COLUMNS)
            for rec in self.records():
                writer.writerow(rec.csv_row())


# --------------------------------------------------------------------------- simulation


@dataclass(frozen=True)
class _BatchJob:
    config: SessionConfig
    channel: ChannelParams
    bob_det: DetectorParams
    alice_det: DetectorParams
    attack: EveModel
    seed: np.random.SeedSequence
    size: int


def _simulate_batch(job: _BatchJob) -> Transcript:
    cfg, chan = job.config, job.channel
    rng = np.random.default_rng(job.seed)
    m = job.size

    sched = bob_prepare_schedule(cfg, rng, m)
    photons = rng.poisson(cfg.intensities.means[sched.intensity])
    s = state_index(sched.alpha, sched.basis).astype(np.intp)
    fwd = job.attack.forward(s, photons, rng)

    n_alice = rng.binomial(photons, ch.transmittance(chan, Segment.FORWARD))
    alice = alice_process(n_alice, fwd.p_z1, cfg, chan, job.alice_det, rng)
    encoded = alice.action == AliceAction.ENCODED

    t_enc = (1.0 - chan.coupler_split) * ch.db_to_linear(chan.encode_loss_db)
    n_ret = np.where(encoded, rng.binomial(n_alice, t_enc), 0)
    key = np.where(encoded, alice.bit, 0).astype(np.intp)
    captured, capture_record = job.attack.capture(s, key, encoded & (n_ret > 0), rng)
    n_ret = np.where(captured, 0, n_ret)
    t_back = ch.db_to_linear(chan.fiber_length_km * chan.fiber_loss_db_per_km + chan.decode_loss_db)
    n_bob = rng.binomial(n_ret, t_back)

    bob_det = job.bob_det
    p_bs = ch.backscatter_click_prob(cfg.mean_outgoing_photons, chan, bob_det)
    hit = rng.random(m) < ch.signal_click_prob(n_bob, bob_det.efficiency)
    bs = rng.random(m) < p_bs
    dark = rng.random(m) < bob_det.dark_count_prob
    p_x1 = fwd.p_x1[np.arange(m), key]
    x_bit = (rng.random(m) < p_x1) ^ (rng.random(m) < chan.x_flip_prob)
    noise_bit = rng.integers(0, 2, m, dtype=np.int8)
    bob_click = hit | bs | dark
    bob_cause = np.select([hit, bs, dark],
                          [ClickCause.SIGNAL_PHOTON, ClickCause.BACKSCATTER, ClickCause.DARK_COUNT],
                          ClickCause.NONE).astype(np.int8)

    bob_dead = dead_time_mask(bob_click, bob_det.dead_time_windows)
    alice_dead = dead_time_mask(alice.clicked, job.alice_det.dead_time_windows)
    bob_click &= ~bob_dead
    bob_outcome = np.where(bob_click, np.where(hit, x_bit, noise_bit), NO_BIT).astype(np.int8)
    alice_bit = np.where(~encoded & alice_dead, NO_BIT, alice.bit).astype(np.int8)
    eve_record = np.where(capture_record >= 0, capture_record, fwd.record).astype(np.int8)

    return Transcript({
        "intensity": sched.intensity, "alpha": sched.alpha, "basis": sched.basis,
        "photons": np.minimum(photons, np.iinfo(np.int16).max).astype(np.int16),
        "action": alice.action, "alice_bit": alice_bit, "alice_cause": alice.cause,
        "alice_dead": alice_dead, "bob_outcome": bob_outcome, "bob_cause": bob_cause,
        "bob_dead": bob_dead, "eve_record": eve_record,
    })


def simulate(config: SessionConfig, channel: ChannelParams, detector: DetectorParams,
             attack: EveModel | None = None, monitor_detector: DetectorParams | None = None,
             workers: int = 1) -> Transcript:
    """Run the quantum phase of a session and return the per-window transcript."""
    attack = attack or NoAttack()
    monitor_detector = monitor_detector or detector
    n, b = config.num_windows, config.batch_size
    sizes = [min(b, n - start) for start in range(0, n, b)]
    seeds = np.random.SeedSequence(config.seed).spawn(len(sizes))
    jobs = [_BatchJob(config, channel, detector, monitor_detector, attack, sd, sz)
            for sd, sz in zip(seeds, sizes)]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_simulate_batch, jobs))
    else:
        parts = [_simulate_batch(j) for j in jobs]
    return Transcript.concatenate(parts)


# --------------------------------------------------------------------------- endpoints


class Phase(Enum):
    IDLE = "idle"
    AWAIT_SIFT = "await_sift"
    AWAIT_BER = "await_ber"
    AWAIT_MONITOR = "await_monitor"
    AWAIT_ACK_SIFT = "await_ack_sift"
    AWAIT_ACK_BER = "await_ack_ber"
    DONE = "done"


class AliceEndpoint:
    """Reveals monitoring results, then collects the key at Bob's sifted positions."""

    def __init__(self, action: np.ndarray, bit: np.ndarray):
        self._action = action
        self._bit = bit
        self.phase = Phase.IDLE
        self.key: np.ndarray | None = None
        self.announced_ber: float | None = None

    def start(self) -> bytes:
        if self.phase is not Phase.IDLE:
            raise ProtocolError("Alice already started")
        positions = np.flatnonzero(self._action == AliceAction.MONITORED)
        bits = self._bit[positions]
        outcomes = np.where(bits == NO_BIT, NO_CLICK, bits).astype(np.uint8)
        self.phase = Phase.AWAIT_SIFT
        return frame_encode(MonitorReveal(positions, outcomes))

    def error_count(self, positions: np.ndarray, bob_bits: np.ndarray) -> int:
        """Number of bits error correction fixes; stands in for the reconciliation code."""
        return int(np.count_nonzero(self._bit[positions] != bob_bits))

    def receive(self, msg) -> bytes | None:
        if self.phase is Phase.AWAIT_SIFT and isinstance(msg, SiftIndices):
            pos = msg.positions.astype(np.intp)
            if pos.size and (pos.max() >= len(self._action) or np.any(self._action[pos] != AliceAction.ENCODED)):
                raise ProtocolError("Bob sifted a window Alice did not encode")
            self.key = self._bit[pos].copy()
            self.phase = Phase.AWAIT_BER
            return frame_encode(Ack())
        if self.phase is Phase.AWAIT_BER and isinstance(msg, BerAnnounce):
            self.announced_ber = msg.ber
            self.phase = Phase.DONE
            return frame_encode(Ack())
        raise ProtocolError(f"Alice in phase {self.phase.value} cannot accept {type(msg).__name__}")


class BobEndpoint:
    """Estimates the monitoring error, sifts his X-basis key and announces the BER.

    Only signal-intensity windows enter the key; decoy and vacuum windows are
    kept for parameter estimation.
    """

    def __init__(self, alpha: np.ndarray, basis: np.ndarray, intensity: np.ndarray,
                 outcome: np.ndarray, reconcile: Callable[[np.ndarray, np.ndarray], int]):
        self._alpha = alpha
        self._basis = basis
        self._intensity = intensity
        self._outcome = outcome
        self._reconcile = reconcile
        self.phase = Phase.AWAIT_MONITOR
        self.monitor_alpha: np.ndarray | None = None
        self.monitor_outcome: np.ndarray | None = None
        self.sifted_positions: np.ndarray | None = None
        self.key: np.ndarray | None = None
        self.ber: float | None = None

    def receive(self, msg) -> bytes | None:
        if self.phase is Phase.AWAIT_MONITOR and isinstance(msg, MonitorReveal):
            pos = msg.positions.astype(np.intp)
            if pos.size and pos.max() >= len(self._alpha):
                raise ProtocolError("monitor reveal refers to a window outside the session")
            usable = (msg.outcomes != NO_CLICK) & (self._basis[pos] == Basis.Z) \
                & (self._intensity[pos] == Intensity.SIGNAL)
            self.monitor_alpha = self._alpha[pos[usable]]
            self.monitor_outcome = msg.outcomes[usable].astype(np.int8)
            keep = (self._basis == Basis.X) & (self._outcome != NO_BIT) & (self._intensity == Intensity.SIGNAL)
            keep[pos] = False
            self.sifted_positions = np.flatnonzero(keep)
            self.key = (self._outcome[keep] ^ self._alpha[keep]).astype(np.int8)
            self.phase = Phase.AWAIT_ACK_SIFT
            return frame_encode(SiftIndices(self.sifted_positions))
        if self.phase is Phase.AWAIT_ACK_SIFT and isinstance(msg, Ack):
            n = len(self.key)
            self.ber = self._reconcile(self.sifted_positions, self.key) / n if n else 0.0
            self.phase = Phase.AWAIT_ACK_BER
            return frame_encode(BerAnnounce(self.ber))
        if self.phase is Phase.AWAIT_ACK_BER and isinstance(msg, Ack):
            self.phase = Phase.DONE
            return None
        raise ProtocolError(f"Bob in phase {self.phase.value} cannot accept {type(msg).__name__}")


def exchange(alice: AliceEndpoint, bob: BobEndpoint) -> int:
    """Drive both endpoints over an in-memory byte pipe; returns bytes transferred."""
    to_bob: deque[bytes] = deque([alice.start()])
    to_alice: deque[bytes] = deque()
    readers = {"alice": FrameReader(), "bob": FrameReader()}
    total = 0
    while to_bob or to_alice:
        if to_bob:
            chunk = to_bob.popleft()
            total += len(chunk)
            for msg in readers["bob"].feed(chunk):
                reply = bob.receive(msg)
                if reply is not None:
                    to_alice.append(reply)
        if to_alice:
            chunk = to_alice.popleft()
            total += len(chunk)
            for msg in readers["alice"].feed(chunk):
                reply = alice.receive(msg)
                if reply is not None:
                    to_bob.append(reply)
    if alice.phase is not Phase.DONE or bob.phase is not Phase.DONE:
        raise ProtocolError(f"exchange stalled: Alice {alice.phase.value}, Bob {bob.phase.value}")
    return total


# --------------------------------------------------------------------------- statistics


def _per_intensity(mask: np.ndarray, intensity: np.ndarray) -> np.ndarray:
    return np.bincount(intensity[mask], minlength=3).astype(np.int64)


@dataclass
class SessionStatistics:
    num_windows: int
    intensities: IntensitySettings
    # indexed by Intensity
    x_windows: np.ndarray
    x_clicks: np.ndarray
    x_errors: np.ndarray
    z_windows: np.ndarray
    z_clicks: np.ndarray
    z_errors: np.ndarray
    # ground truth restricted to single-photon pulses
    x_clicks_n1: np.ndarray
    x_errors_n1: np.ndarray
    z_clicks_n1: np.ndarray
    z_errors_n1: np.ndarray
    sifted_alice: np.ndarray
    sifted_bob: np.ndarray
    monitor_alpha: np.ndarray
    monitor_outcome: np.ndarray
    ber: float
    eve_key_table: np.ndarray
    bytes_exchanged: int
    transcript: Transcript | None = field(default=None, repr=False)

    def gain(self, basis: Basis, cls: Intensity) -> float:
        w, c = (self.x_windows, self.x_clicks) if basis is Basis.X else (self.z_windows, self.z_clicks)
        return float(c[cls] / w[cls]) if w[cls] else 0.0

    def error_rate(self, basis: Basis, cls: Intensity) -> float:
        c, e = (self.x_clicks, self.x_errors) if basis is Basis.X else (self.z_clicks, self.z_errors)
        return float(e[cls] / c[cls]) if c[cls] else 0.0

    @property
    def e(self) -> float:
        """Announced X-basis BER of the sifted (signal) key."""
        return self.ber

    @property
    def e_m(self) -> float:
        """Monitoring BER from Alice's revealed Z outcomes on signal windows."""
        n = len(self.monitor_alpha)
        return float(np.count_nonzero(self.monitor_alpha != self.monitor_outcome)) / n if n else 0.0

    @property
    def monitor_count(self) -> int:
        return len(self.monitor_alpha)

    def gain_set(self, basis: Basis) -> GainSet:
        u, v = self.intensities.signal, self.intensities.decoy
        return GainSet(basis, Q_u=self.gain(basis, Intensity.SIGNAL), Q_v=self.gain(basis, Intensity.DECOY),
                       Q_0=self.gain(basis, Intensity.VACUUM), u=u, v=v,
                       E_v=self.error_rate(basis, Intensity.DECOY))

    def true_single_photon_fraction(self) -> float:
        """Share of signal X clicks at Bob that came from one-photon pulses."""
        c = self.x_clicks[Intensity.SIGNAL]
        return float(self.x_clicks_n1[Intensity.SIGNAL] / c) if c else 0.0

    def true_single_photon_monitor_error(self) -> float:
        c = self.z_clicks_n1.sum()
        return float(self.z_errors_n1.sum() / c) if c else 0.0


def session_statistics(t: Transcript, config: SessionConfig, sifted_alice: np.ndarray,
                       sifted_bob: np.ndarray, monitor_alpha: np.ndarray, monitor_outcome: np.ndarray,
                       ber: float, bytes_exchanged: int, keep_transcript: bool = True) -> SessionStatistics:
    inten = t.intensity.astype(np.intp)
    encoded = t.action == AliceAction.ENCODED
    x_win = (t.basis == Basis.X) & encoded & ~t.bob_dead
    x_click = x_win & (t.bob_outcome != NO_BIT)
    x_err = x_click & ((t.bob_outcome ^ t.alpha) != t.alice_bit)
    z_win = (t.basis == Basis.Z) & ~encoded & ~t.alice_dead
    z_click = z_win & (t.alice_bit != NO_BIT)
    z_err = z_click & (t.alice_bit != t.alpha)
    one = t.photons == 1

    key_windows = (t.basis == Basis.X) & encoded & (t.eve_record >= 0)
    eve_table = np.zeros((4, 2), dtype=np.int64)
    np.add.at(eve_table, (t.eve_record[key_windows].astype(np.intp), t.alice_bit[key_windows].astype(np.intp)), 1)

    return SessionStatistics(
        num_windows=len(t), intensities=config.intensities,
        x_windows=_per_intensity(x_win, inten), x_clicks=_per_intensity(x_click, inten),
        x_errors=_per_intensity(x_err, inten),
        z_windows=_per_intensity(z_win, inten), z_clicks=_per_intensity(z_click, inten),
        z_errors=_per_intensity(z_err, inten),
        x_clicks_n1=_per_intensity(x_click & one, inten), x_errors_n1=_per_intensity(x_err & one, inten),
        z_clicks_n1=_per_intensity(z_click & one, inten), z_errors_n1=_per_intensity(z_err & one, inten),
        sifted_alice=sifted_alice, sifted_bob=sifted_bob,
        monitor_alpha=monitor_alpha, monitor_outcome=monitor_outcome, ber=ber,
        eve_key_table=eve_table, bytes_exchanged=bytes_exchanged,
        transcript=t if keep_transcript else None,
    )


def run_session(config: SessionConfig, channel: ChannelParams, detector: DetectorParams,
                attack: EveModel | None = None, monitor_detector: DetectorParams | None = None,
                workers: int = 1, keep_transcript: bool = True) -> SessionStatistics:
    """Quantum phase, classical exchange over framed messages, then aggregation."""
    t = simulate(config, channel, detector, attack, monitor_detector, workers)
    alice = AliceEndpoint(t.action, t.alice_bit)
    bob = BobEndpoint(t.alpha, t.basis, t.intensity, t.bob_outcome, alice.error_count)
    nbytes = exchange(alice, bob)
    return session_statistics(
        t, config, sifted_alice=alice.key, sifted_bob=bob.key,
        monitor_alpha=bob.monitor_alpha, monitor_outcome=bob.monitor_outcome,
        ber=bob.ber, bytes_exchanged=nbytes, keep_transcript=keep_transcript,
    )
