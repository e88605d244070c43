"""Eavesdropper models on the forward (Bob -> Alice) channel.

Each model turns the pulses Bob emits into the Born statistics seen downstream:
the probability that Alice's Z measurement yields 1 and, for each of Alice's
encodings, the probability that Bob's X measurement yields 1. Eve's per-window
record is kept for the empirical information estimate in :func:`eve_advantage`.

Intercept-resend in X on time-bin qubits uses a passive unbalanced
interferometer: the photon exits in the central slot (an X measurement) with
probability 1/2 and in a side slot (revealing the time bin, i.e. a Z
measurement) otherwise. Eve resends the eigenstate of whatever she learned.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .encoding import STATE_TABLE, Basis, apply_encoding, measure, prob_one, state_index
from .security import AncillaRealization, EveOverlaps, sample_ancilla_realization

NO_RECORD = -1
LOW_CONFIDENCE_SAMPLES = 10_000


@dataclass
class Forwarded:
    """Downstream Born statistics per window, as produced by an attack."""

    p_z1: np.ndarray
    p_x1: np.ndarray  # shape (m, 2): column k is Bob's P(outcome 1) after Alice's op k
    record: np.ndarray


def honest_tables() -> tuple[np.ndarray, np.ndarray]:
    """``(p_z1[s], p_x1[s, k])`` for the four prepared states with no eavesdropper."""
    p_z1 = prob_one(STATE_TABLE, Basis.Z)
    p_x1 = np.stack([prob_one(apply_encoding(STATE_TABLE, k), Basis.X) for k in (0, 1)], axis=1)
    return np.asarray(p_z1), p_x1


_HONEST_Z, _HONEST_X = honest_tables()


class EveModel:
    """No eavesdropper. Subclasses override :meth:`forward` and optionally :meth:`capture`."""

    name = "none"
    extracts_information = False

    def forward(self, state_idx: np.ndarray, photons: np.ndarray, rng: np.random.Generator) -> Forwarded:
        record = np.full(state_idx.shape, NO_RECORD, dtype=np.int8)
        return Forwarded(_HONEST_Z[state_idx], _HONEST_X[state_idx], record)

    def capture(self, state_idx: np.ndarray, key_bits: np.ndarray, eligible: np.ndarray,
                rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
        """Eve's action on encoded pulses leaving Alice: ``(captured, record)``."""
        return np.zeros(state_idx.shape, dtype=bool), np.full(state_idx.shape, NO_RECORD, dtype=np.int8)

    def predicted_monitor_error(self) -> float:
        return 0.0


NoAttack = EveModel


@dataclass
class InterceptResend(EveModel):
    basis: Basis = Basis.Z

    extracts_information = True

    @property
    def name(self) -> str:
        return f"intercept-resend-{self.basis.name.lower()}"

    def forward(self, state_idx, photons, rng):
        m = state_idx.shape
        if self.basis is Basis.Z:
            eve_basis = np.zeros(m, dtype=np.int8)
        else:
            # central slot with probability 1/2, otherwise the time bin is revealed
            eve_basis = (rng.random(m) < 0.5).astype(np.int8)
        outcome = measure(STATE_TABLE[state_idx], eve_basis, rng)
        present = photons > 0
        resent = np.where(present, state_index(outcome, eve_basis), state_idx)
        record = np.where(present, outcome + 2 * eve_basis, NO_RECORD).astype(np.int8)
        return Forwarded(_HONEST_Z[resent], _HONEST_X[resent], record)

    def predicted_monitor_error(self) -> float:
        return 0.0 if self.basis is Basis.Z else 0.25


@dataclass
class CollectiveUnitary(EveModel):
    """Entangling attack ``U`` on qubit x ancilla.

    Eve keeps her ancilla and captures a fraction of the encoded pulses on the
    way back, measuring qubit and ancilla jointly with the Helstrom measurement
    for Alice's two encodings. Captured pulses never reach Bob.
    """

    realization: AncillaRealization
    capture_fraction: float = 0.5
    name: str = "collective"
    tables: dict = field(init=False, repr=False)

    extracts_information = True

    def __post_init__(self):
        if not 0 <= self.capture_fraction <= 1:
            raise ValueError("capture_fraction must lie in [0, 1]")
        self.tables = _collective_tables(self.realization)

    @classmethod
    def random(cls, rng: np.random.Generator, ancilla_dim: int = 4, **kw) -> "CollectiveUnitary":
        return cls(sample_ancilla_realization(rng, ancilla_dim, symmetric=True), **kw)

    @property
    def overlaps(self) -> EveOverlaps:
        return self.realization.overlaps()

    def forward(self, state_idx, photons, rng):
        t = self.tables
        present = photons > 0
        p_z1 = np.where(present, t["p_z1"][state_idx], _HONEST_Z[state_idx])
        p_x1 = np.where(present[:, None], t["p_x1"][state_idx], _HONEST_X[state_idx])
        record = np.full(state_idx.shape, NO_RECORD, dtype=np.int8)
        return Forwarded(p_z1, p_x1, record)

    def capture(self, state_idx, key_bits, eligible, rng):
        captured = eligible & (rng.random(state_idx.shape) < self.capture_fraction)
        p_guess0 = self.tables["p_guess0"][state_idx, key_bits]
        guess = (rng.random(state_idx.shape) >= p_guess0).astype(np.int8)
        record = np.where(captured, guess, NO_RECORD).astype(np.int8)
        return captured, record

    def predicted_monitor_error(self) -> float:
        return self.overlaps.mean_z_error


def _collective_tables(r: AncillaRealization) -> dict[str, np.ndarray]:
    joint = [r.joint_state(STATE_TABLE[s]) for s in range(4)]  # each (2, d)
    encoded = [[psi * np.array([[1.0], [(-1.0) ** k]]) for k in (0, 1)] for psi in joint]
    p_z1 = np.array([np.vdot(psi[1], psi[1]).real for psi in joint])
    p_x1 = np.array([
        [0.5 * np.vdot(e[0] - e[1], e[0] - e[1]).real for e in pair] for pair in encoded
    ])
    # Eve's states for key bit k, averaged over Bob's (unknown) input
    phi = r.phi_vectors()
    rho = [0.5 * (np.outer(phi[0 + 2 * k], phi[0 + 2 * k].conj()) + np.outer(phi[1 + 2 * k], phi[1 + 2 * k].conj()))
           for k in (0, 1)]
    w, v = np.linalg.eigh(rho[0] - rho[1])
    pos = v[:, w > 1e-12]
    proj0 = pos @ pos.conj().T
    p_guess0 = np.array([
        [np.vdot(e.reshape(-1), proj0 @ e.reshape(-1)).real for e in pair] for pair in encoded
    ])
    return {"p_z1": p_z1, "p_x1": np.clip(p_x1, 0, 1), "p_guess0": np.clip(p_guess0, 0, 1)}


ATTACK_NAMES = ("none", "intercept-resend-z", "intercept-resend-x", "collective")


def make_attack(name: str, seed: int = 0) -> EveModel:
    if name == "none":
        return NoAttack()
    if name == "intercept-resend-z":
        return InterceptResend(Basis.Z)
    if name == "intercept-resend-x":
        return InterceptResend(Basis.X)
    if name == "collective":
        return CollectiveUnitary.random(np.random.default_rng(seed))
    raise ValueError(f"unknown attack {name!r}; choose from {', '.join(ATTACK_NAMES)}")


# --------------------------------------------------------------------------- advantage


@dataclass(frozen=True)
class AdvantageEstimate:
    bits: float
    stderr: float
    bias: float
    samples: int
    low_confidence: bool

    def upper(self, sigmas: float = 3.0) -> float:
        """Upper confidence limit including the plug-in bias allowance."""
        return self.bits + sigmas * self.stderr + self.bias


def plugin_mutual_information(table: np.ndarray) -> AdvantageEstimate:
    """Plug-in MI in bits from a contingency table, with its asymptotic spread.

    ``stderr`` uses the delta-method variance of the plug-in estimator and
    ``bias`` is the first-order Miller-Madow term.
    """
    counts = np.asarray(table, dtype=float)
    n = counts.sum()
    if n == 0:
        return AdvantageEstimate(0.0, 0.0, 0.0, 0, True)
    p = counts / n
    px = p.sum(axis=1, keepdims=True)
    py = p.sum(axis=0, keepdims=True)
    nz = p > 0
    ratio = np.zeros_like(p)
    ratio[nz] = np.log2(p[nz] / (px @ py)[nz])
    mi = float(np.sum(p[nz] * ratio[nz]))
    second = float(np.sum(p[nz] * ratio[nz] ** 2))
    stderr = math.sqrt(max(second - mi * mi, 0.0) / n)
    rows = int((px > 0).sum())
    cols = int((py > 0).sum())
    bias = max(rows - 1, 0) * max(cols - 1, 0) / (2 * n * math.log(2))
    return AdvantageEstimate(max(mi, 0.0), stderr, float(bias), int(n), bool(n < LOW_CONFIDENCE_SAMPLES))


def eve_advantage(model: EveModel, stats) -> AdvantageEstimate:
    """Empirical information (bits per key bit) Eve's record holds on Alice's key.

    Uses key-carrying windows (Bob prepared X, Alice encoded) for which Eve kept
    a record. Flagged low-confidence below 10^4 samples.
    """
    table = np.asarray(stats.eve_key_table)
    if not model.extracts_information or table.sum() == 0:
        n = int(table.sum())
        return AdvantageEstimate(0.0, 0.0, 0.0, n, n < LOW_CONFIDENCE_SAMPLES)
    return plugin_mutual_information(table)
