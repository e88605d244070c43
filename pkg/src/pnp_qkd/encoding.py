"""Time-bin qubit states, Bob's preparation table and Alice's phase encoding.

States are stored as real amplitude pairs ``(c0, c1)`` on the ``{|0>, |1>}``
time-bin axis. Every state and operation used by the protocol is real, so no
complex arithmetic is needed. Functions accept either a single pair of shape
``(2,)`` or a stack of shape ``(..., 2)``.

Outcome convention used throughout the package:

* Z basis: ``|0> -> 0``, ``|1> -> 1``
* X basis: ``|+> -> 0``, ``|-> -> 1``
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import IntEnum

import numpy as np

SQRT_HALF = math.sqrt(0.5)


class Basis(IntEnum):
    """Preparation / measurement basis. The integer value is Bob's beta bit."""

    Z = 0
    X = 1


class EncodingOp(IntEnum):
    """Alice's encoding unitary. The integer value is the key bit it carries."""

    IDENTITY = 0
    SIGMA_Z = 1


def _check_bit(value, name: str) -> None:
    if value not in (0, 1):
        raise ValueError(f"{name} must be 0 or 1, got {value!r}")


def xi_angle(alpha: int, beta: int) -> float:
    """Amplitude angle for Bob's bits: ``pi * (1 - beta - (-1)**(alpha + beta)) / 4``."""
    _check_bit(alpha, "alpha")
    _check_bit(beta, "beta")
    return math.pi * (1 - beta - (-1) ** (alpha + beta)) / 4


@dataclass(frozen=True)
class PreparedState:
    alpha: int
    basis: Basis
    xi: float

    @property
    def amplitude(self) -> np.ndarray:
        return np.array([math.cos(self.xi), math.sin(self.xi)])

    @property
    def index(self) -> int:
        """Row of :data:`STATE_TABLE` holding this state."""
        return state_index(self.alpha, int(self.basis))


def prepare_state(alpha: int, beta: int) -> PreparedState:
    return PreparedState(alpha=int(alpha), basis=Basis(beta), xi=xi_angle(alpha, beta))


def state_index(alpha, beta):
    """Flat index ``alpha + 2 * beta`` into :data:`STATE_TABLE`; works on arrays."""
    return alpha + 2 * beta


# rows ordered by state_index: |0>, |1>, |+>, |->
STATE_TABLE = np.array(
    [prepare_state(a, b).amplitude for b in (0, 1) for a in (0, 1)]
)
# cos(pi/2) leaves a 6e-17 residue; the table is used for exact eigenstate checks
STATE_TABLE[np.abs(STATE_TABLE) < 1e-15] = 0.0


def apply_encoding(amplitudes, op) -> np.ndarray:
    """Apply ``I`` or ``sigma_Z`` (negate the ``|1>`` coefficient).

    ``op`` may be an :class:`EncodingOp`, a bit, or an integer array that
    broadcasts against the leading axes of ``amplitudes``.
    """
    amps = np.array(amplitudes, dtype=float, copy=True)
    sign = 1 - 2 * np.asarray(op, dtype=int)
    amps[..., 1] *= sign
    return amps


def prob_one(amplitudes, basis) -> np.ndarray | float:
    """Born probability of outcome 1 when measuring in ``basis``.

    ``basis`` may be a :class:`Basis` or an integer array broadcasting against
    the leading axes of ``amplitudes``.
    """
    amps = np.asarray(amplitudes, dtype=float)
    c0, c1 = amps[..., 0], amps[..., 1]
    p_z = c1 * c1
    p_x = 0.5 * (c0 - c1) ** 2
    out = np.where(np.asarray(basis) == Basis.Z, p_z, p_x)
    return float(out) if out.ndim == 0 else out


def measure(amplitudes, basis, rng: np.random.Generator):
    """Sample a measurement outcome with Born-rule statistics.

    Returns an ``int`` for a single state, else an ``int8`` array.
    """
    p1 = np.asarray(prob_one(amplitudes, basis))
    draws = rng.random(p1.shape)
    bits = (draws < p1).astype(np.int8)
    return int(bits) if bits.ndim == 0 else bits


def same_state(a, b, atol: float = 1e-12) -> bool:
    """Equality of real states up to a global sign."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    return bool(np.allclose(a, b, atol=atol) or np.allclose(a, -b, atol=atol))

