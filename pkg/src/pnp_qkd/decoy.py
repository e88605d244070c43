"""Vacuum + weak decoy estimation of single-photon quantities.

X-basis gains measured at Bob give the fractions of detections that came from
vacuum and single-photon pulses; Z-basis gains measured at Alice's monitoring
detector give an upper bound on the single-photon monitoring error.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

from .encoding import Basis

VACUUM_ERROR = 0.5


class EstimationError(RuntimeError):
    """Decoy statistics do not support a positive single-photon yield."""


@dataclass(frozen=True)
class GainSet:
    basis: Basis
    Q_u: float
    Q_v: float
    Q_0: float
    u: float = 0.6
    v: float = 0.2
    E_v: float = 0.0

    def __post_init__(self):
        if not self.u > self.v > 0:
            raise ValueError(f"need u > v > 0, got u={self.u}, v={self.v}")
        for name in ("Q_u", "Q_v", "Q_0", "E_v"):
            val = getattr(self, name)
            if not 0 <= val <= 1:
                raise ValueError(f"{name} must lie in [0, 1], got {val}")

    def scaled(self, factor: float) -> "GainSet":
        return GainSet(self.basis, self.Q_u * factor, self.Q_v * factor, self.Q_0 * factor,
                       self.u, self.v, self.E_v)


@dataclass(frozen=True)
class DecoyEstimates:
    Y_L_x: float
    delta0: float
    delta1: float
    Y_L_z: float | None = None
    e_m1: float | None = None
    diagnostics: tuple[str, ...] = field(default_factory=tuple)


def yield_lower_bound_raw(g: GainSet) -> float:
    u, v = g.u, g.v
    bracket = (
        g.Q_v * math.exp(v)
        - (v * v) / (u * u) * g.Q_u * math.exp(u)
        - (u * u - v * v) / (u * u) * g.Q_0
    )
    return u * bracket / (u * v - v * v)


def yield_lower_bound(g: GainSet, diagnostics: list[str] | None = None) -> float:
    """Lower bound on the single-photon yield, clamped at 0."""
    y = yield_lower_bound_raw(g)
    if y < 0:
        if diagnostics is not None:
            diagnostics.append(f"{g.basis.name}-basis yield bound {y:.3g} < 0 clamped to 0")
        return 0.0
    return y


def estimate_fractions(g_x: GainSet, diagnostics: list[str] | None = None) -> tuple[float, float, float]:
    """Return ``(delta0, delta1, Y_L)`` from X-basis gains.

    ``delta0 = Q_0 e^-u / Q_u`` and ``delta1 = u e^-u Y_L / Q_u``, each clamped to [0, 1].
    """
    if g_x.Q_u <= 0:
        raise EstimationError("signal gain Q_u is zero")
    y_l = yield_lower_bound(g_x, diagnostics)
    weight = math.exp(-g_x.u) / g_x.Q_u
    delta0 = g_x.Q_0 * weight
    delta1 = g_x.u * y_l * weight
    if delta1 > 1:
        if diagnostics is not None:
            diagnostics.append(f"delta1 {delta1:.4g} > 1 clamped")
        delta1 = 1.0
    if delta0 > 1 - delta1:
        if diagnostics is not None:
            diagnostics.append(f"delta0 {delta0:.4g} clamped so delta0 + delta1 <= 1")
        delta0 = 1.0 - delta1
    return delta0, delta1, y_l


def estimate_em1_raw(g_z: GainSet) -> tuple[float, float]:
    """Unclamped ``(e_m1, Y_L)``; raises when the yield bound is not positive."""
    y_l = yield_lower_bound_raw(g_z)
    if y_l <= 0:
        raise EstimationError(f"Z-basis single-photon yield bound {y_l:.3g} <= 0")
    e = (g_z.E_v * g_z.Q_v * math.exp(g_z.v) - VACUUM_ERROR * g_z.Q_0) / (g_z.v * y_l)
    return e, y_l


def estimate_em1(g_z: GainSet, diagnostics: list[str] | None = None) -> float:
    """Upper bound on the single-photon monitoring error, clamped to [0, 1/2]."""
    e, _ = estimate_em1_raw(g_z)
    if e < 0:
        if diagnostics is not None:
            diagnostics.append(f"e_m1 {e:.3g} < 0 clamped to 0")
        return 0.0
    if e > 0.5:
        if diagnostics is not None:
            diagnostics.append(f"e_m1 {e:.3g} > 1/2 clamped")
        return 0.5
    return e


def estimate(g_x: GainSet, g_z: GainSet | None = None) -> DecoyEstimates:
    diagnostics: list[str] = []
    delta0, delta1, y_x = estimate_fractions(g_x, diagnostics)
    y_z = e_m1 = None
    if g_z is not None:
        e_m1 = estimate_em1(g_z, diagnostics)
        y_z = yield_lower_bound(g_z)
    return DecoyEstimates(Y_L_x=y_x, delta0=delta0, delta1=delta1, Y_L_z=y_z, e_m1=e_m1,
                          diagnostics=tuple(diagnostics))
