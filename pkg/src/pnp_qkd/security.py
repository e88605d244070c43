"""Asymptotic security analysis under collective attacks.

Contents: binary entropy, the Alice-Bob mutual information with an imperfect
reconciliation code, Eve's information with weak coherent pulses, the Gram
matrix of Eve's joint state and its closed-form spectrum, the Holevo quantity
of an explicit attack, and the Devetak-Winter secure key rate.

Eve's forward-channel attack is described by four (unnormalised) ancilla
vectors::

    U|0>|e> = |0>|e00> + |1>|e01>
    U|1>|e> = |0>|e10> + |1>|e11>

stored row-wise in an :class:`AncillaRealization`.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

UNITARITY_TOL = 1e-9
_DOMAIN_TOL = 1e-12


def binary_entropy(x):
    """``h(x) = -x log2 x - (1-x) log2 (1-x)`` with ``h(0) = h(1) = 0``.

    Accepts scalars or arrays; raises ``ValueError`` outside ``[0, 1]``.
    """
    arr = np.asarray(x, dtype=float)
    if np.any(arr < -_DOMAIN_TOL) or np.any(arr > 1 + _DOMAIN_TOL) or np.any(np.isnan(arr)):
        raise ValueError(f"binary_entropy needs 0 <= x <= 1, got {x!r}")
    arr = np.clip(arr, 0.0, 1.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = -arr * np.log2(arr) - (1 - arr) * np.log2(1 - arr)
    out = np.where((arr == 0) | (arr == 1), 0.0, terms)
    return float(out) if out.ndim == 0 else out


def von_neumann_entropy(eigenvalues, cutoff: float = 1e-15) -> float:
    """Entropy in bits of a spectrum; eigenvalues below ``cutoff`` contribute 0."""
    lam = np.asarray(eigenvalues, dtype=float)
    lam = lam[lam > cutoff]
    return float(-np.sum(lam * np.log2(lam)))


def mutual_info_ab(Q: float, f: float, e: float) -> float:
    """Reconciled information per window, ``Q * (1 - f * h(e))``."""
    _check_prob(Q, "Q")
    if f < 1:
        raise ValueError(f"reconciliation efficiency f must be >= 1, got {f}")
    return Q * (1.0 - f * binary_entropy(e))


def eve_info(Q: float, delta1: float, delta0: float, ie1: float) -> float:
    """Eve's information per window: single photons leak ``ie1``, multi-photon events leak everything."""
    return Q * (delta1 * ie1 + 1.0 - delta1 - delta0)


def eve_info_single_photon_bound(e_m1: float) -> float:
    """Upper bound on Eve's information per single-photon key bit, ``h(e_m1)``."""
    _check_prob(e_m1, "e_m1")
    if e_m1 > 0.5 + _DOMAIN_TOL:
        raise ValueError(f"e_m1 = {e_m1} > 1/2: monitoring error too high, abort")
    return binary_entropy(e_m1)


# --------------------------------------------------------------------------- attacks


@dataclass(frozen=True)
class EveOverlaps:
    eps01_norm: float
    eps10_norm: float
    delta: complex

    def __post_init__(self):
        for name in ("eps01_norm", "eps10_norm"):
            val = getattr(self, name)
            if not -UNITARITY_TOL <= val <= 1 + UNITARITY_TOL:
                raise ValueError(f"{name} must lie in [0, 1], got {val}")
        bound = (1 - self.eps01_norm) * self.eps10_norm
        if abs(self.delta) ** 2 > bound + UNITARITY_TOL:
            raise ValueError(f"|delta|^2 = {abs(self.delta) ** 2} violates Cauchy-Schwarz bound {bound}")

    @property
    def alpha(self) -> float:
        return 0.5 - self.eps01_norm

    @property
    def beta(self) -> float:
        return self.eps10_norm - 0.5

    @property
    def gamma1(self) -> float:
        return self.alpha + self.beta

    @property
    def gamma2(self) -> float:
        return math.sqrt((self.alpha - self.beta) ** 2 + 4 * abs(self.delta) ** 2)

    @property
    def mean_z_error(self) -> float:
        """Z-basis error averaged over Bob's two monitoring states."""
        return 0.5 * (self.eps01_norm + self.eps10_norm)


@dataclass(frozen=True)
class AncillaRealization:
    """Concrete ancilla vectors ``e00, e01, e10, e11`` as rows of a ``(4, d)`` array."""

    vectors: np.ndarray

    def __post_init__(self):
        vec = np.asarray(self.vectors, dtype=complex)
        if vec.ndim != 2 or vec.shape[0] != 4:
            raise ValueError("ancilla realization must have shape (4, d)")
        object.__setattr__(self, "vectors", vec)
        e00, e01, e10, e11 = vec
        checks = {
            "<e00|e00> + <e01|e01> = 1": np.vdot(e00, e00) + np.vdot(e01, e01) - 1,
            "<e10|e10> + <e11|e11> = 1": np.vdot(e10, e10) + np.vdot(e11, e11) - 1,
            "<e00|e10> + <e01|e11> = 0": np.vdot(e00, e10) + np.vdot(e01, e11),
        }
        for name, resid in checks.items():
            if abs(resid) > UNITARITY_TOL:
                raise ValueError(f"unitarity violated: {name} (residual {abs(resid):.3g})")

    @property
    def dim(self) -> int:
        return self.vectors.shape[1]

    def overlaps(self) -> EveOverlaps:
        e00, e01, e10, _ = self.vectors
        return EveOverlaps(
            eps01_norm=float(np.vdot(e01, e01).real),
            eps10_norm=float(np.vdot(e10, e10).real),
            delta=complex(np.vdot(e00, e10)),
        )

    def joint_state(self, amplitudes) -> np.ndarray:
        """``U (a|0> + b|1>)|e>`` as a ``(2, d)`` array indexed ``[qubit, ancilla]``."""
        a, b = amplitudes
        e00, e01, e10, e11 = self.vectors
        return np.stack([a * e00 + b * e10, a * e01 + b * e11])

    def phi_vectors(self) -> np.ndarray:
        """The four joint states ``U|0>, U|1>, sZ U|0>, sZ U|1>`` flattened, shape ``(4, 2d)``."""
        e00, e01, e10, e11 = self.vectors
        return np.stack([
            np.concatenate([e00, e01]),
            np.concatenate([e10, e11]),
            np.concatenate([e00, -e01]),
            np.concatenate([e10, -e11]),
        ])


def gram_matrix(realization: AncillaRealization) -> np.ndarray:
    """``G_ij = <phi_i|phi_j> / 4``; same spectrum as Eve's averaged joint state."""
    phi = realization.phi_vectors()
    return (phi.conj() @ phi.T) / 4.0


def gram_eigenvalues_closed_form(ov: EveOverlaps) -> np.ndarray:
    """``(1 +- gamma1 +- gamma2) / 4``, sorted ascending."""
    g1, g2 = ov.gamma1, ov.gamma2
    lam = np.array([1 + g1 + g2, 1 + g1 - g2, 1 - g1 + g2, 1 - g1 - g2]) / 4.0
    return np.sort(lam)


def holevo_from_attack(ov: EveOverlaps) -> float:
    """Holevo quantity ``S(rho_AE) - 1`` of an explicit collective attack.

    The conditional states ``rho_0``, ``rho_1`` each carry one bit of entropy
    because Bob's input averages to the maximally mixed state.
    """
    lam = gram_eigenvalues_closed_form(ov)
    if lam.min() < -1e-12:
        raise ValueError(f"overlaps give a negative eigenvalue {lam.min():.3g}")
    return von_neumann_entropy(np.clip(lam, 0.0, None)) - 1.0


def sample_ancilla_realization(rng: np.random.Generator, ancilla_dim: int = 4,
                               symmetric: bool = True) -> AncillaRealization:
    """Draw a physical attack from a Haar-random unitary on qubit x ancilla.

    With ``symmetric=True`` the attack is symmetrised with a one-bit coin: Eve
    applies ``U`` or ``X U X`` and keeps the coin in her ancilla, which doubles
    the ancilla dimension and equalises the two Z-basis error probabilities.
    Only for such attacks does the monitored single-photon error equal
    ``<e01|e01>``.
    """
    from scipy.stats import unitary_group

    u = unitary_group.rvs(2 * ancilla_dim, random_state=rng)
    # column x*d is U|x>|0>; rows are ordered (qubit, ancilla)
    col0 = u[:, 0].reshape(2, ancilla_dim)
    col1 = u[:, ancilla_dim].reshape(2, ancilla_dim)
    e00, e01 = col0
    e10, e11 = col1
    if symmetric:
        s = math.sqrt(0.5)
        e00, e01, e10, e11 = (
            s * np.concatenate([e00, e11]),
            s * np.concatenate([e01, e10]),
            s * np.concatenate([e10, e01]),
            s * np.concatenate([e11, e00]),
        )
    return AncillaRealization(np.stack([e00, e01, e10, e11]))


def identity_attack(ancilla_dim: int = 1) -> AncillaRealization:
    """Eve does nothing: ``e00 = e11 = |e>`` and ``e01 = e10 = 0``."""
    vec = np.zeros((4, ancilla_dim), dtype=complex)
    vec[0, 0] = 1.0
    vec[3, 0] = 1.0
    return AncillaRealization(vec)


# --------------------------------------------------------------------------- key rate


@dataclass(frozen=True)
class SecurityInputs:
    Q: float
    delta1: float
    delta0: float
    e_m1: float
    e: float
    f: float = 1.2

    def __post_init__(self):
        for name in ("Q", "delta1", "delta0", "e_m1", "e"):
            _check_prob(getattr(self, name), name)
        if self.delta0 + self.delta1 > 1 + _DOMAIN_TOL:
            raise ValueError(f"delta0 + delta1 = {self.delta0 + self.delta1} > 1")
        if self.f < 1:
            raise ValueError(f"f must be >= 1, got {self.f}")


@dataclass(frozen=True)
class SecurityReport:
    inputs: SecurityInputs
    I_AB: float
    I_E: float
    I_E1: float
    h_e: float
    h_e_m1: float
    skr_raw: float
    gram_eigenvalues: tuple[float, ...] | None = None
    notes: tuple[str, ...] = field(default_factory=tuple)

    @property
    def skr(self) -> float:
        return max(self.skr_raw, 0.0)

    def as_flat_dict(self) -> dict[str, float | str]:
        out: dict[str, float | str] = {
            "Q": self.inputs.Q,
            "delta1": self.inputs.delta1,
            "delta0": self.inputs.delta0,
            "e_m1": self.inputs.e_m1,
            "e": self.inputs.e,
            "f": self.inputs.f,
            "I_AB": self.I_AB,
            "I_E": self.I_E,
            "I_E1": self.I_E1,
            "h_e": self.h_e,
            "h_e_m1": self.h_e_m1,
            "skr_raw": self.skr_raw,
            "skr": self.skr,
        }
        if self.gram_eigenvalues is not None:
            for i, lam in enumerate(self.gram_eigenvalues):
                out[f"gram_lambda{i + 1}"] = lam
        if self.notes:
            out["notes"] = "; ".join(self.notes)
        return out


def secure_key_rate(inputs: SecurityInputs, attack: EveOverlaps | None = None) -> SecurityReport:
    """``R = Q [delta1 (1 - h(e_m1)) + delta0 - f h(e)]`` with its ``I_AB - I_E`` split.

    A monitoring error above 1/2 is treated as total single-photon leakage
    (``I_E1 = 1``) and noted in the report instead of raising, so that a
    session under heavy attack still yields a (zero) rate.
    """
    notes: list[str] = []
    if inputs.e_m1 > 0.5:
        ie1 = 1.0
        notes.append("e_m1 > 1/2: single photons treated as fully leaked")
    else:
        ie1 = eve_info_single_photon_bound(inputs.e_m1)
    i_ab = mutual_info_ab(inputs.Q, inputs.f, inputs.e)
    i_e = eve_info(inputs.Q, inputs.delta1, inputs.delta0, ie1)
    h_e = binary_entropy(inputs.e)
    # direct form of the rate; equals i_ab - i_e algebraically
    raw = inputs.Q * (inputs.delta1 - inputs.delta1 * ie1 + inputs.delta0 - inputs.f * h_e)
    eig = tuple(gram_eigenvalues_closed_form(attack)) if attack is not None else None
    if raw <= 0:
        notes.append("no positive key rate")
    return SecurityReport(
        inputs=inputs, I_AB=i_ab, I_E=i_e, I_E1=ie1, h_e=h_e,
        h_e_m1=binary_entropy(inputs.e_m1), skr_raw=raw,
        gram_eigenvalues=eig, notes=tuple(notes),
    )


def _check_prob(value: float, name: str) -> None:
    if not (-_DOMAIN_TOL <= value <= 1 + _DOMAIN_TOL):
        raise ValueError(f"{name} must lie in [0, 1], got {value}")
