"""Independent reference computations used by the tests.

These deliberately avoid the package's own helpers: plain ``math`` sums,
exact fractions and explicit enumeration.
"""
import math
from fractions import Fraction


def h2(x: float) -> float:
    if x in (0.0, 1.0):
        return 0.0
    return -x * math.log(x, 2) - (1 - x) * math.log(1 - x, 2)


def poisson_gain(mu: float, eta: float, y0: float, n_max: int = 50) -> tuple[float, list[float]]:
    """Gain and per-photon-number contributions by explicit Poisson summation."""
    parts = []
    p = math.exp(-mu)
    for n in range(n_max + 1):
        if n:
            p *= mu / n
        yn = 1 - (1 - y0) * (1 - eta) ** n
        parts.append(p * yn)
    return sum(parts), parts


def table2_rate(Q, d1, d0, em1, e, f):
    return Q * (d1 - d1 * h2(em1) + d0 - f * h2(e))


def intercept_resend_x_tree() -> tuple[Fraction, Fraction]:
    """Exact (monitor error, X error) of the passive X analyzer by enumerating branches.

    Eve: central slot (X measurement) w.p. 1/2 else side slot (Z measurement).
    Resends the eigenstate she found. Z monitor checks Bob's Z states; X error
    compares Bob's X outcome (relative to his phase state) after Alice's encoding.
    """
    half = Fraction(1, 2)
    # Born probabilities between basis states: same basis -> 0/1, mixed -> 1/2
    def p(outcome, state_basis, state_bit, meas_basis):
        if state_basis == meas_basis:
            return Fraction(int(outcome == state_bit))
        return half

    def error(prep_basis):
        err = Fraction(0)
        for bit in (0, 1):
            for eve_basis in ("Z", "X"):
                for eve_out in (0, 1):
                    w = half * half * p(eve_out, prep_basis, bit, eve_basis)
                    # resent eigenstate measured in the preparation basis; the
                    # encoding is a relabelling on both sides and drops out
                    err += w * p(1 - bit, eve_basis, eve_out, prep_basis)
        return err

    return error("Z"), error("X")
