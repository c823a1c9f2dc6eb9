"""Edge test, ratio quadratic and direction residuals on a cumulant profile.

Everything here is a deterministic function of joint cumulants, so the same
code runs on sample estimates and on exact population profiles.

Notation: ``C[i, j]`` is C_{i,j}(X, Y).  When X and Y share two independent
components S1 and S2 with coefficients (a1, a2) and (b1, b2), the ratios
a2/a1 and b2/b1 are the two roots of

    (C[i+2,j+1]^2 - C[i+1,j+2] C[i+3,j]) t^2
    + (C[i,j+3] C[i+3,j] - C[i+1,j+2] C[i+2,j+1]) t
    + C[i+1,j+2]^2 - C[i,j+3] C[i+2,j+1] = 0.
"""

from __future__ import annotations

import math
from collections.abc import Mapping
from dataclasses import dataclass

from cumpair.cumulants import Key
from cumpair.errors import (
    ComplexRoots,
    DegenerateQuadratic,
    DegenerateRoots,
    DivisionNearZero,
    MissingCumulant,
    NegativeUnderRoot,
)

EDGE_KEYS_DEFAULT = (2, 1)
RATIO_KEYS_DEFAULT = (1, 1)
CONFOUNDER_KEYS_DEFAULT = (1, 1)
DIRECTION_KEYS = ((3, 0), (0, 3), (2, 1), (1, 2))

# |a| <= A_TOL * max(|b|, |c|, 1) counts as a == 0.
A_TOL = 1e-8
# Negative discriminants down to -DISC_TOL * (b^2 + |4ac|) are rounding noise.
DISC_TOL = 1e-8
# Relative separation below which two ratios are treated as equal.
RATIO_TOL = 1e-6

Profile = Mapping[Key, float]


def edge_keys(i: int = 2, j: int = 1) -> tuple[Key, ...]:
    return ((i + 1, j + 1), (i, j + 2), (i + 2, j))


def ratio_keys(i: int = 1, j: int = 1) -> tuple[Key, ...]:
    return ((i + 3, j), (i + 2, j + 1), (i + 1, j + 2), (i, j + 3))


def confounder_keys(i: int = 1, j: int = 1) -> tuple[Key, ...]:
    return ((i + 1, j), (i, j + 1), (1, 1))


def _get(profile: Profile, key: Key) -> float:
    try:
        return float(profile[key])
    except KeyError:
        raise MissingCumulant(f"cumulant C_{key} not in profile") from None


@dataclass(frozen=True)
class RatioPair:
    """Unordered pair of mixing-coefficient ratios.

    Which root belongs to which shared component is not identified; every
    consumer below is symmetric in the two.
    """

    theta_a: float
    theta_b: float

    def swapped(self) -> RatioPair:
        return RatioPair(self.theta_b, self.theta_a)

    def as_set(self) -> frozenset[float]:
        return frozenset((self.theta_a, self.theta_b))


@dataclass(frozen=True)
class DirectionResiduals:
    r_x_to_y: float
    r_y_to_x: float
    shared_term_1: float
    shared_term_2: float


@dataclass(frozen=True)
class ConfounderCoefficients:
    """Latent loadings on X and Y, determined only up to a joint sign.

    The positive root is reported for ``alpha1_hat``.
    """

    alpha1_hat: float
    alpha2_hat: float


def ratio_quadratic_coefficients(profile: Profile, i: int = 1, j: int = 1) -> tuple[float, float, float]:
    c30, c21, c12, c03 = (_get(profile, k) for k in ratio_keys(i, j))
    a = c21 * c21 - c12 * c30
    b = c03 * c30 - c12 * c21
    c = c12 * c12 - c03 * c21
    return a, b, c


def solve_ratio_quadratic(a: float, b: float, c: float) -> RatioPair:
    """Both real roots of ``a t^2 + b t + c``, avoiding cancellation.

    Raises
    ------
    DegenerateQuadratic
        ``a`` is zero relative to ``b`` and ``c`` (no-edge regime).
    ComplexRoots
        The discriminant is clearly negative, which no admissible model produces.
    DegenerateRoots
        The roots coincide or one of them is zero.
    """
    if abs(a) <= A_TOL * max(abs(b), abs(c), 1.0):
        raise DegenerateQuadratic(f"leading coefficient {a:.3g} is numerically zero")
    disc = b * b - 4.0 * a * c
    if disc < 0:
        if disc < -DISC_TOL * (b * b + abs(4.0 * a * c)):
            raise ComplexRoots(f"discriminant {disc:.3g} is negative")
        disc = 0.0
    root = math.sqrt(disc)
    if disc == 0.0:
        raise DegenerateRoots("ratio quadratic has a double root")
    q = -0.5 * (b + math.copysign(root, b))
    first = q / a
    second = c / q
    if first == 0.0 or second == 0.0 or not (math.isfinite(first) and math.isfinite(second)):
        raise DegenerateRoots(f"unusable roots ({first}, {second})")
    return RatioPair(first, second)


def edge_statistic(profile: Profile, i: int = 2, j: int = 1) -> float:
    """C[i+1,j+1]^2 - C[i,j+2] C[i+2,j]; zero iff there is no X-Y edge."""
    mid, right, left = (_get(profile, k) for k in edge_keys(i, j))
    return mid * mid - right * left


def shared_third_cumulant_terms(profile: Profile, ratios: RatioPair) -> tuple[float, float]:
    """Third-cumulant contribution of each shared component to X.

    Solves C[2,1] = t1*ta + t2*tb and C[1,2] = t1*ta^2 + t2*tb^2 for (t1, t2).
    """
    c21 = _get(profile, (2, 1))
    c12 = _get(profile, (1, 2))
    ta, tb = ratios.theta_a, ratios.theta_b
    scale = max(abs(ta), abs(tb))
    if abs(ta - tb) <= RATIO_TOL * scale:
        raise DivisionNearZero(f"ratios {ta:.6g} and {tb:.6g} are not distinct")
    if min(abs(ta), abs(tb)) <= RATIO_TOL * scale:
        raise DivisionNearZero(f"ratio too close to zero in ({ta:.6g}, {tb:.6g})")
    term1 = (c12 - tb * c21) / (ta * (ta - tb))
    term2 = (c12 - ta * c21) / (tb * (tb - ta))
    return term1, term2


def direction_residuals(profile: Profile, ratios: RatioPair) -> DirectionResiduals:
    """Third cumulant of each variable minus its shared-component part.

    The residual of the cause is zero; the residual of the effect keeps the
    contribution of its own noise.
    """
    c30 = _get(profile, (3, 0))
    c03 = _get(profile, (0, 3))
    t1, t2 = shared_third_cumulant_terms(profile, ratios)
    ta, tb = ratios.theta_a, ratios.theta_b
    # fsum keeps both residuals bitwise invariant under relabeling the roots.
    r_xy = math.fsum((c30, -t1, -t2))
    r_yx = math.fsum((c03, -(ta**3) * t1, -(tb**3) * t2))
    return DirectionResiduals(r_xy, r_yx, t1, t2)


def estimate_confounder_coefficients(profile: Profile, i: int = 1, j: int = 1) -> ConfounderCoefficients:
    """Loadings of the latent variable when there is no X-Y edge.

    The returned values are the loadings times the latent standard
    deviation; for a unit-variance latent they are the loadings themselves.
    """
    num, den, c11 = (_get(profile, k) for k in confounder_keys(i, j))
    if den == 0.0:
        raise NegativeUnderRoot(f"C_{(i, j + 1)} is zero")
    radicand = num / den * c11
    if not radicand > 0.0:
        raise NegativeUnderRoot(f"radicand {radicand:.6g} is not positive")
    alpha1 = math.sqrt(radicand)
    return ConfounderCoefficients(alpha1, c11 / alpha1)


def ratio_pair(profile: Profile, i: int = 1, j: int = 1) -> RatioPair:
    return solve_ratio_quadratic(*ratio_quadratic_coefficients(profile, i, j))
