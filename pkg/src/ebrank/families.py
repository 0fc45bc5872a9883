"""Closed-form Weyl-covariant rank-one Kraus families for d = 2 and d = 3.

For t in [0, 1/(d+1)] the functions here produce unit vectors x(t), y(t) with

    Phi_t(X) = (1/d) sum_{i,j} (W_ij x)(W_ij y)^* X (W_ij y)(W_ij x)^*,

where Phi_t = t id + (1 - t) Psi_d.  At t = 1/(d+1) both reduce to a SIC
fiducial vector.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .channel import KrausChannel, choi, choi_distance, depolarizing_choi
from .weyl import covariant_channel

D2_T_MAX = 1 / 3
D3_T_MAX = 1 / 4
_EDGE = 1e-12


def _check_range(t: float, t_max: float) -> float:
    t = float(t)
    if not (-_EDGE <= t <= t_max + _EDGE):
        raise ValueError(f"t={t!r} outside [0, {t_max}]")
    return min(max(t, 0.0), t_max)


def _sqrt_nonneg(x: float, what: str) -> float:
    if x < 0:
        if x < -1e-12:
            raise ValueError(f"negative radicand in {what}: {x!r}")
        return 0.0
    return math.sqrt(x)


# ----------------------------------------------------------------------------
# d = 2
# ----------------------------------------------------------------------------

THETA = math.pi / 4
THETA1 = 0.0
THETA2 = math.pi / 4
THETA_ALT = 5 * math.pi / 4


@dataclass(frozen=True)
class DimTwoParams:
    t: float
    a: float
    b: float
    r: float
    s: float
    theta: float = THETA
    theta1: float = THETA1
    theta2: float = THETA2


def d2_ab(t: float) -> tuple[float, float]:
    t = _check_range(t, D2_T_MAX)
    p = math.sqrt((1 + 3 * t) / 2)
    q = math.sqrt((1 - t) / 2)
    return (p + q) / 2, (p - q) / 2


def d2_rs(a: float, b: float) -> tuple[float, float]:
    """Invert a = r s, b = sqrt((1 - r^2)(1 - s^2))."""
    hi = _sqrt_nonneg((1 + a) ** 2 - b * b, "(1+a)^2 - b^2")
    lo = _sqrt_nonneg((1 - a) ** 2 - b * b, "(1-a)^2 - b^2")
    return (hi + lo) / 2, (hi - lo) / 2


def d2_params(t: float, alternate: bool = False) -> DimTwoParams:
    t = _check_range(t, D2_T_MAX)
    a, b = d2_ab(t)
    r2c, s2c = _d2_complements(t)
    r, s = math.sqrt(1 - r2c), math.sqrt(1 - s2c)
    if alternate:
        # second fiducial branch: theta and theta2 move together
        return DimTwoParams(t, a, b, r, s, THETA_ALT, THETA1, THETA_ALT)
    return DimTwoParams(t, a, b, r, s)


def _d2_complements(t: float) -> tuple[float, float]:
    """(1 - r^2, 1 - s^2) without cancellation.

    They are the roots of X^2 - m X + b^2 with m = 1 - a^2 + b^2, and the
    discriminant factors as (1 - 3t)(1 + t)/4.  Evaluating r, s through the
    radicals of d2_rs instead loses half the digits at t = 0 and t = 1/3, where
    one radicand vanishes.
    """
    p = math.sqrt((1 + 3 * t) / 2)
    q = math.sqrt((1 - t) / 2)
    b = (p - q) / 2
    m = 1 - p * q
    disc = math.sqrt(max((1 - 3 * t) * (1 + t), 0.0)) / 2
    return 2 * b * b / (m + disc), (m + disc) / 2


def d2_xy(t: float, alternate: bool = False) -> tuple[np.ndarray, np.ndarray]:
    """Unit vectors x = (r, sqrt(1-r^2) e^{i theta}), y = (s e^{i theta1}, sqrt(1-s^2) e^{i theta2}).

    ``alternate=True`` selects theta = theta2 = 5 pi / 4, whose endpoint is the
    other standard qubit fiducial.
    """
    p = d2_params(t, alternate)
    r2c, s2c = _d2_complements(p.t)
    x = np.array([p.r, math.sqrt(r2c) * np.exp(1j * p.theta)])
    y = np.array([p.s * np.exp(1j * p.theta1), math.sqrt(s2c) * np.exp(1j * p.theta2)])
    return x, y


def d2_equation_residuals(t: float, alternate: bool = False) -> dict[str, float]:
    """Residuals of the identities a = rs, b^2 = (1-r^2)(1-s^2) and the three covariance equations."""
    p = d2_params(t, alternate)
    a, b = p.a, p.b
    return {
        "a_eq_rs": abs(a - p.r * p.s),
        "b2_eq": abs(b * b - (1 - p.r ** 2) * (1 - p.s ** 2)),
        "sum_squares": abs((1 + p.t) / 2 - (a * a + b * b)),
        "cos_plus": abs(p.t - 2 * a * b * math.cos(p.theta + p.theta1 - p.theta2)),
        "cos_minus": abs(2 * a * b * math.cos(p.theta - p.theta1 + p.theta2)),
    }


def d2_family_channel(t: float, alternate: bool = False) -> KrausChannel:
    return covariant_channel(*d2_xy(t, alternate))


def d2_choi_distance(t: float, alternate: bool = False) -> float:
    return choi_distance(d2_family_channel(t, alternate), depolarizing_choi(2, t))


def d2_family_check(t: float, tol: float = 1e-9, alternate: bool = False) -> bool:
    return d2_choi_distance(t, alternate) <= tol


# ----------------------------------------------------------------------------
# d = 3
# ----------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class DimThreeParams:
    t: float
    alpha: float
    rho: float
    lam: float
    beta: float
    u: np.ndarray
    v: np.ndarray


def d3_rho(t: float) -> float:
    """rho(t) = (1 + 2t - S)/(1 - 4t), S = sqrt(1 + 7t - 8t^2), in rationalized form.

    Multiplying through by (1 + 2t + S) gives -3t / (1 + 2t + S), which has
    no 0/0 at t = 1/4 (where rho = -1/4) and no cancellation nearby.
    """
    t = _check_range(t, D3_T_MAX)
    root = math.sqrt(1 + 7 * t - 8 * t * t)
    return -3 * t / (1 + 2 * t + root)


def d3_scalars(t: float) -> DimThreeParams:
    t = _check_range(t, D3_T_MAX)
    root = math.sqrt(1 + 7 * t - 8 * t * t)
    alpha = math.sqrt((5 + 4 * t + 4 * root) / 81)
    rho = d3_rho(t)
    lam = (-1 + _sqrt_nonneg(1 + 4 * rho, "1+4 rho")) / 2
    beta = -alpha * (lam + 1)
    u = np.array([1.0, lam, lam], dtype=complex)
    v = np.array([alpha, beta, beta], dtype=complex)
    return DimThreeParams(t, alpha, rho, lam, beta, u, v)


def d3_xy(t: float) -> tuple[np.ndarray, np.ndarray]:
    """x = sqrt(3) ||v|| u, y = v / ||v||."""
    p = d3_scalars(t)
    nv = np.linalg.norm(p.v)
    return math.sqrt(3) * nv * p.u, p.v / nv


def d3_norm_identity_residuals(t: float) -> dict[str, float]:
    """Deviations of 3 a^2 (1+2l^2)(2l^2+4l+3) and 3 a^2 (4r^2+4r+3) from 1, and of l(l+1) from rho."""
    p = d3_scalars(t)
    a2, lam, rho = p.alpha ** 2, p.lam, p.rho
    return {
        "lambda_form": abs(3 * a2 * (1 + 2 * lam ** 2) * (2 * lam ** 2 + 4 * lam + 3) - 1),
        "rho_form": abs(3 * a2 * (4 * rho ** 2 + 4 * rho + 3) - 1),
        "lambda_quadratic": abs(lam * (lam + 1) - rho),
    }


def d3_family_channel(t: float) -> KrausChannel:
    return covariant_channel(*d3_xy(t))


def d3_choi_distance(t: float) -> float:
    return choi_distance(d3_family_channel(t), depolarizing_choi(3, t))


def d3_family_check(t: float, tol: float = 1e-9) -> bool:
    return d3_choi_distance(t) <= tol


def family_xy(d: int, t: float) -> tuple[np.ndarray, np.ndarray]:
    if d == 2:
        return d2_xy(t)
    if d == 3:
        return d3_xy(t)
    raise ValueError(f"closed-form families exist only for d in (2, 3), got {d}")


def family_channel(d: int, t: float) -> KrausChannel:
    return covariant_channel(*family_xy(d, t))


def family_choi_distance(d: int, t: float) -> float:
    return float(np.linalg.norm(choi(family_channel(d, t)).matrix - depolarizing_choi(d, t).matrix))
