"""
Spearman's rho and Kendall's tau of extreme-value copulas.

rho(C_A) = -3 + 12 * int_0^1 (1 + A(t))^-2 dt
tau(C_A) = int_0^1 t(1 - t) / A(t) dA'(t)

For piecewise linear A both are evaluated exactly from the knots; adaptive
quadrature is kept as an independent cross-check and for arbitrary callables.
The scalar maps phi, psi and h below describe the T, L and P families.
"""

from __future__ import annotations

import logging
import math
from enum import Enum

import numpy as np

from errors import DomainError, InvalidPickands, MeasureDisagreement, NoClosedForm
from numerics import QuadratureConfig, find_root, integrate
from pickands import EPS, Family, FamilySpec, PickandsFunction, is_valid, make_family

logger = logging.getLogger(__name__)

# Largest tolerated gap between an exact value and its quadrature cross-check.
DISAGREEMENT_LIMIT = 1e-8


class MeasureKind(str, Enum):
    SPEARMAN_RHO = "rho"
    KENDALL_TAU = "tau"


def check_range(name: str, value, lo: float, hi: float) -> float:
    """Return value clipped to [lo, hi], allowing EPS of slack outside it."""
    if not (isinstance(value, (int, float, np.floating)) and math.isfinite(value)):
        raise DomainError(f"{name} must be a finite real number, got {value!r}.")
    if value < lo - EPS or value > hi + EPS:
        raise DomainError(f"{name}={value!r} is outside [{lo:g}, {hi:g}].")
    return min(max(float(value), lo), hi)


def _require_valid(A: PickandsFunction) -> None:
    report = is_valid(A)
    if not report.valid:
        raise InvalidPickands(report.diagnostic, report.knot_index)


# ==================== MEASURES ====================

def rho(A: PickandsFunction, cfg: QuadratureConfig | None = None) -> float:
    """
    Spearman's rho of C_A, summed exactly over the linear segments.

    On a segment from (t0, a0) to (t1, a1) the antiderivative -1/(m(1 + A))
    gives (t1 - t0) / ((1 + a0)(1 + a1)), which also covers flat segments.
    """
    _require_valid(A)
    ts, vals = A.ts, A.values
    pieces = np.diff(ts) / ((1.0 + vals[:-1]) * (1.0 + vals[1:]))
    return -3.0 + 12.0 * math.fsum(pieces)


def tau(A: PickandsFunction, cfg: QuadratureConfig | None = None) -> float:
    """Kendall's tau of C_A from the point masses of dA' at the interior knots."""
    _require_valid(A)
    ts, vals = A.ts[1:-1], A.values[1:-1]
    jumps = np.diff(A.slopes)
    return math.fsum(ts * (1.0 - ts) / vals * jumps)


def rho_integral(func, cfg: QuadratureConfig | None = None, breakpoints=()) -> float:
    """rho by adaptive quadrature for any callable A on [0, 1]."""
    result = integrate(lambda t: 1.0 / (1.0 + func(t)) ** 2, 0.0, 1.0, breakpoints, cfg)
    return -3.0 + 12.0 * result.value


def tau_quadrature_oracle(A: PickandsFunction, cfg: QuadratureConfig | None = None) -> float:
    """
    tau = 1 - int (1 + (1 - t)A'/A)(1 - tA'/A) dt by quadrature.

    Panels are cut at every knot so A' is constant on each of them.
    """
    _require_valid(A)

    def integrand(t):
        ratio = A.slope_at(t) / A(t)
        return (1.0 + (1.0 - t) * ratio) * (1.0 - t * ratio)

    result = integrate(integrand, 0.0, 1.0, A.ts[1:-1], cfg)
    return 1.0 - result.value


def measure(kind: MeasureKind, A: PickandsFunction, cfg: QuadratureConfig | None = None) -> float:
    return rho(A, cfg) if MeasureKind(kind) is MeasureKind.SPEARMAN_RHO else tau(A, cfg)


# ==================== SCALAR TRANSFORMS ====================

def phi1(y: float) -> float:
    """rho of every T_{x,y}."""
    y = check_range("y", y, 0.5, 1.0)
    return -3.0 + 6.0 / (1.0 + y)


def phi1_inv(r: float) -> float:
    r = check_range("rho", r, 0.0, 1.0)
    return (3.0 - r) / (3.0 + r)


def psi1(y: float) -> float:
    """rho of L_y."""
    y = check_range("y", y, 0.5, 1.0)
    return -3.0 + 12.0 * y * (2.0 - y) / (1.0 + y) ** 2


def psi1_inv(r: float) -> float:
    # root in [1/2, 1] of (15 + r) y^2 + (2r - 18) y + (r + 3) = 0
    r = check_range("rho", r, 0.0, 1.0)
    y = (9.0 - r + 6.0 * math.sqrt(1.0 - r)) / (15.0 + r)
    if 0.5 - EPS <= y <= 1.0 + EPS:
        return min(max(y, 0.5), 1.0)
    logger.warning("psi1_inv(%r): closed form %r left [1/2, 1]; bisecting", r, y)
    return find_root(lambda s: psi1(s) - r, 0.5, 1.0).root


def phi2(y: float) -> float:
    """tau of every T_{x,y}."""
    y = check_range("y", y, 0.5, 1.0)
    return -1.0 + 1.0 / y


def phi2_inv(t: float) -> float:
    t = check_range("tau", t, 0.0, 1.0)
    return 1.0 / (1.0 + t)


def psi2(y: float) -> float:
    """tau of L_y."""
    y = check_range("y", y, 0.5, 1.0)
    return 2.0 * (1.0 - y)


def psi2_inv(t: float) -> float:
    t = check_range("tau", t, 0.0, 1.0)
    return (2.0 - t) / 2.0


def phi_inv(kind: MeasureKind, v: float) -> float:
    return phi1_inv(v) if MeasureKind(kind) is MeasureKind.SPEARMAN_RHO else phi2_inv(v)


def psi_inv(kind: MeasureKind, v: float) -> float:
    return psi1_inv(v) if MeasureKind(kind) is MeasureKind.SPEARMAN_RHO else psi2_inv(v)


# ==================== CLOSED FORMS ====================

def rho_family_closed(spec: FamilySpec) -> float:
    make_family(spec)
    if spec.tag is Family.T:
        return phi1(spec.y)
    if spec.tag is Family.L:
        return psi1(spec.y)
    if spec.tag is Family.P:
        x, y = spec.x, spec.y
        return -3.0 + 12.0 * (1.0 - x + x * y) / ((2.0 - x) * (1.0 + y))
    raise NoClosedForm(f"No closed form for rho of {spec!r}; use rho() on its knots instead.")


def tau_family_closed(spec: FamilySpec) -> float:
    make_family(spec)
    if spec.tag is Family.T:
        return phi2(spec.y)
    if spec.tag is Family.L:
        return psi2(spec.y)
    if spec.tag is Family.P:
        x, y = spec.x, spec.y
        if y - x <= EPS:
            # P_{1/2,1/2} is M
            return 1.0
        # (1 - 3x - y + 4xy) / (y - x), rewritten so nothing cancels near x = y = 1/2
        return 1.0 + (1.0 - 2.0 * x) * (1.0 - 2.0 * y) / (y - x)
    raise NoClosedForm(f"No closed form for tau of {spec!r}; use tau() on its knots instead.")


# ==================== h MAPS ====================
# h_v(y) is the kink abscissa x for which P_{x,y} has measure value v.

def check_target(name: str, value) -> float:
    value = check_range(name, value, 0.0, 1.0)
    if value >= 1.0:
        raise DomainError(f"h is only defined for {name} < 1, got {value!r}.")
    return value


def h_rho(r: float, y: float) -> float:
    r = check_target("rho0", r)
    y = check_range("y", y, phi1_inv(r), 1.0)
    return 2.0 * (-3.0 + r + 3.0 * y + r * y) / (-9.0 + r + 15.0 * y + r * y)


def h_rho_deriv(r: float, y: float) -> float:
    r = check_target("rho0", r)
    y = check_range("y", y, phi1_inv(r), 1.0)
    return 36.0 * (1.0 - r) / (-9.0 + r + 15.0 * y + r * y) ** 2


def h_rho_inv(r: float, x: float) -> float:
    r = check_target("rho0", r)
    x = check_range("x", x, 0.0, 1.0 - phi1_inv(r))
    return (2.0 * (r - 3.0) + x * (9.0 - r)) / (x * (15.0 + r) - 2.0 * (3.0 + r))


def h_tau(t: float, y: float) -> float:
    t = check_target("tau0", t)
    y = check_range("y", y, phi2_inv(t), 1.0)
    return (-1.0 + y + t * y) / (-3.0 + t + 4.0 * y)


def h_tau_deriv(t: float, y: float) -> float:
    t = check_target("tau0", t)
    y = check_range("y", y, phi2_inv(t), 1.0)
    return (1.0 - t) ** 2 / (-3.0 + t + 4.0 * y) ** 2


def h_tau_inv(t: float, x: float) -> float:
    t = check_target("tau0", t)
    x = check_range("x", x, 0.0, 1.0 - phi2_inv(t))
    return (1.0 - x * (3.0 - t)) / (1.0 + t - 4.0 * x)


def h(kind: MeasureKind, v: float, y: float) -> float:
    return h_rho(v, y) if MeasureKind(kind) is MeasureKind.SPEARMAN_RHO else h_tau(v, y)


def h_inv(kind: MeasureKind, v: float, x: float) -> float:
    return h_rho_inv(v, x) if MeasureKind(kind) is MeasureKind.SPEARMAN_RHO else h_tau_inv(v, x)


def h_deriv(kind: MeasureKind, v: float, y: float) -> float:
    return h_rho_deriv(v, y) if MeasureKind(kind) is MeasureKind.SPEARMAN_RHO else h_tau_deriv(v, y)


def h_slope_floor(kind: MeasureKind, v: float) -> float:
    """min of h' over its domain, attained at y = 1; the non-contractivity constant."""
    v = check_target("v", v)
    if MeasureKind(kind) is MeasureKind.SPEARMAN_RHO:
        return 36.0 * (1.0 - v) / (6.0 + 2.0 * v) ** 2
    return ((1.0 - v) / (1.0 + v)) ** 2


def h_array(kind: MeasureKind, v: float, ys) -> np.ndarray:
    """h over an array of y values, without per-element domain checks."""
    ys = np.asarray(ys, dtype=float)
    if MeasureKind(kind) is MeasureKind.SPEARMAN_RHO:
        return 2.0 * (-3.0 + v + 3.0 * ys + v * ys) / (-9.0 + v + 15.0 * ys + v * ys)
    return (-1.0 + ys + v * ys) / (-3.0 + v + 4.0 * ys)


# ==================== REPORTING ====================

def measure_report(A: PickandsFunction, cfg: QuadratureConfig | None = None) -> dict:
    """
    Both measures of C_A with the method used and the achieved tolerance.

    Family members with a closed form are cross-checked against the exact knot
    evaluation; everything else is cross-checked against quadrature. The
    tolerance reported is the worst residual of that cross-check.

    Raises:
        MeasureDisagreement: If the cross-check differs by more than 1e-8
    """
    rho_exact, tau_exact = rho(A, cfg), tau(A, cfg)
    spec = A.family
    if spec is not None and spec.tag in (Family.T, Family.L, Family.P):
        rho_value, tau_value = rho_family_closed(spec), tau_family_closed(spec)
        residual = max(abs(rho_value - rho_exact), abs(tau_value - tau_exact))
        method = "closed-form"
    else:
        rho_value, tau_value = rho_exact, tau_exact
        residual = max(abs(tau_exact - tau_quadrature_oracle(A, cfg)),
                       abs(rho_exact - rho_integral(A, cfg, A.ts[1:-1])))
        method = "stieltjes"
    if residual > DISAGREEMENT_LIMIT:
        raise MeasureDisagreement(
            f"Cross-check for {A!r} disagrees by {residual:.3e} (> {DISAGREEMENT_LIMIT:g}).")
    logger.debug("measure_report %r: method=%s residual=%.3e", A, method, residual)
    return {"rho": rho_value, "tau": tau_value, "method": method, "tolerance": residual}
