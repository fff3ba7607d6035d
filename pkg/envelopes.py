"""
Sharp pointwise bounds on Pickands functions with a prescribed rho or tau.

For a target value v the graphs of all A with measure(C_A) = v fill the band

    L_{phi^-1(v)}(t) <= y <= U_v(t)

The lower edge is an L-family member. The upper edge is the envelope of the
constant-value family P_{h_v(y), y}: a tent for tau, and for rho a curve made of
two P segments joined by the smooth middle piece S. Every point of the band is
attained, either by a tent T_{x, phi^-1(v)} or by a member of the P family.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np

from errors import DomainError, PointOutsideRegion, UnattainablePoint, WitnessNotFound
from measures import (MeasureKind, check_range, check_target, h_array, h_rho, measure,
                      phi1_inv, phi_inv)
from numerics import find_root, scan_brackets
from pickands import (EPS, Family, FamilySpec, PickandsFunction, comonotone,
                      convex_combination, independence, is_valid, make_family,
                      p_family_values)

logger = logging.getLogger(__name__)

# Region membership slack.
BOUNDARY_TOL = 1e-12
# Certificate every witness has to pass.
WITNESS_TOL = 1e-9
# Height residual accepted from the closed-form tent solution.
TENT_TOL = 1e-11


# ==================== BOUNDS ====================

def lower_bound(kind: MeasureKind, v: float, t: float) -> float:
    """L_{y0}(t) = max(1 - t, y0, t) with y0 = phi^-1(v)."""
    v = check_range("v", v, 0.0, 1.0)
    t = check_range("t", t, 0.0, 1.0)
    y0 = phi_inv(kind, v)
    return max(1.0 - t, y0, t)


def rho_breakpoints(r: float) -> tuple[float, float]:
    return (3.0 - r) / (6.0 + r), (3.0 + 2.0 * r) / (6.0 + r)


def _s_middle(r, t):
    # S_r(t); the radicand only dips below zero by rounding at the breakpoints
    radicand = max(6.0 - 2.0 * r - (15.0 + r) * t * (1.0 - t), 0.0)
    return (9.0 - r + 4.0 * math.sqrt(radicand)) / (15.0 + r)


def upper_envelope_rho(r: float, t: float) -> float:
    """
    U_r(t), the upper envelope of (P_{h_r(y), y}) over y in [phi1^-1(r), 1].

    P_{0, y1} up to (3 - r)/(6 + r), S_r up to (3 + 2r)/(6 + r), and the mirror
    image P_{1 - y1, 1} after that, where y1 = phi1^-1(r).
    """
    r = check_range("rho0", r, 0.0, 1.0)
    t = check_range("t", t, 0.0, 1.0)
    if r == 0.0:
        return 1.0
    if r == 1.0:
        return max(t, 1.0 - t)
    y1 = phi1_inv(r)
    left, right = rho_breakpoints(r)
    if t < left:
        return 1.0 - t * (1.0 - y1) / y1
    if t > right:
        return 1.0 - (1.0 - t) * (1.0 - y1) / y1
    return _s_middle(r, t)


def upper_envelope_tau(tau0: float, t: float) -> float:
    """U_tau0 = T_{1/2, 1 - tau0/2}, i.e. 1 - tau0 * min(t, 1 - t)."""
    tau0 = check_range("tau0", tau0, 0.0, 1.0)
    t = check_range("t", t, 0.0, 1.0)
    return 1.0 - tau0 * min(t, 1.0 - t)


def upper_envelope(kind: MeasureKind, v: float, t: float) -> float:
    if MeasureKind(kind) is MeasureKind.SPEARMAN_RHO:
        return upper_envelope_rho(v, t)
    return upper_envelope_tau(v, t)


@dataclass(frozen=True)
class Region:
    """
    The band Omega_v of all graphs of Pickands functions with measure value v.

    Attributes:
        kind: Which measure the band belongs to
        v: Target value in [0, 1]
    """

    kind: MeasureKind
    v: float

    def lower(self, t: float) -> float:
        return lower_bound(self.kind, self.v, t)

    def upper(self, t: float) -> float:
        return upper_envelope(self.kind, self.v, t)

    def contains(self, t: float, y: float) -> bool:
        return region_contains(self, t, y)

    def __repr__(self):
        return f"Region({self.kind.value}, v={self.v:g})"


def make_region(kind: MeasureKind, v: float) -> Region:
    return Region(MeasureKind(kind), check_range("v", v, 0.0, 1.0))


def region_contains(region: Region, t: float, y: float) -> bool:
    """lower(t) <= y <= upper(t), boundary included up to 1e-12."""
    if not (0.0 <= t <= 1.0 and 0.5 - BOUNDARY_TOL <= y <= 1.0 + BOUNDARY_TOL):
        return False
    return region.lower(t) - BOUNDARY_TOL <= y <= region.upper(t) + BOUNDARY_TOL


# ==================== MIDDLE PIECE ====================

def _g_parts(r, t, y):
    num = (3 * t + r * t + 3 * y - 3 * r * y - 18 * t * y + 2 * r * t * y
           + 3 * y ** 2 - 3 * r * y ** 2 + 15 * t * y ** 2 + r * t * y ** 2)
    den = 6 - 2 * r - 15 * y - r * y + 15 * y ** 2 + r * y ** 2
    return num, den


def _check_g_args(r, t, y):
    r = check_target("rho0", r)
    y = check_range("y", y, phi1_inv(r), 1.0)
    t = check_range("t", t, h_rho(r, y), y)
    return r, t, y


def g_fun(r: float, t: float, y: float) -> float:
    """g_{r,t}(y) = P_{h_r(y), y}(t) on the middle segment t in [h_r(y), y]."""
    r, t, y = _check_g_args(r, t, y)
    num, den = _g_parts(r, t, y)
    return num / den


def g_deriv(r: float, t: float, y: float) -> float:
    r, t, y = _check_g_args(r, t, y)
    num, den = _g_parts(r, t, y)
    num_y = 3 - 3 * r - 18 * t + 2 * r * t + 6 * y - 6 * r * y + 30 * t * y + 2 * r * t * y
    den_y = -15 - r + 30 * y + 2 * r * y
    return num_y / den - den_y * num / den ** 2


def y_star(r: float, t: float) -> float:
    """
    Maximiser of y -> g_{r,t}(y), defined for t in [(3 - r)/(6 + r), (3 + 2r)/(6 + r)].

    Maps that interval increasingly onto [phi1^-1(r), 1]; t_of_y is its inverse.
    """
    r = check_target("rho0", r)
    left, right = rho_breakpoints(r)
    t = check_range("t", t, left, right)
    radicand = max(6.0 - 2.0 * r - (15.0 + r) * t * (1.0 - t), 0.0)
    y = (-6.0 + 2.0 * r - 15.0 * t - r * t - 6.0 * math.sqrt(radicand)) / (-30.0 - 2.0 * r + 15.0 * t + r * t)
    return min(max(y, phi1_inv(r)), 1.0)


def t_of_y(r: float, y0: float) -> float:
    r = check_target("rho0", r)
    y0 = check_range("y0", y0, phi1_inv(r), 1.0)
    num = -3.0 + r - 6.0 * y0 + 2.0 * r * y0 + 15.0 * y0 ** 2 + r * y0 ** 2
    den = -21.0 + r + 30.0 * y0 + 2.0 * r * y0 + 15.0 * y0 ** 2 + r * y0 ** 2
    return 2.0 * num / den


# ==================== TABLES AND ORACLES ====================

def boundary_curves(kind: MeasureKind, v: float, n: int) -> np.ndarray:
    """(n, 3) array of rows (t, lower, upper) on an even grid of [0, 1]."""
    if isinstance(n, bool) or not isinstance(n, (int, np.integer)) or n < 2:
        raise DomainError(f"boundary_curves needs an integer n >= 2, got {n!r}.")
    region = make_region(kind, v)
    ts = np.linspace(0.0, 1.0, int(n))
    rows = [(t, region.lower(t), region.upper(t)) for t in ts.tolist()]
    return np.array(rows, dtype=float)


def envelope_oracle(kind: MeasureKind, v: float, t_grid, n_y: int = 10_000) -> np.ndarray:
    """Brute-force max over P_{h_v(y), y}(t) for y on an n_y-point grid of [phi^-1(v), 1]."""
    v = check_range("v", v, 0.0, 1.0)
    ts = np.asarray(t_grid, dtype=float)
    if v == 1.0:
        return np.maximum(ts, 1.0 - ts)
    ys = np.linspace(phi_inv(kind, v), 1.0, n_y)
    xs = np.clip(h_array(kind, v, ys), 0.0, 0.5)
    values = p_family_values(xs[:, None], ys[:, None], ts[None, :])
    return values.max(axis=0)


def calibrate(A0: PickandsFunction, kind: MeasureKind, v: float, cfg=None) -> PickandsFunction:
    """
    Move A0 along a straight path inside the Pickands class until its measure is v.

    If measure(A0) >= v the path runs towards A = 1 (value 0), otherwise
    towards M (value 1). The measure is monotone along either path.
    """
    v = check_range("v", v, 0.0, 1.0)
    if v == 0.0:
        return independence()
    if v == 1.0:
        return comonotone()
    m0 = measure(kind, A0, cfg)
    if abs(m0 - v) <= 1e-13:
        return A0
    if m0 >= v:
        def path(theta):
            return convex_combination(A0, independence(), theta)
    else:
        def path(theta):
            return convex_combination(comonotone(), A0, theta)

    def f(theta):
        return measure(kind, path(theta), cfg) - v

    brackets = scan_brackets(f, 0.0, 1.0)
    result = find_root(f, *brackets[0])
    logger.debug("calibrate %s=%g: measure(A0)=%.6g, theta=%.15g after %d iterations",
                 kind.value, v, m0, result.root, result.iterations)
    return path(result.root)


def sample_region_point(region: Region, rng: np.random.Generator) -> tuple[float, float]:
    """Uniform t, then y uniform between the two edges of the band at t."""
    t = float(rng.uniform(0.0, 1.0))
    lo, hi = region.lower(t), region.upper(t)
    return t, (float(rng.uniform(lo, hi)) if hi > lo else lo)


# ==================== WITNESSES ====================

@dataclass(frozen=True)
class Witness:
    """
    A Pickands function certified to have measure v and pass through (t, y).

    Attributes:
        function: The witnessing Pickands function
        kind: Measure the target refers to
        v: Target measure value
        point: Requested point (t, y)
        achieved_value: measure(kind, function)
        achieved_height: function(t)
    """

    function: PickandsFunction
    kind: MeasureKind
    v: float
    point: tuple
    achieved_value: float
    achieved_height: float

    def to_json(self) -> dict:
        t, y = self.point
        out = {"knots": [[a, b] for a, b in self.function.knots],
               "measure": self.kind.value, "v": self.v, "t": t, "y": y,
               "achieved_value": self.achieved_value,
               "achieved_height": self.achieved_height}
        if self.function.family is not None:
            out["construction"] = repr(self.function.family)
        return out


def _tent_witness(t, y, y0):
    """T_{x, y0} through (t, y), or None when no apex x in [1 - y0, y0] works."""
    if t <= EPS or t >= 1.0 - EPS:
        if abs(y - 1.0) <= TENT_TOL:
            return make_family(FamilySpec(Family.T, y=y0, x=0.5))
        return None
    if y >= 1.0:
        return None
    candidates = [t * (1.0 - y0) / (1.0 - y), 1.0 - (1.0 - t) * (1.0 - y0) / (1.0 - y)]
    for x in candidates:
        x = min(max(x, 1.0 - y0), y0)
        A = make_family(FamilySpec(Family.T, y=y0, x=x))
        if abs(A(t) - y) <= TENT_TOL:
            return A
    return None


def _p_member(r, s):
    return make_family(FamilySpec(Family.P, y=s, x=h_rho(r, s)))


def _envelope_witness(r, t, y, y0):
    """P_{h_r(s), s} through (t, y) for points between the tents and U_r."""
    left, right = rho_breakpoints(r)
    if not left <= t <= right:
        return None
    peak_y = y_star(r, t)
    peak = _p_member(r, peak_y)
    if y >= peak(t) - BOUNDARY_TOL:
        return peak

    def f(s):
        return _p_member(r, s)(t) - y

    end = y0 if f(y0) >= f(1.0) else 1.0
    lo, hi = sorted((end, peak_y))
    brackets = scan_brackets(f, lo, hi)
    if not brackets:
        return None
    result = find_root(f, *brackets[0])
    return _p_member(r, result.root)


def witness(kind: MeasureKind, v: float, t: float, y: float) -> Witness:
    """
    A member of the constant-value class through (t, y).

    Tents T_{x, phi^-1(v)} are tried first; for rho the remaining points
    between the tents and U_v are reached by P_{h_v(s), s}.

    Raises:
        PointOutsideRegion: If (t, y) is not in the band for v
        UnattainablePoint: For v = 0 and y < 1, where only A = 1 has value 0
        WitnessNotFound: If no construction passes the certificate
    """
    kind = MeasureKind(kind)
    region = make_region(kind, v)
    v = region.v
    t, y = float(t), float(y)
    if v == 0.0 and 0.0 <= t <= 1.0 and max(t, 1.0 - t) <= y < 1.0 - BOUNDARY_TOL:
        raise UnattainablePoint(
            f"Only A = 1 has {kind.value} = 0, so ({t:g}, {y:g}) with y < 1 is never attained.")
    if not region.contains(t, y):
        band = (f"the band at t is [{region.lower(t):.12g}, {region.upper(t):.12g}]"
                if 0.0 <= t <= 1.0 else "t must lie in [0, 1]")
        raise PointOutsideRegion(f"({t:g}, {y:g}) is outside {region!r}: {band}.")

    if v == 0.0:
        A, branch = independence(), "independence"
    elif v == 1.0:
        A, branch = comonotone(), "comonotone"
    else:
        y0 = phi_inv(kind, v)
        # points accepted within BOUNDARY_TOL outside the band are solved on its edge
        target = min(max(y, region.lower(t)), region.upper(t))
        A, branch = _tent_witness(t, target, y0), "tent"
        if A is None and kind is MeasureKind.SPEARMAN_RHO:
            A, branch = _envelope_witness(v, t, target, y0), "envelope"
        if A is None:
            raise WitnessNotFound(f"No tent or P-family member through ({t:.17g}, {y:.17g}) for {region!r}.")

    logger.debug("witness %r at (%g, %g): %s branch gave %r", region, t, y, branch, A)
    return _certify(A, kind, v, t, y)


def _certify(A, kind, v, t, y) -> Witness:
    report = is_valid(A)
    achieved_value = measure(kind, A)
    achieved_height = A(t)
    if not report.valid or abs(achieved_value - v) > WITNESS_TOL or abs(achieved_height - y) > WITNESS_TOL:
        raise WitnessNotFound(
            f"Candidate {A!r} for ({t:.17g}, {y:.17g}) failed its certificate: "
            f"{kind.value}={achieved_value:.17g} (target {v:.17g}), height {achieved_height:.17g}.")
    return Witness(A, kind, v, (t, y), achieved_value, achieved_height)
