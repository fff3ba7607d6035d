"""
Numerical kernels shared by the measure and envelope modules:
adaptive Gauss-Kronrod quadrature and certified bracketed root finding.
"""

from __future__ import annotations

import heapq
import itertools
import logging
import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy.optimize import brentq

from errors import DomainError, NoSignChange, ToleranceNotReached

logger = logging.getLogger(__name__)

# 15-point Kronrod abscissae on [-1, 1] (non-negative half, descending) with the
# embedded 7-point Gauss rule living on the odd-indexed nodes.
_XGK = np.array([
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
])
_WGK = np.array([
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
])
_WG = np.array([
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
])

_NODES = np.concatenate([-_XGK[:-1], _XGK[::-1]])
_KRONROD_WEIGHTS = np.concatenate([_WGK[:-1], _WGK[::-1]])
_GAUSS_WEIGHTS = np.zeros(15)
_GAUSS_WEIGHTS[[1, 3, 5]] = _WG[:3]
_GAUSS_WEIGHTS[7] = _WG[3]
_GAUSS_WEIGHTS[[9, 11, 13]] = _WG[2::-1]


@dataclass(frozen=True)
class QuadratureConfig:
    """
    Tolerance contract for adaptive quadrature.

    Attributes:
        tolerance: Absolute error target for the whole integral
        max_depth: Maximum number of bisections applied to any one panel
        max_panels: Upper limit on live panels before giving up
    """

    tolerance: float = 1e-12
    max_depth: int = 60
    max_panels: int = 20000

    def __post_init__(self):
        if not self.tolerance > 0:
            raise DomainError(f"Quadrature tolerance must be positive, got {self.tolerance}.")
        if self.max_depth < 1:
            raise DomainError(f"Quadrature max_depth must be at least 1, got {self.max_depth}.")
        if self.max_panels < 1:
            raise DomainError(f"Quadrature max_panels must be at least 1, got {self.max_panels}.")


@dataclass(frozen=True)
class IntegrationResult:
    value: float
    error_estimate: float
    panels_used: int


@dataclass(frozen=True)
class RootResult:
    """
    Certified root of a scalar function.

    Attributes:
        root: Point of the final bracket with the smallest |f|
        bracket: (lo, hi) with f(lo) * f(hi) <= 0 and hi - lo <= xtol
        iterations: Iterations spent by the solver (bisection steps included)
    """

    root: float
    bracket: tuple
    iterations: int


class _Panel:
    """A subinterval of the integration range together with its Kronrod estimate."""

    def __init__(self, f, a, b, depth):
        self.a = a
        self.b = b
        self.depth = depth
        half = 0.5 * (b - a)
        centre = 0.5 * (a + b)
        values = np.asarray(f(centre + half * _NODES), dtype=float)
        values = np.broadcast_to(values, _NODES.shape)
        self.value = half * float(np.dot(_KRONROD_WEIGHTS, values))
        gauss = half * float(np.dot(_GAUSS_WEIGHTS, values))
        self.error = abs(self.value - gauss)

    def split(self, f):
        mid = 0.5 * (self.a + self.b)
        return (_Panel(f, self.a, mid, self.depth + 1),
                _Panel(f, mid, self.b, self.depth + 1))

    def __repr__(self):
        return f"_Panel([{self.a}, {self.b}], err={self.error:.3e}, depth={self.depth})"


def integrate(f: Callable, a: float, b: float, breakpoints: Sequence[float] = (),
              cfg: QuadratureConfig | None = None) -> IntegrationResult:
    """
    Integrate f over [a, b] with adaptive G7-K15 panels.

    The initial panels are cut at every breakpoint, so no panel ever straddles
    one. The panel with the largest error estimate is bisected until the summed
    estimate drops below cfg.tolerance.

    Args:
        f: Integrand, called with a numpy array of nodes
        a: Lower limit
        b: Upper limit, b >= a
        breakpoints: Points where f is allowed to be non-smooth
        cfg: Tolerance contract (defaults to QuadratureConfig())

    Returns:
        IntegrationResult with the value, summed error estimate and panel count

    Raises:
        ToleranceNotReached: If the depth or panel budget runs out
    """
    cfg = cfg or QuadratureConfig()
    if not a <= b:
        raise DomainError(f"Integration limits must satisfy a <= b, got [{a}, {b}].")
    if a == b:
        return IntegrationResult(0.0, 0.0, 0)

    cuts = sorted({a, b, *(p for p in breakpoints if a < p < b)})
    counter = itertools.count()
    frontier = []
    for lo, hi in zip(cuts[:-1], cuts[1:]):
        panel = _Panel(f, lo, hi, 0)
        heapq.heappush(frontier, (-panel.error, next(counter), panel))

    total_error = math.fsum(p.error for _, _, p in frontier)
    while total_error > cfg.tolerance:
        if len(frontier) >= cfg.max_panels:
            raise ToleranceNotReached(
                f"Quadrature used {len(frontier)} panels without reaching tolerance "
                f"{cfg.tolerance:g} (estimate {total_error:.3e}). Raise max_panels or loosen the tolerance.")
        _, _, worst = heapq.heappop(frontier)
        if worst.depth >= cfg.max_depth:
            raise ToleranceNotReached(
                f"Quadrature reached max depth {cfg.max_depth} on [{worst.a}, {worst.b}] "
                f"with error estimate {total_error:.3e} > {cfg.tolerance:g}.")
        for child in worst.split(f):
            heapq.heappush(frontier, (-child.error, next(counter), child))
        total_error = math.fsum(p.error for _, _, p in frontier)

    value = math.fsum(p.value for _, _, p in frontier)
    logger.debug("integrate [%g, %g]: %d panels, error estimate %.3e", a, b, len(frontier), total_error)
    return IntegrationResult(value, total_error, len(frontier))


def _bisect(f, lo, hi, flo, xtol, maxiter):
    iterations = 0
    while hi - lo > xtol and iterations < maxiter:
        mid = 0.5 * (lo + hi)
        fmid = f(mid)
        iterations += 1
        if fmid == 0:
            return mid, mid, iterations
        if np.sign(fmid) == np.sign(flo):
            lo, flo = mid, fmid
        else:
            hi = mid
    return lo, hi, iterations


def find_root(f: Callable[[float], float], lo: float, hi: float,
              xtol: float = 1e-13, maxiter: int = 200) -> RootResult:
    """
    Root of f in [lo, hi] with a sign-change certificate.

    scipy's brentq does the work; its answer is only accepted once a bracket of
    width <= xtol around it shows a sign change. Otherwise plain bisection on
    the original bracket takes over, which always terminates.

    Raises:
        NoSignChange: If f(lo) and f(hi) have the same strict sign
    """
    if not lo <= hi:
        raise DomainError(f"Root bracket must satisfy lo <= hi, got [{lo}, {hi}].")
    flo, fhi = f(lo), f(hi)
    if flo == 0:
        return RootResult(lo, (lo, lo), 0)
    if fhi == 0:
        return RootResult(hi, (hi, hi), 0)
    if np.sign(flo) == np.sign(fhi):
        raise NoSignChange(
            f"No sign change on [{lo}, {hi}]: f(lo)={flo:.6g}, f(hi)={fhi:.6g}.")

    iterations = 0
    try:
        root, info = brentq(f, lo, hi, xtol=xtol, maxiter=maxiter, full_output=True, disp=False)
        iterations = info.iterations
        a, b = max(lo, root - 0.5 * xtol), min(hi, root + 0.5 * xtol)
        froot, fa, fb = f(root), f(a), f(b)
        if froot == 0:
            return RootResult(root, (root, root), iterations)
        if np.sign(fa) != np.sign(fb) or fa == 0 or fb == 0:
            best = min((abs(froot), root), (abs(fa), a), (abs(fb), b))[1]
            return RootResult(best, (a, b), iterations)
        logger.warning("brentq root %.17g on [%g, %g] failed its certificate; bisecting", root, lo, hi)
    except (RuntimeError, ValueError) as exc:
        logger.warning("brentq failed on [%g, %g] (%s); bisecting", lo, hi, exc)

    a, b, steps = _bisect(f, lo, hi, flo, xtol, maxiter)
    if a == b:
        return RootResult(a, (a, b), iterations + steps)
    fa, fb = f(a), f(b)
    best = a if abs(fa) <= abs(fb) else b
    return RootResult(best, (a, b), iterations + steps)


def scan_brackets(f: Callable[[float], float], lo: float, hi: float, panels: int = 64) -> list:
    """Sign-change subintervals of [lo, hi] found on an even grid of `panels` panels."""
    grid = np.linspace(lo, hi, panels + 1)
    values = [f(x) for x in grid]
    brackets = []
    for i in range(panels):
        if values[i] == 0 or np.sign(values[i]) != np.sign(values[i + 1]):
            brackets.append((float(grid[i]), float(grid[i + 1])))
    if values[-1] == 0 and not brackets:
        brackets.append((float(grid[-2]), float(grid[-1])))
    return brackets
