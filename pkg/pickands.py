"""
Pickands dependence functions and the extreme-value copulas they induce.

A Pickands function is stored as a canonical list of knots (t_k, a_k); every
function used in this package is piecewise linear, so interpolation between
the knots is exact.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from functools import cached_property
from typing import NamedTuple, Sequence

import numpy as np

from errors import DomainError, InvalidPickands, ParameterOutOfRange

logger = logging.getLogger(__name__)

# Slack for float comparisons on knot values.
EPS = 1e-12


class Family(str, Enum):
    T = "T"
    L = "L"
    P = "P"
    Z = "Z"
    W = "W"


@dataclass(frozen=True)
class FamilySpec:
    """
    Tagged parameters of one of the five piecewise linear families.

    Attributes:
        tag: Family tag (T, L, P, Z or W)
        x: Kink abscissa; unused by L
        y: Height parameter
    """

    tag: Family
    y: float
    x: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "tag", Family(self.tag))

    def __repr__(self):
        if self.tag is Family.L or self.x is None:
            return f"{self.tag.value}_{{{self.y}}}"
        return f"{self.tag.value}_{{{self.x!r},{self.y!r}}}"


class Validity(NamedTuple):
    valid: bool
    diagnostic: str | None = None
    knot_index: int | None = None


class Dominance(str, Enum):
    """Outcome of comparing A with B pointwise."""

    STRICTLY = "strictly"        # A >= B everywhere, > somewhere
    EQUAL = "equal"
    WEAKLY_ONLY = "weakly_only"  # A <= B everywhere, < somewhere
    INCOMPARABLE = "incomparable"


def canonical_knots(points: Sequence[Sequence[float]]) -> tuple:
    """
    Merge duplicate abscissae and drop collinear interior knots.

    Duplicate abscissae are only merged when their values agree; otherwise both
    knots are kept so that is_valid can report the problem. Lists whose
    abscissae are not increasing are returned unpruned for the same reason.
    """
    merged = []
    for t, a in points:
        t, a = float(t), float(a)
        if merged and t == merged[-1][0] and abs(a - merged[-1][1]) <= EPS:
            continue
        merged.append((t, a))
    if any(t1 <= t0 for (t0, _), (t1, _) in zip(merged, merged[1:])):
        return tuple(merged)

    pruned = []
    for point in merged:
        while len(pruned) >= 2:
            (t0, a0), (t1, a1) = pruned[-2], pruned[-1]
            t2, a2 = point
            if t1 == t0 or t2 == t1:
                break
            cross = (t1 - t0) * (a2 - a0) - (a1 - a0) * (t2 - t0)
            if abs(cross) > 1e-15:
                break
            pruned.pop()
        pruned.append(point)
    return tuple(pruned)


@dataclass(frozen=True)
class PickandsFunction:
    """
    Piecewise linear Pickands dependence function.

    Attributes:
        knots: Tuple of (t, a) pairs, t strictly increasing from 0 to 1
        family: The FamilySpec this function was built from, if any
    """

    knots: tuple
    family: FamilySpec | None = field(default=None, compare=False)

    @classmethod
    def from_knots(cls, points, family: FamilySpec | None = None) -> PickandsFunction:
        return cls(canonical_knots(points), family)

    @cached_property
    def ts(self) -> np.ndarray:
        return np.array([t for t, _ in self.knots])

    @cached_property
    def values(self) -> np.ndarray:
        return np.array([a for _, a in self.knots])

    @cached_property
    def slopes(self) -> np.ndarray:
        return np.diff(self.values) / np.diff(self.ts)

    def evaluate(self, t):
        """A(t) by linear interpolation; t may be a float or an array."""
        arr = np.asarray(t, dtype=float)
        if np.any(np.isnan(arr)) or np.any(arr < 0.0) or np.any(arr > 1.0):
            raise DomainError(f"Pickands functions are defined on [0, 1], got t={t}.")
        out = np.interp(arr, self.ts, self.values)
        return float(out) if out.ndim == 0 else out

    __call__ = evaluate

    def slope_at(self, t):
        """Right-continuous a.e. derivative A'(t); the last segment covers t = 1."""
        idx = np.searchsorted(self.ts, np.asarray(t, dtype=float), side="right") - 1
        idx = np.clip(idx, 0, len(self.slopes) - 1)
        out = self.slopes[idx]
        return float(out) if np.ndim(out) == 0 else out

    def __repr__(self):
        if self.family is not None:
            return f"PickandsFunction({self.family!r})"
        return f"PickandsFunction(knots={len(self.knots)})"


def independence() -> PickandsFunction:
    """A = 1, the Pickands function of the independence copula."""
    return PickandsFunction.from_knots([(0.0, 1.0), (1.0, 1.0)])


def comonotone() -> PickandsFunction:
    """A(t) = max(t, 1 - t), the Pickands function of M."""
    return PickandsFunction.from_knots([(0.0, 1.0), (0.5, 0.5), (1.0, 1.0)])


def _require(condition, spec, constraint):
    if not condition:
        raise ParameterOutOfRange(f"{spec!r} violates the constraint {constraint}.")


def _clip(value, lo, hi):
    return min(max(value, lo), hi)


def make_family(spec: FamilySpec) -> PickandsFunction:
    """
    Build T, L, P, Z or W as an exact knot list.

    Parameters are checked with a slack of 1e-12 and then clipped into range,
    so values such as x = 1 - y computed in floating point are accepted.
    """
    tag, x, y = spec.tag, spec.x, spec.y
    if y is None or not math.isfinite(y):
        raise ParameterOutOfRange(f"{spec!r} needs a finite y parameter.")
    if tag is not Family.L and (x is None or not math.isfinite(x)):
        raise ParameterOutOfRange(f"{spec!r} needs a finite x parameter.")

    if tag is Family.T:
        _require(0.5 - EPS <= y <= 1 + EPS, spec, "y in [1/2, 1]")
        y = _clip(y, 0.5, 1.0)
        _require(1 - y - EPS <= x <= y + EPS, spec, "x in [1-y, y]")
        x = _clip(x, 1 - y, y)
        if y == 1.0:
            points = [(0.0, 1.0), (1.0, 1.0)]
        else:
            points = [(0.0, 1.0), (x, y), (1.0, 1.0)]

    elif tag is Family.L:
        _require(0.5 - EPS <= y <= 1 + EPS, spec, "y in [1/2, 1]")
        y = _clip(y, 0.5, 1.0)
        points = [(0.0, 1.0), (1 - y, y), (y, y), (1.0, 1.0)]

    elif tag is Family.P:
        _require(-EPS <= x <= 0.5 + EPS, spec, "x in [0, 1/2]")
        _require(0.5 - EPS <= y <= 1 + EPS, spec, "y in [1/2, 1]")
        x, y = _clip(x, 0.0, 0.5), _clip(y, 0.5, 1.0)
        # direct knots keep the x = 1 - y and x = y = 1/2 corners exact
        points = [(0.0, 1.0), (x, 1 - x), (y, y), (1.0, 1.0)]

    elif tag is Family.Z:
        _require(EPS < x <= 0.5 + EPS, spec, "x in (0, 1/2]")
        x = _clip(x, 0.0, 0.5)
        _require(1 - x - EPS <= y <= 1 + EPS, spec, "y in [1-x, 1]")
        y = _clip(y, 1 - x, 1.0)
        points = [(0.0, 1.0), (x, y), (1 - x, y), (1.0, 1.0)]

    else:
        _require(-EPS <= x < 0.5, spec, "x in [0, 1/2)")
        x = _clip(x, 0.0, 0.5)
        _require(0.5 - EPS <= y <= 1 - x + EPS, spec, "y in [1/2, 1-x]")
        y = _clip(y, 0.5, 1 - x)
        points = [(0.0, 1.0), (x, 1 - x), (0.5, y), (1 - x, 1 - x), (1.0, 1.0)]

    return PickandsFunction.from_knots(points, family=spec)


def is_valid(A) -> Validity:
    """
    Check the Pickands invariants on a knot list (or a PickandsFunction).

    Knot checks are sufficient because the function is piecewise linear.
    The diagnostic names the first violated invariant and its knot.
    """
    knots = A.knots if isinstance(A, PickandsFunction) else tuple(tuple(k) for k in A)
    if len(knots) < 2:
        return Validity(False, "a Pickands function needs at least the knots t=0 and t=1")
    for i, knot in enumerate(knots):
        if len(knot) != 2 or not all(math.isfinite(float(v)) for v in knot):
            return Validity(False, f"knot {i} is not a finite (t, a) pair", i)
    ts = [float(t) for t, _ in knots]
    vals = [float(a) for _, a in knots]

    if ts[0] != 0.0:
        return Validity(False, f"first knot must sit at t=0, found t={ts[0]:g}", 0)
    if ts[-1] != 1.0:
        return Validity(False, f"last knot must sit at t=1, found t={ts[-1]:g}", len(ts) - 1)
    for i in range(1, len(ts)):
        if ts[i] <= ts[i - 1]:
            return Validity(False, f"abscissae must be strictly increasing, violated at knot {i} (t={ts[i]:g})", i)
    if abs(vals[0] - 1.0) > EPS:
        return Validity(False, f"boundary condition A(0)=1 violated: A(0)={vals[0]:g}", 0)
    if abs(vals[-1] - 1.0) > EPS:
        return Validity(False, f"boundary condition A(1)=1 violated: A(1)={vals[-1]:g}", len(vals) - 1)

    for i, (t, a) in enumerate(zip(ts, vals)):
        if a < max(t, 1 - t) - EPS:
            return Validity(False, f"bound max(t,1-t) <= A(t) violated at knot {i} (t={t:g}, A={a:g})", i)
        if a > 1 + EPS:
            return Validity(False, f"bound A(t) <= 1 violated at knot {i} (t={t:g}, A={a:g})", i)

    # a knot may sit at most EPS above the chord of its neighbours
    for i in range(1, len(ts) - 1):
        chord = vals[i - 1] + (vals[i + 1] - vals[i - 1]) * (ts[i] - ts[i - 1]) / (ts[i + 1] - ts[i - 1])
        if vals[i] > chord + EPS:
            before = (vals[i] - vals[i - 1]) / (ts[i] - ts[i - 1])
            after = (vals[i + 1] - vals[i]) / (ts[i + 1] - ts[i])
            return Validity(
                False,
                f"convexity violated at knot {i} (t={ts[i]:g}): slope {after:.6g} "
                f"follows slope {before:.6g}",
                i,
            )
    return Validity(True)


def copula_eval(A: PickandsFunction, x: float, y: float) -> float:
    """C_A(x, y) = (xy)^A(ln x / ln xy), with uniform margins on the boundary."""
    if not (0.0 <= x <= 1.0 and 0.0 <= y <= 1.0):
        raise DomainError(f"Copulas are defined on [0, 1]^2, got ({x}, {y}).")
    if x == 0.0 or y == 0.0:
        return 0.0
    if x == 1.0:
        return y
    if y == 1.0:
        return x
    log_xy = math.log(x) + math.log(y)
    return math.exp(log_xy * A(math.log(x) / log_xy))


def _merged_grid(*functions):
    return np.unique(np.concatenate([f.ts for f in functions]))


def dominates(A: PickandsFunction, B: PickandsFunction) -> Dominance:
    """Compare A and B on the union of their knots, exact for piecewise linear input."""
    grid = _merged_grid(A, B)
    diff = A(grid) - B(grid)
    above = bool(np.any(diff > EPS))
    below = bool(np.any(diff < -EPS))
    if above and below:
        return Dominance.INCOMPARABLE
    if above:
        return Dominance.STRICTLY
    if below:
        return Dominance.WEAKLY_ONLY
    return Dominance.EQUAL


def support_bounds(A: PickandsFunction) -> tuple[float, float]:
    """
    (L_D, R_D): the largest t with A(t) = 1 - t and the smallest t with A(t) = t.

    Both are knots: by convexity A agrees with 1 - t on [0, L_D] and with t on
    [R_D, 1] and leaves those lines at a kink.
    """
    left = [t for t, a in A.knots if abs(a - (1 - t)) <= EPS]
    right = [t for t, a in A.knots if abs(a - t) <= EPS]
    return max(left), min(right)


def _f(t, x):
    if t <= 0.0:
        return 0.0
    if t >= 1.0:
        return 1.0
    return x ** (1.0 / t - 1.0)


def support_contains(A: PickandsFunction, x: float, y: float) -> bool:
    """Is (x, y) in the support of the copula measure, {f_{L_D}(x) <= y <= f_{R_D}(x)}?"""
    if not (0.0 <= x <= 1.0 and 0.0 <= y <= 1.0):
        return False
    left, right = support_bounds(A)
    return _f(left, x) - EPS <= y <= _f(right, x) + EPS


def convex_combination(A: PickandsFunction, B: PickandsFunction, weight: float) -> PickandsFunction:
    """weight * A + (1 - weight) * B, evaluated on the merged knot grid."""
    if not 0.0 <= weight <= 1.0:
        raise DomainError(f"Convex combination weight must lie in [0, 1], got {weight}.")
    grid = _merged_grid(A, B)
    values = weight * A(grid) + (1.0 - weight) * B(grid)
    return PickandsFunction.from_knots(zip(grid, values))


def random_pickands(rng: np.random.Generator, n_points: int = 6) -> PickandsFunction:
    """
    Random member of the Pickands class.

    Draws points above max(t, 1 - t) and below 1 and returns the lower convex
    hull through (0, 1) and (1, 1). The hull stays above max(t, 1 - t) because
    that function is convex.
    """
    ts = rng.uniform(0.0, 1.0, n_points)
    floor = np.maximum(ts, 1.0 - ts)
    vals = floor + (1.0 - floor) * rng.uniform(0.0, 1.0, n_points) ** 2
    points = sorted([(0.0, 1.0), (1.0, 1.0), *zip(ts.tolist(), vals.tolist())])

    hull = []
    for p in points:
        while len(hull) >= 2:
            (t0, a0), (t1, a1) = hull[-2], hull[-1]
            if (t1 - t0) * (p[1] - a0) - (a1 - a0) * (p[0] - t0) > 0:
                break
            hull.pop()
        hull.append(p)
    return PickandsFunction.from_knots(hull)


def p_family_values(x, y, t) -> np.ndarray:
    """
    P_{x,y}(t) for broadcastable arrays of x, y and t.

    Requires x < y wherever the middle segment is hit; the sweeps that call
    this never reach the x = y = 1/2 corner.
    """
    x, y, t = np.broadcast_arrays(np.asarray(x, float), np.asarray(y, float), np.asarray(t, float))
    with np.errstate(divide="ignore", invalid="ignore"):
        middle = (1 - x - y) / (x - y) * (t - y) + y
    return np.where(t <= x, 1 - t, np.where(t <= y, middle, t))


def from_json(obj) -> PickandsFunction:
    """
    Parse {"family": {"tag", "x", "y"}} or {"knots": [[t, a], ...]}.

    Keys other than "family" and "knots" are ignored.
    """
    if not isinstance(obj, dict):
        raise InvalidPickands("expected a JSON object with a 'family' or 'knots' key")
    if "family" in obj:
        fam = obj["family"]
        if not isinstance(fam, dict) or "tag" not in fam:
            raise InvalidPickands("'family' must be an object with a 'tag'")
        try:
            tag = Family(fam["tag"])
        except ValueError:
            raise InvalidPickands(f"unknown family tag {fam['tag']!r}; expected one of T, L, P, Z, W")
        x = fam.get("x")
        y = fam.get("y")
        return make_family(FamilySpec(tag, y=None if y is None else float(y),
                                      x=None if x is None else float(x)))
    if "knots" in obj:
        knots = obj["knots"]
        if not isinstance(knots, list) or not all(isinstance(k, (list, tuple)) and len(k) == 2 for k in knots):
            raise InvalidPickands("'knots' must be a list of [t, a] pairs")
        try:
            points = [(float(t), float(a)) for t, a in knots]
        except (TypeError, ValueError):
            raise InvalidPickands("knot coordinates must be numbers")
        return PickandsFunction.from_knots(points)
    raise InvalidPickands("expected a JSON object with a 'family' or 'knots' key")


def to_json(A: PickandsFunction) -> dict:
    return {"knots": [[t, a] for t, a in A.knots]}
