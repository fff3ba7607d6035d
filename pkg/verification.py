"""
PropertyVerifier Class
Runs the property suites of the measures and envelopes modules as one batch
for a single measure and target value.
"""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass

import numpy as np

from envelopes import (calibrate, envelope_oracle, g_deriv, g_fun, rho_breakpoints,
                       make_region, sample_region_point, t_of_y, upper_envelope,
                       upper_envelope_rho, witness, y_star)
from errors import DomainError, EvcError
from measures import (MeasureKind, h, h_slope_floor, measure, phi_inv, psi_inv,
                      rho_family_closed, rho_integral, tau_family_closed,
                      tau_quadrature_oracle)
from pickands import (Family, FamilySpec, comonotone, convex_combination, independence,
                      make_family, random_pickands)

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class VerifyConfig:
    """
    Sample and grid sizes for a verification run.

    Attributes:
        samples: Random draws per sampled property
        n_t: Size of the t-grid for the envelope oracle
        n_y: Size of the y-grid the oracle maximises over
        n_grid: Size of the t-grid used for containment checks
    """

    samples: int = 200
    n_t: int = 201
    n_y: int = 10_000
    n_grid: int = 401

    def __post_init__(self):
        for name in ("samples", "n_t", "n_y", "n_grid"):
            value = getattr(self, name)
            if value < (1 if name == "samples" else 2):
                raise DomainError(f"VerifyConfig.{name} is too small: {value}.")


def random_family_spec(rng: np.random.Generator, tags=(Family.T, Family.L, Family.P)) -> FamilySpec:
    """Admissible parameters for a randomly chosen tag."""
    tag = tags[rng.integers(len(tags))]
    y = float(rng.uniform(0.5, 1.0))
    if tag is Family.L:
        return FamilySpec(tag, y=y)
    if tag is Family.T:
        return FamilySpec(tag, y=y, x=float(rng.uniform(1.0 - y, y)))
    return FamilySpec(tag, y=y, x=float(rng.uniform(0.0, 0.5)))


def _result(name, worst, tolerance, samples, success=None):
    worst = float(worst)
    return {
        'name': name,
        'success': bool(worst <= tolerance) if success is None else bool(success),
        'worst_residual': worst,
        'tolerance': tolerance,
        'samples': int(samples),
    }


class PropertyVerifier:

    def __init__(self, kind, v, seed=1, config=None):
        self.kind = MeasureKind(kind)
        self.region = make_region(self.kind, v)
        self.v = self.region.v
        self.seed = seed
        self.config = config or VerifyConfig()
        self.results = {}  # check name -> result dict

    def _rng(self):
        # every check draws from its own stream so results do not depend on order
        return np.random.default_rng(self.seed)

    # ==================== MEASURES ====================

    def closed_forms(self):
        rng = self._rng()
        closed = rho_family_closed if self.kind is MeasureKind.SPEARMAN_RHO else tau_family_closed
        worst = 0.0
        for _ in range(self.config.samples):
            spec = random_family_spec(rng)
            worst = max(worst, abs(closed(spec) - measure(self.kind, make_family(spec))))
        return _result('closed_forms', worst, 1e-12, self.config.samples)

    def quadrature_oracle(self):
        rng = self._rng()
        n = min(self.config.samples, 50)
        worst = 0.0
        for _ in range(n):
            A = random_pickands(rng)
            exact = measure(self.kind, A)
            if self.kind is MeasureKind.SPEARMAN_RHO:
                other = rho_integral(A, breakpoints=A.ts[1:-1])
            else:
                other = tau_quadrature_oracle(A)
            worst = max(worst, abs(exact - other))
        return _result('quadrature_oracle', worst, 1e-8, n)

    def constant_family(self):
        if self.v == 1.0:
            worst = abs(measure(self.kind, comonotone()) - 1.0)
            return _result('constant_family', worst, 1e-12, 1)
        ys = np.linspace(phi_inv(self.kind, self.v), 1.0, self.config.samples)
        worst = 0.0
        for y in ys.tolist():
            A = make_family(FamilySpec(Family.P, y=y, x=h(self.kind, self.v, y)))
            worst = max(worst, abs(measure(self.kind, A) - self.v))
        return _result('constant_family', worst, 1e-12, len(ys))

    def l_member(self):
        """L_{psi^-1(v)} has value v and stays inside the band."""
        A = make_family(FamilySpec(Family.L, y=psi_inv(self.kind, self.v)))
        ts = np.linspace(0.0, 1.0, self.config.n_grid)
        values = A(ts)
        lower = np.array([self.region.lower(t) for t in ts.tolist()])
        upper = np.array([self.region.upper(t) for t in ts.tolist()])
        outside = max(float(np.max(lower - values)), float(np.max(values - upper)), 0.0)
        worst = max(abs(measure(self.kind, A) - self.v), outside)
        return _result('l_member', worst, 1e-12, len(ts))

    def non_contractivity(self):
        if self.v == 1.0:
            return _result('non_contractivity', 0.0, 1e-12, 0)
        rng = self._rng()
        y_min = phi_inv(self.kind, self.v)
        floor = h_slope_floor(self.kind, self.v)
        worst = -np.inf
        for _ in range(self.config.samples):
            lo, hi = np.sort(rng.uniform(y_min, 1.0, 2)).tolist()
            gap = floor * (hi - lo) - (h(self.kind, self.v, hi) - h(self.kind, self.v, lo))
            worst = max(worst, gap)
        return _result('non_contractivity', worst, 1e-12, self.config.samples)

    def strict_order(self):
        """Pairs A = wB + (1 - w) with A above B must have a strictly smaller measure."""
        rng = self._rng()
        worst = -np.inf
        tested = 0
        while tested < self.config.samples:
            B = random_pickands(rng)
            mB = measure(self.kind, B)
            if mB < 1e-6:
                continue
            A = convex_combination(B, independence(), float(rng.uniform(0.05, 0.95)))
            worst = max(worst, measure(self.kind, A) - mB)
            tested += 1
        return _result('strict_order', worst, -1e-12, tested, success=worst < -1e-12)

    # ==================== ENVELOPES ====================

    def envelope(self):
        ts = np.linspace(0.0, 1.0, self.config.n_t)
        oracle = envelope_oracle(self.kind, self.v, ts, self.config.n_y)
        exact = np.array([upper_envelope(self.kind, self.v, t) for t in ts.tolist()])
        # the oracle is a max over members, so it may never exceed the envelope
        above = float(np.max(oracle - exact))
        worst = float(np.max(np.abs(oracle - exact)))
        success = worst <= 2e-6 and above <= 1e-12
        return _result('envelope_oracle', worst, 2e-6, self.config.n_t, success=success)

    def containment(self):
        rng = self._rng()
        ts = np.linspace(0.0, 1.0, self.config.n_grid)
        lower = np.array([self.region.lower(t) for t in ts.tolist()])
        upper = np.array([self.region.upper(t) for t in ts.tolist()])
        worst = 0.0
        calibration_error = 0.0
        for _ in range(self.config.samples):
            A = calibrate(random_pickands(rng), self.kind, self.v)
            values = A(ts)
            worst = max(worst, float(np.max(lower - values)), float(np.max(values - upper)))
            calibration_error = max(calibration_error, abs(measure(self.kind, A) - self.v))
        if calibration_error > 1e-9:
            logger.error("containment: calibrated members miss v by up to %.3e", calibration_error)
        return _result('containment', worst, 1e-10, self.config.samples,
                       success=worst <= 1e-10 and calibration_error <= 1e-9)

    def witnesses(self):
        rng = self._rng()
        worst = 0.0
        failures = 0
        for _ in range(self.config.samples):
            t, y = self._witness_point(rng)
            try:
                w = witness(self.kind, self.v, t, y)
            except EvcError as exc:
                logger.error("witness failed at (%.17g, %.17g): %s", t, y, exc)
                failures += 1
                continue
            worst = max(worst, abs(w.achieved_value - self.v), abs(w.achieved_height - y))
        return _result('witnesses', worst, 1e-9, self.config.samples,
                       success=failures == 0 and worst <= 1e-9)

    def _witness_point(self, rng):
        if self.v == 0.0:
            return float(rng.uniform(0.0, 1.0)), 1.0
        return sample_region_point(self.region, rng)

    def middle_piece(self):
        """Identities of y_star, t_of_y, g and S; rho with 0 < v < 1 only."""
        r = self.v
        left, right = rho_breakpoints(r)
        y1 = phi_inv(MeasureKind.SPEARMAN_RHO, r)
        residuals = [
            abs(y_star(r, left) - y1),
            abs(y_star(r, right) - 1.0),
            abs(t_of_y(r, y1) - left),
            abs(t_of_y(r, 1.0) - right),
            abs(upper_envelope_rho(r, 0.5) - (9.0 - r + 6.0 * np.sqrt(1.0 - r)) / (15.0 + r)),
        ]
        ts = np.linspace(left, right, self.config.n_t)
        for t in ts.tolist():
            ys = y_star(r, t)
            residuals.append(abs(g_fun(r, t, ys) - upper_envelope_rho(r, t)))
            residuals.append(abs(g_deriv(r, t, ys)))
            residuals.append(abs(t_of_y(r, ys) - t))
        return _result('middle_piece', max(residuals), 1e-10, len(ts))

    # ==================== DRIVER ====================

    def checks(self):
        names = ['closed_forms', 'quadrature_oracle', 'constant_family', 'l_member',
                 'non_contractivity', 'strict_order', 'envelope', 'containment', 'witnesses']
        if self.kind is MeasureKind.SPEARMAN_RHO and 0.0 < self.v < 1.0:
            names.append('middle_piece')
        return names

    def run_all(self):
        for name in self.checks():
            start_time = time.time()
            result = getattr(self, name)()
            self.results[result['name']] = result
            logger.info("%s: success=%s worst=%.3e (%.2fs)", result['name'], result['success'],
                        result['worst_residual'], time.time() - start_time)
        return self.report()

    def report(self):
        checks = list(self.results.values())
        return {
            'measure': self.kind.value,
            'v': self.v,
            'seed': self.seed,
            'success': all(c['success'] for c in checks),
            'checks': checks,
        }


def run_verification(kind, v, seed=1, config=None) -> dict:
    """Deterministic report for (kind, v, seed, config); timings only go to the log."""
    return PropertyVerifier(kind, v, seed, config).run_all()
