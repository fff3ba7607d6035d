"""Tests for rho, tau, their closed forms and the phi / psi / h transforms."""

from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

import measures
from errors import DomainError, InvalidPickands, MeasureDisagreement, NoClosedForm
from measures import (MeasureKind, h, h_deriv, h_inv, h_rho, h_rho_deriv, h_rho_inv,
                      h_slope_floor, h_tau, h_tau_deriv, h_tau_inv, measure, measure_report,
                      phi1, phi1_inv, phi2, phi2_inv, phi_inv, psi1, psi1_inv, psi2, psi2_inv,
                      psi_inv, rho, rho_family_closed, rho_integral, tau, tau_family_closed,
                      tau_quadrature_oracle)
from pickands import (Dominance, Family, FamilySpec, PickandsFunction, convex_combination,
                      dominates, independence, make_family, random_pickands)
from verification import random_family_spec

TARGETS = [0.1, 0.25, 0.5, 0.75, 0.9]


def p_member(x, y):
    return make_family(FamilySpec(Family.P, y=y, x=x))


class TestRho:
    def test_independence(self, pi_fn):
        assert rho(pi_fn) == pytest.approx(0.0, abs=1e-15)

    def test_comonotone(self, m_fn):
        assert rho(m_fn) == pytest.approx(1.0, abs=1e-15)

    def test_p_family(self, p28):
        assert rho(p28) == pytest.approx(5.0 / 9.0, abs=1e-12)

    def test_invalid_input(self):
        with pytest.raises(InvalidPickands):
            rho(PickandsFunction.from_knots([(0, 1), (0.5, 0.4), (1, 1)]))

    def test_quadrature_agrees(self, rng):
        for _ in range(20):
            A = random_pickands(rng)
            assert rho_integral(A, breakpoints=A.ts[1:-1]) == pytest.approx(rho(A), abs=1e-10)


class TestTau:
    def test_independence(self, pi_fn):
        assert tau(pi_fn) == 0.0

    def test_comonotone(self, m_fn):
        assert tau(m_fn) == pytest.approx(1.0, abs=1e-15)

    def test_p_family(self, p28):
        assert tau(p28) == pytest.approx(0.4, abs=1e-12)

    def test_invalid_input(self):
        with pytest.raises(InvalidPickands) as excinfo:
            tau(PickandsFunction.from_knots([(0, 1), (0.3, 0.8), (0.6, 0.9), (0.8, 0.85), (1, 1)]))
        assert excinfo.value.knot_index == 2

    def test_oracle_independence(self, pi_fn):
        assert tau_quadrature_oracle(pi_fn) == pytest.approx(0.0, abs=1e-12)

    def test_oracle_comonotone(self, m_fn):
        assert tau_quadrature_oracle(m_fn) == pytest.approx(1.0, abs=1e-10)

    def test_oracle_l_family(self, l75):
        assert tau_quadrature_oracle(l75) == pytest.approx(0.5, abs=1e-10)


class TestClosedForms:
    def test_tent_rho(self):
        assert rho_family_closed(FamilySpec(Family.T, y=0.75, x=0.4)) == pytest.approx(3.0 / 7.0, abs=1e-15)

    def test_l_rho(self):
        assert rho_family_closed(FamilySpec(Family.L, y=0.75)) == pytest.approx(0.673469387755102, abs=1e-12)

    def test_p_corner_tau(self):
        assert tau_family_closed(FamilySpec(Family.P, y=0.5, x=0.5)) == 1.0

    @pytest.mark.parametrize("gap", np.logspace(-12, -4, 17).tolist())
    def test_p_near_the_corner(self, gap):
        for x in (0.5, 0.5 - gap):
            spec = FamilySpec(Family.P, y=0.5 + gap, x=x)
            A = make_family(spec)
            assert abs(tau_family_closed(spec) - tau(A)) <= 1e-12
            assert abs(rho_family_closed(spec) - rho(A)) <= 1e-12
            report = measure_report(A)
            assert report["method"] == "closed-form"
            assert report["tolerance"] <= 1e-12

    def test_tent_is_independent_of_apex(self):
        values = {rho_family_closed(FamilySpec(Family.T, y=0.8, x=x)) for x in (0.2, 0.5, 0.8)}
        assert len(values) == 1

    @pytest.mark.parametrize("spec", [FamilySpec(Family.Z, y=0.9, x=0.2),
                                      FamilySpec(Family.W, y=0.6, x=0.2)])
    def test_no_closed_form(self, spec):
        with pytest.raises(NoClosedForm):
            rho_family_closed(spec)
        with pytest.raises(NoClosedForm):
            tau_family_closed(spec)
        # the knot form still works
        assert 0.0 <= rho(make_family(spec)) <= 1.0

    def test_agreement_with_knots(self, rng):
        for _ in range(1000):
            spec = random_family_spec(rng)
            A = make_family(spec)
            assert abs(rho_family_closed(spec) - rho(A)) <= 1e-12
            assert abs(tau_family_closed(spec) - tau(A)) <= 1e-12

    def test_stieltjes_against_quadrature(self, rng):
        for _ in range(100):
            A = make_family(random_family_spec(rng))
            assert abs(tau(A) - tau_quadrature_oracle(A)) <= 1e-8


class TestTransforms:
    def test_endpoints(self):
        assert phi1_inv(1.0) == 0.5
        assert phi1_inv(0.0) == 1.0
        assert phi2_inv(0.5) == pytest.approx(2.0 / 3.0, abs=1e-16)

    def test_psi1_round_trip(self):
        assert psi1_inv(psi1(0.8)) == pytest.approx(0.8, abs=1e-13)

    @pytest.mark.parametrize("f, f_inv", [(phi1, phi1_inv), (psi1, psi1_inv),
                                          (phi2, phi2_inv), (psi2, psi2_inv)])
    def test_strictly_decreasing_bijections(self, f, f_inv):
        ys = np.linspace(0.5, 1.0, 2001)
        values = np.array([f(y) for y in ys])
        assert np.all(np.diff(values) < 0)
        assert values[0] == pytest.approx(1.0, abs=1e-14)
        assert values[-1] == pytest.approx(0.0, abs=1e-14)
        for v in np.linspace(0.0, 1.0, 101):
            assert f(f_inv(v)) == pytest.approx(v, abs=1e-13)

    @pytest.mark.parametrize("call", [lambda: phi1(0.4), lambda: phi2_inv(1.5),
                                      lambda: psi1_inv(float("nan")), lambda: psi2(1.2)])
    def test_domain(self, call):
        with pytest.raises(DomainError):
            call()


class TestH:
    @pytest.mark.parametrize("r", TARGETS)
    def test_rho_endpoints(self, r):
        assert h_rho(r, phi1_inv(r)) == pytest.approx(0.0, abs=1e-14)
        assert h_rho(r, 1.0) == pytest.approx(2.0 * r / (3.0 + r), abs=1e-14)
        assert h_rho(r, 1.0) == pytest.approx(1.0 - phi1_inv(r), abs=1e-14)

    @pytest.mark.parametrize("y", [0.72, 0.85, 1.0])
    def test_rho_constant_along_family(self, y):
        spec = FamilySpec(Family.P, y=y, x=h_rho(0.5, y))
        assert rho_family_closed(spec) == pytest.approx(0.5, abs=1e-12)

    def test_tau_endpoints(self):
        assert h_tau(0.5, 2.0 / 3.0) == pytest.approx(0.0, abs=1e-14)
        assert h_tau(0.5, 1.0) == pytest.approx(1.0 / 3.0, abs=1e-14)

    @pytest.mark.parametrize("y", [0.7, 0.85, 1.0])
    def test_tau_constant_along_family(self, y):
        spec = FamilySpec(Family.P, y=y, x=h_tau(0.5, y))
        assert tau_family_closed(spec) == pytest.approx(0.5, abs=1e-12)

    @pytest.mark.parametrize("v", TARGETS)
    def test_constant_value_families(self, v):
        for y in np.linspace(phi1_inv(v), 1.0, 100):
            assert abs(rho(p_member(h_rho(v, y), y)) - v) <= 1e-12
        for y in np.linspace(phi2_inv(v), 1.0, 100):
            assert abs(tau(p_member(h_tau(v, y), y)) - v) <= 1e-12

    @pytest.mark.parametrize("v", TARGETS)
    def test_tau_family_passes_through_peak(self, v):
        for y in np.linspace(phi2_inv(v), 1.0, 25):
            assert p_member(h_tau(v, y), y)(0.5) == pytest.approx(psi2_inv(v), abs=1e-12)

    def test_inverses(self):
        for y in np.linspace(phi1_inv(0.6), 1.0, 50):
            assert h_rho_inv(0.6, h_rho(0.6, y)) == pytest.approx(y, abs=1e-12)
        for y in np.linspace(phi2_inv(0.6), 1.0, 50):
            assert h_tau_inv(0.6, h_tau(0.6, y)) == pytest.approx(y, abs=1e-12)

    def test_increasing(self):
        ys = np.linspace(phi1_inv(0.3), 1.0, 200)
        assert np.all(np.diff([h_rho(0.3, y) for y in ys]) > 0)
        assert all(h_rho_deriv(0.3, y) > 0 and h_tau_deriv(0.3, max(y, phi2_inv(0.3))) > 0 for y in ys)

    @pytest.mark.parametrize("kind, h_fn, h_inv_fn, h_deriv_fn, psi_inv_fn", [
        (MeasureKind.SPEARMAN_RHO, h_rho, h_rho_inv, h_rho_deriv, psi1_inv),
        (MeasureKind.KENDALL_TAU, h_tau, h_tau_inv, h_tau_deriv, psi2_inv),
    ])
    def test_dispatch(self, kind, h_fn, h_inv_fn, h_deriv_fn, psi_inv_fn):
        for v in TARGETS:
            assert psi_inv(kind, v) == psi_inv_fn(v)
            for y in np.linspace(phi_inv(kind, v), 1.0, 7):
                assert h(kind, v, y) == h_fn(v, y)
                assert h_deriv(kind, v, y) == h_deriv_fn(v, y)
                assert h_inv(kind, v, h(kind, v, y)) == pytest.approx(y, abs=1e-12)

    def test_derivative_matches_difference_quotient(self):
        step = 1e-6
        for kind in MeasureKind:
            for y in np.linspace(phi_inv(kind, 0.4) + step, 1.0 - step, 9):
                quotient = (h(kind, 0.4, y + step) - h(kind, 0.4, y - step)) / (2.0 * step)
                assert h_deriv(kind, 0.4, y) == pytest.approx(quotient, rel=1e-6)

    @pytest.mark.parametrize("call", [lambda: h_rho(1.0, 0.5), lambda: h_tau(1.0, 0.5),
                                      lambda: h_rho(0.5, 0.6), lambda: h_tau_inv(0.5, 0.4)])
    def test_domain(self, call):
        with pytest.raises(DomainError):
            call()

    def test_non_contractivity(self, rng):
        for _ in range(1000):
            v = rng.uniform(0.0, 0.99)
            for kind, h_fn, y_min in ((MeasureKind.SPEARMAN_RHO, h_rho, phi1_inv(v)),
                                      (MeasureKind.KENDALL_TAU, h_tau, phi2_inv(v))):
                lo, hi = np.sort(rng.uniform(y_min, 1.0, 2))
                assert h_fn(v, hi) - h_fn(v, lo) >= h_slope_floor(kind, v) * (hi - lo) - 1e-12

    @given(v=st.floats(0.0, 0.99), y=st.floats(0.0, 1.0))
    @settings(max_examples=200, deadline=None)
    def test_slope_floor_is_a_lower_bound(self, v, y):
        y = phi1_inv(v) + y * (1.0 - phi1_inv(v))
        assert h_rho_deriv(v, y) >= h_slope_floor(MeasureKind.SPEARMAN_RHO, v) - 1e-12


class TestOrder:
    def test_p_family_is_ordered_in_x(self):
        for y in (0.6, 0.75, 0.9):
            lo, hi = p_member(0.1, y), p_member(0.3, y)
            assert dominates(lo, hi) is Dominance.STRICTLY
            assert rho(lo) < rho(hi)
            assert tau(lo) < tau(hi)

    def test_dominating_pairs(self, rng):
        tested = 0
        while tested < 500:
            B = random_pickands(rng)
            if rho(B) < 1e-3 or tau(B) < 1e-3:
                continue
            A = convex_combination(B, independence(), rng.uniform(0.05, 0.95))
            assert dominates(A, B) is Dominance.STRICTLY
            assert rho(A) < rho(B) - 1e-12
            assert tau(A) < tau(B) - 1e-12
            tested += 1

    def test_range(self, rng):
        for _ in range(500):
            A = random_pickands(rng, n_points=int(rng.integers(1, 12)))
            assert -1e-12 <= rho(A) <= 1.0 + 1e-12
            assert -1e-12 <= tau(A) <= 1.0 + 1e-12


class TestReport:
    def test_closed_form_family(self, p28):
        report = measure_report(p28)
        assert report["method"] == "closed-form"
        assert report["rho"] == pytest.approx(5.0 / 9.0, abs=1e-12)
        assert report["tau"] == pytest.approx(0.4, abs=1e-12)
        assert report["tolerance"] <= 1e-12

    def test_knot_input(self, pi_fn):
        report = measure_report(pi_fn)
        assert report == {"rho": pytest.approx(0.0, abs=1e-15), "tau": 0.0,
                          "method": "stieltjes", "tolerance": pytest.approx(0.0, abs=1e-8)}

    def test_disagreement_is_an_error(self, monkeypatch):
        monkeypatch.setattr(measures, "tau_quadrature_oracle", lambda A, cfg=None: 0.25)
        with pytest.raises(MeasureDisagreement):
            measure_report(make_family(FamilySpec(Family.Z, y=0.8, x=0.3)))

    def test_dispatch(self, l75):
        assert measure(MeasureKind.SPEARMAN_RHO, l75) == rho(l75)
        assert measure("tau", l75) == tau(l75)


@pytest.mark.parametrize("v", TARGETS)
def test_flat_bottom_member_with_prescribed_value(v):
    assert rho(make_family(FamilySpec(Family.L, y=psi1_inv(v)))) == pytest.approx(v, abs=1e-12)
    assert tau(make_family(FamilySpec(Family.L, y=psi2_inv(v)))) == pytest.approx(v, abs=1e-12)
