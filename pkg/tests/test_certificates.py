"""Unit tests for the certificate data model, the explicit absolute-value
and curve families, the calculus combinators, and the abundance transfer."""
from __future__ import annotations

import numpy as np
import pytest

from quasidiff import certificates as c
from quasidiff.core import GammaSet, LinearMap, OperatorSet


def abs_map(x):
    return np.array([abs(np.atleast_1d(x)[0])])


class TestAbsvalueFamily:
    def test_identity_holds_exactly(self):
        # y_bar + L(x) x + h(x) must equal |x| pointwise
        for delta in (0.3, 0.1, 0.01):
            L_fn, h_fn = c.absvalue_certificate(delta)
            for x in np.linspace(-delta, delta, 41):
                lhs = L_fn([x]).apply([x])[0] + h_fn([x])[0]
                assert lhs == pytest.approx(abs(x), abs=1e-15)

    def test_remainder_bound(self):
        for delta in (0.3, 0.1, 0.01):
            _, h_fn = c.absvalue_certificate(delta)
            xs = np.linspace(-delta, delta, 201)
            hs = [abs(h_fn([x])[0]) for x in xs]
            assert max(hs) <= delta * delta / 4.0 + 1e-15
            assert max(hs) <= delta * delta  # well inside delta * rho(delta)

    def test_slope_stays_in_interval(self):
        L_fn, _ = c.absvalue_certificate(0.1)
        for x in np.linspace(-0.1, 0.1, 101):
            s = L_fn([x]).entries[0, 0]
            assert -1.0 <= s <= 1.0

    def test_full_certificate_accepted(self):
        cert = c.absvalue_qdq()
        rep = c.verify_certificate(abs_map, cert, [1e-1, 1e-2, 1e-3], 200,
                                   seed=0)
        assert rep.accepted
        assert rep.rho_monotone

    def test_shrunk_lambda_rejected_at_minus_delta(self):
        cert = c.absvalue_qdq()
        cert.lam = OperatorSet.from_matrices([[[-0.5]], [[1.0]]],
                                             convex_closure=True)
        rep = c.verify_certificate(abs_map, cert, [1e-2, 1e-3], 200, seed=0)
        assert not rep.accepted
        # the endpoint x = -delta is sampled and must be among the violations
        assert any(v["check"] == "operator_distance"
                   and np.isclose(v["x"][0], -v["delta"])
                   for v in rep.violations)

    def test_delta_outside_range_rejected(self):
        cert = c.absvalue_qdq()
        with pytest.raises(ValueError):
            c.verify_certificate(abs_map, cert, [2.0], 10)


class TestOneSidedDerivatives:
    def test_absvalue(self):
        left, right = c.one_sided_derivatives(lambda t: abs(t), 0.0)
        assert left[0] == pytest.approx(-1.0, abs=1e-10)
        assert right[0] == pytest.approx(1.0, abs=1e-10)

    def test_smooth_curve(self):
        left, right = c.one_sided_derivatives(np.sin, 0.3)
        assert left[0] == pytest.approx(np.cos(0.3), abs=1e-7)
        assert right[0] == pytest.approx(np.cos(0.3), abs=1e-7)

    def test_oscillation_raises(self):
        osc = lambda t: t * np.sin(np.log(abs(t) + 1e-300)) if t else 0.0
        with pytest.raises(c.NotOneSidedDifferentiableError):
            c.one_sided_derivatives(osc, 0.0)

    def test_minimal_curve_set(self):
        s = c.minimal_curve_qdq(lambda t: abs(t), 0.0)
        assert np.allclose(np.sort(s.flat_generators().ravel()), [-1.0, 1.0],
                           atol=1e-10)
        assert s.convex_closure


class TestCurveCertificates:
    def test_absvalue_curve_accepted(self):
        data = c.CurveData.from_function(lambda t: abs(t), 0.0)
        cert = c.curve_qdq(data)
        rep = c.verify_certificate(abs_map, cert, [1e-1, 1e-2, 1e-3], 100,
                                   seed=1)
        assert rep.accepted

    def test_planar_corner_curve_accepted(self):
        data = c.CurveData.from_function(lambda t: np.array([t, abs(t)]), 0.0)
        cert = c.curve_qdq(data)
        F = lambda x: np.array([x[0], abs(x[0])])
        rep = c.verify_certificate(F, cert, [1e-1, 1e-2], 80, seed=2)
        assert rep.accepted

    def test_family_identity(self):
        data = c.CurveData.from_function(lambda t: abs(t), 0.0)
        L_fn, h_fn = c.curve_certificate(data, 0.1)
        for t in np.linspace(-0.1, 0.1, 101):
            v = L_fn([t]).apply([t])[0] + h_fn([t])[0]
            assert v == pytest.approx(abs(t), abs=1e-14)


class TestCurveFalsifier:
    def setup_method(self):
        self.data = c.CurveData.from_function(lambda t: abs(t), 0.0)

    def test_disconnected_generator_list(self):
        lam = OperatorSet.from_matrices([[[-1.0]], [[1.0]]])
        w = c.falsify_curve_qdq(self.data, lam)
        assert w is not None and w["kind"] == "disconnected"

    def test_hull_not_falsified(self):
        lam = OperatorSet.from_matrices([[[-1.0]], [[1.0]]],
                                        convex_closure=True)
        assert c.falsify_curve_qdq(self.data, lam) is None

    def test_missing_derivative(self):
        lam = OperatorSet.from_matrices([[[0.0]], [[1.0]]],
                                        convex_closure=True)
        w = c.falsify_curve_qdq(self.data, lam)
        assert w is not None and w["kind"] == "missing_derivative"
        assert w["side"] == "left"

    def test_dense_chain_not_flagged(self):
        mats = [[[s]] for s in np.linspace(-1.0, 1.0, 401)]
        lam = OperatorSet.from_matrices(mats)
        assert c.falsify_curve_qdq(self.data, lam) is None


class TestCombinators:
    def setup_method(self):
        self.a = c.absvalue_qdq()
        self.b = c.absvalue_qdq()

    def test_linear(self):
        lin = c.combine_certificates("linear", self.a, self.b,
                                     alpha=2.0, beta=-1.0)
        F = lambda x: np.array([abs(x[0])])
        rep = c.verify_certificate(F, lin, [1e-1, 1e-2], 100, seed=3)
        assert rep.accepted
        flats = np.sort(lin.lam.flat_generators().ravel())
        assert flats[0] == pytest.approx(-3.0)
        assert flats[-1] == pytest.approx(3.0)

    def test_set_product(self):
        sp = c.combine_certificates("set_product", self.a, self.b)
        F = lambda x: np.array([abs(x[0]), abs(x[0])])
        rep = c.verify_certificate(F, sp, [1e-1, 1e-2], 100, seed=4)
        assert rep.accepted
        assert sp.lam.shape == (2, 1)

    def test_scalar_product(self):
        pr = c.combine_certificates("scalar_product", self.a, self.b)
        F = lambda x: np.array([x[0] * x[0]])  # |x| * |x|
        rep = c.verify_certificate(F, pr, [1e-1, 1e-2], 100, seed=5)
        assert rep.accepted

    def test_base_point_mismatch(self):
        other = c.absvalue_qdq()
        other.x_bar = np.array([1.0])
        with pytest.raises(ValueError):
            c.combine_certificates("linear", self.a, other)


class TestCompose:
    def test_double_map_after_absvalue(self):
        inner = c.absvalue_qdq()
        outer = c.QdqCertificate(
            x_bar=[0.0], y_bar=[0.0], gamma=GammaSet.full_space(1),
            lam=OperatorSet.from_matrices([[[2.0]]]), delta_star=1.0,
            rho=lambda d: 0.0,
            family=lambda d: (lambda x: LinearMap([[2.0]]),
                              lambda x: np.array([0.0])))
        comp = c.compose_certificates(inner, outer)
        flats = np.sort(comp.lam.flat_generators().ravel())
        assert np.allclose(flats, [-2.0, 2.0], atol=1e-10)
        G2 = lambda x: np.array([2.0 * abs(x[0])])
        rep = c.verify_certificate(G2, comp, [1e-2, 1e-3], 150, seed=6)
        assert rep.accepted

    def test_chaining_point_mismatch(self):
        inner = c.absvalue_qdq()
        outer = c.absvalue_qdq()
        outer.x_bar = np.array([5.0])
        with pytest.raises(ValueError):
            c.compose_certificates(inner, outer)


class TestSingletonCheck:
    def test_smooth_accepted(self):
        assert c.singleton_qdq_check(lambda x: np.array([x[0] ** 2]), [0.0],
                                     LinearMap([[0.0]]))

    def test_kink_rejected(self):
        assert not c.singleton_qdq_check(abs_map, [0.0], LinearMap([[0.0]]))

    def test_kink_away_from_base_accepted(self):
        assert c.singleton_qdq_check(abs_map, [1.0], LinearMap([[1.0]]))


class TestAbundantTransfer:
    def setup_method(self):
        self.F = abs_map
        self.theta = lambda eta: (lambda y: y + 0.5 * eta * np.cos(y))
        self.cert = c.absvalue_qdq()

    def test_transferred_certificate_accepted(self):
        t = c.abundant_transfer(self.F, self.cert, self.theta, seed=7)
        member = c.abundant_membership(self.F, t, self.theta,
                                       delta_grid=[1e-1, 1e-2, 1e-3])
        rep = c.verify_certificate(self.F, t, [1e-1, 1e-2, 1e-3], 100,
                                   seed=8, membership=member)
        assert rep.accepted

    def test_modulus_doubled(self):
        t = c.abundant_transfer(self.F, self.cert, self.theta, seed=7)
        assert t.rho(0.01) == pytest.approx(2.0 * self.cert.rho(0.01))

    def test_bad_retraction_raises(self):
        bad = lambda eta: (lambda y: y + 2.0 * eta)
        with pytest.raises(c.AbundanceError):
            c.abundant_transfer(self.F, self.cert, bad, seed=7)


class TestGammaIntersection:
    def test_full_with_anything(self):
        g = GammaSet.half_line([1.0, 0.0])
        out = c.gamma_intersection(GammaSet.full_space(2), g)
        assert out.kind == GammaSet.HALFLINE

    def test_cone_with_cone(self):
        quad = GammaSet.finite_cone([[1.0, 0.0], [0.0, 1.0]])
        half = GammaSet.finite_cone([[1.0, 0.0], [-1.0, 0.0], [0.0, 1.0]])
        out = c.gamma_intersection(quad, half)
        assert out.kind == GammaSet.CONE
        assert out.contains([1.0, 1.0])
        assert not out.contains([-1.0, 0.0])

    def test_disjoint_halflines_rejected(self):
        g1 = GammaSet.half_line([1.0, 0.0])
        g2 = GammaSet.half_line([0.0, 1.0])
        with pytest.raises(ValueError):
            c.gamma_intersection(g1, g2)
