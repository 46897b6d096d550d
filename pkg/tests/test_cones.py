"""Unit tests for the cone algebra, cross-checked by a direction-sampling
transversality oracle that never touches the LP solver."""
from __future__ import annotations

import numpy as np
import pytest
from scipy.optimize import nnls

from quasidiff.cones import (
    COMPLEMENTARY_SUBSPACES,
    LINEARLY_SEPARABLE,
    STRONGLY_TRANSVERSAL,
    ConvexCone,
    classify_pair,
    cone_intersection,
    conic_hull,
    image_cone,
    is_full_space,
    is_transversal,
    polar_cone,
    polar_of_cone,
    separating_functional,
)
from quasidiff.core import DimensionMismatchError, GammaSet, LinearMap


def sampling_transversal_oracle(k1, k2, directions=400, seed=0, tol=1e-7):
    """Oracle: K1 - K2 = R^n iff every sampled unit direction is a
    nonnegative combination of gen1 and -gen2 (checked by NNLS)."""
    n = k1.dimension
    cols = np.vstack([k1.generators, -k2.generators]).T
    rng = np.random.default_rng(seed)
    dirs = rng.normal(size=(directions, n))
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    dirs = np.vstack([dirs, np.eye(n), -np.eye(n)])
    for d in dirs:
        _, resid = nnls(cols, d)
        if resid > tol:
            return False
    return True


class TestConicHull:
    def test_drops_zero_vectors(self):
        c = conic_hull([[0.0, 0.0], [1.0, 0.0]])
        assert c.generators.shape == (1, 2)

    def test_contains(self):
        c = conic_hull([[1.0, 0.0], [0.0, 1.0]])
        assert c.contains([2.0, 3.0])
        assert not c.contains([-1.0, 0.0])

    def test_trivial_cone(self):
        c = conic_hull([], dimension=2)
        assert c.is_trivial
        assert c.contains([0.0, 0.0])
        assert not c.contains([1.0, 0.0])


class TestPolar:
    def test_polar_of_first_quadrant(self):
        c = conic_hull([[1.0, 0.0], [0.0, 1.0]])
        p = polar_of_cone(c)
        # polar is the third quadrant
        assert p.contains([-1.0, -1.0])
        assert p.contains([-1.0, 0.0])
        assert not p.contains([1.0, 0.0])

    def test_polar_of_halfline(self):
        p = polar_cone([[1.0, 0.0]])
        # the half-plane x <= 0
        assert p.contains([-1.0, 5.0])
        assert p.contains([0.0, -2.0])
        assert not p.contains([0.5, 0.0])

    def test_double_polar_of_subspace(self):
        line = conic_hull([[1.0, 2.0], [-1.0, -2.0]])
        pp = polar_of_cone(polar_of_cone(line))
        for g in line.generators:
            assert pp.contains(g)
        for g in pp.generators:
            assert line.contains(g)


class TestTransversality:
    def test_half_plane_and_opposing_ray(self):
        k1 = conic_hull([[1.0, 0.0], [-1.0, 0.0], [0.0, 1.0]])
        k2 = conic_hull([[0.0, 1.0]])
        # K1 - K2 = upper half-plane + downward ray = the whole plane
        assert is_transversal(k1, k2)

    def test_two_rays_not_transversal(self):
        k1 = conic_hull([[1.0, 0.0]])
        k2 = conic_hull([[-1.0, 0.0]])
        assert not is_transversal(k1, k2)

    def test_matches_sampling_oracle_random(self):
        rng = np.random.default_rng(21)
        for i in range(40):
            n = int(rng.integers(2, 4))
            k1 = conic_hull(rng.normal(size=(rng.integers(1, n + 2), n)), n)
            k2 = conic_hull(rng.normal(size=(rng.integers(1, n + 2), n)), n)
            assert is_transversal(k1, k2) == \
                sampling_transversal_oracle(k1, k2, seed=i)

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatchError):
            is_transversal(conic_hull([[1.0]], 1), conic_hull([[1.0, 0.0]], 2))


class TestSeparation:
    def test_separable_pair_has_valid_certificate(self):
        k1 = conic_hull([[1.0, 0.0]])
        k2 = conic_hull([[-1.0, 1.0]])
        cert = separating_functional(k1, k2)
        assert cert is not None
        assert cert.validate(k1, k2)

    def test_transversal_pair_has_no_certificate(self):
        k1 = conic_hull([[1.0, 0.0], [-1.0, 0.0], [0.0, 1.0]])
        k2 = conic_hull([[0.0, 1.0]])
        assert separating_functional(k1, k2) is None


class TestClassifyPair:
    def test_strongly_transversal(self):
        k1 = conic_hull([[1.0, 0.0], [-1.0, 0.0], [0.0, 1.0]])
        k2 = conic_hull([[0.0, 1.0]])
        assert classify_pair(k1, k2) == STRONGLY_TRANSVERSAL

    def test_complementary_subspaces(self):
        k1 = conic_hull([[1.0, 0.0], [-1.0, 0.0]])
        k2 = conic_hull([[0.0, 1.0], [0.0, -1.0]])
        assert classify_pair(k1, k2) == COMPLEMENTARY_SUBSPACES

    def test_linearly_separable(self):
        k1 = conic_hull([[1.0, 0.0]])
        k2 = conic_hull([[-1.0, 1.0]])
        assert classify_pair(k1, k2) == LINEARLY_SEPARABLE


class TestImageCone:
    def test_identity_on_quadrant(self):
        gamma = GammaSet.finite_cone([[1.0, 0.0], [0.0, 1.0]])
        img = image_cone(LinearMap(np.eye(2)), gamma)
        assert img.contains([1.0, 1.0])
        assert not img.contains([-1.0, 0.0])

    def test_full_space_through_1x2_map(self):
        img = image_cone(LinearMap([[1.0, -1.0]]), GammaSet.full_space(2))
        assert is_full_space(img)

    def test_zero_map_image_is_trivial(self):
        img = image_cone(LinearMap([[0.0, 0.0]]), GammaSet.full_space(2))
        assert not is_full_space(img)

    def test_box_gamma_rejected(self):
        with pytest.raises(ValueError):
            image_cone(LinearMap(np.eye(2)), GammaSet.box([0, 0], [1, 1]))


class TestConeIntersection:
    def test_quadrant_with_half_plane(self):
        quad = conic_hull([[1.0, 0.0], [0.0, 1.0]])
        half = conic_hull([[1.0, 0.0], [-1.0, 0.0], [0.0, 1.0]])
        inter = cone_intersection(quad, half)
        assert inter.contains([1.0, 1.0])
        assert not inter.contains([-1.0, 0.5])

    def test_opposite_halflines_trivial(self):
        inter = cone_intersection(conic_hull([[1.0, 0.0]]),
                                  conic_hull([[-1.0, 0.0]]))
        assert not inter.contains([1.0, 0.0])
        assert not inter.contains([-1.0, 0.0])
