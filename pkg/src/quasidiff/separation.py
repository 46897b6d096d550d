"""Approximating multi-cones, the numeric open-mapping probe, and
set-separation verdicts with their sampling corroboration probe."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree

from .cones import (
    ConvexCone,
    STRONGLY_TRANSVERSAL,
    classify_pair,
    image_cone,
    is_full_space,
    is_transversal,
)
from .core import DimensionMismatchError, GammaSet, LinearMap, OperatorSet

NOT_LOCALLY_SEPARATED = "NotLocallySeparated"
NO_CONCLUSION = "NoConclusion"

MATCH_TOL = 1e-6


class SurjectivityError(ValueError):
    """A generator fails the open-mapping surjectivity hypothesis."""


@dataclass(frozen=True)
class MultiCone:
    """The family of image cones of an operator set applied to a
    direction cone; ``z_ignoring`` is a declared property of the
    generating triple, audited only when a generating map is available."""

    cones: tuple
    z_ignoring: bool = False

    @property
    def dimension(self) -> int:
        return self.cones[0].dimension

    def to_jsonable(self) -> dict:
        return {"cones": [c.to_jsonable() for c in self.cones],
                "z_ignoring": self.z_ignoring}


def build_multicone(lam: OperatorSet, gamma: GammaSet,
                    z_ignoring: bool = False) -> MultiCone:
    """Image cones of every generator; for hull sets the vertices are
    enumerated (conservative for the all-pairs verdict lift)."""
    if gamma.kind not in (GammaSet.FULL, GammaSet.HALFLINE, GammaSet.CONE):
        raise ValueError(f"unsupported direction-set kind {gamma.kind!r}")
    cones = tuple(image_cone(g, gamma) for g in lam.generators)
    return MultiCone(cones, z_ignoring)


def _as_multicone(k) -> MultiCone:
    if isinstance(k, MultiCone):
        return k
    if isinstance(k, ConvexCone):
        return MultiCone((k,), z_ignoring=False)
    raise TypeError(f"expected MultiCone or ConvexCone, got {type(k)!r}")


def separation_verdict(k1, k2) -> str:
    """NotLocallySeparated when every member-cone pair is strongly
    transversal, or every pair is transversal and one side ignores the
    base point; NoConclusion otherwise (there is no converse)."""
    m1 = _as_multicone(k1)
    m2 = _as_multicone(k2)
    if m1.dimension != m2.dimension:
        raise DimensionMismatchError("multi-cones live in different dimensions")
    all_strong = True
    all_transversal = True
    for c1 in m1.cones:
        for c2 in m2.cones:
            if not is_transversal(c1, c2):
                return NO_CONCLUSION
            if all_strong and classify_pair(c1, c2) != STRONGLY_TRANSVERSAL:
                all_strong = False
    if all_strong:
        return NOT_LOCALLY_SEPARATED
    if all_transversal and (m1.z_ignoring or m2.z_ignoring):
        return NOT_LOCALLY_SEPARATED
    return NO_CONCLUSION


def audit_z_ignoring(g_family, gamma: GammaSet, z, deltas=(1e-1, 1e-2, 1e-3),
                     samples: int = 200, seed: int = 0,
                     tol: float = MATCH_TOL) -> bool:
    """Spot-check the declared base-point-avoiding property of a
    generating family: ``g_family(delta)`` returns a continuous map whose
    values on admissible steps of size delta must avoid z."""
    z = np.atleast_1d(np.asarray(z, dtype=float))
    rng = np.random.default_rng(seed)
    origin = np.zeros(gamma.dimension)
    for d in deltas:
        g = g_family(d)
        for x in gamma.sample(rng, origin, d, samples):
            y = np.atleast_1d(np.asarray(g(x), dtype=float))
            if np.linalg.norm(y - z) <= tol:
                return False
    return True


@dataclass(frozen=True)
class ProbeReport:
    a: float
    beta: float
    covered_fraction: float
    misses: tuple
    samples_used: int

    @property
    def passed(self) -> bool:
        return self.covered_fraction == 1.0

    def to_jsonable(self) -> dict:
        return {"a": self.a, "beta": self.beta,
                "covered_fraction": self.covered_fraction,
                "misses": [m.tolist() for m in self.misses],
                "samples_used": self.samples_used,
                "passed": self.passed}


def _target_lattice(y_bar: np.ndarray, a: float, target_grid: int) -> np.ndarray:
    """Axis lattice over y_bar + B_a, always containing the center itself
    (the inclusion is not punctured)."""
    m = y_bar.size
    axes = [np.linspace(-a, a, 2 * target_grid + 1)] * m
    mesh = np.meshgrid(*axes, indexing="ij")
    pts = np.stack([g.ravel() for g in mesh], axis=1)
    pts = pts[np.linalg.norm(pts, axis=1) <= a + 1e-12]
    return y_bar + pts


def open_mapping_probe(F, x_bar, y_bar, gamma: GammaSet, lam: OperatorSet,
                       a: float, beta: float, target_grid: int = 10,
                       domain_samples: int = 20000, seed: int = 0,
                       cover_tol: float | None = None) -> ProbeReport:
    """Sampled check of the covering inclusion y_bar + B_a inside
    F((x_bar + B_{a*beta}) ∩ Gamma).

    The surjectivity hypothesis (every generator maps the direction set
    onto the codomain) is checked first and raises SurjectivityError —
    that signal means the hypotheses fail, not that the probe failed.
    """
    if a <= 0 or beta <= 0:
        raise ValueError("a and beta must be positive")
    x_bar = np.atleast_1d(np.asarray(x_bar, dtype=float))
    y_bar = np.atleast_1d(np.asarray(y_bar, dtype=float))
    for idx, g in enumerate(lam.generators):
        if not is_full_space(image_cone(g, gamma)):
            raise SurjectivityError(
                f"generator {idx} with matrix {g.entries.tolist()} is not "
                "surjective on the direction set")
    if cover_tol is None:
        cover_tol = a / (2.0 * target_grid)

    targets = _target_lattice(y_bar, a, target_grid)
    rng = np.random.default_rng(seed)
    xs = gamma.sample(rng, x_bar, a * beta, domain_samples)
    values = np.array([np.atleast_1d(np.asarray(F(x), dtype=float))
                       for x in xs])
    tree = cKDTree(values)
    dists, _ = tree.query(targets, k=1)
    covered = dists <= cover_tol
    misses = tuple(t for t, ok in zip(targets, covered) if not ok)
    return ProbeReport(a, beta, float(np.mean(covered)), misses,
                       values.shape[0])


def local_separation_probe(sampler1, sampler2, z, radius: float,
                           samples: int, seed: int,
                           match_tol: float = MATCH_TOL) -> dict:
    """Search for a common point of two sampled sets near z, distinct
    from z at the probe's resolution.

    ``sampler1(rng, z, radius, count)`` must return points covering its
    set's trace inside z + B_radius.  Points closer to z than
    ``distinct_tol`` (resolution-coupled) are not accepted as witnesses.
    """
    z = np.atleast_1d(np.asarray(z, dtype=float))
    rng = np.random.default_rng(seed)
    p1 = np.atleast_2d(sampler1(rng, z, radius, samples))
    p2 = np.atleast_2d(sampler2(rng, z, radius, samples))
    distinct_tol = max(0.01 * radius, 10.0 * match_tol)
    tree = cKDTree(p2)
    dists, idx = tree.query(p1, k=1)
    best = None
    best_score = np.inf
    for d, i, p in zip(dists, idx, p1):
        if d > match_tol:
            continue
        mid = 0.5 * (p + p2[i])
        dz = float(np.linalg.norm(mid - z))
        if dz <= distinct_tol or dz > radius + match_tol:
            continue
        if d < best_score:
            best, best_score = mid, d
    if best is not None:
        return {"common_point": best, "separated_at_resolution": False}
    return {"common_point": None, "separated_at_resolution": True}
