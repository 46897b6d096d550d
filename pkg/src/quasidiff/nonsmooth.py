"""Mollification and sampling estimators: finite-difference Jacobians,
Clarke generalized Jacobians, pointwise and set-valued Lie brackets, and
the commutator-flow direction quotient."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.stats import qmc

from .core import (
    DomainEscapeError,
    EstimatorFailedError,
    LinearMap,
    OperatorSet,
    convex_hull_points,
)
from .flows import FlowSolverConfig, VectorField, default_config, flow, \
    multiflow_commutator

DIFFERENTIABILITY_THRESHOLD = 1e-3


@dataclass(frozen=True)
class MollifierConfig:
    eta: float
    quadrature_points: int = 512
    seed: int = 0


@dataclass(frozen=True)
class JacobianSample:
    base_point: np.ndarray
    jacobian: LinearMap
    fd_step: float
    differentiability_score: float


def _bump(v: np.ndarray) -> float:
    r2 = float(v @ v)
    if r2 >= 1.0:
        return 0.0
    return float(np.exp(-1.0 / (1.0 - r2)))


def fd_jacobian(f, x, h: float, dimension: int | None = None) -> LinearMap:
    """Central-difference Jacobian of f at x with step h."""
    x = np.asarray(x, dtype=float)
    n = x.size
    domain = getattr(f, "domain", None)
    cols = []
    for i in range(n):
        e = np.zeros(n)
        e[i] = h
        if domain is not None and not (domain.contains(x + e) and
                                       domain.contains(x - e)):
            raise DomainEscapeError("finite-difference stencil leaves domain",
                                    point=x)
        cols.append((np.asarray(f(x + e), dtype=float)
                     - np.asarray(f(x - e), dtype=float)) / (2.0 * h))
    return LinearMap(np.column_stack(cols))


def differentiability_score(f, x, h: float) -> float:
    """Two-scale agreement of central differences; near zero on locally
    linear neighborhoods."""
    j1 = fd_jacobian(f, x, h).entries
    j2 = fd_jacobian(f, x, h / 2.0).entries
    return float(np.max(np.abs(j1 - j2)) / (1.0 + np.max(np.abs(j1))))


def _quadrature_rule(n: int, count: int, seed: int):
    """Symmetric quasi-Monte-Carlo bump quadrature on the unit ball.

    Points come in +-pairs and weights are normalized to unit total mass,
    so constants are reproduced exactly and odd moments vanish.
    """
    half = max(count // 2, 8)
    sampler = qmc.Halton(d=n, seed=seed)
    raw = 2.0 * sampler.random(4 * half) - 1.0
    inside = raw[np.linalg.norm(raw, axis=1) < 0.999][:half]
    if inside.shape[0] == 0:
        inside = np.zeros((1, n))
    pts = np.vstack([inside, -inside])
    weights = np.array([_bump(v) for v in pts])
    total = weights.sum()
    if total <= 0:
        raise EstimatorFailedError("degenerate mollifier quadrature")
    return pts, weights / total


def mollify(f: VectorField, cfg: MollifierConfig) -> VectorField:
    """Convolve a field with the rescaled bump kernel at width eta."""
    pts, weights = _quadrature_rule(f.dimension, cfg.quadrature_points, cfg.seed)

    def evaluator(x, pts=pts, weights=weights, eta=cfg.eta):
        acc = np.zeros(f.dimension)
        for w, v in zip(weights, pts):
            y = x + eta * v
            if not f.domain.contains(y):
                raise DomainEscapeError("mollification stencil leaves domain",
                                        point=y)
            acc += w * f(y)
        return acc

    return VectorField(f.dimension, evaluator, f.domain, f.lipschitz_estimate,
                       label=f"mollified({f.label},{cfg.eta})")


def lie_bracket_pointwise(f: VectorField, g: VectorField, x, h: float) -> np.ndarray:
    """[f, g](x) = Dg(x) f(x) - Df(x) g(x) via central differences."""
    x = np.asarray(x, dtype=float)
    jf = fd_jacobian(f, x, h)
    jg = fd_jacobian(g, x, h)
    return jg.apply(f(x)) - jf.apply(g(x))


def _ball_samples(rng: np.random.Generator, center: np.ndarray, radius: float,
                  count: int) -> np.ndarray:
    n = center.size
    d = rng.normal(size=(count, n))
    d /= np.maximum(np.linalg.norm(d, axis=1, keepdims=True), 1e-300)
    r = radius * rng.uniform(size=(count, 1)) ** (1.0 / n)
    return center + d * r


def _vertex_reduce(flats: np.ndarray) -> np.ndarray:
    """Reduce a generator cloud to hull vertices when the flattened
    dimension is desk-scale, else just deduplicate."""
    if flats.shape[1] <= 4 and flats.shape[0] > flats.shape[1] + 1:
        return convex_hull_points(flats)
    uniq = []
    for p in flats:
        if not any(np.linalg.norm(p - q) <= 1e-10 for q in uniq):
            uniq.append(p)
    return np.array(uniq)


def clarke_jacobian_estimate(f, x_bar, radius: float, samples: int,
                             seed: int, fd_step: float | None = None,
                             dimension: int | None = None,
                             score_threshold: float = DIFFERENTIABILITY_THRESHOLD
                             ) -> OperatorSet:
    """Hull of differentiability-scored Jacobians sampled around x_bar."""
    x_bar = np.atleast_1d(np.asarray(x_bar, dtype=float))
    h = fd_step if fd_step is not None else max(radius * 1e-3, 1e-12)
    rng = np.random.default_rng(seed)
    pts = _ball_samples(rng, x_bar, radius, samples)
    kept = []
    shape = None
    for x in pts:
        try:
            score = differentiability_score(f, x, h)
        except DomainEscapeError:
            continue
        if score > score_threshold:
            continue
        jac = fd_jacobian(f, x, h)
        shape = jac.entries.shape
        kept.append(jac.flat())
    if not kept:
        raise EstimatorFailedError("every sample failed the differentiability "
                                   "score; try a smaller fd step")
    verts = _vertex_reduce(np.array(kept))
    gens = tuple(LinearMap(v.reshape(shape)) for v in verts)
    return OperatorSet(gens, convex_closure=True).canonicalized()


def set_lie_bracket_estimate(f: VectorField, g: VectorField, q, radius: float,
                             samples: int, seed: int,
                             fd_step: float | None = None,
                             score_threshold: float = DIFFERENTIABILITY_THRESHOLD
                             ) -> OperatorSet:
    """Hull of sampled pointwise brackets near q, as n x 1 operators."""
    q = np.atleast_1d(np.asarray(q, dtype=float))
    h = fd_step if fd_step is not None else max(radius * 1e-3, 1e-12)
    rng = np.random.default_rng(seed)
    pts = _ball_samples(rng, q, radius, samples)
    kept = []
    for x in pts:
        try:
            score = max(differentiability_score(f, x, h),
                        differentiability_score(g, x, h))
        except DomainEscapeError:
            continue
        if score > score_threshold:
            continue
        kept.append(lie_bracket_pointwise(f, g, x, h))
    if not kept:
        raise EstimatorFailedError("every sample failed the differentiability "
                                   "score; try a smaller fd step")
    verts = _vertex_reduce(np.array(kept))
    return OperatorSet.from_vectors(verts, convex_closure=True).canonicalized()


def bracket_flow_direction(f: VectorField, g: VectorField, q, eps: float,
                           cfg: FlowSolverConfig | None = None) -> np.ndarray:
    """(Psi_sqrt(eps)(q) - q) / eps, the measurable direction quotient of
    the commutator flow."""
    if eps <= 0:
        raise ValueError("eps must be positive")
    t = float(np.sqrt(eps))
    if cfg is None:
        cfg = default_config(t)
    q = np.atleast_1d(np.asarray(q, dtype=float))
    return (multiflow_commutator(f, g, q, t, cfg) - q) / eps


def mollified_commutator_flow(f: VectorField, g: VectorField, q, eps: float,
                              quadrature_points: int = 256, seed: int = 0,
                              cfg: FlowSolverConfig | None = None) -> np.ndarray:
    """Commutator flow of the mollified fields with the width coupling
    eta = eps^2."""
    eta = eps * eps
    f_s = mollify(f, MollifierConfig(eta, quadrature_points, seed))
    g_s = mollify(g, MollifierConfig(eta, quadrature_points, seed + 1))
    t = float(np.sqrt(eps))
    if cfg is None:
        cfg = default_config(t, legs_per_unit=50)
    q = np.atleast_1d(np.asarray(q, dtype=float))
    return multiflow_commutator(f_s, g_s, q, t, cfg)
