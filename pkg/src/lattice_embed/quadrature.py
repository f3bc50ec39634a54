"""Quadrature of the double sectional-curvature integral over the unit
tangent sphere, and its ambient-space gradient through the closest-point
pullback."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import AllPairsDegenerateError, BadResolutionError
from .geometry import (
    ManifoldSpec,
    closest_point,
    curvature_tensor,
    gaussian_curvature,
    metric,
)

Array = np.ndarray


def sphere_measure(d: int) -> float:
    """Surface measure of the unit sphere S^{d-1} in R^d."""
    return 2.0 * math.pi ** (d / 2.0) / math.gamma(d / 2.0)


@dataclass(frozen=True, eq=False)
class QuadratureRule:
    """Unit direction nodes and positive weights on S^{d-1}."""

    intrinsic_dim: int
    nodes: Array  # (m, d), unit rows
    weights: Array  # (m,), positive, summing to the sphere measure
    seed: int
    resolution: int

    def validate(self) -> None:
        norms = np.linalg.norm(self.nodes, axis=1)
        if np.max(np.abs(norms - 1.0)) > 1e-12:
            raise ValueError("quadrature nodes must be unit vectors")
        if np.any(self.weights <= 0.0):
            raise ValueError("quadrature weights must be positive")
        total = float(np.sum(self.weights))
        if abs(total - sphere_measure(self.intrinsic_dim)) > 1e-9:
            raise ValueError("quadrature weights must sum to the sphere measure")


def build_quadrature(d: int, resolution: int, seed: int = 0) -> QuadratureRule:
    """Equal-weight rule on S^{d-1}: uniform angles for d=2, seeded
    pseudo-random unit vectors for d >= 3.  Deterministic in (d, resolution,
    seed)."""
    if d < 2:
        raise ValueError("tangent-sphere quadrature needs d >= 2")
    if resolution < 4:
        raise BadResolutionError(f"resolution {resolution} < 4")
    if d == 2:
        angles = 2.0 * math.pi * np.arange(resolution) / resolution
        nodes = np.stack([np.cos(angles), np.sin(angles)], axis=-1)
        weights = np.full(resolution, 2.0 * math.pi / resolution)
    else:
        rng = np.random.default_rng(seed)
        raw = rng.standard_normal((resolution, d))
        nodes = raw / np.linalg.norm(raw, axis=1, keepdims=True)
        weights = np.full(resolution, sphere_measure(d) / resolution)
    rule = QuadratureRule(
        intrinsic_dim=d,
        nodes=nodes,
        weights=weights,
        seed=int(seed),
        resolution=int(resolution),
    )
    rule.validate()
    return rule


def _lexicographic_less(a: Array, b: Array) -> Array:
    """Row-wise: is a strictly lexicographically less than b."""
    m = a.shape[0]
    less = np.zeros(m, dtype=bool)
    decided = np.zeros(m, dtype=bool)
    for col in range(a.shape[1]):
        lo = ~decided & (a[:, col] < b[:, col])
        hi = ~decided & (a[:, col] > b[:, col])
        less |= lo
        decided |= lo | hi
    return less


def curvature_double_integral(
    spec: ManifoldSpec,
    u,
    rule: QuadratureRule,
    eps_parallel: float = 1e-8,
    *,
    method: str = "auto",
    step: float | None = None,
) -> float:
    """Total sectional curvature over tangent-direction pairs at chart(u).

    Quadrature nodes are mapped through a metric-orthonormal basis of the
    tangent space, near-parallel pairs (metric Gram determinant <= eps) are
    rejected, and the retained weight mass is rescaled so the total pair
    weight equals the squared sphere measure.
    """
    u = np.asarray(u, dtype=float).reshape(-1)
    if rule.intrinsic_dim != spec.intrinsic_dim:
        raise ValueError(
            f"rule dimension {rule.intrinsic_dim} != manifold dimension "
            f"{spec.intrinsic_dim}"
        )
    g = metric(spec, u)
    # Mapped node i is B n_i with B^T g B = I, so metric inner products of
    # mapped pairs equal Euclidean inner products of the raw nodes.
    chol = np.linalg.cholesky(g)
    basis = np.linalg.inv(chol).T
    mapped = rule.nodes @ basis.T

    cos = rule.nodes @ rule.nodes.T
    gram = 1.0 - cos * cos
    mask = gram > eps_parallel
    if not np.any(mask):
        raise AllPairsDegenerateError(
            "every node pair rejected as numerically parallel"
        )
    ii, jj = np.nonzero(mask)

    use_analytic = method == "analytic" or (
        method == "auto" and spec.analytic_curvature_available
    )
    if method not in ("auto", "fd", "analytic"):
        raise ValueError(f"unknown curvature method {method!r}")
    if use_analytic:
        kvals = np.full(ii.shape[0], gaussian_curvature(spec, u))
    else:
        g0, _, riemann = curvature_tensor(spec, u, step=step)
        v = mapped[ii]
        w = mapped[jj]
        swap = _lexicographic_less(w, v)
        a = np.where(swap[:, None], w, v)
        b = np.where(swap[:, None], v, w)
        cab = np.einsum("pi,ij,pj->p", a, g0, b)
        b_perp = b - cab[:, None] * a
        nb = np.sqrt(np.einsum("pi,ij,pj->p", b_perp, g0, b_perp))
        e2 = b_perp / nb[:, None]
        numer = np.einsum("lm,lijk,pi,pj,pk,pm->p", g0, riemann, a, e2, e2, a)
        denom = (
            np.einsum("pi,ij,pj->p", a, g0, a)
            * np.einsum("pi,ij,pj->p", e2, g0, e2)
            - np.einsum("pi,ij,pj->p", a, g0, e2) ** 2
        )
        kvals = numer / denom

    total = sphere_measure(spec.intrinsic_dim) ** 2
    weights = rule.weights
    if np.all(weights == weights[0]):
        # Equal-weight rules: rescaled sum == plain mean times total measure.
        return total * float(np.mean(kvals))
    pair_w = weights[ii] * weights[jj]
    return total * float(np.sum(pair_w * kvals) / np.sum(pair_w))


def curvature_integral_pullback(
    spec: ManifoldSpec,
    x,
    rule: QuadratureRule,
    eps_parallel: float = 1e-8,
    *,
    method: str = "auto",
) -> float:
    """The integral evaluated at the closest point on M to the ambient x."""
    proj = closest_point(spec, x)
    return curvature_double_integral(
        spec, proj.u, rule, eps_parallel, method=method
    )


def curvature_integral_gradient(
    spec: ManifoldSpec,
    q,
    rule: QuadratureRule,
    fd_step: float = 1e-3,
    eps_parallel: float = 1e-8,
    *,
    method: str = "auto",
) -> Array:
    """Central-difference ambient gradient of the pullback integral at q."""
    q = np.asarray(q, dtype=float).reshape(-1)
    grad = np.zeros_like(q)
    for k in range(q.shape[0]):
        offset = np.zeros_like(q)
        offset[k] = fd_step
        c_plus = curvature_integral_pullback(
            spec, q + offset, rule, eps_parallel, method=method
        )
        c_minus = curvature_integral_pullback(
            spec, q - offset, rule, eps_parallel, method=method
        )
        grad[k] = (c_plus - c_minus) / (2.0 * fd_step)
    return grad
