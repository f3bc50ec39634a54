"""Three-term embedding energy, its gradient, and the stationarity residuals.

total = alignment + gamma * curvature integral (closest-point pullback)
        + (lam/2) ||grad A||^2

The stationarity (Euler-Lagrange) residual is by construction identical to
the energy gradient, so "stationary point" and "zero residual" are the same
testable statement.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import IndeterminateError, NoSolutionError
from .field import ActivationField, activation_gradient, regularization_gradient
from .geometry import ManifoldSpec, TangentFrame, closest_point, decompose, tangent_frame
from .quadrature import (
    QuadratureRule,
    build_quadrature,
    curvature_double_integral,
    curvature_integral_gradient,
)

Array = np.ndarray


@dataclass(frozen=True)
class EnergyParams:
    """Every free constant of the energy functional plus numerical settings.

    alpha/beta weight the tangential/normal alignment, gamma the curvature
    integral, lam the tube-smoothing regularization, mu the tube
    reinforcement used only in the embedding-PDE diagnostic.
    """

    alpha: float = 1.0
    beta: float = 1.0
    gamma: float = 0.0
    lam: float = 0.0
    mu: float = 0.0
    tube_radius: float = 0.1
    activation_step: float | None = None  # h for activation derivatives
    curvature_step: float = 1e-3  # h for the pullback-gradient differences
    quadrature_resolution: int = 64
    quadrature_seed: int = 0
    eps_parallel: float = 1e-8

    def __post_init__(self):
        if self.alpha <= 0.0 or self.beta <= 0.0:
            raise ValueError("alpha and beta must be positive")
        if self.gamma < 0.0 or self.lam < 0.0:
            raise ValueError("gamma and lam must be nonnegative")
        if self.tube_radius <= 0.0:
            raise ValueError("tube_radius must be positive")

    def field_for(self, spec: ManifoldSpec) -> ActivationField:
        return ActivationField(
            manifold=spec,
            tube_radius=self.tube_radius,
            fd_step=self.activation_step,
        )

    def rule_for(self, spec: ManifoldSpec, seed: int | None = None) -> QuadratureRule:
        return build_quadrature(
            spec.intrinsic_dim,
            self.quadrature_resolution,
            self.quadrature_seed if seed is None else seed,
        )


def alignment(params: EnergyParams, frame: TangentFrame, p, q) -> float:
    """(alpha/2)||(q-p)_T||^2 + (beta/2)||(q-p)_N||^2 at the frame's point."""
    diff = np.asarray(q, dtype=float) - np.asarray(p, dtype=float)
    t_part, n_part = decompose(frame, diff)
    return 0.5 * params.alpha * float(t_part @ t_part) + 0.5 * params.beta * float(
        n_part @ n_part
    )


def alignment_gradient(params: EnergyParams, frame: TangentFrame, p, q) -> Array:
    """alpha (q-p)_T + beta (q-p)_N, with the projection point held fixed."""
    diff = np.asarray(q, dtype=float) - np.asarray(p, dtype=float)
    t_part, n_part = decompose(frame, diff)
    return params.alpha * t_part + params.beta * n_part


def _alignment_value(params: EnergyParams, spec: ManifoldSpec, proj, q) -> float:
    # alpha == beta: Pythagoras collapses the split to (alpha/2)||q - p||^2,
    # so no frame is needed (and none exists at chart-degenerate parameters).
    diff = q - proj.point
    if params.alpha == params.beta:
        return 0.5 * params.alpha * float(diff @ diff)
    frame = tangent_frame(spec, proj.u)
    return alignment(params, frame, proj.point, q)


def _alignment_grad(params: EnergyParams, spec: ManifoldSpec, proj, q) -> Array:
    diff = q - proj.point
    if params.alpha == params.beta:
        return params.alpha * diff
    frame = tangent_frame(spec, proj.u)
    return alignment_gradient(params, frame, proj.point, q)


def total_energy(
    params: EnergyParams,
    spec: ManifoldSpec,
    q,
    *,
    rule: QuadratureRule | None = None,
) -> float:
    """Full three-term energy at an ambient point.

    With gamma = lam = 0 this returns the alignment term bit-identically (the
    other terms are skipped, not added as zeros).
    """
    q = np.asarray(q, dtype=float).reshape(-1)
    proj = closest_point(spec, q)
    value = _alignment_value(params, spec, proj, q)
    if params.gamma != 0.0:
        if rule is None:
            rule = params.rule_for(spec)
        value += params.gamma * curvature_double_integral(
            spec, proj.u, rule, params.eps_parallel
        )
    if params.lam != 0.0:
        grad_a = activation_gradient(params.field_for(spec), q)
        value += 0.5 * params.lam * float(grad_a @ grad_a)
    return value


def total_gradient(
    params: EnergyParams,
    spec: ManifoldSpec,
    q,
    *,
    rule: QuadratureRule | None = None,
) -> Array:
    """Gradient of total_energy: frozen-projection alignment gradient plus
    the finite-difference curvature and regularization contributions."""
    q = np.asarray(q, dtype=float).reshape(-1)
    proj = closest_point(spec, q)
    grad = _alignment_grad(params, spec, proj, q)
    if params.gamma != 0.0:
        if rule is None:
            rule = params.rule_for(spec)
        grad = grad + params.gamma * curvature_integral_gradient(
            spec, q, rule, params.curvature_step, params.eps_parallel
        )
    if params.lam != 0.0:
        grad = grad + regularization_gradient(
            params.field_for(spec), q, params.lam
        )
    return grad


def el_residual(
    params: EnergyParams,
    spec: ManifoldSpec,
    q,
    *,
    rule: QuadratureRule | None = None,
) -> Array:
    """Stationarity residual alpha(q-p)_T + beta(q-p)_N + gamma K(q)
    + lam Delta_A(q); identical to total_gradient by construction, so a
    stationary point is exactly a zero of this vector."""
    return total_gradient(params, spec, q, rule=rule)


def embedding_pde_residual(
    params: EnergyParams,
    spec: ManifoldSpec,
    q,
    *,
    rule: QuadratureRule | None = None,
) -> Array:
    """Tube-reinforced stationarity diagnostic: the alignment gradient plus
    the gamma-weighted curvature gradient plus mu times the activation
    gradient.  On the activation plateau the mu term vanishes identically."""
    q = np.asarray(q, dtype=float).reshape(-1)
    proj = closest_point(spec, q)
    residual = _alignment_grad(params, spec, proj, q)
    if params.gamma != 0.0:
        if rule is None:
            rule = params.rule_for(spec)
        residual = residual + params.gamma * curvature_integral_gradient(
            spec, q, rule, params.curvature_step, params.eps_parallel
        )
    if params.mu != 0.0:
        residual = residual + params.mu * activation_gradient(
            params.field_for(spec), q
        )
    return residual


def reduced_residual(q, lam: float, curvature: float) -> Array:
    """Reduced stationarity equation: component k is -q_k + lam * K."""
    q = np.asarray(q, dtype=float).reshape(-1)
    return -q + lam * curvature


@dataclass(frozen=True, eq=False)
class ReducedSolution:
    lambdas: Array  # per-component weights q_k / K
    consistent: bool
    lambda_star: float | None


def solve_lambda_reduced(q, curvature: float, rtol: float = 1e-9) -> ReducedSolution:
    """Per-component weights solving the reduced equation, and whether they
    agree on a single lambda (relative tolerance rtol)."""
    q = np.asarray(q, dtype=float).reshape(-1)
    if curvature == 0.0:
        if np.any(q != 0.0):
            raise NoSolutionError("zero curvature with nonzero q has no solution")
        raise IndeterminateError("zero curvature with zero q: any weight works")
    lambdas = q / curvature
    scale = float(np.max(np.abs(lambdas)))
    spread = float(np.max(lambdas) - np.min(lambdas))
    consistent = spread <= rtol * max(scale, 1e-300)
    lambda_star = float(np.mean(lambdas)) if consistent else None
    return ReducedSolution(
        lambdas=lambdas, consistent=consistent, lambda_star=lambda_star
    )
