"""Manifold charts, tangent/normal frames, projection, and curvature kernels.

A manifold is a parametric chart over a rectangular parameter box.  The
built-ins (plane, sphere, torus) carry analytic Jacobians, closed-form
closest-point projection, and exact Gaussian curvature; generic charts fall
back to damped Gauss-Newton projection and a finite-difference curvature
pipeline built from central differences of the pullback metric.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, NamedTuple, Sequence

import numpy as np

from .errors import (
    DegeneratePlaneError,
    DegenerateProjectionWarning,
    NoConvergenceError,
    OutOfDomainError,
    RankDeficientError,
    StencilOutOfDomainError,
)
from .expressions import compile_chart

Array = np.ndarray

# Relative step for finite-difference chart Jacobians (cbrt(eps) scaling).
_FD_JACOBIAN_REL_STEP = 6.0e-6
# Relative step for metric derivatives, times the per-axis domain extent.
_GEO_REL_STEP = 1.0e-4
_BOUNDS_TOL = 1e-9
_TIE_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class ManifoldSpec:
    """Immutable description of a d-manifold embedded in R^n via one chart."""

    kind: str
    ambient_dim: int
    intrinsic_dim: int
    chart_fn: Callable[[Array], Array]
    param_bounds: Array  # (d, 2) rows of (lower, upper)
    analytic_curvature_available: bool = False
    periodic: tuple[bool, ...] = ()
    jacobian_fn: Callable[[Array], Array] | None = None
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        bounds = np.atleast_2d(np.asarray(self.param_bounds, dtype=float))
        object.__setattr__(self, "param_bounds", bounds)
        d, n = self.intrinsic_dim, self.ambient_dim
        if not 1 <= d <= n:
            raise ValueError(f"need 1 <= d <= n, got d={d}, n={n}")
        if bounds.shape != (d, 2):
            raise ValueError(f"param_bounds must be ({d}, 2), got {bounds.shape}")
        if np.any(bounds[:, 0] >= bounds[:, 1]):
            raise ValueError("each parameter axis needs lower < upper")
        if not self.periodic:
            object.__setattr__(self, "periodic", (False,) * d)
        elif len(self.periodic) != d:
            raise ValueError("periodic flags must match intrinsic_dim")
        self._check_rank_on_grid()

    def _check_rank_on_grid(self):
        # Coarse interior sweep; catches degenerate user charts at build time.
        axes = [
            np.linspace(lo, hi, 5)[1:-1] for lo, hi in self.param_bounds
        ]
        grids = np.meshgrid(*axes, indexing="ij")
        pts = np.stack([g.ravel() for g in grids], axis=-1)
        for u in pts:
            jac = _jacobian(self, u)
            sv = np.linalg.svd(jac, compute_uv=False)
            if sv[-1] <= 1e-8 * max(sv[0], 1.0):
                raise RankDeficientError(
                    f"chart Jacobian rank-deficient at interior parameter {u}"
                )

    @property
    def extents(self) -> Array:
        return self.param_bounds[:, 1] - self.param_bounds[:, 0]

    @classmethod
    def plane(cls, bounds=((-10.0, 10.0), (-10.0, 10.0))) -> "ManifoldSpec":
        """The z=0 plane in R^3, chart (u1, u2) -> (u1, u2, 0)."""
        return cls(
            kind="plane",
            ambient_dim=3,
            intrinsic_dim=2,
            chart_fn=_plane_chart,
            param_bounds=np.asarray(bounds, dtype=float),
            analytic_curvature_available=True,
            jacobian_fn=lambda u: np.array(
                [[1.0, 0.0], [0.0, 1.0], [0.0, 0.0]]
            ),
        )

    @classmethod
    def sphere(cls, radius: float = 1.0) -> "ManifoldSpec":
        """Round sphere of the given radius, colatitude/longitude chart."""
        if radius <= 0:
            raise ValueError("sphere radius must be positive")
        r = float(radius)

        def chart(u):
            u = np.asarray(u, dtype=float)
            th, ph = u[..., 0], u[..., 1]
            return np.stack(
                [
                    r * np.sin(th) * np.cos(ph),
                    r * np.sin(th) * np.sin(ph),
                    r * np.cos(th),
                ],
                axis=-1,
            )

        def jacobian(u):
            th, ph = float(u[0]), float(u[1])
            st, ct = math.sin(th), math.cos(th)
            sp, cp = math.sin(ph), math.cos(ph)
            return np.array(
                [
                    [r * ct * cp, -r * st * sp],
                    [r * ct * sp, r * st * cp],
                    [-r * st, 0.0],
                ]
            )

        return cls(
            kind="sphere",
            ambient_dim=3,
            intrinsic_dim=2,
            chart_fn=chart,
            param_bounds=np.array([[0.0, math.pi], [0.0, 2.0 * math.pi]]),
            analytic_curvature_available=True,
            periodic=(False, True),
            jacobian_fn=jacobian,
            params={"radius": r},
        )

    @classmethod
    def torus(
        cls, major_radius: float = 2.0, minor_radius: float = 0.5
    ) -> "ManifoldSpec":
        """Standard torus; u1 is the toroidal angle, u2 the poloidal angle."""
        if not 0 < minor_radius < major_radius:
            raise ValueError("torus needs 0 < minor_radius < major_radius")
        big, small = float(major_radius), float(minor_radius)

        def chart(u):
            u = np.asarray(u, dtype=float)
            a, b = u[..., 0], u[..., 1]
            ring = big + small * np.cos(b)
            return np.stack(
                [ring * np.cos(a), ring * np.sin(a), small * np.sin(b)], axis=-1
            )

        def jacobian(u):
            a, b = float(u[0]), float(u[1])
            sa, ca = math.sin(a), math.cos(a)
            sb, cb = math.sin(b), math.cos(b)
            ring = big + small * cb
            return np.array(
                [
                    [-ring * sa, -small * sb * ca],
                    [ring * ca, -small * sb * sa],
                    [0.0, small * cb],
                ]
            )

        return cls(
            kind="torus",
            ambient_dim=3,
            intrinsic_dim=2,
            chart_fn=chart,
            param_bounds=np.array(
                [[0.0, 2.0 * math.pi], [0.0, 2.0 * math.pi]]
            ),
            analytic_curvature_available=True,
            periodic=(True, True),
            jacobian_fn=jacobian,
            params={"major_radius": big, "minor_radius": small},
        )

    @classmethod
    def parametric(
        cls,
        bounds: Sequence[Sequence[float]],
        expressions: Sequence[str] | None = None,
        chart: Callable[[Array], Array] | None = None,
        jacobian: Callable[[Array], Array] | None = None,
        ambient_dim: int | None = None,
        periodic: Sequence[bool] | None = None,
    ) -> "ManifoldSpec":
        """Chart from expression strings (preferred; analytic Jacobian) or a
        raw callable (finite-difference Jacobian unless one is supplied)."""
        bounds = np.asarray(bounds, dtype=float)
        d = bounds.shape[0]
        if expressions is not None:
            chart, jacobian = compile_chart(list(expressions), d)
            n = len(expressions)
        elif chart is not None:
            probe = np.asarray(chart(bounds.mean(axis=1)), dtype=float)
            n = ambient_dim if ambient_dim is not None else probe.shape[-1]
        else:
            raise ValueError("parametric manifold needs expressions or a chart")
        return cls(
            kind="parametric",
            ambient_dim=n,
            intrinsic_dim=d,
            chart_fn=chart,
            param_bounds=bounds,
            analytic_curvature_available=False,
            periodic=tuple(periodic) if periodic is not None else (),
            jacobian_fn=jacobian,
        )


def make_manifold(kind: str, **params) -> ManifoldSpec:
    """Dispatch constructor used by config/CLI ingestion."""
    kind = kind.lower()
    if kind == "plane":
        return ManifoldSpec.plane(**params)
    if kind == "sphere":
        return ManifoldSpec.sphere(**params)
    if kind == "torus":
        return ManifoldSpec.torus(**params)
    if kind == "parametric":
        return ManifoldSpec.parametric(**params)
    raise ValueError(f"unknown manifold kind {kind!r}")


@dataclass(frozen=True, eq=False)
class TangentFrame:
    """Orthonormal bases of the tangent and normal spaces at a point."""

    point: Array  # (n,)
    tangent_basis: Array  # (d, n) rows
    normal_basis: Array  # (n - d, n) rows

    def validate(self, tol: float = 1e-10) -> None:
        basis = np.vstack([self.tangent_basis, self.normal_basis])
        n = self.point.shape[0]
        if basis.shape != (n, n):
            raise RankDeficientError("frame does not span the ambient space")
        gram = basis @ basis.T
        if np.max(np.abs(gram - np.eye(n))) > tol:
            raise RankDeficientError("frame basis is not orthonormal")


class Projection(NamedTuple):
    point: Array  # closest point on M
    u: Array  # chart parameter of the closest point


def _check_param(spec: ManifoldSpec, u, *, name: str = "u") -> Array:
    u = np.asarray(u, dtype=float).reshape(-1)
    if u.shape[0] != spec.intrinsic_dim:
        raise OutOfDomainError(
            f"{name} has dimension {u.shape[0]}, expected {spec.intrinsic_dim}"
        )
    lo, hi = spec.param_bounds[:, 0], spec.param_bounds[:, 1]
    slack = _BOUNDS_TOL * spec.extents
    if np.any(u < lo - slack) or np.any(u > hi + slack):
        raise OutOfDomainError(f"{name}={u} outside parameter bounds")
    return u


def _plane_chart(u):
    u = np.asarray(u, dtype=float)
    out = np.zeros(u.shape[:-1] + (3,))
    out[..., 0] = u[..., 0]
    out[..., 1] = u[..., 1]
    return out


def _jacobian(spec: ManifoldSpec, u: Array, step: float | None = None) -> Array:
    if spec.jacobian_fn is not None:
        return np.asarray(spec.jacobian_fn(u), dtype=float)
    steps = (
        np.full(spec.intrinsic_dim, step)
        if step is not None
        else _FD_JACOBIAN_REL_STEP * spec.extents
    )
    cols = []
    for k in range(spec.intrinsic_dim):
        offset = np.zeros(spec.intrinsic_dim)
        offset[k] = steps[k]
        cols.append(
            (spec.chart_fn(u + offset) - spec.chart_fn(u - offset))
            / (2.0 * steps[k])
        )
    return np.stack(cols, axis=-1)


def chart_eval(spec: ManifoldSpec, u) -> Array:
    """Evaluate the chart at a parameter point inside the parameter box."""
    u = _check_param(spec, u)
    return np.asarray(spec.chart_fn(u), dtype=float)


def chart_jacobian(spec: ManifoldSpec, u) -> Array:
    """(n, d) matrix of chart partials, analytic when the spec provides it."""
    u = _check_param(spec, u)
    return _jacobian(spec, u)


def _orthonormalize_rows(rows: Array, pivot_tol: float) -> tuple[Array, list[int]]:
    """Modified Gram-Schmidt with one re-orthogonalization pass.

    Returns the orthonormal rows and the indices of inputs that survived
    (residual norm above pivot_tol).
    """
    kept: list[Array] = []
    survivors: list[int] = []
    for idx, vec in enumerate(rows):
        w = np.array(vec, dtype=float)
        for _ in range(2):
            for b in kept:
                w = w - (w @ b) * b
        nrm = float(np.linalg.norm(w))
        if nrm <= pivot_tol:
            continue
        kept.append(w / nrm)
        survivors.append(idx)
    return (np.array(kept) if kept else np.zeros((0, rows.shape[1]))), survivors


def tangent_frame(spec: ManifoldSpec, u) -> TangentFrame:
    """Orthonormal tangent/normal frame at chart(u).

    The tangent basis is the ordered Gram-Schmidt orthonormalization of the
    chart Jacobian columns; the normal basis completes it by orthonormalizing
    the ambient coordinate axes against it, skipping near-zero residuals.
    """
    u = _check_param(spec, u)
    jac = _jacobian(spec, u)
    col_scale = max(float(np.max(np.linalg.norm(jac, axis=0))), 1e-300)
    tangent, kept = _orthonormalize_rows(jac.T, pivot_tol=1e-8 * col_scale)
    if len(kept) < spec.intrinsic_dim:
        raise RankDeficientError(
            f"chart Jacobian has column rank {len(kept)} < {spec.intrinsic_dim} "
            f"at u={u}"
        )
    n = spec.ambient_dim
    normal_rows: list[Array] = []
    for k in range(n):
        if len(normal_rows) == n - spec.intrinsic_dim:
            break
        w = np.zeros(n)
        w[k] = 1.0
        for _ in range(2):
            for b in tangent:
                w = w - (w @ b) * b
            for b in normal_rows:
                w = w - (w @ b) * b
        nrm = float(np.linalg.norm(w))
        if nrm < 1e-8:
            continue
        normal_rows.append(w / nrm)
    if len(normal_rows) != n - spec.intrinsic_dim:
        raise RankDeficientError(f"could not complete normal basis at u={u}")
    frame = TangentFrame(
        point=np.asarray(spec.chart_fn(u), dtype=float),
        tangent_basis=tangent,
        normal_basis=np.array(normal_rows) if normal_rows else np.zeros((0, n)),
    )
    frame.validate()
    return frame


def decompose(frame: TangentFrame, vec) -> tuple[Array, Array]:
    """Split an ambient vector into tangential and normal parts at the frame."""
    vec = np.asarray(vec, dtype=float)
    t_part = frame.tangent_basis.T @ (frame.tangent_basis @ vec)
    n_part = frame.normal_basis.T @ (frame.normal_basis @ vec)
    return t_part, n_part


# ---------------------------------------------------------------------------
# Closest-point projection
# ---------------------------------------------------------------------------


def _wrap_parameter(spec: ManifoldSpec, u: Array) -> Array:
    out = np.array(u, dtype=float)
    for k, per in enumerate(spec.periodic):
        lo, hi = spec.param_bounds[k]
        if per:
            out[k] = lo + np.mod(out[k] - lo, hi - lo)
        else:
            out[k] = min(max(out[k], lo), hi)
    return out


def _closest_point_plane(spec, q):
    lo, hi = spec.param_bounds[:, 0], spec.param_bounds[:, 1]
    u = np.clip(q[:2], lo, hi)
    return Projection(point=np.array([u[0], u[1], 0.0]), u=u)


def _closest_point_sphere(spec, q):
    r = spec.params["radius"]
    nq = float(np.linalg.norm(q))
    if nq <= _TIE_TOL:
        warnings.warn(
            "query equidistant from the whole sphere; returning the "
            "smallest-lexicographic parameter",
            DegenerateProjectionWarning,
            stacklevel=3,
        )
        u = np.zeros(2)
        return Projection(point=np.asarray(spec.chart_fn(u), float), u=u)
    theta = math.acos(min(max(q[2] / nq, -1.0), 1.0))
    phi = math.atan2(q[1], q[0]) % (2.0 * math.pi)
    u = np.array([theta, phi])
    return Projection(point=(r / nq) * np.asarray(q, float), u=u)


def _closest_point_torus(spec, q):
    big = spec.params["major_radius"]
    small = spec.params["minor_radius"]
    rho = math.hypot(q[0], q[1])
    if rho <= _TIE_TOL:
        warnings.warn(
            "query on the torus axis; returning the smallest-lexicographic "
            "toroidal angle",
            DegenerateProjectionWarning,
            stacklevel=3,
        )
        # Equidistant in the toroidal angle; the poloidal distance
        # d^2(b) = const + 2 small (big cos b - q_z sin b) has the closed-form
        # minimizer b = pi - atan2(q_z, big).
        a = 0.0
        b = math.pi - math.atan2(q[2], big)
        u = _wrap_parameter(spec, np.array([a, b]))
        return Projection(point=np.asarray(spec.chart_fn(u), float), u=u)
    a = math.atan2(q[1], q[0]) % (2.0 * math.pi)
    ring_pt = np.array([big * q[0] / rho, big * q[1] / rho, 0.0])
    w = np.asarray(q, float) - ring_pt
    nw = float(np.linalg.norm(w))
    if nw <= _TIE_TOL:
        warnings.warn(
            "query on the torus core circle; returning the "
            "smallest-lexicographic poloidal angle",
            DegenerateProjectionWarning,
            stacklevel=3,
        )
        b = 0.0
    else:
        b = math.atan2(q[2], rho - big) % (2.0 * math.pi)
    u = np.array([a, b])
    return Projection(point=np.asarray(spec.chart_fn(u), float), u=u)


def _coarse_seed(spec: ManifoldSpec, q: Array) -> Array:
    per_axis = max(4, min(32, int(round(4096 ** (1.0 / spec.intrinsic_dim)))))
    axes = [np.linspace(lo, hi, per_axis) for lo, hi in spec.param_bounds]
    grids = np.meshgrid(*axes, indexing="ij")
    pts = np.stack([g.ravel() for g in grids], axis=-1)
    images = np.asarray(spec.chart_fn(pts), dtype=float)
    d2 = np.sum((images - q) ** 2, axis=-1)
    return pts[int(np.argmin(d2))]


def closest_point(
    spec: ManifoldSpec,
    q,
    u_init=None,
    *,
    max_iters: int = 100,
    step_tol: float = 1e-12,
) -> Projection:
    """Closest point on M to the ambient point q.

    Built-ins use closed forms (equidistant ties are warned about and broken
    toward the smallest-lexicographic parameter).  Generic charts run damped
    Gauss-Newton from u_init (or from the best point of a coarse parameter
    grid), with steps clamped into the parameter box.
    """
    q = np.asarray(q, dtype=float).reshape(-1)
    if q.shape[0] != spec.ambient_dim or not np.all(np.isfinite(q)):
        raise ValueError("query point must be a finite ambient vector")
    if spec.kind == "plane":
        return _closest_point_plane(spec, q)
    if spec.kind == "sphere":
        return _closest_point_sphere(spec, q)
    if spec.kind == "torus":
        return _closest_point_torus(spec, q)

    lo, hi = spec.param_bounds[:, 0], spec.param_bounds[:, 1]
    u = (
        _check_param(spec, u_init, name="u_init")
        if u_init is not None
        else _coarse_seed(spec, q)
    )
    u = np.clip(u, lo, hi)

    def objective(v):
        r = np.asarray(spec.chart_fn(v), dtype=float) - q
        return float(r @ r)

    f = objective(u)
    for _ in range(max_iters):
        residual = np.asarray(spec.chart_fn(u), dtype=float) - q
        jac = _jacobian(spec, u)
        grad = jac.T @ residual
        hess = jac.T @ jac
        try:
            direction = np.linalg.solve(hess, -grad)
        except np.linalg.LinAlgError:
            direction = np.linalg.lstsq(hess, -grad, rcond=None)[0]
        t = 1.0
        moved = False
        for _ in range(60):
            cand = np.clip(u + t * direction, lo, hi)
            f_cand = objective(cand)
            if f_cand < f:
                applied = np.linalg.norm(cand - u)
                u, f = cand, f_cand
                moved = True
                break
            t *= 0.5
        if not moved:
            # no decrease at any damping: stationary to working precision
            return Projection(
                point=np.asarray(spec.chart_fn(u), dtype=float), u=u
            )
        if applied < step_tol:
            return Projection(
                point=np.asarray(spec.chart_fn(u), dtype=float), u=u
            )
    raise NoConvergenceError(
        f"Gauss-Newton projection did not converge within {max_iters} iterations"
    )


def distance_to_manifold(spec: ManifoldSpec, q) -> float:
    proj = closest_point(spec, q)
    return float(np.linalg.norm(np.asarray(q, dtype=float) - proj.point))


# ---------------------------------------------------------------------------
# Curvature
# ---------------------------------------------------------------------------


def metric(spec: ManifoldSpec, u) -> Array:
    """Pullback metric g = J^T J at a parameter point."""
    u = np.asarray(u, dtype=float)
    jac = _jacobian(spec, u)
    return jac.T @ jac


def _geo_steps(spec: ManifoldSpec, step: float | None) -> Array:
    if step is not None:
        return np.full(spec.intrinsic_dim, float(step))
    return _GEO_REL_STEP * spec.extents


def _require_stencil_interior(spec: ManifoldSpec, u: Array, widths: Array):
    for k, per in enumerate(spec.periodic):
        if per:
            continue
        lo, hi = spec.param_bounds[k]
        if u[k] - widths[k] < lo or u[k] + widths[k] > hi:
            raise StencilOutOfDomainError(
                f"axis {k}: stencil of half-width {widths[k]:g} at u={u} "
                f"leaves [{lo:g}, {hi:g}]"
            )


def curvature_tensor(
    spec: ManifoldSpec, u, *, step: float | None = None
) -> tuple[Array, Array, Array]:
    """Metric, Christoffel symbols, and coordinate Riemann tensor at u.

    Everything is assembled from central differences of the metric with
    per-axis step h:  Gamma^k_ij = 1/2 g^{kl} (d_i g_jl + d_j g_il - d_l g_ij)
    and R^l_ijk = d_i Gamma^l_jk - d_j Gamma^l_ik
                  + Gamma^l_im Gamma^m_jk - Gamma^l_jm Gamma^m_ik,
    with the Christoffel derivatives expanded through first and second metric
    derivatives so only one finite-difference layer touches the chart.
    """
    u = np.asarray(u, dtype=float).reshape(-1)
    d = spec.intrinsic_dim
    h = _geo_steps(spec, step)
    _require_stencil_interior(spec, u, h * (1.0 + 1e-9))

    def g_at(offset):
        return metric(spec, u + offset)

    eye = np.eye(d)
    g0 = g_at(np.zeros(d))
    gp = np.array([g_at(h[i] * eye[i]) for i in range(d)])
    gm = np.array([g_at(-h[i] * eye[i]) for i in range(d)])

    dg = np.array([(gp[i] - gm[i]) / (2.0 * h[i]) for i in range(d)])

    ddg = np.zeros((d, d, d, d))
    for i in range(d):
        ddg[i, i] = (gp[i] - 2.0 * g0 + gm[i]) / (h[i] * h[i])
        for j in range(i + 1, d):
            hpp = g_at(h[i] * eye[i] + h[j] * eye[j])
            hpm = g_at(h[i] * eye[i] - h[j] * eye[j])
            hmp = g_at(-h[i] * eye[i] + h[j] * eye[j])
            hmm = g_at(-h[i] * eye[i] - h[j] * eye[j])
            mixed = (hpp - hpm - hmp + hmm) / (4.0 * h[i] * h[j])
            ddg[i, j] = mixed
            ddg[j, i] = mixed

    ginv = np.linalg.inv(g0)
    # S[i,j,l] = d_i g_jl + d_j g_il - d_l g_ij
    s = (
        dg
        + np.einsum("jil->ijl", dg)
        - np.einsum("lij->ijl", dg)
    )
    gamma = 0.5 * np.einsum("kl,ijl->kij", ginv, s)

    dginv = -np.einsum("ab,ibc,cd->iad", ginv, dg, ginv)
    ds = (
        ddg
        + np.einsum("ikjm->ijkm", ddg)
        - np.einsum("imjk->ijkm", ddg)
    )
    dgamma = 0.5 * (
        np.einsum("ilm,jkm->iljk", dginv, s)
        + np.einsum("lm,ijkm->iljk", ginv, ds)
    )

    riemann = (
        np.einsum("iljk->lijk", dgamma)
        - np.einsum("jlik->lijk", dgamma)
        + np.einsum("lim,mjk->lijk", gamma, gamma)
        - np.einsum("ljm,mik->lijk", gamma, gamma)
    )
    return g0, gamma, riemann


def riemann_apply(
    spec: ManifoldSpec, u, v, w, z=None, *, step: float | None = None
) -> Array:
    """The vector R(v, w)z in chart coordinates; z defaults to w.

    The assembled tensor is antisymmetric in (v, w) by construction, so
    R(v, w)z = -R(w, v)z holds for any applied vector z.
    """
    v = np.asarray(v, dtype=float).reshape(-1)
    w = np.asarray(w, dtype=float).reshape(-1)
    z = w if z is None else np.asarray(z, dtype=float).reshape(-1)
    _, _, riemann = curvature_tensor(spec, u, step=step)
    return np.einsum("lijk,i,j,k->l", riemann, v, w, z)


def gaussian_curvature(spec: ManifoldSpec, u) -> float:
    """Closed-form Gaussian curvature for the analytic built-ins."""
    if spec.kind == "plane":
        return 0.0
    if spec.kind == "sphere":
        r = spec.params["radius"]
        return 1.0 / (r * r)
    if spec.kind == "torus":
        big = spec.params["major_radius"]
        small = spec.params["minor_radius"]
        b = float(np.asarray(u, dtype=float).reshape(-1)[1])
        return math.cos(b) / (small * (big + small * math.cos(b)))
    raise DegeneratePlaneError(
        f"no analytic curvature for manifold kind {spec.kind!r}"
    )


def _canonical_pair(g: Array, v: Array, w: Array, eps_parallel: float):
    """Metric-normalize, order, and orthonormalize a tangent pair.

    Sectional curvature depends only on the unordered plane span{v, w}; the
    canonical representative makes the documented scale and swap invariances
    hold to rounding instead of finite-difference truncation.
    """
    nv = math.sqrt(float(v @ g @ v))
    nw = math.sqrt(float(w @ g @ w))
    if nv == 0.0 or nw == 0.0:
        raise DegeneratePlaneError("tangent vectors must be nonzero")
    vh, wh = v / nv, w / nw
    cos = float(vh @ g @ wh)
    if 1.0 - cos * cos <= eps_parallel:
        raise DegeneratePlaneError(
            f"tangent plane degenerate: normalized Gram determinant "
            f"{1.0 - cos * cos:g} <= {eps_parallel:g}"
        )
    a, b = (vh, wh) if tuple(vh) <= tuple(wh) else (wh, vh)
    cab = float(a @ g @ b)
    b_perp = b - cab * a
    b_perp /= math.sqrt(float(b_perp @ g @ b_perp))
    return a, b_perp


def sectional_curvature(
    spec: ManifoldSpec,
    u,
    v,
    w,
    *,
    eps_parallel: float = 1e-8,
    method: str = "auto",
    step: float | None = None,
) -> float:
    """Sectional curvature K(v, w) = <R(v,w)w, v> / (<v,v><w,w> - <v,w>^2)
    in the pullback metric, for chart-coordinate tangent vectors v, w.

    method "auto" uses the closed form when the spec advertises one and the
    finite-difference pipeline otherwise; "fd" forces the pipeline.
    """
    u = np.asarray(u, dtype=float).reshape(-1)
    v = np.asarray(v, dtype=float).reshape(-1)
    w = np.asarray(w, dtype=float).reshape(-1)
    g = metric(spec, u)
    a, b = _canonical_pair(g, v, w, eps_parallel)
    if method not in ("auto", "fd", "analytic"):
        raise ValueError(f"unknown curvature method {method!r}")
    if method == "analytic" or (
        method == "auto" and spec.analytic_curvature_available
    ):
        return gaussian_curvature(spec, u)
    g0, _, riemann = curvature_tensor(spec, u, step=step)
    numerator = float(np.einsum("lm,lijk,i,j,k,m->", g0, riemann, a, b, b, a))
    denominator = float((a @ g0 @ a) * (b @ g0 @ b) - (a @ g0 @ b) ** 2)
    return numerator / denominator
