"""Per-point energy descent and the lattice-wide embedding pipeline.

Each lattice point is an independent minimization of the three-term energy,
seeded at the point itself; Armijo backtracking guarantees every accepted
step strictly decreases the energy.  Per-point quadrature seeds are derived
from the batch seed and the point index, so a run is reproducible for any
worker count.
"""
from __future__ import annotations

import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .energy import EnergyParams, el_residual, total_energy, total_gradient
from .errors import LatticeEmbedError
from .geometry import ManifoldSpec, closest_point
from .lattice import EmbeddingEntry, EmbeddingMap, LatticeSpec, generate_lattice
from .quadrature import QuadratureRule

Array = np.ndarray

THREADS_ENV_VAR = "LATTICE_EMBED_THREADS"
_MIN_STEP = 1e-16


def worker_count() -> int:
    """Worker cap from the environment, defaulting to hardware parallelism."""
    raw = os.environ.get(THREADS_ENV_VAR, "")
    try:
        value = int(raw)
    except ValueError:
        value = 0
    if value >= 1:
        return value
    return os.cpu_count() or 1


@dataclass(frozen=True)
class SolverConfig:
    initial_step: float = 0.1
    backtrack_factor: float = 0.5
    armijo_c: float = 1e-4
    max_iters: int = 500
    grad_tol: float = 1e-6
    seed: int = 0

    def __post_init__(self):
        if self.initial_step <= 0.0:
            raise ValueError("initial_step must be positive")
        if not 0.0 < self.backtrack_factor < 1.0:
            raise ValueError("backtrack_factor must lie in (0, 1)")
        if not 0.0 < self.armijo_c < 1.0:
            raise ValueError("armijo_c must lie in (0, 1)")
        if self.max_iters < 1:
            raise ValueError("max_iters must be at least 1")


@dataclass(eq=False)
class PointTrace:
    energies: list[float] = field(default_factory=list)
    iterations: int = 0
    converged: bool = False
    stalled: bool = False
    final_energy: float = float("nan")
    final_residual_norm: float = float("nan")


def descend_point(
    params: EnergyParams,
    spec: ManifoldSpec,
    q0,
    config: SolverConfig,
    *,
    rule: QuadratureRule | None = None,
) -> tuple[Array, PointTrace]:
    """Armijo-backtracked gradient descent on the total energy from q0.

    Stops when the gradient norm drops to grad_tol or the iteration budget
    runs out.  A line search that underflows the machine step floor is
    reported on the trace (stalled), not raised.
    """
    q = np.asarray(q0, dtype=float).reshape(-1).copy()
    trace = PointTrace()
    energy = total_energy(params, spec, q, rule=rule)
    trace.energies.append(energy)
    for _ in range(config.max_iters):
        grad = total_gradient(params, spec, q, rule=rule)
        grad_norm = float(np.linalg.norm(grad))
        if grad_norm <= config.grad_tol:
            break
        step = config.initial_step
        accepted = False
        while step >= _MIN_STEP:
            candidate = q - step * grad
            cand_energy = total_energy(params, spec, candidate, rule=rule)
            if cand_energy <= energy - config.armijo_c * step * grad_norm**2:
                q = candidate
                energy = cand_energy
                trace.energies.append(energy)
                trace.iterations += 1
                accepted = True
                break
            step *= config.backtrack_factor
        if not accepted:
            trace.stalled = True
            break
    trace.final_energy = energy
    # the residual is the gradient, so this norm certifies stationarity
    trace.final_residual_norm = float(
        np.linalg.norm(el_residual(params, spec, q, rule=rule))
    )
    trace.converged = trace.final_residual_norm <= config.grad_tol
    return q, trace


@dataclass(eq=False)
class SolveReport:
    attempted: int = 0
    skipped: int = 0
    converged_count: int = 0
    fraction_converged: float = 0.0
    max_residual: float = 0.0
    wall_time: float = 0.0  # diagnostic only; never serialized to files
    traces: list[PointTrace] = field(default_factory=list)
    errors: list[str] = field(default_factory=list)


def _point_rule(params: EnergyParams, spec: ManifoldSpec, batch_seed: int, index: int):
    if params.gamma == 0.0:
        return None
    return params.rule_for(spec, seed=batch_seed ^ index)


def _solve_one(args):
    params, spec, q, config, index = args
    support = 2.0 * params.tube_radius
    try:
        proj = closest_point(spec, q)
        dist = float(np.linalg.norm(q - proj.point))
        if dist > support:
            entry = EmbeddingEntry(
                point=q.copy(),
                image=q.copy(),
                residual_norm=float("nan"),
                energy=float("nan"),
                iterations=0,
                converged=False,
                skipped=True,
            )
            return entry, None, None
        rule = _point_rule(params, spec, config.seed, index)
        image, trace = descend_point(params, spec, q, config, rule=rule)
    except LatticeEmbedError as exc:
        # per-point failures are reported, never abort the batch
        entry = EmbeddingEntry(
            point=q.copy(),
            image=q.copy(),
            residual_norm=float("nan"),
            energy=float("nan"),
            iterations=0,
            converged=False,
            skipped=False,
        )
        return entry, None, f"point {index}: {type(exc).__name__}: {exc}"
    entry = EmbeddingEntry(
        point=q.copy(),
        image=image,
        residual_norm=trace.final_residual_norm,
        energy=trace.final_energy,
        iterations=trace.iterations,
        converged=trace.converged,
        skipped=False,
    )
    return entry, trace, None


def embed_points(
    params: EnergyParams,
    spec: ManifoldSpec,
    points,
    config: SolverConfig,
    *,
    workers: int | None = None,
) -> tuple[EmbeddingMap, SolveReport]:
    """Run the per-point descent over an arbitrary batch of seed points.

    Points farther than twice the tube radius from M are outside the
    activation support and are marked skipped.  Per-point errors never abort
    the batch; output order follows input order for any worker count.
    """
    points = np.asarray(points, dtype=float)
    if points.ndim != 2:
        raise ValueError("points must be a 2-d array of ambient coordinates")
    if workers is None:
        workers = worker_count()
    start = time.perf_counter()
    jobs = [
        (params, spec, points[i].copy(), config, i) for i in range(points.shape[0])
    ]
    if workers <= 1 or len(jobs) <= 1:
        results = [_solve_one(job) for job in jobs]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_solve_one, jobs))
    entries = [entry for entry, _, _ in results]
    report = SolveReport()
    report.traces = [trace for _, trace, _ in results if trace is not None]
    report.errors = [err for _, _, err in results if err is not None]
    report.skipped = sum(1 for entry in entries if entry.skipped)
    report.attempted = len(entries) - report.skipped
    report.converged_count = sum(
        1 for entry in entries if entry.converged and not entry.skipped
    )
    report.fraction_converged = (
        report.converged_count / report.attempted if report.attempted else 0.0
    )
    residuals = [
        entry.residual_norm
        for entry in entries
        if not entry.skipped and np.isfinite(entry.residual_norm)
    ]
    report.max_residual = max(residuals) if residuals else 0.0
    report.wall_time = time.perf_counter() - start
    emap = EmbeddingMap(entries=entries, seed=config.seed)
    return emap, report


def embed_lattice(
    params: EnergyParams,
    spec: ManifoldSpec,
    lattice: LatticeSpec,
    config: SolverConfig,
    *,
    workers: int | None = None,
) -> tuple[EmbeddingMap, SolveReport]:
    """Embed every lattice point, seeding zeta(q) = q (Dirichlet-style
    anchoring at the lattice)."""
    points = generate_lattice(lattice)
    if lattice.dim != spec.ambient_dim:
        raise ValueError(
            f"lattice dimension {lattice.dim} != ambient dimension "
            f"{spec.ambient_dim}"
        )
    return embed_points(params, spec, points, config, workers=workers)


def multi_start_agreement(
    params: EnergyParams,
    spec: ManifoldSpec,
    q0,
    config: SolverConfig,
    *,
    n_starts: int = 8,
    jitter_radius: float = 0.01,
    seed: int = 0,
) -> float:
    """Spread (max pairwise distance) of minimizers reached from jittered
    copies of q0.  A reported diagnostic, not a uniqueness assertion: the
    energy's minimizer set can be a continuum, so the spread is meaningful
    relative to the jitter radius.
    """
    q0 = np.asarray(q0, dtype=float).reshape(-1)
    rng = np.random.default_rng(seed)
    solutions = [descend_point(params, spec, q0, config)[0]]
    for _ in range(n_starts - 1):
        jitter = rng.standard_normal(q0.shape[0])
        jitter *= jitter_radius / max(float(np.linalg.norm(jitter)), 1e-300)
        solutions.append(descend_point(params, spec, q0 + jitter, config)[0])
    spread = 0.0
    for i in range(len(solutions)):
        for j in range(i + 1, len(solutions)):
            spread = max(
                spread, float(np.linalg.norm(solutions[i] - solutions[j]))
            )
    return spread


@dataclass(frozen=True, eq=False)
class StationarityReport:
    checked: int
    passed: int
    pass_fraction: float
    worst_norm: float
    worst_index: int | None


def verify_stationarity(
    params: EnergyParams,
    spec: ManifoldSpec,
    emap: EmbeddingMap,
    tol: float,
) -> StationarityReport:
    """Recompute the stationarity residual at every converged image and
    report the fraction at or below tol, plus the worst offender."""
    if len(emap) == 0:
        raise ValueError("map is empty")
    checked = 0
    passed = 0
    worst_norm = 0.0
    worst_index = None
    for index, entry in enumerate(emap.entries):
        if entry.skipped or not entry.converged:
            continue
        rule = _point_rule(params, spec, emap.seed, index)
        norm = float(
            np.linalg.norm(el_residual(params, spec, entry.image, rule=rule))
        )
        checked += 1
        if norm <= tol:
            passed += 1
        if norm > worst_norm:
            worst_norm = norm
            worst_index = index
    fraction = passed / checked if checked else 0.0
    return StationarityReport(
        checked=checked,
        passed=passed,
        pass_fraction=fraction,
        worst_norm=worst_norm,
        worst_index=worst_index,
    )
