"""Command-line interface: embed, curvature, energy, validate.

Exit codes: 0 success, 1 validation/convergence failure, 2 configuration
error.  All output files start with the config digest and a column header
and are byte-identical across runs with the same config and seeds.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .config import RunConfig, parse_config
from .energy import total_energy, total_gradient
from .errors import ConfigError, LatticeEmbedError
from .geometry import sectional_curvature
from .quadrature import curvature_double_integral
from .solver import embed_lattice, worker_count
from .validation import check_points_array


def _fmt(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (float, np.floating)):
        value = float(value)
        if value != value:  # nan
            return "nan"
        return repr(value)
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return str(value)


def _write_rows(path: Path, digest: str, columns: list[str], rows) -> None:
    lines = [f"# digest: {digest}", ",".join(columns)]
    for row in rows:
        lines.append(",".join(_fmt(v) for v in row))
    path.write_text("\n".join(lines) + "\n")


def _out_dir(config: RunConfig) -> Path:
    out = Path(config.get("output", "directory"))
    out.mkdir(parents=True, exist_ok=True)
    return out


def run_embed(config: RunConfig, *, workers: int | None = None) -> int:
    spec = config.manifold()
    params = config.energy_params()
    lattice = config.lattice()
    solver_config = config.solver()
    if workers is None:
        workers = worker_count()
    emap, report = embed_lattice(
        params, spec, lattice, solver_config, workers=workers
    )
    digest = config.digest()
    out = _out_dir(config)
    formats = config.get("output", "formats")
    n = spec.ambient_dim

    if "csv" in formats:
        columns = (
            [f"q{k + 1}" for k in range(n)]
            + [f"zeta{k + 1}" for k in range(n)]
            + ["residual_norm", "energy", "iterations", "converged"]
        )
        rows = [
            list(entry.point)
            + list(entry.image)
            + [
                float(entry.residual_norm),
                float(entry.energy),
                entry.iterations,
                bool(entry.converged),
            ]
            for entry in emap.entries
        ]
        _write_rows(out / "points.csv", digest, columns, rows)

    if "jsonl" in formats:
        lines = [
            json.dumps(
                {
                    "record": "summary",
                    "config_digest": digest,
                    "seed": solver_config.seed,
                    "attempted": report.attempted,
                    "skipped": report.skipped,
                    "converged": report.converged_count,
                    "fraction_converged": report.fraction_converged,
                    "max_residual": report.max_residual,
                },
                sort_keys=True,
            )
        ]
        for index, entry in enumerate(emap.entries):
            lines.append(
                json.dumps(
                    {
                        "record": "point",
                        "index": index,
                        "skipped": bool(entry.skipped),
                        "converged": bool(entry.converged),
                        "iterations": entry.iterations,
                        "residual_norm": None
                        if entry.skipped
                        else float(entry.residual_norm),
                        "energy": None if entry.skipped else float(entry.energy),
                    },
                    sort_keys=True,
                )
            )
        (out / "report.jsonl").write_text("\n".join(lines) + "\n")

    print(
        f"embed: {report.attempted} attempted, {report.skipped} skipped, "
        f"{report.converged_count} converged "
        f"({report.fraction_converged:.1%}), max residual "
        f"{report.max_residual:.3e}, wall time {report.wall_time:.2f}s"
    )
    return 0 if report.converged_count == report.attempted else 1


def run_curvature(config: RunConfig, *, grid: int = 16) -> int:
    spec = config.manifold()
    quad = config.sections["quadrature"]
    rule = config.energy_params().rule_for(spec)
    eps = quad["eps_parallel"]
    # cell centers keep the stencil inside the box and off chart degeneracies
    axes = [
        lo + (np.arange(grid) + 0.5) * (hi - lo) / grid
        for lo, hi in spec.param_bounds
    ]
    grids = np.meshgrid(*axes, indexing="ij")
    points = np.stack([g.ravel() for g in grids], axis=-1)
    rows = []
    for u in points:
        basis = np.eye(spec.intrinsic_dim)
        k = sectional_curvature(spec, u, basis[0], basis[1], eps_parallel=eps)
        integral = curvature_double_integral(spec, u, rule, eps)
        rows.append(list(u) + [float(k), float(integral)])
    columns = [f"u{k + 1}" for k in range(spec.intrinsic_dim)] + ["K", "C"]
    out = _out_dir(config)
    _write_rows(out / "curvature.csv", config.digest(), columns, rows)
    print(f"curvature: wrote {len(rows)} grid values to {out / 'curvature.csv'}")
    return 0


def _read_points(path: Path) -> np.ndarray:
    rows = []
    for raw in path.read_text().splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.replace(",", " ").split()
        rows.append([float(p) for p in parts])
    if not rows:
        raise LatticeEmbedError(f"no probe points found in {path}")
    return np.asarray(rows, dtype=float)


def run_energy(config: RunConfig, points_file: str) -> int:
    spec = config.manifold()
    params = config.energy_params()
    rule = params.rule_for(spec) if params.gamma != 0.0 else None
    points = check_points_array(
        _read_points(Path(points_file)), expected_dim=spec.ambient_dim
    )
    rows = []
    for q in points:
        value = total_energy(params, spec, q, rule=rule)
        grad = total_gradient(params, spec, q, rule=rule)
        rows.append(list(q) + [float(value)] + list(grad))
    n = spec.ambient_dim
    columns = (
        [f"q{k + 1}" for k in range(n)]
        + ["energy"]
        + [f"grad{k + 1}" for k in range(n)]
    )
    out = _out_dir(config)
    _write_rows(out / "energy.csv", config.digest(), columns, rows)
    print(f"energy: wrote {len(rows)} probe evaluations to {out / 'energy.csv'}")
    return 0


def run_validate(config: RunConfig | None = None) -> int:
    from .validate_suite import run_all

    results = run_all()
    failed = 0
    for result in results:
        status = "PASS" if result.passed else "FAIL"
        print(f"[{status}] {result.name}: {result.detail}")
        if not result.passed:
            failed += 1
    print(f"validate: {len(results) - failed}/{len(results)} criteria passed")
    return 0 if failed == 0 else 1


def run_command(command: str, config: RunConfig | None, **kwargs) -> int:
    """Dispatch one CLI command; returns the process exit status."""
    if command == "embed":
        return run_embed(config, **kwargs)
    if command == "curvature":
        return run_curvature(config, **kwargs)
    if command == "energy":
        return run_energy(config, **kwargs)
    if command == "validate":
        return run_validate(config)
    raise ValueError(f"unknown command {command!r}")


def _load_config(path: str) -> RunConfig:
    return parse_config(Path(path).read_text())


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="lattice-embed",
        description="Embed lattice points onto a manifold by energy descent.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_embed = sub.add_parser("embed", help="embed the configured lattice")
    p_embed.add_argument("config")

    p_curv = sub.add_parser(
        "curvature", help="tabulate curvature over the parameter box"
    )
    p_curv.add_argument("config")
    p_curv.add_argument("--grid", type=int, default=16)

    p_energy = sub.add_parser(
        "energy", help="evaluate the energy and gradient at probe points"
    )
    p_energy.add_argument("config")
    p_energy.add_argument("--points", required=True)

    p_validate = sub.add_parser("validate", help="run the acceptance suite")
    p_validate.add_argument("config", nargs="?")

    args = parser.parse_args(argv)
    try:
        config = None
        if getattr(args, "config", None):
            config = _load_config(args.config)
        if args.command == "embed":
            return run_embed(config)
        if args.command == "curvature":
            return run_curvature(config, grid=args.grid)
        if args.command == "energy":
            return run_energy(config, points_file=args.points)
        return run_validate(config)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    except (LatticeEmbedError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
