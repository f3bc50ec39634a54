import math

import pytest

from lattice_embed import cli

PLANE_SLAB = """
manifold.kind = plane
lattice.bounds = 0:0.4, 0:0.4, -0.1:0.1
lattice.spacing = 0.1
"""


def write_config(tmp_path, text, name="run.cfg"):
    path = tmp_path / name
    path.write_text(text)
    return str(path)


def test_embed_writes_points_and_report(tmp_path):
    out = tmp_path / "out"
    cfg = write_config(tmp_path, PLANE_SLAB + f"output.directory = {out}\n")
    status = cli.main(["embed", cfg])
    assert status == 0
    points = (out / "points.csv").read_text().splitlines()
    assert points[0].startswith("# digest: ")
    assert points[1] == (
        "q1,q2,q3,zeta1,zeta2,zeta3,residual_norm,energy,iterations,converged"
    )
    assert len(points) == 2 + 75
    assert all(line.endswith(",true") for line in points[2:])
    report = (out / "report.jsonl").read_text().splitlines()
    assert '"record": "summary"' in report[0]
    assert len(report) == 1 + 75


def test_embed_byte_identical_runs(tmp_path):
    out = tmp_path / "out"
    cfg = write_config(tmp_path, PLANE_SLAB + f"output.directory = {out}\n")
    assert cli.main(["embed", cfg]) == 0
    first = (out / "points.csv").read_bytes(), (out / "report.jsonl").read_bytes()
    assert cli.main(["embed", cfg]) == 0
    second = (out / "points.csv").read_bytes(), (out / "report.jsonl").read_bytes()
    assert first == second


def test_curvature_grid_sphere_constant(tmp_path):
    out = tmp_path / "out"
    cfg = write_config(
        tmp_path,
        f"manifold.kind = sphere\nmanifold.r = 2\noutput.directory = {out}\n",
    )
    status = cli.main(["curvature", cfg, "--grid", "8"])
    assert status == 0
    lines = (out / "curvature.csv").read_text().splitlines()
    assert lines[1] == "u1,u2,K,C"
    for line in lines[2:]:
        fields = [float(v) for v in line.split(",")]
        assert abs(fields[2] - 0.25) <= 1e-3
        assert abs(fields[3] - 0.25 * (2 * math.pi) ** 2) <= 0.01 * (2 * math.pi) ** 2
    assert len(lines) == 2 + 64


def test_energy_probe_command(tmp_path):
    out = tmp_path / "out"
    cfg = write_config(tmp_path, f"manifold.kind = plane\noutput.directory = {out}\n")
    probes = tmp_path / "probes.csv"
    probes.write_text("# probe points\n1.0, 2.0, 3.0\n0.5 0.5 0.0\n")
    status = cli.main(["energy", cfg, "--points", str(probes)])
    assert status == 0
    lines = (out / "energy.csv").read_text().splitlines()
    assert lines[1] == "q1,q2,q3,energy,grad1,grad2,grad3"
    first = [float(v) for v in lines[2].split(",")]
    assert first[3] == pytest.approx(4.5)  # (1/2)*3^2 normal offset
    assert first[6] == pytest.approx(3.0)
    second = [float(v) for v in lines[3].split(",")]
    assert second[3] == 0.0


def test_validate_command_passes():
    assert cli.main(["validate"]) == 0


def test_embed_unconverged_exit_code(tmp_path):
    out = tmp_path / "out"
    cfg = write_config(
        tmp_path,
        PLANE_SLAB + f"solver.max_iters = 1\noutput.directory = {out}\n",
    )
    assert cli.main(["embed", cfg]) == 1


def test_config_error_exit_code(tmp_path):
    cfg = write_config(tmp_path, "manifold.kind = plane\nenergy.alpha = -2\n")
    assert cli.main(["embed", cfg]) == 2


def test_unknown_key_exit_code(tmp_path):
    cfg = write_config(tmp_path, "manifold.kind = plane\nnot.a = key\n")
    assert cli.main(["embed", cfg]) == 2


def test_missing_points_file_exit_code(tmp_path):
    cfg = write_config(tmp_path, "manifold.kind = plane\n")
    assert cli.main(["energy", cfg, "--points", str(tmp_path / "nope.csv")]) == 1


def test_skipped_lattice_reports_zero_attempted(tmp_path, capsys):
    out = tmp_path / "out"
    cfg = write_config(
        tmp_path,
        "manifold.kind = plane\n"
        "lattice.bounds = 0:0.4, 0:0.4, 0.5:0.5\n"
        "lattice.spacing = 0.1\n"
        f"output.directory = {out}\n",
    )
    status = cli.main(["embed", cfg])
    assert status == 0
    captured = capsys.readouterr()
    assert "0 attempted" in captured.out.replace("embed: ", "").replace(
        "0 attempted,", "0 attempted,"
    ) or "0 attempted" in captured.out
    report = (out / "report.jsonl").read_text().splitlines()
    assert '"attempted": 0' in report[0]
    assert '"skipped": 25' in report[0]


def test_threads_env_respected(tmp_path, monkeypatch):
    out1 = tmp_path / "o1"
    out2 = tmp_path / "o2"
    base = PLANE_SLAB
    cfg1 = write_config(tmp_path, base + f"output.directory = {out1}\n", "a.cfg")
    cfg2 = write_config(tmp_path, base + f"output.directory = {out2}\n", "b.cfg")
    monkeypatch.setenv("LATTICE_EMBED_THREADS", "1")
    assert cli.main(["embed", cfg1]) == 0
    monkeypatch.setenv("LATTICE_EMBED_THREADS", "4")
    assert cli.main(["embed", cfg2]) == 0
    # identical except the digest line (different output directory)
    a = (out1 / "points.csv").read_text().splitlines()[1:]
    b = (out2 / "points.csv").read_text().splitlines()[1:]
    assert a == b
