import subprocess

import pytest


def run(cli, *args, cwd=None):
    return subprocess.run([cli, *args], capture_output=True, text=True, cwd=cwd, timeout=600)


def write_pgm(path, rows):
    height, width = len(rows), len(rows[0])
    pixels = bytes(0 if ch == "#" else 255 for row in rows for ch in row)
    path.write_bytes(f"P5\n{width} {height}\n255\n".encode() + pixels)


def write_grid(path, width, height):
    path.write_text(
        f"width={width}\nheight={height}\nresolution=0.01\norigin=0 0\n"
        "plane_normal=0 0 1\nplane_offset=0\naxis_u=1 0 0\naxis_v=0 1 0\n"
    )


def test_synth_then_pipeline(cli, tmp_path):
    scene = tmp_path / "scene"
    r = run(cli, "synth", "--out-dir", str(scene), "--set", "scene.points=20000")
    assert r.returncode == 0, r.stderr
    assert (scene / "scan_0.xyz").exists() and (scene / "scan_1.xyz").exists()
    out = tmp_path / "out"
    r = run(
        cli, "pipeline", str(scene / "scan_0.xyz"), str(scene / "scan_1.xyz"),
        "--set", "goal_xy=1.5,0", "--out-dir", str(out),
    )
    assert r.returncode == 0, r.stderr
    for name in ("costmap.pgm", "path.csv", "overlay.ppm", "report.txt", "transforms.txt"):
        assert (out / name).exists(), name
    assert (out / "costmap.pgm").read_bytes()[:2] == b"P5"
    assert (out / "overlay.ppm").read_bytes()[:2] == b"P6"
    assert len((out / "path.csv").read_text().splitlines()) >= 2


def test_bad_config_key_exits_2(cli, tmp_path):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("voxel_edge = 0.01\nbogus = 3\n")
    r = run(cli, "pipeline", "--config", str(cfg), "--out-dir", str(tmp_path))
    assert r.returncode == 2
    assert "line 2" in r.stderr


def test_plan_without_embodiment_on_crafted_grid(cli, tmp_path):
    rows = ["." * 40 for _ in range(20)]
    rows[10] = "#" * 30 + "." * 10
    write_pgm(tmp_path / "occ.pgm", rows)
    write_grid(tmp_path / "grid.txt", 40, 20)
    r = run(
        cli, "plan", "--occupancy", str(tmp_path / "occ.pgm"), "--grid", str(tmp_path / "grid.txt"),
        "--start", "2,2", "--goal", "17,2", "--no-embodiment", "--out-dir", str(tmp_path / "o"),
    )
    assert r.returncode == 0, r.stderr
    cells = [tuple(map(int, line.split(","))) for line in (tmp_path / "o" / "path.csv").read_text().split()]
    assert cells[0] == (2, 2) and cells[-1] == (17, 2)
    assert all(not (row == 10 and col < 30) for row, col in cells)


def test_severed_grid_exits_4(cli, tmp_path):
    rows = ["." * 30 for _ in range(20)]
    rows[10] = "#" * 30
    write_pgm(tmp_path / "occ.pgm", rows)
    write_grid(tmp_path / "grid.txt", 30, 20)
    r = run(
        cli, "plan", "--occupancy", str(tmp_path / "occ.pgm"), "--grid", str(tmp_path / "grid.txt"),
        "--start", "2,2", "--goal", "17,2", "--no-embodiment", "--out-dir", str(tmp_path / "o"),
    )
    assert r.returncode == 4, (r.returncode, r.stderr)


def test_bench_prints_table(cli, tmp_path):
    r = run(cli, "bench", "--reps", "2", "--set", "scene.points=20000", "--set", "goal_xy=1.5,0",
            "--out-dir", str(tmp_path))
    assert r.returncode == 0, r.stderr
    lines = r.stdout.splitlines()
    assert lines[0] == "runs=2"
    for stage in ("FPFH", "ICP", "D* Lite"):
        assert any(line.startswith(stage) and "±" in line for line in lines), stage
