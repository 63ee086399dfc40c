import numpy as np
import pytest

from conftest import lake_setup

from ncbal.csvio import diagnostics_header, fmt, write_snapshot_csv
from ncbal.mesh import build_structured_2d, build_uniform_1d
from ncbal.solver import run


def test_fmt_17_significant_digits():
    assert fmt(0.0) == "0.0000000000000000e+00"
    assert fmt(0.1) == "1.0000000000000001e-01"
    assert fmt(-9.81) == "-9.8100000000000005e+00"
    # parses back to the identical double
    for v in (0.1, np.pi, 1e-30, 6.0221408e23, 2.0**-40):
        assert float(fmt(v)) == v


def test_diagnostics_header_component_count():
    assert diagnostics_header(2) == (
        "step,time,dt,mass0,mass1,total_entropy,lyapunov_V,"
        "worst_residual,total_dissipation,max_stationarity_residual"
    )
    assert "mass2" in diagnostics_header(3)


def test_diagnostics_csv_written_lf_endings(tmp_path):
    setup = lake_setup(steps=5)
    setup.diagnostics_path = str(tmp_path / "diag.csv")
    run(setup)
    raw = (tmp_path / "diag.csv").read_bytes()
    assert b"\r" not in raw
    lines = raw.decode().strip().split("\n")
    assert len(lines) == 7  # header + initial record + 5 steps
    assert lines[0] == diagnostics_header(2)
    fields = lines[1].split(",")
    assert fields[0] == "0"
    assert fields[1] == "0.0000000000000000e+00"


def test_snapshot_csv_1d_and_2d(tmp_path):
    mesh1 = build_uniform_1d(0.0, 1.0, 4)
    U = np.column_stack([np.full(4, 1.5), np.zeros(4)])
    path = tmp_path / "snap1d.csv"
    write_snapshot_csv(mesh1, U, np.zeros(4), path)
    lines = path.read_text().strip().split("\n")
    assert lines[0] == "cell_id,x,y,area,alpha,u0,u1"
    row = lines[1].split(",")
    assert row[0] == "0"
    assert float(row[1]) == 0.125
    assert float(row[2]) == 0.0  # y column present in 1D

    mesh2 = build_structured_2d(2, 2)
    U2 = np.tile([1.0, 0.1, -0.2], (4, 1))
    path2 = tmp_path / "snap2d.csv"
    write_snapshot_csv(mesh2, U2, np.zeros(4), path2)
    lines2 = path2.read_text().strip().split("\n")
    assert lines2[0] == "cell_id,x,y,area,alpha,u0,u1,u2"
    assert len(lines2) == 5
