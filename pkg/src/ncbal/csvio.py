"""CSV serialization of diagnostics streams, snapshots and reports.

All floating point values are written with 17 significant digits in the
fixed scientific form ``d.dddddddddddddddde+XX`` (two-digit exponent), which
round-trips float64 exactly and is reproduced bit-for-bit by the
post-processing tools.  Files use LF line endings.
"""

from __future__ import annotations

import os

import numpy as np

__all__ = ["fmt", "write_diagnostics_csv", "write_snapshot_csv", "diagnostics_header"]


def fmt(x: float) -> str:
    return f"{float(x):.16e}"


def diagnostics_header(n_comp: int) -> str:
    masses = ",".join(f"mass{k}" for k in range(n_comp))
    return (
        f"step,time,dt,{masses},total_entropy,lyapunov_V,"
        "worst_residual,total_dissipation,max_stationarity_residual"
    )


def write_diagnostics_csv(records, n_comp: int, path) -> None:
    lines = [diagnostics_header(n_comp)]
    for r in records:
        masses = ",".join(fmt(m) for m in r.masses)
        lines.append(
            f"{r.step},{fmt(r.time)},{fmt(r.dt)},{masses},{fmt(r.total_entropy)},"
            f"{fmt(r.lyapunov)},{fmt(r.worst_residual)},{fmt(r.total_dissipation)},"
            f"{fmt(r.max_stationarity)}"
        )
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    with open(path, "w", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def write_snapshot_csv(mesh, U, alpha, path) -> None:
    """Per-cell state dump: cell_id,x,y,area,alpha,u0,u1[,u2]."""
    U = np.asarray(U, dtype=float)
    n_comp = U.shape[1]
    cols = ",".join(f"u{k}" for k in range(n_comp))
    lines = [f"cell_id,x,y,area,alpha,{cols}"]
    for c in range(mesh.n_cells):
        x = mesh.centroids[c, 0]
        y = mesh.centroids[c, 1] if mesh.dim == 2 else 0.0
        vals = ",".join(fmt(v) for v in U[c])
        lines.append(f"{c},{fmt(x)},{fmt(y)},{fmt(mesh.areas[c])},{fmt(alpha[c])},{vals}")
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    with open(path, "w", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")
