"""Per-sample observables of a trajectory, in the fixed CSV column order."""

from __future__ import annotations

import io

import numpy as np

from .dynamics import Trajectory, minkowski_dot
from .geometry import curve_derivatives, frenet_frame_from_curve, mass_relation
from .residuals import trajectory_residuals

__all__ = ["COLUMNS", "observables", "format_csv", "write_csv", "read_csv"]

COLUMNS = ("tau", "x0", "x1", "x2", "x3", "v0", "v1", "v2", "v3", "H", "pv", "OmegaS",
           "K1", "K2", "K3", "res_nl", "res_dh")


def observables(t: Trajectory) -> np.ndarray:
    """Array with one row per sample and one column per entry of COLUMNS."""
    f = t.field
    n = len(t)
    omega_s = np.empty(n)
    curv = np.empty((n, 3))
    for i, s in enumerate(t.states()):
        omega_s[i] = mass_relation(s, f)[1]
        frame = frenet_frame_from_curve(curve_derivatives(s, f, order=4))
        c = frame.curvatures
        curv[i] = (c.K1, c.K2, c.K3)
    nl, dh = trajectory_residuals(t)
    pv = minkowski_dot(t.p, t.v)
    return np.column_stack([t.tau, t.x, t.v, t.H, pv, omega_s, curv, nl, dh])


def format_csv(rows: np.ndarray) -> str:
    buf = io.StringIO()
    buf.write(",".join(COLUMNS) + "\n")
    for row in rows:
        buf.write(",".join("%.17g" % v for v in row) + "\n")
    return buf.getvalue()


def write_csv(path, rows: np.ndarray) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(format_csv(rows))


def read_csv(path) -> np.ndarray:
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().strip().split(",")
        if tuple(header) != COLUMNS:
            raise ValueError(f"unexpected CSV header {header}")
        return np.loadtxt(fh, delimiter=",", ndmin=2)
