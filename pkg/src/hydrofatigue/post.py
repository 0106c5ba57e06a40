"""Result extraction: crack metrics, growth-rate and Paris fits, CSV output.

Everything here is pure post-processing over immutable arrays; nothing
mutates solver state.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .material import MaterialParams
from .mesh import Mesh


class NoStableGrowthError(ValueError):
    """No window of the crack trace passes the linear-fit quality gate."""


@dataclass
class PathSpec:
    """Straight measurement line for crack extension.

    origin : point on the line [mm]
    direction : unit vector along expected growth
    a0 : arc length of the initial crack tip along the line [mm]
    """

    origin: np.ndarray
    direction: np.ndarray
    a0: float = 0.0
    tol: float = 1e-6

    def __post_init__(self):
        self.origin = np.asarray(self.origin, dtype=float)
        d = np.asarray(self.direction, dtype=float)
        self.direction = d / np.linalg.norm(d)


def path_nodes(mesh: Mesh, path: PathSpec):
    """(sorted arc lengths, node ids) of mesh nodes lying on the path."""
    rel = mesh.nodes - path.origin
    d = path.direction
    perp = rel[:, 0] * (-d[1]) + rel[:, 1] * d[0]
    scale = max(1.0, np.abs(mesh.nodes).max())
    on = np.abs(perp) <= path.tol * scale
    ids = np.flatnonzero(on)
    s = rel[ids] @ d
    keep = s >= -path.tol * scale
    ids, s = ids[keep], s[keep]
    order = np.argsort(s)
    return s[order], ids[order]


def measure_crack_extension(phi: np.ndarray, mesh: Mesh, path: PathSpec,
                            threshold: float = 0.95) -> float:
    """Crack extension along a straight path.

    Returns the farthest arc length where the piecewise-linear nodal phase
    field reaches the threshold, minus the initial crack length; 0 when no
    point qualifies.
    """
    s, ids = path_nodes(mesh, path)
    if s.size == 0:
        return 0.0
    v = phi[ids]
    # duplicated seam nodes share s; keep the larger value
    uniq, inv = np.unique(np.round(s, 12), return_inverse=True)
    vmax = np.full(uniq.shape, -np.inf)
    np.maximum.at(vmax, inv, v)
    s, v = uniq, vmax
    far = -np.inf
    above = v >= threshold
    if above.any():
        far = s[above].max()
    # interpolated crossings refine the front position
    dv = (v[:-1] - threshold) * (v[1:] - threshold)
    for i in np.flatnonzero(dv < 0):
        w = (threshold - v[i]) / (v[i + 1] - v[i])
        far = max(far, s[i] + w * (s[i + 1] - s[i]))
    if far == -np.inf:
        return 0.0
    return max(0.0, float(far) - path.a0)


@dataclass
class CrackTrace:
    """Per-cycle crack extension; enforced non-decreasing."""

    cycles: np.ndarray
    delta_a: np.ndarray

    def __post_init__(self):
        self.cycles = np.asarray(self.cycles, dtype=float)
        self.delta_a = np.maximum.accumulate(np.asarray(self.delta_a, dtype=float))
        if self.cycles.shape != self.delta_a.shape:
            raise ValueError("cycle and extension arrays differ in length")


def growth_rate(trace: CrackTrace, min_points: int = 5,
                rsq_min: float = 0.98) -> float:
    """Slope [mm/cycle] of the largest trace window with linear R^2 >= gate.

    Raises NoStableGrowthError when no window qualifies (e.g. a constant
    trace or one that never leaves the transient).
    """
    x = trace.cycles
    y = trace.delta_a
    n = x.size
    if n < min_points:
        raise NoStableGrowthError("trace too short for a stable-growth fit")
    # prefix sums give O(1) least-squares stats per window
    cx = np.concatenate([[0.0], np.cumsum(x)])
    cy = np.concatenate([[0.0], np.cumsum(y)])
    cxx = np.concatenate([[0.0], np.cumsum(x * x)])
    cxy = np.concatenate([[0.0], np.cumsum(x * y)])
    cyy = np.concatenate([[0.0], np.cumsum(y * y)])
    best = None
    for i in range(0, n - min_points + 1):
        js = np.arange(i + min_points, n + 1)
        m = (js - i).astype(float)
        sx = cx[js] - cx[i]
        sy = cy[js] - cy[i]
        sxx = cxx[js] - cxx[i]
        sxy = cxy[js] - cxy[i]
        syy = cyy[js] - cyy[i]
        vxx = sxx - sx * sx / m
        vxy = sxy - sx * sy / m
        vyy = syy - sy * sy / m
        with np.errstate(divide="ignore", invalid="ignore"):
            slope = vxy / vxx
            rsq = np.where(vyy > 1e-300, vxy * vxy / (vxx * vyy), 0.0)
        ok = (rsq >= rsq_min) & (slope > 0)
        if ok.any():
            k = np.flatnonzero(ok)[-1]      # longest window starting at i
            cand = (int(m[k]), rsq[k], slope[k])
            if best is None or cand[0] > best[0] or (
                    cand[0] == best[0] and cand[1] > best[1]):
                best = cand
    if best is None:
        raise NoStableGrowthError("no stable growth window found")
    return float(best[2])


@dataclass
class ParisFit:
    C_coef: float   # mm/cycle * (MPa sqrt(mm))^-m
    m: float
    rsq: float
    n_points: int


def fit_paris(delta_K, dadN) -> ParisFit:
    """log10-log10 least squares of da/dN = C (Delta K)^m."""
    dK = np.asarray(delta_K, dtype=float)
    da = np.asarray(dadN, dtype=float)
    if dK.size < 3:
        raise ValueError("need at least 3 points for a Paris fit")
    if np.any(da <= 0) or np.any(dK <= 0):
        raise ValueError("Paris fit needs positive rates and ranges")
    if np.ptp(dK) == 0:
        raise ValueError("degenerate fit: all Delta K equal")
    X = np.log10(dK)
    Y = np.log10(da)
    m, b = np.polyfit(X, Y, 1)
    Yh = m * X + b
    ss = np.sum((Y - Y.mean()) ** 2)
    rsq = 1.0 - np.sum((Y - Yh) ** 2) / ss if ss > 0 else 1.0
    return ParisFit(C_coef=10.0**b, m=float(m), rsq=float(rsq), n_points=dK.size)


def dimensionless_groups(params: MaterialParams, K_m: float, freq: float):
    """Buckingham groups: L0 = (K_m/E)^2, fbar = f L0^2 / D, tbar(t)."""
    if K_m <= 0:
        raise ValueError("K_m must be positive")
    L0 = (K_m / params.E) ** 2
    fbar = freq * L0**2 / params.D
    return {
        "L0": L0,
        "fbar": fbar,
        "tbar": lambda t: np.asarray(t) * params.D / L0**2,
    }


# ---------------------------------------------------------------------------
# CSV writers (fixed headers)

def _write_rows(path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        w.writerows(rows)


def write_crack_trace_csv(path, trace: CrackTrace):
    _write_rows(path, ["cycle", "delta_a_mm"],
                zip(trace.cycles, trace.delta_a))


def write_paris_csv(path, delta_K, dadN, C_wtppm):
    _write_rows(path, ["delta_K", "dadN", "C_wtppm"],
                zip(delta_K, dadN, C_wtppm))


def write_freqmap_csv(path, fbar, dadN):
    _write_rows(path, ["fbar", "dadN"], zip(fbar, dadN))


def write_sn_csv(path, stress_amp_norm, N_f, C_wtppm):
    _write_rows(path, ["stress_amp_norm", "N_f", "C_wtppm"],
                zip(stress_amp_norm, N_f, C_wtppm))
