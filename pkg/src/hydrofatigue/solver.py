"""Cyclic load programs, staggered solution loop, and scenario drivers.

The staggered scheme solves, within each time increment,
mechanics -> hydrostatic stress -> hydrogen diffusion -> degraded fracture
energy -> phase field, iterating until the combined relative residual of
all three fields falls below tolerance.  Every single-field solve is
linear; direct factorizations are cached and re-validated against the
current matrix, so quiet increments run off stale factors at small cost.
"""

from __future__ import annotations

import time as _time
from dataclasses import dataclass, field
from enum import Enum

import numpy as np
from scipy import sparse
from scipy.sparse.linalg import bicgstab, cg, splu

from .assembly import (
    Discretization,
    DofMap,
    State,
    degraded_Gd_qp,
    diffusion_system,
    mechanics_system,
    phasefield_system,
    update_history,
)
from .material import Environment, MaterialParams
from .mesh import Mesh, write_vtk
from .post import PathSpec, measure_crack_extension


class SolverError(RuntimeError):
    """Unrecoverable solver failure (with cycle/time context)."""


class StaggerError(RuntimeError):
    """Staggered loop failed to converge within the iteration cap."""


# ---------------------------------------------------------------------------
# load programs

class Waveform(Enum):
    TRIANGLE = "triangle"   # piecewise linear between min and max
    SINE = "sine"


@dataclass(frozen=True)
class CyclicLoad:
    """Cyclic program: amplitude is the peak-to-peak range of the load
    quantity (displacement, K, or stress); R = min/max."""

    amplitude: float
    R: float = 0.0
    freq: float = 1.0
    waveform: Waveform = Waveform.TRIANGLE
    increments_per_cycle: int = 20
    n_cycles_max: int = 1000

    def __post_init__(self):
        if self.amplitude <= 0:
            raise ValueError("amplitude must be positive")
        if not (-1.0 <= self.R < 1.0):
            raise ValueError("load ratio must satisfy -1 <= R < 1")
        if self.freq <= 0:
            raise ValueError("frequency must be positive")
        if self.increments_per_cycle < 20:
            raise ValueError("at least 20 increments per cycle are required")

    @property
    def period(self) -> float:
        return 1.0 / self.freq

    @property
    def mean(self) -> float:
        return 0.5 * self.amplitude + self.R * self.amplitude / (1.0 - self.R)

    @property
    def peak(self) -> float:
        return self.amplitude / (1.0 - self.R)

    @property
    def valley(self) -> float:
        return self.R * self.amplitude / (1.0 - self.R)


def load_value(load: CyclicLoad, t):
    """Load level at time t (vectorized); starts at the mean, rising."""
    tau = np.asarray(t, dtype=float) * load.freq
    tau = tau - np.floor(tau)
    if load.waveform is Waveform.SINE:
        v = load.mean + 0.5 * load.amplitude * np.sin(2 * np.pi * tau)
    else:
        up = load.mean + 2.0 * load.amplitude * tau
        down = load.peak - 2.0 * load.amplitude * (tau - 0.25)
        back = load.valley + 2.0 * load.amplitude * (tau - 0.75)
        v = np.where(tau < 0.25, up, np.where(tau < 0.75, down, back))
    return v if v.ndim else float(v)


def williams_displacements(K, xy_rel, E, nu):
    """Mode-I near-tip displacement field (plane strain).

    xy_rel : (N, 2) coordinates relative to the crack tip, crack along
    theta = pi.  Returns (N, 2) displacements.
    """
    xy = np.atleast_2d(np.asarray(xy_rel, dtype=float))
    r = np.hypot(xy[:, 0], xy[:, 1])
    th = np.arctan2(xy[:, 1], xy[:, 0])
    c = K * (1.0 + nu) / E * np.sqrt(r / (2.0 * np.pi))
    f = 3.0 - 4.0 * nu - np.cos(th)
    u = np.column_stack([c * np.cos(0.5 * th) * f, c * np.sin(0.5 * th) * f])
    return u


# ---------------------------------------------------------------------------
# linear solves with factorization reuse

class ReusableSolver:
    """Direct sparse solver that re-uses its factorization.

    A stale factor is used as a preconditioner for defect-correction
    sweeps; the matrix is refactored only when the sweeps stop
    contracting.  An iterative mode (Jacobi-preconditioned CG/BiCGStab)
    exists behind config for large problems.
    """

    def __init__(self, mode: str = "direct", dc_tol: float = 1e-6,
                 symmetric: bool = True, itol: float = 1e-9,
                 max_sweeps: int = 8):
        self.mode = mode
        self.dc_tol = dc_tol
        self.symmetric = symmetric
        self.itol = itol
        self.max_sweeps = max_sweeps
        self._lu = None
        self.n_factor = 0
        self.n_solve = 0

    def invalidate(self):
        self._lu = None

    def _factor(self, A):
        # near-symmetric systems: AT+A ordering roughly halves fill
        self._lu = splu(A.tocsc(), permc_spec="MMD_AT_PLUS_A")
        self.n_factor += 1

    def solve(self, A, b):
        self.n_solve += 1
        nb = np.linalg.norm(b)
        if nb == 0.0:
            return np.zeros_like(b)
        if self.mode == "iterative":
            M = sparse.diags(1.0 / A.diagonal())
            krylov = cg if self.symmetric else bicgstab
            x, info = krylov(A, b, rtol=self.itol, maxiter=2000, M=M)
            if info != 0:
                x = splu(A.tocsc()).solve(b)
            return x
        if self._lu is None:
            self._factor(A)
            return self._lu.solve(b)
        x = self._lu.solve(b)
        r = b - A @ x
        rn = np.linalg.norm(r)
        for _ in range(self.max_sweeps):
            if rn <= self.dc_tol * nb:
                return x
            x += self._lu.solve(r)
            r = b - A @ x
            rn_new = np.linalg.norm(r)
            if rn_new > 0.5 * rn:
                break
            rn = rn_new
        if rn > self.dc_tol * nb:
            self._factor(A)
            x = self._lu.solve(b)
        return x


class _Reducer:
    """Extracts the free-free block of a fixed-pattern CSR matrix."""

    def __init__(self, A: sparse.csr_matrix, free: np.ndarray):
        tmp = A.copy()
        tmp.data = np.arange(1, tmp.nnz + 1, dtype=np.float64)
        sub = tmp[free][:, free].tocsr()
        self.src = sub.data.astype(np.int64) - 1
        self.indices = sub.indices
        self.indptr = sub.indptr
        self.shape = sub.shape

    def __call__(self, A: sparse.csr_matrix) -> sparse.csr_matrix:
        return sparse.csr_matrix(
            (A.data[self.src], self.indices, self.indptr), shape=self.shape)


@dataclass
class SolverConfig:
    stag_tol: float = 1e-4
    stag_max_iters: int = 100
    k_reg: float = 1e-9
    k_pen_dt: float = 1e4          # penalty scale; k_pen = k_pen_dt / dt
    phi_penalty_threshold: float = 0.9
    max_dt_halvings: int = 5
    linear_solver: str = "direct"  # or "iterative"
    lu_dc_tol: float = 1e-6
    ligament_fraction: float = 0.9
    reaction_drop: float = 0.1
    crack_phi_threshold: float = 0.95
    checkpoint_every: int = 0      # cycles; 0 = off
    snapshot_every: int = 0        # cycles; 0 = off

    def __post_init__(self):
        if self.stag_tol <= 0 or self.k_pen_dt <= 0:
            raise ValueError("tolerances must be positive")


class Work:
    """Per-run scratch: solvers, pattern reducers, scales."""

    def __init__(self, cfg: SolverConfig):
        mode = cfg.linear_solver if cfg.linear_solver == "iterative" else "direct"
        self.mech = ReusableSolver(mode, cfg.lu_dc_tol, symmetric=True)
        self.pf = ReusableSolver(mode, cfg.lu_dc_tol, symmetric=True)
        self.diff = ReusableSolver(mode, cfg.lu_dc_tol, symmetric=False)
        self.red_mech = None
        self.red_diff = None
        self.scale_u = 0.0
        self.last_reaction_vec = None


@dataclass
class StaggerReport:
    iters: int
    rel_u: float
    rel_phi: float
    rel_C: float
    clamped: int
    reaction: np.ndarray | None = None


# ---------------------------------------------------------------------------
# staggered step

def staggered_step(disc: Discretization, state: State, dt: float,
                   mech_bc: DofMap, diff_bc: DofMap | None,
                   params: MaterialParams, env: Environment,
                   cfg: SolverConfig, work: Work | None = None,
                   skip_diffusion: bool = False,
                   freeze_phase: bool = False,
                   t_new: float | None = None) -> StaggerReport:
    """One accepted time increment of the coupled problem.

    mech_bc must already carry the prescribed displacement values for the
    target time.  On convergence the state is updated in place and the
    history fields are committed exactly once.  Raises StaggerError when
    the iteration cap is hit (callers halve dt and retry).
    """
    if work is None:
        work = Work(cfg)
    u = state.u.ravel().copy()
    u[mech_bc.fixed] = mech_bc.values
    phi = state.phi.copy()
    C = state.C.copy()
    if diff_bc is not None:
        C[diff_bc.fixed] = diff_bc.values
    tol = cfg.stag_tol
    k_pen = max(cfg.k_pen_dt, 1e3) / dt
    rel_u = rel_phi = rel_C = 0.0
    clamped = 0
    K_mat = None
    converged = False

    for it in range(1, cfg.stag_max_iters + 1):
        # mechanics
        r_full, K_mat = mechanics_system(disc, u, phi, params, cfg.k_reg)
        if work.red_mech is None:
            work.red_mech = _Reducer(K_mat, mech_bc.free)
        ref_u = np.linalg.norm(r_full)
        work.scale_u = max(work.scale_u, ref_u)
        rf = r_full[mech_bc.free]
        rel_u = np.linalg.norm(rf) / max(ref_u, 1e-3 * work.scale_u, 1e-300)
        mech_ok = rel_u <= tol
        if not mech_ok:
            du = work.mech.solve(work.red_mech(K_mat), rf)
            u[mech_bc.free] -= du

        eps = disc.strains(u.reshape(-1, 2))
        psi_p = disc.psi_plus(eps, params)
        H_trial = np.maximum(state.H_qp, psi_p)
        phi_qp = np.clip(disc.qp_interp(phi), 0.0, 1.0)

        # hydrogen transport
        diff_ok = True
        if not skip_diffusion:
            g_qp = (1.0 - phi_qp) ** 2 + cfg.k_reg
            sH = disc.nodal_projection(
                disc.sigma_hydrostatic(eps, params, g_qp))
            b, A = diffusion_system(
                disc, state.C, sH, phi_qp, params, dt,
                C_env=env.Cenv, k_pen=k_pen,
                phi_threshold=cfg.phi_penalty_threshold)
            if diff_bc is not None:
                if work.red_diff is None:
                    work.red_diff = _Reducer(A, diff_bc.free)
                rC = (A @ C - b)[diff_bc.free]
                ref_C = np.linalg.norm(b)
                rel_C = np.linalg.norm(rC) / max(ref_C, 1e-300)
                diff_ok = rel_C <= tol
                if not diff_ok:
                    C[diff_bc.free] -= work.diff.solve(work.red_diff(A), rC)
            else:
                rC = A @ C - b
                rel_C = np.linalg.norm(rC) / max(np.linalg.norm(b), 1e-300)
                diff_ok = rel_C <= tol
                if not diff_ok:
                    C -= work.diff.solve(A, rC)
            np.maximum(C, 0.0, out=C)

        # phase field with degraded fracture energy
        pf_ok = True
        if not freeze_phase:
            Gd = degraded_Gd_qp(disc, C, state.alpha_bar_qp, params)
            b, A = phasefield_system(disc, Gd, H_trial, params)
            rphi = A @ phi - b
            rel_phi = np.linalg.norm(rphi) / max(np.linalg.norm(b), 1e-300)
            pf_ok = rel_phi <= tol
            if not pf_ok:
                phi -= work.pf.solve(A, rphi)

        if mech_ok and diff_ok and pf_ok:
            converged = True
            break
        if it == int(0.6 * cfg.stag_max_iters):
            # stalling: drop stale factorizations
            work.mech.invalidate()
            work.pf.invalidate()
            work.diff.invalidate()

    if not converged:
        raise StaggerError(
            f"staggered loop did not converge (rel_u={rel_u:.2e}, "
            f"rel_phi={rel_phi:.2e}, rel_C={rel_C:.2e})")

    # clamp once per accepted pass; FE overshoot near sharp fronts is
    # counted and clipped here (quadrature evaluations clip internally)
    out = (phi < -1e-12) | (phi > 1.0 + 1e-12)
    clamped += int(out.sum())
    np.clip(phi, 0.0, 1.0, out=phi)
    state.u = u.reshape(-1, 2)
    state.phi = phi
    state.C = C
    state.clamp_events += clamped
    if t_new is not None:
        state.time = t_new
    if not freeze_phase:
        update_history(disc, state, params)
    work.last_reaction_vec = K_mat @ u
    return StaggerReport(it, rel_u, rel_phi, rel_C, clamped)


# ---------------------------------------------------------------------------
# scenarios

@dataclass
class Scenario:
    """Everything run_scenario needs: mesh, loads, constraints, probes."""

    name: str
    mesh: Mesh
    params: MaterialParams
    env: Environment
    load: CyclicLoad
    mech_fixed: np.ndarray
    mech_unit: np.ndarray            # prescribed values = level * unit
    diff_fixed: np.ndarray | None = None
    reaction_dofs: np.ndarray | None = None
    path: PathSpec | None = None
    ligament: float | None = None
    failure: str = "none"            # ligament | reaction | none
    probes: dict = field(default_factory=dict)   # name -> node id
    C0: float = 0.0
    freeze_phase: bool = False


def _dedupe_fixed(dofs, values):
    dofs = np.concatenate(dofs)
    values = np.concatenate(values)
    uniq, idx = np.unique(dofs, return_index=True)
    return uniq, values[idx]


def plate_scenario(mesh: Mesh, params: MaterialParams, env: Environment,
                   load: CyclicLoad, C0: float | None = None) -> Scenario:
    """Cracked square plate: lower edge clamped, upper edge cyclic u_y."""
    bot = mesh.boundary_sets["bottom"]
    top = mesh.boundary_sets["top"]
    fixed, unit = _dedupe_fixed(
        [2 * bot, 2 * bot + 1, 2 * top + 1],
        [np.zeros(bot.size), np.zeros(bot.size), np.ones(top.size)])
    spec = mesh.meta["spec"]
    diff_sets = ["bottom", "top", "left", "right",
                 "crack_lower", "crack_upper"]
    diff_fixed = np.unique(np.concatenate(
        [mesh.boundary_sets[k] for k in diff_sets if k in mesh.boundary_sets
         and mesh.boundary_sets[k].size]))
    a0 = spec.crack_length
    path = PathSpec(origin=(0.0, spec.crack_y), direction=(1.0, 0.0), a0=a0)
    C0 = env.Cenv if C0 is None else C0
    return Scenario(
        name="plate", mesh=mesh, params=params, env=env, load=load,
        mech_fixed=fixed, mech_unit=unit,
        diff_fixed=diff_fixed if diff_fixed.size else None,
        reaction_dofs=2 * top + 1,
        path=path, ligament=spec.width - a0, failure="ligament",
        C0=C0)


def boundary_layer_scenario(mesh: Mesh, params: MaterialParams,
                            env: Environment, load: CyclicLoad,
                            C0: float | None = None,
                            probe_radii=(), freeze_phase=False) -> Scenario:
    """Half-disc K-field problem: Williams displacements on the outer arc,
    symmetry ligament, crack faces free.  load.amplitude is Delta K in
    MPa sqrt(mm)."""
    arc = mesh.boundary_sets["outer_arc"]
    lig = mesh.boundary_sets["ligament"]
    uK = williams_displacements(1.0, mesh.nodes[arc], params.E, params.nu)
    fixed, unit = _dedupe_fixed(
        [2 * arc, 2 * arc + 1, 2 * lig + 1],
        [uK[:, 0], uK[:, 1], np.zeros(lig.size)])
    diff_fixed = np.unique(np.concatenate(
        [mesh.boundary_sets["outer_arc"], mesh.boundary_sets["crack_faces"]]))
    r_core = mesh.meta["r_core"]
    path = PathSpec(origin=(0.0, 0.0), direction=(1.0, 0.0), a0=r_core)
    probes = {}
    for r in probe_radii:
        i = lig[np.argmin(np.abs(mesh.nodes[lig, 0] - r))]
        probes[f"r={r:g}"] = int(i)
    C0 = env.Cenv if C0 is None else C0
    return Scenario(
        name="boundary_layer", mesh=mesh, params=params, env=env, load=load,
        mech_fixed=fixed, mech_unit=unit, diff_fixed=diff_fixed,
        reaction_dofs=None, path=path,
        ligament=mesh.meta["radius"] - r_core,
        failure="ligament", probes=probes, C0=C0,
        freeze_phase=freeze_phase)


def notched_bar_scenario(mesh: Mesh, params: MaterialParams,
                         env: Environment, load: CyclicLoad,
                         C0: float | None = None) -> Scenario:
    """Axisymmetric notched bar: symmetry plane z=0, axis r=0, cyclic
    axial displacement on the top face."""
    axis = mesh.boundary_sets["axis"]
    sym = mesh.boundary_sets["symmetry"]
    top = mesh.boundary_sets["top"]
    fixed, unit = _dedupe_fixed(
        [2 * axis, 2 * sym + 1, 2 * top + 1],
        [np.zeros(axis.size), np.zeros(sym.size), np.ones(top.size)])
    diff_fixed = np.unique(np.concatenate(
        [mesh.boundary_sets["surface"], mesh.boundary_sets["top"]]))
    spec = mesh.meta["spec"]
    root_r, root_z = mesh.meta["notch_root_rz"]
    # growth runs radially inward from the notch root on the z=0 plane
    path = PathSpec(origin=(root_r, root_z), direction=(-1.0, 0.0), a0=0.0)
    probes = {"notch_root": int(sym[np.argmin(
        np.abs(mesh.nodes[sym, 0] - root_r))])}
    C0 = env.Cenv if C0 is None else C0
    return Scenario(
        name="notched_bar", mesh=mesh, params=params, env=env, load=load,
        mech_fixed=fixed, mech_unit=unit, diff_fixed=diff_fixed,
        reaction_dofs=2 * top + 1, path=path, ligament=spec.R_net,
        failure="reaction", probes=probes, C0=C0)


# ---------------------------------------------------------------------------
# driver

@dataclass
class ScenarioResult:
    cycles: np.ndarray          # 1-based cycle index
    delta_a: np.ndarray         # [mm] at end of each cycle
    reaction_peak: np.ndarray   # per cycle
    reaction_valley: np.ndarray
    t_inc: np.ndarray           # per-increment times
    level_inc: np.ndarray       # load level per increment
    reaction_inc: np.ndarray
    probe_C: dict               # name -> per-increment concentration
    failure_cycle: int | None
    state: State
    info: dict

    @property
    def trace(self):
        from .post import CrackTrace
        return CrackTrace(self.cycles, self.delta_a)


def save_checkpoint(path, state: State, cycle: int):
    np.savez_compressed(
        path, version=1, cycle=cycle, time=state.time,
        u=state.u, phi=state.phi, C=state.C, H_qp=state.H_qp,
        alpha_bar_qp=state.alpha_bar_qp, alpha_prev_qp=state.alpha_prev_qp,
        clamp_events=state.clamp_events)


def load_checkpoint(path):
    z = np.load(path)
    if int(z["version"]) != 1:
        raise SolverError(f"unsupported checkpoint version {z['version']}")
    st = State(u=z["u"], phi=z["phi"], C=z["C"], H_qp=z["H_qp"],
               alpha_bar_qp=z["alpha_bar_qp"],
               alpha_prev_qp=z["alpha_prev_qp"],
               time=float(z["time"]),
               clamp_events=int(z["clamp_events"]))
    return st, int(z["cycle"])


def _snapshot(outdir, mesh, disc, state, params, cfg, tag):
    g_qp = (1.0 - np.clip(disc.qp_interp(state.phi), 0, 1)) ** 2 + cfg.k_reg
    sH = disc.nodal_projection(
        disc.sigma_hydrostatic(disc.strains(state.u), params, g_qp))
    write_vtk(
        mesh, f"{outdir}/fields_{tag:04d}.vtk",
        point_data={"phi": state.phi, "C": state.C, "sigma_H": sH,
                    "u": state.u},
        title=f"cycle {tag}")


def run_scenario(scn: Scenario, cfg: SolverConfig | None = None,
                 outdir: str | None = None, resume: str | None = None,
                 n_cycles: int | None = None,
                 stop_delta_a: float | None = None) -> ScenarioResult:
    """March load cycles until failure, the cycle budget, or stop_delta_a.

    Per-increment and per-cycle series are recorded; checkpoints and VTK
    snapshots are written under outdir when enabled in the config.
    """
    cfg = cfg or SolverConfig()
    disc = Discretization(scn.mesh)
    work = Work(cfg)
    load = scn.load
    n_cycles = load.n_cycles_max if n_cycles is None else n_cycles
    skip_diff = scn.env.inert and scn.C0 == 0.0

    mech_bc = DofMap(2 * scn.mesh.n_nodes, scn.mech_fixed,
                     np.zeros(scn.mech_fixed.size))
    diff_bc = None
    if not skip_diff and scn.diff_fixed is not None:
        diff_bc = DofMap(scn.mesh.n_nodes, scn.diff_fixed,
                         np.full(scn.diff_fixed.size, scn.env.Cenv))

    state = State.zeros(scn.mesh, C0=scn.C0, n_qp=disc.n_qp)
    start_cycle = 0
    if resume is not None:
        state, start_cycle = load_checkpoint(resume)

    dt0 = load.period / load.increments_per_cycle
    t_inc, level_inc, reaction_inc = [], [], []
    probe_C = {k: [] for k in scn.probes}
    cyc_idx, cyc_da, cyc_rp, cyc_rv = [], [], [], []
    failure_cycle = None
    t0_wall = _time.perf_counter()

    def advance(t0, t1, depth=0):
        mech_bc.set_values(load_value(load, t1) * scn.mech_unit)
        try:
            return staggered_step(
                disc, state, t1 - t0, mech_bc, diff_bc, scn.params, scn.env,
                cfg, work, skip_diffusion=skip_diff,
                freeze_phase=scn.freeze_phase, t_new=t1)
        except StaggerError as exc:
            if depth >= cfg.max_dt_halvings:
                raise SolverError(
                    f"{scn.name}: no convergence at t={t1:.6g}s "
                    f"(cycle {state.cycle:.2f}) after "
                    f"{cfg.max_dt_halvings} halvings: {exc}") from exc
            tm = 0.5 * (t0 + t1)
            advance(t0, tm, depth + 1)
            return advance(tm, t1, depth + 1)

    done = False
    for n in range(start_cycle, n_cycles):
        r_cycle = []
        for k in range(1, load.increments_per_cycle + 1):
            t1 = (n + k / load.increments_per_cycle) * load.period
            advance(state.time, t1)
            state.cycle = n + k / load.increments_per_cycle
            t_inc.append(t1)
            level_inc.append(load_value(load, t1))
            if scn.reaction_dofs is not None:
                r = float(work.last_reaction_vec[scn.reaction_dofs].sum())
            else:
                r = 0.0
            reaction_inc.append(r)
            r_cycle.append(r)
            for name, node in scn.probes.items():
                probe_C[name].append(float(state.C[node]))
        da = 0.0
        if scn.path is not None:
            da = measure_crack_extension(
                state.phi, scn.mesh, scn.path, cfg.crack_phi_threshold)
        cyc_idx.append(n + 1)
        cyc_da.append(da)
        cyc_rp.append(max(r_cycle))
        cyc_rv.append(min(r_cycle))
        if scn.failure == "ligament" and scn.ligament is not None:
            if da >= cfg.ligament_fraction * scn.ligament:
                failure_cycle = n + 1
                done = True
        elif scn.failure == "reaction":
            if cyc_rp[-1] < cfg.reaction_drop * max(cyc_rp):
                failure_cycle = n + 1
                done = True
        if stop_delta_a is not None and da >= stop_delta_a:
            done = True
        if outdir and cfg.snapshot_every and (n + 1) % cfg.snapshot_every == 0:
            _snapshot(outdir, scn.mesh, disc, state, scn.params, cfg, n + 1)
        if outdir and cfg.checkpoint_every and (n + 1) % cfg.checkpoint_every == 0:
            save_checkpoint(f"{outdir}/checkpoint.npz", state, n + 1)
        if done:
            break

    info = {
        "wall_s": _time.perf_counter() - t0_wall,
        "n_factor": work.mech.n_factor + work.pf.n_factor + work.diff.n_factor,
        "n_solve": work.mech.n_solve + work.pf.n_solve + work.diff.n_solve,
        "clamp_events": state.clamp_events,
        "skip_diffusion": skip_diff,
    }
    return ScenarioResult(
        cycles=np.asarray(cyc_idx, dtype=float),
        delta_a=np.asarray(cyc_da),
        reaction_peak=np.asarray(cyc_rp),
        reaction_valley=np.asarray(cyc_rv),
        t_inc=np.asarray(t_inc),
        level_inc=np.asarray(level_inc),
        reaction_inc=np.asarray(reaction_inc),
        probe_C={k: np.asarray(v) for k, v in probe_C.items()},
        failure_cycle=failure_cycle,
        state=state,
        info=info,
    )
