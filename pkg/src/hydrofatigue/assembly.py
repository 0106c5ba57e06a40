"""Element residuals and consistent tangents for the coupled problem.

Three fields are assembled into global sparse systems: displacement (with
a hybrid tension-compression split), phase field (AT2 with history
irreversibility and a degraded fracture energy), and transient hydrogen
diffusion (backward Euler, hydrostatic-stress drift, penalty chemical
boundary on newly cracked material).

All single-field systems are linear within a staggered pass; residuals
are returned together with the exact tangent so r = A x - b holds.

Quadrature-point data layout is (n_elements, n_qp); nodal fields are
flat arrays ordered like mesh.nodes.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import sparse

from .elements import ElemOrder, batch_eval, gauss_2x2
from .material import (
    GAS_CONSTANT,
    MaterialParams,
    Split,
    fatigue_degradation,
    hydrogen_degradation,
)
from .mesh import Mesh, Mode


# ---------------------------------------------------------------------------
# state

@dataclass
class State:
    """Nodal solution fields plus per-quadrature-point history."""

    u: np.ndarray              # (n_nodes, 2) [mm]
    phi: np.ndarray            # (n_nodes,) in [0, 1]
    C: np.ndarray              # (n_nodes,) [wt ppm]
    H_qp: np.ndarray           # (E, q) history max of driving energy [mJ/mm^3]
    alpha_bar_qp: np.ndarray   # (E, q) cumulative fatigue variable [mJ/mm^3]
    alpha_prev_qp: np.ndarray  # (E, q) previous driving value [mJ/mm^3]
    time: float = 0.0
    cycle: float = 0.0
    clamp_events: int = 0

    @classmethod
    def zeros(cls, mesh: Mesh, C0: float = 0.0, n_qp: int = 4) -> "State":
        E = mesh.n_elements
        return cls(
            u=np.zeros((mesh.n_nodes, 2)),
            phi=np.zeros(mesh.n_nodes),
            C=np.full(mesh.n_nodes, float(C0)),
            H_qp=np.zeros((E, n_qp)),
            alpha_bar_qp=np.zeros((E, n_qp)),
            alpha_prev_qp=np.zeros((E, n_qp)),
        )

    def copy(self) -> "State":
        return State(
            self.u.copy(), self.phi.copy(), self.C.copy(),
            self.H_qp.copy(), self.alpha_bar_qp.copy(),
            self.alpha_prev_qp.copy(),
            self.time, self.cycle, self.clamp_events,
        )


# ---------------------------------------------------------------------------
# tension-compression splits (public constitutive API works on 3x3 tensors)

@dataclass
class SplitEnergy:
    psi_plus: np.ndarray
    psi_minus: np.ndarray
    stress: np.ndarray     # (..., 3, 3) [MPa]
    sigmaH: np.ndarray     # (...) [MPa]


def split_energy(strain, params: MaterialParams, split: Split | None = None,
                 g: float | np.ndarray = 1.0) -> SplitEnergy:
    """Tension-compression split of the strain energy density.

    strain : (..., 3, 3) symmetric small-strain tensor(s).
    g : stiffness degradation applied to the returned stress (the split
        energies are always the undamaged quantities).

    psi_plus + psi_minus equals the total undamaged density for every
    split choice.
    """
    split = params.split if split is None else split
    eps = np.asarray(strain, dtype=float)
    lam, mu = params.lame
    tr = np.trace(eps, axis1=-2, axis2=-1)
    dev = eps - tr[..., None, None] * np.eye(3) / 3.0
    psi0 = 0.5 * lam * tr**2 + mu * np.einsum("...ij,...ij->...", eps, eps)
    if split is Split.NOSPLIT:
        pp, pm = psi0, np.zeros_like(psi0)
    elif split is Split.VOLDEV:
        K = lam + 2.0 * mu / 3.0
        trp = np.maximum(tr, 0.0)
        trm = np.minimum(tr, 0.0)
        dev2 = np.einsum("...ij,...ij->...", dev, dev)
        pp = 0.5 * K * trp**2 + mu * dev2
        pm = 0.5 * K * trm**2
    elif split is Split.SPECTRAL:
        w = np.linalg.eigvalsh(eps)
        trp = np.maximum(tr, 0.0)
        trm = np.minimum(tr, 0.0)
        pp = 0.5 * lam * trp**2 + mu * np.sum(np.maximum(w, 0.0) ** 2, axis=-1)
        pm = 0.5 * lam * trm**2 + mu * np.sum(np.minimum(w, 0.0) ** 2, axis=-1)
    else:
        raise ValueError(f"unknown split {split!r}")
    stress = np.asarray(g)[..., None, None] * (
        lam * tr[..., None, None] * np.eye(3) + 2.0 * mu * eps
    )
    sigmaH = np.trace(stress, axis1=-2, axis2=-1) / 3.0
    return SplitEnergy(psi_plus=pp, psi_minus=pm, stress=stress, sigmaH=sigmaH)


def _split_psi_plus(exx, eyy, exy, ezz, params: MaterialParams, split: Split):
    """Fast split-positive energy for quadrature data (out-of-plane axis
    is principal by construction)."""
    lam, mu = params.lame
    tr = exx + eyy + ezz
    if split is Split.NOSPLIT:
        return 0.5 * lam * tr**2 + mu * (exx**2 + eyy**2 + ezz**2 + 2 * exy**2)
    if split is Split.VOLDEV:
        K = lam + 2.0 * mu / 3.0
        m = tr / 3.0
        dev2 = (exx - m) ** 2 + (eyy - m) ** 2 + (ezz - m) ** 2 + 2 * exy**2
        return 0.5 * K * np.maximum(tr, 0.0) ** 2 + mu * dev2
    # spectral: in-plane eigenvalues + hoop
    mid = 0.5 * (exx + eyy)
    rad = np.sqrt((0.5 * (exx - eyy)) ** 2 + exy**2)
    e1, e2 = mid + rad, mid - rad
    pos = (np.maximum(e1, 0.0) ** 2 + np.maximum(e2, 0.0) ** 2
           + np.maximum(ezz, 0.0) ** 2)
    return 0.5 * lam * np.maximum(tr, 0.0) ** 2 + mu * pos


# ---------------------------------------------------------------------------
# discretization: precomputed shape data, element matrices, scatter maps

def _elastic_matrix(params: MaterialParams, mode: Mode) -> np.ndarray:
    lam, mu = params.lame
    if mode is Mode.PLANE_STRAIN:
        return np.array([
            [lam + 2 * mu, lam, 0.0],
            [lam, lam + 2 * mu, 0.0],
            [0.0, 0.0, mu],
        ])
    m = np.array([1.0, 1.0, 0.0, 1.0])
    D = lam * np.outer(m, m)
    D += 2 * mu * np.diag([1.0, 1.0, 0.5, 1.0])
    return D


class Discretization:
    """Shape data, B-matrices and CSR scatter maps for one mesh.

    The 2x2 Gauss rule is used throughout (full integration for the
    4-node element, reduced for the 8-node one).
    """

    def __init__(self, mesh: Mesh):
        self.mesh = mesh
        pts, w = gauss_2x2()
        coords = mesh.element_coords()
        self.N, self.dNdx, detJ, self.r_qp = batch_eval(coords, mesh.elem_order, pts)
        self.n_qp = len(w)
        self.nen = mesh.elem_order.n_nodes
        scale = 2.0 * np.pi * self.r_qp if mesh.mode is Mode.AXISYMMETRIC else 1.0
        self.wdetJ = w[None, :] * detJ * scale              # (E, q)
        self.axisym = mesh.mode is Mode.AXISYMMETRIC
        self.nvoigt = 4 if self.axisym else 3

        E, q, n = mesh.n_elements, self.n_qp, self.nen
        B = np.zeros((E, q, self.nvoigt, 2 * n))
        dN = self.dNdx
        B[:, :, 0, 0::2] = dN[:, :, :, 0]
        B[:, :, 1, 1::2] = dN[:, :, :, 1]
        B[:, :, 2, 0::2] = dN[:, :, :, 1]
        B[:, :, 2, 1::2] = dN[:, :, :, 0]
        if self.axisym:
            # hoop strain u_r / r
            B[:, :, 3, 0::2] = self.N[None, :, :] / self.r_qp[:, :, None]
        self.B = B

        # scalar element matrices: w N N^T and w gradN gradN^T
        self.wNN = np.einsum("eq,qa,qb->eqab", self.wdetJ, self.N, self.N)
        self.wGG = np.einsum("eq,eqai,eqbi->eqab", self.wdetJ, dN, dN)

        conn = mesh.elements.astype(np.int64)
        self.conn = conn
        vec = np.empty((E, 2 * n), dtype=np.int64)
        vec[:, 0::2] = 2 * conn
        vec[:, 1::2] = 2 * conn + 1
        self.edof_vec = vec
        self._maps = {}
        self._BtDB = {}

    # -- scatter maps -------------------------------------------------------
    def csr_map(self, kind: str):
        """(indptr, indices, dataidx) for 'scalar' or 'vector' patterns."""
        if kind in self._maps:
            return self._maps[kind]
        edof = self.conn if kind == "scalar" else self.edof_vec
        ndof = self.mesh.n_nodes * (1 if kind == "scalar" else 2)
        k = edof.shape[1]
        rows = np.repeat(edof, k, axis=1).ravel()
        cols = np.tile(edof, (1, k)).ravel()
        keys = rows * ndof + cols
        order = np.argsort(keys, kind="stable")
        sk = keys[order]
        new = np.empty(sk.shape, dtype=bool)
        new[0] = True
        new[1:] = sk[1:] != sk[:-1]
        slot = np.cumsum(new) - 1
        dataidx = np.empty_like(slot)
        dataidx[order] = slot
        nnz = int(slot[-1]) + 1
        indices = cols[order][new]
        urows = rows[order][new]
        indptr = np.zeros(ndof + 1, dtype=np.int64)
        np.add.at(indptr, urows + 1, 1)
        indptr = np.cumsum(indptr)
        out = (indptr, indices.astype(np.int32), dataidx.reshape(edof.shape[0], k, k), nnz)
        self._maps[kind] = out
        return out

    def assemble(self, kind: str, Ke: np.ndarray) -> sparse.csr_matrix:
        indptr, indices, dataidx, nnz = self.csr_map(kind)
        data = np.bincount(dataidx.ravel(), weights=Ke.ravel(), minlength=nnz)
        n = indptr.shape[0] - 1
        return sparse.csr_matrix((data, indices, indptr), shape=(n, n))

    def BtDB(self, params: MaterialParams):
        key = (params.E, params.nu)
        if key not in self._BtDB:
            D = _elastic_matrix(params, self.mesh.mode)
            self._BtDB[key] = np.einsum(
                "eq,eqca,cd,eqdb->eqab", self.wdetJ, self.B, D, self.B,
                optimize=True,
            )
        return self._BtDB[key]

    # -- field evaluation ---------------------------------------------------
    def qp_interp(self, nodal: np.ndarray) -> np.ndarray:
        """Scalar nodal field -> (E, q) quadrature values."""
        return np.einsum("qn,en->eq", self.N, nodal[self.conn])

    def qp_gradient(self, nodal: np.ndarray) -> np.ndarray:
        """Scalar nodal field -> (E, q, 2) gradients."""
        return np.einsum("eqni,en->eqi", self.dNdx, nodal[self.conn])

    def strains(self, u: np.ndarray) -> np.ndarray:
        """Voigt strains (E, q, nvoigt) from nodal displacements."""
        ue = u.reshape(-1)[self.edof_vec]
        return np.einsum("eqcb,eb->eqc", self.B, ue)

    def strain_components(self, eps_voigt):
        """(exx, eyy, exy, ezz) with ezz the hoop strain when axisymmetric."""
        exx = eps_voigt[..., 0]
        eyy = eps_voigt[..., 1]
        exy = 0.5 * eps_voigt[..., 2]
        ezz = eps_voigt[..., 3] if self.axisym else np.zeros_like(exx)
        return exx, eyy, exy, ezz

    def psi_total(self, eps_voigt, params: MaterialParams):
        D = _elastic_matrix(params, self.mesh.mode)
        return 0.5 * np.einsum("eqc,cd,eqd->eq", eps_voigt, D, eps_voigt)

    def psi_plus(self, eps_voigt, params: MaterialParams, split=None):
        split = params.split if split is None else split
        exx, eyy, exy, ezz = self.strain_components(eps_voigt)
        return _split_psi_plus(exx, eyy, exy, ezz, params, split)

    def sigma_hydrostatic(self, eps_voigt, params: MaterialParams, g_qp):
        """Hydrostatic stress of the degraded (hybrid) stress, (E, q)."""
        lam, mu = params.lame
        exx, eyy, exy, ezz = self.strain_components(eps_voigt)
        tr = exx + eyy + ezz
        # tr(sigma)/3 = (lam + 2 mu / 3) tr(eps), then degraded
        return g_qp * (lam + 2.0 * mu / 3.0) * tr

    def lumped_mass(self) -> np.ndarray:
        """Scalar lumped mass vector (HRZ diagonal scaling), (n_nodes,)."""
        we = self.wdetJ.sum(axis=1)                       # element volumes
        diag = np.einsum("eqaa->ea", self.wNN)
        diag *= (we / diag.sum(axis=1))[:, None]
        m = np.zeros(self.mesh.n_nodes)
        np.add.at(m, self.conn, diag)
        return m

    def nodal_projection(self, qp_vals: np.ndarray) -> np.ndarray:
        """Lumped L2 projection of (E, q) quadrature data to nodes."""
        num = np.zeros(self.mesh.n_nodes)
        den = np.zeros(self.mesh.n_nodes)
        wN = np.einsum("eq,qn->eqn", self.wdetJ, self.N)
        np.add.at(num, self.conn, np.einsum("eqn,eq->en", wN, qp_vals))
        np.add.at(den, self.conn, wN.sum(axis=1))
        return num / den

    def integrate(self, qp_vals: np.ndarray) -> float:
        return float(np.sum(self.wdetJ * qp_vals))


# ---------------------------------------------------------------------------
# Dirichlet bookkeeping

class DofMap:
    """Fixed/free partition of a field's dofs with prescribed values."""

    def __init__(self, ndof: int, fixed: np.ndarray, values: np.ndarray | None = None):
        self.ndof = ndof
        fixed = np.asarray(fixed, dtype=np.int64)
        self.fixed = fixed
        mask = np.ones(ndof, dtype=bool)
        mask[fixed] = False
        self.free = np.flatnonzero(mask)
        self.values = np.zeros(fixed.shape[0]) if values is None else np.asarray(values, float)

    def set_values(self, values):
        v = np.asarray(values, dtype=float)
        if v.shape != self.fixed.shape:
            raise ValueError("prescribed value array has wrong shape")
        self.values = v

    def apply(self, x_full: np.ndarray) -> np.ndarray:
        x_full = x_full.copy()
        x_full[self.fixed] = self.values
        return x_full

    def reduce(self, A: sparse.csr_matrix, r_full: np.ndarray):
        return r_full[self.free], A[self.free][:, self.free]


# ---------------------------------------------------------------------------
# field systems (residual + tangent)

def mechanics_system(disc: Discretization, u_full: np.ndarray,
                     phi: np.ndarray, params: MaterialParams,
                     k_reg: float = 1e-9):
    """Momentum residual and tangent, hybrid scheme: sigma = g(phi) C eps.

    u_full is the flat (2 n_nodes,) displacement with Dirichlet values
    already inserted.  Returns (r_full, K_full); reduction to free dofs is
    the caller's job via DofMap.
    """
    phi_qp = np.clip(disc.qp_interp(phi), 0.0, 1.0)
    g = (1.0 - phi_qp) ** 2 + k_reg
    Ke = np.einsum("eq,eqab->eab", g, disc.BtDB(params))
    K = disc.assemble("vector", Ke)
    r = K @ u_full
    return r, K


def phasefield_system(disc: Discretization, Gd_qp: np.ndarray,
                      H_qp: np.ndarray, params: MaterialParams):
    """AT2 phase field equilibrium: Gd(phi/ell - ell lap phi) = 2(1-phi)H.

    Returns (b_full, A_full) of the linear system A phi = b; the residual
    at a given phi is A phi - b.
    """
    ell = params.ell
    cM = Gd_qp / ell + 2.0 * H_qp
    Ae = np.einsum("eq,eqab->eab", cM, disc.wNN)
    Ae += np.einsum("eq,eqab->eab", Gd_qp * ell, disc.wGG)
    A = disc.assemble("scalar", Ae)
    be = np.einsum("eq,qn->en", 2.0 * H_qp * disc.wdetJ, disc.N)
    b = np.zeros(disc.mesh.n_nodes)
    np.add.at(b, disc.conn, be)
    return b, A


def diffusion_system(disc: Discretization, C_old: np.ndarray,
                     sigmaH_nodal: np.ndarray, phi_qp: np.ndarray,
                     params: MaterialParams, dt: float,
                     C_env: float = 0.0, k_pen: float = 0.0,
                     phi_threshold: float = 0.9):
    """Backward-Euler hydrogen transport step: M (C-C_old)/dt + K C = f.

    K contains Fickian diffusion minus the hydrostatic-stress drift
    (dilute transport limit); quadrature points with phi > phi_threshold
    add a penalty reaction k_pen (C - C_env) that imposes the environment
    on newly created crack surfaces.

    Returns (b_full, A_full) with A C = b the implicit system; residual
    at C is A C - b.
    """
    if dt <= 0:
        raise ValueError("dt must be positive")
    n = disc.mesh.n_nodes
    M = disc.lumped_mass()
    D = params.D
    Ke = np.einsum("eq,eqab->eab", np.full_like(phi_qp, D), disc.wGG)
    # drift: + (D VH / R T) (gradN_a . grad sigmaH) N_b, moved to the lhs
    # with a negative sign from the flux divergence
    gsH = disc.qp_gradient(sigmaH_nodal)                 # (E, q, 2)
    coef = D * params.VH / (GAS_CONSTANT * params.T)
    drift = np.einsum("eq,eqai,eqi,qb->eab", disc.wdetJ * coef,
                      disc.dNdx, gsH, disc.N, optimize=True)
    Ke -= drift
    b = M * C_old / dt
    if k_pen > 0.0:
        pen = k_pen * (phi_qp > phi_threshold)
        if pen.any():
            Ke += np.einsum("eq,eqab->eab", pen, disc.wNN)
            be = np.einsum("eq,qn->en", pen * C_env * disc.wdetJ, disc.N)
            np.add.at(b, disc.conn, be)
    A = disc.assemble("scalar", Ke)
    A += sparse.diags(M / dt)
    return b, A.tocsr()


def update_history(disc: Discretization, state: State, params: MaterialParams,
                   split: Split | None = None):
    """Commit history after an accepted increment.

    H tracks max of the split-positive energy (Kuhn-Tucker); the fatigue
    variable accumulates Delta alpha = pos(alpha_new - alpha_prev) with
    alpha = g(phi) psi_plus (psi_plus = total density for NoSplit).
    """
    split = params.split if split is None else split
    eps = disc.strains(state.u)
    psi_p = disc.psi_plus(eps, params, split)
    phi_qp = np.clip(disc.qp_interp(state.phi), 0.0, 1.0)
    alpha = (1.0 - phi_qp) ** 2 * psi_p
    np.maximum(state.H_qp, psi_p, out=state.H_qp)
    grow = alpha > state.alpha_prev_qp
    state.alpha_bar_qp[grow] += (alpha - state.alpha_prev_qp)[grow]
    state.alpha_prev_qp = alpha
    return state


def degraded_Gd_qp(disc: Discretization, C_nodal: np.ndarray,
                   alpha_bar_qp: np.ndarray, params: MaterialParams):
    """Quadrature-point degraded fracture energy f_C(C) f(alpha_bar) Gc."""
    C_qp = np.maximum(disc.qp_interp(C_nodal), 0.0)
    fC = hydrogen_degradation(C_qp, params)
    fa = fatigue_degradation(alpha_bar_qp, params)
    return fC * fa * params.Gc
