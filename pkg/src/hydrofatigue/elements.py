"""Isoparametric quadrilateral elements and Gauss quadrature.

Supports 4-node bilinear and 8-node serendipity quads on the bi-unit
parent square, with the 2x2 Gauss rule (full integration for the linear
element, reduced for the quadratic one).
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np


class ElemOrder(enum.Enum):
    LINEAR = 4
    QUADRATIC = 8

    @property
    def n_nodes(self) -> int:
        return self.value


class InvertedElementError(ValueError):
    pass


# Corner ordering is counter-clockwise; midside nodes 4..7 follow edges
# (0,1), (1,2), (2,3), (3,0).
_CORNER_XI = np.array([-1.0, 1.0, 1.0, -1.0])
_CORNER_ETA = np.array([-1.0, -1.0, 1.0, 1.0])


def gauss_2x2():
    """2x2 Gauss rule on [-1,1]^2: (points (4,2), weights (4,))."""
    g = 1.0 / np.sqrt(3.0)
    pts = np.array([[-g, -g], [g, -g], [g, g], [-g, g]])
    return pts, np.ones(4)


def gauss_3x3():
    """3x3 Gauss rule, used for accurate edge/volume integrals."""
    x = np.array([-np.sqrt(0.6), 0.0, np.sqrt(0.6)])
    w = np.array([5.0, 8.0, 5.0]) / 9.0
    X, Y = np.meshgrid(x, x, indexing="ij")
    W = np.outer(w, w)
    return np.column_stack([X.ravel(), Y.ravel()]), W.ravel()


def gauss_edge(npts: int = 3):
    """1D Gauss rule on [-1,1] for edge integrals."""
    if npts == 2:
        g = 1.0 / np.sqrt(3.0)
        return np.array([-g, g]), np.ones(2)
    return np.array([-np.sqrt(0.6), 0.0, np.sqrt(0.6)]), np.array([5.0, 8.0, 5.0]) / 9.0


def shape_functions(order: ElemOrder, xi, eta):
    """Shape functions and parametric gradients at (xi, eta).

    xi, eta may be scalars or 1D arrays of equal length m.  Returns
    N (m, n) and dN (m, n, 2) with n = 4 or 8.
    """
    xi = np.atleast_1d(np.asarray(xi, dtype=float))
    eta = np.atleast_1d(np.asarray(eta, dtype=float))
    m = xi.shape[0]
    if order is ElemOrder.LINEAR:
        N = 0.25 * (1 + xi[:, None] * _CORNER_XI) * (1 + eta[:, None] * _CORNER_ETA)
        dN = np.empty((m, 4, 2))
        dN[:, :, 0] = 0.25 * _CORNER_XI * (1 + eta[:, None] * _CORNER_ETA)
        dN[:, :, 1] = 0.25 * _CORNER_ETA * (1 + xi[:, None] * _CORNER_XI)
        return N, dN

    N = np.empty((m, 8))
    dN = np.empty((m, 8, 2))
    x, e = xi[:, None], eta[:, None]
    xc, ec = _CORNER_XI, _CORNER_ETA
    # corner nodes
    N[:, :4] = 0.25 * (1 + x * xc) * (1 + e * ec) * (x * xc + e * ec - 1)
    dN[:, :4, 0] = 0.25 * xc * (1 + e * ec) * (2 * x * xc + e * ec)
    dN[:, :4, 1] = 0.25 * ec * (1 + x * xc) * (x * xc + 2 * e * ec)
    # midside nodes on eta = -1, +1 edges (xi varies)
    for k, es in [(4, -1.0), (6, 1.0)]:
        N[:, k] = 0.5 * (1 - x[:, 0] ** 2) * (1 + es * e[:, 0])
        dN[:, k, 0] = -x[:, 0] * (1 + es * e[:, 0])
        dN[:, k, 1] = 0.5 * es * (1 - x[:, 0] ** 2)
    # midside nodes on xi = +1, -1 edges (eta varies)
    for k, xs in [(5, 1.0), (7, -1.0)]:
        N[:, k] = 0.5 * (1 + xs * x[:, 0]) * (1 - e[:, 0] ** 2)
        dN[:, k, 0] = 0.5 * xs * (1 - e[:, 0] ** 2)
        dN[:, k, 1] = -e[:, 0] * (1 + xs * x[:, 0])
    return N, dN


@dataclass
class ShapeEval:
    N: np.ndarray       # (n,)
    dNdx: np.ndarray    # (n, 2)
    detJ: float
    r_phys: float       # physical radius (x-coordinate) of the point


def shape_eval(coords: np.ndarray, order: ElemOrder, xi: float, eta: float) -> ShapeEval:
    """Evaluate one element at one parametric point.

    coords is (n, 2).  Raises InvertedElementError when det J <= 0.
    """
    if not (-1 - 1e-12 <= xi <= 1 + 1e-12 and -1 - 1e-12 <= eta <= 1 + 1e-12):
        raise ValueError("parametric point outside the bi-unit square")
    N, dN = shape_functions(order, xi, eta)
    N, dN = N[0], dN[0]
    J = coords.T @ dN           # J[i,j] = dx_i/dxi_j
    detJ = J[0, 0] * J[1, 1] - J[0, 1] * J[1, 0]
    if detJ <= 0.0:
        raise InvertedElementError(f"det J = {detJ:.3e} at ({xi:.3f}, {eta:.3f})")
    Jinv = np.array([[J[1, 1], -J[0, 1]], [-J[1, 0], J[0, 0]]]) / detJ
    dNdx = dN @ Jinv            # dN/dx_i = sum_j dN/dxi_j (J^-1)[j,i]
    x = N @ coords
    return ShapeEval(N=N, dNdx=dNdx, detJ=float(detJ), r_phys=float(x[0]))


def batch_eval(coords: np.ndarray, order: ElemOrder, pts: np.ndarray):
    """Vectorized shape data for many elements at many points.

    coords : (E, n, 2) element nodal coordinates
    pts : (m, 2) parametric points

    Returns N (m, n), dNdx (E, m, n, 2), detJ (E, m), r_phys (E, m).
    """
    N, dN = shape_functions(order, pts[:, 0], pts[:, 1])
    # J[e,m,i,j] = dx_i/dxi_j = sum_n coords[e,n,i] dN[m,n,j]
    J = np.einsum("eni,mnj->emij", coords, dN)
    detJ = J[:, :, 0, 0] * J[:, :, 1, 1] - J[:, :, 0, 1] * J[:, :, 1, 0]
    if np.any(detJ <= 0.0):
        e, m = np.argwhere(detJ <= 0.0)[0]
        raise InvertedElementError(
            f"det J = {detJ[e, m]:.3e} in element {e} at point {m}"
        )
    Jinv = np.empty_like(J)
    Jinv[:, :, 0, 0] = J[:, :, 1, 1]
    Jinv[:, :, 1, 1] = J[:, :, 0, 0]
    Jinv[:, :, 0, 1] = -J[:, :, 0, 1]
    Jinv[:, :, 1, 0] = -J[:, :, 1, 0]
    Jinv /= detJ[:, :, None, None]
    # dNdx[e,m,n,i] = sum_j dN[m,n,j] (J^-1)[e,m,j,i]
    dNdx = np.einsum("mnj,emji->emni", dN, Jinv)
    r_phys = np.einsum("mn,en->em", N, coords[:, :, 0])
    return N, dNdx, detJ, r_phys
