"""Structured quadrilateral meshes with local refinement bands.

Generators cover the three scenario geometries: a unit square plate with a
mid-height edge-crack seam (4-node quads), a half-disc boundary layer
model with a crack along the negative x-axis (8-node quads), and an
axisymmetric notched cylindrical bar (8-node quads).  A plain rectangle
builder is provided for verification problems.

Sizes in the refinement band are enforced at build time; all builders
check for inverted elements.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .elements import ElemOrder, batch_eval, gauss_2x2


class Mode(enum.Enum):
    PLANE_STRAIN = "plane_strain"
    AXISYMMETRIC = "axisymmetric"


class MeshError(ValueError):
    pass


@dataclass(frozen=True)
class RefinementBand:
    """Geometric region with a target element size h.

    kind "bbox": params (x0, x1, y0, y1).  kind "sector": params
    (r_max, theta_max), the sector 0 <= atan2(y,x) <= theta_max about the
    origin.
    """

    kind: str
    params: tuple
    h: float

    def contains(self, xy: np.ndarray) -> np.ndarray:
        x, y = xy[..., 0], xy[..., 1]
        if self.kind == "bbox":
            x0, x1, y0, y1 = self.params
            return (x >= x0) & (x <= x1) & (y >= y0) & (y <= y1)
        if self.kind == "sector":
            r_max, theta_max = self.params
            r = np.hypot(x, y)
            th = np.arctan2(y, x)
            return (r <= r_max) & (th >= -1e-12) & (th <= theta_max)
        raise ValueError(f"unknown band kind {self.kind!r}")


@dataclass
class Mesh:
    nodes: np.ndarray                      # (N, 2) [mm]; (r, z) when axisymmetric
    elements: np.ndarray                   # (E, 4) or (E, 8)
    elem_order: ElemOrder
    mode: Mode
    boundary_sets: dict = field(default_factory=dict)    # name -> node ids
    boundary_edges: dict = field(default_factory=dict)   # name -> (m, 2|3) ids
    refinement_band: RefinementBand | None = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.nodes = np.ascontiguousarray(self.nodes, dtype=float)
        self.elements = np.ascontiguousarray(self.elements, dtype=np.int32)
        self.nodes.flags.writeable = False
        self.elements.flags.writeable = False

    @property
    def n_nodes(self) -> int:
        return self.nodes.shape[0]

    @property
    def n_elements(self) -> int:
        return self.elements.shape[0]

    def element_coords(self) -> np.ndarray:
        return self.nodes[self.elements]


def graded_line(a, b, h_fine, fine_lo=None, fine_hi=None, growth=1.2, h_max=None):
    """1D breakpoints on [a, b]: uniform spacing h_fine on [fine_lo, fine_hi],
    geometric coarsening (ratio `growth`, cap `h_max`) towards both ends."""
    if not (b > a and h_fine > 0 and growth > 1):
        raise MeshError("need b > a, h_fine > 0, growth > 1")
    lo = a if fine_lo is None else max(a, fine_lo)
    hi = b if fine_hi is None else min(b, fine_hi)
    if hi < lo:
        raise MeshError("fine interval is inverted")
    h_max = math.inf if h_max is None else h_max

    def coarsen(length):
        # step sequence leaving the fine zone; rescaled to fit exactly
        if length <= 1e-14:
            return []
        steps, h, total = [], h_fine, 0.0
        while total < length:
            h = min(h * growth, h_max)
            steps.append(h)
            total += h
        return [s * (length / total) for s in steps]

    if hi > lo:
        n = max(1, int(math.ceil((hi - lo) / h_fine - 1e-9)))
        mid = np.linspace(lo, hi, n + 1)
    else:
        mid = np.array([lo])
    left = lo - np.cumsum(coarsen(lo - a))[::-1] if lo > a else np.empty(0)
    if left.size:
        left[0] = a
    right = hi + np.cumsum(coarsen(b - hi)) if hi < b else np.empty(0)
    if right.size:
        right[-1] = b
    return np.concatenate([left, mid, right])


def _where(nodes, mask):
    return np.flatnonzero(mask).astype(np.int32)


def element_max_edge(mesh: Mesh) -> np.ndarray:
    """Longest corner-to-corner edge per element."""
    c = mesh.nodes[mesh.elements[:, :4]]
    d = c - np.roll(c, -1, axis=1)
    return np.sqrt((d**2).sum(axis=2)).max(axis=1)


def audit_refinement_band(mesh: Mesh):
    """(max element size inside the band, number of band elements)."""
    band = mesh.refinement_band
    if band is None:
        return 0.0, 0
    centroid = mesh.nodes[mesh.elements[:, :4]].mean(axis=1)
    inside = band.contains(centroid)
    if not inside.any():
        return 0.0, 0
    return float(element_max_edge(mesh)[inside].max()), int(inside.sum())


def _check_mesh(mesh: Mesh):
    pts, _ = gauss_2x2()
    batch_eval(mesh.element_coords(), mesh.elem_order, pts)  # raises if inverted
    band = mesh.refinement_band
    if band is not None:
        hmax, n = audit_refinement_band(mesh)
        if n and hmax > band.h * (1 + 1e-6):
            raise MeshError(f"band element size {hmax:.3e} exceeds target {band.h:.3e}")
    for name, ids in mesh.boundary_sets.items():
        if ids.size and (ids.min() < 0 or ids.max() >= mesh.n_nodes):
            raise MeshError(f"boundary set {name!r} references missing nodes")
    return mesh


# ---------------------------------------------------------------------------
# plain rectangle (verification problems)

def build_rect_mesh(width, height, nx, ny, order=ElemOrder.LINEAR,
                    mode=Mode.PLANE_STRAIN) -> Mesh:
    """Uniform rectangle [0,width] x [0,height] with nx x ny elements."""
    xs = np.linspace(0.0, width, nx + 1)
    ys = np.linspace(0.0, height, ny + 1)
    if order is ElemOrder.LINEAR:
        nodes, elems, corner = _tensor_q4(xs, ys)
        edge_rows = None
    else:
        lat = _Q8Lattice(xs, ys, lambda u, v: (u, v))
        nodes, elems, corner = lat.nodes, lat.elements, lat.corner_ids
        edge_rows = lat
    tol = 1e-9 * max(width, height)
    x, y = nodes[:, 0], nodes[:, 1]
    sets = {
        "left": _where(nodes, x < tol),
        "right": _where(nodes, x > width - tol),
        "bottom": _where(nodes, y < tol),
        "top": _where(nodes, y > height - tol),
    }
    edges = {}
    if order is ElemOrder.LINEAR:
        edges["top"] = np.column_stack([corner[:-1, -1], corner[1:, -1]])
        edges["right"] = np.column_stack([corner[-1, :-1], corner[-1, 1:]])
    else:
        edges["top"] = edge_rows.edges_v_line(-1)
        edges["right"] = edge_rows.edges_u_line(-1)
    mesh = Mesh(nodes, elems, order, mode, sets, edges,
                meta={"width": width, "height": height})
    return _check_mesh(mesh)


def _tensor_q4(xs, ys):
    nx, ny = len(xs), len(ys)
    X, Y = np.meshgrid(xs, ys, indexing="ij")
    nodes = np.column_stack([X.ravel(), Y.ravel()])
    corner = np.arange(nx * ny).reshape(nx, ny)
    i, j = np.meshgrid(np.arange(nx - 1), np.arange(ny - 1), indexing="ij")
    elems = np.column_stack([
        corner[i, j].ravel(), corner[i + 1, j].ravel(),
        corner[i + 1, j + 1].ravel(), corner[i, j + 1].ravel(),
    ])
    return nodes, elems, corner


class _Q8Lattice:
    """Serendipity-quad lattice over a mapped structured grid.

    u_lines/v_lines are corner coordinates in parameter space; midside
    nodes sit at parameter midpoints and are pushed through `mapfun`,
    so curved boundaries (arcs, notch profiles) are captured
    quadratically with boundary nodes exactly on the true surface.
    """

    def __init__(self, u_lines, v_lines, mapfun):
        nu, nv = len(u_lines) - 1, len(v_lines) - 1
        up = np.empty(2 * nu + 1)
        up[0::2] = u_lines
        up[1::2] = 0.5 * (np.asarray(u_lines[:-1]) + np.asarray(u_lines[1:]))
        vp = np.empty(2 * nv + 1)
        vp[0::2] = v_lines
        vp[1::2] = 0.5 * (np.asarray(v_lines[:-1]) + np.asarray(v_lines[1:]))
        keep = ~(np.arange(2 * nu + 1)[:, None] % 2 == 1) | ~(
            np.arange(2 * nv + 1)[None, :] % 2 == 1
        )
        ids = -np.ones((2 * nu + 1, 2 * nv + 1), dtype=np.int64)
        ids[keep] = np.arange(keep.sum())
        U, V = np.meshgrid(up, vp, indexing="ij")
        xu, xv = mapfun(U[keep], V[keep])
        self.nodes = np.column_stack([xu, xv])
        self.ids = ids
        self.corner_ids = ids[0::2, 0::2]
        self.nu, self.nv = nu, nv
        i, j = np.meshgrid(np.arange(nu), np.arange(nv), indexing="ij")
        a, b = 2 * i.ravel(), 2 * j.ravel()
        self.elements = np.column_stack([
            ids[a, b], ids[a + 2, b], ids[a + 2, b + 2], ids[a, b + 2],
            ids[a + 1, b], ids[a + 2, b + 1], ids[a + 1, b + 2], ids[a, b + 1],
        ])

    def nodes_u_line(self, iu):
        return self.ids[2 * (iu % (self.nu + 1)), :][self.ids[2 * (iu % (self.nu + 1)), :] >= 0]

    def nodes_v_line(self, iv):
        row = self.ids[:, 2 * (iv % (self.nv + 1))]
        return row[row >= 0]

    def edges_u_line(self, iu):
        row = self.ids[2 * (iu % (self.nu + 1)), :]
        return np.column_stack([row[0:-2:2], row[2::2], row[1::2]])

    def edges_v_line(self, iv):
        col = self.ids[:, 2 * (iv % (self.nv + 1))]
        return np.column_stack([col[0:-2:2], col[2::2], col[1::2]])


# ---------------------------------------------------------------------------
# cracked square plate

@dataclass(frozen=True)
class PlateSpec:
    width: float = 1.0
    height: float = 1.0
    crack_length: float = 0.5
    crack_y: float = 0.5
    band_halfwidth: float | None = None    # defaults to 16 h_fine
    band_x0: float | None = None           # defaults to crack_length - 16 h_fine
    band_x1: float | None = None           # defaults to width
    growth: float = 1.2
    h_coarse: float | None = None          # cap on coarse spacing; 25 h_fine


def build_plate_mesh(spec: PlateSpec, h_fine: float) -> Mesh:
    """Square plate, 4-node quads, mid-height edge crack as a duplicated-node
    seam from x=0 to x=crack_length at y=crack_y.

    Boundary sets: bottom/top/left/right, crack_lower/crack_upper (seam
    faces incl. the shared tip node), crack_tip, outer (all of the above).
    """
    if h_fine <= 0:
        raise MeshError("h_fine must be positive")
    W, H, a0, yc = spec.width, spec.height, spec.crack_length, spec.crack_y
    if not (0 <= a0 < W and 0 < yc < H):
        raise MeshError("crack must start on the left edge and lie inside the plate")
    bh = spec.band_halfwidth if spec.band_halfwidth is not None else 16 * h_fine
    x0 = spec.band_x0 if spec.band_x0 is not None else max(0.0, a0 - 16 * h_fine)
    x1 = spec.band_x1 if spec.band_x1 is not None else W
    hc = spec.h_coarse if spec.h_coarse is not None else 25 * h_fine
    g = spec.growth

    if a0 > 0:
        xs = np.concatenate([
            graded_line(0.0, a0, h_fine, fine_lo=min(max(x0, 0.0), a0), fine_hi=a0,
                        growth=g, h_max=hc)[:-1],
            graded_line(a0, W, h_fine, fine_lo=a0, fine_hi=x1, growth=g, h_max=hc),
        ])
    else:
        xs = graded_line(0.0, W, h_fine, fine_lo=x0, fine_hi=x1, growth=g, h_max=hc)
    ys = np.concatenate([
        graded_line(0.0, yc, h_fine, fine_lo=yc - bh, fine_hi=yc,
                    growth=g, h_max=hc)[:-1],
        graded_line(yc, H, h_fine, fine_lo=yc, fine_hi=yc + bh, growth=g, h_max=hc),
    ])

    nodes, elems, corner = _tensor_q4(xs, ys)
    tol = 1e-9 * max(W, H)

    # duplicate seam nodes (y = yc, x < a0); elements above the seam are
    # remapped to the copies so the crack faces can separate
    tip_ids = np.empty(0, dtype=np.int32)
    low_ids = np.empty(0, dtype=np.int32)
    up_ids = np.empty(0, dtype=np.int32)
    if a0 > 0:
        seam = np.flatnonzero(
            (np.abs(nodes[:, 1] - yc) < tol) & (nodes[:, 0] < a0 - tol)
        )
        dup_start = nodes.shape[0]
        nodes = np.vstack([nodes, nodes[seam]])
        remap = -np.ones(dup_start, dtype=np.int64)
        remap[seam] = np.arange(dup_start, nodes.shape[0])
        centroid_y = nodes[elems].mean(axis=1)[:, 1]
        above = centroid_y > yc
        e_above = elems[above]
        hit = remap[e_above] >= 0
        e_above[hit] = remap[e_above][hit]
        elems = elems.copy()
        elems[above] = e_above
        tip = np.flatnonzero(
            (np.abs(nodes[:, 1] - yc) < tol) & (np.abs(nodes[:, 0] - a0) < tol)
        )
        tip_ids = tip.astype(np.int32)
        low_ids = np.concatenate([seam, tip]).astype(np.int32)
        up_ids = np.concatenate([np.arange(dup_start, nodes.shape[0]), tip]).astype(np.int32)

    x, y = nodes[:, 0], nodes[:, 1]
    sets = {
        "bottom": _where(nodes, y < tol),
        "top": _where(nodes, y > H - tol),
        "left": _where(nodes, x < tol),
        "right": _where(nodes, x > W - tol),
        "crack_lower": low_ids,
        "crack_upper": up_ids,
        "crack_tip": tip_ids,
    }
    sets["outer"] = np.unique(np.concatenate([v for v in sets.values() if v.size]))
    edges = {
        "top": np.column_stack([corner[:-1, -1], corner[1:, -1]]),
        "bottom": np.column_stack([corner[:-1, 0], corner[1:, 0]]),
    }
    band = RefinementBand("bbox", (x0, x1, yc - bh, yc + bh), h_fine)
    mesh = Mesh(nodes, elems, ElemOrder.LINEAR, Mode.PLANE_STRAIN, sets, edges,
                refinement_band=band,
                meta={"spec": spec, "h_fine": h_fine, "crack_tip_xy": (a0, yc)})
    return _check_mesh(mesh)


# ---------------------------------------------------------------------------
# boundary layer half-disc

def build_boundary_layer_mesh(radius: float, h_fine: float, *, r_core=None,
                              r_band=None, growth=1.15, theta_coarse=None) -> Mesh:
    """Upper half-disc with crack faces along the negative x-axis.

    The crack tip is resolved as a small circular core hole of radius
    r_core (default h_fine/2) whose rim acts as the initial tip.  The
    refinement band is the sector r <= r_band around the positive x-axis
    ligament where crack growth takes place.

    Boundary sets: outer_arc, ligament (y=0, x>0), crack_faces (y=0, x<0),
    hole; edge set outer_arc.
    """
    if radius <= 0 or h_fine <= 0:
        raise MeshError("radius and h_fine must be positive")
    rc = h_fine / 2 if r_core is None else r_core
    rb = min(50 * h_fine, 0.4 * radius) if r_band is None else r_band
    if not rc < rb < radius:
        raise MeshError("need r_core < r_band < radius")
    th_c = theta_coarse if theta_coarse is not None else math.pi / 16

    r_lines = graded_line(rc, radius, h_fine, fine_lo=rc, fine_hi=rb,
                          growth=growth, h_max=0.2 * radius)
    dth = h_fine / rb
    th_f = min(25 * h_fine / rb, math.pi / 4)
    # fine wedge around the ligament, milder refinement at the crack flank
    th_lo = graded_line(0.0, math.pi / 2, dth, fine_lo=0.0, fine_hi=th_f,
                        growth=growth, h_max=th_c)
    th_hi = graded_line(math.pi / 2, math.pi, 4 * dth,
                        fine_lo=math.pi - min(4 * th_f, math.pi / 4),
                        fine_hi=math.pi, growth=growth, h_max=th_c)
    th_lines = np.concatenate([th_lo[:-1], th_hi])

    lat = _Q8Lattice(r_lines, th_lines,
                     lambda r, t: (r * np.cos(t), r * np.sin(t)))
    nodes = lat.nodes
    tol = 1e-9 * radius
    rr = np.hypot(nodes[:, 0], nodes[:, 1])
    sets = {
        "outer_arc": _where(nodes, rr > radius - tol),
        "ligament": _where(nodes, (np.abs(nodes[:, 1]) < tol) & (nodes[:, 0] > 0)),
        "crack_faces": _where(nodes, (np.abs(nodes[:, 1]) < tol) & (nodes[:, 0] < 0)),
        "hole": _where(nodes, rr < rc + tol),
    }
    edges = {"outer_arc": lat.edges_u_line(-1)}
    band = RefinementBand("sector", (rb, th_f), h_fine)
    mesh = Mesh(nodes, lat.elements, ElemOrder.QUADRATIC, Mode.PLANE_STRAIN,
                sets, edges, refinement_band=band,
                meta={"radius": radius, "r_core": rc, "r_band": rb,
                      "h_fine": h_fine})
    return _check_mesh(mesh)


# ---------------------------------------------------------------------------
# axisymmetric notched bar

@dataclass(frozen=True)
class BarSpec:
    """Circumferential V-notch with a circular root arc, half-length model.

    The notch root sits at (r=R_net, z=0); the surface follows an arc of
    radius `root_radius` blending into straight flanks of slope
    `flank_slope` = dR/dz, up to the shank radius R_gross.
    """

    R_gross: float = 4.0
    R_net: float = 3.0
    # tuned so the meshed notch has an elastic stress concentration factor
    # of 3.354 on the net section (converged value 3.40, h->0)
    root_radius: float = 0.2533
    flank_slope: float = math.sqrt(3.0)
    length: float = 12.0                  # modelled half-length
    band_depth: float | None = None       # radial extent of fine zone; 25 h
    band_z: float | None = None           # axial extent of fine zone; 25 h
    growth: float = 1.2

    def profile(self):
        """Surface radius R(z) and the shoulder coordinates (z_t, z_s)."""
        rho, m = self.root_radius, self.flank_slope
        z_t = rho * m / math.sqrt(1.0 + m * m)
        R_t = self.R_net + rho - math.sqrt(rho * rho - z_t * z_t)
        z_s = z_t + (self.R_gross - R_t) / m
        if z_s >= self.length:
            raise MeshError("bar too short for the notch profile")

        def R(z):
            z = np.asarray(z, dtype=float)
            arc = self.R_net + rho - np.sqrt(np.maximum(rho * rho - z * z, 0.0))
            flank = R_t + m * (z - z_t)
            return np.where(z <= z_t, arc, np.where(z <= z_s, flank, self.R_gross))

        return R, z_t, z_s


def build_notched_bar_mesh(spec: BarSpec, h_fine: float) -> Mesh:
    """Axisymmetric half-model of the notched bar, 8-node quads.

    Coordinates are (r, z) with the symmetry plane of the notch at z=0.
    Boundary sets: axis (r=0), symmetry (z=0), top (z=length, loaded),
    surface (outer surface incl. notch), notch_root (surface with z <=
    shoulder).  Edge set: top.
    """
    if h_fine <= 0:
        raise MeshError("h_fine must be positive")
    if not 0 < spec.R_net < spec.R_gross:
        raise MeshError("need 0 < R_net < R_gross")
    if spec.root_radius <= 0:
        raise MeshError("root radius must be positive")
    R, z_t, z_s = spec.profile()
    bd = spec.band_depth if spec.band_depth is not None else 25 * h_fine
    bz = spec.band_z if spec.band_z is not None else 25 * h_fine
    g = spec.growth

    # The radial coordinate is xi*R(z), so generated spacings stretch by
    # R(z)/R_net and axial edges tilt with the profile slope inside the
    # band; shrink the generating size to keep physical edges <= h_fine.
    zz = np.linspace(0.0, bz, 400)
    slope_max = float(np.max(np.abs(np.diff(R(zz)) / np.diff(zz)))) if bz > 0 else 0.0
    stretch = float(R(bz)) / spec.R_net * math.sqrt(1.0 + slope_max**2)
    h_gen = h_fine / max(stretch, 1.0)

    # radial parameter xi in [0,1]: r = xi * R(z); spacing set on the net
    # section, with the fine zone deepened so that after stretching by
    # R(z)/R_net it still covers r >= R_net - bd at every z in the band
    r_fine_lo = max(0.0, (spec.R_net - bd) * spec.R_net / float(R(bz)))
    r_net_lines = graded_line(0.0, spec.R_net, h_gen,
                              fine_lo=r_fine_lo, fine_hi=spec.R_net,
                              growth=g, h_max=0.15 * spec.R_net)
    xi_lines = r_net_lines / spec.R_net
    z_lines = graded_line(0.0, spec.length, h_gen, fine_lo=0.0, fine_hi=bz,
                          growth=g, h_max=0.12 * spec.length)

    lat = _Q8Lattice(xi_lines, z_lines, lambda xi, z: (xi * R(z), z))
    nodes = lat.nodes
    tol = 1e-9 * spec.length
    r, z = nodes[:, 0], nodes[:, 1]
    on_surface = np.abs(r - R(z)) < 1e-9 * spec.R_gross
    sets = {
        "axis": _where(nodes, r < tol),
        "symmetry": _where(nodes, np.abs(z) < tol),
        "top": _where(nodes, z > spec.length - tol),
        "surface": _where(nodes, on_surface),
        "notch_root": _where(nodes, on_surface & (z <= z_s + tol)),
    }
    edges = {"top": lat.edges_v_line(-1)}
    band = RefinementBand(
        "bbox", (spec.R_net - bd, spec.R_gross, 0.0, bz), h_fine
    )
    mesh = Mesh(nodes, lat.elements, ElemOrder.QUADRATIC, Mode.AXISYMMETRIC,
                sets, edges, refinement_band=band,
                meta={"spec": spec, "h_fine": h_fine, "z_shoulder": z_s,
                      "notch_root_rz": (spec.R_net, 0.0)})
    return _check_mesh(mesh)


# ---------------------------------------------------------------------------
# VTK export

_VTK_CELL = {ElemOrder.LINEAR: 9, ElemOrder.QUADRATIC: 23}


def write_vtk(mesh: Mesh, path, point_data=None, cell_data=None, title="mesh"):
    """Legacy ASCII VTK unstructured grid (cell types 9 / 23)."""
    e = mesh.elements
    k = e.shape[1]
    with open(path, "w") as f:
        f.write(f"# vtk DataFile Version 3.0\n{title}\nASCII\n")
        f.write("DATASET UNSTRUCTURED_GRID\n")
        f.write(f"POINTS {mesh.n_nodes} double\n")
        for x, y in mesh.nodes:
            f.write(f"{x:.10g} {y:.10g} 0\n")
        f.write(f"CELLS {mesh.n_elements} {mesh.n_elements * (k + 1)}\n")
        for row in e:
            f.write(f"{k} " + " ".join(map(str, row)) + "\n")
        f.write(f"CELL_TYPES {mesh.n_elements}\n")
        f.write("\n".join([str(_VTK_CELL[mesh.elem_order])] * mesh.n_elements) + "\n")
        for header, data in [("POINT_DATA", point_data), ("CELL_DATA", cell_data)]:
            if not data:
                continue
            n = mesh.n_nodes if header == "POINT_DATA" else mesh.n_elements
            f.write(f"{header} {n}\n")
            for name, arr in data.items():
                arr = np.asarray(arr)
                if arr.ndim == 1:
                    f.write(f"SCALARS {name} double 1\nLOOKUP_TABLE default\n")
                    f.write("\n".join(f"{v:.10g}" for v in arr) + "\n")
                else:
                    f.write(f"VECTORS {name} double\n")
                    for row in arr:
                        vy = row[1] if arr.shape[1] > 1 else 0.0
                        f.write(f"{row[0]:.10g} {vy:.10g} 0\n")
