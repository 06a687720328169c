"""Electrostatic cross-section solver and thin-interface participation.

The Laplace equation div(eps grad V) = 0 is discretized with a node-centred
finite-volume five-point stencil on a graded tensor grid.  Permittivity is
piecewise constant per cell; every material boundary lies on a grid line, so
the flux through a dual edge is the exact cell-weighted sum of the two cells
it crosses.  The discrete energy is the matching edge quadrature
W = 1/2 V^T A V, split per region.

Thin dielectric layers (metal-air, metal-substrate, substrate-air) are never
meshed.  Their energy follows from the field at the bare surface by the
boundary-condition rescaling

    u = 1/2 eps0 (eps_layer E_t^2 + (eps_side E_n)^2 / eps_layer)

with ``E_t = 0`` on conductors, integrated along the surface and multiplied by
the layer thickness.  Field singularities at metal corners are handled by an
exclusion zone of one cell whose contribution is extrapolated with a local
power law.

All energies are per unit length, in units of eps0 times volt squared unless
stated otherwise; participation fractions are dimensionless.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Literal, Sequence

import numpy as np
import scipy.sparse as sp
from scipy.integrate import trapezoid
from scipy.optimize import brentq
from scipy.sparse.linalg import cg, splu

from .circuit import ConvergenceError

__all__ = [
    "EPS0",
    "InterfaceLayer",
    "DEFAULT_LAYERS",
    "CrossSectionGeometry",
    "ParallelPlateGeometry",
    "NestedSquaresGeometry",
    "FieldSolution",
    "InterfaceEPR",
    "ConvergenceStudy",
    "solve_potential",
    "interface_participation",
    "convergence_study",
    "richardson",
    "box_sensitivity",
    "write_potential",
]

EPS0 = 8.8541878128e-12  # F/m

VACUUM, SUBSTRATE, METAL = 0, 1, 2
KINDS = ("MA", "MS", "SA")

# graded spacing h(d) = (L/R) (C + A d/L), d = distance to nearest singular line
_GRADE_C = 0.02
_GRADE_A = 9.0
_MIN_CELLS = 6


@dataclass(frozen=True)
class InterfaceLayer:
    kind: str
    sigma: float
    eps: float

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown interface kind {self.kind!r}")
        if not self.sigma > 0:
            raise ValueError("layer thickness must be positive")
        if not self.eps >= 1:
            raise ValueError("layer permittivity must be >= 1")


# Niobium-on-silicon oxide thicknesses; permittivities are typical values for
# Nb2O5-like (MA), SiOx/Si (MS) and SiO2-like (SA) films.
DEFAULT_LAYERS = (
    InterfaceLayer("MA", 4.8e-9, 8.0),
    InterfaceLayer("MS", 0.3e-9, 11.4),
    InterfaceLayer("SA", 2.3e-9, 4.0),
)


@dataclass(frozen=True)
class _Surface:
    """A straight interface running along grid nodes.

    ``axis`` is the direction the surface runs in (0: along x, 1: along y),
    ``fixed`` the node index on the other axis, ``span`` the inclusive node
    range along it, ``normal`` +1/-1 the side on which the field is sampled.
    """

    kind: str
    axis: int
    fixed: int
    span: tuple[int, int]
    normal: int
    eps_side: float
    corners: tuple[bool, bool]


@dataclass
class _Mesh:
    x: np.ndarray
    y: np.ndarray
    region: np.ndarray  # (nx-1, ny-1) cell region codes
    eps: np.ndarray  # (nx-1, ny-1) relative permittivity per cell
    fixed: np.ndarray  # (nx, ny) bool, Dirichlet nodes
    value: np.ndarray  # (nx, ny) Dirichlet potential for unit drive
    surfaces: list[_Surface]


def _graded_axis(
    keys: Sequence[float], singular: Sequence[float], R: int, L: float
) -> np.ndarray:
    """Node coordinates hitting every key point, refined towards ``singular``."""
    keys = np.unique(np.asarray(keys, dtype=float))
    sing = np.asarray(singular, dtype=float)

    def h(x):
        if sing.size == 0:
            return np.full_like(x, L / R)
        d = np.min(np.abs(x[:, None] - sing[None, :]), axis=1)
        return (L / R) * (_GRADE_C + _GRADE_A * d / L)

    pts = [keys[:1]]
    for p, q in zip(keys[:-1], keys[1:]):
        s = np.linspace(p, q, 4001)
        phi = np.concatenate(([0.0], np.cumsum(0.5 * (1 / h(s[1:]) + 1 / h(s[:-1])) * np.diff(s))))
        n = max(_MIN_CELLS, int(math.ceil(phi[-1])))
        inner = np.interp(np.linspace(0, phi[-1], n + 1)[1:-1], phi, s)
        pts += [inner, [q]]
    return np.concatenate(pts)


def _mirrored_axis(keys_pos: Sequence[float], singular_pos: Sequence[float], R: int, L: float):
    """Graded axis on x >= 0 reflected to an exactly symmetric grid."""
    xp = _graded_axis([0.0, *keys_pos], singular_pos, R, L)
    return np.concatenate((-xp[:0:-1], xp))


def _idx(a: np.ndarray, v: float) -> int:
    i = int(np.argmin(np.abs(a - v)))
    if not math.isclose(a[i], v, rel_tol=0, abs_tol=1e-9 * (abs(v) + np.ptp(a))):
        raise ValueError(f"geometry point {v:g} does not fall on the grid")
    return i


@dataclass(frozen=True)
class CrossSectionGeometry:
    """Coplanar waveguide cross-section inside a grounded box.

    The trace (width ``width``) sits between two grounds separated from it by
    ``gap``; all metal has thickness ``metal_thickness`` on top of the
    substrate.  Grounds extend to the box side walls.  ``None`` margins default
    to ten gap widths.
    """

    width: float
    gap: float
    eps_r: float = 11.65
    ground_extent: float | None = None
    substrate_thickness: float | None = None
    vacuum_height: float | None = None
    metal_thickness: float = 100e-9
    layers: tuple[InterfaceLayer, ...] = DEFAULT_LAYERS
    corner_cutoff: float = 5e-9

    def __post_init__(self):
        for name in ("ground_extent", "substrate_thickness", "vacuum_height"):
            if getattr(self, name) is None:
                object.__setattr__(self, name, 10 * self.gap)
        object.__setattr__(self, "layers", tuple(self.layers))
        for name in ("width", "gap", "ground_extent", "substrate_thickness", "vacuum_height",
                     "metal_thickness"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if self.eps_r < 1:
            raise ValueError("eps_r must be >= 1")
        if self.vacuum_height <= self.metal_thickness:
            raise ValueError("vacuum box must clear the metal")
        if not 0 <= self.corner_cutoff < self.metal_thickness / 2:
            raise ValueError("corner_cutoff must lie in [0, metal_thickness/2)")

    def _mesh(self, R: int) -> _Mesh:
        w2, s, t = self.width / 2, self.gap, self.metal_thickness
        xg, X = w2 + s, w2 + s + self.ground_extent
        x = _mirrored_axis([w2, xg, X], [w2, xg], R, s)
        y = _graded_axis([-self.substrate_thickness, 0.0, t, self.vacuum_height], [0.0, t], R, s)
        xc, yc = 0.5 * (x[1:] + x[:-1]), 0.5 * (y[1:] + y[:-1])
        XC, YC = np.meshgrid(xc, yc, indexing="ij")
        in_band = (YC > 0) & (YC < t)
        trace_c = in_band & (np.abs(XC) < w2)
        ground_c = in_band & (np.abs(XC) > xg)
        region = np.where(YC < 0, SUBSTRATE, VACUUM)
        region[trace_c | ground_c] = METAL
        eps = np.where(region == SUBSTRATE, self.eps_r, 1.0)

        XN, YN = np.meshgrid(x, y, indexing="ij")
        band = (YN >= 0) & (YN <= t)
        trace_n = band & (np.abs(XN) <= w2 * (1 + 1e-12))
        ground_n = band & (np.abs(XN) >= xg * (1 - 1e-12))
        box = np.zeros_like(band)
        box[0, :] = box[-1, :] = box[:, 0] = box[:, -1] = True
        fixed = trace_n | ground_n | box
        value = np.where(trace_n, 1.0, 0.0)

        i = {v: _idx(x, v) for v in (-xg, -w2, w2, xg)}
        iL, iR = 0, len(x) - 1
        j0, jt = _idx(y, 0.0), _idx(y, t)
        es = self.eps_r
        surf = [
            # metal-air: tops and the four sidewalls facing the gaps
            _Surface("MA", 0, jt, (i[-w2], i[w2]), +1, 1.0, (True, True)),
            _Surface("MA", 0, jt, (iL, i[-xg]), +1, 1.0, (False, True)),
            _Surface("MA", 0, jt, (i[xg], iR), +1, 1.0, (True, False)),
            _Surface("MA", 1, i[w2], (j0, jt), +1, 1.0, (True, True)),
            _Surface("MA", 1, i[-w2], (j0, jt), -1, 1.0, (True, True)),
            _Surface("MA", 1, i[xg], (j0, jt), -1, 1.0, (True, True)),
            _Surface("MA", 1, i[-xg], (j0, jt), +1, 1.0, (True, True)),
            # metal-substrate: undersides
            _Surface("MS", 0, j0, (i[-w2], i[w2]), -1, es, (True, True)),
            _Surface("MS", 0, j0, (iL, i[-xg]), -1, es, (False, True)),
            _Surface("MS", 0, j0, (i[xg], iR), -1, es, (True, False)),
            # substrate-air: exposed substrate in both gaps
            _Surface("SA", 0, j0, (i[w2], i[xg]), +1, 1.0, (True, True)),
            _Surface("SA", 0, j0, (i[-xg], i[-w2]), +1, 1.0, (True, True)),
        ]
        return _Mesh(x, y, region, eps, fixed, value, surf)

    def with_margin(self, factor: float) -> "CrossSectionGeometry":
        m = factor * self.gap
        return replace(self, ground_extent=m, substrate_thickness=m, vacuum_height=m)


@dataclass(frozen=True)
class ParallelPlateGeometry:
    """Plates of width ``width`` at separation ``separation`` with sides open.

    The top electrode is driven, the bottom one grounded, and the side walls
    carry the natural (zero normal flux) condition so that the field is
    uniform.  An MS layer sits on the underside of the top electrode.
    ``vertical=True`` rotates the capacitor by 90 degrees (plates along y).
    """

    width: float
    separation: float
    eps_r: float = 11.65
    layers: tuple[InterfaceLayer, ...] = ()
    vertical: bool = False

    def __post_init__(self):
        object.__setattr__(self, "layers", tuple(self.layers))
        if not (self.width > 0 and self.separation > 0):
            raise ValueError("width and separation must be positive")

    def _mesh(self, R: int) -> _Mesh:
        ny = R + 1
        nx = max(2, int(round(R * self.width / self.separation))) + 1
        x = np.linspace(0, self.width, nx)
        y = np.linspace(0, self.separation, ny)
        region = np.full((nx - 1, ny - 1), SUBSTRATE)
        eps = np.full(region.shape, float(self.eps_r))
        fixed = np.zeros((nx, ny), bool)
        fixed[:, 0] = fixed[:, -1] = True
        value = np.zeros((nx, ny))
        value[:, -1] = 1.0
        surf = _Surface("MS", 0, ny - 1, (0, nx - 1), -1, float(self.eps_r), (False, False))
        if self.vertical:
            return _Mesh(y, x, region.T, eps.T, fixed.T, value.T, [replace(surf, axis=1)])
        return _Mesh(x, y, region, eps, fixed, value, [surf])


@dataclass(frozen=True)
class NestedSquaresGeometry:
    """Square inner conductor centred in a square grounded shield."""

    inner: float
    outer: float
    eps_r: float = 1.0
    layers: tuple[InterfaceLayer, ...] = ()

    def __post_init__(self):
        if not 0 < self.inner < self.outer:
            raise ValueError("need 0 < inner < outer")

    def _mesh(self, R: int) -> _Mesh:
        a, b = self.inner / 2, self.outer / 2
        gap = b - a
        x = _mirrored_axis([a, b], [a], R, gap)
        X, Y = np.meshgrid(x, x, indexing="ij")
        inner_n = (np.abs(X) <= a * (1 + 1e-12)) & (np.abs(Y) <= a * (1 + 1e-12))
        fixed = inner_n.copy()
        fixed[0, :] = fixed[-1, :] = fixed[:, 0] = fixed[:, -1] = True
        xc = 0.5 * (x[1:] + x[:-1])
        XC, YC = np.meshgrid(xc, xc, indexing="ij")
        region = np.where((np.abs(XC) < a) & (np.abs(YC) < a), METAL, VACUUM)
        eps = np.full(region.shape, float(self.eps_r))
        return _Mesh(x, x.copy(), region, eps, fixed, inner_n.astype(float), [])


Geometry = CrossSectionGeometry | ParallelPlateGeometry | NestedSquaresGeometry


@dataclass(frozen=True)
class FieldSolution:
    """Potential on the grid plus energies per unit length.

    ``energy`` values are in J/m for the applied ``voltage``.  ``residual`` is
    the relative residual of the free-node system.
    """

    geometry: Geometry
    resolution: int
    x: np.ndarray
    y: np.ndarray
    potential: np.ndarray
    voltage: float
    energy_substrate: float
    energy_vacuum: float
    residual: float
    _mesh: _Mesh = field(repr=False, compare=False)

    @property
    def energy(self) -> float:
        return self.energy_substrate + self.energy_vacuum

    @property
    def capacitance(self) -> float:
        """Capacitance per unit length, F/m."""
        return 2 * self.energy / self.voltage**2

    @property
    def spacing(self) -> tuple[float, float]:
        """Smallest grid spacing along x and y, m."""
        return float(np.diff(self.x).min()), float(np.diff(self.y).min())


def _edge_coefficients(m: _Mesh):
    hx, hy = np.diff(m.x), np.diff(m.y)
    w = m.eps * (m.region != METAL)  # metal cells carry no energy
    nx, ny = len(m.x), len(m.y)
    # x-edges (i, j)-(i+1, j): half-heights of the cells below and above
    cx = np.zeros((nx - 1, ny))
    cx[:, :-1] += w * hy[None, :] / 2
    cx[:, 1:] += w * hy[None, :] / 2
    cx /= hx[:, None]
    cy = np.zeros((nx, ny - 1))
    cy[:-1, :] += w * hx[:, None] / 2
    cy[1:, :] += w * hx[:, None] / 2
    cy /= hy[None, :]
    return cx, cy


def _assemble(m: _Mesh) -> sp.csr_matrix:
    nx, ny = len(m.x), len(m.y)
    cx, cy = _edge_coefficients(m)
    k = np.arange(nx * ny).reshape(nx, ny)
    a, b = k[:-1, :].ravel(), k[1:, :].ravel()
    c, d = k[:, :-1].ravel(), k[:, 1:].ravel()
    rows = np.concatenate((a, b, c, d))
    cols = np.concatenate((b, a, d, c))
    vals = -np.concatenate((cx.ravel(), cx.ravel(), cy.ravel(), cy.ravel()))
    off = sp.coo_matrix((vals, (rows, cols)), shape=(nx * ny, nx * ny)).tocsr()
    diag = -np.asarray(off.sum(axis=1)).ravel()
    return (off + sp.diags(diag)).tocsr()


def _cell_energy(m: _Mesh, V: np.ndarray) -> np.ndarray:
    """Per-cell energy 1/2 eps |grad V|^2 area, in eps0 V^2 units."""
    hx, hy = np.diff(m.x)[:, None], np.diff(m.y)[None, :]
    dx2 = np.diff(V, axis=0) ** 2  # (nx-1, ny)
    dy2 = np.diff(V, axis=1) ** 2  # (nx, ny-1)
    ex = (dx2[:, :-1] + dx2[:, 1:]) / 2 * hy / hx
    ey = (dy2[:-1, :] + dy2[1:, :]) / 2 * hx / hy
    return 0.5 * m.eps * (m.region != METAL) * (ex + ey)


def solve_potential(
    geom: Geometry,
    resolution: int,
    *,
    voltage: float = 1.0,
    method: Literal["direct", "cg"] = "direct",
    tol: float = 1e-8,
    maxiter: int = 1_000_000,
) -> FieldSolution:
    """Solve for the electrostatic potential of ``geom``.

    Parameters
    ----------
    geom
        Cross-section, parallel-plate or nested-square geometry.
    resolution
        Cells across the gap (CPW), across the plate separation, or across
        the conductor spacing; at least 64.
    voltage
        Potential of the driven conductor; grounds and the box are at 0 V.
    method
        ``"direct"`` sparse LU (default) or Jacobi-preconditioned ``"cg"``.
    tol, maxiter
        Relative residual target and iteration cap.  The direct solve is
        also checked against ``tol``.

    Raises
    ------
    ConvergenceError
        If the relative residual stays above ``tol``.
    """
    if resolution < 64:
        raise ValueError("resolution must be at least 64 cells across the gap")
    m = geom._mesh(int(resolution))
    A = _assemble(m)
    fixed = m.fixed.ravel()
    free = ~fixed
    Vd = voltage * m.value.ravel()[fixed]
    Aff = A[free][:, free].tocsc()
    rhs = -(A[free][:, fixed] @ Vd)
    if method == "direct":
        Vf = splu(Aff).solve(rhs)
    elif method == "cg":
        dinv = sp.diags(1 / Aff.diagonal())
        Vf, info = cg(Aff, rhs, rtol=tol, atol=0.0, maxiter=int(maxiter), M=dinv)
        if info != 0:
            raise ConvergenceError(f"cg did not converge within {maxiter} iterations")
    else:
        raise ValueError(f"unknown method {method!r}")
    res = float(np.linalg.norm(Aff @ Vf - rhs) / max(np.linalg.norm(rhs), 1e-300))
    if res > tol:
        raise ConvergenceError(f"relative residual {res:.2e} above {tol:.0e}")
    V = np.empty(fixed.size)
    V[fixed], V[free] = Vd, Vf
    V = V.reshape(len(m.x), len(m.y))
    ce = EPS0 * _cell_energy(m, V)
    return FieldSolution(
        geometry=geom,
        resolution=int(resolution),
        x=m.x,
        y=m.y,
        potential=V,
        voltage=float(voltage),
        energy_substrate=float(ce[m.region == SUBSTRATE].sum()),
        energy_vacuum=float(ce[m.region == VACUUM].sum()),
        residual=res,
        _mesh=m,
    )


@dataclass(frozen=True)
class InterfaceEPR:
    """Interface participation fractions with optional error estimates."""

    f_MA: float
    f_MS: float
    f_SA: float
    err_MA: float = math.nan
    err_MS: float = math.nan
    err_SA: float = math.nan

    def __post_init__(self):
        for k in KINDS:
            v = getattr(self, f"f_{k}")
            if not 0 <= v < 1:
                raise ValueError(f"f_{k} = {v} outside [0, 1)")

    def __getitem__(self, kind: str) -> float:
        return getattr(self, f"f_{kind}")

    def as_dict(self) -> dict:
        return {k: getattr(self, k) for k in self.__dataclass_fields__}

    def to_json(self) -> str:
        d = {k: (None if isinstance(v, float) and math.isnan(v) else v) for k, v in self.as_dict().items()}
        return json.dumps(d, sort_keys=True, indent=2)


def _d1(v0, v1, v2, h1, h2):
    """Second-order one-sided derivative at the first of three samples."""
    return (-(2 * h1 + h2) / (h1 * (h1 + h2)) * v0 + (h1 + h2) / (h1 * h2) * v1
            - h1 / (h2 * (h1 + h2)) * v2)


def _surface_density(s: _Surface, V: np.ndarray, x: np.ndarray, y: np.ndarray, eps_layer: float):
    """Positions along the surface and the rescaled layer energy density."""
    if s.axis == 0:
        along, across, line = x, y, V
    else:
        along, across, line = y, x, V.T
    k0, k1 = s.span
    pos = along[k0 : k1 + 1]
    j = s.fixed
    j1, j2 = j + s.normal, j + 2 * s.normal
    h1, h2 = abs(across[j1] - across[j]), abs(across[j2] - across[j1])
    v0, v1, v2 = line[k0 : k1 + 1, j], line[k0 : k1 + 1, j1], line[k0 : k1 + 1, j2]
    En = _d1(v0, v1, v2, h1, h2)
    Et = np.gradient(v0, pos) if len(pos) > 2 else np.zeros_like(v0)
    return pos, 0.5 * (eps_layer * Et**2 + (s.eps_side * En) ** 2 / eps_layer)


def _corner_integral(r: np.ndarray, u: np.ndarray, rc: float) -> tuple[float, int]:
    """Integral over [rc, r_k] near a corner, and the index k it stops at.

    ``r`` are distances from the corner (r[0] = 0).  The first sample index
    k >= 1 with r_k >= rc anchors a power law u = a r^beta fitted through
    samples k and k+1; the corner cell and anything closer than ``rc`` is
    never sampled directly.
    """
    k = max(1, int(np.searchsorted(r, rc)))
    r1, r2, u1, u2 = r[k], r[k + 1], u[k], u[k + 1]
    if u1 <= 0 or u2 <= 0 or rc >= r1:
        return (max(r1 - rc, 0.0) * u1, k)
    beta = math.log(u2 / u1) / math.log(r2 / r1)
    q = beta + 1
    if rc == 0 and q <= 0:
        raise ValueError("corner integral diverges; use a positive corner_cutoff")
    if abs(q) < 1e-12:
        return (u1 * r1 * math.log(r1 / rc), k)
    return (u1 * r1 * (1 - (rc / r1) ** q) / q, k)


def _line_integral(pos: np.ndarray, u: np.ndarray, corners: tuple[bool, bool], rc: float) -> float:
    lo, hi = 0, len(pos) - 1
    total = 0.0
    if corners[0]:
        c, lo = _corner_integral(pos - pos[0], u, rc)
        total += c
    if corners[1]:
        c, k = _corner_integral((pos[-1] - pos)[::-1], u[::-1], rc)
        total += c
        hi = len(pos) - 1 - k
    if hi <= lo:
        raise ValueError("surface too short for its corner exclusion zones")
    return total + float(trapezoid(u[lo : hi + 1], pos[lo : hi + 1]))


def interface_participation(sol: FieldSolution, geom: Geometry | None = None) -> InterfaceEPR:
    """Thin-layer participation fractions relative to the total energy.

    ``geom`` supplies the interface layers and defaults to the solved
    geometry; passing a copy with different layers reuses the same field.
    Kinds without a layer contribute zero.

    Raises
    ------
    ValueError
        If a layer kind has no matching surface in the geometry.
    """
    geom = sol.geometry if geom is None else geom
    m = sol._mesh
    present = {s.kind for s in m.surfaces}
    W = (sol.energy_substrate + sol.energy_vacuum) / EPS0
    out = dict.fromkeys(KINDS, 0.0)
    rc = getattr(geom, "corner_cutoff", 0.0)
    for layer in geom.layers:
        if layer.kind not in present:
            raise ValueError(f"no {layer.kind} surface in {type(geom).__name__}")
        e = 0.0
        for s in m.surfaces:
            if s.kind == layer.kind:
                pos, u = _surface_density(s, sol.potential, m.x, m.y, layer.eps)
                e += _line_integral(pos, u, s.corners, rc)
        out[layer.kind] += layer.sigma * e / W
    return InterfaceEPR(*(float(out[k]) for k in KINDS))


def richardson(values: Sequence[float], h: Sequence[float]) -> tuple[float, float, float]:
    """Richardson extrapolation of the last three samples.

    Returns ``(extrapolated, error, order)``.  Identical samples give the
    value itself with zero error and ``inf`` order; a non-monotone sequence
    is not extrapolated (order ``nan``, error = last difference).
    """
    f1, f2, f3 = (float(v) for v in values[-3:])
    h1, h2, h3 = (float(v) for v in h[-3:])
    d12, d23 = f1 - f2, f2 - f3
    scale = max(abs(f1), abs(f2), abs(f3), 1e-300)
    if abs(d12) <= 1e-12 * scale and abs(d23) <= 1e-12 * scale:
        return f3, 0.0, math.inf
    if d12 * d23 <= 0:
        return f3, abs(d23), math.nan
    rho = d12 / d23

    def g(p):
        return (h1**p - h2**p) / (h2**p - h3**p) - rho

    try:
        p = brentq(g, 0.05, 12.0)
    except ValueError:
        return f3, abs(d23), math.nan
    C = d23 / (h2**p - h3**p)
    f_inf = f3 - C * h3**p
    return f_inf, abs(f_inf - f3), p


@dataclass(frozen=True)
class ConvergenceStudy:
    resolutions: tuple[int, ...]
    energies: tuple[float, ...]
    fractions: tuple[InterfaceEPR, ...]
    extrapolated: InterfaceEPR
    energy_extrapolated: float
    orders: dict
    monotone: dict

    def as_dict(self) -> dict:
        return {
            "resolutions": list(self.resolutions),
            "energies_J_per_m": list(self.energies),
            "fractions": [f.as_dict() for f in self.fractions],
            "extrapolated": self.extrapolated.as_dict(),
            "energy_extrapolated_J_per_m": self.energy_extrapolated,
            "orders": self.orders,
            "monotone": self.monotone,
        }


def _monotone(v: Sequence[float]) -> bool:
    d = np.diff(np.asarray(v, dtype=float))
    tol = 1e-12 * max(np.abs(v).max(), 1e-300)
    return bool(np.all(d >= -tol) or np.all(d <= tol))


def convergence_study(geom: Geometry, resolutions: Sequence[int], **solve_kw) -> ConvergenceStudy:
    """Solve at several resolutions and Richardson-extrapolate the fractions.

    At least three resolutions are required; the grid parameter is taken as
    1 / resolution.
    """
    res = sorted(int(r) for r in resolutions)
    if len(res) < 3:
        raise ValueError("convergence study needs at least 3 resolutions")
    sols = [solve_potential(geom, r, **solve_kw) for r in res]
    fr = [interface_participation(s) for s in sols]
    en = [s.energy for s in sols]
    h = [1.0 / r for r in res]
    ext, err, orders, mono = {}, {}, {}, {}
    for k in KINDS:
        seq = [f[k] for f in fr]
        ext[k], err[k], orders[k] = richardson(seq, h)
        mono[k] = _monotone(seq)
    e_inf, _, orders["energy"] = richardson(en, h)
    mono["energy"] = _monotone(en)
    # keep the extrapolated fraction physical
    epr = InterfaceEPR(
        *(float(min(max(ext[k], 0.0), np.nextafter(1, 0))) for k in KINDS),
        *(float(err[k]) for k in KINDS),
    )
    return ConvergenceStudy(tuple(res), tuple(en), tuple(fr), epr, e_inf, orders, mono)


def box_sensitivity(
    geom: CrossSectionGeometry, factors: Sequence[float] = (5, 10, 20), resolution: int = 64
) -> list[tuple[float, InterfaceEPR, float]]:
    """Fractions and capacitance per unit length versus box margin (in gaps)."""
    out = []
    for f in factors:
        sol = solve_potential(geom.with_margin(f), resolution)
        out.append((float(f), interface_participation(sol), sol.capacitance))
    return out


def write_potential(sol: FieldSolution, path: str | Path) -> None:
    """Write the potential grid: ``.npz`` binary or long-format CSV."""
    path = Path(path)
    if path.suffix == ".npz":
        np.savez(path, x=sol.x, y=sol.y, potential=sol.potential)
        return
    X, Y = np.meshgrid(sol.x, sol.y, indexing="ij")
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["x_m", "y_m", "V"])
        for row in zip(X.ravel(), Y.ravel(), sol.potential.ravel()):
            w.writerow([repr(float(v)) for v in row])
