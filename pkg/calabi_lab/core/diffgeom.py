"""
Discrete differential geometry of height-field graphs in Euclidean and Minkowski space
"""
import logging
import math
from collections import namedtuple
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from ..utils.errors import GridError, SpacelikeError

SPACELIKE_INVALID_FRACTION = 0.10

Derivatives = namedtuple('Derivatives', ['fx', 'fy', 'fxx', 'fxy', 'fyy'])


class Signature(str, Enum):
    EUCLIDEAN = 'euclidean'
    LORENTZIAN = 'lorentzian'


@dataclass(frozen=True)
class Grid2D:
    """Rectangular node grid; fields on it are arrays of shape (ny, nx), row index = y"""
    x0: float
    y0: float
    dx: float
    dy: float
    nx: int
    ny: int

    def __post_init__(self):
        if not (self.dx > 0 and self.dy > 0):
            raise GridError(f"grid spacings must be positive, got dx={self.dx}, dy={self.dy}")
        if self.nx < 3 or self.ny < 3:
            raise GridError(f"grid needs at least 3 nodes per axis, got {self.nx}x{self.ny}")

    @classmethod
    def from_bounds(cls, xmin, xmax, ymin, ymax, h, hy=None):
        """Grid covering [xmin, xmax] x [ymin, ymax] with spacing close to h"""
        hy = h if hy is None else hy
        if not (xmax > xmin and ymax > ymin):
            raise GridError(f"empty grid bounds [{xmin}, {xmax}] x [{ymin}, {ymax}]")
        if not (h > 0 and hy > 0):
            raise GridError(f"grid spacing must be positive, got {h}")
        nx = int(round((xmax - xmin) / h)) + 1
        ny = int(round((ymax - ymin) / hy)) + 1
        nx, ny = max(nx, 3), max(ny, 3)
        return cls(float(xmin), float(ymin), (xmax - xmin) / (nx - 1), (ymax - ymin) / (ny - 1), nx, ny)

    @classmethod
    def parse(cls, spec):
        """Parse 'xmin:xmax:ymin:ymax:h'"""
        try:
            xmin, xmax, ymin, ymax, h = (float(v) for v in spec.split(':'))
        except ValueError as e:
            raise GridError(f"malformed grid spec '{spec}', expected xmin:xmax:ymin:ymax:h") from e
        return cls.from_bounds(xmin, xmax, ymin, ymax, h)

    @property
    def shape(self):
        return (self.ny, self.nx)

    @property
    def x(self):
        return self.x0 + self.dx * np.arange(self.nx)

    @property
    def y(self):
        return self.y0 + self.dy * np.arange(self.ny)

    @property
    def h(self):
        return max(self.dx, self.dy)

    def mesh(self):
        return np.meshgrid(self.x, self.y)

    def interior_mask(self, margin=1):
        mask = np.zeros(self.shape, dtype=bool)
        if self.ny > 2 * margin and self.nx > 2 * margin:
            mask[margin:self.ny - margin, margin:self.nx - margin] = True
        return mask

    def block(self, j0, j1, i0, i1):
        """Sub-grid of rows j0:j1 and columns i0:i1"""
        return Grid2D(self.x0 + i0 * self.dx, self.y0 + j0 * self.dy, self.dx, self.dy, i1 - i0, j1 - j0)

    def to_dict(self):
        return {'x0': self.x0, 'y0': self.y0, 'dx': self.dx, 'dy': self.dy, 'nx': self.nx, 'ny': self.ny}


@dataclass
class GraphSurface:
    """A height field u over a grid, tagged with the ambient signature"""
    grid: Grid2D
    u: np.ndarray
    signature: Signature = Signature.EUCLIDEAN
    valid: np.ndarray = None

    def __post_init__(self):
        u = np.asarray(self.u, dtype=float)
        if u.size != self.grid.nx * self.grid.ny:
            raise GridError(f"field has {u.size} values, grid expects {self.grid.nx * self.grid.ny}")
        self.u = u.reshape(self.grid.shape)
        self.signature = Signature(self.signature)
        valid = np.isfinite(self.u)
        if self.valid is not None:
            valid &= np.asarray(self.valid, dtype=bool).reshape(self.grid.shape)
        self.valid = valid

    @classmethod
    def from_function(cls, grid, func, signature=Signature.EUCLIDEAN):
        X, Y = grid.mesh()
        return cls(grid, func(X, Y), signature)


@dataclass
class GeometryFields:
    W: np.ndarray
    N: np.ndarray
    E: np.ndarray
    F: np.ndarray
    G: np.ndarray
    H: np.ndarray
    K: np.ndarray
    valid: np.ndarray
    derivatives: Derivatives = field(repr=False, default=None)


def _second_difference(f, h, axis):
    f = np.moveaxis(f, axis, -1)
    n = f.shape[-1]
    out = np.empty_like(f)
    out[..., 1:-1] = (f[..., 2:] - 2.0 * f[..., 1:-1] + f[..., :-2]) / h ** 2
    if n >= 4:
        out[..., 0] = (2.0 * f[..., 0] - 5.0 * f[..., 1] + 4.0 * f[..., 2] - f[..., 3]) / h ** 2
        out[..., -1] = (2.0 * f[..., -1] - 5.0 * f[..., -2] + 4.0 * f[..., -3] - f[..., -4]) / h ** 2
    else:
        out[..., 0] = (f[..., 0] - 2.0 * f[..., 1] + f[..., 2]) / h ** 2
        out[..., -1] = out[..., 0]
    return np.moveaxis(out, -1, axis)


def gradient_and_hessian(f, grid):
    """First and second partial derivatives of a field on the grid.

    Central second-order stencils inside, one-sided second-order stencils on the boundary
    rows and columns. Boundary values are less accurate; grid.interior_mask() marks the rest.
    """
    f = np.asarray(f, dtype=float).reshape(grid.shape)
    fx = np.gradient(f, grid.dx, axis=1, edge_order=2)
    fy = np.gradient(f, grid.dy, axis=0, edge_order=2)
    fxx = _second_difference(f, grid.dx, axis=1)
    fyy = _second_difference(f, grid.dy, axis=0)
    fxy = np.gradient(fx, grid.dy, axis=0, edge_order=2)
    return Derivatives(fx, fy, fxx, fxy, fyy)


def spacelike_mask(s, derivs=None):
    """Nodes of a Lorentzian graph with |grad u| < 1, raising when too many fail"""
    d = derivs or gradient_and_hessian(s.u, s.grid)
    with np.errstate(invalid='ignore'):
        ok = s.valid & (d.fx ** 2 + d.fy ** 2 < 1.0)
    bad = int(np.count_nonzero(s.valid & ~ok))
    if bad:
        fraction = bad / s.u.size
        logging.warning(f"{bad} node(s) of the Lorentzian graph are not spacelike ({fraction:.1%})")
        if fraction > SPACELIKE_INVALID_FRACTION:
            raise SpacelikeError(f"{fraction:.1%} of nodes violate |grad u| < 1")
    return ok


def geometry(s):
    """Metric, Gauss map, mean curvature H = tr(g^-1 b) and Gauss curvature of a graph"""
    d = gradient_and_hessian(s.u, s.grid)
    ux, uy, uxx, uxy, uyy = d
    hess_det = uxx * uyy - uxy ** 2
    ones = np.ones_like(ux)
    if s.signature == Signature.EUCLIDEAN:
        valid = s.valid.copy()
        W = np.sqrt(1.0 + ux ** 2 + uy ** 2)
        N = np.stack([-ux / W, -uy / W, ones / W], axis=-1)
        E, F, G = 1.0 + ux ** 2, ux * uy, 1.0 + uy ** 2
        operator = (1.0 + ux ** 2) * uyy + (1.0 + uy ** 2) * uxx - 2.0 * ux * uy * uxy
        H = -operator / W ** 3
        K = hess_det / W ** 4
    else:
        valid = spacelike_mask(s, d)
        with np.errstate(invalid='ignore', divide='ignore'):
            W = np.sqrt(1.0 - ux ** 2 - uy ** 2)
            W[~valid] = np.nan
            N = np.stack([ux / W, uy / W, ones / W], axis=-1)
            E, F, G = 1.0 - ux ** 2, -ux * uy, 1.0 - uy ** 2
            H = lorentz_operator(d) / W ** 3
            K = -hess_det / W ** 4
    return GeometryFields(W, N, E, F, G, H, K, valid, d)


def lorentz_operator(d):
    return (1.0 - d.fx ** 2) * d.fyy + (1.0 - d.fy ** 2) * d.fxx + 2.0 * d.fx * d.fy * d.fxy


def euclid_operator(d):
    return (1.0 + d.fx ** 2) * d.fyy + (1.0 + d.fy ** 2) * d.fxx - 2.0 * d.fx * d.fy * d.fxy


def pde_residual(s, w, derivs=None):
    """Residual of the weighted minimal (Euclidean) or maximal (Lorentzian) graph equation.

    Nodes that are invalid, outside the weight's domain or (Lorentzian) not spacelike are NaN.
    """
    d = derivs or gradient_and_hessian(s.u, s.grid)
    valid = s.valid & w.in_domain(s.u)
    with np.errstate(invalid='ignore', divide='ignore'):
        phi_dot = w.phi_dot(np.where(valid, s.u, np.nan))
        if s.signature == Signature.EUCLIDEAN:
            residual = euclid_operator(d) - phi_dot * (1.0 + d.fx ** 2 + d.fy ** 2)
        else:
            valid &= spacelike_mask(s, d)
            residual = lorentz_operator(d) + phi_dot * (1.0 - d.fx ** 2 - d.fy ** 2)
    return np.where(valid, residual, np.nan)


def field_stats(values, mask=None):
    """(max |v|, rms v) over finite masked entries; (nan, nan) if none remain"""
    values = np.asarray(values, dtype=float)
    keep = np.isfinite(values)
    if mask is not None:
        keep &= np.broadcast_to(mask, keep.shape)
    if not keep.any():
        return math.nan, math.nan
    v = values[keep]
    return float(np.max(np.abs(v))), float(np.sqrt(np.mean(v ** 2)))


def residual_max(residual, grid, include_boundary=False, margin=1):
    mask = None if include_boundary else grid.interior_mask(margin)
    return field_stats(residual, mask)[0]


def lorentz_inner(a, b):
    return a[..., 0] * b[..., 0] + a[..., 1] * b[..., 1] - a[..., 2] * b[..., 2]


def lorentz_cross(a, b):
    c = np.cross(a, b)
    c[..., 2] *= -1.0
    return c


def parametric_curvature(points, ds, dt, signature=Signature.EUCLIDEAN):
    """Gauss curvature of a surface sampled on a structured (s, t) parameter grid.

    points has shape (n_s, n_t, 3). Derivatives are second-order finite differences, so
    the outer two rows and columns carry one-sided error.
    """
    points = np.asarray(points, dtype=float)
    ps = np.gradient(points, ds, axis=0, edge_order=2)
    pt = np.gradient(points, dt, axis=1, edge_order=2)
    pss = np.gradient(ps, ds, axis=0, edge_order=2)
    pst = np.gradient(ps, dt, axis=1, edge_order=2)
    ptt = np.gradient(pt, dt, axis=1, edge_order=2)
    if Signature(signature) == Signature.EUCLIDEAN:
        inner = lambda a, b: np.sum(a * b, axis=-1)
        n = np.cross(ps, pt)
        n = n / np.linalg.norm(n, axis=-1)[..., None]
        sign = 1.0
    else:
        inner = lorentz_inner
        n = lorentz_cross(ps, pt)
        with np.errstate(invalid='ignore'):
            n = n / np.sqrt(-lorentz_inner(n, n))[..., None]
        sign = -1.0
    E, F, G = inner(ps, ps), inner(ps, pt), inner(pt, pt)
    e, f, g = inner(pss, n), inner(pst, n), inner(ptt, n)
    with np.errstate(invalid='ignore', divide='ignore'):
        return sign * (e * g - f ** 2) / (E * G - F ** 2)
