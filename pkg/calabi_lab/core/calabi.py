"""
Calabi correspondence between weighted minimal graphs in R^3 and weighted maximal graphs in L^3
"""
import logging
import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np
from scipy.interpolate import LinearNDInterpolator, RectBivariateSpline
from scipy.ndimage import label
from scipy.optimize import minimize_scalar
from scipy.spatial import cKDTree

from .diffgeom import (GraphSurface, Grid2D, Signature, field_stats, geometry, gradient_and_hessian,
                       lorentz_inner, lorentz_operator, pde_residual, spacelike_mask)
from .weights import dual_weight
from ..utils.errors import FoldOverError, GridError, IntegrationError

REPORT_SCHEMA = 1
ALGEBRAIC_TOL = 1e-12
DISCRETIZATION_FACTOR = 1e3
NEWTON_ITERATIONS = 40


class Direction(str, Enum):
    EUCLID_TO_LORENTZ = 'euclid_to_lorentz'
    LORENTZ_TO_EUCLID = 'lorentz_to_euclid'


@dataclass
class PotentialGradient:
    """Gradient (Px, Py) of the convex potential, gauged to vanish at the base node"""
    grid: Grid2D
    Px: np.ndarray
    Py: np.ndarray
    compat_residual: np.ndarray
    curl: np.ndarray
    valid: np.ndarray

    def jacobian(self):
        g = self.grid
        return (np.gradient(self.Px, g.dx, axis=1, edge_order=2), np.gradient(self.Px, g.dy, axis=0, edge_order=2),
                np.gradient(self.Py, g.dx, axis=1, edge_order=2), np.gradient(self.Py, g.dy, axis=0, edge_order=2))

    def jacobian_checks(self, margin=1):
        """(max asymmetry |dPx/dy - dPy/dx|, min smaller eigenvalue of the symmetrized Jacobian)"""
        a, b, c, d = self.jacobian()
        off = 0.5 * (b + c)
        mean = 0.5 * (a + d)
        smaller = mean - np.sqrt((0.5 * (a - d)) ** 2 + off ** 2)
        mask = self.grid.interior_mask(margin) & self.valid
        asym = field_stats(b - c, mask)[0]
        eig = smaller[mask & np.isfinite(smaller)]
        return asym, float(eig.min()) if eig.size else math.nan


@dataclass
class CalabiPair:
    source: GraphSurface
    weight: object
    image_points: np.ndarray
    image_normal: np.ndarray
    dual: object
    direction: Direction
    potential: PotentialGradient
    geometry: object = field(repr=False, default=None)

    @property
    def valid(self):
        return self.potential.valid & np.all(np.isfinite(self.image_points), axis=-1)


@dataclass
class ResampledGraph(GraphSurface):
    """Image graph on a rectangular grid, with the source coordinates each node came from"""
    preimage_x: np.ndarray = None
    preimage_y: np.ndarray = None


@dataclass
class InvariantReport:
    """Named residuals, each judged against its own tolerance"""
    entries: dict = field(default_factory=dict)
    metadata: dict = field(default_factory=dict)

    def add(self, name, value, tolerance, rule='<='):
        value = float(value)
        if rule == '<=':
            passed = value <= tolerance
        elif rule == '>=':
            passed = value >= tolerance
        elif rule == 'in':
            passed = tolerance[0] <= value <= tolerance[1]
        else:
            raise ValueError(f"unknown rule {rule!r}")
        self.entries[name] = {'value': value, 'tolerance': tolerance, 'rule': rule,
                              'passed': bool(passed and math.isfinite(value))}
        return self.entries[name]['passed']

    @property
    def passed(self):
        return all(e['passed'] for e in self.entries.values())

    def failures(self):
        return [name for name, e in self.entries.items() if not e['passed']]

    def value(self, name):
        return self.entries[name]['value']

    def to_dict(self):
        def clean(v):
            if isinstance(v, float) and not math.isfinite(v):
                return None
            if isinstance(v, (list, tuple)):
                return [clean(x) for x in v]
            return v

        return {
            'schema': REPORT_SCHEMA,
            'passed': self.passed,
            'entries': {name: {k: clean(v) for k, v in e.items()} for name, e in self.entries.items()},
            'metadata': self.metadata,
        }


def hessian_fields(s, w, geo=None):
    """Hessian of the Calabi potential prescribed by the source graph"""
    geo = geo or geometry(s)
    ux, uy = geo.derivatives.fx, geo.derivatives.fy
    valid = geo.valid & w.in_domain(s.u)
    with np.errstate(invalid='ignore', divide='ignore'):
        scale = w.exp_phi(np.where(valid, s.u, np.nan)) / geo.W
        if s.signature == Signature.EUCLIDEAN:
            H = ((1.0 + ux ** 2) * scale, ux * uy * scale, (1.0 + uy ** 2) * scale)
        else:
            H = ((1.0 - ux ** 2) * scale, -ux * uy * scale, (1.0 - uy ** 2) * scale)
    return tuple(np.where(valid, h, np.nan) for h in H)


def _curl(hessians, dx, dy):
    Hxx, Hxy, Hyy = hessians
    row1 = np.gradient(Hxx, dy, axis=0, edge_order=2) - np.gradient(Hxy, dx, axis=1, edge_order=2)
    row2 = np.gradient(Hxy, dy, axis=0, edge_order=2) - np.gradient(Hyy, dx, axis=1, edge_order=2)
    return np.maximum(np.abs(row1), np.abs(row2))


def hessian_curl(hessians, grid):
    """Pointwise max of the curls of the rows (Hxx, Hxy) and (Hxy, Hyy).

    Inside the outer ring only interior Hessians are differenced, so the one-sided boundary
    stencils stay confined to the ring itself.
    """
    hessians = tuple(np.asarray(h, dtype=float).reshape(grid.shape) for h in hessians)
    curl = _curl(hessians, grid.dx, grid.dy)
    if grid.nx > 4 and grid.ny > 4:
        curl[1:-1, 1:-1] = _curl(tuple(h[1:-1, 1:-1] for h in hessians), grid.dx, grid.dy)
    return curl


def _extend_line(P, f, region, reached, step):
    """Trapezoid steps outward from reached nodes along one grid line, in place"""
    grown = 0
    for k in range(1, len(P)):
        if region[k] and not reached[k] and reached[k - 1]:
            P[k] = P[k - 1] + 0.5 * step * (f[k - 1] + f[k])
            reached[k] = True
            grown += 1
    for k in range(len(P) - 2, -1, -1):
        if region[k] and not reached[k] and reached[k + 1]:
            P[k] = P[k + 1] - 0.5 * step * (f[k] + f[k + 1])
            reached[k] = True
            grown += 1
    return grown


def _sweep(P, reached, region, along_x, along_y, first_axis, dx, dy):
    """Grow the integrated set over a region by alternating row and column passes.

    along_x is the integrand of a step in x, along_y of a step in y. first_axis 1 starts
    with the rows, 0 with the columns; the sweep ends once a row pass and a column pass
    both add nothing.
    """
    axis, idle = first_axis, 0
    while idle < 2:
        grown = 0
        if axis == 1:
            for j in np.flatnonzero(reached.any(axis=1)):
                grown += _extend_line(P[j], along_x[j], region[j], reached[j], dx)
        else:
            for i in np.flatnonzero(reached.any(axis=0)):
                grown += _extend_line(P[:, i], along_y[:, i], region[:, i], reached[:, i], dy)
        idle = 0 if grown else idle + 1
        axis = 1 - axis


def _path_integral(along_x, along_y, valid, inner, base, first_axis, grid):
    P = np.full(grid.shape, np.nan)
    reached = np.zeros(grid.shape, dtype=bool)
    P[base], reached[base] = 0.0, True
    _sweep(P, reached, inner, along_x, along_y, first_axis, grid.dx, grid.dy)
    # the outer ring is entered by one step from the interior
    _sweep(P, reached, valid, along_x, along_y, first_axis, grid.dx, grid.dy)
    return P, reached


def integrate_potential_gradient(hessians, grid):
    """Trapezoidal path integration of (Px, Py) over the valid region, gauged to vanish at
    the lower-left valid node.

    Both components are integrated along two path families: rows first and columns first.
    Px takes the rows-first values and Py the columns-first values, which on a rectangle is
    Hxx along the base row then Hxy up the columns for Px, and Hyy up the base column then
    Hxy along the rows for Py. compat_residual is the distance to the values of the other
    family. Paths run through interior nodes and reach the outer ring of the grid by a
    single step, so one-sided boundary Hessians are never summed along the boundary.
    """
    Hxx, Hxy, Hyy = (np.asarray(h, dtype=float).reshape(grid.shape) for h in hessians)
    valid = np.isfinite(Hxx) & np.isfinite(Hxy) & np.isfinite(Hyy)
    if not valid.any():
        raise IntegrationError("no valid node to integrate from")
    _, components = label(valid)
    if components > 1:
        raise IntegrationError(f"valid region splits into {components} disconnected components")
    inner = valid & grid.interior_mask(1)
    if not inner.any():
        inner = valid
    base = tuple(int(v) for v in np.argwhere(inner)[0])
    px_a, reached = _path_integral(Hxx, Hxy, valid, inner, base, 1, grid)
    py_a, _ = _path_integral(Hxy, Hyy, valid, inner, base, 0, grid)
    px_b, _ = _path_integral(Hxx, Hxy, valid, inner, base, 0, grid)
    py_b, _ = _path_integral(Hxy, Hyy, valid, inner, base, 1, grid)
    stranded = valid & ~reached
    if stranded.any():
        raise IntegrationError(f"{np.count_nonzero(stranded)} valid node(s) are not connected to the base node "
                               f"{base} along grid paths")
    gauge = tuple(int(v) for v in np.argwhere(valid)[0])
    Px, Py = px_a - px_a[gauge], py_a - py_a[gauge]
    compat = np.hypot(px_a - px_b - (px_a[gauge] - px_b[gauge]), py_a - py_b - (py_a[gauge] - py_b[gauge]))
    if gauge != (0, 0):
        logging.info(f"Potential gauge fixed at node (row {gauge[0]}, column {gauge[1]})")
    curl = hessian_curl((Hxx, Hxy, Hyy), grid)
    return PotentialGradient(grid, Px, Py, compat, curl, valid)


def _transform(s, w, direction):
    geo = geometry(s)
    hessians = hessian_fields(s, w, geo)
    potential = integrate_potential_gradient(hessians, s.grid)
    ux, uy = geo.derivatives.fx, geo.derivatives.fy
    with np.errstate(invalid='ignore'):
        height = w.theta(np.where(potential.valid, s.u, np.nan))
    points = np.stack([potential.Px, potential.Py, height], axis=-1)
    if direction == Direction.EUCLID_TO_LORENTZ:
        normal = np.stack([ux, uy, geo.W], axis=-1)
    else:
        normal = np.stack([-ux, -uy, geo.W], axis=-1)
    dual = dual_weight(w)
    logging.info(f"{direction.value}: weight {w.describe()} -> dual {dual.describe()}, "
                 f"max compat residual {field_stats(potential.compat_residual)[0]:.3e}")
    return CalabiPair(s, w, points, normal, dual, direction, potential, geo)


def forward_transform(s, w):
    """psi~ = (Px, Py, theta(u)) of a Euclidean weighted minimal graph, with normal (u_x, u_y, W)"""
    if s.signature != Signature.EUCLIDEAN:
        raise GridError("forward_transform expects a Euclidean graph")
    return _transform(s, w, Direction.EUCLID_TO_LORENTZ)


def inverse_transform(s, w):
    """psi = (Px, Py, theta(u)) of a Lorentzian weighted maximal graph, with normal (-u_x, -u_y, W)"""
    if s.signature != Signature.LORENTZIAN:
        raise GridError("inverse_transform expects a Lorentzian graph")
    return _transform(s, w, Direction.LORENTZ_TO_EUCLID)


def _check_fold_over(X, Y):
    # shoelace area of every mapped cell, corners in counter-clockwise source order
    corners = [(X[:-1, :-1], Y[:-1, :-1]), (X[:-1, 1:], Y[:-1, 1:]),
               (X[1:, 1:], Y[1:, 1:]), (X[1:, :-1], Y[1:, :-1])]
    area = np.zeros_like(X[:-1, :-1])
    for (xa, ya), (xb, yb) in zip(corners, corners[1:] + corners[:1]):
        area += xa * yb - xb * ya
    with np.errstate(invalid='ignore'):
        folded = np.isfinite(area) & (area <= 0)
    if folded.any():
        cells = [tuple(int(v) for v in c) for c in np.argwhere(folded)]
        logging.error(f"Image projection folds over in {len(cells)} cell(s), first {cells[:5]}")
        raise FoldOverError(f"image projection folds over in {len(cells)} cell(s): {cells[:10]}", cells)


def _image_grid(X, Y, grid):
    """Rectangle inscribed in the image of an all-valid block of source nodes"""
    xmin, xmax = np.max(X[:, 0]), np.min(X[:, -1])
    ymin, ymax = np.max(Y[0, :]), np.min(Y[-1, :])
    if not (xmax > xmin and ymax > ymin):
        raise GridError(f"image hull contains no rectangle: [{xmin}, {xmax}] x [{ymin}, {ymax}]")
    return Grid2D(float(xmin), float(ymin), (xmax - xmin) / (grid.nx - 1), (ymax - ymin) / (grid.ny - 1),
                  grid.nx, grid.ny)


def _largest_block(mask):
    """Bounds (j0, j1, i0, i1) of the largest all-True index rectangle, None if there is none"""
    heights = np.zeros(mask.shape[1], dtype=int)
    best, bounds = 0, None
    for j, row in enumerate(mask):
        heights = np.where(row, heights + 1, 0)
        stack = []
        for i, height in enumerate(list(heights) + [0]):
            start = i
            while stack and stack[-1][1] >= height:
                start, top = stack.pop()
                top = int(top)
                if top * (i - start) > best:
                    best, bounds = top * (i - start), (j - top + 1, j + 1, start, i)
            stack.append((start, height))
    return bounds


def source_block(p):
    """The all-valid block of source nodes that resampling and curvature pull-back work on,
    inside the outer ring of the grid whenever the interior has valid nodes"""
    grid = p.source.grid
    bounds = _largest_block(p.valid & grid.interior_mask(1)) or _largest_block(p.valid)
    if bounds is None:
        raise GridError("the pair has no valid source node")
    j0, j1, i0, i1 = bounds
    if min(j1 - j0, i1 - i0) < 3:
        raise GridError(f"largest valid source block is only {j1 - j0}x{i1 - i0} nodes")
    return bounds


class _GridSpline:
    """Bicubic interpolant of a grid field, differentiable in x and y"""

    def __init__(self, grid, values):
        self.spline = RectBivariateSpline(grid.y, grid.x, values, kx=3, ky=3)

    def __call__(self, x, y, d=None):
        # first spline coordinate is y
        dy, dx = {None: (0, 0), 'x': (0, 1), 'y': (1, 0)}[d]
        return self.spline(y, x, dx=dy, dy=dx, grid=False)


def _invert_spline(grid, Px, Py, X, Y):
    """Newton-solve P(x, y) = (X, Y) node by node, seeded from the nearest image point"""
    sx, sy = _GridSpline(grid, Px), _GridSpline(grid, Py)
    gx, gy = grid.mesh()
    tree = cKDTree(np.column_stack([Px.ravel(), Py.ravel()]))
    _, nearest = tree.query(np.column_stack([X.ravel(), Y.ravel()]))
    x, y = gx.ravel()[nearest], gy.ravel()[nearest]
    X, Y = X.ravel(), Y.ravel()
    xlo, xhi = grid.x[0], grid.x[-1]
    ylo, yhi = grid.y[0], grid.y[-1]
    scale = max(np.ptp(Px), np.ptp(Py), 1.0)
    for _ in range(NEWTON_ITERATIONS):
        f1, f2 = sx(x, y) - X, sy(x, y) - Y
        if np.all(np.hypot(f1, f2) <= 1e-14 * scale):
            break
        a, b = sx(x, y, 'x'), sx(x, y, 'y')
        c, d = sy(x, y, 'x'), sy(x, y, 'y')
        det = a * d - b * c
        with np.errstate(divide='ignore', invalid='ignore'):
            x = np.clip(x - (d * f1 - b * f2) / det, xlo, xhi)
            y = np.clip(y - (a * f2 - c * f1) / det, ylo, yhi)
    residual = np.hypot(sx(x, y) - X, sy(x, y) - Y)
    converged = np.isfinite(residual) & (residual <= 1e-10 * scale)
    return x, y, converged


def resample_image_graph(p, method='spline'):
    """The image of a pair as a graph over a rectangle inscribed in its horizontal projection.

    method='spline' inverts a bicubic interpolant of (Px, Py) by Newton's method and carries
    the source height through theta; method='linear' interpolates piecewise-linearly over a
    Delaunay triangulation of the image points. The target rectangle is inscribed in the
    image of source_block(p), and the spline only sees nodes of that block.
    """
    grid = p.source.grid
    X, Y, Z = p.image_points[..., 0], p.image_points[..., 1], p.image_points[..., 2]
    valid = p.valid
    Xv, Yv = np.where(valid, X, np.nan), np.where(valid, Y, np.nan)
    _check_fold_over(Xv, Yv)
    j0, j1, i0, i1 = source_block(p)
    rows, cols = slice(j0, j1), slice(i0, i1)
    target = _image_grid(X[rows, cols], Y[rows, cols], grid)
    TX, TY = target.mesh()
    signature = Signature.LORENTZIAN if p.direction == Direction.EUCLID_TO_LORENTZ else Signature.EUCLIDEAN
    if method == 'spline' and min(j1 - j0, i1 - i0) < 4:
        logging.warning(f"valid source block is {j1 - j0}x{i1 - i0} nodes; resampling piecewise-linearly")
        method = 'linear'
    if method == 'spline':
        block = grid.block(j0, j1, i0, i1)
        x, y, ok = _invert_spline(block, X[rows, cols], Y[rows, cols], TX, TY)
        u = _GridSpline(block, p.source.u[rows, cols])(x, y)
        height = np.where(ok, p.weight.theta(u), np.nan)
        px, py = x.reshape(target.shape), y.reshape(target.shape)
        height = height.reshape(target.shape)
        ok = ok.reshape(target.shape)
    elif method == 'linear':
        gx, gy = grid.mesh()
        pts = np.column_stack([X[valid], Y[valid]])
        vals = np.column_stack([Z[valid], gx[valid], gy[valid]])
        out = LinearNDInterpolator(pts, vals)(TX, TY)
        height, px, py = out[..., 0], out[..., 1], out[..., 2]
        ok = np.isfinite(height)
    else:
        raise ValueError(f"unknown resampling method '{method}'")
    missing = np.count_nonzero(~ok)
    if missing:
        logging.warning(f"{missing} resampled node(s) could not be located in the image")
    return ResampledGraph(target, height, signature, valid=ok, preimage_x=px, preimage_y=py)


def _pairing(signature):
    if signature == Signature.LORENTZIAN:
        return lorentz_inner
    return lambda a, b: np.sum(a * b, axis=-1)


def _shape_curvatures(g11, g12, g22, b11, b12, b21, b22):
    det = g11 * g22 - g12 ** 2
    # A = g^-1 b
    a11 = (g22 * b11 - g12 * b21) / det
    a12 = (g22 * b12 - g12 * b22) / det
    a21 = (g11 * b21 - g12 * b11) / det
    a22 = (g11 * b22 - g12 * b12) / det
    return a11 + a22, a11 * a22 - a12 * a21


def _expected_image_curvatures(p, geo, resampled):
    """-W^2 e^-phi H and -W^4 e^-2phi K of the source at the preimage of every resampled
    node, NaN where the preimage falls outside the source block"""
    j0, j1, i0, i1 = source_block(p)
    rows, cols = slice(j0, j1), slice(i0, i1)
    block = p.source.grid.block(j0, j1, i0, i1)
    x, y = resampled.preimage_x, resampled.preimage_y
    with np.errstate(invalid='ignore'):
        inside = (resampled.valid & (x >= block.x[0]) & (x <= block.x[-1])
                  & (y >= block.y[0]) & (y <= block.y[-1]))
    x, y = np.where(inside, x, block.x[0]), np.where(inside, y, block.y[0])
    e_phi = p.weight.exp_phi(p.source.u[rows, cols])
    W = geo.W[rows, cols]
    expected = (-W ** 2 / e_phi * geo.H[rows, cols], -W ** 4 / e_phi ** 2 * geo.K[rows, cols])
    return tuple(np.where(inside, _GridSpline(block, f)(x, y), np.nan) for f in expected)


def verify_pair(p, resampled, tolerances=None, margin=1, include_boundary=False):
    """Residuals of every relation between the two graphs of a Calabi pair.

    hh and kk compare the curvatures of the resampled image graph, computed by geometry(),
    with the source curvatures pulled back through the preimage of each node. The
    parametric variants hh_param and kk_param, and the conformality check, work on the
    source grid: tangents by finite differences of the image points, normal derivatives
    from the source derivatives.
    """
    grid = p.source.grid
    geo = p.geometry or geometry(p.source)
    d = geo.derivatives
    h = grid.h
    tol = {'algebraic': ALGEBRAIC_TOL, 'discretization': DISCRETIZATION_FACTOR * h ** 2}
    tol.update(tolerances or {})
    mask = p.valid & geo.valid
    if not include_boundary:
        mask &= grid.interior_mask(margin)

    u = p.source.u
    w = p.weight
    with np.errstate(invalid='ignore', divide='ignore', over='ignore'):
        e_phi = w.exp_phi(np.where(mask, u, np.nan))
        W = geo.W
        # image normal (u_x, u_y, W) or (-u_x, -u_y, W); W_x shares the sign
        sign = 1.0 if p.direction == Direction.EUCLID_TO_LORENTZ else -1.0
        W_x = sign * (d.fx * d.fxx + d.fy * d.fxy) / W
        W_y = sign * (d.fx * d.fxy + d.fy * d.fyy) / W
        N_x = np.stack([sign * d.fxx, sign * d.fxy, W_x], axis=-1)
        N_y = np.stack([sign * d.fxy, sign * d.fyy, W_y], axis=-1)
        img_x = np.gradient(p.image_points, grid.dx, axis=1, edge_order=2)
        img_y = np.gradient(p.image_points, grid.dy, axis=0, edge_order=2)
        image_signature = (Signature.LORENTZIAN if p.direction == Direction.EUCLID_TO_LORENTZ
                           else Signature.EUCLIDEAN)
        pair = _pairing(image_signature)
        g11, g12, g22 = pair(img_x, img_x), pair(img_x, img_y), pair(img_y, img_y)
        H_img, det_img = _shape_curvatures(g11, g12, g22, pair(img_x, N_x), pair(img_x, N_y),
                                           pair(img_y, N_x), pair(img_y, N_y))
        K_img = -det_img if image_signature == Signature.LORENTZIAN else det_img
        hh = H_img + W ** 2 / e_phi * geo.H
        kk = K_img + W ** 4 / e_phi ** 2 * geo.K
        c = e_phi ** 2 / W ** 2
        conformal = np.maximum.reduce([np.abs(g11 - c * geo.E), np.abs(g12 - c * geo.F),
                                       np.abs(g22 - c * geo.G)])
        norm = pair(p.image_normal, p.image_normal)
        gauss = norm + 1.0 if image_signature == Signature.LORENTZIAN else norm - 1.0
        image_geo = geometry(resampled)
        H_expected, K_expected = _expected_image_curvatures(p, geo, resampled)
        hh_image = image_geo.H - H_expected
        kk_image = image_geo.K - K_expected
    image_mask = image_geo.valid
    if not include_boundary:
        image_mask &= resampled.grid.interior_mask(margin)

    report = InvariantReport(metadata={
        'direction': p.direction.value,
        'weight': w.describe(),
        'dual': p.dual.describe(),
        'grid': grid.to_dict(),
        'h': h,
        'resampled_grid': resampled.grid.to_dict(),
    })
    disc = tol['discretization']
    hh_max, hh_rms = field_stats(hh_image, image_mask)
    kk_max, kk_rms = field_stats(kk_image, image_mask)
    report.add('hh_max', hh_max, disc)
    report.add('hh_rms', hh_rms, disc)
    report.add('kk_max', kk_max, disc)
    report.add('kk_rms', kk_rms, disc)
    report.add('hh_param_max', field_stats(hh, mask)[0], disc)
    report.add('kk_param_max', field_stats(kk, mask)[0], disc)
    report.add('conformal_max', field_stats(conformal, mask)[0], disc)
    dual_res = pde_residual(resampled, p.dual)
    dual_mask = None if include_boundary else resampled.grid.interior_mask(margin)
    report.add('dual_pde_max', field_stats(dual_res, dual_mask)[0], disc)
    report.add('curl_max', field_stats(p.potential.curl, grid.interior_mask(margin) & p.potential.valid)[0], disc)
    report.add('compat_max', field_stats(p.potential.compat_residual, p.potential.valid)[0], disc)
    report.add('gaussmap_defect', field_stats(gauss, p.valid)[0], tol['algebraic'])
    verdict = 'passed' if report.passed else f"failed ({', '.join(report.failures())})"
    logging.info(f"Pair verification {verdict} at h={h:.4g}")
    return report


def fit_dual_exponent(s, bounds=(-4.0, 4.0), margin=1):
    """Exponent a minimizing max |Q(u) + (a/u) W^2| over a Lorentzian graph.

    The scale b of a*log(b*w) drops out of phi_dot = a/w, so only a is fitted.
    """
    d = gradient_and_hessian(s.u, s.grid)
    mask = s.grid.interior_mask(margin) & spacelike_mask(s, d) & (s.u != 0)
    Q = lorentz_operator(d)[mask]
    slope_term = ((1.0 - d.fx ** 2 - d.fy ** 2) / s.u)[mask]

    def objective(a):
        return float(np.max(np.abs(Q + a * slope_term)))

    result = minimize_scalar(objective, bounds=bounds, method='bounded', options={'xatol': 1e-10})
    logging.info(f"Best-fit dual exponent {result.x:.6f} with residual {result.fun:.3e}")
    return float(result.x), float(result.fun)


def round_trip_defect(s, w, method='spline'):
    """Forward, resample, inverse, and compare with the source modulo an affine gauge.

    Returns {'horizontal': ..., 'height': ...}. For non-constant weights the composition is
    not expected to be the identity, so this is a diagnostic only.
    """
    forward = forward_transform(s, w)
    image = resample_image_graph(forward, method)
    back = inverse_transform(image, forward.dual)
    ok = back.valid & image.valid
    # the inverse potential is gauged at the image grid's lower-left node
    x_ll, y_ll = image.preimage_x[0, 0], image.preimage_y[0, 0]
    bx = back.image_points[..., 0] + x_ll
    by = back.image_points[..., 1] + y_ll
    horizontal = np.hypot(bx - image.preimage_x, by - image.preimage_y)
    original = _GridSpline(s.grid, s.u)(image.preimage_x.ravel(), image.preimage_y.ravel())
    diff = (back.image_points[..., 2].ravel() - original)[ok.ravel()]
    xs, ys = image.preimage_x.ravel()[ok.ravel()], image.preimage_y.ravel()[ok.ravel()]
    if diff.size < 3:
        return {'horizontal': math.nan, 'height': math.nan}
    basis = np.column_stack([np.ones_like(xs), xs, ys])
    coef = np.linalg.lstsq(basis, diff, rcond=None)[0]
    height = float(np.max(np.abs(diff - basis @ coef)))
    result = {'horizontal': field_stats(horizontal, ok)[0], 'height': height}
    logging.info(f"Round-trip defect for {w.describe()}: horizontal {result['horizontal']:.3e}, "
                 f"height {result['height']:.3e}")
    return result
