"""
Rotationally symmetric weighted minimal and maximal graphs and their transformed generating curves
"""
import logging
import math
from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.special import expit

from .diffgeom import GraphSurface, Signature
from .weights import make_weight, WeightKind
from ..utils.errors import ConfigError, GridError, ProfileError
from ..utils.mesh import SurfaceMesh
from ..utils.ode import integrate_fixed

SERIES_STEPS = 10
CHORD_TOLERANCE = 1e-6
MAX_HALVINGS = 8
BOUNDARY_LAYER_STEPS = 20
LOG_HEIGHT_STEP = 0.02
LOG_HEIGHT_FLOOR = 1e-12
SINGULAR_ANGLE_TOL = 1e-8


class ProfileKind(str, Enum):
    BOWL = 'bowl'
    WINGLIKE = 'winglike'


@dataclass(frozen=True)
class Forcing:
    """Right-hand side f of the Lorentzian radial equation; None alpha means f = 1, else f = alpha/u"""
    alpha: float = None

    def __call__(self, u):
        return 1.0 if self.alpha is None else self.alpha / u

    def derivative(self, u):
        return 0.0 if self.alpha is None else -self.alpha / u ** 2

    def to_weight(self):
        # Radial form of the maximal graph equation has f = -phi_dot
        if self.alpha is None:
            return make_weight(WeightKind.LINEAR, -1.0)
        return make_weight(WeightKind.LOG_ALPHA, -self.alpha)

    def describe(self):
        return 'one' if self.alpha is None else f"alpha:{self.alpha:g}"


def parse_forcing(text):
    """'one' or 'alpha:<a>'"""
    parts = text.strip().lower().split(':')
    try:
        if parts == ['one']:
            return Forcing()
        if parts[0] == 'alpha' and len(parts) == 2:
            return Forcing(float(parts[1]))
    except ValueError:
        pass
    raise ConfigError(f"malformed forcing '{text}', expected 'one' or 'alpha:<a>'")


@dataclass
class RadialProfile:
    """Sampled generating curve (x(s), u(s)) with turning angle z.

    On the Lorentzian side the curve is sampled in the radius: s and x both hold r, z is
    the hyperbolic angle with du/dr = tanh z and deficit holds 1 - du/dr exactly.
    """
    weight: object
    s: np.ndarray
    x: np.ndarray
    u: np.ndarray
    z: np.ndarray
    kind: ProfileKind = ProfileKind.BOWL
    side: Signature = Signature.EUCLIDEAN
    neck_index: int = None
    reason: str = ''
    deficit: np.ndarray = None

    def __len__(self):
        return len(self.s)

    def slope(self):
        if self.side == Signature.LORENTZIAN:
            return np.tanh(self.z)
        with np.errstate(divide='ignore'):
            return np.tan(self.z)

    def second_derivative(self):
        """d2u/dr2 of a Lorentzian profile from its ODE, the axis limit f(a)/2 at r = 0"""
        if self.side != Signature.LORENTZIAN:
            raise ProfileError("second_derivative is defined for Lorentzian profiles")
        d = self.deficit
        cone = d * (2.0 - d)
        with np.errstate(divide='ignore', invalid='ignore'):
            rhs = self.weight(self.u) - np.tanh(self.z) / self.x
        axis = self.x == 0
        rhs[axis] = 0.5 * np.array([self.weight(u) for u in self.u[axis]], dtype=float)
        return cone * rhs

    def tangent_defect(self):
        """|x'(s)^2 + u'(s)^2 - 1| from second-order differences of the sampled curve"""
        if self.side != Signature.EUCLIDEAN:
            raise ProfileError("tangent_defect is defined for arc-length parametrized profiles")
        dx = np.gradient(self.x, self.s, edge_order=2)
        du = np.gradient(self.u, self.s, edge_order=2)
        return np.abs(dx ** 2 + du ** 2 - 1.0)

    def mirrored(self):
        """Reflect an axis profile across the apex, giving the full symmetric curve"""
        if self.kind != ProfileKind.BOWL or self.x[0] != 0:
            raise ProfileError("only profiles starting on the axis can be mirrored")
        deficit = None
        if self.deficit is not None:
            deficit = np.concatenate([(2.0 - self.deficit)[:0:-1], self.deficit])
        return RadialProfile(
            self.weight,
            np.concatenate([-self.s[:0:-1], self.s]),
            np.concatenate([-self.x[:0:-1], self.x]),
            np.concatenate([self.u[:0:-1], self.u]),
            np.concatenate([-self.z[:0:-1], self.z]),
            self.kind, self.side, len(self.s) - 1, self.reason, deficit)


@dataclass
class TransformedCurve:
    """Generating curve (lambda, theta) of the Calabi partner of a rotational surface"""
    lam: np.ndarray
    theta: np.ndarray
    z: np.ndarray
    s: np.ndarray
    weight: object
    source_kind: ProfileKind
    side: Signature = Signature.LORENTZIAN
    singular: np.ndarray = None
    neck_index: int = None

    @property
    def kind(self):
        return self.source_kind

    def __len__(self):
        return len(self.lam)

    def slope_law_defect(self):
        """|d theta/d lambda - sin z| at interior samples"""
        dtheta = np.gradient(self.theta, self.s)
        dlam = np.gradient(self.lam, self.s)
        with np.errstate(divide='ignore', invalid='ignore'):
            defect = np.abs(dtheta / dlam - np.sin(self.z))
        return defect[1:-1]


def _chord_accept(s, y, s_new, y_new):
    # a step that turns by dz covers a chord of ds*sinc(dz/2) on its osculating circle
    ds = s_new - s
    dz = y_new[2] - y[2]
    expected = ds * np.sinc(dz / (2.0 * math.pi))
    chord2 = (y_new[0] - y[0]) ** 2 + (y_new[1] - y[1]) ** 2
    return abs(1.0 - chord2 / expected ** 2) <= CHORD_TOLERANCE


def _arc_length_rhs(w):
    def rhs(s, y):
        x, u, z = y
        c, sn = math.cos(z), math.sin(z)
        return np.array([c, sn, w.phi_dot(u) * c - sn / x])
    return rhs


def _march_arc_length(w, s0, state, h, s_end, switch_height):
    why = {}

    def stop(s, y):
        x, u, z = y
        if x <= 0:
            why['reason'] = 'axis'
        elif not w.in_domain(u):
            why['reason'] = 'domain'
        elif switch_height and abs(u) < switch_height and u * math.sin(z) * h < 0:
            why['reason'] = 'boundary_layer'
        return bool(why)

    def accept(s, y, s_new, y_new):
        return bool(w.in_domain(y_new[1])) and _chord_accept(s, y, s_new, y_new)

    traj = integrate_fixed(_arc_length_rhs(w), s0, state, h, s_end, stop=stop, accept=accept,
                           max_halvings=MAX_HALVINGS)
    reason = why.get('reason', 's_max' if traj.reason == 'end' else traj.reason)
    return traj.t, traj.y, reason


def _march_log_height(w, s0, state):
    """Carry the curve from (x, u, z) into the weight's boundary u -> 0 in tau = log|u|"""
    x0, u0, z0 = state
    sign = math.copysign(1.0, u0)
    why = {}

    def rhs(tau, y):
        x, z, s = y
        u = sign * math.exp(tau)
        c, sn = math.cos(z), math.sin(z)
        z_s = w.phi_dot(u) * c - sn / x
        return np.array([u * c / sn, u * z_s / sn, u / sn])

    def stop(tau, y):
        if y[0] <= 0:
            why['reason'] = 'axis'
        elif abs(math.sin(y[1])) < 1e-3:
            why['reason'] = 'turned'
        return bool(why)

    traj = integrate_fixed(rhs, math.log(abs(u0)), [x0, z0, s0], -LOG_HEIGHT_STEP,
                           math.log(LOG_HEIGHT_FLOOR), stop=stop)
    reason = why.get('reason', 'boundary' if traj.reason == 'end' else traj.reason)
    ys = traj.y[1:]
    samples = np.column_stack([ys[:, 0], sign * np.exp(traj.t[1:]), ys[:, 1]])
    return ys[:, 2], samples, reason


def _march(w, s0, state, h, s_end):
    """Arc-length march, continued in log-height when it runs into the weight's boundary"""
    switch = BOUNDARY_LAYER_STEPS * abs(h) if w.has_boundary_at_zero else 0.0
    s, y, reason = _march_arc_length(w, s0, state, h, s_end, switch)
    if reason == 'boundary_layer':
        logging.info(f"Switching to log-height integration at s={s[-1]:.6g}, u={y[-1][1]:.3e}")
        s_tail, y_tail, reason = _march_log_height(w, s[-1], y[-1])
        s = np.concatenate([s, s_tail])
        y = np.concatenate([y, y_tail])
    return np.asarray(s), np.asarray(y), reason


def _axis_series(phi_dot0, phi_ddot0, r):
    a = phi_dot0 / 4.0
    b = (8.0 * a ** 3 + a * phi_ddot0) / 16.0
    u = a * r ** 2 + b * r ** 4
    du = 2.0 * a * r + 4.0 * b * r ** 3
    s = r + (2.0 / 3.0) * a ** 2 * r ** 3
    return s, u, np.arctan(du)


def bowl_profile(w, u0, s_max=5.0, h=1e-3):
    """Profile of a weighted minimal surface of revolution meeting the axis at height u0.

    Launched off the axis from the series u = u0 + a r^2 + b r^4 at r = 10h, then
    integrated in arc length: x' = cos z, u' = sin z, z' = phi_dot(u) cos z - sin z / x.
    """
    if not w.in_domain(u0):
        raise ProfileError(f"apex height {u0} outside the domain of {w.describe()}")
    if h <= 0 or s_max <= SERIES_STEPS * h:
        raise ProfileError(f"need 0 < 10h < s_max, got h={h}, s_max={s_max}")
    r = h * np.arange(SERIES_STEPS + 1)
    s_series, du_series, z_series = _axis_series(w.phi_dot(u0), w.phi_ddot(u0), r)
    u_series = u0 + du_series
    launch = [r[-1], u_series[-1], z_series[-1]]
    s, y, reason = _march(w, s_series[-1], launch, h, s_max)
    logging.info(f"Bowl profile for {w.describe()} from u0={u0}: {len(s) + SERIES_STEPS} samples, ended by {reason}")
    return RadialProfile(
        w,
        np.concatenate([s_series[:-1], s]),
        np.concatenate([r[:-1], y[:, 0]]),
        np.concatenate([u_series[:-1], y[:, 1]]),
        np.concatenate([z_series[:-1], y[:, 2]]),
        ProfileKind.BOWL, Signature.EUCLIDEAN, reason=reason)


def winglike_profile(w, x1, u1, s_max=5.0, h=1e-3):
    """Profile through a neck at (x1, u1) with vertical tangent, integrated both ways"""
    if not (x1 > 0 and u1 > 0):
        raise ProfileError(f"neck must lie in the open quadrant, got ({x1}, {u1})")
    if not w.in_domain(u1):
        raise ProfileError(f"neck height {u1} outside the domain of {w.describe()}")
    seed = [x1, u1, 0.5 * math.pi]
    s_fwd, y_fwd, why_fwd = _march(w, 0.0, seed, h, s_max)
    s_bwd, y_bwd, why_bwd = _march(w, 0.0, seed, -h, -s_max)
    for branch, why, ys in (('outer', why_fwd, y_fwd), ('inner', why_bwd, y_bwd)):
        if why == 'axis':
            raise ProfileError(f"{branch} branch of the winglike profile hit the axis near "
                               f"(x={ys[-1][0]:.6g}, u={ys[-1][1]:.6g})")
    logging.info(f"Winglike profile for {w.describe()} through ({x1}, {u1}): "
                 f"outer branch ended by {why_fwd}, inner branch by {why_bwd}")
    y = np.concatenate([y_bwd[:0:-1], y_fwd])
    return RadialProfile(
        w, np.concatenate([s_bwd[:0:-1], s_fwd]), y[:, 0], y[:, 1], y[:, 2],
        ProfileKind.WINGLIKE, Signature.EUCLIDEAN, neck_index=len(s_bwd) - 1,
        reason=f"{why_bwd}/{why_fwd}")


def _lorentz_rhs(f):
    def rhs(r, y):
        u, z = y
        return np.array([math.tanh(z), f(u) - math.tanh(z) / r])
    return rhs


def _march_radius(f, r0, state, h, r_max):
    def stop(r, y):
        return f.alpha is not None and y[0] <= 0

    traj = integrate_fixed(_lorentz_rhs(f), r0, state, h, r_max, stop=stop)
    if traj.reason != 'end':
        raise ProfileError(f"Lorentzian profile lost causality near r={traj.t[-1]:.6g} ({traj.reason})")
    return traj.t, traj.y


def _lorentz_profile(f, r, u, z, kind, reason):
    # 1 - tanh z carried without cancellation; it stays positive far past 1 - 1e-9
    deficit = 2.0 * expit(-2.0 * z)
    if np.any(deficit <= 0) or not np.all(np.isfinite(z)):
        raise ProfileError("Lorentzian profile reached the light cone")
    return RadialProfile(f, r, r, u, z, kind, Signature.LORENTZIAN, reason=reason, deficit=deficit)


def lorentz_bowl_profile(f, a, r_max=50.0, h=1e-2):
    """Entire spacelike bowl u(r) with u(0) = a, u'(0) = 0 for u''/(1-u'^2) = f(u) - u'/r"""
    if a <= 0:
        raise ProfileError(f"bowl height must be positive, got {a}")
    if f.alpha is not None and f.alpha <= 1:
        raise ProfileError(f"bowls with f = alpha/u need alpha > 1, got {f.alpha}")
    A = f(a) / 4.0
    B = (f.derivative(a) * A - 8.0 * A ** 3) / 16.0
    r = h * np.arange(SERIES_STEPS + 1)
    u_series = a + A * r ** 2 + B * r ** 4
    z_series = np.arctanh(2.0 * A * r + 4.0 * B * r ** 3)
    rs, ys = _march_radius(f, r[-1], [u_series[-1], z_series[-1]], h, r_max)
    logging.info(f"Lorentzian bowl for f={f.describe()}, a={a}: slope {math.tanh(ys[-1][1]):.12f} at r={rs[-1]:g}")
    return _lorentz_profile(
        f, np.concatenate([r[:-1], rs]), np.concatenate([u_series[:-1], ys[:, 0]]),
        np.concatenate([z_series[:-1], ys[:, 1]]), ProfileKind.BOWL, 'r_max')


def lorentz_winglike_profile(f, a, branch=-1, r_max=50.0, h=1e-2, curvature=None):
    """Profile leaving the axis along the light cone, u'(0) = branch = -1 or +1.

    Launched at r = 10h from u = a + branch*r - branch*C r^3/3 + C f(a) r^4/2. Matching
    leaves the r^3 coefficient C free; it defaults to f(a).
    """
    if a <= 0:
        raise ProfileError(f"axis height must be positive, got {a}")
    if branch not in (-1, 1):
        raise ProfileError(f"branch must be -1 or +1, got {branch}")
    fa = f(a)
    C = fa if curvature is None else curvature
    if C <= 0:
        raise ProfileError(f"light-cone launch needs a positive cubic coefficient, got {C}")
    r = h * np.arange(1, SERIES_STEPS + 1)
    # q is the distance of the slope from the light cone, 1 + u' or 1 - u'
    q = C * r ** 2 - branch * 2.0 * C * fa * r ** 3
    u_series = a + branch * r - branch * C * r ** 3 / 3.0 + C * fa * r ** 4 / 2.0
    z_series = branch * 0.5 * np.log((2.0 - q) / q)
    rs, ys = _march_radius(f, r[-1], [u_series[-1], z_series[-1]], h, r_max)
    logging.info(f"Lorentzian winglike profile for f={f.describe()}, a={a}, branch {branch:+d}: "
                 f"slope {math.tanh(ys[-1][1]):.12f} at r={rs[-1]:g}")
    return _lorentz_profile(
        f, np.concatenate([r[:-1], rs]), np.concatenate([u_series[:-1], ys[:, 0]]),
        np.concatenate([z_series[:-1], ys[:, 1]]), ProfileKind.WINGLIKE, 'r_max')


def singular_set(curve, tol=SINGULAR_ANGLE_TOL):
    """Indices where the angle function cos z vanishes"""
    return np.flatnonzero(np.abs(np.cos(curve.z)) < tol)


def transform_profile(p):
    """lambda = e^phi(u) x cos z, theta = theta(u) along a Euclidean profile"""
    if p.side != Signature.EUCLIDEAN:
        raise ProfileError("transform_profile expects a Euclidean profile")
    w = p.weight
    lam = w.exp_phi(p.u) * p.x * np.cos(p.z)
    theta = w.theta(p.u)
    curve = TransformedCurve(np.asarray(lam), np.asarray(theta), p.z.copy(), p.s.copy(), w, p.kind,
                             neck_index=p.neck_index)
    curve.singular = singular_set(curve)
    if len(curve.singular):
        logging.info(f"Transformed curve has {len(curve.singular)} singular sample(s)")
    return curve


def elliptic_revolve(curve, n_t=64):
    """Revolve (x, u) or (lambda, theta) about the vertical axis"""
    if n_t < 8:
        raise GridError(f"need at least 8 angular samples, got {n_t}")
    if isinstance(curve, TransformedCurve):
        rho, height, name = curve.lam, curve.theta, 'transformed_revolution'
    else:
        rho, height, name = curve.x, curve.u, 'revolution'
    t = 2.0 * math.pi * np.arange(n_t) / n_t
    points = np.stack([rho[:, None] * np.cos(t)[None, :],
                       rho[:, None] * np.sin(t)[None, :],
                       np.broadcast_to(height[:, None], (len(rho), n_t))], axis=-1)
    return SurfaceMesh.from_grid(points, wrap_t=True, name=name)


def _radial_samples(p, branch):
    if isinstance(p, TransformedCurve):
        radius, height = p.lam, p.theta
    else:
        radius, height = p.x, p.u
    neck = p.neck_index if p.kind == ProfileKind.WINGLIKE else None
    if neck is not None:
        if branch == 'outer':
            radius, height = radius[neck:], height[neck:]
        elif branch == 'inner':
            radius, height = radius[neck::-1], height[neck::-1]
        else:
            raise ProfileError(f"winglike profiles need branch 'outer' or 'inner', got {branch!r}")
    keep = radius >= 0
    radius, height = radius[keep], height[keep]
    scale = max(float(np.max(np.abs(radius))), 1.0)
    if np.any(np.diff(radius) < -1e-9 * scale):
        raise ProfileError("curve is not a graph over the radius on the requested branch")
    # samples packed tighter than float resolution near a vertical end
    reached = np.maximum.accumulate(radius)
    strict = np.concatenate([[True], radius[1:] > reached[:-1]])
    return radius[strict], height[strict]


def profile_to_graph(p, grid, method='spline', branch='outer'):
    """Sample a rotational profile onto a grid as u(sqrt(x^2 + y^2))"""
    radius, height = _radial_samples(p, branch)
    X, Y = grid.mesh()
    r = np.hypot(X, Y)
    inside = (r >= radius[0]) & (r <= radius[-1])
    if method == 'spline':
        bc = ((1, 0.0), 'not-a-knot') if radius[0] == 0 else 'not-a-knot'
        u = CubicSpline(radius, height, bc_type=bc)(np.clip(r, radius[0], radius[-1]))
    elif method == 'linear':
        u = np.interp(r, radius, height)
    else:
        raise ConfigError(f"unknown interpolation method '{method}'")
    u = np.where(inside, u, np.nan)
    signature = p.side
    if not inside.all():
        logging.info(f"{np.count_nonzero(~inside)} grid node(s) lie outside the profile's radial range")
    return GraphSurface(grid, u, signature, valid=inside)
