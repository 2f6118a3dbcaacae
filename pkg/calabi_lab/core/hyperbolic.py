"""
Rotational alpha-maximal surfaces of hyperbolic type and their Euclidean partners
"""
import logging
import math
from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy.integrate import cumulative_trapezoid, quad
from scipy.special import beta

from .diffgeom import GraphSurface, Signature
from .weights import make_weight, WeightKind
from ..utils.errors import GridError, ProfileError
from ..utils.mesh import SurfaceMesh
from ..utils.ode import integrate_fixed

SWITCH_FRACTION = 0.25
ANGLE_STEP = 1e-2
HEIGHT_FLOOR = 1e-9


class Completeness(str, Enum):
    COMPLETE = 'complete'
    INCOMPLETE = 'incomplete'


@dataclass
class HyperbolicProfile:
    """Even generating curve u(x) with hyperbolic angle z, du/dx = tanh z.

    uniform marks the samples taken with the fixed x-step h; the rest come from the
    first integral near the light-cone end.
    """
    alpha: float
    u0: float
    k: float
    x: np.ndarray
    u: np.ndarray
    z: np.ndarray
    halfwidth: float
    uniform: np.ndarray
    h: float

    def __len__(self):
        return len(self.x)

    def slope(self):
        return np.tanh(self.z)

    def first_integral_defect(self):
        """|cosh(z) u^(alpha+1) - k| / k per sample"""
        return np.abs(np.cosh(self.z) * self.u ** (self.alpha + 1) - self.k) / self.k

    def curve_curvature(self):
        return -(1.0 + self.alpha) * self.k * self.u ** (-self.alpha - 2.0)

    def weight(self):
        """Lorentzian weight alpha*log(height) of the surface"""
        return make_weight(WeightKind.LOG_ALPHA, self.alpha)


def _log_cosh(z):
    z = np.abs(z)
    return z + np.log1p(np.exp(-2.0 * z)) - math.log(2.0)


def _light_cone_tail(alpha, k, x_s, z_s, u_floor):
    """x(z) past the switch point from dx/dz = -u/(1+alpha), u = (k/cosh z)^(1/(1+alpha))"""
    nu = 1.0 / (1.0 + alpha)
    log_k = math.log(k)

    def height(z):
        return np.exp(nu * (log_k - _log_cosh(z)))

    def rhs(z, y):
        return np.array([-float(height(z)) * nu])

    z_end = -(log_k - (1.0 + alpha) * math.log(u_floor) + math.log(2.0))
    traj = integrate_fixed(rhs, z_s, [x_s], -ANGLE_STEP, min(z_end, z_s - ANGLE_STEP))
    z = traj.t[1:]
    return traj.y[1:, 0], height(z), z


def hyperbolic_profile(alpha, u0, x_extent=5.0, h=1e-3):
    """Solve du/dx = tanh z, dz/dx = -(1+alpha)/u with u(0) = u0, z(0) = 0.

    Integrates x >= 0 and mirrors. For alpha+1 > 0 the curve reaches u = 0 at the finite
    half-width; once u < u0/4 the first integral cosh(z) u^(alpha+1) = k replaces x-stepping.
    """
    if u0 <= 0:
        raise ProfileError(f"u0 must be positive, got {u0}")
    if h <= 0 or x_extent <= 0:
        raise ProfileError(f"need positive step and extent, got h={h}, x_extent={x_extent}")
    k = u0 ** (alpha + 1.0)
    if alpha == -1:
        n = int(round(x_extent / h))
        x = h * np.arange(-n, n + 1)
        return HyperbolicProfile(alpha, u0, k, x, np.full_like(x, u0), np.zeros_like(x),
                                 math.inf, np.ones_like(x, dtype=bool), h)

    def rhs(x, y):
        u, z = y
        return np.array([math.tanh(z), -(1.0 + alpha) / u])

    finite = alpha + 1.0 > 0
    stop = (lambda x, y: y[0] < SWITCH_FRACTION * u0) if finite else None
    traj = integrate_fixed(rhs, 0.0, [u0, 0.0], h, x_extent, stop=stop)
    if traj.reason == 'nonfinite':
        raise ProfileError(f"hyperbolic profile blew up near x={traj.t[-1]:.6g}")
    x, u, z = traj.t, traj.y[:, 0], traj.y[:, 1]
    uniform = np.ones_like(x, dtype=bool)
    halfwidth = math.inf
    if finite:
        halfwidth = domain_halfwidth(alpha, u0)
        if traj.reason == 'stopped':
            x_t, u_t, z_t = _light_cone_tail(alpha, k, x[-1], z[-1], HEIGHT_FLOOR * u0)
            x, u, z = np.concatenate([x, x_t]), np.concatenate([u, u_t]), np.concatenate([z, z_t])
            uniform = np.concatenate([uniform, np.zeros_like(x_t, dtype=bool)])
            logging.info(f"Hyperbolic profile alpha={alpha}: u -> 0 at x={x[-1]:.10f}, half-width {halfwidth:.10f}")
    mirror = lambda a, sign: np.concatenate([sign * a[:0:-1], a])
    return HyperbolicProfile(alpha, u0, k, mirror(x, -1.0), mirror(u, 1.0), mirror(z, -1.0),
                             halfwidth, np.concatenate([uniform[:0:-1], uniform]), h)


def domain_halfwidth(alpha, u0, tol=1e-10):
    """Half-width (u0/|alpha+1|) * integral_0^inf sech(tau)^(1/(alpha+1)) dtau of the profile's domain"""
    if alpha == -1:
        raise ProfileError("the straight line alpha = -1 has no finite half-width")
    if alpha + 1.0 < 0:
        return math.inf
    nu = 1.0 / (alpha + 1.0)
    value, error = quad(lambda tau: math.exp(-nu * float(_log_cosh(tau))), 0.0, math.inf,
                        epsabs=tol, epsrel=1e-13, limit=200)
    if error > tol:
        logging.warning(f"Half-width quadrature error estimate {error:.2e} exceeds {tol:.0e}")
    return u0 * nu * value


def halfwidth_closed_form(alpha, u0):
    """Same half-width through integral_0^inf sech^nu = B(nu/2, 1/2)/2"""
    if alpha + 1.0 <= 0:
        return math.inf
    nu = 1.0 / (alpha + 1.0)
    return u0 * nu * 0.5 * beta(0.5 * nu, 0.5)


def hyperbolic_gauss_curvature(alpha, k, u):
    return (alpha + 1.0) * k ** 2 / np.asarray(u, dtype=float) ** (2.0 * alpha + 4.0)


def completeness_classifier(alpha):
    """Completeness of the convex (alpha < -1) hyperbolic bowls"""
    if alpha >= -1:
        raise ProfileError(f"completeness is classified for alpha < -1 only, got {alpha}")
    return Completeness.COMPLETE if alpha >= -2 else Completeness.INCOMPLETE


def _t_samples(t_range, n_t):
    if n_t < 8:
        raise GridError(f"need at least 8 samples in t, got {n_t}")
    return np.linspace(t_range[0], t_range[1], n_t)


def hyperbolic_points(p, t):
    x, u = p.x[:, None], p.u[:, None]
    return np.stack([np.broadcast_to(x, (len(p.x), len(t))),
                     u * np.sinh(t)[None, :], u * np.cosh(t)[None, :]], axis=-1)


def hyperbolic_revolve(p, t_range=(-1.0, 1.0), n_t=33):
    """Orbit (x, u sinh t, u cosh t) of the profile, with K and H per vertex"""
    t = _t_samples(t_range, n_t)
    points = hyperbolic_points(p, t)
    K = np.repeat(hyperbolic_gauss_curvature(p.alpha, p.k, p.u)[:, None], n_t, axis=1)
    H = np.repeat((-p.alpha * np.cosh(p.z) / p.u)[:, None], n_t, axis=1)
    return SurfaceMesh.from_grid(points, attributes={'K': K, 'H': H}, name=f"hyperbolic_alpha_{p.alpha:g}")


def partner_points(p, t):
    """Euclidean Calabi partner of the hyperbolic surface sampled on the profile x t grid"""
    a1 = p.alpha + 1.0
    ch = np.cosh(t)
    t_integral = cumulative_trapezoid(ch ** p.alpha, t, initial=0.0)
    t_integral = t_integral - np.interp(0.0, t, t_integral)
    slope = np.tanh(p.z)[:, None]
    first = -p.k * slope * ch[None, :] ** a1 / a1
    second = np.broadcast_to(p.k * t_integral[None, :], first.shape)
    third = p.u[:, None] ** a1 * ch[None, :] ** a1 / a1
    return np.stack([first, second, third], axis=-1)


def hyperbolic_partner(p, t_range=(-1.0, 1.0), n_t=33):
    """Mesh of the Euclidean partner; the straight line alpha = -1 goes to grim_reaper"""
    if p.alpha == -1:
        logging.info("alpha = -1 partner is a Grim Reaper; delegating to grim_reaper")
        return grim_reaper(0.0, p.u0, (p.x[0], p.x[-1]), t_range, (len(p.x), n_t))
    t = _t_samples(t_range, n_t)
    return SurfaceMesh.from_grid(partner_points(p, t), name=f"partner_alpha_{p.alpha:g}")


def grim_reaper_points(lam, u0, y, t):
    """Closed-form Grim Reaper (lam = 0) or tilted Grim Reaper on the y x t grid"""
    Y, T = np.meshgrid(y, t, indexing='ij')
    arc = 2.0 * np.arctan(np.tanh(T / 2.0))
    log_cosh = _log_cosh(T)
    if lam == 0:
        return np.stack([-Y / u0, arc, math.log(u0) + log_cosh], axis=-1)
    return np.stack([Y / lam - lam * log_cosh, math.sqrt(1.0 + lam ** 2) * arc, Y + log_cosh], axis=-1)


def grim_reaper(lam, u0, y_range=(-1.0, 1.0), t_range=(-3.0, 3.0), n=33):
    if u0 <= 0:
        raise ProfileError(f"u0 must be positive, got {u0}")
    n_y, n_t = (n, n) if np.isscalar(n) else n
    y = np.linspace(y_range[0], y_range[1], n_y)
    t = _t_samples(t_range, n_t)
    name = 'grim_reaper' if lam == 0 else f"tilted_grim_reaper_{lam:g}"
    return SurfaceMesh.from_grid(grim_reaper_points(lam, u0, y, t), name=name)


def grim_reaper_source(lam, u0, grid):
    """Ruled (-1)-maximal surface (x, m sinh t, m cosh t), m = tanh(z0) x + u0, as a Lorentzian graph"""
    slope = lam / math.sqrt(1.0 + lam ** 2)
    X, Y = grid.mesh()
    m = slope * X + u0
    with np.errstate(invalid='ignore'):
        u = np.where(m > 0, np.sqrt(m ** 2 + Y ** 2), np.nan)
    return GraphSurface(grid, u, Signature.LORENTZIAN, valid=m > 0)


def hyperbolic_pde_residual(p):
    """max |dz/dx + (1+alpha)/u| over the interior of the uniformly stepped samples"""
    idx = np.flatnonzero(p.uniform)
    idx = idx[1:-1]
    if len(idx) == 0:
        return 0.0
    dz = (p.z[idx + 1] - p.z[idx - 1]) / (p.x[idx + 1] - p.x[idx - 1])
    return float(np.max(np.abs(dz + (1.0 + p.alpha) / p.u[idx])))
