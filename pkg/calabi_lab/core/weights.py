"""
Vertical weights phi(z), their primitives and the dual weight of the correspondence
"""
import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from ..utils.errors import ConfigError, WeightDomainError


class WeightKind(str, Enum):
    MINIMAL = 'minimal'
    LINEAR = 'linear'
    LOG_ALPHA = 'log'
    SCALED_LOG = 'scaledlog'


@dataclass(frozen=True)
class WeightFunction:
    """A weight phi depending only on height, with an explicit additive gauge.

    params holds (c,) for LINEAR, (alpha,) for LOG_ALPHA, (a, b) for SCALED_LOG and is
    empty for MINIMAL. The gauge adds to phi and therefore multiplies e^phi and theta.
    """
    kind: WeightKind
    params: tuple = ()
    gauge: float = 0.0

    @property
    def domain(self):
        """Open interval (lo, hi) of admissible heights"""
        if self.kind in (WeightKind.MINIMAL, WeightKind.LINEAR):
            return (-math.inf, math.inf)
        if self.kind == WeightKind.SCALED_LOG and self.params[1] < 0:
            return (-math.inf, 0.0)
        return (0.0, math.inf)

    @property
    def has_boundary_at_zero(self):
        return self.kind in (WeightKind.LOG_ALPHA, WeightKind.SCALED_LOG)

    def in_domain(self, z):
        z = np.asarray(z, dtype=float)
        lo, hi = self.domain
        return np.isfinite(z) & (z > lo) & (z < hi)

    def require_domain(self, z):
        if not np.all(self.in_domain(z)):
            raise WeightDomainError(f"height {z!r} outside the domain {self.domain} of {self.describe()}")

    def _log_argument(self, z):
        if self.kind == WeightKind.SCALED_LOG:
            return self.params[1] * z
        return z

    def phi(self, z):
        z = np.asarray(z, dtype=float)
        if self.kind == WeightKind.MINIMAL:
            base = np.zeros_like(z)
        elif self.kind == WeightKind.LINEAR:
            base = self.params[0] * z
        else:
            with np.errstate(divide='ignore', invalid='ignore'):
                base = self.params[0] * np.log(self._log_argument(z))
        return _scalar(base + self.gauge)

    def phi_dot(self, z):
        z = np.asarray(z, dtype=float)
        if self.kind == WeightKind.MINIMAL:
            return _scalar(np.zeros_like(z))
        if self.kind == WeightKind.LINEAR:
            return _scalar(np.full_like(z, self.params[0]))
        with np.errstate(divide='ignore', invalid='ignore'):
            return _scalar(self.params[0] / z)

    def phi_ddot(self, z):
        z = np.asarray(z, dtype=float)
        if self.kind in (WeightKind.MINIMAL, WeightKind.LINEAR):
            return _scalar(np.zeros_like(z))
        with np.errstate(divide='ignore', invalid='ignore'):
            return _scalar(-self.params[0] / z ** 2)

    def exp_phi(self, z):
        z = np.asarray(z, dtype=float)
        scale = math.exp(self.gauge)
        if self.kind == WeightKind.MINIMAL:
            base = np.ones_like(z)
        elif self.kind == WeightKind.LINEAR:
            base = np.exp(self.params[0] * z)
        else:
            with np.errstate(divide='ignore', invalid='ignore'):
                base = self._log_argument(z) ** self.params[0]
        return _scalar(scale * base)

    def theta(self, z):
        """Primitive of e^phi"""
        z = np.asarray(z, dtype=float)
        scale = math.exp(self.gauge)
        with np.errstate(divide='ignore', invalid='ignore'):
            if self.kind == WeightKind.MINIMAL:
                base = z.copy()
            elif self.kind == WeightKind.LINEAR:
                c = self.params[0]
                base = np.exp(c * z) / c
            elif self.kind == WeightKind.LOG_ALPHA:
                alpha = self.params[0]
                base = np.log(z) if alpha == -1 else z ** (alpha + 1) / (alpha + 1)
            else:
                a, b = self.params
                base = np.log(b * z) / b if a == -1 else (b * z) ** (a + 1) / (b * (a + 1))
        return _scalar(scale * base)

    def theta_inv(self, w):
        w = np.asarray(w, dtype=float) * math.exp(-self.gauge)
        with np.errstate(divide='ignore', invalid='ignore', over='ignore'):
            if self.kind == WeightKind.MINIMAL:
                z = w.copy()
            elif self.kind == WeightKind.LINEAR:
                c = self.params[0]
                z = np.log(c * w) / c
            elif self.kind == WeightKind.LOG_ALPHA:
                alpha = self.params[0]
                z = np.exp(w) if alpha == -1 else ((alpha + 1) * w) ** (1.0 / (alpha + 1))
            else:
                a, b = self.params
                z = np.exp(b * w) / b if a == -1 else ((a + 1) * b * w) ** (1.0 / (a + 1)) / b
        return _scalar(z)

    def to_spec(self):
        """CLI spec string; the gauge is not part of the spec grammar"""
        if self.kind == WeightKind.MINIMAL:
            return 'minimal'
        return ':'.join([self.kind.value] + [f"{p:g}" for p in self.params])

    def describe(self):
        text = self.to_spec()
        if self.gauge != 0:
            text += f" (gauge {self.gauge:+.6g})"
        return text


def _scalar(values):
    values = np.asarray(values)
    return float(values) if values.ndim == 0 else values


def make_weight(kind, *params, gauge=0.0):
    """Build a weight of the given kind, validating its parameters"""
    kind = WeightKind(kind)
    params = tuple(float(p) for p in params)
    expected = {WeightKind.MINIMAL: 0, WeightKind.LINEAR: 1,
                WeightKind.LOG_ALPHA: 1, WeightKind.SCALED_LOG: 2}[kind]
    if len(params) != expected:
        raise WeightDomainError(f"{kind.value} weight takes {expected} parameter(s), got {len(params)}")
    if not all(math.isfinite(p) for p in params) or not math.isfinite(gauge):
        raise WeightDomainError(f"non-finite parameters for {kind.value} weight: {params}")
    if kind == WeightKind.SCALED_LOG and params[1] == 0:
        raise WeightDomainError("scaledlog weight needs a non-zero scale b")
    if kind == WeightKind.LINEAR and params[0] == 0:
        kind, params = WeightKind.MINIMAL, ()
    return WeightFunction(kind, params, float(gauge))


def evaluate(w, z):
    """Return (phi, phi_dot, theta) at a single height, rejecting out-of-domain input"""
    w.require_domain(z)
    return w.phi(z), w.phi_dot(z), w.theta(z)


def _log_weight(a, b, gauge):
    # a*log(b*z) with b > 0 is a*log(z) shifted by a*log(b)
    if a == 0:
        return make_weight(WeightKind.MINIMAL, gauge=gauge)
    if b > 0:
        return make_weight(WeightKind.LOG_ALPHA, a, gauge=gauge + a * math.log(b))
    return make_weight(WeightKind.SCALED_LOG, a, b, gauge=gauge)


def dual_weight(w):
    """The weight -phi o theta^{-1} carried by the image of the correspondence"""
    g = w.gauge
    if w.kind == WeightKind.MINIMAL:
        return make_weight(WeightKind.MINIMAL, gauge=-g)
    if w.kind == WeightKind.LINEAR:
        return _log_weight(-1.0, w.params[0], 0.0)
    if w.kind == WeightKind.LOG_ALPHA:
        a, b = w.params[0], 1.0
    else:
        a, b = w.params
    if a == -1:
        return make_weight(WeightKind.LINEAR, b * math.exp(-g), gauge=-g)
    if a == 0:
        return make_weight(WeightKind.MINIMAL, gauge=-g)
    return _log_weight(-a / (a + 1), b * (a + 1) * math.exp(-g), -g)


def parse_weight_spec(text):
    """Parse 'minimal', 'linear:<c>', 'log:<alpha>' or 'scaledlog:<a>:<b>'"""
    parts = text.strip().lower().split(':')
    try:
        kind = WeightKind(parts[0])
        params = [float(p) for p in parts[1:]]
        return make_weight(kind, *params)
    except (ValueError, WeightDomainError) as e:
        raise ConfigError(f"malformed weight spec '{text}': {e}") from e
