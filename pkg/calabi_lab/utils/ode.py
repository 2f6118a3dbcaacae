"""
Fixed-step classical Runge-Kutta integration
"""
import numpy as np


def rk4_step(f, t, y, h):
    """Advance y' = f(t, y) by one classical RK4 step of size h"""
    k1 = f(t, y)
    k2 = f(t + 0.5 * h, y + 0.5 * h * k1)
    k3 = f(t + 0.5 * h, y + 0.5 * h * k2)
    k4 = f(t + h, y + h * k3)
    return y + h * (k1 + 2.0 * (k2 + k3) + k4) / 6.0


class Trajectory:
    """Samples produced by integrate_fixed, plus the reason integration ended"""

    def __init__(self, t, y, reason):
        self.t = np.asarray(t, dtype=float)
        self.y = np.asarray(y, dtype=float)
        self.reason = reason

    def __len__(self):
        return len(self.t)

    @property
    def last(self):
        return self.t[-1], self.y[-1]


def integrate_fixed(f, t0, y0, h, t_end, stop=None, accept=None, max_halvings=0):
    """Integrate y' = f(t, y) from t0 towards t_end with steps of size h.

    h may be negative to integrate backwards. ``stop(t, y)`` ends the run before a
    step is taken. ``accept(t, y, t_new, y_new)`` may reject a step; rejected steps are
    retried with the step halved up to ``max_halvings`` times, after which the run
    ends with reason ``'rejected'``. Non-finite states end the run with ``'nonfinite'``.
    """
    if h == 0:
        raise ValueError("step size must be non-zero")
    direction = np.sign(h)
    t = float(t0)
    y = np.array(y0, dtype=float)
    ts = [t]
    ys = [y.copy()]
    reason = 'end'
    while direction * (t_end - t) > 1e-6 * abs(h):
        if stop is not None and stop(t, y):
            reason = 'stopped'
            break
        step = h if direction * (t_end - t) >= abs(h) else t_end - t
        y_new = None
        for _ in range(max_halvings + 1):
            candidate = rk4_step(f, t, y, step)
            if not np.all(np.isfinite(candidate)):
                candidate = None
            elif accept is None or accept(t, y, t + step, candidate):
                y_new = candidate
                break
            step *= 0.5
        if y_new is None:
            reason = 'nonfinite' if candidate is None else 'rejected'
            break
        t = t + step
        y = y_new
        ts.append(t)
        ys.append(y.copy())
    return Trajectory(ts, ys, reason)
