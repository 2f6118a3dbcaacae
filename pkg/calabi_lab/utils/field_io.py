"""
CSV and JSON persistence for grid fields, profiles and transformed curves
"""
import json
import logging
import os

import numpy as np
import pandas as pd

from ..core.diffgeom import GraphSurface, Grid2D, Signature
from .errors import GridError

FIELD_SCHEMA = 1
FLOAT_FORMAT = '%.17g'


def _write_frame(path, frame):
    frame.to_csv(path, index=False, float_format=FLOAT_FORMAT, na_rep='nan')
    logging.info(f"Wrote {len(frame)} row(s) to {path}")


def save_field_csv(path, surface, values=None):
    """Write x,y,value rows in row-major order (y outer, x inner)"""
    grid = surface.grid
    X, Y = grid.mesh()
    values = surface.u if values is None else np.asarray(values, dtype=float).reshape(grid.shape)
    _write_frame(path, pd.DataFrame({'x': X.ravel(), 'y': Y.ravel(), 'value': values.ravel()}))


def _uniform_axis(values, name):
    axis = np.unique(values)
    if len(axis) < 3:
        raise GridError(f"field CSV has only {len(axis)} distinct {name} value(s)")
    steps = np.diff(axis)
    if np.ptp(steps) > 1e-9 * max(abs(axis).max(), 1.0):
        raise GridError(f"field CSV {name} coordinates are not uniformly spaced")
    return axis


def load_field_csv(path, signature=Signature.EUCLIDEAN):
    """Rebuild a GraphSurface from an x,y,value CSV; rows may come in any order"""
    df = pd.read_csv(path)
    missing = {'x', 'y', 'value'} - set(df.columns)
    if missing:
        raise GridError(f"{path} lacks column(s) {sorted(missing)}")
    xs = _uniform_axis(df['x'].to_numpy(dtype=float), 'x')
    ys = _uniform_axis(df['y'].to_numpy(dtype=float), 'y')
    if len(df) != len(xs) * len(ys):
        raise GridError(f"{path} has {len(df)} rows, a {len(xs)}x{len(ys)} grid needs {len(xs) * len(ys)}")
    grid = Grid2D(float(xs[0]), float(ys[0]), (xs[-1] - xs[0]) / (len(xs) - 1),
                  (ys[-1] - ys[0]) / (len(ys) - 1), len(xs), len(ys))
    df = df.sort_values(['y', 'x'], kind='mergesort')
    logging.info(f"Loaded {grid.nx}x{grid.ny} field from {path}")
    return GraphSurface(grid, df['value'].to_numpy(dtype=float), signature)


def field_to_dict(surface):
    return {
        'schema': FIELD_SCHEMA,
        'grid': surface.grid.to_dict(),
        'signature': surface.signature.value,
        'values': [float(v) if np.isfinite(v) else None for v in surface.u.ravel()],
        'valid': [bool(v) for v in surface.valid.ravel()],
    }


def save_field_json(path, surface):
    with open(path, 'w', encoding='utf-8') as f:
        json.dump(field_to_dict(surface), f, indent=1)
    logging.info(f"Wrote field bundle to {path}")


def load_field_json(path):
    with open(path, 'r', encoding='utf-8') as f:
        data = json.load(f)
    g = data['grid']
    grid = Grid2D(g['x0'], g['y0'], g['dx'], g['dy'], g['nx'], g['ny'])
    values = np.array([np.nan if v is None else v for v in data['values']], dtype=float)
    return GraphSurface(grid, values, data.get('signature', 'euclidean'), valid=data.get('valid'))


def save_profile_csv(path, profile):
    """s,x,u,z; on the Lorentzian side s is the radius"""
    _write_frame(path, pd.DataFrame({'s': profile.s, 'x': profile.x, 'u': profile.u, 'z': profile.z}))


def save_hyperbolic_csv(path, profile):
    k = np.full_like(profile.x, profile.k)
    _write_frame(path, pd.DataFrame({'x': profile.x, 'u': profile.u, 'z': profile.z, 'k': k}))


def save_curve_csv(path, curve):
    _write_frame(path, pd.DataFrame({'lambda': curve.lam, 'theta': curve.theta}))


def load_table(path):
    """Read back any of the CSV outputs as a DataFrame"""
    if not os.path.exists(path):
        raise FileNotFoundError(path)
    return pd.read_csv(path)
