"""
Triangle meshes of parametrized surfaces, with OBJ and JSON export
"""
import json
import logging
from dataclasses import dataclass, field

import numpy as np

MESH_SCHEMA = 1


@dataclass
class SurfaceMesh:
    """Vertices, triangles, per-vertex normals and named per-vertex attributes (K, H)"""
    vertices: np.ndarray
    triangles: np.ndarray
    normals: np.ndarray = None
    attributes: dict = field(default_factory=dict)
    name: str = 'surface'

    def __post_init__(self):
        self.vertices = np.asarray(self.vertices, dtype=float).reshape(-1, 3)
        self.triangles = np.asarray(self.triangles, dtype=np.int64).reshape(-1, 3)
        if self.triangles.size and (self.triangles.min() < 0 or self.triangles.max() >= len(self.vertices)):
            raise ValueError("triangle index out of range")
        self.attributes = {k: np.asarray(v, dtype=float).reshape(-1) for k, v in self.attributes.items()}
        if self.normals is None:
            self.compute_normals()

    @classmethod
    def from_grid(cls, points, wrap_t=False, attributes=None, name='surface'):
        """Triangulate an (n_s, n_t, 3) sample grid; wrap_t closes the t direction"""
        points = np.asarray(points, dtype=float)
        n_s, n_t = points.shape[:2]
        index = np.arange(n_s * n_t).reshape(n_s, n_t)
        if wrap_t:
            right = np.roll(index, -1, axis=1)
            a, b, c, d = index[:-1], index[1:], right[1:], right[:-1]
        else:
            a, b, c, d = index[:-1, :-1], index[1:, :-1], index[1:, 1:], index[:-1, 1:]
        quads = np.stack([a.ravel(), b.ravel(), c.ravel(), d.ravel()], axis=1)
        triangles = np.concatenate([quads[:, [0, 1, 2]], quads[:, [0, 2, 3]]])
        vertices = points.reshape(-1, 3)
        triangles = _drop_degenerate(vertices, triangles)
        attributes = {k: np.asarray(v).reshape(-1) for k, v in (attributes or {}).items()}
        return cls(vertices, triangles, attributes=attributes, name=name)

    def triangle_areas(self):
        p = self.vertices[self.triangles]
        return 0.5 * np.linalg.norm(np.cross(p[:, 1] - p[:, 0], p[:, 2] - p[:, 0]), axis=1)

    def compute_normals(self):
        """Area-weighted vertex normals"""
        p = self.vertices[self.triangles]
        face = np.cross(p[:, 1] - p[:, 0], p[:, 2] - p[:, 0])
        acc = np.zeros_like(self.vertices)
        for corner in range(3):
            np.add.at(acc, self.triangles[:, corner], face)
        length = np.linalg.norm(acc, axis=1)
        length[length == 0] = 1.0
        self.normals = acc / length[:, None]
        return self


def _drop_degenerate(vertices, triangles):
    p = vertices[triangles]
    area = 0.5 * np.linalg.norm(np.cross(p[:, 1] - p[:, 0], p[:, 2] - p[:, 0]), axis=1)
    extent = np.ptp(vertices, axis=0).max() if len(vertices) else 1.0
    keep = np.isfinite(area) & (area > 1e-14 * max(1.0, extent ** 2))
    dropped = int(np.count_nonzero(~keep))
    if dropped:
        logging.info(f"Dropped {dropped} degenerate triangle(s)")
    return triangles[keep]


def save_obj(path, mesh):
    """Write v/vn/f records with 17 significant digits"""
    with open(path, 'w', encoding='utf-8') as f:
        f.write(f"o {mesh.name}\n")
        for x, y, z in mesh.vertices:
            f.write(f"v {x:.17g} {y:.17g} {z:.17g}\n")
        for x, y, z in mesh.normals:
            f.write(f"vn {x:.17g} {y:.17g} {z:.17g}\n")
        for a, b, c in mesh.triangles + 1:
            f.write(f"f {a}//{a} {b}//{b} {c}//{c}\n")


def mesh_to_dict(mesh):
    return {
        'schema': MESH_SCHEMA,
        'name': mesh.name,
        'vertices': mesh.vertices.tolist(),
        'triangles': mesh.triangles.tolist(),
        'normals': mesh.normals.tolist(),
        'attributes': {k: _json_floats(v) for k, v in sorted(mesh.attributes.items())},
    }


def _json_floats(values):
    return [float(v) if np.isfinite(v) else None for v in values]


def save_mesh_json(path, mesh):
    with open(path, 'w', encoding='utf-8') as f:
        json.dump(mesh_to_dict(mesh), f, indent=1)


def load_mesh_json(path):
    with open(path, 'r', encoding='utf-8') as f:
        data = json.load(f)
    attributes = {k: np.array([np.nan if v is None else v for v in vals], dtype=float)
                  for k, vals in data.get('attributes', {}).items()}
    return SurfaceMesh(np.array(data['vertices']), np.array(data['triangles'], dtype=np.int64),
                       normals=np.array(data['normals']), attributes=attributes,
                       name=data.get('name', 'surface'))
