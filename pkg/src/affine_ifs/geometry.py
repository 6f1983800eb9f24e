"""Convex polygons in the plane."""

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegeneratePolygon

CONVEX_TOL = 1e-12


def _cross(ax, ay, bx, by):
    return ax * by - ay * bx


@dataclass(frozen=True, eq=False)
class ConvexPolygon:
    """Vertices counter-clockwise.

    Clockwise input is reversed. Consecutive collinear vertices are kept:
    deep fibre images are slivers whose turn cross products fall far below
    any fixed tolerance, and dropping a vertex would destroy their area.
    """

    vertices: np.ndarray

    def __post_init__(self):
        v = np.array(self.vertices, dtype=float).reshape(-1, 2)
        if v.shape[0] < 3:
            raise DegeneratePolygon("a polygon needs at least 3 vertices")
        if not np.isfinite(v).all():
            raise ValueError("vertices must be finite")
        if _signed_area(v) < 0:
            v = v[::-1].copy()
        v.flags.writeable = False
        object.__setattr__(self, "vertices", v)
        if not self.is_convex():
            raise ValueError("vertices do not form a convex polygon")

    def __len__(self):
        return self.vertices.shape[0]

    def is_convex(self, tol: float = CONVEX_TOL) -> bool:
        v = self.vertices
        e = np.roll(v, -1, axis=0) - v
        nxt = np.roll(e, -1, axis=0)
        turns = _cross(e[:, 0], e[:, 1], nxt[:, 0], nxt[:, 1])
        return bool((turns >= -tol).all())

    @property
    def area(self) -> float:
        return abs(_signed_area(self.vertices))

    @property
    def diameter(self) -> float:
        return farthest_pair(self.vertices)[2]

    @property
    def centroid(self) -> np.ndarray:
        """Vertex average (not the area centroid; fine for shrinking fibres)."""
        return self.vertices.mean(axis=0)

    def bbox(self):
        lo = self.vertices.min(axis=0)
        hi = self.vertices.max(axis=0)
        return float(lo[0]), float(hi[0]), float(lo[1]), float(hi[1])

    def edge_distances(self, pts) -> np.ndarray:
        """Signed distance of each point to each edge line, positive inside.

        Shape ``(n_points, n_edges)``; zero-length edges report ``+inf``.
        """
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        a = self.vertices
        e = np.roll(a, -1, axis=0) - a
        length = np.hypot(e[:, 0], e[:, 1])
        rel = pts[:, None, :] - a[None, :, :]
        cr = _cross(e[None, :, 0], e[None, :, 1], rel[..., 0], rel[..., 1])
        with np.errstate(divide="ignore", invalid="ignore"):
            d = np.where(length > 0, cr / np.where(length > 0, length, 1.0), np.inf)
        return d

    def contains(self, pts, tol: float = 1e-9) -> np.ndarray:
        """Boolean mask: points inside or within ``tol`` of the polygon."""
        return (self.edge_distances(pts) >= -tol).all(axis=1)

    def contains_polygon(self, other: "ConvexPolygon", tol: float = 1e-9) -> bool:
        return bool(self.contains(other.vertices, tol).all())

    def raster(self, step: float) -> np.ndarray:
        """Lattice points ``(x0 + i*step, y0 + j*step)`` inside, anchored at the bbox corner."""
        xmin, xmax, ymin, ymax = self.bbox()
        nx = int(math.floor((xmax - xmin) / step + 1e-9)) + 1
        ny = int(math.floor((ymax - ymin) / step + 1e-9)) + 1
        gx, gy = np.meshgrid(xmin + step * np.arange(nx), ymin + step * np.arange(ny), indexing="ij")
        pts = np.column_stack([gx.ravel(), gy.ravel()])
        return pts[self.contains(pts, tol=1e-9)]


def _signed_area(v: np.ndarray) -> float:
    # shoelace on edge vectors from the first vertex; keeps small slivers accurate
    d = v[1:] - v[0]
    terms = d[:-1, 0] * d[1:, 1] - d[:-1, 1] * d[1:, 0]
    return 0.5 * math.fsum(terms.tolist())


def farthest_pair(v: np.ndarray):
    """Brute-force farthest vertex pair: ``(p, q, distance)``."""
    v = np.asarray(v, dtype=float)
    diff = v[:, None, :] - v[None, :, :]
    d = np.hypot(diff[..., 0], diff[..., 1])
    i, j = np.unravel_index(int(np.argmax(d)), d.shape)
    if i > j:
        i, j = j, i
    return v[i], v[j], float(d[i, j])


def triangle() -> ConvexPolygon:
    """The filled triangle with vertices (0,0), (1,0), (0,1)."""
    return ConvexPolygon([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]])


def box(xmin, xmax, ymin, ymax) -> ConvexPolygon:
    return ConvexPolygon([[xmin, ymin], [xmax, ymin], [xmax, ymax], [xmin, ymax]])
