"""Probability measures on a square grid and the Markov operator acting on them.

Mass is transported forward cell by cell: each cell's mass moves, weighted by
``p_i``, to the cell containing the image of its centre under ``f_i``. Mass
landing outside the grid is counted in ``escaped`` and never comes back.
Total variation on the grid is the convergence proxy.
"""

from dataclasses import dataclass, field
from typing import List, Tuple

import numpy as np
from scipy.spatial import ConvexHull

from . import kernels
from .errors import DegeneratePolygon, DivergedOrbit, GridMismatch
from .geometry import ConvexPolygon
from .ifs import IfsSystem
from .sets import PointSet

SUBSAMPLE = 4


@dataclass(frozen=True, eq=False)
class GridMeasure:
    """Masses on an ``m x m`` grid over ``bounds = (xmin, xmax, ymin, ymax)``.

    ``mass[ix, iy]`` belongs to the cell with lower-left corner
    ``(xmin + ix*hx, ymin + iy*hy)``.
    """

    bounds: Tuple[float, float, float, float]
    mass: np.ndarray
    escaped: float = 0.0

    def __post_init__(self):
        b = tuple(float(v) for v in self.bounds)
        if len(b) != 4 or not (b[0] < b[1] and b[2] < b[3]):
            raise ValueError(f"bad bounds {self.bounds!r}")
        mass = np.array(self.mass, dtype=float)
        if mass.ndim != 2 or mass.shape[0] != mass.shape[1] or mass.shape[0] < 2:
            raise ValueError("mass must be an m x m array with m >= 2")
        if (mass < 0).any() or self.escaped < 0:
            raise ValueError("masses must be nonnegative")
        mass.flags.writeable = False
        object.__setattr__(self, "bounds", b)
        object.__setattr__(self, "mass", mass)
        object.__setattr__(self, "escaped", float(self.escaped))

    @property
    def m(self) -> int:
        return self.mass.shape[0]

    @property
    def cell_size(self) -> Tuple[float, float]:
        xmin, xmax, ymin, ymax = self.bounds
        return (xmax - xmin) / self.m, (ymax - ymin) / self.m

    @property
    def total(self) -> float:
        return float(self.mass.sum()) + self.escaped

    def centers(self) -> np.ndarray:
        """Cell centres, shape ``(m*m, 2)``, flat index ``ix*m + iy``."""
        return grid_centers(self.bounds, self.m)

    def with_mass(self, mass, escaped=None) -> "GridMeasure":
        return GridMeasure(self.bounds, mass, self.escaped if escaped is None else escaped)

    def cell_of(self, pts) -> np.ndarray:
        return cell_index(self.bounds, self.m, pts)

    def mass_within(self, point, radius: float) -> float:
        """Mass of cells whose centre is within ``radius`` of ``point``."""
        c = self.centers()
        d = np.hypot(c[:, 0] - point[0], c[:, 1] - point[1])
        return float(self.mass.ravel()[d <= radius].sum())


def grid_centers(bounds, m: int) -> np.ndarray:
    xmin, xmax, ymin, ymax = bounds
    hx = (xmax - xmin) / m
    hy = (ymax - ymin) / m
    gx, gy = np.meshgrid(xmin + hx * (np.arange(m) + 0.5), ymin + hy * (np.arange(m) + 0.5), indexing="ij")
    return np.column_stack([gx.ravel(), gy.ravel()])


def cell_index(bounds, m: int, pts) -> np.ndarray:
    """Flat cell index of each point, ``-1`` for points outside the grid."""
    xmin, xmax, ymin, ymax = bounds
    pts = np.atleast_2d(np.asarray(pts, dtype=float))
    ix = np.floor((pts[:, 0] - xmin) / (xmax - xmin) * m)
    iy = np.floor((pts[:, 1] - ymin) / (ymax - ymin) * m)
    ok = (ix >= 0) & (ix < m) & (iy >= 0) & (iy < m)
    out = np.full(pts.shape[0], -1, dtype=np.int64)
    out[ok] = ix[ok].astype(np.int64) * m + iy[ok].astype(np.int64)
    return out


def point_mass(bounds, m: int, point) -> GridMeasure:
    idx = cell_index(bounds, m, [point])[0]
    if idx < 0:
        raise ValueError(f"point {point!r} lies outside the grid")
    mass = np.zeros(m * m)
    mass[idx] = 1.0
    return GridMeasure(bounds, mass.reshape(m, m))


def uniform_on_bounds(bounds, m: int) -> GridMeasure:
    return GridMeasure(bounds, np.full((m, m), 1.0 / (m * m)))


def mix(mu: GridMeasure, nu: GridMeasure, alpha: float) -> GridMeasure:
    """Convex combination ``alpha*mu + (1-alpha)*nu``."""
    _check_same_grid(mu, nu)
    return mu.with_mass(alpha * mu.mass + (1 - alpha) * nu.mass, alpha * mu.escaped + (1 - alpha) * nu.escaped)


def _check_same_grid(mu: GridMeasure, nu: GridMeasure):
    if mu.m != nu.m or mu.bounds != nu.bounds:
        raise GridMismatch(f"grids differ: {mu.bounds}/{mu.m} vs {nu.bounds}/{nu.m}")


def transfer_table(s: IfsSystem, bounds, m: int, scheme: str = "nearest"):
    """Destination cells and weights for every (map, source cell) pair.

    ``nearest`` sends everything to the cell containing the image of the
    centre. ``bilinear`` splits it between the four cell centres around the
    image, in proportion to the bilinear weights.
    """
    c = grid_centers(bounds, m)
    imgs = np.einsum("iab,nb->ina", s.linears, c) + s.offsets[:, None, :]
    n = s.n_maps
    if scheme == "nearest":
        dest = cell_index(bounds, m, imgs.reshape(-1, 2)).reshape(n, m * m, 1)
        weights = np.ones((n, m * m, 1))
        return dest, weights
    if scheme != "bilinear":
        raise ValueError(f"unknown scheme {scheme!r}")
    xmin, xmax, ymin, ymax = bounds
    u = (imgs[..., 0] - xmin) / (xmax - xmin) * m - 0.5
    v = (imgs[..., 1] - ymin) / (ymax - ymin) * m - 0.5
    i0 = np.floor(u)
    j0 = np.floor(v)
    fu = u - i0
    fv = v - j0
    dest = np.empty((n, m * m, 4), dtype=np.int64)
    weights = np.empty((n, m * m, 4))
    for q, (di, dj) in enumerate(((0, 0), (1, 0), (0, 1), (1, 1))):
        ii = i0 + di
        jj = j0 + dj
        ok = (ii >= 0) & (ii < m) & (jj >= 0) & (jj < m)
        dest[..., q] = np.where(ok, ii * m + jj, -1).astype(np.int64)
        weights[..., q] = (fu if di else 1 - fu) * (fv if dj else 1 - fv)
    return dest, weights


class MarkovOperator:
    """The Markov operator of ``s`` on one grid; the transfer table is built once."""

    def __init__(self, s: IfsSystem, bounds, m: int, scheme: str = "nearest"):
        self.probs = np.ascontiguousarray(s.positive_probs())
        self.bounds = tuple(float(v) for v in bounds)
        self.m = m
        self.dest, self.weights = transfer_table(s, self.bounds, m, scheme)

    def __call__(self, mu: GridMeasure) -> GridMeasure:
        if mu.m != self.m or mu.bounds != self.bounds:
            raise GridMismatch("measure grid does not match the operator grid")
        new, esc = kernels.splat(self.dest, self.weights, self.probs, np.ascontiguousarray(mu.mass.ravel()))
        return GridMeasure(self.bounds, new.reshape(self.m, self.m), mu.escaped + esc)


def markov_step(s: IfsSystem, mu: GridMeasure, scheme: str = "nearest") -> GridMeasure:
    return MarkovOperator(s, mu.bounds, mu.m, scheme)(mu)


def total_variation(mu: GridMeasure, nu: GridMeasure) -> float:
    _check_same_grid(mu, nu)
    return 0.5 * float(np.abs(mu.mass - nu.mass).sum()) + 0.5 * abs(mu.escaped - nu.escaped)


@dataclass
class MarkovReport:
    iterations: int = 0
    residuals: List[float] = field(default_factory=list)
    converged: bool = False

    def to_dict(self):
        return {"iterations": self.iterations, "converged": self.converged, "residuals": list(self.residuals)}


def iterate_to_invariance(
    s: IfsSystem,
    mu0: GridMeasure,
    tol: float = 1e-3,
    max_iters: int = 500,
    scheme: str = "nearest",
):
    """Apply the Markov operator until successive iterates are within ``tol`` in TV.

    The test is ``residual <= tol``, so ``tol=1`` always stops after one step.
    """
    op = MarkovOperator(s, mu0.bounds, mu0.m, scheme)
    report = MarkovReport()
    mu = mu0
    for _ in range(max_iters):
        nxt = op(mu)
        r = total_variation(nxt, mu)
        report.iterations += 1
        report.residuals.append(r)
        mu = nxt
        if r <= tol:
            report.converged = True
            break
    return mu, report


def uniform_on_polygon(P: ConvexPolygon, bounds, m: int) -> GridMeasure:
    """Normalised area measure of ``P`` on the grid.

    Cells with all corners inside get their full area, cells separated from P
    by one of its edge lines get nothing, and the remaining boundary cells
    are estimated from a 4x4 subsample of points.
    """
    if P.area <= 1e-15:
        raise DegeneratePolygon("polygon has (numerically) zero area")
    xmin, xmax, ymin, ymax = bounds
    px0, px1, py0, py1 = P.bbox()
    if px0 < xmin or px1 > xmax or py0 < ymin or py1 > ymax:
        raise ValueError("polygon is not inside the grid bounds")
    hx = (xmax - xmin) / m
    hy = (ymax - ymin) / m
    ix, iy = np.meshgrid(np.arange(m), np.arange(m), indexing="ij")
    x0 = (xmin + hx * ix).ravel()
    y0 = (ymin + hy * iy).ravel()
    corners = np.stack(
        [np.column_stack([x0 + dx * hx, y0 + dy * hy]) for dx in (0, 1) for dy in (0, 1)], axis=1
    )  # (cells, 4, 2)
    dist = P.edge_distances(corners.reshape(-1, 2)).reshape(m * m, 4, -1)
    inside = (dist >= 0).all(axis=2).all(axis=1)
    outside = (dist <= 0).all(axis=1).any(axis=1)
    frac = np.where(inside, 1.0, 0.0)
    boundary = np.flatnonzero(~inside & ~outside)
    if boundary.size:
        off = (np.arange(SUBSAMPLE) + 0.5) / SUBSAMPLE
        sx, sy = np.meshgrid(off, off, indexing="ij")
        sub = np.stack([x0[boundary, None] + hx * sx.ravel(), y0[boundary, None] + hy * sy.ravel()], axis=2)
        hit = P.contains(sub.reshape(-1, 2), tol=0.0).reshape(boundary.size, -1)
        frac[boundary] = hit.mean(axis=1)
    total = frac.sum()
    if total <= 0:
        raise DegeneratePolygon("polygon covers no grid mass; refine the grid")
    return GridMeasure(bounds, (frac / total).reshape(m, m))


def forward_hull(s: IfsSystem, P: ConvexPolygon, tol: float = 1e-9, max_iter: int = 1000, limit: float = 1e6):
    """Smallest hull K containing P with ``f_i(K)`` inside K, by fixed-point iteration.

    Every forward image of P under every word lies in the result, so a grid
    over its bounding box loses no mass to ``escaped`` (up to cell rounding).
    Raises :class:`DivergedOrbit` if the hull grows past ``limit``.
    """
    K = P.vertices
    prev = None
    for _ in range(max_iter):
        pts = np.vstack([K, (np.einsum("iab,nb->ina", s.linears, K) + s.offsets[:, None, :]).reshape(-1, 2)])
        K = pts[ConvexHull(pts).vertices]
        bb = np.concatenate([K.min(axis=0), K.max(axis=0)])
        if np.abs(bb).max() > limit:
            raise DivergedOrbit("forward images of the polygon are unbounded")
        if prev is not None and np.abs(bb - prev).max() < tol:
            break
        prev = bb
    return ConvexPolygon(K)


def escape_free_bounds(s: IfsSystem, P: ConvexPolygon, snap: float = 0.25, **kw):
    """Bounding box of :func:`forward_hull`, widened outward to multiples of ``snap``."""
    xmin, xmax, ymin, ymax = forward_hull(s, P, **kw).bbox()
    eps = 1e-6 * snap

    def lo(v):
        return snap * np.floor(v / snap + eps)

    def hi(v):
        return snap * np.ceil(v / snap - eps)

    return float(lo(xmin)), float(hi(xmax)), float(lo(ymin)), float(hi(ymax))


def support(mu: GridMeasure, threshold: float = 0.0) -> PointSet:
    """Centres of cells with mass above ``threshold * max cell mass``."""
    if threshold < 0:
        raise ValueError("threshold must be >= 0")
    flat = mu.mass.ravel()
    keep = flat > threshold * flat.max()
    return PointSet(mu.centers()[keep])


def write_pgm(mu: GridMeasure, path) -> None:
    """Plain (P2) 8-bit graymap, max-normalised, top row = largest y."""
    img = mu.mass.T[::-1]
    top = img.max()
    vals = np.zeros(img.shape, dtype=int) if top <= 0 else np.rint(255.0 * img / top).astype(int)
    with open(path, "w") as fh:
        fh.write(f"P2\n{mu.m} {mu.m}\n255\n")
        for row in vals:
            fh.write(" ".join(str(v) for v in row))
            fh.write("\n")


def read_pgm(path) -> np.ndarray:
    """Pixel rows of a P2 file, top row first."""
    with open(path) as fh:
        toks = [t for line in fh for t in line.split("#", 1)[0].split()]
    if toks[0] != "P2":
        raise ValueError("not a plain PGM file")
    w, h, _maxval = int(toks[1]), int(toks[2]), int(toks[3])
    return np.array(toks[4:4 + w * h], dtype=int).reshape(h, w)


def write_mass_csv(mu: GridMeasure, path) -> None:
    """Rows ``cell_x_index,cell_y_index,mass`` for every cell with positive mass."""
    ix, iy = np.nonzero(mu.mass)
    with open(path, "w") as fh:
        fh.write("cell_x_index,cell_y_index,mass\n")
        for i, j in zip(ix.tolist(), iy.tolist()):
            fh.write(f"{i},{j},{mu.mass[i, j]:.17g}\n")
