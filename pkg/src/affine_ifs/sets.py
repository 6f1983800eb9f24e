"""Finite point clouds standing in for compact sets, and their dynamics.

Covers one Hutchinson step, Hausdorff distance, seeded chaos-game sampling
and a finite-start estimator of the semiattractor.
"""

import csv
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.spatial import cKDTree

from . import kernels
from .errors import DivergedOrbit, EmptyInput
from .ifs import IfsSystem

DIVERGENCE_LIMIT = 1e12
# odd 64-bit multiplier (golden-ratio constant) for per-chunk seed derivation
CHUNK_SEED_MULT = 0x9E3779B97F4A7C15
MASK64 = (1 << 64) - 1
BRUTE_FORCE_MAX_PAIRS = 2_000_000


def dedup(points: np.ndarray, resolution: float) -> np.ndarray:
    """Keep the first point seen in each cell of the ``resolution``-lattice.

    The lattice is anchored at the origin. ``resolution == 0`` removes exact
    duplicates only. Input order of the survivors is preserved.
    """
    pts = np.asarray(points, dtype=float).reshape(-1, 2) + 0.0  # folds -0.0 into 0.0
    if pts.shape[0] == 0:
        return pts
    if resolution > 0:
        keys = np.floor(pts / resolution).astype(np.int64)
    else:
        keys = pts
    _, first = np.unique(keys, axis=0, return_index=True)
    return pts[np.sort(first)]


@dataclass(frozen=True, eq=False)
class PointSet:
    points: np.ndarray
    resolution: float = 0.0

    def __post_init__(self):
        if self.resolution < 0:
            raise ValueError("resolution must be >= 0")
        pts = dedup(self.points, self.resolution)
        pts.flags.writeable = False
        object.__setattr__(self, "points", pts)

    def __len__(self):
        return self.points.shape[0]

    def __iter__(self):
        return iter(self.points)

    def as_set(self) -> set:
        return {tuple(p) for p in self.points.tolist()}


@dataclass(frozen=True)
class OrbitConfig:
    burn_in: int = 100
    samples: int = 100_000
    rng_seed: int = 0
    chunk_count: int = 1

    def __post_init__(self):
        if self.samples < 1:
            raise ValueError("samples must be >= 1")
        if self.burn_in < 0:
            raise ValueError("burn_in must be >= 0")
        if self.chunk_count < 1:
            raise ValueError("chunk_count must be >= 1")


def hutchinson_step(s: IfsSystem, S: PointSet) -> PointSet:
    """``F(S) = union of f_i(S)``, deduplicated at S's resolution (map-major order)."""
    if len(S) == 0:
        raise EmptyInput("Hutchinson step of an empty set")
    imgs = np.einsum("iab,nb->ina", s.linears, S.points) + s.offsets[:, None, :]
    return PointSet(imgs.reshape(-1, 2), S.resolution)


def _coords(A) -> np.ndarray:
    return A.points if isinstance(A, PointSet) else np.asarray(A, dtype=float).reshape(-1, 2)


def directed_distance(A, B, method: str = "auto") -> float:
    """``sup_{a in A} dist(a, B)``."""
    a, b = _coords(A), _coords(B)
    if a.shape[0] == 0 or b.shape[0] == 0:
        raise EmptyInput("Hausdorff distance needs nonempty sets")
    if method == "auto":
        method = "brute" if a.shape[0] * b.shape[0] <= BRUTE_FORCE_MAX_PAIRS else "kdtree"
    if method == "brute":
        return float(kernels.directed_hausdorff(np.ascontiguousarray(a), np.ascontiguousarray(b)))
    if method == "kdtree":
        d, _ = cKDTree(b).query(a, k=1)
        return float(d.max())
    raise ValueError(f"unknown method {method!r}")


def hausdorff_distance(A, B, method: str = "auto") -> float:
    return max(directed_distance(A, B, method), directed_distance(B, A, method))


def chunk_seed(seed: int, chunk: int) -> int:
    return (int(seed) ^ ((int(chunk) * CHUNK_SEED_MULT) & MASK64)) & MASK64


def draw_indices(probs: np.ndarray, n: int, seed: int) -> np.ndarray:
    """0-based map indices drawn i.i.d. from ``probs`` with a PCG64 stream."""
    rng = np.random.Generator(np.random.PCG64(seed))
    return rng.choice(len(probs), size=n, p=probs).astype(np.int64)


def _chunk_sizes(total: int, chunks: int):
    base, extra = divmod(total, chunks)
    return [base + (1 if c < extra else 0) for c in range(chunks)]


def chaos_orbit_points(s: IfsSystem, start, cfg: OrbitConfig) -> np.ndarray:
    """Raw (not deduplicated) post-burn-in orbit points, chunks concatenated.

    Chunk ``c`` restarts at ``start`` with its own burn-in and the seed
    ``seed XOR (c * 0x9E3779B97F4A7C15 mod 2**64)``, so the output depends
    only on the configuration, never on scheduling.
    """
    probs = s.positive_probs()
    x0 = np.asarray(start, dtype=float).reshape(2)
    parts = []
    for c, n in enumerate(_chunk_sizes(cfg.samples, cfg.chunk_count)):
        if n == 0:
            continue
        idx = draw_indices(probs, cfg.burn_in + n, chunk_seed(cfg.rng_seed, c))
        out, bad = kernels.chaos_orbit(s.linears, s.offsets, idx, x0, DIVERGENCE_LIMIT)
        if bad >= 0:
            raise DivergedOrbit(
                f"orbit from {x0.tolist()} left |coord| <= {DIVERGENCE_LIMIT:g} at step {bad} of chunk {c}"
            )
        parts.append(out[cfg.burn_in:])
    return np.concatenate(parts)


def chaos_game(s: IfsSystem, start, cfg: OrbitConfig, resolution: float = 0.0) -> PointSet:
    """Random orbit ``x_{n+1} = f_{i_n}(x_n)`` with ``i_n ~ probs``."""
    return PointSet(chaos_orbit_points(s, start, cfg), resolution)


def estimate_semiattractor(
    s: IfsSystem,
    starts: Sequence,
    cfg: OrbitConfig,
    eps: float,
    resolution: float = None,
) -> PointSet:
    """Points of the first chaos-game cloud lying within ``eps`` of every other cloud.

    A finite-start stand-in for the intersection of lower limits over all
    starting points; it can over-approximate the semiattractor. Uniform
    probabilities are used when the system has none. Clouds are deduplicated
    at ``resolution`` (default ``eps / 4``).
    """
    if len(starts) == 0:
        raise ValueError("need at least one start")
    if s.probs is None:
        s = s.uniform()
    if resolution is None:
        resolution = eps / 4
    clouds = [chaos_game(s, x, cfg, resolution) for x in starts]
    keep = clouds[0].points
    for other in clouds[1:]:
        d, _ = cKDTree(other.points).query(keep, k=1, distance_upper_bound=eps * (1 + 1e-12))
        keep = keep[d <= eps]
    return PointSet(keep, resolution)


def write_csv(S: PointSet, path) -> None:
    with open(path, "w", newline="") as fh:
        fh.write("x,y\n")
        for x, y in S.points.tolist():
            fh.write(f"{x:.17g},{y:.17g}\n")


def read_csv(path, resolution: float = 0.0) -> PointSet:
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    pts = np.array([[float(r["x"]), float(r["y"])] for r in rows], dtype=float).reshape(-1, 2)
    return PointSet(pts, resolution)
