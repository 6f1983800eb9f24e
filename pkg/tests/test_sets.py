import math

import numpy as np
import pytest
from scipy.stats import chisquare

from affine_ifs import catalog
from affine_ifs.errors import DivergedOrbit, EmptyInput
from affine_ifs.geometry import triangle
from affine_ifs.ifs import IfsSystem
from affine_ifs.sets import (
    OrbitConfig,
    PointSet,
    chaos_game,
    chaos_orbit_points,
    chunk_seed,
    dedup,
    draw_indices,
    estimate_semiattractor,
    hausdorff_distance,
    hutchinson_step,
    read_csv,
    write_csv,
)

SQUARE = np.array([[0, 0], [1, 0], [0, 1], [1, 1]], dtype=float)


def test_hutchinson_vertices(bv):
    S = PointSet(triangle().vertices)
    img = hutchinson_step(bv.system, S)
    # six images; (0,0) and (1/2,1/2) each appear twice
    assert img.as_set() == {(0.0, 0.0), (1.0, 0.0), (0.5, 0.5), (0.0, 1.0)}


def test_hutchinson_identity_and_singleton(bv):
    ident = IfsSystem([np.eye(2)], [[0, 0]], [1.0])
    S = PointSet(SQUARE)
    assert hutchinson_step(ident, S).as_set() == S.as_set()
    assert len(hutchinson_step(bv.system, PointSet([[0.3, 0.3]]))) == 2
    with pytest.raises(EmptyInput):
        hutchinson_step(bv.system, PointSet(np.empty((0, 2))))


def test_hausdorff_examples():
    assert hausdorff_distance([[0, 0]], [[3, 4]]) == 5.0
    assert hausdorff_distance(SQUARE, SQUARE) == 0.0
    b = np.vstack([SQUARE, [[0.5, 0.5]]])
    assert hausdorff_distance(SQUARE, b) == pytest.approx(math.sqrt(2) / 2, abs=1e-15)


def test_hausdorff_methods_agree():
    rng = np.random.default_rng(0)
    a, b = rng.uniform(size=(300, 2)), rng.uniform(size=(500, 2))
    brute = hausdorff_distance(a, b, "brute")
    assert hausdorff_distance(a, b, "kdtree") == pytest.approx(brute, abs=1e-15)


def test_hausdorff_empty():
    with pytest.raises(EmptyInput):
        hausdorff_distance(np.empty((0, 2)), SQUARE)


def test_dedup_keeps_first_in_cell():
    pts = np.array([[0.01, 0.01], [0.02, 0.03], [0.2, 0.2], [0.01, 0.01]])
    assert np.array_equal(dedup(pts, 0.1), pts[[0, 2]])
    assert np.array_equal(dedup(pts, 0.0), pts[:3])


def test_chaos_game_stays_in_triangle(bv):
    cloud = chaos_game(bv.system, (0.3, 0.3), OrbitConfig(samples=20_000))
    assert bv.hint.edge_distances(cloud.points).min() >= -1e-9


def test_chaos_game_constant_contraction():
    s = IfsSystem([np.zeros((2, 2))], [[0.2, 0.4]], [1.0])
    cloud = chaos_game(s, (5.0, 5.0), OrbitConfig(burn_in=3, samples=50))
    assert cloud.as_set() == {(0.2, 0.4)}


def test_chaos_game_is_deterministic(bv):
    cfg = OrbitConfig(samples=5000, rng_seed=42, chunk_count=3)
    a = chaos_orbit_points(bv.system, (0.3, 0.3), cfg)
    b = chaos_orbit_points(bv.system, (0.3, 0.3), cfg)
    assert np.array_equal(a, b)
    assert a.shape == (5000, 2)
    c = chaos_orbit_points(bv.system, (0.3, 0.3), OrbitConfig(samples=5000, rng_seed=43, chunk_count=3))
    assert not np.array_equal(a, c)


def test_chunk_seed():
    assert chunk_seed(7, 0) == 7
    assert chunk_seed(0, 1) == 0x9E3779B97F4A7C15
    assert 0 <= chunk_seed(2**64 - 1, 12345) < 2**64


def test_draw_indices_frequencies():
    probs = np.array([0.2, 0.5, 0.3])
    idx = draw_indices(probs, 60_000, 1)
    counts = np.bincount(idx, minlength=3)
    assert chisquare(counts, 60_000 * probs).pvalue > 1e-4


def test_diverging_orbit():
    s = IfsSystem([np.eye(2) * 3.0], [[1.0, 0.0]], [1.0])
    with pytest.raises(DivergedOrbit):
        chaos_game(s, (1.0, 1.0), OrbitConfig(burn_in=0, samples=100))


def test_semiattractor_examples(bv, final):
    raster = bv.hint.raster(0.01)
    est = estimate_semiattractor(bv.system, [(0.3, 0.3), (5, 5), (-2, 1)], OrbitConfig(samples=20_000), 0.02)
    assert hausdorff_distance(est, raster) <= 0.05
    est = estimate_semiattractor(final.system, [(0, 0), (3, 3)], OrbitConfig(), 0.02)
    assert np.abs(est.points - [1.0, 0.0]).max() <= 1e-3


def test_semiattractor_single_start_is_cloud(bv):
    cfg = OrbitConfig(samples=2000)
    est = estimate_semiattractor(bv.system, [(0.3, 0.3)], cfg, 0.02)
    assert est.as_set() == chaos_game(bv.system, (0.3, 0.3), cfg, 0.005).as_set()


def test_csv_round_trip(tmp_path, bv):
    cloud = chaos_game(bv.system, (0.3, 0.3), OrbitConfig(samples=500))
    path = tmp_path / "c.csv"
    write_csv(cloud, path)
    assert path.read_text().splitlines()[0] == "x,y"
    assert np.array_equal(read_csv(path).points, cloud.points)


def test_uniform_probabilities_assumed_when_missing():
    s = catalog.bv_triangle().system
    bare = IfsSystem(s.linears, s.offsets)
    est = estimate_semiattractor(bare, [(0.3, 0.3)], OrbitConfig(samples=1000), 0.02)
    assert len(est) > 0
