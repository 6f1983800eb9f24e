import numpy as np
import pytest

from affine_ifs import catalog
from affine_ifs.errors import GridMismatch
from affine_ifs.geometry import box
from affine_ifs.ifs import IfsSystem
from affine_ifs.measures import (
    GridMeasure,
    MarkovOperator,
    cell_index,
    escape_free_bounds,
    forward_hull,
    iterate_to_invariance,
    markov_step,
    mix,
    point_mass,
    read_pgm,
    support,
    total_variation,
    uniform_on_bounds,
    uniform_on_polygon,
    write_mass_csv,
    write_pgm,
)
from affine_ifs.sets import hausdorff_distance

B = catalog.DEFAULT_BOUNDS


def test_point_mass_step(bv):
    # m=45 puts cell centres exactly on (0,0) and (0,1)
    mu = point_mass(B, 45, (0, 0))
    nu = markov_step(bv.system, mu)
    c0 = cell_index(B, 45, [(0, 0)])[0]
    c1 = cell_index(B, 45, [(0, 1)])[0]
    flat = nu.mass.ravel()
    assert flat[c0] == pytest.approx(0.5) and flat[c1] == pytest.approx(0.5)


def test_identity_leaves_measure(bv):
    ident = IfsSystem([np.eye(2)], [[0, 0]], [1.0])
    mu = uniform_on_polygon(bv.hint, B, 32)
    assert np.array_equal(markov_step(ident, mu).mass, mu.mass)


def test_uniform_on_triangle_nearly_invariant(bv):
    mu = uniform_on_polygon(bv.hint, B, 256)
    assert total_variation(MarkovOperator(bv.system, B, 256)(mu), mu) <= 0.02


def test_total_variation_examples():
    m = 16
    a, b = point_mass(B, m, (0, 0)), point_mass(B, m, (1, 1))
    assert total_variation(a, a) == 0.0
    assert total_variation(a, b) == 1.0
    left = np.zeros((m, m))
    left[: m // 2] = 1.0 / (m * m / 2)
    assert total_variation(GridMeasure(B, left), uniform_on_bounds(B, m)) == pytest.approx(0.5, abs=1e-15)


def test_grid_mismatch():
    with pytest.raises(GridMismatch):
        total_variation(uniform_on_bounds(B, 8), uniform_on_bounds(B, 16))
    with pytest.raises(GridMismatch):
        MarkovOperator(catalog.bv_triangle().system, B, 8)(uniform_on_bounds(B, 16))


@pytest.mark.parametrize("scheme", ["nearest", "bilinear"])
def test_mass_conservation(bv, scheme):
    op = MarkovOperator(bv.system, B, 40, scheme)
    mu = uniform_on_bounds(B, 40)
    for _ in range(10):
        mu = op(mu)
        assert mu.total == pytest.approx(1.0, abs=1e-12)
    assert mu.escaped > 0  # the default box is not forward invariant


def test_operator_is_linear(bv):
    op = MarkovOperator(bv.system, B, 32)
    mu, nu = point_mass(B, 32, (0.3, 0.3)), uniform_on_polygon(bv.hint, B, 32)
    lhs = op(mix(mu, nu, 0.3))
    rhs = mix(op(mu), op(nu), 0.3)
    assert np.allclose(lhs.mass, rhs.mass, atol=1e-15)
    assert lhs.escaped == pytest.approx(rhs.escaped, abs=1e-15)


def test_tv_contracts(bv):
    op = MarkovOperator(bv.system, B, 32)
    mu, nu = point_mass(B, 32, (0.3, 0.3)), uniform_on_bounds(B, 32)
    assert total_variation(op(mu), op(nu)) <= total_variation(mu, nu) + 1e-15


def test_stability_from_point_mass(bv):
    grid = escape_free_bounds(bv.system, box(*B))
    mu, rep = iterate_to_invariance(bv.system, point_mass(grid, 256, (0.3, 0.3)))
    assert rep.converged
    assert total_variation(mu, uniform_on_polygon(bv.hint, grid, 256)) <= 0.05


def test_final_example_dirac(final):
    mu, _ = iterate_to_invariance(final.system, uniform_on_polygon(box(0, 1, 0, 1), B, 256))
    assert mu.mass_within((1, 0), 0.05) >= 0.99


def test_single_contraction_concentrates():
    s = catalog.single_contraction(0.5, (0.2, 0.4)).system
    mu, rep = iterate_to_invariance(s, uniform_on_bounds(B, 64), tol=1e-12)
    assert rep.converged
    # nearest-cell rounding leaves every cell within about one cell of the target fixed
    assert mu.mass_within((0.2, 0.4), 2 * max(mu.cell_size)) == pytest.approx(1.0, abs=1e-12)
    assert mu.mass.ravel()[cell_index(B, 64, [(0.2, 0.4)])[0]] > 0


def test_tol_one_stops_after_one_step(bv):
    _, rep = iterate_to_invariance(bv.system, uniform_on_bounds(B, 16), tol=1.0)
    assert rep.iterations == 1 and rep.converged


def test_uniform_on_polygon(bv):
    mu = uniform_on_polygon(bv.hint, B, 256)
    assert mu.mass.sum() == pytest.approx(1.0, abs=1e-12)
    c = mu.centers()
    hx, hy = mu.cell_size
    far = bv.hint.edge_distances(c).min(axis=1) < -max(hx, hy)
    assert mu.mass.ravel()[far].sum() == 0.0
    sq = uniform_on_polygon(box(*B), B, 16)
    assert np.allclose(sq.mass, 1 / 256, atol=1e-17)


def test_support_examples(bv):
    dirac = point_mass(B, 32, (0.3, 0.3))
    assert len(support(dirac)) == 1
    assert len(support(uniform_on_bounds(B, 8))) == 64
    mu = uniform_on_polygon(bv.hint, B, 128)
    cell = max(mu.cell_size)
    assert hausdorff_distance(support(mu, 0.01), bv.hint.raster(0.01)) <= 2 * cell


def test_forward_hull(bv):
    hull = forward_hull(bv.system, box(*B))
    assert np.allclose(hull.bbox(), (-1.5, 2.5, -1.5, 2.5), atol=1e-6)
    assert escape_free_bounds(bv.system, box(*B)) == (-1.5, 2.5, -1.5, 2.5)
    assert np.allclose(forward_hull(bv.system, bv.hint).bbox(), (0, 1, 0, 1), atol=1e-12)


def test_pgm_and_csv(tmp_path, bv):
    mu = uniform_on_polygon(bv.hint, (0, 1, 0, 1), 20)
    write_pgm(mu, tmp_path / "m.pgm")
    img = read_pgm(tmp_path / "m.pgm")
    assert img.shape == (20, 20) and img.max() == 255
    # top row is the largest y: only the apex corner at x=0 is lit there
    assert img[0, 0] > 0 and img[0, -1] == 0
    assert img[-1].min() > 0
    write_mass_csv(mu, tmp_path / "m.csv")
    rows = (tmp_path / "m.csv").read_text().splitlines()
    assert rows[0] == "cell_x_index,cell_y_index,mass"
    total = sum(float(r.split(",")[2]) for r in rows[1:])
    assert total == pytest.approx(1.0, abs=1e-12)
