import os

import numpy as np
import pytest

from affine_ifs import kernels
from affine_ifs._accel import HAVE_NUMBA
from affine_ifs.measures import transfer_table

LIMIT = 1e12


@pytest.fixture
def rng():
    return np.random.default_rng(5)


def test_orbit_flavours_agree(bv, rng):
    s = bv.system
    idx = rng.integers(0, 2, 10_000).astype(np.int64)
    x0 = np.array([0.3, 0.3])
    a, bad_a = kernels.chaos_orbit_nb(s.linears, s.offsets, idx, x0, LIMIT)
    b, bad_b = kernels.chaos_orbit_np(s.linears, s.offsets, idx, x0, LIMIT)
    assert bad_a == bad_b == -1
    assert np.allclose(a, b, atol=1e-12)


def test_orbit_flavours_agree_on_divergence(rng):
    lin = np.array([np.eye(2) * 2.0, np.eye(2) * 0.5])
    off = np.zeros((2, 2))
    idx = np.zeros(100, dtype=np.int64)
    _, bad_a = kernels.chaos_orbit_nb(lin, off, idx, np.array([1.0, 0.0]), 1e3)
    _, bad_b = kernels.chaos_orbit_np(lin, off, idx, np.array([1.0, 0.0]), 1e3)
    assert bad_a == bad_b == 9  # 2**10 > 1000


@pytest.mark.parametrize("scheme", ["nearest", "bilinear"])
def test_splat_flavours_agree(bv, rng, scheme):
    dest, w = transfer_table(bv.system, bv.bounds, 24, scheme)
    mass = rng.uniform(size=24 * 24)
    mass /= mass.sum()
    probs = np.array([0.3, 0.7])
    a, ea = kernels.splat_nb(dest, w, probs, mass)
    b, eb = kernels.splat_np(dest, w, probs, mass)
    assert np.allclose(a, b, atol=1e-15)
    assert ea == pytest.approx(eb, abs=1e-15)
    assert a.sum() + ea == pytest.approx(1.0, abs=1e-12)


def test_hausdorff_flavours_agree(rng):
    a, b = rng.normal(size=(400, 2)), rng.normal(size=(300, 2))
    assert kernels.directed_hausdorff_nb(a, b) == pytest.approx(kernels.directed_hausdorff_np(a, b), abs=1e-15)


@pytest.mark.skipif(not HAVE_NUMBA, reason="numba not installed")
def test_numba_is_default():
    assert os.environ.get("AFFINE_IFS_USE_NUMBA", "1") != "1" or kernels.chaos_orbit is kernels.chaos_orbit_nb
