from fractions import Fraction

import numpy as np
import pytest

from affine_ifs.errors import AddressParseError, NotInvariant
from affine_ifs.fibres import (
    Address,
    check_invariant_polygon,
    classify_fibre,
    fibre_sequence,
    parse_address,
    strongly_fibred_report,
)
from affine_ifs.geometry import ConvexPolygon, box, triangle
from affine_ifs.ifs import IfsSystem


def exact_area(word, linears, offsets, verts):
    """Shoelace area of the image polygon in rational arithmetic."""
    A = [[[Fraction(x) for x in row] for row in m] for m in linears]
    b = [[Fraction(x) for x in v] for v in offsets]
    pts = [[Fraction(x) for x in v] for v in verts]
    for c in reversed(word):
        L, o = A[c - 1], b[c - 1]
        pts = [[L[0][0] * x + L[0][1] * y + o[0], L[1][0] * x + L[1][1] * y + o[1]] for x, y in pts]
    n = len(pts)
    twice = sum(pts[i][0] * pts[(i + 1) % n][1] - pts[(i + 1) % n][0] * pts[i][1] for i in range(n))
    return abs(twice) / 2


def test_address_parsing():
    assert parse_address("1:1") == Address((1,), (1,))
    assert parse_address("12:21").letters(6) == (1, 2, 2, 1, 2, 1)
    assert parse_address(":2").letters(3) == (2, 2, 2)
    assert parse_address("121").letters(5) == (1, 2, 1)
    assert str(Address.constant(2)) == "2:2"
    for bad in ("", "1a", "0:1", "1:", "::"):
        with pytest.raises(AddressParseError):
            parse_address(bad)


def test_invariance_check(bv):
    assert check_invariant_polygon(bv.system, triangle())
    assert not check_invariant_polygon(bv.system, box(0, 1, 0, 1))
    ident = IfsSystem([np.eye(2)], [[0, 0]], [1.0])
    assert check_invariant_polygon(ident, box(-3, 2, 0, 7))


def test_not_invariant_raises(bv):
    with pytest.raises(NotInvariant):
        fibre_sequence(bv.system, box(0, 1, 0, 1), Address.constant(1), 3)


def test_constant_one_triangles(bv):
    for f in fibre_sequence(bv.system, bv.hint, Address.constant(1), 30):
        n = f.depth
        expected = np.array([[0, 0], [1, 0], [1 - 2.0**-n, 2.0**-n]])
        got = f.polygon.vertices
        # same vertex set up to cyclic order
        assert all(np.abs(got - v).max(axis=1).min() <= 1e-15 for v in expected)


def test_depth_one_is_image(bv):
    seq = fibre_sequence(bv.system, bv.hint, Address((2,)), 1)
    imgs = bv.hint.vertices @ bv.system.linears[1].T + bv.system.offsets[1]
    assert {tuple(v) for v in seq[0].polygon.vertices.tolist()} == {tuple(v) for v in imgs.tolist()}


def test_area_law_against_exact_oracle(bv):
    rng = np.random.default_rng(1)
    s = bv.system
    for _ in range(10):
        word = tuple(rng.integers(1, 3, 25).tolist())
        seq = fibre_sequence(s, bv.hint, Address(word), 25)
        for f in seq[::6]:
            exact = exact_area(f.word, s.linears.tolist(), s.offsets.tolist(), bv.hint.vertices.tolist())
            assert exact == Fraction(1, 2 ** (f.depth + 1))
            assert f.area == pytest.approx(float(exact), rel=1e-10)


def test_nested_and_shrinking(bv):
    seq = fibre_sequence(bv.system, bv.hint, Address((1, 2), (2, 1, 1)), 30)
    for outer, inner in zip(seq, seq[1:]):
        assert outer.polygon.contains_polygon(inner.polygon, tol=1e-12)
        assert inner.diameter <= outer.diameter + 1e-15


def test_prefix_shift(bv):
    # f_1(fibre of a) approximates the fibre of 1a
    s = bv.system
    a = fibre_sequence(s, bv.hint, Address((), (2,)), 20)[-1].polygon
    b = fibre_sequence(s, bv.hint, Address((1,), (2,)), 21)[-1].polygon
    mapped = a.vertices @ s.linears[0].T + s.offsets[0]
    assert np.abs(np.sort(mapped, axis=0) - np.sort(b.vertices, axis=0)).max() <= 1e-12


def test_point_fibre_diameter_bound(bv):
    seq = fibre_sequence(bv.system, bv.hint, Address.constant(2), 40)
    for f in seq:
        # spectral radius of A2 is 2**-1/2; diameter of the unit triangle is sqrt 2
        assert f.diameter <= 2.0 * 2.0 ** (-(f.depth - 1) / 2) * np.sqrt(2) + 1e-12


def test_classification_witnesses(bv):
    seg = classify_fibre(fibre_sequence(bv.system, bv.hint, Address.constant(1), 40))
    assert seg.kind == "segment"
    ends = sorted(seg.endpoints)
    assert np.allclose(ends, [(0, 0), (1, 0)], atol=1e-6)
    pt = classify_fibre(fibre_sequence(bv.system, bv.hint, Address.constant(2), 40))
    assert pt.kind == "point"
    assert np.allclose(pt.location, (0.25, 0.5), atol=1e-6)


@pytest.mark.parametrize("depth", [40, 44, 48])
def test_classification_stable_in_depth(bv, depth):
    kinds = [classify_fibre(fibre_sequence(bv.system, bv.hint, Address.constant(i), depth)).kind for i in (1, 2)]
    assert kinds == ["segment", "point"]


def test_contraction_fibre_is_fixed_point():
    s = IfsSystem([np.eye(2) * 0.5], [[0.1, 0.2]], [1.0])
    seq = fibre_sequence(s, box(0, 1, 0, 1), Address((1,), (1,)), 30)
    cls = classify_fibre(seq)
    assert cls.kind == "point"
    assert np.allclose(cls.location, (0.2, 0.4), atol=1e-6)


def test_shallow_fibre_undecided(bv):
    assert classify_fibre(fibre_sequence(bv.system, bv.hint, Address((1,)), 1)).kind == "undecided"


def test_finite_address_warns(bv):
    with pytest.warns(UserWarning):
        seq = fibre_sequence(bv.system, bv.hint, Address((1, 2)), 5)
    assert len(seq) == 2


def test_report_bv(bv):
    rep = strongly_fibred_report(bv.system, bv.hint, 2)
    assert rep.strongly_fibred == "strongly-fibred"
    assert rep.witness_word == (2, 2)
    assert np.allclose(rep.singleton, (0.25, 0.5), atol=1e-12)
    assert rep.point_fibred == "falsified"
    assert rep.constant_fibres["1:1"].kind == "segment"
    assert "strongly-fibred" in rep.to_text() and '"witness_address": "22:22"' in rep.to_json()


def test_report_two_contractions():
    s = IfsSystem([np.eye(2) * 0.5] * 2, [[0, 0], [0.5, 0.5]], [0.5, 0.5])
    rep = strongly_fibred_report(s, box(0, 1, 0, 1), 3)
    assert rep.strongly_fibred == "strongly-fibred"
    assert len(rep.witness_word) == 1


def test_report_isometries_inconclusive():
    rot = np.array([[0.0, -1.0], [1.0, 0.0]])
    s = IfsSystem([np.eye(2), rot], [[0, 0], [0, 0]], [0.5, 0.5])
    C = ConvexPolygon([[-1, -1], [1, -1], [1, 1], [-1, 1]])
    rep = strongly_fibred_report(s, C, 3)
    assert rep.strongly_fibred == "inconclusive"
    assert rep.point_fibred == "unknown"
