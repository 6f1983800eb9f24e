"""All fourteen acceptance checks at full scale, one PASS/FAIL line each."""

import pytest

from affine_ifs.verify import CHECKS, run_check, verify_all


@pytest.mark.parametrize("cid", sorted(CHECKS))
def test_acceptance(cid, capsys):
    check = run_check(cid, "full")
    with capsys.disabled():
        print("\n" + check.line())
    assert check.passed, check.measured


@pytest.mark.parametrize(
    "cid, name, bad",
    [
        (1, "lip_tail2", 0.7072),
        (3, "critical_p1_k2", 0.5306),
        (6, "point_fibre_2", (0.25, 0.51)),
        (7, "witness_word", (1, 2)),
        (12, "semiattractor", (0.9, 0.0)),
    ],
)
def test_corrupted_constant_fails(cid, name, bad):
    rep = verify_all("quick", overrides={name: bad}, only={cid})
    assert [c.passed for c in rep.checks] == [False]
    assert "[FAIL]" in rep.to_text()
