import math

import pytest

from charkit.admissible import AdmissibleLabel, fsst_character, irreducible_n2_char
from charkit.charlib import eta, normalize, relaxed_verma, theta, verma_n2
from charkit.numeric import (
    EvalPoint, eval_series, evaluate, in_region_A, row_window, stabilization,
)
from charkit.qseries import MSeries, Rect

P = EvalPoint(0.08, 1.1)


def test_region_a():
    assert in_region_A(EvalPoint(0.09, 1.0))
    assert not in_region_A(EvalPoint(0.25, 2.1))
    assert not in_region_A(EvalPoint(1.0, 1.0))
    assert not in_region_A(EvalPoint(0, 1.0))
    assert in_region_A(P)


def test_constant():
    one = MSeries.one(Rect.box(3, 2))
    assert evaluate(one, EvalPoint(0.3 + 0.1j, 0.7j)) == 1


def test_eta_against_product():
    q = 0.1
    direct = q ** (1 / 24) * math.prod(1 - q ** n for n in range(1, 51))
    got = evaluate(eta(Rect.box(50, arity=0)), EvalPoint(q))
    assert abs(got - direct) / abs(direct) < 1e-12


def test_theta_forms_numerically():
    rect = Rect.box(20, 8)
    p = EvalPoint(0.1, 1.2)
    a, b = evaluate(theta(rect, "sum"), p), evaluate(theta(rect, "product"), p)
    assert abs(a - b) / abs(a) < 1e-10


def test_principal_branch():
    s = MSeries.polynomial({("1/2", ()): 1}, Rect.box(1, arity=0))
    assert evaluate(s, EvalPoint(-1)) == pytest.approx(1j)


def test_linearity():
    rect = Rect.box(6, 3)
    a = verma_n2(1, 0, 0, rect).body
    b = theta(rect)
    p = EvalPoint(0.2 + 0.05j, 1.1 - 0.2j)
    lhs = evaluate(a + b, p)
    rhs = evaluate(a, p) + evaluate(b, p)
    assert abs(lhs - rhs) / abs(lhs) < 1e-12


def test_character_prefactor_is_applied():
    chr_ = normalize(verma_n2(1, 0, 0, Rect.box(4, 2)))
    p = EvalPoint(0.1, 1.0)
    assert evaluate(chr_, p) == pytest.approx(eval_series(chr_.body, p) * 0.1 ** (-1 / 24))


def test_arity_limit():
    with pytest.raises(ValueError):
        evaluate(MSeries.one(Rect.box(1, 1, arity=2)), P)


def test_n2_verma_stabilizes():
    fam = lambda n: normalize(verma_n2(1, 0, 0, Rect.box(n, row_window(n))))
    rep = stabilization(fam, P, [20, 30, 40])
    assert rep.stabilizes
    assert [r.order for r in rep.rows] == [20, 30, 40]
    assert math.isnan(rep.rows[0].rel_diff)


def test_eta_stabilizes_to_product():
    rep = stabilization(lambda n: eta(Rect.box(n, arity=0)), EvalPoint(0.3), [10, 20, 40])
    direct = 0.3 ** (1 / 24) * math.prod(1 - 0.3 ** n for n in range(1, 200))
    assert rep.stabilizes
    assert abs(rep.final - direct) < 1e-12


def test_relaxed_family_diverges():
    fam = lambda n: relaxed_verma(1, 0, 0, Rect.box(n, 2 * n))
    rep = stabilization(fam, P, [10, 20, 40])
    assert not rep.stabilizes
    assert abs(rep.final) > 1e3


@pytest.mark.parametrize("point", [EvalPoint(0.08, 1.1), EvalPoint(0.05, 0.9), EvalPoint(0.1, 1.0 + 0.2j)])
def test_fsst_and_bgg_agree_numerically(point):
    lab = AdmissibleLabel(3, 1, 1, 0)
    box = Rect.box(14, row_window(14))
    a = evaluate(fsst_character(lab, box), point)
    b = evaluate(normalize(irreducible_n2_char(lab, box)), point)
    assert abs(a - b) / abs(a) < 1e-8


def test_csv_and_json():
    rep = stabilization(lambda n: eta(Rect.box(n, arity=0)), EvalPoint(0.3), [5, 10])
    lines = rep.to_csv().splitlines()
    assert lines[0] == "order,value_re,value_im,rel_diff"
    assert lines[1].startswith("5,") and lines[1].endswith(",")
    d = rep.to_json()
    assert d["rows"][0]["relDiff"] is None and d["point"]["q"] == [0.3, 0.0]
