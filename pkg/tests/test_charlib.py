import json
from fractions import Fraction

import pytest

from charkit.charlib import (
    AFFINE, N2, Character, LevelContext, block_label, chiral_verma, eta, fock_char, lattice_char,
    normalize, relaxed_verma, same_block, theta, verma_affine, verma_n2,
)
from charkit.qseries import Monomial, Rect, equal_on, pochhammer
from oracles import as_dict, partition_counts, pbw_count, triple_product_sum

F = Fraction
BOX = Rect.box(4, 4)


def row(chr_: Character, q) -> dict:
    """{x-shift: coefficient} of the body at relative q-exponent q."""
    return {x: c for (qq, x), c in as_dict(chr_.body).items() if qq == q}


# ------------------------------------------------------------------ level data


def test_level_context():
    ctx = LevelContext(1)
    assert ctx.kappa_sq == F(2, 3)
    assert ctx.c == 1
    assert ctx.delta(F(1, 2)) == F(1, 4)
    assert LevelContext.from_c(1).k == 1
    with pytest.raises(ValueError):
        LevelContext(-2)


# ------------------------------------------------------------------ PBW oracle


@pytest.mark.parametrize("kind,build", [
    ("affine-verma", lambda r: verma_affine(1, 0, r)),
    ("relaxed-verma", lambda r: relaxed_verma(1, 0, 0, r)),
    ("n2-verma", lambda r: verma_n2(1, 0, 0, r)),
    ("chiral-verma", lambda r: chiral_verma(1, 0, r)),
    ("antichiral-verma", lambda r: chiral_verma(1, 0, r, side="antichiral")),
    ("fock", lambda r: fock_char(1, 0, r)),
])
def test_constructors_match_pbw_enumeration(kind, build):
    assert as_dict(build(BOX).body) == pbw_count(kind, 4, 4)


def test_lattice_matches_enumeration():
    p = partition_counts(9)  # V- rows start at -9/2, so depth 4 + 9/2 is needed
    for sign in (1, -1):
        chr_ = lattice_char(sign, Rect(4, ((-3, 3),), -F(9, 2)))
        want = {}
        for l in range(-3, 4):
            for n, c in enumerate(p):
                e = sign * F(l * l, 2) + n
                if e <= 4:
                    want[(e, l)] = c
        assert as_dict(chr_.body) == want


# ------------------------------------------------------------------ eta and theta


def test_theta_sum_small():
    s = theta(Rect.box(2, 2), "sum")
    assert as_dict(s) == triple_product_sum(2, 2)
    assert as_dict(s) == {(0, 0): 1, (F(1, 2), 1): 1, (F(1, 2), -1): 1, (2, 2): 1, (2, -2): 1}


def test_theta_product_equals_sum():
    rect = Rect.box(8, 4)
    assert equal_on(theta(rect, "product"), theta(rect, "sum"), rect).equal


def test_eta_to_one():
    s = eta(Rect.box(1, arity=0))
    assert {m.q: c for m, c in s.items()} == {F(1, 24): 1, F(25, 24): -1}


# ------------------------------------------------------------------ affine Verma


def test_affine_verma_rows():
    chr_ = verma_affine(1, 0, BOX)
    assert row(chr_, 0) == {-m: 1 for m in range(5)}
    assert row(chr_, 1)[0] == 2
    assert chr_.prefactor == Monomial(0, (0,))


def test_affine_verma_prefactor():
    assert verma_affine(1, F(1, 2), BOX).prefactor == Monomial(F(1, 4), (F(1, 2),))


# ------------------------------------------------------------------ relaxed Verma


def test_relaxed_rows():
    chr_ = relaxed_verma(1, 0, 0, BOX)
    assert row(chr_, 0) == {x: 1 for x in range(-4, 5)}
    assert row(chr_, 1) == {x: 3 for x in range(-4, 5)}
    assert chr_.prefactor.is_unit()


# ------------------------------------------------------------------ N=2 Verma


def test_n2_verma_rows():
    v, c = verma_n2(1, 0, 0, BOX), chiral_verma(1, 0, BOX)
    assert row(v, F(1, 2)) == {1: 1, -1: 1}
    assert row(c, F(1, 2)) == {-1: 1}
    assert row(v, 0) == {0: 1} and row(c, 0) == {0: 1}


def test_chiral_prefactor():
    assert chiral_verma(1, F(2, 3), BOX).prefactor == Monomial(F(1, 3), (F(2, 3),))
    assert chiral_verma(1, F(2, 3), BOX, side="antichiral").prefactor == Monomial(-F(1, 3), (F(2, 3),))


def test_n2_verma_is_theta_over_cubed_euler():
    rect = Rect.box(6, 4)
    inv3 = pochhammer(Monomial(1, (0,)), Rect.box(6, 4), inverted=True)
    want = theta(rect, "product") * inv3 * inv3 * inv3
    assert equal_on(verma_n2(1, 0, 0, rect).body, want, rect).equal


# ------------------------------------------------------------------ Fock and lattice


def test_fock_prefactors():
    assert fock_char(1, 0, BOX).prefactor.is_unit()
    assert as_dict(fock_char(1, 0, BOX).body) == {(n, 0): c for n, c in enumerate(partition_counts(4))}
    assert fock_char(1, 1, BOX).prefactor == Monomial(F(1, 2), (1,))
    assert fock_char(-1, 1, BOX).prefactor == Monomial(-F(1, 2), (1,))


def test_lattice_rows():
    plus = lattice_char(1, Rect.box(3, 2))
    minus = lattice_char(-1, Rect(3, ((-2, 2),), -2))
    assert min(q for q, x in as_dict(plus.body) if x == 1) == F(1, 2)
    assert min(q for q, x in as_dict(minus.body) if x == 2) == -2
    zero = {n: c for n, c in enumerate(partition_counts(3))}
    for chr_ in (plus, minus):
        assert {q: c for (q, x), c in as_dict(chr_.body).items() if x == 0} == zero


# ------------------------------------------------------------------ blocks


def test_same_block():
    assert same_block(AFFINE, (0, 0), (3, -2))
    assert same_block(N2, (0, 0), (F(1, 2), 1))
    assert not same_block(N2, (0, 0), (F(1, 2), 0))
    assert not same_block(AFFINE, (0, 0), (F(1, 2), 0))


def test_block_labels_agree_with_same_block():
    pairs = [((F(1, 3), F(1, 5)), (F(4, 3), F(-4, 5))), ((F(1, 3), F(1, 5)), (F(5, 6), F(6, 5)))]
    for a, b in pairs:
        assert (block_label(N2, *a) == block_label(N2, *b)) == same_block(N2, a, b)
    a = relaxed_verma(1, F(1, 3), F(1, 5), BOX)
    b = relaxed_verma(1, F(7, 3), F(-9, 5), BOX)
    assert a.block == b.block


# ------------------------------------------------------------------ normalize


def test_normalize():
    c1 = normalize(verma_n2(1, 0, 0, BOX))
    assert c1.prefactor == Monomial(-F(1, 24), (0,))
    c0 = normalize(verma_affine(0, 0, BOX))
    assert c0.prefactor == Monomial(0, (0,))
    assert LevelContext(F(3, 1) - 2).c == 1


def test_character_json_round_trip():
    chr_ = chiral_verma(F(1, 3), F(1, 2), Rect.box(2, 2))
    d = chr_.to_json()
    assert set(d) >= {"kind", "ctx", "prefactor", "body", "block"}
    text = json.dumps(d)
    assert json.dumps(Character.from_json(json.loads(text)).to_json()) == text
