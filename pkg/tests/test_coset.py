from fractions import Fraction

import pytest

from charkit.charlib import (
    AFFINE, N2, Character, LevelContext, block_label, chiral_verma, relaxed_verma, verma_affine, verma_n2,
)
from charkit.coset import (
    equal_characters, flow_equivariance, flow_prefactor, flow_preimage, flowed, omega_minus, omega_plus,
    omega_plus_preimage, spectral_flow, verify_branching,
)
from charkit.qseries import MSeries, Monomial, Rect
from charkit.verify import branching_negative_control, roundtrip

F = Fraction


def point_char(side: str, h, j, k=1) -> Character:
    """The single monomial q^h x^j as a character."""
    body = MSeries.one(Rect.box(6, 3))
    return Character("Derived", side, Monomial(h, (j,)), body, LevelContext(k))


# ------------------------------------------------------------------ spectral flow


def test_flow_zero_is_identity():
    chr_ = relaxed_verma(1, F(1, 5), F(1, 3), Rect.box(4, 3))
    out = spectral_flow(chr_, 0)
    assert out.prefactor == chr_.prefactor
    assert equal_characters(out, chr_, chr_.rect).equal


def test_affine_flow_on_a_monomial():
    h, j = F(1, 7), F(2, 5)
    out = spectral_flow(point_char(AFFINE, h, j), 1)
    assert out.prefactor == Monomial(h + j + F(1, 4), (j + F(1, 2),))


def test_n2_flow_on_a_monomial():
    h, j, k = F(1, 7), F(2, 5), F(1, 3)
    for th in range(-3, 4):
        out = spectral_flow(point_char(N2, h, j, k), th)
        want = Monomial(h + j * th + k * th * th / (2 * (k + 2)), (j + k * th / (k + 2),))
        assert out.prefactor == want


def test_flow_needs_integer_theta():
    with pytest.raises(ValueError):
        spectral_flow(point_char(AFFINE, 0, 0), F(1, 2))


def test_flow_composes_on_relaxed():
    base = relaxed_verma(1, 0, 0, Rect.box(0, 0))
    rect = Rect.box(4, 3)
    one = flowed(base, 1, flow_preimage(rect, 1))
    twice = spectral_flow(one, 1)
    direct = flowed(base, 2, rect)
    assert twice.prefactor == direct.prefactor
    assert equal_characters(direct, twice, rect).equal


@pytest.mark.parametrize("side,base", [
    (AFFINE, verma_affine(F(1, 3), F(1, 2), Rect.box(0, 0))),
    (N2, chiral_verma(1, F(1, 3), Rect.box(0, 0))),
])
def test_flow_composition_law_small(side, base):
    rect = Rect.box(3, 2)
    for a in (-2, 1):
        for b in (-1, 2):
            mid = flowed(base, a, flow_preimage(rect, b))
            two = spectral_flow(mid, b)
            one = flowed(base, a + b, rect)
            assert two.prefactor == one.prefactor
            assert equal_characters(one, two, rect).equal


# ------------------------------------------------------------------ Omega


def test_omega_plus_on_row_zero():
    out = omega_plus(point_char(AFFINE, F(1, 2), F(1, 3)))
    assert out.prefactor == Monomial(F(1, 2) - F(1, 27), (F(2, 9),))
    assert [(m, c) for m, c in out.body.items()] == [(Monomial(0, (0,)), 1)]


def test_omega_box_rule():
    # a window containing 0 keeps q_max; a window away from 0 gains min n^2/2
    a = relaxed_verma(1, 0, 0, Rect.box(5, 3))
    assert omega_plus(a).rect.q_max == 5
    b = relaxed_verma(1, 0, 0, Rect(5, ((2, 3),)))
    assert omega_plus(b).rect.q_max == 7
    # omega_minus loses the largest n^2/2 of the window
    c = verma_n2(1, 0, 0, Rect.box(9, 3))
    assert omega_minus(c).rect.q_max == F(9, 2)
    assert omega_plus_preimage(Rect(5, ((2, 3),))).q_max == 3


def test_omega_box_is_honest():
    # every coefficient claimed after the row shift agrees with a larger computation
    small = omega_plus(relaxed_verma(1, 0, 0, Rect.box(3, 2)))
    big = omega_plus(relaxed_verma(1, 0, 0, Rect.box(8, 2)))
    assert equal_characters(small, big, small.rect).equal


def test_omega_wrong_side():
    with pytest.raises(ValueError):
        omega_plus(verma_n2(1, 0, 0, Rect.box(2, 2)))
    with pytest.raises(ValueError):
        omega_minus(verma_affine(1, 0, Rect.box(2, 2)))


def test_omega_plus_relaxed_is_n2_verma():
    k, h, j = F(1), F(1, 5), F(1, 3)
    rect = Rect.box(6, 3)
    out = omega_plus(relaxed_verma(k, h, j, omega_plus_preimage(rect)))
    want = verma_n2(k, h - j * j / (k + 2), 2 * j / (k + 2), rect)
    assert out.prefactor == want.prefactor
    assert equal_characters(want, out, rect).equal


@pytest.mark.parametrize("j,k", [(0, 1), (F(1, 2), 1), (F(-1, 2), F(1, 3))])
def test_omega_plus_affine_verma_is_chiral(j, k):
    rect = Rect.box(6, 4)
    out = omega_plus(verma_affine(k, j, omega_plus_preimage(rect)))
    want = chiral_verma(k, 2 * F(j) / (k + 2), rect)
    assert out.prefactor == want.prefactor
    assert equal_characters(want, out, rect).equal


def test_omega_block_map():
    k, h, j = F(1, 3), F(1, 5), F(1, 4)
    a = omega_plus(relaxed_verma(k, h, j, Rect.box(2, 2)))
    b = omega_plus(relaxed_verma(k, h + 3, j, Rect.box(2, 2)))
    assert a.block == b.block == block_label(N2, h - j * j / (k + 2), 2 * j / (k + 2))


def test_roundtrips():
    res = roundtrip(5, 3)
    assert res.passed, res.to_json()


# ------------------------------------------------------------------ branching


def test_branching_relaxed_untwisted():
    rep = verify_branching(AFFINE, relaxed_verma(1, 0, 0, Rect.box(0, 0)), 0, Rect.box(4, 3, arity=3))
    assert rep.equal and rep.first_difference is None and rep.term_count > 0


def test_branching_n2_twisted():
    rep = verify_branching(N2, verma_n2(1, 0, 0, Rect.box(0, 0)), 1, Rect.box(4, 3, arity=3))
    assert rep.equal


def test_branching_negative_control():
    res = branching_negative_control(3, 2)
    assert not res.equal and res.first_difference is not None


def test_branching_argument_checks():
    base = relaxed_verma(1, 0, 0, Rect.box(0, 0))
    with pytest.raises(ValueError):
        verify_branching(N2, base, 0, Rect.box(2, 2, arity=3))
    with pytest.raises(ValueError):
        verify_branching(AFFINE, base, 0, Rect.box(2, 2))


# ------------------------------------------------------------------ equivariance


@pytest.mark.parametrize("a,b", [(0, 0), (1, -1), (-2, 1), (2, 2)])
def test_flow_equivariance(a, b):
    base = relaxed_verma(F(1, 3), F(1, 2), F(1, 2), Rect.box(0, 0))
    assert flow_equivariance(base, a, b, F(1, 2), Rect.box(3, 2)).equal


def test_flow_prefactor_rejects_other_sides():
    with pytest.raises(ValueError):
        flow_prefactor("lattice", F(1), F(0), F(0), 1)
