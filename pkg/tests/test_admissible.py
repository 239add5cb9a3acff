from fractions import Fraction

import pytest

import charkit.admissible as adm
from charkit.admissible import (
    AdmissibleLabel, bgg_terms, crosscheck_report, fsst_character, irreducible_affine_char,
    irreducible_n2_char, malikov_terms, phi_double_sum, twisted_chiral_closed_form,
)
from charkit.charlib import chiral_verma, normalize
from charkit.coset import equal_characters, flowed
from charkit.qseries import Monomial, Rect
from oracles import as_dict, lattice_over_euler

F = Fraction
L3110 = AdmissibleLabel(3, 1, 1, 0)


# ------------------------------------------------------------------ labels


def test_label_data():
    lab = AdmissibleLabel(3, 2, 1, 1)
    assert lab.k == F(-1, 2)
    assert lab.ctx.c == -1
    assert lab.j == F(-3, 4)
    assert lab.to_json() == {"p": 3, "pp": 2, "r": 1, "s": 1}


@pytest.mark.parametrize("args", [(1, 1, 1, 0), (4, 2, 1, 0), (3, 1, 0, 0), (3, 1, 3, 0), (3, 2, 1, 2)])
def test_label_validation(args):
    with pytest.raises(ValueError):
        AdmissibleLabel(*args)


# ------------------------------------------------------------------ resolutions


def test_malikov_first_corrections():
    terms = malikov_terms(L3110, 2)
    assert [(t.degree, t.sign, t.n, t.j, t.offset) for t in terms] == [
        (0, 1, 1, 0, 0), (1, -1, 5, 2, 2), (1, -1, -1, -1, 0), (2, 1, -5, -3, 2)]


def test_malikov_zero_cutoff_keeps_offset_zero_terms():
    # M(-1, 0) has j = -1 and Delta_{-1} = Delta_0, so it survives q_max = 0
    assert [t.n for t in malikov_terms(L3110, 0)] == [1, -1]


def test_resolution_signs_alternate():
    for terms in (malikov_terms(L3110, 12), bgg_terms(L3110, 12)):
        assert [t.sign for t in terms] == [(-1) ** t.degree for t in terms]
        assert [t.sign for t in terms][:5] == [1, -1, -1, 1, 1]


def test_malikov_cutoff_includes_exactly_small_offsets():
    terms = malikov_terms(L3110, 10)
    assert all(t.offset <= 10 for t in terms)
    # the next degree lies beyond the cutoff
    assert max(t.degree for t in terms) == 4
    assert all(t.offset > 10 for t in malikov_terms(L3110, 30) if t.degree >= 5)


def test_bgg_first_terms():
    terms = bgg_terms(L3110, 2)
    assert [(t.n, t.flow) for t in terms] == [(1, 0), (5, 2), (-1, -1), (-5, -3)]
    assert terms[0].flow == 0


def test_bgg_offsets_follow_closed_exponent():
    lab = AdmissibleLabel(5, 1, 2, 0)
    e = lambda th: lab.ratio * (th + F(1, 2) + lab.j) ** 2
    for t in bgg_terms(lab, 10):
        assert t.offset == e(t.flow) - e(0)


# ------------------------------------------------------------------ irreducible characters


def test_level_one_vacuum():
    rect = Rect.box(6, 3)
    chr_ = irreducible_affine_char(L3110, rect)
    assert chr_.prefactor == Monomial(0, (0,))
    assert as_dict(chr_.body) == lattice_over_euler(lambda n: n * n, 6, 3)


def test_level_one_doublet():
    rect = Rect.box(6, 3)
    chr_ = irreducible_affine_char(AdmissibleLabel(3, 1, 2, 0), rect)
    assert chr_.prefactor == Monomial(F(1, 4), (F(1, 2),))
    assert as_dict(chr_.body) == lattice_over_euler(lambda n: n * n + n, 6, 3)


def test_n2_c_one_vacuum():
    rect = Rect.box(6, 3)
    chr_ = irreducible_n2_char(L3110, rect)
    assert as_dict(chr_.body) == lattice_over_euler(lambda n: F(3 * n * n, 2), 6, 3)


@pytest.mark.parametrize("label", [(3, 1, 1, 0), (5, 1, 2, 0), (3, 2, 1, 1), (2, 1, 1, 0)])
def test_irreducible_coefficients_are_nonnegative(label):
    lab = AdmissibleLabel(*label)
    rect = Rect.box(6, 4)
    for chr_ in (irreducible_affine_char(lab, rect), irreducible_n2_char(lab, rect)):
        coeffs = dict(chr_.body.items())
        assert coeffs[Monomial(0, (0,))] == 1
        assert all(c > 0 and c.denominator == 1 for c in coeffs.values())


@pytest.mark.parametrize("label", [(3, 1, 1, 0), (5, 1, 2, 0), (3, 2, 1, 0)])
def test_cutoff_is_sound(label):
    lab = AdmissibleLabel(*label)
    rect = Rect.box(6, 4)
    for terms, build in ((malikov_terms, irreducible_affine_char), (bgg_terms, irreducible_n2_char)):
        kept = {(t.n, t.degree) for t in terms(lab, 6)}
        extra = min(t.offset for t in terms(lab, 40) if (t.n, t.degree) not in kept)
        a, b = build(lab, rect), build(lab, rect, cutoff=6 + extra)
        assert equal_characters(a, b, rect).equal


# ------------------------------------------------------------------ Phi


def test_phi_head_pair():
    s = phi_double_sum(L3110, Rect(F(25, 12), ((0, 0),)))
    assert dict(s.items()) == {Monomial(F(1, 12), (0,)): 1, Monomial(F(25, 12), (0,)): -1}


def test_phi_odd_m_sign():
    s = phi_double_sum(L3110, Rect.box(3, 2))
    assert s.coeff(Monomial(F(7, 12), (1,))) == -1
    assert s.coeff(Monomial(F(13, 12), (2,))) == 1


def test_phi_negative_half_leading_term():
    # n = m = -1 in the second family: 1/12 + 1/2 with sign (-1)(-1)(-1)
    rows = Rect(F(1, 2), ((-3, -1),), -1)
    assert phi_double_sum(L3110, rows).is_zero()
    s = phi_double_sum(L3110, rows.with_q(q_max=1))
    assert dict(s.items()) == {Monomial(F(7, 12), (-1,)): -1}


def test_fsst_head():
    chr_ = fsst_character(L3110, Rect.box(4, 3))
    assert chr_.prefactor == Monomial(-F(1, 24), (0,))
    assert chr_.body.coeff(Monomial(0, (0,))) == 1


# ------------------------------------------------------------------ closed form


@pytest.mark.parametrize("theta", [-2, 0, 1])
def test_closed_form_matches_flowed_chiral(theta):
    lab = AdmissibleLabel(5, 1, 2, 0)
    rect = Rect.box(5, 3)
    base = chiral_verma(lab.ctx, lab.n2_j(2 * theta + lab.r), Rect.box(0, 0))
    want = normalize(flowed(base, theta, rect))
    got = twisted_chiral_closed_form(lab, theta, rect)
    assert got.prefactor == want.prefactor
    assert equal_characters(want, got, rect).equal


def test_closed_form_leading_exponent():
    # p'/p (1/2)^2 = 1/12 above the theta/eta^3 prefactor, whose q-part is -1/8
    chr_ = twisted_chiral_closed_form(L3110, 0, Rect.box(2, 2))
    assert chr_.prefactor.q == F(-1, 24)
    assert F(1, 12) - F(1, 8) == chr_.prefactor.q


# ------------------------------------------------------------------ crosscheck


@pytest.mark.parametrize("label", [(3, 1, 1, 0), (5, 1, 2, 0), (3, 2, 1, 1)])
def test_crosscheck_agrees(label):
    rep = crosscheck_report(AdmissibleLabel(*label), Rect.box(8, 4))
    assert rep.equal, rep.to_json()
    assert [c["pair"] for c in rep.to_json()["checks"]] == ["phi-vs-bgg", "phi-vs-coset", "bgg-vs-coset"]


@pytest.mark.parametrize("resolution,drop", [("bgg_terms", -5), ("malikov_terms", 7)])
def test_crosscheck_detects_a_missing_term(monkeypatch, resolution, drop):
    orig = getattr(adm, resolution)
    monkeypatch.setattr(adm, resolution, lambda lab, q: [t for t in orig(lab, q) if t.n != drop])
    rep = crosscheck_report(L3110, Rect.box(8, 4))
    assert not rep.equal
