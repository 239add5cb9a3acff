"""Admissible levels k = -2 + p/p': resolutions, irreducible characters and the FSST formula.

Labels (p, p', r, s) name the affine weight j = (n-1)/2 - (p/p') m/2 at
(n, m) = (r, s) and the N=2 chiral weight J = (p'/p)(n-1) - m.  Both
resolutions run over the same index set: degree 0 is n = r; degree d > 0
contributes n(d) and n(-d) with

    n(2m) = 2pm + r  (flow pm),    n(2m-1) = 2pm - r  (flow pm - r).

The affine terms are Verma modules M(n, s); the N=2 terms are chiral Verma
modules M+(n, s) spectrally flowed by the listed amount.

Every term starts at some q-exponent above the head's; a term whose offset
exceeds the requested q_max cannot contribute and is dropped.  The offsets
grow quadratically in the degree, which `_collect` checks as it goes.

The Phi double sum is tied to the mock theta function of type A(1,0); that
identification is not used here.  Level k = 0 (p = 2, p' = 1) is accepted
for characters even though the simple affine VOA there is trivial.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from .charlib import (
    N2, Character, LevelContext, add_characters, chiral_verma, n2_verma_body, normalize, verma_affine,
)
from .parallel import pmap
from .coset import equal_characters, flow_prefactor, flowed, omega_plus, omega_plus_preimage
from .qseries import (
    Cone, MSeries, Monomial, Rect, RatLike, geometric_inverse, product_on, rat, rat_str,
)


@dataclass(frozen=True)
class AdmissibleLabel:
    p: int
    pp: int
    r: int
    s: int

    def __post_init__(self):
        if self.p < 2 or self.pp < 1:
            raise ValueError("need p >= 2 and p' >= 1")
        if math.gcd(self.p, self.pp) != 1:
            raise ValueError(f"p={self.p} and p'={self.pp} are not coprime")
        if not 1 <= self.r <= self.p - 1:
            raise ValueError(f"r={self.r} outside 1..{self.p - 1}")
        if not 0 <= self.s <= self.pp - 1:
            raise ValueError(f"s={self.s} outside 0..{self.pp - 1}")

    @property
    def k(self) -> Fraction:
        return Fraction(self.p, self.pp) - 2

    @property
    def ctx(self) -> LevelContext:
        return LevelContext(self.k)

    @property
    def ratio(self) -> Fraction:
        """p'/p = 1/(k+2)."""
        return Fraction(self.pp, self.p)

    def affine_j(self, n: int) -> Fraction:
        return Fraction(n - 1, 2) - Fraction(self.p, self.pp) * Fraction(self.s, 2)

    def n2_j(self, n: int) -> Fraction:
        return self.ratio * (n - 1) - self.s

    @property
    def j(self) -> Fraction:
        """The affine weight of the head, (r-1)/2 - (p/p') s/2."""
        return self.affine_j(self.r)

    def to_json(self) -> dict:
        return {"p": self.p, "pp": self.pp, "r": self.r, "s": self.s}


@dataclass(frozen=True)
class ResolutionTerm:
    degree: int
    sign: int
    n: int
    h: Fraction
    j: Fraction
    flow: int
    offset: Fraction  # lowest q-exponent of the term relative to the head

    def to_json(self) -> dict:
        return {"degree": self.degree, "sign": self.sign, "n": self.n, "h": rat_str(self.h),
                "j": rat_str(self.j), "flow": self.flow, "offset": rat_str(self.offset)}


def _index(label: AdmissibleLabel, d: int) -> tuple:
    """(n, flow) of the term with signed index d; d = 0 is the head."""
    p, r = label.p, label.r
    if d % 2 == 0:
        m = d // 2
        return 2 * p * m + r, p * m
    m = (d + 1) // 2
    return 2 * p * m - r, p * m - r


def _collect(label: AdmissibleLabel, q_max: RatLike, make) -> list:
    """Terms of degree 0, 1, 2, ... whose offset is at most q_max.

    make(d) builds the term of signed index d.  Emission stops at the first
    degree whose two terms both lie beyond q_max while their offsets are
    still growing; the next few degrees are checked to lie beyond as well.
    """
    q_max = rat(q_max)
    head = make(0)
    out = [head] if head.offset <= q_max else []
    prev = (head.offset, head.offset)
    deg = 1
    while True:
        pair = (make(deg), make(-deg))
        offs = (pair[0].offset, pair[1].offset)
        out.extend(t for t in pair if t.offset <= q_max)
        if min(offs) > q_max and offs[0] > prev[0] and offs[1] > prev[1]:
            for extra in range(deg + 1, deg + 4):
                assert make(extra).offset > q_max and make(-extra).offset > q_max, \
                    "resolution offsets are not monotone"
            return out
        prev = offs
        deg += 1
        if deg > 10_000:
            raise RuntimeError("resolution cutoff did not terminate")


def malikov_terms(label: AdmissibleLabel, q_max: RatLike) -> list:
    """Verma terms M(n, s) of the affine resolution with offset Delta_j - Delta_head <= q_max."""
    ctx = label.ctx
    d0 = ctx.delta(label.j)

    def make(d: int) -> ResolutionTerm:
        n, _ = _index(label, d)
        j = label.affine_j(n)
        return ResolutionTerm(abs(d), (-1) ** abs(d), n, ctx.delta(j), j, 0, ctx.delta(j) - d0)

    return _collect(label, q_max, make)


def _closed_exponent(label: AdmissibleLabel, theta: int) -> Fraction:
    """p'/p (theta + 1/2 + j)^2, the leading exponent of the flowed chiral term."""
    return label.ratio * (theta + Fraction(1, 2) + label.j) ** 2


def bgg_terms(label: AdmissibleLabel, q_max: RatLike) -> list:
    """Flowed chiral Verma terms M+(n, s)^flow with offset <= q_max.

    h, j are the highest weight after the flow; the offset is measured by
    the closed-form exponent, which bounds every monomial of the term.
    """
    ctx = label.ctx
    e0 = _closed_exponent(label, 0)

    def make(d: int) -> ResolutionTerm:
        n, theta = _index(label, d)
        jn = label.n2_j(n)
        h, j = flow_prefactor(N2, ctx.k, jn / 2, jn, theta)
        return ResolutionTerm(abs(d), (-1) ** abs(d), n, h, j, theta, _closed_exponent(label, theta) - e0)

    return _collect(label, q_max, make)


# ------------------------------------------------------------ alternating sums


def _rel_rect(rect: Rect, head: Monomial, pre: Monomial) -> Rect:
    """rect, given relative to head, seen relative to the prefactor pre."""
    r = rect.shifted(head / pre)
    return Rect(r.q_max, r.windows, min(r.q_min, 0, r.q_max))


def irreducible_affine_char(label: AdmissibleLabel, rect: Rect, cutoff: Optional[RatLike] = None) -> Character:
    """Alternating sum of Malikov's Verma characters, exact on rect (relative to the head).

    Terms with offset up to cutoff (default rect.q_max) are summed.
    """
    ctx = label.ctx
    head = Monomial(ctx.delta(label.j), (label.j,))
    chars, signs = [], []
    for t in malikov_terms(label, rect.q_max if cutoff is None else cutoff):
        pre = Monomial(t.h, (t.j,))
        chars.append(verma_affine(ctx, t.j, _rel_rect(rect, head, pre)))
        signs.append(t.sign)
    total = add_characters(chars, signs, head)
    return total.derived(head, total.body.restrict(rect))


def n2_head(label: AdmissibleLabel) -> Monomial:
    jn = label.n2_j(label.r)
    return Monomial(jn / 2, (jn,))


def irreducible_n2_char(label: AdmissibleLabel, rect: Rect, cutoff: Optional[RatLike] = None) -> Character:
    """Alternating sum of the flowed chiral Verma characters, exact on rect (relative to the head).

    Terms with offset up to cutoff (default rect.q_max) are summed.
    """
    ctx = label.ctx
    head = n2_head(label)
    chars, signs = [], []
    for t in bgg_terms(label, rect.q_max if cutoff is None else cutoff):
        pre = Monomial(t.h, (t.j,))
        base = chiral_verma(ctx, label.n2_j(t.n), Rect.box(0, 0))
        chars.append(flowed(base, t.flow, _rel_rect(rect, head, pre)))
        signs.append(t.sign)
    total = add_characters(chars, signs, head)
    return total.derived(head, total.body.restrict(rect))


# ------------------------------------------------------------ closed forms


def theta_eta_prefactor(label: AdmissibleLabel) -> Monomial:
    """q^{-p'j^2/p - 1/8} x^{2p'j/p}: the monomial in front of the N=2 Verma body."""
    j = label.j
    return Monomial(-label.ratio * j * j - Fraction(1, 8), (2 * label.ratio * j,))


def _product_in_frame(rect: Rect, frame: Monomial, target: Monomial, makers: list) -> MSeries:
    """Product of makers (built relative to frame) on rect relative to target."""
    inner = rect.shifted(target / frame)
    inner = Rect(inner.q_max, inner.windows, min(inner.q_min, inner.q_max))
    return product_on(inner, makers).shift(frame / target)


def _shifted_maker(make, m: Monomial):
    """Maker for m * make(...), where make builds on boxes relative to its own frame."""
    def build(r: Rect) -> MSeries:
        inv = Monomial(-m.q, tuple(-e for e in m.x))
        rr = r.shifted(inv)
        return make(Rect(rr.q_max, rr.windows, min(rr.q_min, rr.q_max))).shift(m)
    return build


def twisted_chiral_closed_form(label: AdmissibleLabel, theta: int, rect: Rect) -> Character:
    """Normalized character of M+(2 theta + r, s)^theta from the product formula.

    theta_eta_prefactor * (N=2 Verma body) * q^E / (1 + x q^a), a = theta + 1/2,
    with 1/(1 + x q^a) expanded in powers of x q^a for a > 0 and of
    x^-1 q^-a for a < 0.  rect is relative to the flowed highest weight.
    """
    theta = int(theta)
    ctx = label.ctx
    n = 2 * theta + label.r
    jn = label.n2_j(n)
    h, j = flow_prefactor(N2, ctx.k, jn / 2, jn, theta)
    pre = Monomial(h - ctx.c / 24, (j,))
    frame = theta_eta_prefactor(label)
    e = _closed_exponent(label, theta)
    a = theta + Fraction(1, 2)
    if a > 0:
        ratio, lead = Monomial(a, (1,)), Monomial(e, (0,))
    else:
        ratio, lead = Monomial(-a, (-1,)), Monomial(e - a, (-1,))
    makers = [
        lambda r: n2_verma_body(r),
        _shifted_maker(lambda r: geometric_inverse(ratio, r, coeff=-1), lead),
    ]
    body = _product_in_frame(rect, frame, pre, makers)
    return Character("Derived", N2, pre, body.restrict(rect), ctx)


def _family_exponents(label: AdmissibleLabel) -> list:
    """The two families of Phi as (sign, b) with e(n) = p'/p (pn + b)^2 and a(n) = pn + b - j."""
    p, r, j = label.p, label.r, label.j
    half = Fraction(1, 2)
    return [(1, half + j), (-1, p - r + half + j)]


def _phi_floor(label: AdmissibleLabel) -> Fraction:
    """Smallest e(n) over both families; the integer minimum sits next to n = -b/p."""
    best = None
    for _, b in _family_exponents(label):
        c = math.floor(-b / label.p)
        for n in (c, c + 1):
            v = label.ratio * (label.p * n + b) ** 2
            best = v if best is None else min(best, v)
    return best


def phi_double_sum(label: AdmissibleLabel, rect: Rect) -> MSeries:
    """(sum_{n,m >= 0} - sum_{n,m < 0}) (-x)^m phi^{n,m}(q), exact on rect.

    phi^{n,m} = q^{e1(n) + a1(n) m} - q^{e2(n) + a2(n) m}.  On each half a(n) m
    is positive, so every term has q >= e(n) and |m|/2 <= q - floor.
    """
    q_max = rect.q_max
    lo, hi = rect.windows[0]
    terms = {}

    def add(mono: Monomial, c: int):
        v = terms.get(mono, 0) + c
        if v:
            terms[mono] = v
        else:
            terms.pop(mono, None)

    p, ratio, j = label.p, label.ratio, label.j
    for fam_sign, b in _family_exponents(label):
        for half_sign, n, step in ((1, 0, 1), (-1, -1, -1)):
            prev = None
            while True:
                en, an = ratio * (p * n + b) ** 2, p * n + b - j
                if en > q_max:
                    # e(n) is convex, so once it exceeds q_max while growing it stays above
                    if prev is not None and en > prev:
                        break
                else:
                    m, dm = (0, 1) if half_sign == 1 else (-1, -1)
                    while en + an * m <= q_max and (m <= hi if dm == 1 else m >= lo):
                        if lo <= m <= hi:
                            add(Monomial(en + an * m, (m,)), half_sign * fam_sign * (-1) ** (m % 2))
                        m += dm
                prev = en
                n += step
    floor = _phi_floor(label)
    half = Fraction(1, 2)
    cone = Cone(floor, (Fraction(0),), (half,), (half,), (None,), (None,))
    out_rect = Rect(q_max, rect.windows, min(rect.q_min, floor, q_max))
    return MSeries.from_terms(terms, out_rect, cone)


def fsst_character(label: AdmissibleLabel, rect: Rect) -> Character:
    """theta_eta_prefactor * (N=2 Verma body) * Phi, written relative to the normalized head."""
    ctx = label.ctx
    head = n2_head(label)
    pre = Monomial(head.q - ctx.c / 24, head.x)
    frame = theta_eta_prefactor(label)
    makers = [lambda r: n2_verma_body(r), lambda r: phi_double_sum(label, r)]
    body = _product_in_frame(rect, frame, pre, makers)
    return Character("Derived", N2, pre, body.restrict(rect), ctx)


# ------------------------------------------------------------ crosscheck


def coset_n2_char(label: AdmissibleLabel, rect: Rect) -> Character:
    """omega_plus of the irreducible affine character, at the label's j."""
    aff = irreducible_affine_char(label, omega_plus_preimage(rect))
    return omega_plus(aff, label.j).restrict(rect)


@dataclass(frozen=True)
class CrosscheckReport:
    label: AdmissibleLabel
    rect: Rect
    checks: tuple  # (pair name, EqualityReport)

    @property
    def equal(self) -> bool:
        return all(r.equal for _, r in self.checks)

    def to_json(self) -> dict:
        out = [dict(pair=name, **r.to_json()) for name, r in self.checks]
        return {"label": self.label.to_json(), "rect": self.rect.to_json(), "equal": self.equal,
                "checks": out}


def crosscheck_report(label: AdmissibleLabel, rect: Rect) -> CrosscheckReport:
    """Compare the Phi formula, the BGG sum and omega_plus of the Malikov sum on rect.

    All three are normalized and compared relative to the normalized head.
    """
    phi = fsst_character(label, rect)
    bgg = normalize(irreducible_n2_char(label, rect))
    coset = normalize(coset_n2_char(label, rect))
    checks = (
        ("phi-vs-bgg", equal_characters(phi, bgg, rect)),
        ("phi-vs-coset", equal_characters(phi, coset, rect)),
        ("bgg-vs-coset", equal_characters(bgg, coset, rect)),
    )
    return CrosscheckReport(label, rect, checks)


def _crosscheck_job(args) -> CrosscheckReport:
    return crosscheck_report(*args)


def crosscheck_batch(labels: list, rect: Rect, workers: Optional[int] = None) -> list:
    """crosscheck_report for several labels, in parallel processes."""
    return pmap(_crosscheck_job, [(lab, rect) for lab in labels], workers)
