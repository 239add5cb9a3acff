"""Characters of affine sl2, N=2, Heisenberg and lattice modules.

A `Character` is prefactor * body, where the prefactor is a monomial
q^h x^j and the body is an arity-1 `MSeries` whose exponents are shifts
relative to the prefactor.  The body's box is therefore relative too.

The Verma-type bodies are PBW products read off from the generator lists:

* affine Verma:  1 / [(q;q) (xq;q) (x^-1;q)]   (E_-n, H_-n for n >= 1, F_-n for n >= 0)
* relaxed Verma: sum_n x^n / (q;q)^3
* N=2 Verma:     (-xq^1/2;q) (-x^-1 q^1/2;q) / (q;q)^2
* chiral Verma:  (-xq^3/2;q) (-x^-1 q^1/2;q) / (q;q)^2, antichiral mirrored

On the affine side x tracks the eigenvalue of H_0/2, so E raises the
x-exponent by 1.  On the N=2 side x tracks J_0 and G^+- shift it by +-1.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Union

from .qseries import (
    Cone, MSeries, Monomial, Rect, RatLike, RectError, lift, pochhammer, product_on, rat, rat_str,
)

AFFINE, N2, HEISENBERG, LATTICE = "affine", "n2", "heisenberg", "lattice"

KIND_SIDE = {
    "AffineVerma": AFFINE,
    "RelaxedVerma": AFFINE,
    "N2Verma": N2,
    "ChiralVerma": N2,
    "AntichiralVerma": N2,
    "FockPlus": HEISENBERG,
    "FockMinus": HEISENBERG,
    "LatticePlus": LATTICE,
    "LatticeMinus": LATTICE,
    "Derived": None,
}


@dataclass(frozen=True)
class LevelContext:
    """Level k with kappa^2 = 2/(k+2) and c = 3k/(k+2)."""

    k: Fraction

    def __post_init__(self):
        object.__setattr__(self, "k", rat(self.k))
        if self.k == -2:
            raise ValueError("critical level k = -2 is excluded")

    @classmethod
    def from_c(cls, c: RatLike) -> "LevelContext":
        c = rat(c)
        if c == 3:
            raise ValueError("c = 3 corresponds to no finite level")
        return cls(2 * c / (3 - c))

    @property
    def kappa_sq(self) -> Fraction:
        return 2 / (self.k + 2)

    @property
    def c(self) -> Fraction:
        return 3 * self.k / (self.k + 2)

    def delta(self, j: RatLike) -> Fraction:
        """Conformal weight j(j+1)/(k+2) of the affine highest weight j."""
        j = rat(j)
        return j * (j + 1) / (self.k + 2)

    def to_json(self) -> dict:
        return {"k": rat_str(self.k)}


CtxLike = Union[LevelContext, RatLike]


def as_ctx(v: CtxLike, central_charge: bool = False) -> LevelContext:
    """LevelContext from a context, a level k, or (central_charge=True) a central charge."""
    if isinstance(v, LevelContext):
        return v
    return LevelContext.from_c(v) if central_charge else LevelContext(v)


def _frac(v: Fraction) -> Fraction:
    return v - (v.numerator // v.denominator)


def block_label(side: Optional[str], h: Fraction, j: Fraction) -> tuple:
    """Canonical representative of (h, j) modulo the block lattice of the side."""
    if side == AFFINE:
        return (_frac(h), _frac(j))
    if side == N2:
        b = j.numerator // j.denominator
        return (_frac(h - Fraction(b, 2)), j - b)
    if side == HEISENBERG:
        return (_frac(h), j)
    return (Fraction(0), Fraction(0))


def same_block(side: str, a: tuple, b: tuple) -> bool:
    """Is a - b in the lattice Z^2 (affine) or {(m + n/2, n)} (N=2)?"""
    dh, dj = rat(a[0]) - rat(b[0]), rat(a[1]) - rat(b[1])
    if side == AFFINE:
        return dh.denominator == 1 and dj.denominator == 1
    if side == N2:
        return dj.denominator == 1 and (dh - dj / 2).denominator == 1
    raise ValueError(f"unknown side {side!r}")


@dataclass(frozen=True)
class Character:
    kind: str
    side: Optional[str]
    prefactor: Monomial
    body: MSeries
    ctx: Optional[LevelContext] = None
    block: tuple = field(default=None)

    def __post_init__(self):
        if self.prefactor.arity != 1 or self.body.arity != 1:
            raise ValueError("characters are series in one x-variable")
        if self.block is None:
            object.__setattr__(self, "block", block_label(self.side, self.prefactor.q, self.prefactor.x[0]))

    @property
    def h(self) -> Fraction:
        return self.prefactor.q

    @property
    def j(self) -> Fraction:
        return self.prefactor.x[0]

    @property
    def rect(self) -> Rect:
        return self.body.rect

    def expand(self) -> MSeries:
        """prefactor * body as one series with absolute exponents."""
        return self.body.shift(self.prefactor)

    def rebase(self, prefactor: Monomial) -> "Character":
        """Same character written with another prefactor (the body absorbs the difference)."""
        if prefactor == self.prefactor:
            return self
        return self.derived(prefactor, self.body.shift(self.prefactor / prefactor))

    def derived(self, prefactor: Monomial, body: MSeries, side: Optional[str] = None,
                keep_kind: bool = False) -> "Character":
        side = self.side if side is None else side
        return Character(self.kind if keep_kind else "Derived", side, prefactor, body, self.ctx)

    def restrict(self, rect: Rect) -> "Character":
        return self.derived(self.prefactor, self.body.restrict(rect), keep_kind=True)

    def scale(self, c: RatLike) -> "Character":
        return self.derived(self.prefactor, self.body.scale(c))

    def to_json(self) -> dict:
        return {
            "kind": self.kind,
            "side": self.side,
            "ctx": self.ctx.to_json() if self.ctx is not None else None,
            "prefactor": self.prefactor.to_json(),
            "body": self.body.to_json(),
            "block": [rat_str(self.block[0]), rat_str(self.block[1])],
        }

    @classmethod
    def from_json(cls, d: dict) -> "Character":
        kind = d.get("kind", "Derived")
        if kind not in KIND_SIDE:
            raise ValueError(f"unknown character kind {kind!r}")
        side = d.get("side", KIND_SIDE[kind])
        ctx = LevelContext(rat(d["ctx"]["k"])) if d.get("ctx") else None
        chr_ = cls(kind, side, Monomial.from_json(d["prefactor"]), MSeries.from_json(d["body"]), ctx)
        if "block" in d and tuple(rat(v) for v in d["block"]) != chr_.block:
            raise ValueError("stored block label does not match the prefactor")
        return chr_


def add_characters(chars: list, signs: list, prefactor: Monomial, kind: str = "Derived") -> Character:
    """Signed sum of characters rebased to a common prefactor."""
    if not chars:
        raise ValueError("empty sum")
    total = None
    for ch, s in zip(chars, signs):
        b = ch.body.shift(ch.prefactor / prefactor).scale(s)
        total = b if total is None else total + b
    first = chars[0]
    return Character(kind, first.side, prefactor, total, first.ctx)


# ---------------------------------------------------------------- q-series


def _partitions(rect: Rect, power: int = 1) -> MSeries:
    """1/(q;q)^power lifted to the arity of rect, x-exponent 0."""
    q_rect = Rect(rect.q_max, (), min(rect.q_min, 0, rect.q_max))
    base = pochhammer(Monomial(1), q_rect, inverted=True)
    acc = base
    for _ in range(power - 1):
        acc = acc * base
    return lift(acc, rect.arity) if rect.arity else acc


def eta(rect: Rect) -> MSeries:
    """q^(1/24) (q;q); the box is rect's shifted by q^(1/24)."""
    q_rect = Rect(rect.q_max, (), min(rect.q_min, 0, rect.q_max))
    s = pochhammer(Monomial(1), q_rect)
    if rect.arity:
        s = lift(s, rect.arity)
        s = MSeries(s.arity, s.den, s._terms, Rect(s.rect.q_max, rect.windows, s.rect.q_min), s.support)
    return s.shift(Monomial(Fraction(1, 24), (Fraction(0),) * rect.arity))


def theta(rect: Rect, form: str = "sum") -> MSeries:
    """Jacobi theta in one variable z: sum_m q^(m^2/2) z^m, or its triple product."""
    if rect.arity != 1:
        raise ValueError("theta is a series in one variable")
    cone = Cone(Fraction(0), (Fraction(0),), (Fraction(1, 2),), (Fraction(1, 2),), (None,), (None,))
    if form == "sum":
        lo, hi = rect.windows[0]
        terms = {}
        m = -(-lo.numerator // lo.denominator)
        while m <= hi:
            e = Fraction(m * m, 2)
            if e <= rect.q_max:
                terms[Monomial(e, (m,))] = 1
            m += 1
        return MSeries.from_terms(terms, Rect(rect.q_max, rect.windows, min(rect.q_min, 0, rect.q_max)), cone)
    if form != "product":
        raise ValueError(f"unknown theta form {form!r}")
    half = Fraction(1, 2)
    return product_on(rect, [
        lambda r: pochhammer(Monomial(half, (1,)), r, coeff=-1),
        lambda r: pochhammer(Monomial(half, (-1,)), r, coeff=-1),
        lambda r: lift(pochhammer(Monomial(1), Rect(r.q_max, (), min(r.q_min, 0, r.q_max))), 1),
    ])


def _q_lift(power: int, inverted: bool = True):
    def make(r: Rect) -> MSeries:
        q_rect = Rect(r.q_max, (), min(r.q_min, 0, r.q_max))
        base = pochhammer(Monomial(1), q_rect, inverted=inverted)
        acc = base
        for _ in range(power - 1):
            acc = acc * base
        return lift(acc, 1)
    return make


def _norm_rect(rect: Rect) -> Rect:
    if rect.arity != 1:
        raise ValueError("character bodies need a one-variable rect")
    return Rect(rect.q_max, rect.windows, min(rect.q_min, 0, rect.q_max))


# ---------------------------------------------------------------- bodies


def affine_verma_body(rect: Rect) -> MSeries:
    rect = _norm_rect(rect)
    return product_on(rect, [
        _q_lift(1),
        lambda r: pochhammer(Monomial(1, (1,)), r, inverted=True),
        lambda r: pochhammer(Monomial(0, (-1,)), r, inverted=True),
    ])


def relaxed_body(rect: Rect) -> MSeries:
    rect = _norm_rect(rect)
    p3 = _partitions(Rect(rect.q_max, (), min(0, rect.q_max)), 3)
    lo, hi = rect.windows[0]
    terms = {}
    n = -(-lo.numerator // lo.denominator)
    while n <= hi:
        for m, c in p3.items():
            terms[Monomial(m.q, (n,))] = c
        n += 1
    zero = Fraction(0)
    cone = Cone(zero, (zero,), (zero,), (zero,), (None,), (None,))
    return MSeries.from_terms(terms, rect, cone)


def n2_verma_body(rect: Rect, chiral: Optional[str] = None) -> MSeries:
    """N=2 Verma body; chiral='chiral' drops G+_{-1/2}, 'antichiral' drops G-_{-1/2}."""
    rect = _norm_rect(rect)
    plus = Fraction(3, 2) if chiral == "chiral" else Fraction(1, 2)
    minus = Fraction(3, 2) if chiral == "antichiral" else Fraction(1, 2)
    return product_on(rect, [
        lambda r: pochhammer(Monomial(plus, (1,)), r, coeff=-1),
        lambda r: pochhammer(Monomial(minus, (-1,)), r, coeff=-1),
        _q_lift(2),
    ])


# ---------------------------------------------------------------- constructors


def verma_affine(ctx: CtxLike, j: RatLike, rect: Rect) -> Character:
    ctx = as_ctx(ctx)
    j = rat(j)
    pre = Monomial(ctx.delta(j), (j,))
    return Character("AffineVerma", AFFINE, pre, affine_verma_body(rect), ctx)


def relaxed_verma(ctx: CtxLike, h: RatLike, j: RatLike, rect: Rect) -> Character:
    ctx = as_ctx(ctx)
    pre = Monomial(rat(h), (rat(j),))
    return Character("RelaxedVerma", AFFINE, pre, relaxed_body(rect), ctx)


def verma_n2(ctx: CtxLike, h: RatLike, j: RatLike, rect: Rect, central_charge: bool = False) -> Character:
    ctx = as_ctx(ctx, central_charge)
    pre = Monomial(rat(h), (rat(j),))
    return Character("N2Verma", N2, pre, n2_verma_body(rect), ctx)


def chiral_verma(ctx: CtxLike, j: RatLike, rect: Rect, side: str = "chiral",
                 central_charge: bool = False) -> Character:
    """Quotient of the N=2 Verma module by G^+_{-1/2} (chiral) or G^-_{-1/2} (antichiral).

    The prefactor is q^{j/2} x^j for chiral and q^{-j/2} x^j for antichiral.
    """
    if side not in ("chiral", "antichiral"):
        raise ValueError(f"unknown chirality {side!r}")
    ctx = as_ctx(ctx, central_charge)
    j = rat(j)
    h = j / 2 if side == "chiral" else -j / 2
    kind = "ChiralVerma" if side == "chiral" else "AntichiralVerma"
    return Character(kind, N2, Monomial(h, (j,)), n2_verma_body(rect, side), ctx)


def fock_char(sign: int, w: RatLike, rect: Rect, kappa_sq: RatLike = 1,
              ctx: Optional[LevelContext] = None) -> Character:
    """Heisenberg Fock module graded by the rational charge w.

    The prefactor is q^{sign * kappa_sq * w^2 / 2} x^w.  With the default
    kappa_sq = 1 this is q^{+-w^2/2} x^w; inside the branching check the
    grading variable is y = x^kappa, so the charge there is w with weight
    +-kappa^2 w^2 / 2.
    """
    if sign not in (1, -1):
        raise ValueError("sign must be +1 or -1")
    w, ksq = rat(w), rat(kappa_sq)
    rect = _norm_rect(rect)
    body = _partitions(rect)
    if not all(lo <= 0 <= hi for lo, hi in rect.windows):
        body = MSeries.zero(rect)
    else:
        body = MSeries(1, body.den, body._terms, Rect(body.rect.q_max, rect.windows, body.rect.q_min),
                       body.support)
    kind = "FockPlus" if sign == 1 else "FockMinus"
    return Character(kind, HEISENBERG, Monomial(sign * ksq * w * w / 2, (w,)), body, ctx)


def lattice_char(sign: int, rect: Rect) -> Character:
    """sum_l q^{+-l^2/2} x^l / (q;q) over integers l in the window."""
    if sign not in (1, -1):
        raise ValueError("sign must be +1 or -1")
    rect = _norm_rect(rect)
    lo, hi = rect.windows[0]
    ls = range(-(-lo.numerator // lo.denominator), hi.numerator // hi.denominator + 1)
    shifts = [Fraction(sign * l * l, 2) for l in ls]
    floor = min([rect.q_min] + shifts)
    p = _partitions(Rect(rect.q_max - floor, (), min(0, rect.q_max - floor)))
    terms = {}
    for l, s in zip(ls, shifts):
        for m, c in p.items():
            if s + m.q <= rect.q_max:
                terms[Monomial(s + m.q, (l,))] = c
    if sign == 1:
        half = Fraction(1, 2)
        cone = Cone(Fraction(0), (Fraction(0),), (half,), (half,), (None,), (None,))
    else:
        cone = None
    kind = "LatticePlus" if sign == 1 else "LatticeMinus"
    return Character(kind, LATTICE, Monomial(0, (0,)),
                     MSeries.from_terms(terms, Rect(rect.q_max, rect.windows, floor), cone))


def normalize(chr_: Character) -> Character:
    """Multiply by q^{-c/24}."""
    if chr_.ctx is None:
        raise ValueError("normalize needs a level context")
    pre = chr_.prefactor * Monomial(-chr_.ctx.c / 24, (0,))
    return chr_.derived(pre, chr_.body)


def rebuild(chr_: Character, rect: Rect) -> Character:
    """The same constructor character on another body box.

    Derived characters cannot be recomputed; they are restricted instead,
    which raises if rect is not inside their box.
    """
    kind, ctx, h, j = chr_.kind, chr_.ctx, chr_.h, chr_.j
    if kind == "AffineVerma":
        return verma_affine(ctx, j, rect)
    if kind == "RelaxedVerma":
        return relaxed_verma(ctx, h, j, rect)
    if kind == "N2Verma":
        return verma_n2(ctx, h, j, rect)
    if kind in ("ChiralVerma", "AntichiralVerma"):
        return chiral_verma(ctx, j, rect, "chiral" if kind == "ChiralVerma" else "antichiral")
    return chr_.restrict(Rect(rect.q_max, rect.windows, chr_.rect.q_min))
