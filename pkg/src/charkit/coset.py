"""Spectral flow, the coset maps Omega+- on characters, and the branching check.

Spectral flow by theta shears the body, x -> x q^theta, and moves the
prefactor:

* affine: (h, j) -> (h + j theta + k theta^2 / 4, j + k theta / 2)
* N=2:    (h, j) -> (h + j theta + k theta^2 / (2(k+2)), j + k theta / (k+2))

omega_plus sends an affine character with prefactor q^h x^j to the N=2
character with prefactor q^(h - j^2/(k+2)) x^(2j/(k+2)) whose row n (the
coefficient of x^n in the body) is q^(n^2/2) times the old row n.
omega_minus undoes it.  Rows outside the window are unknown, so the box
after a row shift is the part of the shifted window that is still exact:
q_max moves by the minimum of +-n^2/2 over the window.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Optional

from .charlib import (
    AFFINE, N2, Character, LevelContext, fock_char, lattice_char, rebuild,
)
from .qseries import (
    Cone, EqualityReport, MSeries, Monomial, Rect, RatLike, RectError, equal_on, rat, rat_str,
    substitute, tensor,
)


def _need_ctx(chr_: Character) -> LevelContext:
    if chr_.ctx is None:
        raise ValueError("this transform needs a level context")
    return chr_.ctx


def flow_prefactor(side: str, k: Fraction, h: Fraction, j: Fraction, theta: int) -> tuple:
    if side == AFFINE:
        return h + j * theta + k * theta * theta / 4, j + k * theta / 2
    if side == N2:
        return h + j * theta + k * theta * theta / (2 * (k + 2)), j + k * theta / (k + 2)
    raise ValueError(f"spectral flow is defined on the affine and N=2 sides, not {side!r}")


def spectral_flow(chr_: Character, theta: int) -> Character:
    if int(theta) != theta:
        raise ValueError("theta must be an integer")
    theta = int(theta)
    ctx = _need_ctx(chr_)
    h, j = flow_prefactor(chr_.side, ctx.k, chr_.h, chr_.j, theta)
    body = chr_.body.shear(0, theta)
    return chr_.derived(Monomial(h, (j,)), body)


def flow_preimage(rect: Rect, theta: int) -> Rect:
    """Smallest body box whose shear by theta covers rect."""
    lo, hi = rect.windows[0]
    worst = max(-theta * lo, -theta * hi)
    return Rect(rect.q_max + worst, rect.windows, min(rect.q_min, 0, rect.q_max + worst))


def flowed(chr_: Character, theta: int, rect: Rect) -> Character:
    """spectral_flow of a constructor character, rebuilt so the result is exact on rect."""
    base = rebuild(chr_, flow_preimage(rect, theta))
    return spectral_flow(base, theta).restrict(rect)


# ------------------------------------------------------------------ Omega


def _row_shift(body: MSeries, sign: int) -> dict:
    out = {}
    for m, c in body.items():
        n = m.x[0]
        if n.denominator != 1:
            raise ValueError("row shifts need integral x-exponents in the body")
        out[Monomial(m.q + sign * n * n / 2, (n,))] = c
    return out


def _sq_range(lo: Fraction, hi: Fraction) -> tuple:
    """(min, max) of n^2/2 over the real interval [lo, hi]."""
    top = max(lo * lo, hi * hi) / 2
    low = Fraction(0) if lo <= 0 <= hi else min(lo * lo, hi * hi) / 2
    return low, top


def _reanchor(chr_: Character, j: Fraction) -> Character:
    d = chr_.j - j
    if d.denominator != 1:
        raise ValueError(f"x-exponent {chr_.j} is not in the block of {j}")
    if d == 0:
        return chr_
    return chr_.rebase(Monomial(chr_.h, (j,)))


def omega_plus(chr_: Character, j: Optional[RatLike] = None) -> Character:
    """Affine character -> N=2 character; j re-anchors the prefactor inside its block."""
    if chr_.side != AFFINE:
        raise ValueError("omega_plus takes an affine-side character")
    ctx = _need_ctx(chr_)
    k = ctx.k
    chr_ = chr_ if j is None else _reanchor(chr_, rat(j))
    h, j = chr_.h, chr_.j
    pre = Monomial(h - j * j / (k + 2), (2 * j / (k + 2),))
    lo, hi = chr_.rect.windows[0]
    low, _ = _sq_range(lo, hi)
    r = chr_.rect
    rect = Rect(r.q_max + low, r.windows, r.q_min + low)
    cone = _omega_plus_cone(chr_.body.support)
    body = MSeries.from_terms(_row_shift(chr_.body, 1), rect, cone)
    return Character("Derived", N2, pre, body, ctx)


def _omega_plus_cone(s: Optional[Cone]) -> Optional[Cone]:
    """Cone after q -> q + n^2/2, using n^2/2 >= |n|/2 on integers.

    With phi the old slopes, phi(n - c) >= phi(n) - phi(c) (phi is
    sublinear), so the new cone is centred at 0 with slopes raised by 1/2.
    """
    if s is None:
        return None
    u, d, c = s.up[0], s.down[0], s.center[0]
    if u is not None and d is not None and u + d < 0:
        return None
    if c > 0:
        if u is None:
            return None
        phi_c = u * c
    elif c < 0:
        if d is None:
            return None
        phi_c = d * (-c)
    else:
        phi_c = Fraction(0)
    inc = lambda v: None if v is None else v + Fraction(1, 2)
    return Cone(s.q_low - phi_c, (Fraction(0),), (inc(u),), (inc(d),), s.lo, s.hi)


def omega_minus(chr_: Character, j: Optional[RatLike] = None) -> Character:
    """N=2 character -> affine character; j is the affine-side parameter (default from the prefactor)."""
    if chr_.side != N2:
        raise ValueError("omega_minus takes an N=2-side character")
    ctx = _need_ctx(chr_)
    k = ctx.k
    if j is None:
        j = chr_.j * (k + 2) / 2
    j = rat(j)
    chr_ = _reanchor(chr_, 2 * j / (k + 2))
    pre = Monomial(chr_.h + j * j / (k + 2), (j,))
    lo, hi = chr_.rect.windows[0]
    _, top = _sq_range(lo, hi)
    r = chr_.rect
    rect = Rect(r.q_max - top, r.windows, r.q_min - top)
    body = MSeries.from_terms(_row_shift(chr_.body, -1), rect)
    return Character("Derived", AFFINE, pre, body, ctx)


def omega_plus_preimage(rect: Rect) -> Rect:
    """Affine body box that omega_plus maps onto a box covering rect."""
    lo, hi = rect.windows[0]
    low, _ = _sq_range(lo, hi)
    return Rect(rect.q_max - low, rect.windows, min(rect.q_min, 0, rect.q_max - low))


def omega_minus_preimage(rect: Rect) -> Rect:
    lo, hi = rect.windows[0]
    _, top = _sq_range(lo, hi)
    return Rect(rect.q_max + top, rect.windows, min(rect.q_min, 0, rect.q_max + top))


def equal_characters(a: Character, b: Character, rect: Rect) -> EqualityReport:
    """Compare a and b on rect, taken relative to a's prefactor."""
    bb = b.body.shift(b.prefactor / a.prefactor)
    return equal_on(a.body, bb, rect)


def flow_equivariance(base: Character, a: int, b: int, j: RatLike, rect: Rect) -> EqualityReport:
    """omega_plus_{j + ka/2 - b} after affine flow(a)  vs  N=2 flow(a+b) after omega_plus_j.

    base must be a constructor character; it is rebuilt on the boxes each
    composite needs.  rect is relative to the first composite's prefactor.
    """
    ctx = _need_ctx(base)
    k, j = ctx.k, rat(j)
    j2 = j + k * a / 2 - b
    d = base.j - j

    def left(target: Rect) -> Character:
        # re-anchoring moves body exponents by d + b before the row shift
        # so the row-shift box is computed on target's window and then moved back
        post = omega_plus_preimage(Rect(target.q_max, target.windows, min(0, target.q_max)))
        lo, hi = post.windows[0]
        need = Rect(post.q_max, ((lo - d - b, hi - d - b),), post.q_min)
        return omega_plus(flowed(base, a, need), j2)

    def right(target: Rect) -> Character:
        pre = omega_plus_preimage(flow_preimage(target, a + b))
        lo, hi = pre.windows[0]
        src = rebuild(base, Rect(pre.q_max, ((lo - d, hi - d),), min(pre.q_min, 0)))
        return spectral_flow(omega_plus(src, j), a + b)

    tiny = Rect(0, ((Fraction(0), Fraction(0)),))
    off = left(tiny).prefactor / right(tiny).prefactor
    lc = left(rect)
    rc = right(rect.shifted(off))
    return equal_characters(lc, rc, rect)


# ------------------------------------------------------------------ branching


@dataclass(frozen=True)
class BranchingReport:
    side: str
    theta: int
    rect: Rect
    equal: bool
    first_difference: Optional[tuple] = None
    term_count: int = 0

    def to_json(self) -> dict:
        d = {"side": self.side, "theta": self.theta, "rect": self.rect.to_json(),
             "equal": self.equal, "termCount": self.term_count}
        if self.first_difference is not None:
            m, a, b = self.first_difference
            d["firstDifference"] = {"monomial": m.to_json(), "lhs": rat_str(a), "rhs": rat_str(b)}
        return d


def _int_range(lo: Fraction, hi: Fraction) -> range:
    return range(-((-lo.numerator) // lo.denominator), hi.numerator // hi.denominator + 1)


def _terms(side: str, k: Fraction, rect3: Rect) -> list:
    """(n, m, offsets) for every summand whose Fock charges fall inside the y, z windows.

    Offsets are relative to the (0, 0) summand: (x, y, z) shifts of the flowed
    base prefactor and Fock charges.
    """
    (ylo, yhi), (zlo, zhi) = rect3.windows[1], rect3.windows[2]
    half = (k + 2) / 2
    out = []
    if side == AFFINE:
        # y = -n, z = k n / 2 + (k+2) m / 2
        for n in _int_range(-yhi, -ylo):
            a, b = (zlo - k * n / 2) / half, (zhi - k * n / 2) / half
            for m in _int_range(min(a, b), max(a, b)):
                out.append((n, m))
    else:
        # y = k m / 2 - n, z = (k+2) m / 2
        a, b = zlo / half, zhi / half
        for m in _int_range(min(a, b), max(a, b)):
            for n in _int_range(k * m / 2 - yhi, k * m / 2 - ylo):
                out.append((n, m))
    return out


def branching_matrix(side: str, k: Fraction) -> list:
    """x-exponent map from (M, V+, V-) gradings to the reduced variables (x, y, z)."""
    k = rat(k)
    if side == AFFINE:
        return [[1, k / 2, -k / 2], [1, -1, 0], [1, k / 2, -(k + 2) / 2]]
    if side == N2:
        return [[1, k / (k + 2), -k / (k + 2)], [(k + 2) / 2, -1, -k / 2], [(k + 2) / 2, 0, -(k + 2) / 2]]
    raise ValueError(f"unknown side {side!r}")


def _shift1(s: MSeries, m: Monomial) -> MSeries:
    return s.shift(m)


def verify_branching(side: str, base: Character, theta: int, rect3: Rect,
                     fock_signs: tuple = (1, -1)) -> BranchingReport:
    """Check the branching rule for flows of base against the coset image of base^theta.

    LHS = sum_{n,m} base^(theta+n+m) (x) F+ (y) F- (z) with the Fock charges
    of the branching rule; RHS = ch(base^theta (x) V+ (x) V-) after the
    substitution `branching_matrix`.  Both are series in (x, y, z) relative
    to the prefactor of the (n, m) = (0, 0) summand, compared on rect3.
    fock_signs flips the sign of the Fock conformal weights (negative control).
    """
    if base.side != side:
        raise ValueError(f"base lives on the {base.side} side, not {side}")
    if rect3.arity != 3:
        raise ValueError("rect3 needs three windows (x, y, z)")
    ctx = _need_ctx(base)
    k, ksq = ctx.k, ctx.kappa_sq
    theta = int(theta)
    Q = rect3.q_max
    (xlo, xhi) = rect3.windows[0]
    sp, sm = fock_signs
    zero = Fraction(0)

    if side == AFFINE:
        j = base.j
        lam0 = j + k * theta / 2
    else:
        j = base.j * (k + 2) / 2
        lam0 = j + k * theta / 2
    p_h, p_j = flow_prefactor(side, k, base.h, base.j, theta)

    # ---- LHS summands
    plan = []
    for n, m in _terms(side, k, rect3):
        ell = n + m
        fh, fj = flow_prefactor(side, k, base.h, base.j, theta + ell)
        if side == AFFINE:
            lp, lm = lam0 - n, lam0 + k * ell / 2 + m
        else:
            lp, lm = j + k * (theta + m) / 2 - n, lam0 + (k + 2) * m / 2
        oq = fh - p_h + sp * ksq * lp * lp / 2 + sm * ksq * lm * lm / 2
        ox, oy, oz = fj - p_j, lp - lam0, lm - lam0
        win = (xlo - ox, xhi - ox)
        t = theta + ell
        need_q = Q - oq + max(-t * win[0], -t * win[1])
        plan.append((n, m, t, oq, ox, oy, oz, lp, lm, win, need_q))
    if not plan:
        raise RectError("no summands fall inside the y, z windows")
    big_q = max(max(p[10] for p in plan), 0)
    big_w = (min(p[9][0] for p in plan), max(p[9][1] for p in plan))
    big = rebuild(base, Rect(big_q, (big_w,), min(0, big_q)))

    lhs = None
    for n, m, t, oq, ox, oy, oz, lp, lm, win, need_q in plan:
        body = big.body.restrict(Rect(max(need_q, big.body.rect.q_min), (win,), big.body.rect.q_min))
        fbody = body.shear(0, t).shift(Monomial(oq, (ox,)))
        depth = max(Q - fbody.rect.q_min, Fraction(0))
        fy = fock_char(sp, lp, Rect(depth, ((rect3.windows[1][0] - oy, rect3.windows[1][1] - oy),)), ksq)
        fz = fock_char(sm, lm, Rect(depth, ((rect3.windows[2][0] - oz, rect3.windows[2][1] - oz),)), ksq)
        fock = tensor(fy.body.shift(Monomial(zero, (oy,))), fz.body.shift(Monomial(zero, (oz,))))
        term = tensor(fbody, fock)
        lhs = term if lhs is None else lhs + term

    # ---- RHS
    M = branching_matrix(side, k)
    inv = _inverse3(M)
    pre = [[None, None] for _ in range(3)]
    for corner in itertools.product(*rect3.windows):
        a = [sum(inv[i][c] * corner[c] for c in range(3)) for i in range(3)]
        for i in range(3):
            pre[i][0] = a[i] if pre[i][0] is None else min(pre[i][0], a[i])
            pre[i][1] = a[i] if pre[i][1] is None else max(pre[i][1], a[i])
    w1, w2, w3 = (tuple(p) for p in pre)
    l3 = max(abs(w3[0]), abs(w3[1]))
    big_l = l3 * l3 / 2 + 1
    base_t = flowed(base, theta, Rect(Q + big_l, (w1,)))
    b0 = base_t.body.rect.q_min
    vp = lattice_char(1, Rect(Q - b0 + big_l, (w2,)))
    vm = lattice_char(-1, Rect(Q - b0, (w3,)))
    rhs_full = tensor(tensor(base_t.body, vp.body), vm.body)
    rhs = substitute(rhs_full, M, Rect(Q, rect3.windows, min(rhs_full.rect.q_min, Q)))

    q_min = min(lhs.rect.q_min, rhs.rect.q_min, rect3.q_min)
    cmp_rect = Rect(Q, rect3.windows, q_min)
    rep = equal_on(lhs, rhs, cmp_rect)
    return BranchingReport(side, theta, cmp_rect, rep.equal, rep.first_difference, len(plan))


def _inverse3(M: list) -> list:
    from .qseries import _inverse
    return _inverse([[rat(v) for v in row] for row in M])
