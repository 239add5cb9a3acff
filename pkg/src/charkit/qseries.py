"""Truncated multivariate Laurent series with exact rational data.

A series stores finitely many terms q^a x1^b1 ... xn^bn (0 <= n <= 3) with
rational exponents and coefficients, together with a box (`Rect`) on which
the stored coefficients are the true ones.  Two facts are guaranteed about
the box of every `MSeries`:

* every true term inside the box is stored, with its exact coefficient;
* inside the x-windows there are no true terms with q-exponent below
  ``rect.q_min`` ("complete below").

The second fact is what lets products certify their own box.  Series may
also carry a `Cone`, a linear lower bound on the support of the *whole*
series (not just the stored part).  Products of series whose x-support is
unbounded need it to decide which x-window is safe; see `mul`.

Internally exponents are stored as integer tuples scaled by a common
denominator, and integral coefficients are kept as plain ints.
"""
from __future__ import annotations

import math
import re
from bisect import bisect_right
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Iterator, Optional, Sequence, Union

RatLike = Union[int, str, Fraction]

_RAT_RE = re.compile(r"^\s*([+-]?\d+)(?:\s*/\s*(\d+))?\s*$")


class SeriesError(ValueError):
    """Base class for series errors."""


class ArityError(SeriesError):
    pass


class EmptyRectError(SeriesError):
    pass


class RectError(SeriesError):
    """A request needs coefficients outside the box where they are known."""


def rat(v: RatLike) -> Fraction:
    """Coerce to Fraction.  Floats are refused: they are not exact."""
    if isinstance(v, Fraction):
        return v
    if isinstance(v, bool):
        raise TypeError("bool is not a rational")
    if isinstance(v, int):
        return Fraction(v)
    if isinstance(v, str):
        m = _RAT_RE.match(v)
        if not m:
            raise ValueError(f"not an exact rational: {v!r}")
        num = int(m.group(1))
        den = int(m.group(2)) if m.group(2) is not None else 1
        if den == 0:
            raise ValueError(f"zero denominator: {v!r}")
        return Fraction(num, den)
    raise TypeError(f"not an exact rational: {v!r}")


def rat_str(v: Fraction) -> str:
    return str(v.numerator) if v.denominator == 1 else f"{v.numerator}/{v.denominator}"


def _norm_coeff(c):
    if isinstance(c, Fraction) and c.denominator == 1:
        return c.numerator
    return c


def _lcm(a: int, b: int) -> int:
    return a * b // math.gcd(a, b)


def _ceil(v: Fraction) -> int:
    return -((-v.numerator) // v.denominator)


def _floor(v: Fraction) -> int:
    return v.numerator // v.denominator


# ---------------------------------------------------------------- monomials


@dataclass(frozen=True)
class Monomial:
    q: Fraction
    x: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "q", rat(self.q))
        object.__setattr__(self, "x", tuple(rat(e) for e in self.x))

    @classmethod
    def unit(cls, arity: int = 0) -> "Monomial":
        return cls(Fraction(0), (Fraction(0),) * arity)

    @property
    def arity(self) -> int:
        return len(self.x)

    @property
    def key(self) -> tuple:
        return (self.q,) + self.x

    def __mul__(self, other: "Monomial") -> "Monomial":
        if other.arity != self.arity:
            raise ArityError(f"arity {self.arity} vs {other.arity}")
        return Monomial(self.q + other.q, tuple(a + b for a, b in zip(self.x, other.x)))

    def __truediv__(self, other: "Monomial") -> "Monomial":
        return self * other.inverse()

    def __pow__(self, n: int) -> "Monomial":
        return Monomial(self.q * n, tuple(e * n for e in self.x))

    def inverse(self) -> "Monomial":
        return Monomial(-self.q, tuple(-e for e in self.x))

    def is_unit(self) -> bool:
        return self.q == 0 and all(e == 0 for e in self.x)

    def __lt__(self, other: "Monomial") -> bool:
        return self.key < other.key

    def __str__(self) -> str:
        parts = [f"q^{rat_str(self.q)}"]
        names = ("x", "y", "z")
        for i, e in enumerate(self.x):
            parts.append(f"{names[i]}^{rat_str(e)}")
        return "*".join(parts)

    def to_json(self) -> dict:
        return {"q": rat_str(self.q), "x": [rat_str(e) for e in self.x]}

    @classmethod
    def from_json(cls, d: dict) -> "Monomial":
        return cls(rat(d["q"]), tuple(rat(e) for e in d.get("x", [])))


# --------------------------------------------------------------------- rects


@dataclass(frozen=True)
class Rect:
    """Closed box q_min <= q <= q_max, lo_i <= x_i <= hi_i."""

    q_max: Fraction
    windows: tuple = ()
    q_min: Fraction = Fraction(0)

    def __post_init__(self):
        object.__setattr__(self, "q_max", rat(self.q_max))
        object.__setattr__(self, "q_min", rat(self.q_min))
        ws = tuple((rat(lo), rat(hi)) for lo, hi in self.windows)
        object.__setattr__(self, "windows", ws)
        if self.q_min > self.q_max:
            raise EmptyRectError(f"q_min {self.q_min} > q_max {self.q_max}")
        for lo, hi in ws:
            if lo > hi:
                raise EmptyRectError(f"empty window [{lo}, {hi}]")
        if len(ws) > 3:
            raise ArityError("at most 3 x-variables")

    @classmethod
    def box(cls, q_max: RatLike, window: RatLike | tuple | None = None, arity: int = 1,
            q_min: RatLike = 0) -> "Rect":
        """Box with the same window for every variable; an int window W means [-W, W]."""
        if arity == 0:
            return cls(rat(q_max), (), rat(q_min))
        if window is None:
            raise ValueError("window required for arity > 0")
        if isinstance(window, tuple):
            w = (rat(window[0]), rat(window[1]))
        else:
            w = (-rat(window), rat(window))
        return cls(rat(q_max), (w,) * arity, rat(q_min))

    @property
    def arity(self) -> int:
        return len(self.windows)

    def contains(self, m: Monomial) -> bool:
        if m.arity != self.arity:
            raise ArityError("monomial arity does not match rect")
        if not (self.q_min <= m.q <= self.q_max):
            return False
        return all(lo <= e <= hi for e, (lo, hi) in zip(m.x, self.windows))

    def within(self, other: "Rect") -> bool:
        """True if the q-range and windows of self lie inside other's."""
        if self.arity != other.arity:
            return False
        if self.q_max > other.q_max or self.q_min < other.q_min:
            return False
        return all(o[0] <= s[0] and s[1] <= o[1] for s, o in zip(self.windows, other.windows))

    def intersect(self, other: "Rect") -> "Rect":
        if self.arity != other.arity:
            raise ArityError("rect arity mismatch")
        ws = tuple((max(a[0], b[0]), min(a[1], b[1])) for a, b in zip(self.windows, other.windows))
        return Rect(min(self.q_max, other.q_max), ws, max(self.q_min, other.q_min))

    def shifted(self, m: Monomial) -> "Rect":
        ws = tuple((lo + e, hi + e) for (lo, hi), e in zip(self.windows, m.x))
        return Rect(self.q_max + m.q, ws, self.q_min + m.q)

    def with_q(self, q_max: RatLike | None = None, q_min: RatLike | None = None) -> "Rect":
        return Rect(self.q_max if q_max is None else q_max, self.windows,
                    self.q_min if q_min is None else q_min)

    def to_json(self) -> dict:
        return {
            "qMin": rat_str(self.q_min),
            "qMax": rat_str(self.q_max),
            "windows": [[rat_str(lo), rat_str(hi)] for lo, hi in self.windows],
        }

    @classmethod
    def from_json(cls, d: dict) -> "Rect":
        return cls(rat(d["qMax"]), tuple((rat(a), rat(b)) for a, b in d.get("windows", [])),
                   rat(d.get("qMin", "0")))


# --------------------------------------------------------------------- cones

Opt = Optional[Fraction]  # None stands for an infinite value


def _min_opt(a: Opt, b: Opt) -> Opt:
    if a is None:
        return b
    if b is None:
        return a
    return min(a, b)


@dataclass(frozen=True)
class Cone:
    """Linear lower bound on the full support of a series.

    Every true term q^a x^b satisfies lo_i <= b_i <= hi_i and
    a >= q_low + sum_i phi_i(b_i - center_i), where phi(t) = up*t for t >= 0
    and phi(t) = down*(-t) for t < 0.  A slope of None forbids that side,
    a bound of None is no bound.
    """

    q_low: Fraction
    center: tuple
    up: tuple
    down: tuple
    lo: tuple
    hi: tuple

    def __post_init__(self):
        up, down, lo, hi = list(self.up), list(self.down), list(self.lo), list(self.hi)
        for i, c in enumerate(self.center):
            if up[i] is None:
                hi[i] = c if hi[i] is None else min(hi[i], c)
            elif hi[i] is not None and hi[i] <= c:
                up[i] = None
            if down[i] is None:
                lo[i] = c if lo[i] is None else max(lo[i], c)
            elif lo[i] is not None and lo[i] >= c:
                down[i] = None
        object.__setattr__(self, "up", tuple(up))
        object.__setattr__(self, "down", tuple(down))
        object.__setattr__(self, "lo", tuple(lo))
        object.__setattr__(self, "hi", tuple(hi))

    @property
    def arity(self) -> int:
        return len(self.center)

    @classmethod
    def ray(cls, m: Monomial) -> "Cone":
        """Support of sum_{i>=0} m^i (and of any product of such series along m)."""
        nz = sum(1 for e in m.x if e != 0)
        center = (Fraction(0),) * m.arity
        up, down, lo, hi = [], [], [], []
        for e in m.x:
            if e > 0:
                up.append(m.q / (e * nz)); down.append(None)
                lo.append(Fraction(0)); hi.append(None)
            elif e < 0:
                up.append(None); down.append(m.q / (-e * nz))
                lo.append(None); hi.append(Fraction(0))
            else:
                up.append(None); down.append(None)
                lo.append(Fraction(0)); hi.append(Fraction(0))
        return cls(Fraction(0), center, tuple(up), tuple(down), tuple(lo), tuple(hi))

    @classmethod
    def fit(cls, monomials: Iterable[Monomial], arity: int, center: Sequence[RatLike] | None = None,
            up: Sequence[Opt] | None = None, down: Sequence[Opt] | None = None) -> "Cone":
        """Smallest q_low making the given slopes valid for a finite support."""
        ms = list(monomials)
        c = tuple(rat(v) for v in center) if center is not None else (Fraction(0),) * arity
        ups = tuple(up) if up is not None else (Fraction(0),) * arity
        downs = tuple(down) if down is not None else (Fraction(0),) * arity
        if not ms:
            return cls(Fraction(0), c, ups, downs, c, c)
        lo = tuple(min(m.x[i] for m in ms) for i in range(arity))
        hi = tuple(max(m.x[i] for m in ms) for i in range(arity))
        probe = cls(Fraction(0), c, tuple(Fraction(0) if u is None else u for u in ups),
                    tuple(Fraction(0) if d is None else d for d in downs),
                    (None,) * arity, (None,) * arity)
        q_low = min(m.q - probe.phi(m.x) for m in ms)
        # sides without any support may keep an infinite slope
        ups2 = tuple(u if (u is not None or hi[i] <= c[i]) else Fraction(0) for i, u in enumerate(ups))
        downs2 = tuple(d if (d is not None or lo[i] >= c[i]) else Fraction(0) for i, d in enumerate(downs))
        probe = cls(Fraction(0), c, ups2, downs2, lo, hi)
        q_low = min(m.q - probe.phi(m.x) for m in ms)
        return cls(q_low, c, ups2, downs2, lo, hi)

    def phi(self, xs: Sequence[Fraction]) -> Fraction:
        total = Fraction(0)
        for i, b in enumerate(xs):
            t = b - self.center[i]
            if t > 0:
                total += self.up[i] * t
            elif t < 0:
                total += self.down[i] * (-t)
        return total

    def _phi_min(self, i: int) -> Opt:
        c, up, down, lo, hi = self.center[i], self.up[i], self.down[i], self.lo[i], self.hi[i]
        cands = []
        if up is not None:
            t0 = max(Fraction(0), lo - c) if lo is not None else Fraction(0)
            if up >= 0:
                cands.append(up * t0)
            elif hi is None:
                return None
            else:
                cands.append(up * (hi - c))
        if down is not None:
            t0 = max(Fraction(0), c - hi) if hi is not None else Fraction(0)
            if down >= 0:
                cands.append(down * t0)
            elif lo is None:
                return None
            else:
                cands.append(down * (c - lo))
        if not cands:
            return Fraction(0)
        return min(cands)

    def floor(self) -> Opt:
        """Global lower bound of q over the support, None if unbounded."""
        total = self.q_low
        for i in range(self.arity):
            m = self._phi_min(i)
            if m is None:
                return None
            total += m
        return total

    def x_range(self, i: int, q_cap: Fraction) -> tuple:
        """Hull of x_i over support terms with q <= q_cap.  Returns (lo, hi), entries may be None."""
        rest = self.q_low
        for j in range(self.arity):
            if j != i:
                m = self._phi_min(j)
                if m is None:
                    return (self.lo[i], self.hi[i])
                rest += m
        r = q_cap - rest
        c, up, down = self.center[i], self.up[i], self.down[i]
        pieces = []  # intervals in t = x - c
        if up is not None:
            if up > 0:
                if r >= 0:
                    pieces.append((Fraction(0), r / up))
            elif up == 0:
                if r >= 0:
                    pieces.append((Fraction(0), None))
            else:
                pieces.append((max(Fraction(0), r / up), None))
        if down is not None:
            if down > 0:
                if r >= 0:
                    pieces.append((-r / down, Fraction(0)))
            elif down == 0:
                if r >= 0:
                    pieces.append((None, Fraction(0)))
            else:
                pieces.append((None, min(Fraction(0), -r / down)))
        if not pieces and r >= 0:
            pieces.append((Fraction(0), Fraction(0)))
        if not pieces:
            return (c, c)
        lo_t = None if any(p[0] is None for p in pieces) else min(p[0] for p in pieces)
        hi_t = None if any(p[1] is None for p in pieces) else max(p[1] for p in pieces)
        lo_x = None if lo_t is None else lo_t + c
        hi_x = None if hi_t is None else hi_t + c
        if self.lo[i] is not None:
            lo_x = self.lo[i] if lo_x is None else max(lo_x, self.lo[i])
        if self.hi[i] is not None:
            hi_x = self.hi[i] if hi_x is None else min(hi_x, self.hi[i])
        if lo_x is not None and hi_x is not None and lo_x > hi_x:
            return (c, c)
        return (lo_x, hi_x)

    def _sublinear(self, up: Opt, down: Opt) -> bool:
        if up is None or down is None:
            return True
        return up + down >= 0

    def minkowski(self, other: "Cone") -> Optional["Cone"]:
        """Cone containing the sum set of both supports, or None if not representable."""
        ups = tuple(_min_opt(a, b) for a, b in zip(self.up, other.up))
        downs = tuple(_min_opt(a, b) for a, b in zip(self.down, other.down))
        if not all(self._sublinear(u, d) for u, d in zip(ups, downs)):
            return None
        add = lambda a, b: None if a is None or b is None else a + b
        return Cone(self.q_low + other.q_low,
                    tuple(a + b for a, b in zip(self.center, other.center)), ups, downs,
                    tuple(add(a, b) for a, b in zip(self.lo, other.lo)),
                    tuple(add(a, b) for a, b in zip(self.hi, other.hi)))

    def union(self, other: "Cone") -> Optional["Cone"]:
        """Cone containing both supports, centred at self's centre."""
        ups = tuple(_min_opt(a, b) for a, b in zip(self.up, other.up))
        downs = tuple(_min_opt(a, b) for a, b in zip(self.down, other.down))
        if not all(self._sublinear(u, d) for u, d in zip(ups, downs)):
            return None
        shift = Fraction(0)
        for i in range(self.arity):
            t = other.center[i] - self.center[i]
            if t > 0:
                if ups[i] is None:
                    return None
                shift += ups[i] * t
            elif t < 0:
                if downs[i] is None:
                    return None
                shift += downs[i] * (-t)
        lo = tuple(None if a is None or b is None else min(a, b) for a, b in zip(self.lo, other.lo))
        hi = tuple(None if a is None or b is None else max(a, b) for a, b in zip(self.hi, other.hi))
        return Cone(min(self.q_low, other.q_low - shift), self.center, ups, downs, lo, hi)

    def shifted(self, m: Monomial) -> "Cone":
        add = lambda a, e: None if a is None else a + e
        return Cone(self.q_low + m.q, tuple(c + e for c, e in zip(self.center, m.x)), self.up, self.down,
                    tuple(add(a, e) for a, e in zip(self.lo, m.x)),
                    tuple(add(a, e) for a, e in zip(self.hi, m.x)))

    def sheared(self, i: int, t: Fraction) -> "Cone":
        up, down = list(self.up), list(self.down)
        up[i] = None if up[i] is None else up[i] + t
        down[i] = None if down[i] is None else down[i] - t
        return Cone(self.q_low + t * self.center[i], self.center, tuple(up), tuple(down), self.lo, self.hi)

    def drop(self, i: int, e: Fraction) -> "Cone":
        t = e - self.center[i]
        extra = Fraction(0)
        if t > 0 and self.up[i] is not None:
            extra = self.up[i] * t
        elif t < 0 and self.down[i] is not None:
            extra = self.down[i] * (-t)
        pick = lambda v: v[:i] + v[i + 1:]
        return Cone(self.q_low + extra, pick(self.center), pick(self.up), pick(self.down),
                    pick(self.lo), pick(self.hi))

    def tensor(self, other: "Cone") -> "Cone":
        return Cone(self.q_low + other.q_low, self.center + other.center, self.up + other.up,
                    self.down + other.down, self.lo + other.lo, self.hi + other.hi)


# -------------------------------------------------------------------- series


@dataclass(frozen=True)
class EqualityReport:
    equal: bool
    rect: Rect
    first_difference: Optional[tuple] = None  # (Monomial, coeff_a, coeff_b)

    def __bool__(self) -> bool:
        return self.equal

    def to_json(self) -> dict:
        d = {"rect": self.rect.to_json(), "equal": self.equal}
        if self.first_difference is not None:
            m, a, b = self.first_difference
            d["firstDifference"] = {"monomial": m.to_json(), "a": rat_str(Fraction(a)), "b": rat_str(Fraction(b))}
        return d


class MSeries:
    """Immutable truncated series; see the module docstring for the box semantics."""

    __slots__ = ("arity", "den", "_terms", "rect", "support")

    def __init__(self, arity: int, den: int, terms: dict, rect: Rect, support: Optional[Cone] = None):
        if rect.arity != arity:
            raise ArityError(f"rect arity {rect.arity} != series arity {arity}")
        if support is not None and support.arity != arity:
            raise ArityError("cone arity mismatch")
        self.arity = arity
        self.rect = rect
        self.support = support
        g = den
        for k in terms:
            for v in k:
                g = math.gcd(g, v)
                if g == 1:
                    break
            if g == 1:
                break
        if g > 1:
            terms = {tuple(v // g for v in k): c for k, c in terms.items()}
            den //= g
        self.den = den
        self._terms = terms

    # construction -----------------------------------------------------------

    @classmethod
    def from_terms(cls, terms, rect: Rect, support: Optional[Cone] = None,
                   clip: bool = True) -> "MSeries":
        """Build from {Monomial | (q, (x..)): coeff}.

        Terms above q_max or outside the windows are dropped when clip is set;
        a term below q_min contradicts the box semantics and raises.
        """
        arity = rect.arity
        items = []
        den = 1
        for m, c in (terms.items() if isinstance(terms, dict) else terms):
            if not isinstance(m, Monomial):
                m = Monomial(m[0], tuple(m[1]) if len(m) > 1 else ())
            if m.arity != arity:
                raise ArityError(f"term {m} has arity {m.arity}, expected {arity}")
            c = Fraction(c) if not isinstance(c, (int, Fraction)) else c
            if c == 0:
                continue
            if not rect.contains(m):
                if m.q < rect.q_min and all(lo <= e <= hi for e, (lo, hi) in zip(m.x, rect.windows)):
                    raise RectError(f"term {m} lies below q_min {rect.q_min}")
                if not clip:
                    raise RectError(f"term {m} outside {rect}")
                continue
            items.append((m, c))
            for v in m.key:
                den = _lcm(den, v.denominator)
        out: dict = {}
        for m, c in items:
            k = tuple(int(v * den) for v in m.key)
            out[k] = out.get(k, 0) + c
        out = {k: _norm_coeff(c) for k, c in out.items() if c != 0}
        return cls(arity, den, out, rect, support)

    @classmethod
    def polynomial(cls, terms, rect: Rect) -> "MSeries":
        """A finite series whose full support is the given terms (it gets a confining cone)."""
        s = cls.from_terms(terms, rect, clip=False)
        cone = Cone.fit((m for m, _ in s.items()), rect.arity)
        return cls(s.arity, s.den, s._terms, rect, cone)

    @classmethod
    def zero(cls, rect: Rect) -> "MSeries":
        return cls(rect.arity, 1, {}, rect, None)

    @classmethod
    def one(cls, rect: Rect) -> "MSeries":
        return cls.polynomial({Monomial.unit(rect.arity): 1}, rect)

    # access -----------------------------------------------------------------

    def _mono(self, k: tuple) -> Monomial:
        d = self.den
        return Monomial(Fraction(k[0], d), tuple(Fraction(v, d) for v in k[1:]))

    def items(self) -> Iterator[tuple]:
        """(Monomial, Fraction) pairs sorted by (q, x)."""
        for k in sorted(self._terms):
            yield self._mono(k), Fraction(self._terms[k])

    def monomials(self) -> list:
        return [m for m, _ in self.items()]

    def coeff(self, m: Monomial) -> Fraction:
        if m.arity != self.arity:
            raise ArityError("arity mismatch")
        scaled = [v * self.den for v in m.key]
        if any(v.denominator != 1 for v in scaled):
            return Fraction(0)
        return Fraction(self._terms.get(tuple(int(v) for v in scaled), 0))

    def __len__(self) -> int:
        return len(self._terms)

    def is_zero(self) -> bool:
        return not self._terms

    def q_exponents(self) -> list:
        return sorted({Fraction(k[0], self.den) for k in self._terms})

    def __repr__(self) -> str:
        shown = " + ".join(f"({c})*{m}" for m, c in list(self.items())[:8])
        more = " + ..." if len(self) > 8 else ""
        return f"MSeries[{self.arity}]({shown or '0'}{more}; {self.rect})"

    def _scaled(self, den: int) -> dict:
        if den == self.den:
            return self._terms
        f = den // self.den
        return {tuple(v * f for v in k): c for k, c in self._terms.items()}

    def _bounds(self, rect: Rect, den: int) -> tuple:
        qlo = _ceil(rect.q_min * den)
        qhi = _floor(rect.q_max * den)
        ws = tuple((_ceil(lo * den), _floor(hi * den)) for lo, hi in rect.windows)
        return qlo, qhi, ws

    @staticmethod
    def _inside(k: tuple, qlo: int, qhi: int, ws: tuple) -> bool:
        if k[0] < qlo or k[0] > qhi:
            return False
        for v, (lo, hi) in zip(k[1:], ws):
            if v < lo or v > hi:
                return False
        return True

    def _filtered(self, terms: dict, den: int, rect: Rect) -> dict:
        qlo, qhi, ws = self._bounds(rect, den)
        return {k: c for k, c in terms.items() if self._inside(k, qlo, qhi, ws)}

    # linear structure --------------------------------------------------------

    def _check(self, other: "MSeries") -> None:
        if not isinstance(other, MSeries):
            raise TypeError("expected MSeries")
        if other.arity != self.arity:
            raise ArityError(f"arity {self.arity} vs {other.arity}")

    def _combine(self, other: "MSeries", sign: int) -> "MSeries":
        self._check(other)
        ws = tuple((max(a[0], b[0]), min(a[1], b[1])) for a, b in zip(self.rect.windows, other.rect.windows))
        rect = Rect(min(self.rect.q_max, other.rect.q_max), ws, min(self.rect.q_min, other.rect.q_min))
        den = _lcm(self.den, other.den)
        out = dict(self._scaled(den))
        for k, c in other._scaled(den).items():
            v = out.get(k, 0) + sign * c
            if v:
                out[k] = v
            else:
                out.pop(k, None)
        out = self._filtered(out, den, rect)
        cone = None
        if self.support is not None and other.support is not None:
            cone = self.support.union(other.support)
        return MSeries(self.arity, den, out, rect, cone)

    def __add__(self, other: "MSeries") -> "MSeries":
        return self._combine(other, 1)

    def __sub__(self, other: "MSeries") -> "MSeries":
        return self._combine(other, -1)

    def __neg__(self) -> "MSeries":
        return MSeries(self.arity, self.den, {k: -c for k, c in self._terms.items()}, self.rect, self.support)

    def scale(self, c: RatLike) -> "MSeries":
        c = rat(c) if not isinstance(c, int) else c
        c = _norm_coeff(c)
        if c == 0:
            return MSeries(self.arity, 1, {}, self.rect, self.support)
        return MSeries(self.arity, self.den, {k: _norm_coeff(v * c) for k, v in self._terms.items()},
                       self.rect, self.support)

    def __mul__(self, other):
        if isinstance(other, MSeries):
            return mul(self, other)
        return self.scale(other)

    def __rmul__(self, other):
        return self.scale(other)

    def shift(self, m: Monomial) -> "MSeries":
        """Multiply by a monomial: exponents, box and cone all translate."""
        if m.arity != self.arity:
            raise ArityError("monomial arity mismatch")
        den = self.den
        for v in m.key:
            den = _lcm(den, v.denominator)
        off = tuple(int(v * den) for v in m.key)
        terms = {tuple(a + b for a, b in zip(k, off)): c for k, c in self._scaled(den).items()}
        cone = self.support.shifted(m) if self.support is not None else None
        return MSeries(self.arity, den, terms, self.rect.shifted(m), cone)

    # restriction and comparison -----------------------------------------------

    def restrict(self, rect: Rect) -> "MSeries":
        """Shrink q_max and windows.  The lower edge q_min is kept (it is a floor, not a cut)."""
        if rect.arity != self.arity:
            raise ArityError("rect arity mismatch")
        if rect.q_max > self.rect.q_max or not all(
                o[0] <= s[0] and s[1] <= o[1] for s, o in zip(rect.windows, self.rect.windows)):
            raise RectError(f"{rect} exceeds the known box {self.rect}")
        q_min = min(self.rect.q_min, rect.q_max)
        out_rect = Rect(rect.q_max, rect.windows, q_min)
        return MSeries(self.arity, self.den, self._filtered(self._terms, self.den, out_rect), out_rect,
                       self.support)

    def covers(self, rect: Rect) -> bool:
        return rect.arity == self.arity and rect.q_max <= self.rect.q_max and all(
            o[0] <= s[0] and s[1] <= o[1] for s, o in zip(rect.windows, self.rect.windows))

    def restricted_terms(self, rect: Rect) -> dict:
        """{Monomial: Fraction} of stored terms inside rect (no box check)."""
        return {m: c for m, c in self.items() if rect.contains(m)}

    def equal_on(self, other: "MSeries", rect: Rect) -> EqualityReport:
        return equal_on(self, other, rect)

    # transforms -------------------------------------------------------------

    def shear(self, var: int, t: RatLike) -> "MSeries":
        return shear(self, var, t)

    def row(self, var: int, e: RatLike) -> "MSeries":
        return row_extract(self, var, e)

    def tensor(self, other: "MSeries") -> "MSeries":
        return tensor(self, other)

    # serialization --------------------------------------------------------------

    def to_json(self) -> dict:
        return {
            "arity": self.arity,
            "rect": self.rect.to_json(),
            "terms": [{"q": rat_str(m.q), "x": [rat_str(e) for e in m.x], "c": rat_str(c)}
                      for m, c in self.items()],
        }

    @classmethod
    def from_json(cls, d: dict) -> "MSeries":
        arity = int(d["arity"])
        rect = Rect.from_json(d["rect"])
        if rect.arity != arity:
            raise ArityError("rect windows do not match arity")
        terms = []
        for t in d.get("terms", []):
            xs = t.get("x", [])
            if len(xs) != arity:
                raise ArityError(f"term with {len(xs)} x-exponents in arity-{arity} series")
            terms.append((Monomial(rat(t["q"]), tuple(rat(e) for e in xs)), rat(t["c"])))
        return cls.from_terms(terms, rect, clip=False)


# ------------------------------------------------------------------ products


def _mul_window(i: int, a: MSeries, b: MSeries, A: tuple, B: tuple) -> tuple:
    alo, ahi = a.rect.windows[i]
    blo, bhi = b.rect.windows[i]
    inf, ninf = math.inf, -math.inf
    A_lo = ninf if A[0] is None else A[0]
    A_hi = inf if A[1] is None else A[1]
    B_lo = ninf if B[0] is None else B[0]
    B_hi = inf if B[1] is None else B[1]
    hi, lo = inf, ninf
    # a pair (x1, x2) with x1 + x2 in [lo, hi] must have x1 in a's window and x2 in b's
    if not A_hi <= ahi:
        hi = min(hi, ahi + B_lo)
    if not B_hi <= bhi:
        hi = min(hi, bhi + A_lo)
    if not A_lo >= alo:
        lo = max(lo, alo + B_hi)
    if not B_lo >= blo:
        lo = max(lo, blo + A_hi)
    hi = min(hi, A_hi + B_hi)
    lo = max(lo, A_lo + B_lo)
    if hi in (inf, ninf) or lo in (inf, ninf):
        raise RectError(f"cannot certify a finite x-window for variable {i} of the product")
    if lo > hi:
        raise EmptyRectError(f"empty x-window for variable {i} of the product")
    return (Fraction(lo), Fraction(hi))


def product_rect(a: MSeries, b: MSeries) -> tuple:
    """Certified box of a*b and the operand ranges used.  See `mul`."""
    fa = a.support.floor() if a.support is not None else None
    fb = b.support.floor() if b.support is not None else None
    conf_a, conf_b = fa is None, fb is None
    fa_eff = a.rect.q_min if conf_a else fa
    fb_eff = b.rect.q_min if conf_b else fb
    q_max = min(a.rect.q_max + fb_eff, b.rect.q_max + fa_eff)
    q_min = a.rect.q_min + b.rect.q_min
    if q_min > q_max:
        q_min = q_max
    if q_max < fa_eff + fb_eff:
        # no pair of true terms reaches the box: the product is zero on any window
        ws = tuple((x[0] + y[0], x[1] + y[1]) for x, y in zip(a.rect.windows, b.rect.windows))
        return Rect(q_max, ws, q_min)
    windows = []
    for i in range(a.arity):
        A = (None, None) if conf_a else a.support.x_range(i, q_max - fb_eff)
        B = (None, None) if conf_b else b.support.x_range(i, q_max - fa_eff)
        windows.append(_mul_window(i, a, b, A, B))
    return Rect(q_max, tuple(windows), q_min)


def mul(a: MSeries, b: MSeries) -> MSeries:
    """Exact product on a certified box.

    The q-bound is q_max = min(qMax_a + floor_b, qMax_b + floor_a), where floor
    is the support cone's global floor, or the box floor q_min when the cone is
    unknown (such an operand is then only ever paired inside its window).
    For each x-variable the window is chosen so that every pair of true terms
    contributing to it lies in both operands' boxes: the x-range of each
    operand below the q-budget comes from its cone.  An operand without a
    cone whose partner also has unbounded x-range cannot be multiplied.
    """
    a._check(b)
    rect = product_rect(a, b)
    den = _lcm(a.den, b.den)
    ta, tb = a._scaled(den), b._scaled(den)
    qlo, qhi, ws = a._bounds(rect, den)
    out: dict = {}
    blist = sorted(tb.items())
    bq = [k[0] for k, _ in blist]
    if a.arity == 0:
        for ka, ca in ta.items():
            n = bisect_right(bq, qhi - ka[0])
            qa = ka[0]
            for idx in range(n):
                kb, cb = blist[idx]
                k = (qa + kb[0],)
                out[k] = out.get(k, 0) + ca * cb
    elif a.arity == 1:
        (wlo, whi), = ws
        for ka, ca in ta.items():
            n = bisect_right(bq, qhi - ka[0])
            qa, xa = ka
            for idx in range(n):
                kb, cb = blist[idx]
                x = xa + kb[1]
                if wlo <= x <= whi:
                    k = (qa + kb[0], x)
                    out[k] = out.get(k, 0) + ca * cb
    else:
        for ka, ca in ta.items():
            n = bisect_right(bq, qhi - ka[0])
            for idx in range(n):
                kb, cb = blist[idx]
                k = tuple(u + v for u, v in zip(ka, kb))
                ok = True
                for v, (lo, hi) in zip(k[1:], ws):
                    if v < lo or v > hi:
                        ok = False
                        break
                if ok:
                    out[k] = out.get(k, 0) + ca * cb
    out = {k: _norm_coeff(c) for k, c in out.items() if c != 0 and k[0] >= qlo}
    cone = None
    if a.support is not None and b.support is not None:
        cone = a.support.minkowski(b.support)
    return MSeries(a.arity, den, out, rect, cone)


def tensor(a: MSeries, b: MSeries) -> MSeries:
    """Outer product in disjoint variables (a's variables first)."""
    if a.arity + b.arity > 3:
        raise ArityError("tensor product would exceed 3 variables")
    q_max = min(a.rect.q_max + b.rect.q_min, b.rect.q_max + a.rect.q_min)
    q_min = min(a.rect.q_min + b.rect.q_min, q_max)
    rect = Rect(q_max, a.rect.windows + b.rect.windows, q_min)
    den = _lcm(a.den, b.den)
    qhi = _floor(q_max * den)
    out: dict = {}
    blist = sorted(b._scaled(den).items())
    for ka, ca in a._scaled(den).items():
        for kb, cb in blist:
            q = ka[0] + kb[0]
            if q > qhi:
                break
            k = (q,) + ka[1:] + kb[1:]
            out[k] = out.get(k, 0) + ca * cb
    out = {k: _norm_coeff(c) for k, c in out.items() if c != 0}
    cone = None
    if a.support is not None and b.support is not None:
        cone = a.support.tensor(b.support)
    return MSeries(a.arity + b.arity, den, out, rect, cone)


def lift(s: MSeries, arity: int) -> MSeries:
    """View a q-only series as a series in `arity` variables with x-exponent 0."""
    if s.arity != 0:
        raise ArityError("only q-series can be lifted")
    zero = (Fraction(0), Fraction(0))
    rect = Rect(s.rect.q_max, (zero,) * arity, s.rect.q_min)
    terms = {k + (0,) * arity: c for k, c in s._terms.items()}
    cone = None
    if s.support is not None:
        z = (Fraction(0),) * arity
        cone = Cone(s.support.q_low, z, (None,) * arity, (None,) * arity, z, z)
    return MSeries(arity, s.den, terms, rect, cone)


def widen(s: MSeries, windows: Sequence[tuple]) -> MSeries:
    """Enlarge the x-windows of a series whose cone bounds x inside its box.

    Valid only when the hard bounds of the cone already lie in the current
    windows; then nothing new can appear in the wider box.
    """
    if s.support is None:
        raise RectError("widen needs a support cone")
    ws = tuple((rat(lo), rat(hi)) for lo, hi in windows)
    for i, (lo, hi) in enumerate(s.rect.windows):
        clo, chi = s.support.lo[i], s.support.hi[i]
        if (clo is None or clo < lo) and ws[i][0] < lo:
            raise RectError("support not confined on the low side")
        if (chi is None or chi > hi) and ws[i][1] > hi:
            raise RectError("support not confined on the high side")
    return MSeries(s.arity, s.den, s._terms, Rect(s.rect.q_max, ws, s.rect.q_min), s.support)


# ------------------------------------------------------------- substitutions


def shear(s: MSeries, var: int, t: RatLike) -> MSeries:
    """q^a x^b -> q^(a + t*b_var) x^b.

    Rows of the box are complete below, so row b is exact for
    q <= q_max + t*b; the output box takes the minimum over the window
    (clipped to the cone's hard x-bounds, beyond which rows are empty).
    """
    if not 0 <= var < s.arity:
        raise ArityError(f"variable index {var} out of range")
    t = rat(t)
    if t == 0:
        return s
    lo, hi = s.rect.windows[var]
    if s.support is not None:
        # rows outside the cone's hard bounds are empty, so they do not limit the box
        clo, chi = s.support.lo[var], s.support.hi[var]
        lo2 = lo if clo is None else max(lo, clo)
        hi2 = hi if chi is None else min(hi, chi)
        if lo2 <= hi2:
            lo, hi = lo2, hi2
    dq = min(t * lo, t * hi)
    rect = Rect(s.rect.q_max + dq, s.rect.windows, min(s.rect.q_min + dq, s.rect.q_max + dq))
    tn, td = t.numerator, t.denominator
    den = s.den * td
    # in units of 1/den the exponent b becomes b_old*td and the q-shift t*b becomes tn*b_old
    out = {}
    for k, c in s._terms.items():
        nk = tuple(v * td for v in k)
        out[(nk[0] + tn * k[var + 1],) + nk[1:]] = c
    cone = s.support.sheared(var, t) if s.support is not None else None
    return MSeries(s.arity, den, s._filtered(out, den, rect), rect, cone)


def row_extract(s: MSeries, var: int, e: RatLike) -> MSeries:
    """All terms with x_var exponent exactly e, as a series in the other variables."""
    if not 0 <= var < s.arity:
        raise ArityError(f"variable index {var} out of range")
    e = rat(e)
    lo, hi = s.rect.windows[var]
    if not lo <= e <= hi:
        raise RectError(f"exponent {e} outside window [{lo}, {hi}]")
    rect = Rect(s.rect.q_max, s.rect.windows[:var] + s.rect.windows[var + 1:], s.rect.q_min)
    scaled = e * s.den
    cone = s.support.drop(var, e) if s.support is not None else None
    if scaled.denominator != 1:
        return MSeries(s.arity - 1, s.den, {}, rect, cone)
    target = int(scaled)
    out = {}
    for k, c in s._terms.items():
        if k[var + 1] == target:
            out[k[:var + 1] + k[var + 2:]] = c
    return MSeries(s.arity - 1, s.den, out, rect, cone)


def substitute(s: MSeries, matrix: Sequence[Sequence[RatLike]], target: Rect) -> MSeries:
    """Linear change of x-exponents: new_x = matrix @ old_x (q untouched).

    The matrix must be square and invertible.  The result is returned on
    `target`, which is checked to pull back inside the box of s.
    """
    n = s.arity
    M = [[rat(v) for v in row] for row in matrix]
    if len(M) != n or any(len(r) != n for r in M):
        raise ArityError("substitution matrix must be square of size arity")
    inv = _inverse(M)
    # pull back the corners of target's windows
    import itertools
    corners = list(itertools.product(*target.windows)) if n else [()]
    pre_lo = [None] * n
    pre_hi = [None] * n
    for corner in corners:
        pre = [sum(inv[i][j] * corner[j] for j in range(n)) for i in range(n)]
        for i in range(n):
            pre_lo[i] = pre[i] if pre_lo[i] is None else min(pre_lo[i], pre[i])
            pre_hi[i] = pre[i] if pre_hi[i] is None else max(pre_hi[i], pre[i])
    for i in range(n):
        lo, hi = s.rect.windows[i]
        if pre_lo[i] < lo or pre_hi[i] > hi:
            raise RectError(f"substitution target needs variable {i} in [{pre_lo[i]}, {pre_hi[i]}], "
                            f"known only on [{lo}, {hi}]")
    if target.q_max > s.rect.q_max:
        raise RectError("substitution target exceeds q_max")
    # work on the integer keys: scale M by a common denominator D
    D = 1
    for row in M:
        for v in row:
            D = _lcm(D, v.denominator)
    Mi = [[int(v * D) for v in row] for row in M]
    den = s.den * D
    qhi = _floor(target.q_max * den)
    ws = [(_ceil(lo * den), _floor(hi * den)) for lo, hi in target.windows]
    out = {}
    for k, c in s._terms.items():
        q = k[0] * D
        if q > qhi:
            continue
        nx = tuple(sum(Mi[i][j] * k[j + 1] for j in range(n)) for i in range(n))
        if all(lo <= e <= hi for e, (lo, hi) in zip(nx, ws)):
            out[(q,) + nx] = c
    rect = Rect(target.q_max, target.windows, min(s.rect.q_min, target.q_max))
    return MSeries(n, den, out, rect)


def _inverse(M: list) -> list:
    n = len(M)
    A = [row[:] + [Fraction(int(i == j)) for j in range(n)] for i, row in enumerate(M)]
    for col in range(n):
        piv = next((r for r in range(col, n) if A[r][col] != 0), None)
        if piv is None:
            raise ValueError("singular substitution matrix")
        A[col], A[piv] = A[piv], A[col]
        p = A[col][col]
        A[col] = [v / p for v in A[col]]
        for r in range(n):
            if r != col and A[r][col] != 0:
                f = A[r][col]
                A[r] = [u - f * v for u, v in zip(A[r], A[col])]
    return [row[n:] for row in A]


def monomial_shift(s: MSeries, m: Monomial) -> MSeries:
    return s.shift(m)


def equal_on(a: MSeries, b: MSeries, rect: Rect) -> EqualityReport:
    """Exact comparison on rect, which must lie in both boxes."""
    a._check(b)
    for s, name in ((a, "first"), (b, "second")):
        if not s.covers(rect):
            raise RectError(f"{rect} exceeds the box of the {name} series {s.rect}")
    den = _lcm(a.den, b.den)
    qlo, qhi, ws = a._bounds(rect, den)
    ta = {k: c for k, c in a._scaled(den).items() if MSeries._inside(k, qlo, qhi, ws)}
    tb = {k: c for k, c in b._scaled(den).items() if MSeries._inside(k, qlo, qhi, ws)}
    for k in sorted(set(ta) | set(tb)):
        ca, cb = ta.get(k, 0), tb.get(k, 0)
        if ca != cb:
            m = Monomial(Fraction(k[0], den), tuple(Fraction(v, den) for v in k[1:]))
            return EqualityReport(False, rect, (m, Fraction(ca), Fraction(cb)))
    return EqualityReport(True, rect)


# ------------------------------------------------------- geometric expansions


def geometric_inverse(m: Monomial, rect: Rect, direction: str = "expandUp", coeff: int = 1) -> MSeries:
    """sum_{i>=0} (coeff*m)^i on rect, i.e. 1/(1 - coeff*m) expanded in powers of m."""
    if direction != "expandUp":
        raise ValueError("only expandUp is supported")
    if m.arity != rect.arity:
        raise ArityError("monomial arity does not match rect")
    if m.is_unit():
        raise SeriesError("1/(1 - 1) is undefined")
    # i ranges over integers with i*m.x in the windows and i*m.q <= q_max
    i_lo, i_hi = 0, None
    for e, (lo, hi) in zip(m.x, rect.windows):
        if e == 0:
            if not lo <= 0 <= hi:
                i_hi = -1
            continue
        a, b = (lo / e, hi / e) if e > 0 else (hi / e, lo / e)
        i_lo = max(i_lo, _ceil(a))
        i_hi = _floor(b) if i_hi is None else min(i_hi, _floor(b))
    if m.q > 0:
        cap = _floor(rect.q_max / m.q)
        i_hi = cap if i_hi is None else min(i_hi, cap)
    if i_hi is None:
        raise SeriesError(f"powers of {m} never leave {rect}")
    terms = {}
    floor = None
    for i in range(i_lo, i_hi + 1):
        mi = m ** i
        floor = mi.q if floor is None else min(floor, mi.q)
        if mi.q <= rect.q_max:
            terms[mi] = coeff ** i
    q_min = rect.q_min if floor is None else min(rect.q_min, floor)
    out_rect = Rect(rect.q_max, rect.windows, min(q_min, rect.q_max))
    return MSeries.from_terms(terms, out_rect, Cone.ray(m))


def pochhammer(a: Monomial, rect: Rect, inverted: bool = False, coeff: int = 1) -> MSeries:
    """prod_{i>=0} (1 - coeff*a q^i), or its inverse, exact on rect.

    coeff = -1 gives the products (-a; q) that occur in N=2 characters.

    All factors move x along the same direction a.x, so a term is determined
    by (N, q) with x = N * a.x; the product is built by dynamic programming
    over that pair.  Factors with a.q + i > q_max - (sum of negative
    factor exponents) cannot reach the box and are skipped.
    """
    if a.arity != rect.arity:
        raise ArityError("monomial arity does not match rect")
    alpha = a.q
    beta = a.x
    moving = any(e != 0 for e in beta)
    # admissible N: N*beta inside hull(window, 0), and inside the window at the end
    n_cap = None
    for e, (lo, hi) in zip(beta, rect.windows):
        if e > 0:
            c = _floor(max(hi, Fraction(0)) / e)
        elif e < 0:
            c = _floor(min(lo, Fraction(0)) / e)
        else:
            continue
        n_cap = c if n_cap is None else min(n_cap, c)
    neg = []
    i = 0
    while alpha + i < 0:
        neg.append(alpha + i)
        i += 1
    k_neg = len(neg)
    if inverted and k_neg:
        raise SeriesError("inverted Pochhammer with negative q-exponents is not expandable in q")
    negsum = sum(neg, Fraction(0))
    budget = rect.q_max - negsum
    den = alpha.denominator
    qcap = _floor(rect.q_max * den)
    qcap_mid = _floor(budget * den)
    states = {(0, 0): 1}  # (N, scaled q) -> coeff
    i = 0
    while True:
        e = alpha + i
        if e > budget:
            break
        if e == 0 and not moving:
            if inverted:
                raise SeriesError("factor 1/(1 - 1) is undefined")
            return MSeries(rect.arity, 1, {}, rect, Cone.ray(a))
        if e <= 0 and inverted and not moving:
            raise SeriesError("infinitely many factors intersect the box")
        es = int(e * den)
        past_neg = i >= k_neg
        limit = qcap if past_neg else qcap_mid
        new: dict = {}
        if not inverted:
            for (n, q), c in states.items():
                new[(n, q)] = new.get((n, q), 0) + c
                n2, q2 = n + 1, q + es
                if (n_cap is None or n2 <= n_cap) and q2 <= qcap_mid:
                    new[(n2, q2)] = new.get((n2, q2), 0) - coeff * c
        else:
            if es == 0 and n_cap is None:
                raise SeriesError(f"powers of {a} never leave {rect}")
            # new = sum_r m^r * states; process in order of N so new[N-1] is final
            for key in sorted(states):
                n, q = key
                c = states[key]
                r = 0
                while True:
                    n2, q2 = n + r, q + r * es
                    if (n_cap is not None and n2 > n_cap) or q2 > qcap_mid:
                        break
                    new[(n2, q2)] = new.get((n2, q2), 0) + c * coeff ** r
                    r += 1
        states = {k: v for k, v in new.items() if v != 0 and k[1] <= limit}
        i += 1
        if not moving:
            states = {(0, q): v for q, v in _collapse(states).items()}
    # output in the box
    fden = den
    terms = {}
    for (n, q), c in states.items():
        if q > qcap:
            continue
        x = tuple(n * e for e in beta)
        if not all(lo <= v <= hi for v, (lo, hi) in zip(x, rect.windows)):
            continue
        m = Monomial(Fraction(q, fden), x)
        terms[m] = terms.get(m, 0) + c
    q_min = min(rect.q_min, negsum, rect.q_max)
    out_rect = Rect(rect.q_max, rect.windows, q_min)
    cone = Cone.ray(Monomial(alpha + k_neg, beta))
    if k_neg:
        cone = Cone(negsum - k_neg * (alpha + k_neg), cone.center, cone.up, cone.down, cone.lo, cone.hi)
    return MSeries.from_terms(terms, out_rect, cone)


def _collapse(states: dict) -> dict:
    out: dict = {}
    for (n, q), v in states.items():
        out[q] = out.get(q, 0) + v
    return {k: v for k, v in out.items() if v != 0}


def product(factors: Sequence[MSeries], rect: Rect) -> MSeries:
    """Multiply factors left to right and restrict to rect (raising if not certified)."""
    acc = factors[0]
    for f in factors[1:]:
        acc = mul(acc, f)
    return acc.restrict(rect)


def factor_box(rect: Rect, cones: Sequence[Cone], i: int) -> Rect:
    """Box on which factor i must be known so that the product of all factors is exact on rect.

    Factor i sees q up to rect.q_max minus the other floors; its x-window is
    rect's window widened by the other factors' x-ranges and clipped to its
    own range.
    """
    floors = [c.floor() for c in cones]
    if any(f is None for f in floors):
        raise RectError("factor without a finite floor")
    total = sum(floors, Fraction(0))
    budget = [rect.q_max - (total - floors[j]) for j in range(len(cones))]
    windows = []
    for v, (lo, hi) in enumerate(rect.windows):
        wlo, whi = lo, hi
        for j, c in enumerate(cones):
            if j == i:
                continue
            r = c.x_range(v, budget[j])
            wlo = None if (wlo is None or r[1] is None) else wlo - r[1]
            whi = None if (whi is None or r[0] is None) else whi - r[0]
        own = cones[i].x_range(v, budget[i])
        if own[0] is not None:
            wlo = own[0] if wlo is None else max(wlo, own[0])
        if own[1] is not None:
            whi = own[1] if whi is None else min(whi, own[1])
        if wlo is None or whi is None:
            raise RectError(f"cannot bound the x-window of factor {i}")
        if wlo > whi:
            wlo = whi
        windows.append((wlo, whi))
    return Rect(budget[i], tuple(windows), min(Fraction(0), budget[i]))


def product_on(rect: Rect, makers: Sequence) -> MSeries:
    """Exact product of the series produced by makers (callables Rect -> MSeries) on rect.

    Each maker is first called on a trivial box to read off its cone; then
    every factor is built on the box `factor_box` asks for.
    """
    tiny = Rect(0, ((Fraction(0), Fraction(0)),) * rect.arity, 0)
    cones = []
    for mk in makers:
        c = mk(tiny).support
        if c is None:
            raise RectError("product_on needs factors with a support cone")
        cones.append(c)
    cone = cones[0]
    for c in cones[1:]:
        cone = cone.minkowski(c)
    out_rect = Rect(rect.q_max, rect.windows, min(rect.q_min, rect.q_max))
    floor = cone.floor()
    if floor is not None and rect.q_max < floor:
        return MSeries(rect.arity, 1, {}, out_rect, cone)
    # the cone certifies zeros outside its x-range, so only the reachable part is computed
    clipped = []
    for v, (lo, hi) in enumerate(rect.windows):
        clo, chi = cone.x_range(v, rect.q_max)
        lo2 = lo if clo is None else max(lo, clo)
        hi2 = hi if chi is None else min(hi, chi)
        if lo2 > hi2:
            return MSeries(rect.arity, 1, {}, out_rect, cone)
        clipped.append((lo2, hi2))
    inner = Rect(rect.q_max, tuple(clipped), rect.q_min)
    factors = [mk(factor_box(inner, cones, i)) for i, mk in enumerate(makers)]
    res = product(factors, inner)
    return MSeries(res.arity, res.den, res._terms, out_rect, res.support)
