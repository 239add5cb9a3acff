"""Double-precision evaluation of truncated characters.

Rational powers use the principal branch: q^e = exp(e * Log q) with the
principal logarithm, and likewise for x.  The exponent of each term is
summed exactly (prefactor plus body) before it is exponentiated.
"""
from __future__ import annotations

import cmath
import csv
import io
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Sequence, Union

from .charlib import Character
from .qseries import MSeries, Monomial


@dataclass(frozen=True)
class EvalPoint:
    q: complex
    x: complex = 1.0


def in_region_A(p: EvalPoint) -> bool:
    """0 < |q| < 1 and |q|^(1/2) < |x| < |q|^(-1/2)."""
    aq, ax = abs(p.q), abs(p.x)
    if not 0 < aq < 1:
        return False
    r = math.sqrt(aq)
    return r < ax < 1 / r


def _power(log_z: complex, e: Fraction) -> complex:
    return cmath.exp(float(e) * log_z) if e else 1.0


def eval_series(s: MSeries, p: EvalPoint, shift: Monomial = None) -> complex:
    """Sum of c * q^a x^b over the stored terms, after multiplying by shift."""
    if s.arity > 1:
        raise ValueError("evaluation is defined for series in at most one x-variable")
    lq = cmath.log(complex(p.q))
    lx = cmath.log(complex(p.x)) if s.arity else 0j
    sq = shift.q if shift is not None else Fraction(0)
    sx = shift.x[0] if shift is not None and shift.arity else Fraction(0)
    total = 0j
    for m, c in s.items():
        e = _power(lq, m.q + sq)
        if s.arity:
            e *= _power(lx, m.x[0] + sx)
        total += float(c) * e
    return total


def evaluate(obj: Union[Character, MSeries], p: EvalPoint) -> complex:
    """Evaluate a character (prefactor included) or a bare series at p."""
    if isinstance(obj, Character):
        return eval_series(obj.body, p, obj.prefactor)
    return eval_series(obj, p)


@dataclass(frozen=True)
class StabilizationRow:
    order: int
    value: complex
    rel_diff: float  # relative change from the previous order; nan for the first


@dataclass(frozen=True)
class StabilizationReport:
    point: EvalPoint
    rows: tuple
    tolerance: float = 1e-8

    @property
    def stabilizes(self) -> bool:
        return len(self.rows) > 1 and self.rows[-1].rel_diff < self.tolerance

    @property
    def final(self) -> complex:
        return self.rows[-1].value

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["order", "value_re", "value_im", "rel_diff"])
        for r in self.rows:
            w.writerow([r.order, repr(r.value.real), repr(r.value.imag),
                        "" if math.isnan(r.rel_diff) else repr(r.rel_diff)])
        return buf.getvalue()

    def to_json(self) -> dict:
        return {
            "point": {"q": _pair(self.point.q), "x": _pair(self.point.x)},
            "stabilizes": self.stabilizes,
            "rows": [{"order": r.order, "re": r.value.real, "im": r.value.imag,
                      "relDiff": None if math.isnan(r.rel_diff) else r.rel_diff} for r in self.rows],
        }


def _pair(z) -> list:
    z = complex(z)
    return [z.real, z.imag]


def stabilization(family: Callable[[int], Union[Character, MSeries]], p: EvalPoint,
                  orders: Sequence[int], tolerance: float = 1e-8) -> StabilizationReport:
    """Evaluate family(order) at p for each order and record successive relative changes."""
    rows = []
    prev = None
    for n in orders:
        v = complex(evaluate(family(n), p))
        if prev is None:
            d = float("nan")
        else:
            d = abs(v - prev) / abs(v) if v != 0 else (0.0 if prev == 0 else float("inf"))
        rows.append(StabilizationRow(n, v, d))
        prev = v
    return StabilizationReport(p, tuple(rows), tolerance)


def row_window(order: int) -> int:
    """x-window that holds every weight of an N=2 Verma module with relative q-exponent <= order.

    The x^n terms of the N=2 Verma body start at q^(n^2/2), so |n| <= sqrt(2 order).
    """
    return math.isqrt(2 * order) + 2
