"""Verification suites shared by the command line and the acceptance tests.

Each suite returns a `SuiteResult`: one `CaseResult` per checked identity,
with the first differing monomial when a check fails.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

from .admissible import AdmissibleLabel, crosscheck_report
from .charlib import (
    AFFINE, N2, Character, chiral_verma, rebuild, relaxed_verma, theta, verma_affine, verma_n2,
)
from .coset import (
    equal_characters, flow_equivariance, omega_minus, omega_plus, verify_branching,
)
from .parallel import pmap
from .qseries import EqualityReport, Rect, RatLike, equal_on, rat, rat_str

SUITES = ("triple-product", "roundtrip", "branching", "flow-equivariance", "crosscheck")

TINY = Rect.box(0, 0)


@dataclass(frozen=True)
class CaseResult:
    name: str
    equal: bool
    first_difference: Optional[tuple] = None

    def to_json(self) -> dict:
        d = {"case": self.name, "equal": self.equal}
        if self.first_difference is not None:
            m, a, b = self.first_difference
            d["firstDifference"] = {"monomial": m.to_json(), "left": rat_str(Fraction(a)),
                                    "right": rat_str(Fraction(b))}
        return d


@dataclass(frozen=True)
class SuiteResult:
    suite: str
    params: dict
    cases: tuple = field(default_factory=tuple)

    @property
    def passed(self) -> bool:
        return bool(self.cases) and all(c.equal for c in self.cases)

    def to_json(self) -> dict:
        return {"suite": self.suite, "params": self.params, "passed": self.passed,
                "cases": [c.to_json() for c in self.cases]}


def _case(name: str, rep) -> CaseResult:
    return CaseResult(name, rep.equal, rep.first_difference)


# ------------------------------------------------------------------ suites


def triple_product(q_max: RatLike, window: RatLike) -> SuiteResult:
    rect = Rect.box(q_max, window)
    rep = equal_on(theta(rect, "product"), theta(rect, "sum"), rect)
    return SuiteResult("triple-product", {"qmax": rat_str(rat(q_max)), "window": rat_str(rat(window))},
                       (_case("theta product = sum", rep),))


def _source_box(rect: Rect) -> Rect:
    """Box that survives one row shift by -n^2/2 over rect's window and still covers rect."""
    lo, hi = rect.windows[0]
    top = max(lo * lo, hi * hi) / 2
    return Rect(rect.q_max + top, rect.windows, min(0, rect.q_max))


def _plus_then_minus(chr_: Character, rect: Rect) -> EqualityReport:
    """omega_minus(omega_plus(chr)) against chr on rect; chr is an affine constructor character."""
    back = omega_minus(omega_plus(rebuild(chr_, _source_box(rect))), chr_.j)
    return equal_characters(rebuild(chr_, rect), back, rect)


def _minus_then_plus(chr_: Character, aff_j: Fraction, rect: Rect) -> EqualityReport:
    """omega_plus(omega_minus(chr)) against chr on rect; chr is an N=2 constructor character."""
    back = omega_plus(omega_minus(rebuild(chr_, _source_box(rect)), aff_j), aff_j)
    return equal_characters(rebuild(chr_, rect), back, rect)


def _roundtrip_cases(k: Fraction) -> list:
    h, j = Fraction(1, 5), Fraction(1, 3)
    return [
        ("plus-minus relaxed", "pm", relaxed_verma(k, h, j, TINY)),
        ("plus-minus affine", "pm", verma_affine(k, j, TINY)),
        ("minus-plus n2", "mp", verma_n2(k, h, 2 * j / (k + 2), TINY)),
        ("minus-plus chiral", "mp", chiral_verma(k, 2 * j / (k + 2), TINY)),
    ]


def _roundtrip_job(args) -> CaseResult:
    name, mode, chr_, rect = args
    if mode == "pm":
        return _case(name, _plus_then_minus(chr_, rect))
    k = chr_.ctx.k
    return _case(name, _minus_then_plus(chr_, chr_.j * (k + 2) / 2, rect))


def roundtrip(q_max: RatLike, window: RatLike, k: RatLike = 1) -> SuiteResult:
    rect = Rect.box(q_max, window)
    jobs = [(f"{n} k={rat_str(rat(k))}", m, c, rect) for n, m, c in _roundtrip_cases(rat(k))]
    return SuiteResult("roundtrip", {"qmax": rat_str(rat(q_max)), "window": rat_str(rat(window)),
                                     "k": rat_str(rat(k))}, tuple(pmap(_roundtrip_job, jobs)))


BRANCHING_LEVELS = (Fraction(1), Fraction(1, 3))


def branching_bases(k: Fraction) -> list:
    """(side, base) pairs with generic weights inside their blocks."""
    return [
        (AFFINE, relaxed_verma(k, Fraction(1, 5), Fraction(1, 3), TINY)),
        (AFFINE, verma_affine(k, Fraction(1, 2), TINY)),
        (N2, verma_n2(k, Fraction(1, 7), Fraction(1, 3), TINY)),
    ]


def _branching_job(args) -> CaseResult:
    side, base, th, rect3, signs = args
    rep = verify_branching(side, base, th, rect3, signs)
    k = rat_str(base.ctx.k)
    tag = "" if signs == (1, -1) else " negative-control"
    return CaseResult(f"{base.kind} k={k} theta={th}{tag}", rep.equal, rep.first_difference)


def branching(q_max: RatLike, window: RatLike, thetas=(-1, 0, 1), levels=BRANCHING_LEVELS) -> SuiteResult:
    rect3 = Rect.box(q_max, window, arity=3)
    jobs = [(side, base, th, rect3, (1, -1))
            for k in levels for side, base in branching_bases(rat(k)) for th in thetas]
    return SuiteResult("branching", {"qmax": rat_str(rat(q_max)), "window": rat_str(rat(window))},
                       tuple(pmap(_branching_job, jobs)))


def branching_negative_control(q_max: RatLike, window: RatLike) -> CaseResult:
    """The branching check with the Fock weights' signs swapped; it must fail."""
    side, base = branching_bases(Fraction(1))[1]
    return _branching_job((side, base, 0, Rect.box(q_max, window, arity=3), (-1, 1)))


def _equivariance_job(args) -> CaseResult:
    name, base, a, b, j, rect = args
    return _case(name, flow_equivariance(base, a, b, j, rect))


def flow_equivariance_suite(q_max: RatLike, window: RatLike, k: RatLike = Fraction(1, 3),
                            span: int = 2) -> SuiteResult:
    rect = Rect.box(q_max, window)
    k = rat(k)
    bases = [("relaxed", relaxed_verma(k, Fraction(1, 2), Fraction(1, 2), TINY), Fraction(1, 2)),
             ("affine", verma_affine(k, Fraction(1, 2), TINY), Fraction(-1, 2))]
    jobs = [(f"{name} a={a} b={b}", base, a, b, j, rect)
            for name, base, j in bases for a in range(-span, span + 1) for b in range(-span, span + 1)]
    return SuiteResult("flow-equivariance", {"qmax": rat_str(rat(q_max)), "window": rat_str(rat(window)),
                                             "k": rat_str(k)}, tuple(pmap(_equivariance_job, jobs)))


def crosscheck(label: AdmissibleLabel, q_max: RatLike, window: RatLike) -> SuiteResult:
    rep = crosscheck_report(label, Rect.box(q_max, window))
    params = {"qmax": rat_str(rat(q_max)), "window": rat_str(rat(window)), "label": label.to_json()}
    return SuiteResult("crosscheck", params, tuple(_case(name, r) for name, r in rep.checks))


def run_suite(name: str, q_max: RatLike, window: RatLike, label: Optional[AdmissibleLabel] = None,
              k: Optional[RatLike] = None) -> SuiteResult:
    if name == "triple-product":
        return triple_product(q_max, window)
    if name == "roundtrip":
        return roundtrip(q_max, window, 1 if k is None else k)
    if name == "branching":
        return branching(q_max, window, levels=BRANCHING_LEVELS if k is None else (rat(k),))
    if name == "flow-equivariance":
        return flow_equivariance_suite(q_max, window, Fraction(1, 3) if k is None else k)
    if name == "crosscheck":
        if label is None:
            raise ValueError("the crosscheck suite needs --p --pp --r --s")
        return crosscheck(label, q_max, window)
    raise ValueError(f"unknown suite {name!r}")
