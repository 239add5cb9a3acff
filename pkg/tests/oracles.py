"""Independent reference computations, written without the package's series code.

Everything here works on plain dicts {(q, x): count} with Fraction exponents.
"""
from __future__ import annotations

from collections import Counter
from fractions import Fraction
from itertools import count

HALF = Fraction(1, 2)


def pbw_generators(kind: str, q_max: int) -> list:
    """Creation operators of a module as (q-weight, x-weight, fermionic).

    x tracks H_0/2 on the affine side and J_0 on the N=2 side.
    """
    gens = []
    n_range = range(1, q_max + 1)
    if kind in ("affine-verma", "relaxed-verma"):
        for n in n_range:
            gens += [(Fraction(n), 1, False), (Fraction(n), 0, False), (Fraction(n), -1, False)]
        if kind == "affine-verma":
            gens.append((Fraction(0), -1, False))  # F_0
    elif kind in ("n2-verma", "chiral-verma", "antichiral-verma"):
        for n in n_range:
            gens += [(Fraction(n), 0, False), (Fraction(n), 0, False)]  # L_-n, J_-n
        r = HALF
        while r <= q_max:
            if not (kind == "chiral-verma" and r == HALF):
                gens.append((r, 1, True))  # G+_-r
            if not (kind == "antichiral-verma" and r == HALF):
                gens.append((r, -1, True))  # G-_-r
            r += 1
    elif kind == "fock":
        gens = [(Fraction(n), 0, False) for n in n_range]
    else:
        raise ValueError(kind)
    return gens


def pbw_count(kind: str, q_max: int, window: int) -> dict:
    """Weight multiplicities of the PBW basis, relative to the highest weight.

    Ordered monomials in the generators are enumerated one generator at a
    time; q-free generators (F_0) are capped by how far x can come back.
    """
    gens = pbw_generators(kind, q_max)
    q_max = Fraction(q_max)
    # x can rise by at most one per unit of q, so x below -window - q_max never returns
    x_floor = -window - int(q_max)
    out = Counter()

    def rec(i: int, q: Fraction, x: int) -> None:
        if i == len(gens):
            out[(q, x)] += 1
            return
        gq, gx, ferm = gens[i]
        for e in count(0):
            if ferm and e > 1:
                break
            nq, nx = q + e * gq, x + e * gx
            if nq > q_max or (gq == 0 and nx < x_floor):
                break
            rec(i + 1, nq, nx)

    rec(0, Fraction(0), 0)
    if kind == "relaxed-verma":
        # the top space has every weight j + n once, so each x collects all PBW states of that q
        per_q = Counter()
        for (q, _), c in out.items():
            per_q[q] += c
        return {(q, x): c for q, c in per_q.items() for x in range(-window, window + 1)}
    return {k: c for k, c in out.items() if -window <= k[1] <= window}


def partition_counts(n_max: int) -> list:
    """p(0..n_max) by the recursion over the largest part."""
    table = [[0] * (n_max + 1) for _ in range(n_max + 1)]  # table[n][k]: parts <= k
    for k in range(n_max + 1):
        table[0][k] = 1
    for n in range(1, n_max + 1):
        for k in range(1, n_max + 1):
            table[n][k] = table[n][k - 1] + (table[n - k][k] if k <= n else 0)
    return [table[n][n] for n in range(n_max + 1)]


def pentagonal(n_max: int) -> dict:
    """sum_k (-1)^k q^{k(3k-1)/2} up to q^n_max, as {exponent: coefficient}."""
    out = {}
    k = 0
    while True:
        added = False
        for kk in ((k, -k) if k else (0,)):
            e = kk * (3 * kk - 1) // 2
            if e <= n_max:
                out[e] = out.get(e, 0) + (-1) ** abs(kk)
                added = True
        if not added and k > 0:
            break
        k += 1
    return {e: c for e, c in out.items() if c}


def triple_product_sum(q_max: int, window: int) -> dict:
    """sum_m q^{m^2/2} x^m inside the box."""
    out = {}
    for m in range(-window, window + 1):
        e = Fraction(m * m, 2)
        if e <= q_max:
            out[(e, m)] = 1
    return out


def as_dict(series) -> dict:
    """{(q, x): c} from an arity-1 or arity-0 MSeries."""
    out = {}
    for m, c in series.items():
        key = (m.q, int(m.x[0])) if m.x else m.q
        out[key] = c
    return out


def lattice_over_euler(quad, q_max, window: int) -> dict:
    """sum_n q^{quad(n)} x^n / (q;q) in the box, with partitions counted directly."""
    q_max = Fraction(q_max)
    p = partition_counts(int(q_max) + 1)
    out = {}
    for n in range(-window, window + 1):
        e0 = Fraction(quad(n))
        for i, c in enumerate(p):
            if e0 + i <= q_max:
                out[(e0 + i, n)] = c
    return out
