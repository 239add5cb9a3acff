"""Command line: `charkit {char,flow,coset,verify,admissible,eval} ...`.

Exit status is 0 on success, 1 when a verification finds a differing
coefficient, 2 on usage or input errors.
"""
from __future__ import annotations

import argparse
import json
import re
import sys
from fractions import Fraction
from typing import Optional

from . import admissible as adm
from .charlib import (
    Character, chiral_verma, eta, fock_char, lattice_char, rebuild, relaxed_verma, theta, verma_affine,
    verma_n2, as_ctx, normalize,
)
from .coset import flowed, omega_minus, omega_plus, spectral_flow
from .numeric import EvalPoint, row_window, stabilization
from .qseries import MSeries, Rect, SeriesError, rat_str
from .verify import SUITES, run_suite

DEFAULT_QMAX = 6
DEFAULT_WINDOW = 4

_RAT = re.compile(r"^[+-]?\d+(/\d+)?$")


class UsageError(Exception):
    pass


def parse_rat(text: str) -> Fraction:
    """An integer or a/b; decimals are rejected."""
    t = text.strip()
    if not _RAT.match(t):
        raise argparse.ArgumentTypeError(f"not an exact rational: {text!r} (use an integer or a/b)")
    return Fraction(t)


def parse_int(text: str) -> int:
    t = text.strip()
    if not re.match(r"^[+-]?\d+$", t):
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}")
    return int(t)


def parse_complex(text: str) -> complex:
    try:
        return complex(text.replace(" ", ""))
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None


def parse_orders(text: str) -> list:
    try:
        out = [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"orders must be comma-separated integers: {text!r}") from None
    if not out or any(v < 0 for v in out):
        raise argparse.ArgumentTypeError("orders must be non-negative integers")
    return out


# ------------------------------------------------------------------ parser

CHAR_KINDS = (
    "affine-verma", "relaxed-verma", "n2-verma", "chiral-verma", "antichiral-verma",
    "fock-plus", "fock-minus", "lattice-plus", "lattice-minus", "eta", "theta",
    "irreducible-affine", "irreducible-n2", "fsst",
)


def _add_box(p: argparse.ArgumentParser, required: bool = False) -> None:
    p.add_argument("--qmax", type=parse_rat, default=None if required else DEFAULT_QMAX)
    p.add_argument("--window", type=parse_rat, default=None if required else DEFAULT_WINDOW)


def _add_label(p: argparse.ArgumentParser) -> None:
    for name in ("p", "pp", "r", "s"):
        p.add_argument(f"--{name}", type=parse_int)


def _add_output(p: argparse.ArgumentParser, formats=("json", "text")) -> None:
    p.add_argument("--format", choices=formats, default="json")
    p.add_argument("--out", default=None, help="write to this file instead of stdout")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="charkit", description="Exact characters of affine sl2 and N=2 modules.")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("char", help="build a character")
    p.add_argument("--kind", required=True, choices=CHAR_KINDS)
    p.add_argument("--h", type=parse_rat, default=Fraction(0))
    p.add_argument("--j", type=parse_rat, default=Fraction(0))
    p.add_argument("--k", type=parse_rat, default=None)
    p.add_argument("--c", type=parse_rat, default=None, help="central charge instead of --k")
    p.add_argument("--form", choices=("sum", "product"), default="sum", help="for --kind theta")
    p.add_argument("--normalize", action="store_true", help="multiply by q^(-c/24)")
    _add_label(p)
    _add_box(p)
    _add_output(p)

    p = sub.add_parser("flow", help="spectral flow of a character")
    p.add_argument("--side", required=True, choices=("affine", "n2"))
    p.add_argument("--theta", required=True, type=parse_int)
    p.add_argument("--in", dest="infile", required=True)
    _add_box(p, required=True)
    _add_output(p)

    p = sub.add_parser("coset", help="apply Omega+ or Omega- to a character")
    p.add_argument("--dir", required=True, choices=("plus", "minus"))
    p.add_argument("--j", type=parse_rat, default=None, help="affine weight that anchors the map")
    p.add_argument("--in", dest="infile", required=True)
    _add_output(p)

    p = sub.add_parser("verify", help="run a verification suite")
    p.add_argument("--suite", required=True, choices=SUITES)
    p.add_argument("--k", type=parse_rat, default=None)
    _add_label(p)
    _add_box(p)
    _add_output(p)

    p = sub.add_parser("admissible", help="resolution terms at an admissible level")
    _add_label(p)
    p.add_argument("--char", choices=("none", "affine", "n2", "fsst"), default="none")
    _add_box(p)
    _add_output(p)

    p = sub.add_parser("eval", help="evaluate a character at increasing truncation orders")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--q", required=True, type=parse_complex)
    p.add_argument("--x", type=parse_complex, default=1.0)
    p.add_argument("--orders", type=parse_orders, default=[20, 30, 40])
    p.add_argument("--window", type=parse_rat, default=None,
                   help="x-window for rebuilt constructor characters (default grows with the order)")
    p.add_argument("--normalize", action="store_true", help="multiply each truncation by q^(-c/24)")
    _add_output(p, ("json", "text", "csv"))
    return ap


# ------------------------------------------------------------------ helpers


def _label(args) -> adm.AdmissibleLabel:
    vals = [args.p, args.pp, args.r, args.s]
    if any(v is None for v in vals):
        raise UsageError("--p --pp --r --s are all required")
    try:
        return adm.AdmissibleLabel(*vals)
    except ValueError as e:
        raise UsageError(str(e)) from None


def _ctx(args):
    if args.k is not None and args.c is not None:
        raise UsageError("give --k or --c, not both")
    if args.c is not None:
        return as_ctx(args.c, central_charge=True)
    return as_ctx(Fraction(1) if args.k is None else args.k)


def _load(path: str):
    try:
        with open(path) as f:
            d = json.load(f)
    except OSError as e:
        raise UsageError(f"cannot read {path}: {e.strerror}") from None
    except json.JSONDecodeError as e:
        raise UsageError(f"{path} is not JSON: {e}") from None
    if "kind" in d:
        return Character.from_json(d)
    return MSeries.from_json(d)


def _load_character(path: str) -> Character:
    obj = _load(path)
    if not isinstance(obj, Character):
        raise UsageError(f"{path} holds a bare series, not a character")
    return obj


def build_char(args) -> object:
    kind = args.kind
    rect = Rect.box(args.qmax, args.window)
    if kind == "eta":
        return eta(Rect.box(args.qmax, arity=0))
    if kind == "theta":
        return theta(rect, args.form)
    if kind in ("irreducible-affine", "irreducible-n2", "fsst"):
        label = _label(args)
        if kind == "irreducible-affine":
            return adm.irreducible_affine_char(label, rect)
        if kind == "irreducible-n2":
            return adm.irreducible_n2_char(label, rect)
        return adm.fsst_character(label, rect)
    if kind in ("fock-plus", "fock-minus"):
        sign = 1 if kind == "fock-plus" else -1
        return fock_char(sign, args.j, rect)
    if kind in ("lattice-plus", "lattice-minus"):
        return lattice_char(1 if kind == "lattice-plus" else -1, rect)
    ctx = _ctx(args)
    if kind == "affine-verma":
        return verma_affine(ctx, args.j, rect)
    if kind == "relaxed-verma":
        return relaxed_verma(ctx, args.h, args.j, rect)
    if kind == "n2-verma":
        return verma_n2(ctx, args.h, args.j, rect)
    return chiral_verma(ctx, args.j, rect, "chiral" if kind == "chiral-verma" else "antichiral")


# ------------------------------------------------------------------ text output


def _table(rows: list, header: list) -> str:
    rows = [[str(v) for v in r] for r in rows]
    widths = [max(len(h), *(len(r[i]) for r in rows)) if rows else len(h) for i, h in enumerate(header)]
    lines = ["  ".join(h.ljust(w) for h, w in zip(header, widths)).rstrip()]
    for r in rows:
        # the first column is a label, the rest are numbers
        cells = [r[0].ljust(widths[0])] + [v.rjust(w) for v, w in zip(r[1:], widths[1:])]
        lines.append("  ".join(cells).rstrip())
    return "\n".join(lines) + "\n"


def _series_text(s: MSeries) -> str:
    rows = [[rat_str(m.q)] + [rat_str(e) for e in m.x] + [rat_str(c)] for m, c in s.items()]
    header = ["q"] + [f"x{i + 1}" if s.arity > 1 else "x" for i in range(s.arity)] + ["coeff"]
    r = s.rect
    box = f"box: q in [{rat_str(r.q_min)}, {rat_str(r.q_max)}]" + "".join(
        f", x in [{rat_str(lo)}, {rat_str(hi)}]" for lo, hi in r.windows)
    return box + "\n" + _table(rows, header)


def _char_text(c: Character) -> str:
    k = rat_str(c.ctx.k) if c.ctx is not None else "-"
    head = f"kind: {c.kind}  side: {c.side}  k: {k}  prefactor: {c.prefactor}\n"
    return head + _series_text(c.body)


def _obj_text(obj) -> str:
    return _char_text(obj) if isinstance(obj, Character) else _series_text(obj)


def _suite_text(res) -> str:
    rows = []
    for c in res.cases:
        diff = ""
        if c.first_difference is not None:
            m, a, b = c.first_difference
            diff = f"{m}: {rat_str(Fraction(a))} vs {rat_str(Fraction(b))}"
        rows.append([c.name, "pass" if c.equal else "FAIL", diff])
    status = "passed" if res.passed else "FAILED"
    return f"suite {res.suite}: {status}\n" + _table(rows, ["case", "status", "first difference"])


def _terms_text(name: str, terms: list) -> str:
    rows = [[t.degree, "+" if t.sign > 0 else "-", t.n, rat_str(t.h), rat_str(t.j), t.flow, rat_str(t.offset)]
            for t in terms]
    return f"{name}\n" + _table(rows, ["degree", "sign", "n", "h", "j", "flow", "offset"])


# ------------------------------------------------------------------ commands


def cmd_char(args):
    obj = build_char(args)
    if args.normalize:
        if not isinstance(obj, Character):
            raise UsageError("--normalize applies to characters only")
        obj = normalize(obj)
    return 0, obj.to_json(), _obj_text(obj)


def cmd_flow(args):
    chr_ = _load_character(args.infile)
    if chr_.side != args.side:
        raise UsageError(f"the character lives on the {chr_.side} side, not {args.side}")
    if args.qmax is not None or args.window is not None:
        if args.qmax is None or args.window is None:
            raise UsageError("give both --qmax and --window, or neither")
        out = flowed(chr_, args.theta, Rect.box(args.qmax, args.window))
    else:
        out = spectral_flow(chr_, args.theta)
    return 0, out.to_json(), _char_text(out)


def cmd_coset(args):
    chr_ = _load_character(args.infile)
    out = omega_plus(chr_, args.j) if args.dir == "plus" else omega_minus(chr_, args.j)
    return 0, out.to_json(), _char_text(out)


def cmd_verify(args):
    label = _label(args) if args.suite == "crosscheck" else None
    res = run_suite(args.suite, args.qmax, args.window, label=label, k=args.k)
    return (0 if res.passed else 1), res.to_json(), _suite_text(res)


def cmd_admissible(args):
    label = _label(args)
    mal = adm.malikov_terms(label, args.qmax)
    bgg = adm.bgg_terms(label, args.qmax)
    payload = {
        "label": label.to_json(),
        "k": rat_str(label.k),
        "j": rat_str(label.j),
        "qmax": rat_str(args.qmax),
        "malikov": [t.to_json() for t in mal],
        "bgg": [t.to_json() for t in bgg],
    }
    text = f"k = {rat_str(label.k)}, j = {rat_str(label.j)}\n" + _terms_text("malikov", mal) + \
        _terms_text("bgg", bgg)
    if args.char != "none":
        rect = Rect.box(args.qmax, args.window)
        fn = {"affine": adm.irreducible_affine_char, "n2": adm.irreducible_n2_char,
              "fsst": adm.fsst_character}[args.char]
        c = fn(label, rect)
        payload["character"] = c.to_json()
        text += _char_text(c)
    return 0, payload, text


def _family(chr_: Character, window: Optional[Fraction], norm: bool):
    """Truncations of chr_ by order: constructors are rebuilt, derived characters are cut down."""
    constructor = chr_.kind != "Derived"

    def at(order: int) -> Character:
        if constructor:
            w = window if window is not None else row_window(order)
            out = rebuild(chr_, Rect.box(order, w))
        else:
            if order > chr_.rect.q_max:
                raise UsageError(f"this derived character is only known up to relative order "
                                 f"{rat_str(chr_.rect.q_max)}; rebuild it or lower --orders")
            out = chr_.restrict(Rect(order, chr_.rect.windows, chr_.rect.q_min))
        return normalize(out) if norm else out
    return at


def cmd_eval(args):
    obj = _load(args.infile)
    point = EvalPoint(args.q, args.x)
    if isinstance(obj, Character):
        fam = _family(obj, args.window, args.normalize)
    else:
        if args.normalize:
            raise UsageError("--normalize applies to characters only")
        if max(args.orders) > obj.rect.q_max:
            raise UsageError(f"the series is only known up to q^{rat_str(obj.rect.q_max)}")
        fam = lambda n: obj.restrict(Rect(Fraction(n), obj.rect.windows, obj.rect.q_min))
    rep = stabilization(fam, point, args.orders)
    text = rep.to_csv() if args.format == "csv" else _table(
        [[r.order, repr(r.value.real), repr(r.value.imag), "" if r.rel_diff != r.rel_diff else f"{r.rel_diff:.3e}"]
         for r in rep.rows], ["order", "re", "im", "rel_diff"])
    return 0, rep.to_json(), text


COMMANDS = {
    "char": cmd_char, "flow": cmd_flow, "coset": cmd_coset,
    "verify": cmd_verify, "admissible": cmd_admissible, "eval": cmd_eval,
}


def _emit(text: str, out: Optional[str]) -> None:
    if out:
        with open(out, "w") as f:
            f.write(text)
    else:
        sys.stdout.write(text)


def dumps(payload) -> str:
    return json.dumps(payload, indent=2) + "\n"


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code) if isinstance(e.code, int) else 2
    try:
        code, payload, text = COMMANDS[args.command](args)
    except UsageError as e:
        print(f"charkit: error: {e}", file=sys.stderr)
        return 2
    except (ValueError, SeriesError, KeyError, TypeError) as e:
        print(f"charkit: error: {e}", file=sys.stderr)
        return 2
    _emit(dumps(payload) if args.format == "json" else text, args.out)
    return code


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
