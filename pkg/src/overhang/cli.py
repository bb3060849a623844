"""Command-line front end.

Exit codes: 0 success (balanced, converted, found), 1 a negative answer
(unbalanced, conversion failed), 2 invalid input.  Numbers are printed with
10 significant digits.  Documents are read from a path or ``-`` for stdin
and written to ``-o`` or stdout.
"""

from __future__ import annotations

import argparse
import sys
from fractions import Fraction

from . import io
from .balance import DEFAULT_TOL, UnsupportedModeError, is_balanced
from .model import InvalidGeometryError, Stack, make_diamond, make_harmonic, make_inverted_triangle, overhang

EXIT_OK, EXIT_NO, EXIT_INVALID = 0, 1, 2


class UsageError(Exception):
    pass


def fmt(v) -> str:
    return f"{float(v):.10g}"


def _read_text(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    try:
        with open(path, encoding="utf-8") as fh:
            return fh.read()
    except OSError as exc:
        raise UsageError(f"{path}: {exc.strerror}") from None


def _read_stack(path: str, exact: bool = False) -> Stack:
    try:
        return io.loads(_read_text(path), exact=exact)
    except io.DocumentError as exc:
        raise UsageError(f"{path}: {exc}") from None


def _emit(text: str, out) -> None:
    if out in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)


def _info(args, msg: str) -> None:
    """Reports go to stdout unless a document is being written there."""
    stream = sys.stderr if getattr(args, "output", None) in (None, "-") and getattr(args, "emits", False) else sys.stdout
    print(msg, file=stream)


# -- verify --------------------------------------------------------------------------


def cmd_verify(args) -> int:
    stack = _read_stack(args.file, exact=args.mode == "exact")
    try:
        res = is_balanced(stack, mode=args.mode, tol=args.tol)
    except UnsupportedModeError as exc:
        raise UsageError(str(exc)) from None
    print(f"stack: {stack.name or args.file}")
    print(f"blocks: {stack.n}  point weights: {len(stack.weights)}  total weight: {fmt(stack.total_weight)}")
    if stack.n:
        print(f"overhang: {fmt(overhang(stack))}")
    print(f"mode: {args.mode}")
    if res.balanced:
        active = [fv for fv in res.witness if fv.magnitude != 0]
        print("verdict: balanced")
        print(f"witness: {len(active)} non-zero end forces of {len(res.witness)}; residual {fmt(res.residual)}")
        if args.forces:
            for fv in res.witness:
                c = fv.contact
                lower = "table" if c.on_table else f"block {c.lower}"
                print(f"  block {c.upper} on {lower} at x={fmt(fv.position)}: {fmt(fv.magnitude)}")
        return EXIT_OK
    print("verdict: unbalanced")
    if res.certificate is not None:
        nonzero = sum(1 for v in res.certificate if v != 0)
        print(f"certificate: Farkas multipliers on {nonzero} of {len(res.certificate)} equations")
    else:
        print(f"certificate: none (smallest residual {fmt(res.residual)})")
    return EXIT_NO


# -- build ---------------------------------------------------------------------------


def _positive_int(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise UsageError(f"expected a positive integer, got {text!r}") from None
    if v < 1:
        raise UsageError(f"expected a positive integer, got {text!r}")
    return v


def cmd_build(args) -> int:
    from . import parabolic, spinal

    order = None
    p = args.param
    if args.family == "harmonic":
        stack = make_harmonic(_positive_int(p))
    elif args.family == "triangle":
        stack = make_inverted_triangle(_positive_int(p))
    elif args.family == "diamond":
        stack = make_diamond(_positive_int(p))
    elif args.family == "parabolic":
        d = _positive_int(p)
        if d < 2:
            raise UsageError("parabolic stacks need d >= 2")
        stack = parabolic.build_parabolic(d).stack
    elif args.family == "modified":
        d = _positive_int(p)
        if d < 2:
            raise UsageError("modified parabolic stacks need d >= 2")
        stack, order = parabolic.build_modified_parabolic(d)
    else:  # sqrt-spinal
        try:
            w = float(p)
        except ValueError:
            raise UsageError(f"expected a weight, got {p!r}") from None
        if not w >= 1:
            raise UsageError("weight must be at least 1")
        stack = spinal.sqrt_construction(w).to_stack()
    _emit(io.dumps(stack), args.output)
    _info(args, f"{stack.name}: {stack.n} blocks, overhang {fmt(overhang(stack))}")
    if order is not None:
        _info(args, "laying order: " + " ".join(str(i) for i in order))
    return EXIT_OK


# -- spinal --------------------------------------------------------------------------


def cmd_spinal(args) -> int:
    from . import spinal

    w = args.weight
    if not w >= 1:
        raise UsageError("weight must be at least 1")
    try:
        if args.construction == "sqrt":
            design = spinal.sqrt_construction(w)
            print(f"sqrt construction S({fmt(w)}) = {fmt(design.overhang)}")
            k = design.k
        elif args.k is not None:
            opt = spinal.optimize_fixed_k(w, args.k, args.no_top_weight)
            design, k = opt.design, args.k
            print(f"S*_{k}({fmt(w)}) = {fmt(opt.value)}")
        else:
            opt = spinal.optimize(w, args.no_top_weight)
            design, k = opt.design, opt.k_star
            print(f"S*({fmt(w)}) = {fmt(opt.value)}")
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    print(f"k* = {k}")
    print("weights (top first): " + " ".join(fmt(v) for v in design.weights))
    print("displacements: " + " ".join(fmt(v) for v in design.displacements))
    if args.output:
        _emit(io.dumps(design.to_stack()), args.output)
    return EXIT_OK


# -- convert -------------------------------------------------------------------------


def _design_from_stack(stack: Stack):
    """Recover a spinal design from a loaded spine document."""
    from .spinal import balance_displacements

    if not stack.n:
        raise UsageError("empty stack")
    order = sorted(range(stack.n), key=lambda i: -stack.blocks[i].level)
    levels = [stack.blocks[i].level for i in order]
    if levels != list(range(stack.n - 1, -1, -1)):
        raise UsageError("convert needs a spine: one block per level")
    weights = [0] * stack.n
    rank = {i: r for r, i in enumerate(order)}
    for pw in stack.weights:
        if pw.position != stack.blocks[pw.block].x:
            raise UsageError(f"point weight on block {pw.block} is not at its left edge")
        weights[rank[pw.block]] += pw.magnitude
    design = balance_displacements(weights)
    xs = design.positions()
    for r, i in enumerate(order):
        if abs(float(stack.blocks[i].x) - float(xs[r])) > 1e-6:
            raise UsageError("spine positions do not match its weights")
    return design


def cmd_convert(args) -> int:
    from . import shield, spinal

    if args.weight is not None:
        w = args.weight
        if not w >= 1:
            raise UsageError("weight must be at least 1")
        design = spinal.optimize(w).design
    elif args.file:
        design = _design_from_stack(_read_stack(args.file))
    else:
        raise UsageError("give a spine document or --weight")
    total = float(design.total_weight)
    if abs(total - round(total)) > 1e-6:
        print(f"conversion failed: total weight {fmt(total)} is not a whole number of blocks")
        return EXIT_NO
    res = shield.convert(design)
    _info(args, res.report())
    if not res.success:
        return EXIT_NO
    _emit(io.dumps(res.stack), args.output)
    return EXIT_OK


# -- search --------------------------------------------------------------------------


def cmd_search_exhaustive(args) -> int:
    from .search.structures import exhaustive_D

    if not 1 <= args.n <= 7:
        raise UsageError("exhaustive search is limited to 1 <= n <= 7")
    value, stack = exhaustive_D(args.n, starts=args.starts, seed=args.seed)
    if value is None:
        print(f"D({args.n}): no balanced structure found")
        return EXIT_NO
    print(f"D({args.n}) = {fmt(value)}")
    if args.output:
        _emit(io.dumps(stack), args.output)
    return EXIT_OK


def cmd_search_brickwall(args) -> int:
    from .search import brickwall as bw

    target = Fraction(args.overhang).limit_denominator(2)
    if target != Fraction(args.overhang) or target < Fraction(1, 2):
        raise UsageError("overhang must be a positive multiple of 1/2")
    symmetric = not args.asymmetric
    if args.standard:
        if not symmetric:
            raise UsageError("standard search is only implemented for symmetric profiles")
        res = bw.standard_search(target)
        profile = res.profile
        print(f"standard symmetric brick-wall stack, overhang {fmt(target)}: {profile.n_blocks} blocks")
        stack = profile.to_stack()
        ok = is_balanced(stack).balanced
    else:
        res = bw.best_of_seeds(target, symmetric=symmetric)
        profile = res.profile
        kind = "symmetric" if symmetric else "asymmetric"
        print(f"{kind} loaded brick-wall stack, overhang {fmt(target)}: weight {fmt(res.weight)}")
        print(f"blocks: {profile.n_blocks}  levels: {profile.height}")
        asg = bw.propagate_well_behaved(profile)
        stack = asg.loaded_stack(res.weight)
        ok = True
    print(f"levels (width, left) bottom first: " + " ".join(f"({w},{fmt(a)})" for a, w in zip(profile.lefts, profile.widths)))
    if args.output:
        _emit(io.dumps(stack), args.output)
    if args.profile:
        _emit(io.profile_dumps(profile), args.profile)
    if args.outline:
        _emit(bw.outline_csv(profile), args.outline)
    return EXIT_OK if ok else EXIT_NO


# -- render --------------------------------------------------------------------------


def cmd_render(args) -> int:
    from .render import RenderSpec, render_svg

    stack = _read_stack(args.file)
    try:
        spec = RenderSpec(
            scale=args.scale,
            show_forces=args.forces,
            show_point_weights=not args.no_weights,
            shading=not args.no_shading,
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    svg = render_svg(stack, spec)
    if "stack is not balanced" in svg:
        print("warning: stack is not balanced", file=sys.stderr)
    _emit(svg, args.output)
    return EXIT_OK


# -- parser --------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="overhang",
        description="Balance checks, spinal and parabolic stacks, conversion and search for 2-D block stacks.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("verify", help="decide whether a stack document is balanced")
    p.add_argument("file", help="stack document, or - for stdin")
    p.add_argument("--mode", choices=("float", "exact"), default="float")
    p.add_argument("--tol", type=float, default=DEFAULT_TOL, help="float-mode residual tolerance")
    p.add_argument("--forces", action="store_true", help="list the witness forces")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("build", help="write a stack of a named family")
    p.add_argument("family", choices=("harmonic", "triangle", "diamond", "parabolic", "modified", "sqrt-spinal"))
    p.add_argument("param", help="n, m, d or the weight for sqrt-spinal")
    p.add_argument("-o", "--output", help="document path (default stdout)")
    p.set_defaults(func=cmd_build, emits=True)

    p = sub.add_parser("spinal", help="optimal loaded spinal stacks")
    p.add_argument("--weight", "-w", type=float, required=True)
    p.add_argument("--k", type=int, help="fix the number of spine blocks")
    p.add_argument("--construction", choices=("optimal", "sqrt"), default="optimal")
    p.add_argument("--no-top-weight", action="store_true", help="no point weight on the top block")
    p.add_argument("-o", "--output", help="write the loaded spine document")
    p.set_defaults(func=cmd_spinal)

    p = sub.add_parser("convert", help="turn a loaded spinal stack into a standard stack")
    p.add_argument("file", nargs="?", help="loaded spine document, or - for stdin")
    p.add_argument("--weight", "-w", type=float, help="use the optimal spine of this total weight")
    p.add_argument("-o", "--output", help="document path (default stdout)")
    p.set_defaults(func=cmd_convert, emits=True)

    p = sub.add_parser("search", help="search for good stacks")
    ssub = p.add_subparsers(dest="kind", required=True)
    q = ssub.add_parser("exhaustive", help="best overhang over all small structures")
    q.add_argument("n", type=int)
    q.add_argument("--starts", type=int, default=20)
    q.add_argument("--seed", type=int, default=0)
    q.add_argument("-o", "--output", help="write the best stack")
    q.set_defaults(func=cmd_search_exhaustive)
    q = ssub.add_parser("brickwall", help="local search over brick-wall profiles")
    q.add_argument("--overhang", type=float, required=True)
    side = q.add_mutually_exclusive_group()
    side.add_argument("--symmetric", action="store_true", help="symmetric about x = 0 (default)")
    side.add_argument("--asymmetric", action="store_true")
    q.add_argument("--standard", action="store_true", help="no point weights: fewest blocks")
    q.add_argument("-o", "--output", help="write the stack document")
    q.add_argument("--profile", help="write the profile document")
    q.add_argument("--outline", help="write the scaled outline as CSV")
    q.set_defaults(func=cmd_search_brickwall)

    p = sub.add_parser("render", help="draw a stack document as SVG")
    p.add_argument("file", help="stack document, or - for stdin")
    p.add_argument("-o", "--output", help="SVG path (default stdout)")
    p.add_argument("--scale", type=float, default=40.0, help="pixels per block length")
    p.add_argument("--forces", action="store_true", help="draw the witness forces")
    p.add_argument("--no-weights", action="store_true", help="hide point-weight arrows")
    p.add_argument("--no-shading", action="store_true", help="do not shade support and balancing sets")
    p.set_defaults(func=cmd_render)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INVALID if exc.code not in (0, None) else EXIT_OK
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except InvalidGeometryError as exc:
        print(f"error: invalid geometry: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
