"""Command line driver for realization, localization and region tables.

Subcommands take a module as a preset name or a path to a presentation
file, a window of bidegrees, and write json, ascii or svg output to a
file or stdout.  Exit status is 0 on success, 1 when the input is
refused or a check fails, and 2 on usage errors.
"""

from __future__ import annotations

import argparse
import os
import sys

from .assembler import RhoCompleteError, realize
from .bigraded import Window, validate_module
from .charts import render
from .localization import complete, invert
from .periodicity import region
from .presentation import BudgetError, ParseError, expand, parse_presentation
from .presets import PRESET_NAMES, preset_presentation, resolve_preset


class UsageError(Exception):
    """A bad flag value noticed after argument parsing."""


def window_arg(text):
    try:
        ipart, jpart = text.split(",")
        imin, imax = (int(x) for x in ipart.split(":"))
        jmin, jmax = (int(x) for x in jpart.split(":"))
        w = Window(imin, imax, jmin, jmax)
        w.check()
        return w
    except ValueError:
        raise argparse.ArgumentTypeError(
            f"expected imin:imax,jmin:jmax, got {text!r}"
        ) from None


def _add_module_args(p):
    p.add_argument(
        "--module",
        required=True,
        help=f"preset name ({', '.join(sorted(PRESET_NAMES))}) or presentation file",
    )
    p.add_argument("--prime", type=int, default=None, help="coefficient prime")
    p.add_argument(
        "--window",
        type=window_arg,
        default=None,
        help="bidegree rectangle imin:imax,jmin:jmax",
    )


def _add_output_args(p):
    p.add_argument("--format", choices=("json", "ascii", "svg"), default="json")
    p.add_argument("--out", default=None, help="output path; stdout when omitted")


def _load_presentation(args):
    value = args.module
    try:
        resolve_preset(value)
    except ValueError:
        pass
    else:
        return preset_presentation(value, args.prime)
    if os.path.isfile(value):
        with open(value, encoding="utf-8") as fh:
            pres = parse_presentation(fh.read())
        if args.prime is not None and pres.prime != args.prime:
            raise ValueError(f"presentation is at prime {pres.prime}, got {args.prime}")
        return pres
    raise UsageError(f"--module: {value!r} is neither a preset nor a file")


def _emit(data, out):
    if out is None:
        sys.stdout.buffer.write(data)
        sys.stdout.buffer.flush()
    else:
        with open(out, "wb") as fh:
            fh.write(data)


def run_realize(args):
    pres = _load_presentation(args)
    report = realize(
        pres,
        args.prime,
        args.window,
        rho_complete=args.assert_rho_complete,
        pad=args.steps,
    )
    _emit(render(report, None, args.format), args.out)
    return 0


def run_expand(args):
    module = expand(_load_presentation(args), args.window)
    _emit(render(module, None, args.format), args.out)
    return 0


def run_invert(args):
    module = expand(_load_presentation(args), args.window)
    _emit(render(invert(module, args.mult, steps=args.steps), None, args.format), args.out)
    return 0


def run_complete(args):
    module = expand(_load_presentation(args), args.window)
    _emit(render(complete(module, args.mult, steps=args.steps), None, args.format), args.out)
    return 0


def run_regions(args):
    w = args.window
    lines = [f"{'i':>5} {'j':>5} {'di_range':>9} {'cone':>5} {'period':>7}"]
    for j in range(w.jmax, w.jmin - 1, -1):
        for i in range(w.imin, w.imax + 1):
            v = region(i, j)
            period = "-" if v.period is None else str(v.period)
            lines.append(
                f"{i:>5} {j:>5} {str(v.in_di_range).lower():>9}"
                f" {str(v.in_nonperiodicity_cone).lower():>5} {period:>7}"
            )
    _emit(("\n".join(lines) + "\n").encode("utf-8"), args.out)
    return 0


def run_check(args):
    pres = _load_presentation(args)
    report = realize(
        pres,
        args.prime,
        args.window,
        rho_complete=args.assert_rho_complete,
        pad=args.steps,
    )
    problems = list(validate_module(report.result))
    for d, (res, ker, cok) in sorted(report.certificates().items()):
        if res != (ker[0] + cok[0], ker[1] + cok[1]):
            problems.append(
                f"cell {tuple(d)}: splice order equation fails: {res} != {ker} + {cok}"
            )
    if problems:
        for line in problems:
            print(line)
        return 1
    print(
        f"ok: {len(report.result.cells)} nonzero cells,"
        f" certificates hold, module validates"
    )
    return 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog="fracture",
        description="Exact realization of bigraded modules through the fracture square.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("realize", help="run the full pipeline and print the result")
    _add_module_args(p)
    _add_output_args(p)
    p.add_argument("--steps", type=int, default=None, help="truncation depth override")
    p.add_argument(
        "--assert-rho-complete",
        action="store_true",
        help="skip the rho-completeness check and take the contract on faith",
    )
    p.set_defaults(func=run_realize)

    p = sub.add_parser("expand", help="expand a presentation into cells on a window")
    _add_module_args(p)
    _add_output_args(p)
    p.set_defaults(func=run_expand)

    p = sub.add_parser("invert", help="invert a multiplier action degreewise")
    _add_module_args(p)
    _add_output_args(p)
    p.add_argument("--mult", required=True, help="multiplier name to invert")
    p.add_argument("--steps", type=int, default=None, help="truncation depth override")
    p.set_defaults(func=run_invert)

    p = sub.add_parser("complete", help="complete along a multiplier degreewise")
    _add_module_args(p)
    _add_output_args(p)
    p.add_argument("--mult", required=True, help="multiplier name to complete along")
    p.add_argument("--steps", type=int, default=None, help="truncation depth override")
    p.set_defaults(func=run_complete)

    p = sub.add_parser("regions", help="print the periodicity verdict table for a window")
    p.add_argument("--window", type=window_arg, required=True)
    p.add_argument("--out", default=None, help="output path; stdout when omitted")
    p.set_defaults(func=run_regions)

    p = sub.add_parser("check", help="realize and verify certificates and validity")
    _add_module_args(p)
    p.add_argument("--steps", type=int, default=None, help="truncation depth override")
    p.add_argument(
        "--assert-rho-complete",
        action="store_true",
        help="skip the rho-completeness check and take the contract on faith",
    )
    p.set_defaults(func=run_check)

    return parser


def _glue_window_values(argv):
    # A window like -3:3,-3:3 starts with a dash and argparse would read
    # it as a flag; gluing it onto --window= keeps the space-separated
    # spelling usable.
    out = []
    it = iter(argv)
    for token in it:
        if token == "--window":
            value = next(it, None)
            if value is None:
                out.append(token)
            else:
                out.append(f"--window={value}")
        else:
            out.append(token)
    return out


def main(argv=None):
    parser = build_parser()
    if argv is None:
        argv = sys.argv[1:]
    try:
        args = parser.parse_args(_glue_window_values(argv))
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 2
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 2
    except RhoCompleteError as exc:
        print(str(exc), file=sys.stderr)
        return 1
    except (ParseError, BudgetError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
