"""Command line entry point (``qadd`` / ``python -m qadditive``).

Exit codes: 0 success, 1 internal error, 2 validation or usage error.
"""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import analysis, fit, io
from .errors import QAdditiveError
from .model import closed_form_eval, lattice_exponent, oracle_eval, scalability_consistency_check

EXIT_OK, EXIT_INTERNAL, EXIT_INVALID = 0, 1, 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise _UsageError(f"{self.prog}: error: {message}")


class _UsageError(Exception):
    pass


def _floats(text: str) -> tuple:
    try:
        return tuple(float(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _fixed(text: str) -> tuple:
    try:
        i, v = text.split("=")
        return int(i), float(v)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected INDEX=VALUE, got {text!r}") from None


def _parser() -> argparse.ArgumentParser:
    p = _Parser(prog="qadd", description="q-additive scaling laws for resource quantifiers")
    p.add_argument("--precision", type=int, default=None,
                   help="significant digits in printed numbers (default 6 or $QADD_PRECISION)")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("eval", help="closed form at N copies")
    s.add_argument("--model", required=True, type=Path)
    s.add_argument("--n", required=True, type=float, dest="N", help="copy count N >= 1")
    s.add_argument("--per-copy", action="store_true")

    s = sub.add_parser("oracle", help="exact recurrence value at a lattice point")
    s.add_argument("--model", required=True, type=Path)
    s.add_argument("--n", required=True, type=int, dest="N", help="copy count, a power of the base")
    s.add_argument("--per-copy", action="store_true")
    s.add_argument("--exact", action="store_true", help="print the exact rational")

    s = sub.add_parser("asymptote", help="large-N limit of E(N)/N")
    s.add_argument("--model", required=True, type=Path)

    s = sub.add_parser("check", help="feasibility suite; exit 2 on any violation")
    s.add_argument("--model", required=True, type=Path)

    s = sub.add_parser("fit", help="fit a model to a dataset")
    s.add_argument("--data", required=True, type=Path)
    s.add_argument("--base", required=True, type=int)
    s.add_argument("--q", required=True, type=int)
    s.add_argument("--exponents", type=_floats, help="fixed exponents; omit to search")
    s.add_argument("--fix-e", type=_fixed, action="append", default=[], metavar="INDEX=VALUE")
    s.add_argument("--allow-negative", action="store_true")
    s.add_argument("--total", action="store_true", help="fit total E instead of E/N")
    s.add_argument("--out", type=Path, help="write the fitted model here")

    s = sub.add_parser("reproduce", help="OSD models for d=2,3,4 and their figure tables")
    s.add_argument("--outdir", type=Path, help="write model and table files here")
    s.add_argument("--d", type=int, choices=sorted(analysis.OSD_INPUTS), action="append")

    s = sub.add_parser("verify", help="scalability identity over all k <= n <= n-max")
    s.add_argument("--model", required=True, type=Path)
    s.add_argument("--n-max", type=int, default=10)

    return p


def _cmd_eval(args, out):
    model = io.load_model(args.model)
    val = closed_form_eval(model, args.N)
    if args.per_copy:
        val /= args.N
    print(io.format_number(val, args.precision), file=out)
    return EXIT_OK


def _cmd_oracle(args, out):
    model = io.load_model(args.model)
    n = lattice_exponent(args.N, model.base)
    if n is None:
        raise QAdditiveError(f"N={args.N} is not a power of base {model.base}")
    val = oracle_eval(model, n)
    if args.per_copy:
        val /= args.N
    print(str(val) if args.exact else io.format_number(val, args.precision), file=out)
    return EXIT_OK


def _cmd_asymptote(args, out):
    report = analysis.asymptote(io.load_model(args.model))
    if report.kind == "finite":
        print(io.format_number(report.value, args.precision), file=out)
    elif report.kind == "vanishes":
        print("0", file=out)
    elif report.kind == "log-divergent":
        print(f"log-divergent (order {report.log_order})", file=out)
    else:
        print(f"power-divergent (nu_max={io.format_number(report.nu_max, args.precision)})", file=out)
    return EXIT_OK


def _print_report(report, out, precision):
    for c in report:
        status = "ok" if c.satisfied else "VIOLATED"
        print(f"{c.name},{status},{io.format_number(c.margin, precision)}", file=out)


_LABELS = {"osd_consistency": "e3 >= (sqrt(a)+1) e2"}


def _cmd_check(args, out):
    report = analysis.model_feasibility(io.load_model(args.model))
    _print_report(report, out, args.precision)
    for c in report.violations:
        print(f"violated: {_LABELS.get(c.name, c.name)}", file=sys.stderr)
    return EXIT_OK if report.ok else EXIT_INVALID


def _cmd_fit(args, out):
    data = io.load_dataset(args.data)
    problem = fit.FitProblem.from_dataset(
        data, args.base, args.q, exponents=args.exponents, fixed_e=dict(args.fix_e),
        nonneg=not args.allow_negative, per_copy=not args.total)
    result = fit.fit_evector(problem) if args.exponents else fit.fit_exponents(problem)
    fmt = lambda vs: ",".join(io.format_number(v, args.precision) for v in vs)
    print(f"exponents,{fmt(result.exponents)}", file=out)
    print(f"evector,{fmt(result.evector)}", file=out)
    print(f"rms_per_copy,{io.format_number(result.rms, args.precision)}", file=out)
    if result.feasibility is not None:
        _print_report(result.feasibility, out, args.precision)
    if args.out is not None:
        if result.model is None:
            raise QAdditiveError("fitted e-vector has negative components; no model written")
        io.save_model(result.model, args.out)
    return EXIT_OK


def _cmd_reproduce(args, out):
    dims = args.d or sorted(analysis.OSD_INPUTS)
    if args.outdir is not None:
        args.outdir.mkdir(parents=True, exist_ok=True)
    for d in dims:
        spec = analysis.OSD_INPUTS[d]
        model = analysis.build_osd_model(spec)
        table = io.emit_figure_data(model, None, (1, analysis.OSD_NMAX[d]), args.precision)
        limit = analysis.asymptote(model).value
        if args.outdir is None:
            print(f"# d={d} a={spec.a} e2={spec.e2!r} e3={spec.e3!r} "
                  f"asymptote={io.format_number(limit, args.precision)}", file=out)
            out.write(table)
        else:
            io.save_model(model, args.outdir / f"osd_d{d}.json")
            (args.outdir / f"osd_d{d}.csv").write_text(table, encoding="utf-8")
            print(f"d={d},asymptote,{io.format_number(limit, args.precision)}", file=out)
    return EXIT_OK


def _cmd_verify(args, out):
    model = io.load_model(args.model)
    worst, ok = 0.0, True
    for n in range(args.n_max + 1):
        for k in range(n + 1):
            r = scalability_consistency_check(model, n, k)
            ok &= r.ok
            worst = max(worst, r.residual)
    print(f"{'ok' if ok else 'FAILED'},max_residual,{worst!r}", file=out)
    return EXIT_OK if ok else EXIT_INVALID


_COMMANDS = {
    "eval": _cmd_eval, "oracle": _cmd_oracle, "asymptote": _cmd_asymptote, "check": _cmd_check,
    "fit": _cmd_fit, "reproduce": _cmd_reproduce, "verify": _cmd_verify,
}


def cli_dispatch(argv=None, out=None) -> int:
    out = sys.stdout if out is None else out
    try:
        args = _parser().parse_args(argv)
        if args.precision is not None and args.precision < 1:
            raise QAdditiveError("--precision must be >= 1")
        return _COMMANDS[args.command](args, out)
    except _UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_INVALID
    except SystemExit as exc:  # --help
        return EXIT_OK if not exc.code else EXIT_INVALID
    except (QAdditiveError, OSError) as exc:
        print(f"qadd: error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except Exception as exc:  # noqa: BLE001
        print(f"qadd: internal error: {exc!r}", file=sys.stderr)
        return EXIT_INTERNAL


def main() -> None:
    sys.exit(cli_dispatch())
