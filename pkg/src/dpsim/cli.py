"""Command-line front end.

    dpsim profile --family bb --n 3 --tau 0.05 --alpha 0:2:501 --engine tdse --out bb3.csv
    dpsim order --family nb --n 3 --at 2.0 --quantity P
    dpsim verify

Exit status: 0 success, 1 a verification check failed, 2 invalid arguments,
3 numerical failure.
"""

from __future__ import annotations

import argparse
import math
import sys
from pathlib import Path

import numpy as np

from dpsim import __version__
from dpsim.analytic import ExtrapolationError
from dpsim.scans import (ENGINES, ENGINE_ALIASES, QUANTITIES, WIDTH_RULES, Family, OrderEstimateError,
                         order_estimate, profile_scan, scan2d_universal, shape_comparison, width_study)
from dpsim.special import GammaDomainError
from dpsim.tdse import IntegrationError, IntegratorConfig, propagate
from dpsim.waveforms import PulseShapeKind, sample, spec_from_text

EXIT_OK, EXIT_CHECK_FAILED, EXIT_USAGE, EXIT_NUMERIC = 0, 1, 2, 3
FAMILIES = ("a", "b", "bb", "nb", "universal", "none", "custom")


class UsageError(ValueError):
    pass


def parse_range(text: str) -> np.ndarray:
    """``min:max:count`` (inclusive, evenly spaced) or a single value."""
    parts = text.split(":")
    try:
        if len(parts) == 1:
            return np.array([float(parts[0])])
        if len(parts) == 3:
            lo, hi, n = float(parts[0]), float(parts[1]), int(parts[2])
            if n < 1 or (n > 1 and not hi > lo):
                raise ValueError
            return np.linspace(lo, hi, n)
    except ValueError:
        pass
    raise argparse.ArgumentTypeError(f"expected min:max:count or a number, got {text!r}")


def load_phase_file(path) -> tuple[float, ...]:
    """One phase (radians) per line; ``#`` starts a comment."""
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise UsageError(f"--phase-file: cannot read {path}: {exc.strerror}") from None
    phases = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        try:
            value = float(line)
        except ValueError:
            raise UsageError(f"--phase-file: {path}, line {lineno}: not a number: {line!r}") from None
        if not math.isfinite(value):
            raise UsageError(f"--phase-file: {path}, line {lineno}: phase must be finite")
        phases.append(value)
    if not phases:
        raise UsageError(f"--phase-file: {path} contains no phases")
    return tuple(phases)


def _positive_int(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        v = 0
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text!r}")
    return v


def _shape(text: str) -> PulseShapeKind:
    try:
        return PulseShapeKind.parse(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _engine(text: str) -> str:
    e = ENGINE_ALIASES.get(text, text)
    if e not in ENGINES:
        raise argparse.ArgumentTypeError(f"expected one of {', '.join(ENGINES)}, got {text!r}")
    return e


def resolve_family(args, engine: str | None = None) -> Family:
    """Family from --family/--n/--delta/--phase-file.

    ``a``/``b`` are the single-pulse layouts. ``bb``/``nb`` are phase
    families of N pulses; with --delta, or with the analytic engine, they
    become the three-segment Rosen-Zener layouts (N must be 3).
    """
    name = args.family.lower()
    phase_file = getattr(args, "phase_file", None)
    if phase_file and name not in ("custom",):
        if args.family_given:
            raise UsageError("--phase-file: conflicts with --family " + args.family)
        name = "custom"
    if name == "custom":
        if not phase_file:
            raise UsageError("--family custom requires --phase-file")
        return Family("custom", phases=load_phase_file(phase_file), normalize_areas=args.normalize_areas)
    delta = args.delta
    if name in ("a", "b"):
        return Family(name.upper(), delta=delta)
    if name in ("bb", "nb") and (delta is not None or engine == "analytic"):
        if args.n != 3:
            raise UsageError(f"--n: the {name.upper()} Rosen-Zener layout has three segments, got {args.n}")
        return Family(name.upper(), delta=delta)
    if delta is not None:
        raise UsageError(f"--delta: not used by family {name}")
    n = 1 if name == "none" and not args.n_given else args.n
    return Family(name, n=n, normalize_areas=args.normalize_areas)


def _cfg(args) -> IntegratorConfig:
    try:
        return IntegratorConfig(rel_tol=args.rel_tol, abs_tol=args.abs_tol, max_step=args.max_step,
                                picture=args.picture)
    except ValueError as exc:
        raise UsageError(f"--rel-tol/--abs-tol/--max-step: {exc}") from None


def _emit(table, out) -> None:
    text = table.to_text()
    if out in (None, "-"):
        sys.stdout.write(text)
    else:
        try:
            Path(out).write_text(text)
        except OSError as exc:
            raise UsageError(f"--out: cannot write {out}: {exc.strerror}") from None


# -- subcommands ------------------------------------------------------------

def cmd_profile(args) -> int:
    fam = resolve_family(args, args.engine)
    table = profile_scan(fam, args.alpha, args.engine, args.tau, args.shape, args.detuning,
                         _cfg(args), threads=args.threads)
    _emit(table, args.out)
    return EXIT_OK


def cmd_width(args) -> int:
    table = width_study(resolve_family(args), args.alpha, args.tau_grid, args.shape, _cfg(args),
                        threads=args.threads)
    _emit(table, args.out)
    for key, value in table.summary.items():
        print(f"{key} {value:.6g}", file=sys.stderr)
    return EXIT_OK


def cmd_scan2d(args) -> int:
    fam = resolve_family(args) if args.family_given or args.phase_file else None
    table = scan2d_universal(args.alpha, args.detuning_grid, args.tau, args.shape, _cfg(args), fam,
                             threads=args.threads)
    _emit(table, args.out)
    return EXIT_OK


def cmd_order(args) -> int:
    fam = resolve_family(args)
    if not 0 < args.eps_min < args.eps_max:
        raise UsageError("--eps-min/--eps-max: need 0 < eps-min < eps-max")
    est = order_estimate(fam, args.at, args.quantity, (args.eps_min, args.eps_max))
    print(f"order={est.order:.6f} coefficient={est.coefficient:.10g} residual={est.residual:.3e} "
          f"points={est.n_points}")
    return EXIT_OK


def cmd_shapes(args) -> int:
    table = shape_comparison(resolve_family(args), args.tau, args.alpha, cfg=_cfg(args),
                             width_rule=args.width_rule, threads=args.threads)
    _emit(table, args.out)
    print(f"max_pairwise_deviation {table.summary['max_pairwise_deviation']:.6g}", file=sys.stderr)
    return EXIT_OK


def cmd_simulate(args) -> int:
    try:
        text = Path(args.spec).read_text()
    except OSError as exc:
        raise UsageError(f"--spec: cannot read {args.spec}: {exc.strerror}") from None
    try:
        spec = spec_from_text(text)
    except ValueError as exc:
        raise UsageError(f"--spec: {exc}") from None
    u = propagate(sample(spec), _cfg(args))
    print(f"a={u.a.real!r}{u.a.imag:+.17g}j")
    print(f"b={u.b.real!r}{u.b.imag:+.17g}j")
    print(f"P={abs(u.b) ** 2:.17g}")
    return EXIT_OK


def cmd_verify(args) -> int:
    from dpsim.verification import CHECKS, run_checks

    keys = args.only.split(",") if args.only else list(CHECKS)
    unknown = [k for k in keys if k not in CHECKS]
    if unknown:
        raise UsageError(f"--only: unknown check(s) {', '.join(unknown)}; available {', '.join(CHECKS)}")
    results = run_checks(keys, report=lambda line: print(line, flush=True))
    failed = [r.key for r in results if not r.passed]
    print(f"{len(results) - len(failed)}/{len(results)} checks passed" + (f"; failed: {', '.join(failed)}"
                                                                        if failed else ""))
    return EXIT_CHECK_FAILED if failed else EXIT_OK


# -- parser -------------------------------------------------------------------

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _family_args(p, default="bb"):
    g = p.add_argument_group("sequence")
    g.add_argument("--family", default=default, type=str.lower, choices=FAMILIES,
                   help=f"sequence family (default {default}); a/b/bb/nb with --delta are the Rosen-Zener layouts")
    g.add_argument("--n", type=_positive_int, default=3, help="number of pulses, odd (default 3)")
    g.add_argument("--delta", type=float, default=None,
                   help="detuning pulse area in units of pi for the layouts (default 1/2 for a, 2/3 otherwise)")
    g.add_argument("--phase-file", default=None, help="custom phases, one per line in radians, # comments")
    g.add_argument("--normalize-areas", action="store_true",
                   help="map each detuning pulse area to (-pi, pi]")


def _numeric_args(p):
    g = p.add_argument_group("integrator")
    g.add_argument("--rel-tol", type=float, default=1e-10, help="relative tolerance (default 1e-10)")
    g.add_argument("--abs-tol", type=float, default=1e-12, help="absolute tolerance (default 1e-12)")
    g.add_argument("--max-step", type=float, default=math.pi / 20, help="step cap between pulses (default pi/20)")
    g.add_argument("--picture", choices=("schroedinger", "interaction"), default="schroedinger")
    g.add_argument("--threads", type=_positive_int, default=None,
                   help="worker threads (default: CPU count, capped by DPSIM_THREADS)")


def _out_arg(p):
    p.add_argument("--out", default=None, help="output CSV path (default stdout)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="dpsim", description="Two-state control by detuning pulses: scans and checks.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("profile", help="transition probability against alpha")
    _family_args(p)
    p.add_argument("--alpha", type=parse_range, default=parse_range("0:2:501"), help="alpha grid (default 0:2:501)")
    p.add_argument("--engine", type=_engine, default="tdse", help="analytic, tdse or cp-limit (default tdse)")
    p.add_argument("--tau", type=float, default=0.05, help="pulse width in T/pi (default 0.05)")
    p.add_argument("--shape", type=_shape, default=PulseShapeKind.SECH, help="sech, gaussian, lorentzian, rectangular")
    p.add_argument("--detuning", type=float, default=0.0, help="static detuning in pi/T (default 0)")
    _numeric_args(p)
    _out_arg(p)
    p.set_defaults(func=cmd_profile)

    p = sub.add_parser("width", help="alpha x tau study against the zero-width profile")
    _family_args(p)
    p.add_argument("--alpha", type=parse_range, default=parse_range("0:2:501"))
    p.add_argument("--tau", dest="tau_grid", type=parse_range, default=parse_range("0.01:0.3:30"),
                   help="tau grid (default 0.01:0.3:30)")
    p.add_argument("--shape", type=_shape, default=PulseShapeKind.SECH)
    _numeric_args(p)
    _out_arg(p)
    p.set_defaults(func=cmd_width)

    p = sub.add_parser("scan2d", help="alpha x static detuning map (universal sequence by default)")
    _family_args(p, default="universal")
    p.add_argument("--alpha", type=parse_range, default=parse_range("0:2:201"))
    p.add_argument("--detuning", dest="detuning_grid", type=parse_range, default=parse_range("-1:1:201"),
                   help="static detuning grid in units of the nominal Rabi frequency (default -1:1:201)")
    p.add_argument("--tau", type=float, default=0.05, help="pulse width; 0 gives the composite pulse")
    p.add_argument("--shape", type=_shape, default=PulseShapeKind.SECH)
    _numeric_args(p)
    _out_arg(p)
    p.set_defaults(func=cmd_scan2d)

    p = sub.add_parser("order", help="log-log error order near a nominal point (zero width)")
    _family_args(p)
    p.add_argument("--at", type=float, default=1.0, help="expansion point alpha0 (default 1)")
    p.add_argument("--quantity", choices=QUANTITIES, default="1-P")
    p.add_argument("--eps-min", type=float, default=1e-3)
    p.add_argument("--eps-max", type=float, default=1e-2)
    p.set_defaults(func=cmd_order)

    p = sub.add_parser("shapes", help="compare sech, Gaussian, Lorentzian and rectangular pulses")
    _family_args(p)
    p.add_argument("--tau", type=float, default=0.05)
    p.add_argument("--alpha", type=parse_range, default=parse_range("0:2:501"))
    p.add_argument("--width-rule", choices=WIDTH_RULES, default="nominal",
                   help="nominal: same tau for every shape; moment: equal mean |t|")
    _numeric_args(p)
    _out_arg(p)
    p.set_defaults(func=cmd_shapes)

    p = sub.add_parser("simulate", help="propagate a sequence file (key=value format)")
    p.add_argument("--spec", required=True, help="sequence file")
    _numeric_args(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("verify", help="run the acceptance checks")
    p.add_argument("--only", default=None, help="comma-separated check keys, e.g. 1,3,9")
    p.set_defaults(func=cmd_verify)
    return parser


_VALUE_FLAGS = ("--alpha", "--detuning", "--tau", "--at", "--delta")


def _glue_negative_values(argv: list[str]) -> list[str]:
    # "--detuning -1:1:201" would otherwise be read as an unknown option
    out, i = [], 0
    while i < len(argv):
        if argv[i] in _VALUE_FLAGS and i + 1 < len(argv) and argv[i + 1].startswith("-") and len(argv[i + 1]) > 1 \
                and (argv[i + 1][1].isdigit() or argv[i + 1][1] == "."):
            out.append(f"{argv[i]}={argv[i + 1]}")
            i += 2
        else:
            out.append(argv[i])
            i += 1
    return out


def _given(argv, flag) -> bool:
    return any(a == flag or a.startswith(flag + "=") for a in argv)


def run(argv=None) -> int:
    argv = _glue_negative_values(list(sys.argv[1:] if argv is None else argv))
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    args.family_given = _given(argv, "--family")
    args.n_given = _given(argv, "--n")
    try:
        return args.func(args)
    except (IntegrationError, OrderEstimateError, ExtrapolationError, GammaDomainError) as exc:
        print(f"dpsim: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (UsageError, ValueError) as exc:
        print(f"dpsim: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
