"""Command-line front end.

Exit codes: 0 success (solver converged), 2 solver did not converge,
1 bad input (unreadable or malformed file, invalid MDP, bad arguments).
"""
from __future__ import annotations

import argparse
import sys

from . import __version__
from .harness import (
    ALGORITHMS,
    COLUMNS,
    EXPERIMENTS,
    ExperimentSpec,
    cross_check_mdp,
    format_csv,
    run_algorithm,
    run_experiment,
)
from .io import MdpFormatError, generate, load_mdp, save_mdp
from .lp import build_dual, build_primal, export_lp
from .mdp import InvalidMdpError

EXIT_OK, EXIT_INPUT, EXIT_NOT_CONVERGED = 0, 1, 2


class _InputError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


def _floats(text):
    return tuple(float(x) for x in text.split(",") if x.strip())


def _ints(text):
    out = []
    for part in filter(None, (p.strip() for p in text.split(","))):
        if "-" in part[1:]:
            span, _, step = part.partition(":")
            lo, hi = span.split("-", 1)
            out.extend(range(int(lo), int(hi) + 1, int(step or 1)))
        else:
            out.append(int(part))
    return tuple(out)


def _source(parser):
    parser.add_argument("mdp", nargs="?", help="MDP JSON document")
    parser.add_argument(
        "--generate",
        metavar="SPEC",
        help="inline generator, e.g. mc90:N=10,gamma=0.95 or random:n=4,m=2,gamma=0.9,seed=1",
    )


def _generated(spec, gamma=None, seed=None):
    """Generator spec with --gamma/--seed filled in where the spec is silent."""
    for key, value in (("gamma", gamma), ("seed", seed)):
        if value is not None and key not in spec.lower():
            spec += ("," if ":" in spec else ":") + f"{key}={value}"
    return generate(spec)


def _load(args):
    if bool(args.mdp) == bool(args.generate):
        raise _InputError("give exactly one of an MDP path or --generate")
    try:
        if args.generate:
            return _generated(args.generate, getattr(args, "gamma", None), getattr(args, "seed", None))
        return load_mdp(args.mdp)
    except (OSError, MdpFormatError, InvalidMdpError, ValueError) as exc:
        raise _InputError(str(exc)) from None


def build_parser():
    parser = _Parser(prog="mdplab", description="Tabular MDP solvers and experiments.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("solve", help="solve one MDP")
    _source(p)
    p.add_argument("--algorithm", required=True, choices=ALGORITHMS)
    p.add_argument("--gamma", type=float, help="discount for --generate specs")
    p.add_argument("--seed", type=int, help="seed for --generate specs")
    p.add_argument("--epsilon", type=float, default=1e-6, help="VI target (default 1e-6)")
    p.add_argument("--max-iters", type=int, dest="max_iters")
    p.add_argument("--sweeps", type=int, default=5, help="MPI evaluation sweeps")
    p.add_argument("--pivot-rule", choices=("bland", "dantzig"), default="bland")
    p.add_argument("--output", help="CSV trace of the iterations")
    p.add_argument("--format", choices=("table", "csv"), default="table")

    p = sub.add_parser("generate", help="write a generated MDP document")
    p.add_argument("spec", help="generator spec, e.g. mc90:N=10,gamma=0.95")
    p.add_argument("--gamma", type=float)
    p.add_argument("--seed", type=int)
    p.add_argument("--output", required=True)

    p = sub.add_parser("experiment", help="run a scripted experiment grid")
    p.add_argument("kind", choices=EXPERIMENTS)
    p.add_argument("--n", type=_ints, help="state counts, e.g. 6,8,10 or 6-14:2")
    p.add_argument("--gamma", type=_floats, help="discount rate(s), comma separated")
    p.add_argument("--seed", type=_ints, help="seeds, e.g. 0-9")
    p.add_argument("--epsilon", type=_floats, help="epsilon values (stopping-rule)")
    p.add_argument("--actions", type=int, default=2)
    p.add_argument("--sweeps", type=int, default=5)
    p.add_argument("--output", help="CSV path (stdout if omitted)")
    p.add_argument("--format", choices=("table", "csv"), default="csv")

    p = sub.add_parser("export-lp", help="write the primal or dual LP")
    _source(p)
    p.add_argument("--which", choices=("primal", "dual"), default="primal")
    p.add_argument("--output", help="LP file path (stdout if omitted)")

    p = sub.add_parser("crosscheck", help="compare every method against the oracle")
    _source(p)
    p.add_argument("--gamma", type=float)
    p.add_argument("--seed", type=int)
    p.add_argument("--sweeps", type=int, default=5)
    p.add_argument("--tolerance", type=float, default=1e-5)
    return parser


def _fmt(values):
    return " ".join(format(float(x), ".10g") for x in values)


def _table(columns, rows):
    cells = [[format(x, ".10g") if isinstance(x, float) else str(x) for x in r] for r in rows]
    widths = [max(len(c), *(len(r[i]) for r in cells)) if cells else len(c)
              for i, c in enumerate(columns)]
    lines = ["  ".join(c.rjust(w) for c, w in zip(columns, widths))]
    lines += ["  ".join(x.rjust(w) for x, w in zip(r, widths)) for r in cells]
    return "\n".join(lines) + "\n"


def cmd_solve(args):
    mdp = _load(args)
    try:
        report = run_algorithm(
            mdp,
            args.algorithm,
            epsilon=args.epsilon,
            max_iterations=args.max_iters,
            sweeps=args.sweeps,
            pivot_rule=args.pivot_rule,
        )
    except ValueError as exc:
        raise _InputError(str(exc)) from None
    fields = [
        ("algorithm", report.algorithm_name),
        ("converged", str(report.converged).lower()),
        ("iterations", str(report.iterations)),
        ("policy", " ".join(map(str, report.policy))),
        ("values", _fmt(report.values)),
    ]
    if report.residual_history:
        fields.append(("final_residual", format(report.residual_history[-1], ".6g")))
    if report.objective_value is not None:
        fields.append(("objective", format(report.objective_value, ".12g")))
    if args.format == "csv":
        sys.stdout.write(format_csv([k for k, _ in fields], [[v for _, v in fields]]))
    else:
        for key, value in fields:
            print(f"{key:>15}: {value}")
    if args.output:
        n = max(len(report.residual_history), len(report.policy_change_history))
        rows = [
            (
                t + 1,
                report.residual_history[t] if t < len(report.residual_history) else "",
                report.policy_change_history[t] if t < len(report.policy_change_history) else "",
            )
            for t in range(n)
        ]
        with open(args.output, "w", newline="") as fh:
            fh.write(format_csv(("iteration", "residual", "policy_changes"), rows))
    return EXIT_OK if report.converged else EXIT_NOT_CONVERGED


def cmd_generate(args):
    try:
        save_mdp(_generated(args.spec, args.gamma, args.seed), args.output)
    except (OSError, ValueError) as exc:
        raise _InputError(str(exc)) from None
    return EXIT_OK


def cmd_experiment(args):
    kwargs = {"kind": args.kind, "n_actions": args.actions, "sweeps": args.sweeps,
              "output": args.output}
    if args.n:
        kwargs["n_values"] = args.n
    elif args.kind in ("cross-check", "stopping-rule"):
        kwargs["n_values"] = (4,)
    if args.gamma:
        kwargs["gammas"] = args.gamma
    elif args.kind == "vi-gamma-scaling":
        kwargs["gammas"] = (0.5, 0.9, 0.99, 0.999)
    elif args.kind in ("cross-check", "stopping-rule"):
        kwargs["gammas"] = (0.9,)
    if args.seed:
        kwargs["seeds"] = args.seed
    if args.epsilon:
        kwargs["epsilons"] = args.epsilon
    try:
        spec = ExperimentSpec(**kwargs)
    except ValueError as exc:
        raise _InputError(str(exc)) from None
    rows = run_experiment(spec)
    columns = COLUMNS[spec.kind]
    if not args.output:
        sys.stdout.write(format_csv(columns, rows) if args.format == "csv" else _table(columns, rows))
    else:
        print(f"wrote {len(rows)} rows to {args.output}")
    return EXIT_OK


def cmd_export_lp(args):
    mdp = _load(args)
    lp = build_primal(mdp) if args.which == "primal" else build_dual(mdp)
    text = export_lp(lp, name=args.which)
    if args.output:
        try:
            with open(args.output, "w") as fh:
                fh.write(text)
        except OSError as exc:
            raise _InputError(str(exc)) from None
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_crosscheck(args):
    mdp = _load(args)
    res = cross_check_mdp(mdp, args.sweeps)
    print(f"oracle policy: {' '.join(map(str, res['oracle'].optimal_policy))}")
    print(f"oracle values: {_fmt(res['oracle'].optimal_values)}")
    rows = [(name, res["errors"][name], res["gaps"][name]) for name in res["runs"]]
    sys.stdout.write(_table(("method", "value_error", "policy_gap"), rows))
    print(f"max disagreement: {res['max_disagreement']:.3g}")
    ok = res["max_disagreement"] <= args.tolerance
    return EXIT_OK if ok else EXIT_NOT_CONVERGED


_COMMANDS = {
    "solve": cmd_solve,
    "generate": cmd_generate,
    "experiment": cmd_experiment,
    "export-lp": cmd_export_lp,
    "crosscheck": cmd_crosscheck,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except _InputError as exc:
        print(f"mdplab: error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
