"""Command line front end.

Two subcommands:

    spfide solve --problem example1 --epsilon 2^-24 --n 128 [--solver lu] [--out solution.csv]
    spfide study [--config study.cfg] [--epsilon-list ...] [--n-list ...] ...

solve writes one solution as CSV and prints a short report; study fills the
whole (epsilon, n) grid and exports study.csv, loglog.csv, and/or study.md
into the output directory.  Exit codes: 0 success, 1 solver failure,
2 invalid arguments or configuration.
"""

from __future__ import annotations

import argparse
import math
import re
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .analysis import ConvergenceReport, StudyCellError, run_study, solve_single
from .linsolve import NonConvergenceError, SingularSystemError
from .problems import example1, validate_lambda_bound

PROBLEMS = {"example1": example1}

_SOLVER_CHOICES = ("lu", "fixed-point", "both")
_FORMAT_CHOICES = ("csv", "markdown")

_STUDY_DEFAULTS = {
    "problem": "example1",
    "epsilon_list": "2^0,2^-6,2^-12,2^-18,2^-24",
    "n_list": "64,128,256,512,1024",
    "solver": "lu",
    "tol": "1e-12",
    "output_dir": "study",
    "formats": "csv,markdown",
}


class ConfigError(Exception):
    """Bad study configuration; maps to exit code 2."""


def parse_epsilon(text: str) -> float:
    """Accept a decimal literal or the exact power notation 2^-k."""
    text = text.strip()
    m = re.fullmatch(r"2\^(-?\d+)", text)
    if m:
        value = 2.0 ** int(m.group(1))
    else:
        try:
            value = float(text)
        except ValueError:
            raise argparse.ArgumentTypeError(
                f"epsilon must be a decimal or 2^-k, got {text!r}"
            ) from None
    if not 0.0 < value <= 1.0:
        raise argparse.ArgumentTypeError(f"epsilon must lie in (0, 1], got {text!r}")
    return value


def parse_mesh_n(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"mesh parameter must be an integer, got {text!r}") from None
    if value < 4 or value % 2:
        raise argparse.ArgumentTypeError(f"mesh parameter must be even and >= 4, got {text!r}")
    return value


def _fmt(value: float) -> str:
    """Shortest representation that round-trips to the same float."""
    return repr(float(value))


def _epsilon_label(eps: float) -> str:
    """Label 2^-k when eps is an exact power of two, decimal otherwise."""
    k = math.log2(eps)
    if k == int(k):
        return f"2^{int(k)}"
    return _fmt(eps)


@dataclass(frozen=True)
class StudyConfig:
    problem: str
    epsilon_list: tuple
    n_list: tuple
    solver: str
    tol: float
    output_dir: str
    formats: tuple


def _parse_config_text(raw: dict[str, str]) -> StudyConfig:
    """Validate and convert the raw key=value strings into a StudyConfig."""
    unknown = set(raw) - set(_STUDY_DEFAULTS)
    if unknown:
        raise ConfigError(f"unknown config key(s): {', '.join(sorted(unknown))}")
    merged = dict(_STUDY_DEFAULTS)
    merged.update(raw)

    if merged["problem"] not in PROBLEMS:
        raise ConfigError(
            f"unknown problem {merged['problem']!r}; available: {', '.join(PROBLEMS)}"
        )
    try:
        epsilon_list = tuple(
            parse_epsilon(tok) for tok in merged["epsilon_list"].split(",") if tok.strip()
        )
    except argparse.ArgumentTypeError as exc:
        raise ConfigError(str(exc)) from None
    if not epsilon_list:
        raise ConfigError("epsilon_list must not be empty")

    try:
        n_list = tuple(int(tok) for tok in merged["n_list"].split(",") if tok.strip())
    except ValueError:
        raise ConfigError(f"n_list must be comma-separated integers, got {merged['n_list']!r}") from None
    if not n_list:
        raise ConfigError("n_list must not be empty")
    if any(n < 4 or n % 2 for n in n_list) or list(n_list) != sorted(n_list):
        raise ConfigError(f"n_list must be ascending even integers >= 4, got {merged['n_list']!r}")

    if merged["solver"] not in _SOLVER_CHOICES:
        raise ConfigError(f"solver must be one of {_SOLVER_CHOICES}, got {merged['solver']!r}")

    try:
        tol = float(merged["tol"])
    except ValueError:
        raise ConfigError(f"tol must be a number, got {merged['tol']!r}") from None
    if tol <= 0.0:
        raise ConfigError(f"tol must be positive, got {merged['tol']!r}")

    formats = tuple(tok.strip() for tok in merged["formats"].split(",") if tok.strip())
    if not formats or any(f not in _FORMAT_CHOICES for f in formats):
        raise ConfigError(f"formats must be a subset of {_FORMAT_CHOICES}, got {merged['formats']!r}")

    return StudyConfig(
        problem=merged["problem"],
        epsilon_list=epsilon_list,
        n_list=n_list,
        solver=merged["solver"],
        tol=tol,
        output_dir=merged["output_dir"],
        formats=formats,
    )


def _read_config_file(path: str) -> dict[str, str]:
    """Flat key=value lines; blank lines and # comments allowed, nothing nested."""
    raw = {}
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path!r}: {exc}") from None
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected key=value, got {line!r}")
        key, _, value = line.partition("=")
        raw[key.strip()] = value.strip()
    return raw


def _write_solution_csv(path: Path, nodes, values, exact_values) -> None:
    lines = ["i,xi,y,exact,abs_error"]
    for i, (x, y) in enumerate(zip(nodes, values)):
        if exact_values is None:
            lines.append(f"{i},{_fmt(x)},{_fmt(y)},,")
        else:
            v = exact_values[i]
            lines.append(f"{i},{_fmt(x)},{_fmt(y)},{_fmt(v)},{_fmt(abs(v - y))}")
    path.write_text("\n".join(lines) + "\n", newline="\n")


def _write_study_csv(path: Path, report: ConvergenceReport) -> None:
    with_gap = report.cross_check_gaps is not None
    header = "epsilon,n,max_error,rate"
    if with_gap:
        header += ",cross_check_gap"
    lines = [header]
    for i, eps in enumerate(report.epsilons):
        for j, n in enumerate(report.ns):
            r = report.rates[i, j]
            row = f"{_fmt(eps)},{n},{_fmt(report.errors[i, j])},"
            row += "" if math.isnan(r) else _fmt(r)
            if with_gap:
                row += f",{_fmt(report.cross_check_gaps[i, j])}"
            lines.append(row)
    path.write_text("\n".join(lines) + "\n", newline="\n")


def _write_loglog_csv(path: Path, report: ConvergenceReport) -> None:
    lines = ["n,log10_n,epsilon,log10_error"]
    for i, eps in enumerate(report.epsilons):
        for j, n in enumerate(report.ns):
            err = report.errors[i, j]
            log_err = _fmt(math.log10(err)) if err > 0.0 else ""
            lines.append(f"{n},{_fmt(math.log10(n))},{_fmt(eps)},{log_err}")
    path.write_text("\n".join(lines) + "\n", newline="\n")


def _write_study_md(path: Path, report: ConvergenceReport) -> None:
    """Layout mirroring the classic convergence table: one error row and one
    rate row per epsilon, then the parameter-uniform footer pair."""
    ncols = len(report.ns)
    header = "| epsilon | " + " | ".join(f"N={n}" for n in report.ns) + " |"
    ruler = "|---" * (ncols + 1) + "|"
    lines = [header, ruler]

    def error_cells(values):
        return " | ".join(f"{v:.4e}" for v in values)

    def rate_cells(values):
        return " | ".join("" if math.isnan(v) else f"{v:.2f}" for v in values)

    for i, eps in enumerate(report.epsilons):
        lines.append(f"| {_epsilon_label(eps)} | {error_cells(report.errors[i])} |")
        lines.append(f"|  | {rate_cells(report.rates[i])} |")
    lines.append(f"| e^N | {error_cells(report.uniform_errors)} |")
    lines.append(f"| p^N | {rate_cells(report.uniform_rates)} |")
    lines.append("")
    lines.append(f"method: {report.method}")
    for i, eps in enumerate(report.epsilons):
        if report.rho_branch_switched[i]:
            lines.append(
                f"note: transition point of epsilon={_epsilon_label(eps)} "
                f"switched branches across this N range"
            )
    path.write_text("\n".join(lines) + "\n", newline="\n")


def cmd_solve(args: argparse.Namespace) -> int:
    problem, exact = PROBLEMS[args.problem]()

    bound_report = validate_lambda_bound(problem, 256)
    if not bound_report.ok:
        print(
            f"warning: |lam|={abs(problem.lam):.4g} exceeds the well-posedness "
            f"bound {bound_report.bound:.4g}; proceeding anyway",
            file=sys.stderr,
        )

    try:
        mesh, solution, gap = solve_single(
            problem, args.epsilon, args.n, solver=args.solver
        )
    except (NonConvergenceError, SingularSystemError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1

    exact_values = exact.on_nodes(mesh.nodes, args.epsilon) if exact is not None else None
    out = Path(args.out)
    _write_solution_csv(out, mesh.nodes, solution.values, exact_values)

    print(f"n = {mesh.n}")
    print(f"rho = {_fmt(mesh.rho)}")
    print(f"solver = {solution.solver_tag}")
    if solution.iterations is not None:
        print(f"iterations = {solution.iterations}")
    for key, value in solution.diagnostics.items():
        print(f"{key} = {value}")
    if gap is not None:
        print(f"cross_check_gap = {_fmt(gap)}")
    if exact_values is not None:
        err = float(np.max(np.abs(exact_values - solution.values)))
        print(f"max_error = {_fmt(err)}")
    print(f"wrote {out}")
    return 0


def cmd_study(args: argparse.Namespace) -> int:
    raw = _read_config_file(args.config) if args.config else {}
    for key in _STUDY_DEFAULTS:
        override = getattr(args, key)
        if override is not None:
            raw[key] = override
    config = _parse_config_text(raw)

    problem, exact = PROBLEMS[config.problem]()
    bound_report = validate_lambda_bound(problem, 256)
    if not bound_report.ok:
        print(
            f"warning: |lam|={abs(problem.lam):.4g} exceeds the well-posedness "
            f"bound {bound_report.bound:.4g}; proceeding anyway",
            file=sys.stderr,
        )

    try:
        report = run_study(
            problem,
            exact,
            config.epsilon_list,
            config.n_list,
            solver=config.solver,
            tol=config.tol,
        )
    except StudyCellError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1

    out_dir = Path(config.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    if "csv" in config.formats:
        _write_study_csv(out_dir / "study.csv", report)
        _write_loglog_csv(out_dir / "loglog.csv", report)
        written += ["study.csv", "loglog.csv"]
    if "markdown" in config.formats:
        _write_study_md(out_dir / "study.md", report)
        written.append("study.md")

    print(f"{len(config.epsilon_list)} epsilon values x {len(config.n_list)} mesh sizes, "
          f"method: {report.method}, solver: {config.solver}")
    for i, eps in enumerate(report.epsilons):
        if report.rho_branch_switched[i]:
            print(f"note: rho branch switch within the epsilon={_epsilon_label(eps)} row")
    print(f"wrote {', '.join(written)} to {out_dir}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="spfide",
        description="Fitted-mesh solver for singularly perturbed "
                    "Fredholm integro-differential equations.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_solve = sub.add_parser("solve", help="solve one instance and export CSV")
    p_solve.add_argument("--problem", required=True, choices=sorted(PROBLEMS))
    p_solve.add_argument("--epsilon", required=True, type=parse_epsilon,
                         help="perturbation parameter, decimal or 2^-k")
    p_solve.add_argument("--n", required=True, type=parse_mesh_n,
                         help="mesh parameter (even, >= 4)")
    p_solve.add_argument("--solver", default="lu", choices=_SOLVER_CHOICES)
    p_solve.add_argument("--out", default="solution.csv", help="output CSV path")
    p_solve.set_defaults(func=cmd_solve)

    p_study = sub.add_parser("study", help="run a convergence study grid")
    p_study.add_argument("--config", help="key=value config file")
    p_study.add_argument("--problem", choices=sorted(PROBLEMS))
    p_study.add_argument("--epsilon-list", dest="epsilon_list",
                         help="comma-separated epsilons (decimal or 2^-k)")
    p_study.add_argument("--n-list", dest="n_list", help="comma-separated even integers")
    p_study.add_argument("--solver", choices=_SOLVER_CHOICES)
    p_study.add_argument("--tol", help="fixed-point stopping tolerance")
    p_study.add_argument("--output-dir", dest="output_dir")
    p_study.add_argument("--formats", help="comma-separated subset of csv,markdown")
    p_study.set_defaults(func=cmd_study)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
