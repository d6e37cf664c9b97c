"""Command-line interface.

Subcommands wire laws, sieves, lifts, predictions, Monte Carlo and the
joint-spectral-radius search into reproducible JSON/CSV reports. Every
output embeds a ``schema_version`` field and an echo of the run
configuration, all numbers are printed with 12 significant digits, and
every subcommand is deterministic given its full flag set (including the
seed).

Exit codes: 0 success, 1 input error, 2 policy/validation failure,
3 resource cap exceeded. The environment variable MATMULT_THREADS
overrides Monte Carlo parallelism (default: all cores); parallelism never
changes results.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .errors import (
    CapExceededError,
    IllConditionedError,
    IntegrityError,
    InvariantError,
    LawFormatError,
    MatmultError,
)
from .jsr import gripenberg, rho_2k
from .law import load_law, validate_law
from .lift import build_transfer, char_poly, exact_moment_sequence, spectral_decompose, verify_recurrence
from .moments import exact_second_moment, mc_moment
from .selberg import DEFAULT_PRIME_BOUND, expansion_constants, predict_second_moment
from .sieve import build_sieve, sum_z_omega

SCHEMA_VERSION = 1

REPORT_COLUMNS = ["x", "exact", "pred_N1", "pred_N2", "mc", "mc_stderr", "ratio_exact_over_pred_N2"]


class PolicyFailure(MatmultError):
    """A --require-* policy was violated (exit code 2)."""


def _fmt(v: float) -> float:
    """Round to 12 significant digits for reproducible diffs."""
    return float(f"{v:.12g}")


def _enc(obj):
    """Make an object JSON-serializable with the 12-digit convention."""
    if isinstance(obj, dict):
        return {k: _enc(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_enc(v) for v in obj]
    if isinstance(obj, (complex, np.complexfloating)):
        return [_fmt(obj.real), _fmt(obj.imag)]
    if isinstance(obj, (float, np.floating)):
        return _fmt(float(obj))
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.ndarray):
        return _enc(obj.tolist())
    return obj


def _emit(args, payload: dict) -> None:
    text = json.dumps(_enc(payload), indent=2) + "\n"
    if getattr(args, "out", None):
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)


def _config_echo(args, keys) -> dict:
    return {k: getattr(args, k.replace("-", "_")) for k in keys}


def _resolve_flavor(args, law) -> str:
    if args.flavor == "auto":
        return "REAL" if law.field_flag == "REAL" else "COMPLEX"
    return args.flavor.upper()


def _lift_and_sequence(law, flavor, n_extra: int = 4):
    op = build_transfer(law, 1, flavor=flavor)
    n_max = max(2 * op.l + n_extra, 16)
    seq = exact_moment_sequence(op, n_max)
    return op, seq


def cmd_validate(args) -> int:
    law = load_law(args.law)
    report = validate_law(law)
    payload = {
        "schema_version": SCHEMA_VERSION,
        "command": "validate",
        "config": _config_echo(args, ["law", "require_mean_zero"]),
        "dim": law.dim,
        "n_atoms": law.n_atoms,
        "field_flag": law.field_flag,
        "mean": report.mean,
        "is_mean_zero": report.is_mean_zero,
        "is_symmetric_law": report.is_symmetric_law,
        "second_hs_moment": report.second_hs_moment,
    }
    _emit(args, payload)
    if args.require_mean_zero and not report.is_mean_zero:
        raise PolicyFailure("law is not mean zero")
    return 0


def cmd_operator(args) -> int:
    law = load_law(args.law)
    flavor = _resolve_flavor(args, law)
    op = build_transfer(law, args.k, flavor=flavor)
    cp = char_poly(op)
    payload = {
        "schema_version": SCHEMA_VERSION,
        "command": "operator",
        "config": _config_echo(args, ["law", "k", "flavor"]),
        "dim": op.dim,
        "k": op.k,
        "field_flavor": op.field_flavor,
        "l": op.l,
        "basis": [list(s) for s in op.basis],
        "rep": op.rep,
        "identity_vec": op.identity_vec,
        "trace_vec": op.trace_vec,
        "char_poly": list(cp.coeffs),
    }
    _emit(args, payload)
    return 0


def cmd_recurrence(args) -> int:
    law = load_law(args.law)
    flavor = _resolve_flavor(args, law)
    op = build_transfer(law, args.k, flavor=flavor)
    cp = char_poly(op)
    n_max = args.n_max if args.n_max is not None else 2 * op.l + 4
    seq = exact_moment_sequence(op, n_max)
    residuals = verify_recurrence(seq, cp)
    payload = {
        "schema_version": SCHEMA_VERSION,
        "command": "recurrence",
        "config": _config_echo(args, ["law", "k", "flavor", "n_max"]),
        "l": op.l,
        "char_poly": list(cp.coeffs),
        "moments": seq.values,
        "residuals": residuals,
        "max_residual": float(np.max(residuals)),
    }
    _emit(args, payload)
    return 0


def _spectral_payload(sd) -> dict:
    return {
        "lambdas": sd.lambdas,
        "mults": list(sd.mults),
        "betas": sd.betas,
        "g_polys": [list(g) for g in sd.g_polys],
        "degrees": list(sd.degrees),
        "R": sd.R,
        "L1": list(sd.L1),
        "L2": list(sd.L2),
        "L2_prime": list(sd.L2_prime),
        "L3": list(sd.L3),
        "d_max": sd.d_max,
    }


def cmd_constants(args) -> int:
    law = load_law(args.law)
    flavor = _resolve_flavor(args, law)
    op, seq = _lift_and_sequence(law, flavor)
    sd = spectral_decompose(op, seq)
    exp = expansion_constants(sd, args.N, prime_bound=args.prime_bound)
    payload = {
        "schema_version": SCHEMA_VERSION,
        "command": "constants",
        "config": _config_echo(args, ["law", "N", "prime_bound", "flavor"]),
        "spectral": _spectral_payload(sd),
        "terms": [{"lambda": lam, "m": m, "C": c} for lam, m, c in exp.terms],
        "defective_terms": [
            {"lambda": lam, "d_max": dm, "C": c} for lam, dm, c in exp.defective_terms
        ],
        "N": exp.N,
        "error_exponent": exp.error_exponent,
    }
    _emit(args, payload)
    return 0


def cmd_exact(args) -> int:
    law = load_law(args.law)
    flavor = _resolve_flavor(args, law)
    table = build_sieve(args.x)
    op = build_transfer(law, 1, flavor=flavor)
    seq = exact_moment_sequence(op, len(table.hist) - 1)
    value = exact_second_moment(table, seq)
    payload = {
        "schema_version": SCHEMA_VERSION,
        "command": "exact",
        "config": _config_echo(args, ["law", "x", "flavor"]),
        "x": args.x,
        "k": 1,
        "exact": value,
        "squarefree_count": table.squarefree_count,
    }
    _emit(args, payload)
    return 0


def cmd_mc(args) -> int:
    law = load_law(args.law)
    table = build_sieve(args.x)
    report = mc_moment(law, table, args.k, args.trials, args.seed)
    exact = None
    if args.k == 1:
        flavor = _resolve_flavor(args, law)
        op = build_transfer(law, 1, flavor=flavor)
        seq = exact_moment_sequence(op, len(table.hist) - 1)
        exact = exact_second_moment(table, seq)
    payload = {
        "schema_version": SCHEMA_VERSION,
        "command": "mc",
        "config": _config_echo(args, ["law", "x", "k", "trials", "seed"]),
        "x": report.x,
        "k": report.k,
        "mc_estimate": report.mc_estimate,
        "mc_stderr": report.mc_stderr,
        "trials": report.trials,
        "seed": report.seed,
        "exact": exact,
    }
    _emit(args, payload)
    return 0


def cmd_jsr(args) -> int:
    law = load_law(args.law)
    bounds = gripenberg(
        law.atoms, delta=args.delta, max_depth=args.max_depth, node_budget=args.budget
    )
    payload = {
        "schema_version": SCHEMA_VERSION,
        "command": "jsr",
        "config": _config_echo(args, ["law", "delta", "max_depth", "budget"]),
        "n_atoms": law.n_atoms,
        "lower": bounds.lower,
        "upper": bounds.upper,
        "depth": bounds.depth,
        "delta": bounds.delta,
        "complete": bounds.complete,
        "rho_2": rho_2k(law, 1),
    }
    _emit(args, payload)
    return 0


def cmd_sieve_stats(args) -> int:
    table = build_sieve(args.x)
    if args.format == "csv":
        lines = ["# matmult sieve-stats schema_version=%d" % SCHEMA_VERSION]
        lines.append("# config: " + json.dumps(_enc(_config_echo(args, ["x", "format"]))))
        lines.append("r,count")
        for r, count in enumerate(table.hist):
            lines.append(f"{r},{int(count)}")
        text = "\n".join(lines) + "\n"
        if args.out:
            Path(args.out).write_text(text)
        else:
            sys.stdout.write(text)
        return 0
    payload = {
        "schema_version": SCHEMA_VERSION,
        "command": "sieve-stats",
        "config": _config_echo(args, ["x", "format"]),
        "x": args.x,
        "squarefree_count": table.squarefree_count,
        "hist": [int(c) for c in table.hist],
    }
    _emit(args, payload)
    return 0


def _parse_grid(text: str) -> list[int]:
    text = (text or "").strip()
    if not text:
        return []
    parts = text.split(":")
    if len(parts) != 3:
        raise InvariantError("x-grid must look like a:b:mult")
    try:
        lo, hi, mult = float(parts[0]), float(parts[1]), float(parts[2])
    except ValueError as exc:
        raise InvariantError(f"cannot parse x-grid {text!r}") from exc
    if lo < 1 or hi < lo or mult <= 1:
        raise InvariantError("x-grid needs 1 <= a <= b and mult > 1")
    grid = []
    v = lo
    while v <= hi * (1 + 1e-9):
        grid.append(int(round(v)))
        v *= mult
    return grid


def cmd_report(args) -> int:
    grid = _parse_grid(args.x_grid)
    rows: list[dict] = []
    notes: list[str] = []
    config = _config_echo(
        args, ["law", "x_grid", "trials", "seed", "N", "prime_bound", "flavor"]
    )
    if grid:
        law = load_law(args.law)
        flavor = _resolve_flavor(args, law)
        op, seq = _lift_and_sequence(law, flavor)
        sd = spectral_decompose(op, seq)
        exp1 = expansion_constants(sd, 1, prime_bound=args.prime_bound)
        exp2 = expansion_constants(sd, 2, prime_bound=args.prime_bound)
        for x in grid:
            row = dict.fromkeys(REPORT_COLUMNS)
            row["x"] = x
            table = None
            try:
                table = build_sieve(x)
                row["exact"] = exact_second_moment(table, seq)
            except MatmultError as exc:
                notes.append(f"x={x} exact: {exc}")
            try:
                row["pred_N1"] = predict_second_moment(exp1, x)
                row["pred_N2"] = predict_second_moment(exp2, x)
            except MatmultError as exc:
                notes.append(f"x={x} prediction: {exc}")
            if args.trials > 0 and table is not None:
                try:
                    mc = mc_moment(law, table, 1, args.trials, args.seed)
                    row["mc"] = mc.mc_estimate
                    row["mc_stderr"] = mc.mc_stderr
                except MatmultError as exc:
                    notes.append(f"x={x} mc: {exc}")
            if row["exact"] is not None and row["pred_N2"]:
                row["ratio_exact_over_pred_N2"] = row["exact"] / row["pred_N2"]
            rows.append(row)

    lines = ["# matmult report schema_version=%d" % SCHEMA_VERSION]
    lines.append("# config: " + json.dumps(_enc(config)))
    lines.append(",".join(REPORT_COLUMNS))
    for row in rows:
        cells = []
        for col in REPORT_COLUMNS:
            v = row[col]
            if v is None:
                cells.append("")
            elif isinstance(v, float):
                cells.append(f"{v:.12g}")
            else:
                cells.append(str(v))
        lines.append(",".join(cells))
    for note in notes:
        lines.append("# partial: " + note)
    text = "\n".join(lines) + "\n"
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)

    fig_path = args.fig
    if fig_path is None and args.out and not args.no_fig:
        fig_path = str(Path(args.out).with_suffix(".png"))
    if fig_path and not args.no_fig and rows:
        from .figures import render_report_figure

        render_report_figure(rows, fig_path, title=Path(args.law).stem)
    return 0


def _add_common(p: argparse.ArgumentParser, *, law=True, out=True):
    if law:
        p.add_argument("--law", required=True, help="path to a .law.json file")
    if out:
        p.add_argument("--out", default=None, help="output path (default: stdout)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="matmult",
        description="Moments of random matrix-valued multiplicative functions.",
        epilog="Exit codes: 0 success, 1 input error, 2 policy/validation, 3 resource cap.",
    )
    parser.add_argument("--version", action="version", version=f"matmult {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="load a law file and print its validation report")
    _add_common(p)
    p.add_argument("--require-mean-zero", action="store_true")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("operator", help="dump the symmetric-power lift and its char poly")
    _add_common(p)
    p.add_argument("--k", type=int, default=1)
    p.add_argument("--flavor", choices=["auto", "real", "complex"], default="auto")
    p.set_defaults(func=cmd_operator)

    p = sub.add_parser("recurrence", help="moment sequence and recurrence residuals")
    _add_common(p)
    p.add_argument("--k", type=int, default=1)
    p.add_argument("--flavor", choices=["auto", "real", "complex"], default="auto")
    p.add_argument("--n-max", type=int, default=None, help="default: 2l + 4")
    p.set_defaults(func=cmd_recurrence)

    p = sub.add_parser("constants", help="spectral data and expansion constants")
    _add_common(p)
    p.add_argument("--N", type=int, default=2, choices=[1, 2])
    p.add_argument("--prime-bound", type=int, default=DEFAULT_PRIME_BOUND)
    p.add_argument("--flavor", choices=["auto", "real", "complex"], default="auto")
    p.set_defaults(func=cmd_constants)

    p = sub.add_parser("exact", help="exact second moment at one x")
    _add_common(p)
    p.add_argument("--x", type=int, default=10**4)
    p.add_argument("--flavor", choices=["auto", "real", "complex"], default="auto")
    p.set_defaults(func=cmd_exact)

    p = sub.add_parser("mc", help="Monte Carlo moment at one x")
    _add_common(p)
    p.add_argument("--x", type=int, default=10**4)
    p.add_argument("--k", type=int, default=1)
    p.add_argument("--trials", type=int, default=1000)
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--flavor", choices=["auto", "real", "complex"], default="auto")
    p.set_defaults(func=cmd_mc)

    p = sub.add_parser("jsr", help="bracket the joint spectral radius of the law's support")
    _add_common(p)
    p.add_argument("--delta", type=float, default=1e-3)
    p.add_argument("--max-depth", type=int, default=16)
    p.add_argument("--budget", type=int, default=10**7)
    p.set_defaults(func=cmd_jsr)

    p = sub.add_parser("sieve-stats", help="squarefree count and the omega histogram")
    _add_common(p, law=False)
    p.add_argument("--x", type=int, default=10**4)
    p.add_argument("--format", choices=["json", "csv"], default="json")
    p.set_defaults(func=cmd_sieve_stats)

    p = sub.add_parser("report", help="exact vs predicted vs Monte Carlo over an x grid (CSV + figure)")
    _add_common(p)
    p.add_argument("--x-grid", default="1000:100000:10", help="geometric grid a:b:mult")
    p.add_argument("--trials", type=int, default=1000, help="Monte Carlo trials per x (0 disables)")
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--N", type=int, default=2, choices=[1, 2])
    p.add_argument("--prime-bound", type=int, default=DEFAULT_PRIME_BOUND)
    p.add_argument("--flavor", choices=["auto", "real", "complex"], default="auto")
    p.add_argument("--fig", default=None, help="figure path (default: CSV path with .png)")
    p.add_argument("--no-fig", action="store_true", help="skip figure rendering")
    p.set_defaults(func=cmd_report)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args) or 0
    except PolicyFailure as exc:
        print(f"matmult: policy: {exc}", file=sys.stderr)
        return 2
    except (LawFormatError, InvariantError) as exc:
        print(f"matmult: input error: {exc}", file=sys.stderr)
        return 1
    except (FileNotFoundError, IsADirectoryError, PermissionError) as exc:
        print(f"matmult: input error: {exc}", file=sys.stderr)
        return 1
    except (IntegrityError, IllConditionedError) as exc:
        print(f"matmult: validation failure: {exc}", file=sys.stderr)
        return 2
    except CapExceededError as exc:
        print(f"matmult: resource cap: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
