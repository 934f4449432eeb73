"""Command-line interface: ``cgfactorial analyze | simulate | export-curves``.

Exit codes: 0 success, 2 usage error, 3 input/ingestion error, 4 numerical
failure (undefined tau, degenerate covariance, parameter overflow).
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
import warnings
from pathlib import Path

import numpy as np

from . import __version__
from .contrasts import ContrastKind, contrast_for, load_contrast_csv
from .copulas import Family, kendalls_tau, make_copula
from .effects import Dataset, estimate_effects
from .exceptions import CGFactorialError, ContrastError, DataValidationError
from .inference import METHODS, confidence_intervals, f_test, jackknife_covariance
from .simulation import ALPHAS, get_scenario, misspecification_sweep
from .survival import cg_survival

EXIT_USAGE, EXIT_INPUT, EXIT_NUMERIC = 2, 3, 4
SEED_ENV = "CGFACTORIAL_SEED"
ONE_WAY_HEADER = ("time", "status", "group")
TWO_WAY_HEADER = ("time", "status", "factor_a", "factor_b")
MIN_GROUP_SIZE = 3


def read_csv(path, layout: str | None = None) -> Dataset:
    """Load a one-way (``time,status,group``) or two-way (``time,status,factor_a,factor_b``) CSV.

    ``layout`` is inferred from the header when omitted. Errors name the
    offending line (the header is line 1).
    """
    path = Path(path)
    try:
        fh = path.open(newline="")
    except OSError as exc:
        raise DataValidationError(f"cannot open {path}: {exc.strerror}") from None
    with fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise DataValidationError(f"{path} is empty")
        header = tuple(h.strip().lower() for h in header)
        if layout is None:
            layout = "two-way" if "factor_a" in header else "one-way"
        expected = TWO_WAY_HEADER if layout == "two-way" else ONE_WAY_HEADER
        missing = [c for c in expected if c not in header]
        if missing:
            raise DataValidationError(
                f"{path}: header must contain {','.join(expected)} (missing {','.join(missing)})"
            )
        cols = [header.index(c) for c in expected]
        times, status, labels = [], [], []
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not f.strip() for f in row):
                continue
            fields = [row[c].strip() if c < len(row) else "" for c in cols]
            if any(f == "" for f in fields):
                raise DataValidationError(f"{path}, line {lineno}: missing field")
            try:
                t = float(fields[0])
            except ValueError:
                raise DataValidationError(f"{path}, line {lineno}: time {fields[0]!r} is not a number") from None
            if not math.isfinite(t) or t <= 0:
                raise DataValidationError(f"{path}, line {lineno}: time must be positive, got {fields[0]}")
            if fields[1] not in ("0", "1"):
                raise DataValidationError(f"{path}, line {lineno}: status must be 0 or 1, got {fields[1]!r}")
            times.append(t)
            status.append(int(fields[1]))
            labels.append(fields[2:])
    if not times:
        raise DataValidationError(f"{path} has no data rows")
    labels = np.array(labels, dtype=object).astype(str)
    if layout == "two-way":
        data = Dataset.two_way(times, status, labels[:, 0], labels[:, 1])
    else:
        data = Dataset.one_way(times, status, labels[:, 0])
    small = [g for g in data.groups if g.n < MIN_GROUP_SIZE]
    if small:
        g = small[0]
        raise DataValidationError(
            f"{path}: group {group_name(g.label)} has {g.n} subject(s); at least {MIN_GROUP_SIZE} are required"
        )
    return data


def group_name(label) -> str:
    return ":".join(map(str, label)) if isinstance(label, tuple) else str(label)


def _finite(x):
    if x is None:
        return None
    x = float(x)
    return x if math.isfinite(x) else None


def _contrast(args, data: Dataset):
    if args.contrast_file:
        return load_contrast_csv(args.contrast_file, data.d)
    return contrast_for(ContrastKind(args.contrast), data.d, data.layout)


def analyze(args) -> dict:
    """Per-theta effects, jackknife SEs, CIs and F-test as a JSON-ready report."""
    caught = []
    with warnings.catch_warnings(record=True) as rec:
        warnings.simplefilter("always")
        data = read_csv(args.input, args.layout)
        C = _contrast(args, data)
        blocks = []
        for theta in args.theta:
            cop = make_copula(args.copula, theta)
            est = estimate_effects(data, cop, args.tau)
            cov = jackknife_covariance(data, cop, est.tau_used)
            ci = confidence_intervals(est, cov, args.alpha, args.ci_scale)
            res = f_test(est.p_hat, cov.v_asym, data.N, C, args.alpha, args.method, args.reps, args.seed)
            blocks.append({
                "theta": float(theta),
                "tau_used": est.tau_used,
                "effects": [
                    {"group": group_name(lab), "p_hat": float(p), "se": float(s),
                     "ci_lo": float(lo), "ci_hi": float(hi)}
                    for lab, p, s, (lo, hi) in zip(data.labels, est.p_hat, cov.se, ci)
                ],
                "test": {
                    "f": _finite(res.f_value),
                    "crit_sim": _finite(res.crit_sim),
                    "crit_analytic": _finite(res.crit_analytic),
                    "p_sim": _finite(res.p_sim),
                    "p_analytic": _finite(res.p_analytic),
                    "f_hat_dof": _finite(res.f_hat_dof),
                },
            })
    for w in rec:
        msg = str(w.message)
        if msg not in caught:
            caught.append(msg)
    return {
        "config_echo": {
            "input": str(args.input),
            "layout": data.layout.kind,
            "groups": [group_name(lab) for lab in data.labels],
            "copula": args.copula,
            "theta": [float(t) for t in args.theta],
            "tau": args.tau,
            "contrast": "custom" if args.contrast_file else args.contrast,
            "contrast_file": args.contrast_file,
            "alpha": args.alpha,
            "method": args.method,
            "reps": args.reps,
            "seed": args.seed,
            "seed_source": args.seed_source,
            "ci_scale": args.ci_scale,
        },
        "per_theta": blocks,
        "warnings": caught,
    }


def _fmt(x, digits):
    return "-" if x is None else f"{x:.{digits}f}"


def format_report(report: dict) -> str:
    cfg = report["config_echo"]
    lines = []
    for block in report["per_theta"]:
        cop = make_copula(cfg["copula"], block["theta"])
        lines.append(
            f"theta = {block['theta']:g} ({cfg['copula']}, Kendall's tau = {kendalls_tau(cop):.2f}), "
            f"tau = {block['tau_used']:g}"
        )
        width = max(8, *(len(e["group"]) for e in block["effects"]))
        lines.append(f"  {'group':<{width}}  {'p_hat':>6}  {'SE':>6}  {int(round(100 * (1 - cfg['alpha'])))}% CI")
        for e in block["effects"]:
            lines.append(
                f"  {e['group']:<{width}}  {e['p_hat']:6.3f}  {e['se']:6.3f}  ({e['ci_lo']:.3f}, {e['ci_hi']:.3f})"
            )
        t = block["test"]
        lines.append(
            f"  F = {_fmt(t['f'], 4)}  crit(sim) = {_fmt(t['crit_sim'], 4)}  "
            f"crit(analytic) = {_fmt(t['crit_analytic'], 4)}  p(sim) = {_fmt(t['p_sim'], 4)}  "
            f"p(analytic) = {_fmt(t['p_analytic'], 4)}  f_hat = {_fmt(t['f_hat_dof'], 4)}"
        )
        lines.append("")
    for w in report["warnings"]:
        lines.append(f"warning: {w}")
    return "\n".join(lines).rstrip() + "\n"


def export_curves(data: Dataset, copula: str, thetas, path) -> int:
    """Write every group's step-curve knots as ``group,theta,time,survival``; returns row count."""
    rows = 0
    try:
        fh = open(path, "w", newline="")
    except OSError as exc:
        raise DataValidationError(f"cannot write {path}: {exc.strerror}") from None
    with fh:
        w = csv.writer(fh)
        w.writerow(["group", "theta", "time", "survival"])
        for theta in thetas:
            cop = make_copula(copula, theta)
            for g in data.groups:
                times, levels = cg_survival(g, cop).knots()
                for t, s in zip(times, levels):
                    w.writerow([group_name(g.label), repr(float(theta)), repr(float(t)), repr(float(s))])
                    rows += 1
    return rows


def simulate(args) -> dict:
    s = get_scenario(args.scenario)
    summaries = misspecification_sweep(s, args.n, args.theta_fit, args.reps, args.seed, ALPHAS,
                                       args.n_sim, args.jobs)
    return {
        "config_echo": {
            "scenario": s.id, "n": args.n, "reps": args.reps, "theta_fit": list(args.theta_fit),
            "seed": args.seed, "seed_source": args.seed_source, "n_sim": args.n_sim, "alphas": list(ALPHAS),
        },
        "summaries": [x.to_dict() for x in summaries],
    }


def format_simulation(report: dict) -> str:
    cfg = report["config_echo"]
    head = "  ".join(f"a={a:.2f}" for a in cfg["alphas"])
    lines = [f"Scenario {cfg['scenario']}, n_i = {cfg['n']}, {cfg['reps']} replications", "",
             f"{'theta_fit':>9}  {'method':<9} {head}"]
    for s in report["summaries"]:
        for k, method in enumerate(("sim", "analytic")):
            rates = "  ".join(f"{s['rejection'][method][str(a)]:6.3f}" for a in cfg["alphas"])
            lead = f"{s['theta_fit']:9g}" if k == 0 else " " * 9
            lines.append(f"{lead}  {method:<9} {rates}")
    lines += ["", f"{'theta_fit':>9}  {'effect':<7} {'true':>6} {'mean':>6} {'bias':>7} {'SD':>6} {'SE':>6} {'CP':>6}"]
    for s in report["summaries"]:
        for i in range(len(s["true_p"])):
            lead = f"{s['theta_fit']:9g}" if i == 0 else " " * 9
            lines.append(
                f"{lead}  p{i + 1:<6} {s['true_p'][i]:6.3f} {s['mean'][i]:6.3f} {s['bias'][i]:7.4f} "
                f"{s['sd'][i]:6.3f} {s['mean_se'][i]:6.3f} {s['coverage'][i]:6.3f}"
            )
        if s["n_failed"]:
            lines.append(f"{'':9}  ({s['n_failed']} failed replications)")
    return "\n".join(lines) + "\n"


def _tau_arg(text: str):
    if text.lower() == "auto":
        return "auto"
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"tau must be a positive number or 'auto', got {text!r}") from None
    if not value > 0:
        raise argparse.ArgumentTypeError(f"tau must be positive, got {text}")
    return value


def _alpha_arg(text: str) -> float:
    value = float(text)
    if not 0 < value < 1:
        raise argparse.ArgumentTypeError(f"alpha must lie in (0, 1), got {text}")
    return value


def _add_data_args(p):
    p.add_argument("input", help="CSV with columns time,status,group or time,status,factor_a,factor_b")
    p.add_argument("--layout", choices=("one-way", "two-way"), help="default: inferred from the header")
    p.add_argument("--copula", default="clayton",
                   choices=[f.value for f in Family if f is not Family.FGM])
    p.add_argument("--theta", type=float, nargs="+", default=[0.0, 2.0, 4.0, 8.0],
                   help="copula parameters for the sensitivity analysis (default: 0 2 4 8)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cgfactorial", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    a = sub.add_parser("analyze", help="estimate effects and test a hypothesis for each theta")
    _add_data_args(a)
    a.add_argument("--tau", type=_tau_arg, default="auto")
    a.add_argument("--contrast", default="global", choices=[k.value for k in ContrastKind if k is not ContrastKind.CUSTOM])
    a.add_argument("--contrast-file", help="header-less CSV with an r x d contrast matrix (overrides --contrast)")
    a.add_argument("--alpha", type=_alpha_arg, default=0.05)
    a.add_argument("--method", choices=METHODS, default="both")
    a.add_argument("--reps", type=int, default=1000, help="simulated null draws (default 1000)")
    a.add_argument("--seed", type=int, default=None, help=f"default: ${SEED_ENV} or 0")
    a.add_argument("--ci-scale", choices=("plain", "logit"), default="plain")
    a.add_argument("--json", dest="json_out", help="write the JSON report here ('-' for stdout)")
    a.add_argument("--quiet", action="store_true", help="suppress the text table")

    s = sub.add_parser("simulate", help="replicate the simulation study for one scenario")
    s.add_argument("--scenario", type=int, required=True, choices=range(1, 10), metavar="{1..9}")
    s.add_argument("--n", type=int, default=100, help="subjects per group")
    s.add_argument("--reps", type=int, default=500)
    s.add_argument("--theta-fit", type=float, nargs="+", default=[2.0])
    s.add_argument("--seed", type=int, default=None, help=f"default: ${SEED_ENV} or 0")
    s.add_argument("--n-sim", type=int, default=1000, help="simulated null draws per test")
    s.add_argument("--jobs", type=int, default=1)
    s.add_argument("--json", dest="json_out")
    s.add_argument("--quiet", action="store_true")

    e = sub.add_parser("export-curves", help="write CG survival curves as long-format CSV")
    _add_data_args(e)
    e.add_argument("--output", "-o", required=True)
    return parser


def _resolve_seed(args) -> None:
    if getattr(args, "seed", None) is not None:
        args.seed_source = "argument"
    elif os.environ.get(SEED_ENV):
        args.seed = int(os.environ[SEED_ENV])
        args.seed_source = f"env:{SEED_ENV}"
    else:
        args.seed = 0
        args.seed_source = "default"


def _emit_json(report: dict, dest: str | None) -> None:
    if not dest:
        return
    text = json.dumps(report, indent=2, allow_nan=False) + "\n"
    if dest == "-":
        sys.stdout.write(text)
    else:
        Path(dest).write_text(text)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "analyze":
            _resolve_seed(args)
            if args.method != "analytic" and args.reps < 100:
                parser.error("--reps must be >= 100 when the simulation method is requested")
            report = analyze(args)
            if not args.quiet and args.json_out != "-":
                sys.stdout.write(format_report(report))
            _emit_json(report, args.json_out)
        elif args.command == "simulate":
            _resolve_seed(args)
            if args.reps < 100:
                parser.error("--reps must be >= 100")
            report = simulate(args)
            if not args.quiet and args.json_out != "-":
                sys.stdout.write(format_simulation(report))
            _emit_json(report, args.json_out)
        else:
            with warnings.catch_warnings():
                warnings.simplefilter("ignore")
                data = read_csv(args.input, args.layout)
            rows = export_curves(data, args.copula, args.theta, args.output)
            sys.stderr.write(f"wrote {rows} rows to {args.output}\n")
    except (DataValidationError, ContrastError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_INPUT
    except (CGFactorialError, ArithmeticError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_NUMERIC
    return 0


if __name__ == "__main__":
    sys.exit(main())
