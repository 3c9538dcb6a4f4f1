"""Command-line entry point.

Exit status: 0 when the run meets its acceptance thresholds (or the file is
valid), 1 when it does not, 2 for parse or validation errors.  Output goes to
``--out``, else ``$BCTRACK_OUT``, else ``./bctrack-out``.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

from . import engine, ftpf, io, metrics, scenario
from .errors import BctrackError, ValidationError

ENV_OUT = "BCTRACK_OUT"
DEFAULT_OUT = "bctrack-out"
EXIT_PASS, EXIT_FAIL, EXIT_INVALID = 0, 1, 2


def _out_dir(arg, name):
    base = Path(arg) if arg else Path(os.environ.get(ENV_OUT, DEFAULT_OUT))
    return base / name if not arg else base


def execute(sc, runs, seed, out, t_end=None, plots=True, echo=print):
    """Run an ensemble, write traces and summaries, return the summary."""
    out.mkdir(parents=True, exist_ok=True)

    def progress(k, tr):
        status = "ok" if tr.ok else f"FAILED ({tr.failure})"
        echo(f"  run {k + 1}/{runs} seed={tr.seed}: {status}")

    res = engine.run_ensemble(sc, runs, seed, t_end=t_end, progress=progress)
    for tr in res.traces:
        io.export_csv(tr, out / f"run_{tr.seed}.csv")
    summary = metrics.summarize(sc, res.traces, res.seeds)
    stats = metrics.ensemble_statistics(res.traces, sc, summary.window_start)
    io.write_summary(summary, stats, out)
    if plots:
        from . import plotting
        plotting.render_report(sc, res.traces, stats, out)
    return summary


def _report(summary, out, echo=print):
    echo(f"scenario {summary.scenario}: {summary.n_runs} runs, window t >= {summary.window_start:g}")
    echo("  mean sup|z| per agent: " + ", ".join(f"{v:.4g}" for v in summary.sup_abs_z_mean))
    echo(f"  worst ensemble mean |z|: {summary.max_mean_abs_z:.4g}")
    echo(f"  worst ensemble mean ||e~||: {summary.max_mean_tracking_norm:.4g}"
         f" (steady-state bound {summary.steady_state_bound:.4g})")
    echo(f"  runs within threshold: {summary.run_fraction_within:.0%}")
    echo(f"  envelope respected: {summary.envelope_ok}; certificate holds: {summary.certificate_ok}")
    echo(("PASS" if summary.passed else "FAIL: " + "; ".join(summary.reasons)) + f"  [{out}]")


def cmd_validate(args):
    failures = scenario.check_scenario(args.file)
    if failures:
        for f in failures:
            print(f"invalid: {f}", file=sys.stderr)
        return EXIT_INVALID
    print(f"{args.file}: valid")
    return EXIT_PASS


def _run(sc, args, name):
    out = _out_dir(args.out, name)
    runs = args.runs if args.runs is not None else sc.integrator.n_runs
    seed = args.seed if args.seed is not None else sc.integrator.seed
    summary = execute(sc, runs, seed, out, t_end=args.t_end, plots=not args.no_plots)
    _report(summary, out)
    return EXIT_PASS if summary.passed else EXIT_FAIL


def cmd_run(args):
    sc = scenario.load_scenario(args.file)
    return _run(sc, args, sc.name)


def cmd_replicate(args):
    return _run(scenario.load_preset(args.which), args, args.which)


def _profile(text):
    if text in scenario.PRESETS:
        return scenario.load_preset(text).profile
    if Path(text).is_file():
        return scenario.load_scenario(text).profile
    try:
        vals = [float(v) for v in text.split(",")]
        return ftpf.PerformanceProfile(*vals)
    except (TypeError, ValueError) as exc:
        raise ValidationError([f"profile {text!r}: expected a preset name, a scenario file or "
                               f"'sigma0,sigma_inf,varsigma,Ts' ({exc})"]) from None


def cmd_ftpf_table(args):
    p = _profile(args.profile)
    try:
        ts = [float(v) for v in args.t_list.split(",") if v.strip()]
    except ValueError:
        raise ValidationError([f"--t-list: cannot parse {args.t_list!r}"]) from None
    print("t,sigma,sigma_dot,sigma_ddot")
    for t in ts:
        print(f"{t:.17g},{p.sigma(t):.17g},{p.sigma_dot(t):.17g},{p.sigma_ddot(t):.17g}")
    return EXIT_PASS


def build_parser():
    ap = argparse.ArgumentParser(prog="bctrack", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    v = sub.add_parser("validate", help="check a scenario file and list every problem")
    v.add_argument("file")
    v.set_defaults(func=cmd_validate)

    def ensemble_flags(p):
        p.add_argument("--seed", type=int, help="base seed (run k uses seed + k)")
        p.add_argument("--runs", type=int, help="number of Monte-Carlo runs")
        p.add_argument("--out", help=f"output directory (default ${ENV_OUT}/<name>)")
        p.add_argument("--t-end", type=float, help="override the horizon in seconds")
        p.add_argument("--no-plots", action="store_true", help="skip figure rendering")

    r = sub.add_parser("run", help="run the ensemble described by a scenario file")
    r.add_argument("file")
    ensemble_flags(r)
    r.set_defaults(func=cmd_run)

    rp = sub.add_parser("replicate", help="run one of the embedded presets")
    rp.add_argument("which", choices=scenario.PRESETS)
    ensemble_flags(rp)
    rp.set_defaults(func=cmd_replicate)

    f = sub.add_parser("ftpf-table", help="tabulate the performance envelope")
    f.add_argument("profile", help="preset name, scenario file, or sigma0,sigma_inf,varsigma,Ts")
    f.add_argument("--t-list", required=True, help="comma-separated times")
    f.set_defaults(func=cmd_ftpf_table)
    return ap


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ValidationError as exc:
        for f in exc.failures:
            print(f"invalid: {f}", file=sys.stderr)
        return EXIT_INVALID
    except BctrackError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
