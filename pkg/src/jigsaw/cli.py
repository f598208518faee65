"""Command-line interface.

    jigsaw simulate --workload ghz --width 6 --out run/
    jigsaw reconstruct run/global.json run/cpm_*.json --out run/out.json
    jigsaw metrics run/out.json --ideal run/ideal.json
    jigsaw estimate-trials 2
    jigsaw pipeline --workload planted --width 10 --seed 3 --out exp/
    jigsaw scaling --out scaling.csv

Exit status is 0 on success, 2 for invalid input and 3 when reconstruction
hits a degenerate update.
"""

from __future__ import annotations

import argparse
import csv
import io as _io
import logging
import math
import sys
from dataclasses import asdict, dataclass
from pathlib import Path

from . import io
from .complexity import fit_slope, measure_scaling, write_scaling_csv
from .errors import DegenerateUpdateError, ValidationError
from .metrics import evaluate, read_maxcut
from .noise_sim import (DEFAULT_CROSSTALK_SLOPE, IdealSpec, LinearCrosstalk, NoiseProfile,
                        bernstein_vazirani, ghz, identity_assignment, ideal_distribution,
                        random_planted, sample_counts, spatial_profile)
from .pipeline import _GLOBAL, _rng, run_pipeline, simulate_cpms
from .pmf import align, from_counts
from .reconstruction import (ODDS, PROBABILITY, LayerSet, ReconstructionConfig,
                             bayesian_reconstruction, reconstruct_multilayer)
from .subsetting import (estimate_trials, multilayer_plan, random_plan, sliding_window_plan,
                         split_trials)

log = logging.getLogger("jigsaw")

EXIT_OK, EXIT_INVALID, EXIT_NUMERIC = 0, 2, 3


@dataclass
class RunConfig:
    workload: str = "ghz"
    width: int = 8
    secret: str | None = None
    signal: float = 0.5
    floor: int = 16
    ideal: str | None = None
    profile: str | None = None
    channels: int = 27
    median_error: float = 0.027
    max_error: float = 0.222
    crosstalk: float = DEFAULT_CROSSTALK_SLOPE
    subset_size: int = 2
    layers: str | None = None
    random_cpms: int | None = None
    trials: int = 65536
    split_fraction: float = 0.5
    tolerance: float = 1e-4
    max_rounds: int = 100
    weighting: str = PROBABILITY
    seed: int = 0

    @classmethod
    def from_args(cls, args) -> "RunConfig":
        names = cls.__dataclass_fields__
        return cls(**{k: v for k, v in vars(args).items() if k in names})


def _layers(text):
    try:
        lo, hi = (int(x) for x in text.split(":"))
    except ValueError:
        raise ValidationError(f"--layers expects smin:smax, got {text!r}") from None
    return lo, hi


def recon_config(cfg) -> ReconstructionConfig:
    return ReconstructionConfig(hellinger_tolerance=cfg.tolerance, max_rounds=cfg.max_rounds,
                                weighting=cfg.weighting)


def build_spec(cfg: RunConfig) -> IdealSpec:
    if cfg.workload == "ghz":
        return ghz(cfg.width)
    if cfg.workload == "bv":
        secret = cfg.secret or "1" * cfg.width
        if len(secret) != cfg.width:
            raise ValidationError(f"secret {secret!r} does not have width {cfg.width}")
        return bernstein_vazirani(secret)
    if cfg.workload == "planted":
        return random_planted(cfg.width, cfg.signal, cfg.floor, seed=cfg.seed)
    if cfg.workload == "custom":
        if not cfg.ideal:
            raise ValidationError("--workload custom needs --ideal FILE")
        pmf = io.read_pmf(cfg.ideal)
        return IdealSpec("custom", pmf.width, pmf=pmf)
    raise ValidationError(f"unknown workload {cfg.workload!r}")


def build_profile(cfg: RunConfig) -> NoiseProfile:
    if cfg.profile:
        return io.read_profile(cfg.profile, crosstalk_slope=cfg.crosstalk, seed=cfg.seed)
    return spatial_profile(cfg.channels, cfg.median_error, cfg.max_error, seed=cfg.seed,
                           crosstalk=LinearCrosstalk(cfg.crosstalk))


def build_plan(cfg: RunConfig, width: int):
    if cfg.layers:
        lo, hi = _layers(cfg.layers)
        return multilayer_plan(width, lo, hi)
    if cfg.random_cpms:
        return random_plan(width, cfg.subset_size, cfg.random_cpms, seed=cfg.seed)
    return sliding_window_plan(width, cfg.subset_size)


def _cpm_name(qubits):
    return "cpm_" + "-".join(str(q) for q in sorted(qubits, reverse=True)) + ".json"


def _fmt(x):
    if x is None:
        return ""
    if isinstance(x, float) and math.isinf(x):
        return "inf"
    return repr(x)


# subcommands ---------------------------------------------------------------

def cmd_simulate(args) -> int:
    cfg = RunConfig.from_args(args)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    spec = build_spec(cfg)
    profile = build_profile(cfg)
    plan = build_plan(cfg, spec.width)
    budget = split_trials(cfg.trials, plan, cfg.split_fraction)
    plan.trials = dict(budget.per_cpm)
    ideal = ideal_distribution(spec)

    everything = list(range(spec.width - 1, -1, -1))
    global_counts = sample_counts(ideal, profile, identity_assignment(spec.width), everything,
                                  budget.global_trials, _rng(cfg.seed, _GLOBAL))
    io.write_counts(out / "global.json", global_counts, spec.width)
    for qubits, counts in simulate_cpms(ideal, profile, budget, cfg.seed):
        io.write_counts(out / _cpm_name(qubits), counts, spec.width, qubits)
    io.write_pmf(out / "ideal.json", ideal, correct=sorted(spec.correct_outcomes()))
    io.write_profile(out / "profile.json", profile)
    io.write_plan(out / "plan.json", plan)
    io.dump_json(asdict(cfg), out / "config.json")
    print(f"wrote global histogram and {len(budget.per_cpm)} CPM histograms to {out}")
    return EXIT_OK


def cmd_reconstruct(args) -> int:
    global_pmf = io.read_global(args.global_file)
    marginals = [io.read_marginal(path, global_pmf.width) for path in args.marginals]
    cfg = recon_config(args)
    history: list = []
    if len({m.width for m in marginals}) > 1:
        out = reconstruct_multilayer(global_pmf, LayerSet.from_marginals(marginals), cfg, history)
        convergence = [{"size": s, "hellinger": trace} for s, trace in history]
    else:
        out = bayesian_reconstruction(global_pmf, marginals, cfg, history)
        convergence = history
    io.write_pmf(args.out, out, convergence=convergence)
    if args.log:
        with open(args.log, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["layer", "round", "hellinger"])
            layers = history if history and isinstance(history[0], tuple) else [(None, history)]
            for size, trace in layers:
                for r, d in enumerate(trace, 1):
                    writer.writerow(["" if size is None else size, r, repr(d)])
    rounds = sum(len(t) for _, t in history) if history and isinstance(history[0], tuple) else len(history)
    print(f"reconstructed {len(out)} outcomes from {len(marginals)} marginals in {rounds} rounds -> {args.out}")
    return EXIT_OK


def _correct_from(args, ideal_path):
    if args.correct:
        return set(args.correct.split(","))
    data = io.load_json(ideal_path)
    if "correct" in data:
        return set(data["correct"])
    ideal = io.read_pmf(ideal_path)
    top = ideal.probs.max()
    return {o for o, p in ideal.items() if p >= top * (1 - 1e-12)}


def cmd_metrics(args) -> int:
    p = io.read_pmf(args.pmf)
    ideal = io.read_pmf(args.ideal)
    correct = _correct_from(args, args.ideal)
    graph = read_maxcut(args.graph) if args.graph else None
    report = evaluate(p, ideal, correct, graph)
    data = report.to_json()
    if args.verbose:
        u, v = align(ideal, p)
        data["tvd_raw"] = float(abs(u - v).sum())
    if args.json:
        io.dump_json(data, args.json)
    width = max(len(k) for k in data)
    for key, value in data.items():
        if value is not None:
            print(f"{key:<{width}}  {_fmt(value)}")
    return EXIT_OK


def cmd_estimate_trials(args) -> int:
    print(estimate_trials(args.subset_size, args.confidence))
    return EXIT_OK


COMPARISON_FIELDS = ["method", "trials", "pst", "ist", "tvd", "fidelity", "hellinger", "arg"]


def cmd_pipeline(args) -> int:
    cfg = RunConfig.from_args(args)
    out = Path(args.out)
    (out / "counts").mkdir(parents=True, exist_ok=True)
    spec = build_spec(cfg)
    profile = build_profile(cfg)
    plan = build_plan(cfg, spec.width)
    budget = split_trials(cfg.trials, plan, cfg.split_fraction)
    plan.trials = dict(budget.per_cpm)
    graph = read_maxcut(args.graph) if args.graph else None
    result = run_pipeline(spec, profile, plan, budget, recon_config(cfg), seed=cfg.seed, graph=graph)

    n = spec.width
    io.dump_json(asdict(cfg), out / "config.json")
    io.write_pmf(out / "ideal.json", result.ideal, correct=sorted(result.correct))
    io.write_profile(out / "profile.json", profile)
    io.write_plan(out / "plan.json", plan)
    io.write_counts(out / "counts" / "baseline.json", result.baseline_counts, n)
    io.write_counts(out / "counts" / "global.json", result.global_counts, n)
    for qubits, counts in result.marginal_counts:
        io.write_counts(out / "counts" / _cpm_name(qubits), counts, n, qubits)
    convergence = ([{"size": s, "hellinger": t} for s, t in result.history]
                   if result.history and isinstance(result.history[0], tuple) else result.history)
    io.write_pmf(out / "reconstructed.json", result.reconstructed, convergence=convergence)

    global_only = evaluate(from_counts(result.global_counts, n), result.ideal, result.correct, graph)
    rows = [
        {"method": "baseline", "trials": budget.total_trials, **result.baseline.to_json()},
        {"method": "global-only", "trials": budget.global_trials, **global_only.to_json()},
        {"method": "jigsaw-m" if len(plan.sizes) > 1 else "jigsaw", "trials": budget.total_trials,
         **result.report.to_json()},
    ]
    io.dump_json({"rows": rows, "pst_ratio": result.pst_ratio,
                  "fidelity_ratio": result.report.fidelity / result.baseline.fidelity
                  if result.baseline.fidelity > 0 else None}, out / "report.json")
    buf = _io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(COMPARISON_FIELDS)
    for row in rows:
        writer.writerow([row["method"], row["trials"]] + [_fmt(row[k]) for k in COMPARISON_FIELDS[2:]])
    (out / "comparison.csv").write_text(buf.getvalue())

    if not args.no_figures:
        from .plotting import plot_comparison, plot_convergence
        plot_comparison(rows, out / "pst.png", "pst")
        plot_comparison(rows, out / "fidelity.png", "fidelity")
        plot_convergence(result.history, out / "convergence.png")

    sys.stdout.write(buf.getvalue())
    print(f"PST ratio jigsaw/baseline: {result.pst_ratio:.4f}")
    return EXIT_OK


def cmd_scaling(args) -> int:
    sizes = [int(x) for x in args.entries.split(",")]
    cpms = [int(x) for x in args.cpms.split(",")]
    rows = measure_scaling(sizes, cpms, width=args.width, seed=args.seed, repeats=args.repeats)
    write_scaling_csv(rows, args.out)
    if args.figure:
        from .plotting import plot_scaling
        plot_scaling(rows, args.figure)
    for r in rows:
        print(f"{r.entries:>9} entries {r.n_cpms:>4} CPMs  {r.seconds * 1e3:9.3f} ms")
    try:
        print(f"slope: {fit_slope(rows):.3e} s per entry-CPM")
    except ValidationError:
        pass
    return EXIT_OK


# parser --------------------------------------------------------------------

def _add_recon_flags(p):
    p.add_argument("--tolerance", type=float, default=1e-4,
                   help="stop when the per-round Hellinger move changes by less than this")
    p.add_argument("--max-rounds", type=int, default=100)
    g = p.add_mutually_exclusive_group()
    g.add_argument("--weighting", choices=[PROBABILITY, ODDS], default=PROBABILITY)
    g.add_argument("--plain-probability-weight", dest="weighting", action="store_const",
                   const=PROBABILITY, help="scale groups by the marginal probability (default)")
    g.add_argument("--odds-weight", dest="weighting", action="store_const", const=ODDS,
                   help="scale groups by the marginal odds pr/(1-pr)")


def _add_run_flags(p):
    p.add_argument("--config", help="JSON file of defaults for any of these flags")
    p.add_argument("--workload", choices=["ghz", "bv", "planted", "custom"], default="ghz")
    p.add_argument("--width", type=int, default=8)
    p.add_argument("--secret", help="BV secret bitstring")
    p.add_argument("--signal", type=float, default=0.5, help="planted signal weight")
    p.add_argument("--floor", type=int, default=16, help="planted background size")
    p.add_argument("--ideal", help="PMF file for --workload custom")
    p.add_argument("--profile", help="JSON array of per-channel [e01, e10]")
    p.add_argument("--channels", type=int, default=27)
    p.add_argument("--median-error", type=float, default=0.027)
    p.add_argument("--max-error", type=float, default=0.222)
    p.add_argument("--crosstalk", type=float, default=DEFAULT_CROSSTALK_SLOPE,
                   help="slope c of kappa(k) = 1 + c (k - 1)")
    p.add_argument("--subset-size", type=int, default=2)
    p.add_argument("--layers", help="smin:smax for multi-layer plans")
    p.add_argument("--random-cpms", type=int, help="draw this many random CPMs instead of windows")
    p.add_argument("--trials", type=int, default=65536)
    p.add_argument("--split-fraction", type=float, default=0.5, help="share of trials for global mode")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    _add_recon_flags(p)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="jigsaw", description=__doc__.split("\n")[0])
    parser.add_argument("-v", "--verbose-log", action="store_true", help="debug logging")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="sample global and CPM histograms")
    _add_run_flags(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("reconstruct", help="Bayesian reconstruction from count files")
    p.add_argument("global_file")
    p.add_argument("marginals", nargs="*")
    p.add_argument("--out", required=True)
    p.add_argument("--log", help="CSV of per-round Hellinger moves")
    _add_recon_flags(p)
    p.set_defaults(func=cmd_reconstruct)

    p = sub.add_parser("metrics", help="score a PMF against the ideal distribution")
    p.add_argument("pmf")
    p.add_argument("--ideal", required=True)
    p.add_argument("--correct", help="comma-separated correct outcomes")
    p.add_argument("--graph", help="MaxCut edge list for ARG")
    p.add_argument("--json", help="also write the report here")
    p.add_argument("--verbose", action="store_true", help="include the unhalved TVD sum")
    p.set_defaults(func=cmd_metrics)

    p = sub.add_parser("estimate-trials", help="trials per CPM to see every outcome")
    p.add_argument("subset_size", type=int)
    p.add_argument("--confidence", type=float, default=0.9999)
    p.set_defaults(func=cmd_estimate_trials)

    p = sub.add_parser("pipeline", help="simulate, reconstruct and compare against baseline")
    _add_run_flags(p)
    p.add_argument("--graph", help="MaxCut edge list for ARG")
    p.add_argument("--no-figures", action="store_true")
    p.set_defaults(func=cmd_pipeline)

    p = sub.add_parser("scaling", help="time reconstruction against support size")
    p.add_argument("--entries", default="16384,32768,65536,131072")
    p.add_argument("--cpms", default="10,20")
    p.add_argument("--width", type=int, default=40)
    p.add_argument("--repeats", type=int, default=5)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.add_argument("--figure")
    p.set_defaults(func=cmd_scaling)
    return parser


def _apply_config(parser, argv):
    args = parser.parse_args(argv)
    path = getattr(args, "config", None)
    if not path:
        return args
    data = io.load_json(path)
    if not isinstance(data, dict):
        raise ValidationError(f"{path}: config must be a JSON object")
    known = set(RunConfig.__dataclass_fields__)
    unknown = set(data) - known
    if unknown:
        raise ValidationError(f"{path}: unknown config keys {sorted(unknown)}")
    # flags given on the command line win over the file
    sub = parser._subparsers._group_actions[0].choices[args.command]
    sub.set_defaults(**data)
    return parser.parse_args(argv)


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = _apply_config(parser, argv)
        logging.basicConfig(level=logging.DEBUG if args.verbose_log else logging.WARNING,
                            format="%(levelname)s %(name)s: %(message)s")
        return args.func(args)
    except DegenerateUpdateError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
