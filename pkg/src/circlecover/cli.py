"""Command line front end.

Exit codes: 0 ok, 2 validation error, 3 inconclusive-by-policy (a requested
verdict came back inconclusive).
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from .arcset import ArcSet
from .capacity import CoveringKernel, SupportMeasure, energy
from .coversim import TrialConfig, log_checkpoints, run_trials
from .density import DensitySpecError, PiecewisePolyDensity, analyze, flatness_partial
from .harness import (block_report, criteria_independence, criteria_report,
                      emit, phase_transition_sweep, VERDICT_INCONCLUSIVE)
from .sequences import SequenceSpecError, parse_sequence, series_diagnostics, shepp_classify
from . import coupling, harness

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_INCONCLUSIVE = 3


def _num_list(text):
    return [float(x) for x in text.split(",") if x.strip()]


def _int_list(text):
    return [int(float(x)) for x in text.split(",") if x.strip()]


def parse_target(text: str):
    """full | arc:<start>:<end>[,arc:...] | points:x1:x2... | point:x"""
    if text == "full":
        return "full"
    arcs, points = [], []
    for part in text.split(","):
        bits = part.split(":")
        if bits[0] == "arc" and len(bits) == 3:
            lo, hi = float(bits[1]), float(bits[2])
            arcs.append((lo, (hi - lo) % 1.0 if hi != lo else 0.0))
        elif bits[0] in ("point", "points"):
            points.extend(float(b) for b in bits[1:])
        elif bits[0] == "grid" and len(bits) in (2, 4):
            n = int(bits[1])
            lo, hi = (float(bits[2]), float(bits[3])) if len(bits) == 4 else (0.0, 1.0)
            points.extend(lo + (hi - lo) * (i + 0.5) / n for i in range(n))
        else:
            raise ValueError(f"bad target component {part!r}")
    if arcs and points:
        return ArcSet.from_arcs(arcs + [(p, 0.0) for p in points])
    if arcs:
        return ArcSet.from_arcs(arcs)
    return points


def parse_checkpoints(text: str, n_max: int):
    if text.startswith("log"):
        per = int(text.split(":")[1]) if ":" in text else 8
        return log_checkpoints(n_max, per)
    return tuple(_int_list(text))


def load_density(args) -> PiecewisePolyDensity:
    if getattr(args, "density_file", None):
        path = args.density_file
        with open(path, "rb") as fh:
            if path.endswith(".json"):
                obj = json.load(fh)
            else:
                try:
                    import tomllib
                except ImportError:
                    import tomli as tomllib
                obj = tomllib.load(fh)
        return PiecewisePolyDensity.from_spec(obj, name=path)
    return PiecewisePolyDensity.parse(args.density)


def _load_config(path):
    with open(path, "rb") as fh:
        if path.endswith(".json"):
            return json.load(fh)
        try:
            import tomllib
        except ImportError:
            import tomli as tomllib
        return tomllib.load(fh)


def build_parser(config: dict | None = None):
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--threads", type=int, default=1)
    common.add_argument("--out", default="-")
    common.add_argument("--format", choices=("csv", "jsonl"), default="jsonl")
    common.add_argument("--config", default=None, help="TOML/JSON defaults file")

    p = argparse.ArgumentParser(prog="circlecover",
                                description="random covering of the circle")
    sub = p.add_subparsers(dest="command", required=True)

    d = sub.add_parser("density", parents=[common], help="analyze a density")
    d.add_argument("--density", default="uniform")
    d.add_argument("--density-file")
    d.add_argument("--seq", default=None)
    d.add_argument("--flat-x", type=_num_list, default=[])
    d.add_argument("--flat-checkpoints", type=_int_list, default=[100, 1000, 10000])

    q = sub.add_parser("seq", parents=[common], help="length-sequence diagnostics")
    q.add_argument("--seq", required=True)
    q.add_argument("--a", type=_num_list, default=[1.0])
    q.add_argument("--checkpoints", type=_int_list, default=[1000, 10000, 100000])

    c = sub.add_parser("capacity", parents=[common], help="kernel energies")
    c.add_argument("--seq", required=True)
    c.add_argument("--a", type=float, required=True)
    c.add_argument("--set", dest="target_set", default="arc:0:0.5")
    c.add_argument("--measure", choices=("lebesgue", "atoms"), default="lebesgue")
    c.add_argument("--truncations", type=_int_list, default=[1000, 10000, 100000])

    s = sub.add_parser("sim", parents=[common], help="seeded covering trials")
    s.add_argument("--density", default="uniform")
    s.add_argument("--density-file")
    s.add_argument("--seq", required=True)
    s.add_argument("--n", type=lambda v: int(float(v)), required=True)
    s.add_argument("--trials", type=int, default=16)
    s.add_argument("--target", default="full")
    s.add_argument("--checkpoints", default="log:8")

    w = sub.add_parser("sweep", parents=[common], help="phase-transition sweep")
    w.add_argument("--density", default="uniform")
    w.add_argument("--density-file")
    w.add_argument("--c-grid", type=_num_list, default=[0.3, 0.5, 0.8])
    w.add_argument("--n-grid", type=_int_list,
                   default=[int(round(10 ** (k / 4))) for k in range(12, 21)])
    w.add_argument("--trials", type=int, default=128)
    w.add_argument("--target", default="full")
    w.add_argument("--resolution", type=int, default=2048)

    r = sub.add_parser("criteria", parents=[common], help="covering verdict")
    r.add_argument("--density", default="uniform")
    r.add_argument("--density-file")
    r.add_argument("--seq", required=True)
    r.add_argument("--a", type=_num_list, default=[])

    rp = sub.add_parser("repro", parents=[common], help="named experiment recipes")
    rp.add_argument("--recipe", required=True,
                    choices=("phase_transition", "criteria_report",
                             "criteria_independence", "block_sequences",
                             "comparison", "billard"))
    rp.add_argument("--demo", default="tent-capacity-only")
    rp.add_argument("--k", type=int, default=3)
    rp.add_argument("--c", type=float, default=2.0)
    rp.add_argument("--trials", type=int, default=128)
    rp.add_argument("--n", type=lambda v: int(float(v)), default=4096)

    if config:
        mapped = {k.replace("-", "_"): v for k, v in config.items()}
        for sp in sub.choices.values():
            dests = {a.dest for a in sp._actions}
            sp.set_defaults(**{k: v for k, v in mapped.items() if k in dests})
    return p


def _emit(obj, args):
    if args.out == "-":
        import io
        import tempfile
        import os
        fd, tmp = tempfile.mkstemp(suffix=".out")
        os.close(fd)
        try:
            emit(obj, args.format, tmp)
            with open(tmp) as fh:
                sys.stdout.write(fh.read())
        finally:
            os.unlink(tmp)
    else:
        emit(obj, args.format, args.out)


def cmd_density(args) -> int:
    f = load_density(args)
    ana = analyze(f)
    rec = {
        "density": f.name or "custom",
        "pieces": f.npieces,
        "ess_inf": ana.ess_inf,
        "ess_sup": f.ess_sup(),
        "min_set": [list(a) for a in ana.min_set.arcs()],
        "attainable_infimum": ana.attainable_infimum,
        "note": ana.attainability_note,
    }
    if args.seq and args.flat_x:
        seq = parse_sequence(args.seq)
        rec["flatness"] = []
        for x in args.flat_x:
            rep = flatness_partial(f, x, seq, args.flat_checkpoints)
            rec["flatness"].append({
                "x": rep.x, "classification": rep.classification,
                "partials": list(rep.partial_sums),
                "bound_constant": rep.bound_constant})
    _emit(rec, args)
    return EXIT_OK


def cmd_seq(args) -> int:
    seq = parse_sequence(args.seq)
    diag = series_diagnostics(seq, args.a, args.checkpoints)
    if args.format == "csv":
        rows = []
        for j, n in enumerate(diag.checkpoints):
            row = {"n": n, "sum": diag.sum_partials[j],
                   "sumsq": diag.ell2_partials[j],
                   "s2_ratio": diag.s2_ratios[j]}
            for a in args.a:
                row[f"shepp_log_a{a}"] = diag.shepp_log_partials[a][j]
            rows.append(row)
        _emit(rows, args)
    else:
        _emit({"spec": diag.spec, "checkpoints": list(diag.checkpoints),
               "sum_partials": list(diag.sum_partials),
               "sumsq_partials": list(diag.ell2_partials),
               "s2_ratios": list(diag.s2_ratios),
               "shepp_log_partials": {str(k): list(v) for k, v in
                                      diag.shepp_log_partials.items()},
               "classifications": _jsonable(diag.classifications)}, args)
    return EXIT_OK


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    return obj


def cmd_capacity(args) -> int:
    seq = parse_sequence(args.seq)
    target = parse_target(args.target_set)
    if isinstance(target, list):
        target = ArcSet.from_arcs([(p, 0.0) for p in target])
    if args.measure == "lebesgue":
        sigma = SupportMeasure.lebesgue(target)
    else:
        pts = target.component_points() or \
            [s + ln / 2 for s, ln in target.arcs()]
        sigma = SupportMeasure.atoms(np.asarray(pts))
    verdict = shepp_classify(seq, args.a)
    rows = []
    inconclusive = False
    for N in args.truncations:
        est = energy(CoveringKernel(seq, args.a, N), sigma)
        inconclusive |= est.inconclusive
        rows.append({"truncation": N, "energy_log": est.log_value,
                     "lower_log": est.lower_log, "upper_log": est.upper_log,
                     "verdict": verdict})
    _emit(rows if args.format == "csv" else
          {"seq": seq.spec(), "a": args.a, "rows": rows}, args)
    return EXIT_INCONCLUSIVE if (inconclusive or verdict == "unknown") else EXIT_OK


def cmd_sim(args) -> int:
    f = load_density(args)
    seq = parse_sequence(args.seq)
    cps = parse_checkpoints(args.checkpoints, args.n)
    cfg = TrialConfig(f, seq, args.n, parse_target(args.target), args.seed, cps)
    results = run_trials(cfg, args.trials, args.threads)
    args.format = "jsonl"
    _emit(results, args)
    return EXIT_OK


def cmd_sweep(args) -> int:
    f = load_density(args)
    res = phase_transition_sweep(f, args.c_grid, args.n_grid, args.trials,
                                 args.seed, parse_target(args.target),
                                 args.threads, args.resolution)
    _emit(res, args)
    return EXIT_OK


def cmd_criteria(args) -> int:
    f = load_density(args)
    seq = parse_sequence(args.seq)
    rep = criteria_report(f, seq, a_values=args.a)
    _emit(rep, args)
    return EXIT_INCONCLUSIVE if rep.verdict == VERDICT_INCONCLUSIVE else EXIT_OK


def cmd_repro(args) -> int:
    if args.recipe == "phase_transition":
        res = phase_transition_sweep(
            PiecewisePolyDensity.uniform(), [0.3, 0.5, 0.8],
            log_checkpoints(10 ** 5, 4), args.trials, args.seed,
            threads=args.threads,
            fit_range=(10 ** 3, 10 ** 5))
        _emit(res, args)
    elif args.recipe == "criteria_report":
        recs = []
        for dspec in ("uniform", "tent", "step:0.5:1.5:0.5", "fatcantor:3"):
            for sspec in ("harmonic:0.75", "harmonic:2.5", "power:1.0:2.0",
                          "logharmonic"):
                rep = criteria_report(PiecewisePolyDensity.parse(dspec),
                                      parse_sequence(sspec))
                recs.append(rep.record())
        _emit(recs, args)
    elif args.recipe == "criteria_independence":
        _emit(criteria_independence(args.demo), args)
    elif args.recipe == "block_sequences":
        _emit(block_report(args.k, args.c), args)
    elif args.recipe == "comparison":
        U = ArcSet.from_arcs([(0.55, 0.4)])
        K = ArcSet.from_arcs([(0.6, 0.3)])
        rep = coupling.comparison_experiment(
            PiecewisePolyDensity.uniform(), PiecewisePolyDensity.step(),
            U, K, parse_sequence("harmonic:0.8"), args.n, args.trials,
            args.seed, threads=args.threads)
        _emit(rep if args.format == "csv" else
              {"checkpoints": list(rep.checkpoints),
               "p_small": list(rep.p_small), "p_large": list(rep.p_large)},
              args)
    elif args.recipe == "billard":
        from .coversim import billard_moments
        recs = []
        for dspec, sspec in (("uniform", "harmonic:0.5"),
                             ("step:0.5:1.5:0.5", "harmonic:0.6"),
                             ("tent", "power:0.8:1.5")):
            f = PiecewisePolyDensity.parse(dspec)
            seq = parse_sequence(sspec)
            sigma = SupportMeasure.atoms(np.linspace(0.05, 0.95, 16))
            est = billard_moments(f, seq, sigma, 1000, args.trials, args.seed,
                                  args.threads)
            recs.append({"density": dspec, "seq": sspec, "n": est.n_steps,
                         "mean": est.mean, "mean_stderr": est.mean_stderr,
                         "second_moment": est.second_moment})
        _emit(recs, args)
    return EXIT_OK


COMMANDS = {
    "density": cmd_density, "seq": cmd_seq, "capacity": cmd_capacity,
    "sim": cmd_sim, "sweep": cmd_sweep, "criteria": cmd_criteria,
    "repro": cmd_repro,
}


def main(argv=None) -> int:
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config", default=None)
    known, _ = pre.parse_known_args(argv)
    config = None
    if known.config:
        try:
            config = _load_config(known.config)
        except (OSError, ValueError) as exc:
            print(f"error: bad config file: {exc}", file=sys.stderr)
            return EXIT_VALIDATION
    parser = build_parser(config)
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_VALIDATION if exc.code not in (0, None) else 0
    try:
        return COMMANDS[args.command](args)
    except (ValueError, DensitySpecError, SequenceSpecError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
