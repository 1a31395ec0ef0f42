"""Command-line entry point.

Subcommands: gen, probe, verify, game, bench, report.  Every command is a
pure function of (config, input files); outputs carry no timestamps or
machine state, so a rerun with the same config is byte-identical.

Config precedence: flags > --config file > defaults.  Exit codes: 0 success,
1 property failure, 2 configuration error.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import os
import sys
from dataclasses import dataclass

import numpy as np

from .experiments import (STRATEGY_NAMES, hiding_report, max_parallel_queries,
                          parallel_bound, quantum_bound_analytic,
                          reproduce_theorem_main_table, run_hybrid_game)
from .instance import (HardInstance, make_instance, oracle_query,
                       epsilon_threshold, read_descriptor, write_descriptor)
from .frames import save_frame
from .optimizers import TRACE_CSV_HEADER, trace_to_csv_rows
from .report_io import dump_json, dumps_json, write_csv
from .rng import stream_key
from .schedule import ScheduleError, params_schedule
from .verify import SUITE_NAMES, default_verify_instance, run_suites

EXIT_OK = 0
EXIT_PROPERTY_FAILURE = 1
EXIT_CONFIG_ERROR = 2

_CONFIG_FIELDS = ("command", "n", "p", "mode", "gamma", "seed", "mc_samples",
                  "trials", "rounds", "parallel_k", "out", "format")


@dataclass(frozen=True)
class RunConfig:
    """Flat, JSON-round-trippable run configuration."""

    command: str
    n: int = 4096
    p: int = 1
    mode: str = "scaled"
    gamma: float | None = 0.01
    seed: int = 0
    mc_samples: int = 1024
    trials: int = 1000
    rounds: int | None = None
    parallel_k: int = 1
    out: str | None = None
    format: str = "json"

    def to_dict(self) -> dict:
        return {k: getattr(self, k) for k in _CONFIG_FIELDS}

    def persisted(self) -> dict:
        """Config as embedded in reports: the output path is where-to-write
        metadata, not part of what was computed, so it is normalized out and
        artifacts stay byte-identical across destinations."""
        doc = self.to_dict()
        doc["out"] = None
        return doc

    @classmethod
    def from_dict(cls, doc: dict) -> "RunConfig":
        unknown = set(doc) - set(_CONFIG_FIELDS)
        if unknown:
            raise ScheduleError(f"unknown config keys: {sorted(unknown)}")
        return cls(**doc)


def _merge_config(args: argparse.Namespace) -> RunConfig:
    base = {}
    if getattr(args, "config", None):
        with open(args.config) as fh:
            base = json.load(fh)
        base.pop("command", None)
    merged = dict(base)
    for key in _CONFIG_FIELDS:
        if key == "command":
            continue
        flag = getattr(args, key, None)
        if flag is not None:
            merged[key] = flag
    merged["command"] = args.command
    return RunConfig.from_dict(merged)


def _build_instance(cfg: RunConfig, instance_dir: str | None) -> HardInstance:
    if instance_dir:
        return read_descriptor(os.path.join(instance_dir, "descriptor.json"))
    overrides = {"gamma": cfg.gamma} if cfg.gamma is not None else None
    params = params_schedule(cfg.n, cfg.p, cfg.mode, overrides=overrides)
    return make_instance(params, seed=cfg.seed, mc_samples=cfg.mc_samples)


def _checks_report(suites: dict) -> dict:
    return {name: [dataclasses.asdict(c) for c in checks]
            for name, checks in suites.items()}


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def cmd_gen(cfg: RunConfig, args) -> int:
    if not cfg.out:
        print("gen: --out directory is required", file=sys.stderr)
        return EXIT_CONFIG_ERROR
    inst = _build_instance(cfg, None)
    os.makedirs(cfg.out, exist_ok=True)
    save_frame(inst.frame, os.path.join(cfg.out, "frame.clbf"))
    write_descriptor(inst, os.path.join(cfg.out, "descriptor.json"), "frame.clbf")
    dump_json(cfg.persisted(), os.path.join(cfg.out, "config.json"))
    p = inst.params
    print(f"gen: n={p.n} p={p.p} k={p.k} gamma={p.gamma:.6g} rho={p.rho:.6g} "
          f"beta={p.beta:.6g} epsilon={p.epsilon:.6g} -> {cfg.out}")
    return EXIT_OK


def cmd_probe(cfg: RunConfig, args) -> int:
    inst = _build_instance(cfg, args.instance_dir)
    p = inst.params
    level = args.level if args.level is not None else p.k
    if args.point_file:
        x = np.load(args.point_file)
    else:
        x = np.zeros(p.n)
    resp = oracle_query(inst, level, x, order=args.order, tag=("probe", cfg.seed))
    doc = {
        "level": resp.level,
        "order": resp.order,
        "value": {"mean": resp.value.mean, "stderr": resp.value.stderr,
                  "samples_used": resp.value.samples_used},
        "grad": {"norm": float(np.linalg.norm(resp.grad.mean)),
                 "stderr": resp.grad.stderr,
                 "head": [float(v) for v in np.asarray(resp.grad.mean)[:8]]},
        "max_sample_grad_norm": resp.max_sample_grad_norm,
        "hessian_probe": None if resp.hessian_probe is None else [
            {"direction_head": [float(v) for v in d[:8]], "second_directional": s}
            for d, s in resp.hessian_probe],
    }
    if args.full_grad:
        doc["grad"]["full"] = [float(v) for v in np.asarray(resp.grad.mean)]
    out = dumps_json(doc, indent=2)
    sys.stdout.write(out)
    if cfg.out:
        os.makedirs(cfg.out, exist_ok=True)
        with open(os.path.join(cfg.out, "probe.json"), "w") as fh:
            fh.write(out)
    return EXIT_OK


def cmd_verify(cfg: RunConfig, args) -> int:
    names = [args.suite] if args.suite else list(SUITE_NAMES)
    inst = None
    if "hard-instance" in names:
        inst = (_build_instance(cfg, args.instance_dir) if args.instance_dir
                else default_verify_instance(cfg.seed, cfg.mc_samples))
    suites = run_suites(names, seed=cfg.seed, inst=inst,
                        corrupt_frame=args.corrupt_frame)
    failures = []
    for name, checks in suites.items():
        for c in checks:
            status = "PASS" if c.passed else "FAIL"
            if c.inconclusive:
                status = "INCONCLUSIVE"
            print(f"[{name}] {status:12s} {c.name}: {c.detail}")
            if not c.passed:
                failures.append((name, c.name, c.detail))
    if cfg.out:
        os.makedirs(cfg.out, exist_ok=True)
        dump_json({"config": cfg.persisted(), "suites": _checks_report(suites)},
                  os.path.join(cfg.out, "verify.json"))
    if failures:
        name, check, detail = failures[0]
        print(f"verify: FAILED {len(failures)} check(s); first: {name}/{check} "
              f"({detail})", file=sys.stderr)
        return EXIT_PROPERTY_FAILURE
    print(f"verify: all {sum(len(c) for c in suites.values())} checks passed")
    return EXIT_OK


def cmd_game(cfg: RunConfig, args) -> int:
    inst = _build_instance(cfg, args.instance_dir)
    p = inst.params
    rounds = cfg.rounds if cfg.rounds is not None else max(1, p.k - 1)
    K = cfg.parallel_k
    transcripts = []
    for run in range(args.runs):
        t = run_hybrid_game(args.algorithm, inst, rounds, K,
                            seed=int(stream_key(cfg.seed, "game-run", run)[0]),
                            samples=cfg.mc_samples, L=args.agd_l)
        transcripts.append(t)
    successes = sum(t.success for t in transcripts)
    diverged = [t.divergence_round for t in transcripts if t.divergence_round]
    summary = {
        "algorithm": args.algorithm, "runs": args.runs, "rounds": rounds, "K": K,
        "success_rate": successes / args.runs,
        "divergence_fraction": len(diverged) / args.runs,
        "mean_divergence_round": (sum(diverged) / len(diverged)) if diverged else None,
        "epsilon": p.epsilon, "threshold": epsilon_threshold(p),
    }
    print(f"game: algorithm={args.algorithm} runs={args.runs} rounds={rounds} "
          f"K={K} success_rate={summary['success_rate']:.3f} "
          f"diverged={summary['divergence_fraction']:.3f}")
    if cfg.out:
        os.makedirs(cfg.out, exist_ok=True)
        dump_json({"config": cfg.persisted(), "summary": summary,
                   "transcripts": transcripts},
                  os.path.join(cfg.out, "game.json"))
    return EXIT_OK


def cmd_bench(cfg: RunConfig, args) -> int:
    from .optimizers import nesterov_agd, random_search, subgradient_descent

    inst = _build_instance(cfg, args.instance_dir)
    p = inst.params
    budget = args.budget if args.budget is not None else max(1, p.k - 1)

    counter = {"i": 0}

    def oracle(x):
        counter["i"] += 1
        return oracle_query(inst, p.k, x, tag=("bench", cfg.seed, counter["i"]))

    if args.optimizer == "subgradient":
        trace = subgradient_descent(oracle, p.R, budget, n=p.n)
    elif args.optimizer == "agd":
        L = args.agd_l if args.agd_l is not None else 1.0 / p.beta
        trace = nesterov_agd(oracle, L, p.R, budget, n=p.n)
    elif args.optimizer == "random":
        trace = random_search(oracle, p.R, budget, stream=cfg.seed, n=p.n)
    else:
        print(f"bench: unknown optimizer {args.optimizer!r}", file=sys.stderr)
        return EXIT_CONFIG_ERROR

    print(f"bench: optimizer={args.optimizer} budget={budget} "
          f"best_value={trace.best_value:.6f} threshold={epsilon_threshold(p):.6f} "
          f"diverged={trace.diverged}")
    if cfg.out:
        os.makedirs(cfg.out, exist_ok=True)
        write_csv(os.path.join(cfg.out, "trace.csv"), TRACE_CSV_HEADER,
                  trace_to_csv_rows(trace))
    return EXIT_OK


def cmd_report(cfg: RunConfig, args) -> int:
    inst = _build_instance(cfg, args.instance_dir)
    p = inst.params
    rep = hiding_report(inst, trials=cfg.trials, seed=cfg.seed,
                        probe_count=args.probe_count)
    m = p.k
    K = cfg.parallel_k
    d1_hi = max((f.revealed.ci_high for f in rep.delta1), default=0.0)
    doc = {
        "config": cfg.persisted(),
        "hiding": rep,
        "bounds": {
            "parallel_success_bound": parallel_bound(d1_hi, rep.delta2.optimal.ci_high,
                                                     m, K),
            "quantum_success_bound_analytic": quantum_bound_analytic(
                rep.delta1_max, rep.delta2.optimal.rate, m),
            "note": "quantum bound is computed analytically; no simulator",
        },
    }
    print(f"report: delta1_max={rep.delta1_max:.4g} "
          f"delta2={rep.delta2.optimal.rate:.4g} "
          f"witness_estimate={rep.witness_estimate:.6f} "
          f"certificate={rep.witness_certificate:.6f}")
    if cfg.out:
        os.makedirs(cfg.out, exist_ok=True)
        if cfg.format == "json":
            dump_json(doc, os.path.join(cfg.out, "report.json"))
        else:
            rows = [[f.level_t, f.distribution, f.revealed.rate, f.revealed.ci_low,
                     f.revealed.ci_high, f.analytic_failures]
                    for f in rep.delta1]
            write_csv(os.path.join(cfg.out, "delta1.csv"),
                      ["level_t", "distribution", "rate", "ci_low", "ci_high",
                       "analytic_failures"], rows)
            write_csv(os.path.join(cfg.out, "delta2.csv"),
                      ["distribution", "rate", "ci_low", "ci_high", "threshold"],
                      [[rep.delta2.distribution, rep.delta2.optimal.rate,
                        rep.delta2.optimal.ci_low, rep.delta2.optimal.ci_high,
                        rep.delta2.threshold]])
    return EXIT_OK


# ---------------------------------------------------------------------------

def _add_common(sp: argparse.ArgumentParser) -> None:
    sp.add_argument("--config", help="JSON config file (flags override it)")
    sp.add_argument("--n", type=int, default=None)
    sp.add_argument("--p", type=int, default=None)
    sp.add_argument("--mode", choices=("paper-exact", "scaled"), default=None)
    sp.add_argument("--gamma", type=float, default=None)
    sp.add_argument("--seed", type=int, default=None)
    sp.add_argument("--mc-samples", dest="mc_samples", type=int, default=None)
    sp.add_argument("--trials", type=int, default=None)
    sp.add_argument("--rounds", type=int, default=None)
    sp.add_argument("--parallel-k", dest="parallel_k", type=int, default=None)
    sp.add_argument("--out", default=None)
    sp.add_argument("--format", choices=("json", "csv"), default=None)
    sp.add_argument("--instance-dir", default=None,
                    help="directory with descriptor.json + frame.clbf")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="convexlab",
                                 description="staggered softmax-tower hard "
                                 "instances and query-complexity experiments")
    sub = ap.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("gen", help="generate instance files")
    _add_common(sp)

    sp = sub.add_parser("probe", help="single oracle query")
    _add_common(sp)
    sp.add_argument("--level", type=int, default=None)
    sp.add_argument("--order", type=int, default=1)
    sp.add_argument("--point-file", default=None, help=".npy query point")
    sp.add_argument("--full-grad", action="store_true")

    sp = sub.add_parser("verify", help="run property suites")
    _add_common(sp)
    sp.add_argument("--suite", choices=SUITE_NAMES, default=None)
    sp.add_argument("--corrupt-frame", action="store_true",
                    help="negative control: corrupt the frame first")

    sp = sub.add_parser("game", help="resisting-oracle hybrid game")
    _add_common(sp)
    sp.add_argument("--algorithm", choices=STRATEGY_NAMES, required=True)
    sp.add_argument("--runs", type=int, default=1)
    sp.add_argument("--agd-l", dest="agd_l", type=float, default=None)

    sp = sub.add_parser("bench", help="optimizer trace on the instance")
    _add_common(sp)
    sp.add_argument("--optimizer", choices=("subgradient", "agd", "random"),
                    required=True)
    sp.add_argument("--budget", type=int, default=None)
    sp.add_argument("--agd-l", dest="agd_l", type=float, default=None)

    sp = sub.add_parser("report", help="hiding rates and analytic bounds")
    _add_common(sp)
    sp.add_argument("--probe-count", dest="probe_count", type=int, default=None)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = _merge_config(args)
        handler = {
            "gen": cmd_gen, "probe": cmd_probe, "verify": cmd_verify,
            "game": cmd_game, "bench": cmd_bench, "report": cmd_report,
        }[args.command]
        return handler(cfg, args)
    except (ScheduleError, ValueError, FileNotFoundError, KeyError) as exc:
        print(f"{args.command}: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG_ERROR


if __name__ == "__main__":
    sys.exit(main())
