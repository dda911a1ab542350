"""Command-line entry point: permreg <subcommand> [options].

Machine-readable results go to stdout as JSON; progress and one-line
verdicts go to stderr.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np
from pydantic import ValidationError

from .bounds import prop1_side_info, thm1_sufficient, thm2_converse, thm3_approx_converse
from .config import BoundConstants, ExperimentConfig, SearchConfig
from .errors import ConfigError, LemmaViolationError
from .estimators import run_estimator
from .experiment import draw_x_star, run_distortion_experiment, run_phase_transition
from .hardness import PartitionInstance, feasibility_check, partition_brute_force, reduce_partition
from .lemmas import run_lemma_suite
from .model import (
    gamma_of,
    generate_instance,
    is_identifiable_regime,
    load_instance,
    save_instance,
    snr_for_gamma,
    snr_of,
)
from .output import batch_to_csv, emit_batch_json, emit_csv, json_sidecar_path, to_json_text

EXIT_OK = 0
EXIT_IO = 1
EXIT_CONFIG = 2
EXIT_LEMMA = 3


def _int_list(text: str) -> list[int]:
    return [int(v) for v in text.split(",") if v.strip()]


def _float_list(text: str) -> list[float]:
    return [float(v) for v in text.split(",") if v.strip()]


def _dump(doc) -> None:
    print(to_json_text(doc))


def _add_experiment_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", type=Path, help="JSON experiment config; flags override its values")
    p.add_argument("--n", type=_int_list, dest="n_grid", help="Comma-separated sample sizes")
    p.add_argument("--d", type=int, help="Dimension of x*")
    p.add_argument("--gamma-grid", type=_float_list, help="Comma-separated target gamma values")
    p.add_argument("--trials", type=int, help="Trials per grid point")
    p.add_argument("--sigma", type=float, help="Noise standard deviation (0 = noiseless)")
    p.add_argument("--estimator", choices=["sort1d", "brute", "oracle", "altmin"])
    p.add_argument("--hbar", type=int, dest="side_info_hbar",
                   help="Draw the truth from the Hamming-ball sampler with this radius")
    p.add_argument("--seed", type=int, dest="master_seed", help="Master seed")
    p.add_argument("--workers", type=int, help="Worker processes (results do not depend on it)")
    p.add_argument("--out", type=Path, dest="output_path", help="CSV output path")
    p.add_argument("--quiet", action="store_true", help="Suppress progress output")


def _experiment_config(args, **extra) -> ExperimentConfig:
    base = {}
    if args.config is not None:
        base = json.loads(args.config.read_text())
    overrides = {
        key: getattr(args, key)
        for key in ("n_grid", "d", "gamma_grid", "trials", "sigma", "estimator",
                    "side_info_hbar", "master_seed", "workers", "output_path")
        if getattr(args, key) is not None
    }
    overrides.update({k: v for k, v in extra.items() if v is not None})
    base.update(overrides)
    base["verbose"] = not args.quiet
    return ExperimentConfig.model_validate(base)


def _emit_batch(batch, config: ExperimentConfig) -> None:
    if config.output_path is None:
        sys.stdout.write(batch_to_csv(batch))
        return
    csv_path = emit_csv(batch, config.output_path)
    json_path = emit_batch_json(batch, json_sidecar_path(config.output_path))
    print(f"  CSV:  {csv_path}", file=sys.stderr)
    print(f"  JSON: {json_path}", file=sys.stderr)


def cmd_simulate(args) -> int:
    config = _experiment_config(args)
    _emit_batch(run_phase_transition(config), config)
    return EXIT_OK


def cmd_distortion(args) -> int:
    config = _experiment_config(args, distortion_D=args.D)
    _emit_batch(run_distortion_experiment(config), config)
    return EXIT_OK


def cmd_generate(args) -> int:
    if (args.gamma is None) == (args.snr is None):
        raise ConfigError("give exactly one of --gamma and --snr")
    snr = args.snr if args.snr is not None else snr_for_gamma(args.n, args.gamma)
    scale = args.sigma if args.sigma > 0 else 1.0
    rng = np.random.default_rng(np.random.SeedSequence(args.seed, spawn_key=(3,)))
    x_star = draw_x_star(args.d, scale * snr**0.5, rng)
    instance = generate_instance(args.n, args.d, x_star, args.sigma,
                                 pi_star=args.pi_star, seed=args.seed)
    save_instance(instance, args.out)
    print(f"  Wrote {args.out}: n={instance.n}, d={instance.d}, "
          f"snr={snr_of(instance):.6g}, gamma={gamma_of(instance):.4g}", file=sys.stderr)
    if not is_identifiable_regime(args.n, args.d):
        print("  Warning: n < 2d, the noiseless solution need not be unique", file=sys.stderr)
    return EXIT_OK


def cmd_estimate(args) -> int:
    instance = load_instance(args.instance)
    search = SearchConfig(
        **{k: v for k, v in {"brute_max_n": args.brute_max_n, "restarts": args.restarts,
                             "max_iters": args.max_iters}.items() if v is not None})
    result = run_estimator(args.method, instance, search=search,
                           rng=np.random.default_rng(args.seed), workers=args.workers)
    _dump(result.to_dict())
    state = "recovered" if result.hamming_to_truth == 0 else f"d_H={result.hamming_to_truth}"
    print(f"{args.method}: objective={result.objective:.6g}, {state}", file=sys.stderr)
    return EXIT_OK


def cmd_bounds(args) -> int:
    if args.snr is None and args.gamma is None:
        raise ConfigError("give --snr or --gamma")
    snr = args.snr if args.snr is not None else snr_for_gamma(args.n, args.gamma)
    constants = BoundConstants(c1=args.c1, c2=args.c2, c3=args.c3, c4=args.c4)
    if args.result == "thm1":
        report = thm1_sufficient(args.n, args.d, snr, args.epsilon, constants)
    elif args.result == "thm2":
        report = thm2_converse(args.n, snr, args.delta, constants)
    elif args.result == "prop1":
        report = prop1_side_info(args.n, snr)
    else:
        if args.D is None:
            raise ConfigError("thm3 needs --D")
        report = thm3_approx_converse(args.n, snr, args.D)
    _dump(report.to_dict())
    print(report.verdict(), file=sys.stderr)
    return EXIT_OK


def cmd_reduce_partition(args) -> int:
    inst = PartitionInstance(tuple(args.b))
    out = reduce_partition(inst)
    feasibility = feasibility_check(out, max_d=args.max_d)
    partition = partition_brute_force(inst)
    doc = out.to_dict()
    doc["feasibility"] = feasibility.to_dict()
    doc["partition"] = {"exists": partition.exists,
                        "subset": list(partition.subset) if partition.subset else None}
    _dump(doc)
    verdict = "feasible" if feasibility.feasible else "infeasible"
    agree = "agrees" if feasibility.feasible == partition.exists else "DISAGREES"
    print(f"b={list(inst.b)}: {verdict}; {agree} with subset search", file=sys.stderr)
    return EXIT_OK


def cmd_verify_lemmas(args) -> int:
    checks = run_lemma_suite(samples=args.samples, seed=args.seed, verbose=not args.quiet)
    _dump([c.to_dict() for c in checks])
    failed = [c.name for c in checks if not c.passed]
    if failed:
        raise LemmaViolationError(f"lemma checks failed: {', '.join(failed)}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="permreg",
        description="Permutation recovery in permuted linear regression.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="Exact-recovery phase transition over a (n, gamma) grid")
    _add_experiment_args(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("distortion", help="Approximate-recovery experiment with Hamming distortion D")
    _add_experiment_args(p)
    p.add_argument("--D", type=int, help="Distortion threshold, 2 < D <= n-1")
    p.set_defaults(func=cmd_distortion)

    p = sub.add_parser("generate", help="Write a random problem instance as JSON")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--d", type=int, default=1)
    p.add_argument("--gamma", type=float, help="Target gamma (sets ||x*||)")
    p.add_argument("--snr", type=float, help="Target snr (sets ||x*||)")
    p.add_argument("--sigma", type=float, default=1.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--pi-star", choices=["random", "identity"], default="random")
    p.add_argument("--out", type=Path, required=True)
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("estimate", help="Run one estimator on an instance JSON")
    p.add_argument("--instance", type=Path, required=True)
    p.add_argument("--method", choices=["sort1d", "brute", "oracle", "altmin"], required=True)
    p.add_argument("--seed", type=int, default=0, help="Seed for altmin restarts")
    p.add_argument("--restarts", type=int)
    p.add_argument("--max-iters", type=int)
    p.add_argument("--brute-max-n", type=int)
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("bounds", help="Evaluate a recovery condition")
    p.add_argument("--result", choices=["thm1", "thm2", "prop1", "thm3"], required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--d", type=int, default=1)
    p.add_argument("--snr", type=float)
    p.add_argument("--gamma", type=float, help="Alternative to --snr")
    p.add_argument("--epsilon", type=float, default=1.0)
    p.add_argument("--delta", type=float, default=1.0)
    p.add_argument("--D", type=int)
    for name in ("c1", "c2", "c3", "c4"):
        p.add_argument(f"--{name}", type=float, default=1.0)
    p.set_defaults(func=cmd_bounds)

    p = sub.add_parser("reduce-partition", help="Build and check the PARTITION reduction")
    p.add_argument("--b", type=_int_list, required=True, help="Comma-separated positive integers")
    p.add_argument("--max-d", type=int, default=3)
    p.set_defaults(func=cmd_reduce_partition)

    p = sub.add_parser("verify-lemmas", help="Run the lemma verification suite")
    p.add_argument("--samples", type=int, default=100_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--quiet", action="store_true")
    p.set_defaults(func=cmd_verify_lemmas)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except LemmaViolationError as e:
        print(f"lemma violation: {e}", file=sys.stderr)
        return EXIT_LEMMA
    except (ConfigError, ValidationError) as e:
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as e:
        print(f"I/O error: {e}", file=sys.stderr)
        return EXIT_IO
    except ValueError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_CONFIG
