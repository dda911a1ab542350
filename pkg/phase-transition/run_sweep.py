#!/usr/bin/env python3
"""CLI wrapper: scaled reproduction of the d=1 exact-recovery phase transition."""

import argparse
import sys
from pathlib import Path

# Ensure the repo root is on sys.path so permreg is importable
_REPO_ROOT = str(Path(__file__).resolve().parent.parent)
if _REPO_ROOT not in sys.path:
    sys.path.insert(0, _REPO_ROOT)

from permreg.config import ExperimentConfig
from permreg.experiment import run_phase_transition
from permreg.output import emit_batch_json, emit_csv

parser = argparse.ArgumentParser(description="Sweep gamma and record exact-recovery frequencies.")
parser.add_argument("--n", default="100",
                    help="Comma-separated sample sizes (default: 100)")
parser.add_argument("--gamma-grid", default="2,2.5,3,3.5,4,4.5,5,5.5,6",
                    help="Comma-separated gamma values")
parser.add_argument("--trials", type=int, default=200,
                    help="Trials per grid point (default: 200)")
parser.add_argument("--estimator", default="sort1d",
                    help="Estimator id (default: sort1d)")
parser.add_argument("--seed", type=int, default=2017,
                    help="Master seed (default: 2017)")
parser.add_argument("--workers", type=int, default=1,
                    help="Worker processes (default: 1)")
parser.add_argument("--output", default="phase-transition/output",
                    help="Output directory for generated files")
args = parser.parse_args()

OUTPUT_DIR = Path(args.output)

config = ExperimentConfig(
    n_grid=[int(v) for v in args.n.split(",")],
    d=1,
    gamma_grid=[float(v) for v in args.gamma_grid.split(",")],
    trials=args.trials,
    estimator=args.estimator,
    master_seed=args.seed,
    workers=args.workers,
    verbose=True,
)

batch = run_phase_transition(config)

OUTPUT_DIR.mkdir(parents=True, exist_ok=True)
stem = f"phase_{args.estimator}_seed{args.seed}"
emit_csv(batch, OUTPUT_DIR / f"{stem}.csv")
emit_batch_json(batch, OUTPUT_DIR / f"{stem}.json")
