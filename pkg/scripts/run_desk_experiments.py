#!/usr/bin/env python3
"""Run the desk-scale experiment set: convergence trace plus all four sweeps.

Writes CSVs into the output directory; feed them to the frontend plotter:

    python scripts/run_desk_experiments.py --out results --threads 4
    (cd frontend && npm run build && npm run plot -- --all --in ../results --out ../results/figures)
"""

import argparse
import sys
import time

from starris.cli import main as starris_main

SWEEPS = [
    ("sweep_pmax.csv", "pmax", "0.01,0.05,0.1"),
    ("sweep_antennas.csv", "antennas", "1,2,4"),
    ("sweep_elements.csv", "elements", "8,16,32"),
    ("sweep_qlevel.csv", "qlevel", "2,4,8,16"),
]


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--out", default="results")
    parser.add_argument("--trials", type=int, default=20)
    parser.add_argument("--threads", type=int, default=4)
    parser.add_argument("--seed", type=int, default=1)
    parser.add_argument("--preset", default="desk", choices=("desk", "paper"))
    args = parser.parse_args()

    common = ["--preset", args.preset, "--seed", str(args.seed)]
    jobs = [["convergence", *common, "--out", f"{args.out}/convergence.csv"]]
    for name, param, values in SWEEPS:
        jobs.append(
            [
                "sweep",
                *common,
                "--param",
                param,
                "--values",
                values,
                "--trials",
                str(args.trials),
                "--schemes",
                "all",
                "--threads",
                str(args.threads),
                "--out",
                f"{args.out}/{name}",
            ]
        )

    import pathlib

    pathlib.Path(args.out).mkdir(parents=True, exist_ok=True)
    for job in jobs:
        t0 = time.time()
        print(f"$ starris {' '.join(job)}", file=sys.stderr)
        rc = starris_main(job)
        if rc != 0:
            print(f"failed with exit code {rc}", file=sys.stderr)
            return rc
        print(f"  done in {time.time() - t0:.1f}s", file=sys.stderr)
    return 0


if __name__ == "__main__":
    sys.exit(main())
