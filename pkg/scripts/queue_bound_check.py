"""Measured weighted queue length against the drift-based queue bound.

Runs the three symmetric topologies at roughly 90% load for several gammas.

    python3 scripts/queue_bound_check.py -o queue_bound.csv
"""

import argparse
import csv
import sys
from pathlib import Path

from rsgsim import cli, engine
from rsgsim.model import PolicyKind

CONFIGS = Path(__file__).resolve().parent.parent / "configs"
TOPOLOGIES = ("single_hop_symmetric", "single_hop_fading_symmetric", "switch_symmetric")


def main(argv=None) -> int:
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--gammas", default="0,1,128")
    p.add_argument("-o", "--output", default="queue_bound.csv")
    args = p.parse_args(argv)
    with open(args.output, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["config", "gamma", "sum_alpha_meanq", "sum_alpha_meanq_se", "queue_bound", "additive_eps"])
        for name in TOPOLOGIES:
            base = cli.parse_config(CONFIGS / f"{name}.yaml")
            for g in cli.parse_gammas(args.gammas):
                cfg = base.with_policy(kind=PolicyKind.RSG, gamma=g)
                agg = engine.run_experiment(cfg)
                b = engine.bounds_for(cfg)
                w.writerow([name, cli.fmt(g), cli.fmt(agg.mean["sum_alpha_meanq"]), cli.fmt(agg.se("sum_alpha_meanq")),
                            cli.fmt(b["queue_bound"]), cli.fmt(b["additive_eps"])])
                print(name, g, agg.mean["sum_alpha_meanq"], b["queue_bound"])
    return 0


if __name__ == "__main__":
    sys.exit(main())
