"""Link-0 normalized second moment of inter-service time versus burstiness K.

    python3 scripts/burstiness.py -o burstiness.csv
    python3 scripts/burstiness.py --tie-rule seeded_uniform
"""

import argparse
import csv
import sys
from dataclasses import replace
from pathlib import Path

from rsgsim import cli, engine
from rsgsim.model import ArrivalModel, PolicyKind, bursty, constant

CONFIG = Path(__file__).resolve().parent.parent / "configs" / "two_link_rsg.yaml"


def main(argv=None) -> int:
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--K", default="2,5,10,20")
    p.add_argument("--gamma", type=float, default=100.0)
    p.add_argument("--tie-rule", default="lowest_index", choices=["lowest_index", "seeded_uniform"])
    p.add_argument("-o", "--output", default="burstiness.csv")
    args = p.parse_args(argv)
    base = cli.parse_config(CONFIG)
    rows = []
    for K in (int(k) for k in args.K.split(",")):
        cfg = replace(base, arrivals=ArrivalModel((constant(1), bursty(K))))
        row = {"K": K}
        for kind, gamma in ((PolicyKind.MWS, 0.0), (PolicyKind.RSG, args.gamma)):
            agg = engine.run_experiment(cfg.with_policy(kind=kind, gamma=gamma, tie_rule=args.tie_rule))
            row[f"{kind.value}_norm_i2"] = agg.mean["norm_i2"][0]
            row[f"{kind.value}_norm_i2_se"] = agg.se("norm_i2")[0]
        rows.append(row)
        print(", ".join(f"{k}={cli.fmt(v)}" for k, v in row.items()))
    with open(args.output, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=list(rows[0]), lineterminator="\n")
        w.writeheader()
        w.writerows({k: cli.fmt(v) for k, v in r.items()} for r in rows)
    return 0


if __name__ == "__main__":
    sys.exit(main())
