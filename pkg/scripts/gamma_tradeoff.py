"""Sweep gamma on one config and write the regularity/queue tradeoff with bounds.

    python3 scripts/gamma_tradeoff.py configs/single_hop_symmetric.yaml -o tradeoff.csv
"""

import argparse
import sys

from rsgsim import cli


def main(argv=None) -> int:
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("config")
    p.add_argument("--gammas", default="pow2:-7..7")
    p.add_argument("--reps", type=int)
    p.add_argument("--horizon", type=int)
    p.add_argument("-o", "--output", default="tradeoff.csv")
    args = p.parse_args(argv)
    extra = [f"--{k}={v}" for k, v in (("reps", args.reps), ("horizon", args.horizon)) if v is not None]
    return cli.main(["sweep", args.config, "--gammas", args.gammas, "-o", args.output, *extra])


if __name__ == "__main__":
    sys.exit(main())
