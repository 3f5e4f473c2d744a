"""Paired MWS / RSG / RSG-variant comparison on the two-link setup.

Writes the MWS-vs-RSG and MWS-vs-variant comparison CSVs.

    python3 scripts/two_link_comparison.py --outdir results
"""

import argparse
import sys
from pathlib import Path

from rsgsim import cli

CONFIGS = Path(__file__).resolve().parent.parent / "configs"


def main(argv=None) -> int:
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--outdir", default=".")
    p.add_argument("--reps", type=int)
    args = p.parse_args(argv)
    out = Path(args.outdir)
    out.mkdir(parents=True, exist_ok=True)
    extra = ["--reps", str(args.reps)] if args.reps else []
    base = str(CONFIGS / "two_link_mws.yaml")
    for other in ("rsg", "rsg_variant"):
        code = cli.main(["compare", base, str(CONFIGS / f"two_link_{other}.yaml"),
                         "-o", str(out / f"mws_vs_{other}.csv"), *extra])
        if code:
            return code
    return 0


if __name__ == "__main__":
    sys.exit(main())
