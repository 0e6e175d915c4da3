#!/usr/bin/env python3
"""Small end-to-end study on a 4x6 panel (finishes in seconds).

Enumerates every P-hexomino tiling, scores each against seeded user drops,
and writes the ledger, the best/baseline grids, and the PDF/CDF data to
--out. A starting point for exploring configs before a full-size run.
"""

import argparse
import json
import os
import sys

from apertile.cli import main as cli_main
from apertile.config import ApertureConfig, RunConfig
from apertile.scenario import ScenarioParams


def build_config(seed: int, drops: int) -> RunConfig:
    return RunConfig(
        aperture=ApertureConfig(columns=4, rows=6),
        scenario=ScenarioParams(
            kind="uma",
            isd_m=500.0,
            bs_height_m=25.0,
            drops=drops,
            users=4,
            seed=seed,
        ),
        alphabet="P",
        workers=0,
    )


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default="demo_out")
    parser.add_argument("--seed", type=int, default=7)
    parser.add_argument("--drops", type=int, default=10)
    args = parser.parse_args()

    os.makedirs(args.out, exist_ok=True)
    config_path = os.path.join(args.out, "config.json")
    build_config(args.seed, args.drops).save(config_path)

    code = cli_main(["optimize", "--config", config_path, "--output-dir", args.out])
    if code != 0:
        return code

    with open(os.path.join(args.out, "result.json")) as fh:
        result = json.load(fh)
    print(json.dumps({k: result[k] for k in ("total_tilings", "best", "comparison")}, indent=2))
    return 0


if __name__ == "__main__":
    sys.exit(main())
