#!/usr/bin/env python3
"""Far-field azimuth/elevation cut CSVs for a tiling (uniform coefficients).

Feeds every sub-array of the given tiling with a unit coefficient and
exports (angle_deg, power_db) samples of both principal cuts, ready for
any external plotting tool.
"""

import argparse
import os
import sys

import numpy as np

from apertile.config import RunConfig
from apertile.geometry import BeamWeights
from apertile.reports import far_field_cut, write_far_field_csv
from apertile.tiling import baseline_tiling, load_cover


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--config", required=True)
    parser.add_argument("--tiling", default="baseline", help="cover JSON path or 'baseline'")
    parser.add_argument("--out", default="cuts")
    parser.add_argument("--points", type=int, default=361)
    args = parser.parse_args()

    cfg = RunConfig.load(args.config)
    if args.tiling == "baseline":
        cover = baseline_tiling(cfg.aperture_grid())
    else:
        cover, _ = load_cover(args.tiling)
    geometry = cfg.geometry()
    weights = BeamWeights(cover, np.ones((1, 2, cover.tile_count), dtype=complex))
    meta = {"config_hash": cfg.config_hash(), "seed": cfg.scenario.seed, "tiling": args.tiling}

    os.makedirs(args.out, exist_ok=True)
    for cut in ("azimuth", "elevation"):
        rows = far_field_cut(geometry, cfg.pattern, weights, cut=cut, points=args.points)
        path = os.path.join(args.out, f"{cut}_cut.csv")
        write_far_field_csv(path, rows, meta)
        print(f"wrote {path}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
