#!/usr/bin/env python3
"""Export example trajectories as CSV for plotting elsewhere.

Writes, under results/paths/:
  eta_paths.csv        long-format replicas of the exponential functional
  pitman_path.csv      one Brownian path and its Pitman transform
  radial_path.csv      a p=2 matrix radial trajectory (t, r_1, r_2)
"""

from pathlib import Path

import numpy as np

from myproc.matrixproc import eta_matrix, radial_to_csv, sample_triangular_bm
from myproc.paths import (
    RngStream,
    TimeGrid,
    eta_functional,
    paths_to_csv,
    pitman_transform,
    sample_bm,
)

OUT = Path("results/paths")
OUT.mkdir(parents=True, exist_ok=True)

grid = TimeGrid(1.0, 1000)
rng = RngStream(7, 0)

etas = [eta_functional(sample_bm(grid, 0.0, rng.child(i))) for i in range(5)]
with open(OUT / "eta_paths.csv", "w", newline="") as fh:
    paths_to_csv(etas, fh)

b = sample_bm(grid, 0.0, rng.child(100))
with open(OUT / "pitman_path.csv", "w", newline="") as fh:
    paths_to_csv([b, pitman_transform(b)], fh)

lp = sample_triangular_bm(2, "complex", grid, rng.child(200))
idx, rad = eta_matrix(lp)
with open(OUT / "radial_path.csv", "w", newline="") as fh:
    radial_to_csv(grid.times()[idx], np.log(rad), fh)

print(f"wrote CSV files under {OUT}/")
