"""Searching the fuzziness interval with differential evolution.

The cost of a candidate interval [xi1, xi2] is the held-out quantization
error of the fused fuzzy codebook. The search writes the grid CSV that
backs a heat-map plot of the cost surface.
"""

from pathlib import Path

import numpy as np

from fneq import GAConfig, ga_optimize, write_grid_csv, xi_grid
from fneq.clustering import ClusteringParams
from fneq.tuner import make_quantization_mse_objective

rng = np.random.default_rng(89)
centers = rng.normal(size=(6, 8)) * 2.0
points = np.vstack([c + 0.4 * rng.normal(size=(120, 8)) for c in centers])

objective = make_quantization_mse_objective(
    points, k_star=6, params=ClusteringParams(seed=4, max_iters=40)
)

config = GAConfig(seed=4, bounds=(2.0, 12.0), generations=12)
result = ga_optimize(objective, config)
print(f"best interval: xi1={result.xi1:.3f} xi2={result.xi2:.3f} "
      f"cost={result.cost:.5f} after {result.n_generations} generations "
      f"({result.n_evaluations} evaluations)")
print("best-cost trace:", [round(v, 5) for v in result.best_history[:8]], "...")

grid = xi_grid(objective, config.bounds, steps=6)
out = Path(__file__).parent / "bench_out"
out.mkdir(exist_ok=True)
write_grid_csv(out / "xi_grid.csv", grid)
print(f"wrote {out}/xi_grid.csv ({grid.shape[0]} grid points)")
