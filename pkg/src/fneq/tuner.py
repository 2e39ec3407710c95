"""Search for the fuzziness interval [xi1, xi2] by differential evolution.

The search runs scipy's differential evolution with a small population,
mutation 0.5, recombination 0.7 and tolerance 0.01. Genomes are repaired
by swapping so the evaluated pair always satisfies ``xi1 <= xi2``; the
best cost recorded per generation is monotone non-increasing.

The default codebook objective is the mean squared quantization error of
the fused fuzzy codebook on a held-out split; a recall-based objective
is available but far slower.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, replace

import numpy as np
from scipy.optimize import differential_evolution

from .aggregation import FuzzyMeasure, fuse_codebooks
from .clustering import ClusteringParams, it2fpcm
from .core import Dataset, QuerySet
from .errors import InvalidInputError
from .evaluate import exact_topk, recall
from .neq import scan_scores, select_top_k, train_index
from .quantizers import nearest_codes

GRID_HEADER = ("xi1", "xi2", "cost")


@dataclass(frozen=True)
class GAConfig:
    """Evolution-search settings; bounds apply to both genes."""

    population: int = 10
    mutation_rate: float = 0.5
    recombination_rate: float = 0.7
    tolerance: float = 0.01
    bounds: tuple[float, float] = (2.0, 12.0)
    seed: int = 0
    generations: int = 50

    def __post_init__(self):
        if self.population < 2:
            raise InvalidInputError("population must be at least 2")
        for name in ("mutation_rate", "recombination_rate"):
            v = getattr(self, name)
            if not (0.0 <= v <= 1.0):
                raise InvalidInputError(f"{name} must lie in [0, 1]")
        if self.tolerance <= 0:
            raise InvalidInputError("tolerance must be positive")
        lo, hi = self.bounds
        if not (lo < hi):
            raise InvalidInputError("bounds must satisfy low < high")
        if lo <= 1.0:
            raise InvalidInputError("fuzziness genes must stay above 1")


@dataclass(frozen=True)
class GAResult:
    xi1: float
    xi2: float
    cost: float
    n_generations: int
    n_evaluations: int
    best_history: tuple[float, ...]


def _repaired(objective):
    def call(genome):
        x1, x2 = float(min(genome)), float(max(genome))
        try:
            return float(objective(x1, x2))
        except Exception as exc:
            raise RuntimeError(
                f"objective failed at genome (xi1={x1:.6g}, xi2={x2:.6g})"
            ) from exc

    return call


def ga_optimize(objective, config: GAConfig) -> GAResult:
    """Minimize ``objective(xi1, xi2)`` over the configured bounds.

    Terminates when the population cost spread falls under the
    tolerance or the generation cap is reached; the returned genome
    always satisfies ``xi1 <= xi2``.
    """
    best_so_far = [math.inf]
    history: list[float] = []

    wrapped = _repaired(objective)

    def tracked(genome):
        cost = wrapped(genome)
        if cost < best_so_far[0]:
            best_so_far[0] = cost
        return cost

    def per_generation(xk, convergence=None):
        history.append(best_so_far[0])

    result = differential_evolution(
        tracked,
        bounds=[config.bounds, config.bounds],
        maxiter=config.generations,
        popsize=max(2, math.ceil(config.population / 2)),
        mutation=config.mutation_rate,
        recombination=config.recombination_rate,
        tol=config.tolerance,
        seed=config.seed,
        polish=False,
        callback=per_generation,
    )
    xi1, xi2 = sorted(float(v) for v in result.x)
    return GAResult(
        xi1=xi1,
        xi2=xi2,
        cost=float(result.fun),
        n_generations=int(result.nit),
        n_evaluations=int(result.nfev),
        best_history=tuple(history),
    )


def xi_grid(objective, bounds: tuple[float, float], steps: int = 12) -> np.ndarray:
    """Evaluate the (repaired) objective on a square grid; rows are
    ``(xi1, xi2, cost)`` for the heat-map export."""
    if steps < 2:
        raise InvalidInputError("steps must be at least 2")
    wrapped = _repaired(objective)
    axis = np.linspace(bounds[0], bounds[1], steps)
    rows = []
    for x1 in axis:
        for x2 in axis:
            rows.append((x1, x2, wrapped((x1, x2))))
    return np.asarray(rows)


def write_grid_csv(path, grid: np.ndarray) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(GRID_HEADER)
        for x1, x2, cost in grid:
            writer.writerow([f"{x1:.6f}", f"{x2:.6f}", f"{cost:.10g}"])


def make_quantization_mse_objective(
    points: np.ndarray,
    k_star: int,
    params: ClusteringParams,
    holdout_fraction: float = 0.25,
    measure: FuzzyMeasure | None = None,
):
    """Cost = mean squared quantization error of the fused codebook on a
    held-out split of ``points``."""
    points = np.asarray(points, dtype=np.float64)
    if not (0.0 < holdout_fraction < 1.0):
        raise InvalidInputError("holdout_fraction must lie in (0, 1)")
    rng = np.random.default_rng(params.seed)
    order = rng.permutation(points.shape[0])
    n_hold = max(1, int(points.shape[0] * holdout_fraction))
    holdout = points[order[:n_hold]]
    train = points[order[n_hold:]]
    if train.shape[0] < k_star:
        raise InvalidInputError("not enough training points for the requested k_star")

    def objective(xi1: float, xi2: float) -> float:
        p = replace(
            params, xi_lower=xi1, xi_upper=xi2, eta_lower=xi1, eta_upper=xi2, c=k_star
        )
        codebook = fuse_codebooks(it2fpcm(train, p), measure)
        codes = nearest_codes(holdout, codebook)
        err = holdout - codebook.codewords[codes]
        return float(np.mean(np.einsum("ij,ij->i", err, err)))

    return objective


def make_recall_objective(
    dataset: Dataset,
    queries: QuerySet,
    m: int,
    m_prime: int,
    k_star: int,
    params: ClusteringParams,
    truth_depth: int = 20,
    measure: FuzzyMeasure | None = None,
):
    """Cost = negated mean recall of a fuzzy index at the given setting.

    Retrains the whole index per evaluation; use small data.
    """
    truth = exact_topk(dataset, queries, truth_depth)

    def objective(xi1: float, xi2: float) -> float:
        p = replace(params, xi_lower=xi1, xi_upper=xi2, eta_lower=xi1, eta_upper=xi2)
        index = train_index(dataset, "fuzzy2_neq", m, m_prime, k_star, p, measure=measure)
        values = [
            recall(select_top_k(scan_scores(queries.queries[i], index), truth_depth), truth.ids[i])
            for i in range(queries.count)
        ]
        return -float(np.mean(values))

    return objective
