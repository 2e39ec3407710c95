"""Codebook learning.

Two trainers live here: seeded Lloyd k-means (baseline vector codebooks
and scalar norm codebooks) and an interval type-2 fuzzy possibilistic
c-means (IT2FPCM) whose interval output feeds the codebook fusion stage.

IT2FPCM iterates four partition-matrix updates and two centroid updates:

* fuzzy memberships: for exponent ``u``, point ``k`` and cluster ``i``,
  ``f_u(i, k) = (sum_j (d_ik / d_jk)^(2/(u-1)))^-1`` over clusters ``j``;
  the lower bound is the elementwise min over ``u in {xi1, xi2}`` and the
  upper bound the max,
* possibilistic memberships: the same construction with ``eta1, eta2``,
* per-bound centroids: weighted means with weights ``(mu + tau)^xi1``.

Distances are squared Euclidean to the midpoint of the two centroid
bounds, which keeps the interval ordering (lower <= upper) exact. The
loop stops when the objective improves by less than ``epsilon``.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np
from scipy.spatial.distance import cdist

from .core import Codebook, NormCodebook, _frozen
from .errors import InvalidInputError


@dataclass(frozen=True)
class ClusteringParams:
    """Shared knobs for the clustering trainers.

    The fuzziness interval defaults to [8.5, 9.1]; the possibility
    interval mirrors it unless set explicitly. ``epsilon`` bounds the
    objective improvement at termination and ``seed`` fixes the
    k-means++ initialization.
    """

    c: int = 8
    xi_lower: float = 8.5
    xi_upper: float = 9.1
    eta_lower: float | None = None
    eta_upper: float | None = None
    epsilon: float = 1e-5
    max_iters: int = 100
    seed: int = 0

    def __post_init__(self):
        if self.eta_lower is None:
            object.__setattr__(self, "eta_lower", self.xi_lower)
        if self.eta_upper is None:
            object.__setattr__(self, "eta_upper", self.xi_upper)
        if self.c < 1:
            raise InvalidInputError("c must be at least 1")
        if not (1.0 < self.xi_lower <= self.xi_upper):
            raise InvalidInputError("fuzziness interval must satisfy 1 < xi1 <= xi2")
        if not (1.0 < self.eta_lower <= self.eta_upper):
            raise InvalidInputError("possibility interval must satisfy 1 < eta1 <= eta2")
        if self.epsilon <= 0:
            raise InvalidInputError("epsilon must be positive")
        if self.max_iters < 1:
            raise InvalidInputError("max_iters must be at least 1")

    def with_c(self, c: int) -> "ClusteringParams":
        return replace(self, c=c)


@dataclass(frozen=True)
class KMeansResult:
    """Lloyd output: each label is the nearest centroid and each centroid
    is the mean of its cell (up to the empty-cluster repair)."""

    centroids: Codebook
    assignments: np.ndarray
    inertia: float
    n_iter: int
    converged: bool
    inertia_history: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(
            self, "assignments", _frozen(np.asarray(self.assignments, dtype=np.int64))
        )


@dataclass(frozen=True)
class FuzzyClusterResult:
    """Interval centroids plus membership/possibility bounds.

    Matrices are ``(c, n)``: rows are clusters, columns are points. The
    lower bound never exceeds the upper bound and all entries lie in
    [0, 1]; both facts are checked at construction.
    """

    centroids_lower: np.ndarray
    centroids_upper: np.ndarray
    membership_lower: np.ndarray
    membership_upper: np.ndarray
    possibility_lower: np.ndarray
    possibility_upper: np.ndarray
    objective: float
    final_improvement: float
    n_iter: int
    converged: bool

    def __post_init__(self):
        pairs = [
            ("membership", self.membership_lower, self.membership_upper),
            ("possibility", self.possibility_lower, self.possibility_upper),
        ]
        for name, lo, up in pairs:
            lo = np.asarray(lo, dtype=np.float64)
            up = np.asarray(up, dtype=np.float64)
            if lo.shape != up.shape:
                raise InvalidInputError(f"{name} bounds disagree on shape")
            if np.any(lo < 0) or np.any(up > 1) or np.any(lo > up):
                raise InvalidInputError(f"{name} bounds must satisfy 0 <= lower <= upper <= 1")
            object.__setattr__(self, f"{name}_lower", _frozen(lo))
            object.__setattr__(self, f"{name}_upper", _frozen(up))
        for name in ("centroids_lower", "centroids_upper"):
            object.__setattr__(
                self, name, _frozen(np.asarray(getattr(self, name), dtype=np.float64))
            )

    @property
    def c(self) -> int:
        return self.membership_lower.shape[0]

    @property
    def n(self) -> int:
        return self.membership_lower.shape[1]


def squared_distances(points: np.ndarray, centroids: np.ndarray) -> np.ndarray:
    """Pairwise squared Euclidean distances, exact zeros preserved."""
    return cdist(points, centroids, "sqeuclidean")


def _check_points(points: np.ndarray, c: int) -> np.ndarray:
    points = np.asarray(points, dtype=np.float64)
    if points.ndim != 2 or points.shape[0] < 1:
        raise InvalidInputError("points must be a non-empty 2-D matrix")
    if not np.all(np.isfinite(points)):
        raise InvalidInputError("points must be finite")
    if c > points.shape[0]:
        raise InvalidInputError(f"c={c} exceeds the {points.shape[0]} available points")
    return points


def kmeans_plusplus(points: np.ndarray, c: int, rng: np.random.Generator) -> np.ndarray:
    """D^2-weighted seeding; falls back to uniform picks once every
    remaining point coincides with a chosen centroid."""
    n = points.shape[0]
    centroids = np.empty((c, points.shape[1]))
    centroids[0] = points[rng.integers(n)]
    if c == 1:
        return centroids
    closest = squared_distances(points, centroids[:1]).ravel()
    for i in range(1, c):
        total = closest.sum()
        if total > 0:
            pick = rng.choice(n, p=closest / total)
        else:
            pick = rng.integers(n)
        centroids[i] = points[pick]
        closest = np.minimum(closest, squared_distances(points, centroids[i : i + 1]).ravel())
    return centroids


def _assign(points: np.ndarray, centroids: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    d2 = squared_distances(points, centroids)
    labels = d2.argmin(axis=1)
    return labels, d2[np.arange(points.shape[0]), labels]


def kmeans(points: np.ndarray, c: int, params: ClusteringParams) -> KMeansResult:
    """Lloyd iterations from a k-means++ start, run until the assignment
    stabilizes (so both optimality conditions hold at termination).

    Empty clusters are re-seeded from the point farthest from its
    current centroid; inertia never increases across iterations.
    """
    points = _check_points(points, c)
    rng = np.random.default_rng(params.seed)
    centroids = kmeans_plusplus(points, c, rng)

    labels, closest = _assign(points, centroids)
    history = [float(closest.sum())]
    converged = False
    n_iter = 0
    for n_iter in range(1, params.max_iters + 1):
        for j in range(c):
            member = labels == j
            if member.any():
                centroids[j] = points[member].mean(axis=0)
            else:
                far = int(np.argmax(closest))
                if closest[far] > 0:
                    centroids[j] = points[far]
                    closest[far] = 0.0
        new_labels, closest = _assign(points, centroids)
        history.append(float(closest.sum()))
        if np.array_equal(new_labels, labels):
            converged = True
            break
        labels = new_labels

    return KMeansResult(
        centroids=Codebook(centroids),
        assignments=labels,
        inertia=history[-1],
        n_iter=n_iter,
        converged=converged,
        inertia_history=tuple(history),
    )


def _partition_matrix(d2: np.ndarray, exponent: float) -> np.ndarray:
    """Row-stochastic memberships ``d2^(-1/(u-1))`` normalized over
    clusters. A point at distance zero from one or more centroids gets
    its mass split evenly among them (the limit of the update rule)."""
    p = 1.0 / (exponent - 1.0)
    zero = d2 == 0.0
    singular = zero.any(axis=1)
    # Normalizing by the row minimum keeps the powers in (0, 1].
    safe = np.where(zero, 1.0, d2)
    floor = safe.min(axis=1, keepdims=True)
    w = np.power(safe / floor, -p)
    w[singular] = zero[singular].astype(np.float64)
    return w / w.sum(axis=1, keepdims=True)


def _interval_partition(
    d2: np.ndarray, lower_exp: float, upper_exp: float
) -> tuple[np.ndarray, np.ndarray]:
    a = _partition_matrix(d2, lower_exp)
    if upper_exp == lower_exp:
        return a, a.copy()
    b = _partition_matrix(d2, upper_exp)
    return np.minimum(a, b), np.maximum(a, b)


def _weighted_centroids(points: np.ndarray, weights: np.ndarray) -> np.ndarray:
    return (weights.T @ points) / weights.sum(axis=0)[:, None]


def it2fpcm(points: np.ndarray, params: ClusteringParams) -> FuzzyClusterResult:
    """Interval type-2 fuzzy possibilistic c-means.

    Returns interval memberships, possibilities and per-bound centroids.
    If the objective has not improved by less than ``epsilon`` within
    ``max_iters`` iterations, the best-so-far state is returned with
    ``converged=False``.
    """
    c = params.c
    points = _check_points(points, c)
    rng = np.random.default_rng(params.seed)
    v_lo = kmeans_plusplus(points, c, rng)
    v_up = v_lo.copy()

    objective = np.inf
    improvement = np.inf
    converged = False
    n_iter = 0
    best = None
    for n_iter in range(1, params.max_iters + 1):
        d2 = squared_distances(points, (v_lo + v_up) / 2.0)
        mu_lo, mu_up = _interval_partition(d2, params.xi_lower, params.xi_upper)
        tau_lo, tau_up = _interval_partition(d2, params.eta_lower, params.eta_upper)

        w_lo = np.power(mu_lo + tau_lo, params.xi_lower)
        w_up = np.power(mu_up + tau_up, params.xi_lower)
        v_lo = _weighted_centroids(points, w_lo)
        v_up = _weighted_centroids(points, w_up)

        # Weighted mean distortion over both bounds. Normalizing by the
        # weight mass keeps the epsilon test meaningful at high
        # fuzziness exponents, where raw weights are vanishingly small.
        num = (w_lo * squared_distances(points, v_lo)).sum()
        num += (w_up * squared_distances(points, v_up)).sum()
        new_objective = float(num / (w_lo.sum() + w_up.sum()))
        improvement = abs(objective - new_objective)
        objective = new_objective
        if best is None or objective < best[0]:
            best = (objective, v_lo, v_up, mu_lo, mu_up, tau_lo, tau_up)
        if improvement < params.epsilon:
            converged = True
            break

    if not converged:
        # Iteration budget exhausted: hand back the best state seen.
        objective, v_lo, v_up, mu_lo, mu_up, tau_lo, tau_up = best

    return FuzzyClusterResult(
        centroids_lower=v_lo,
        centroids_upper=v_up,
        membership_lower=mu_lo.T,
        membership_upper=mu_up.T,
        possibility_lower=tau_lo.T,
        possibility_upper=tau_up.T,
        objective=objective,
        final_improvement=float(improvement),
        n_iter=n_iter,
        converged=converged,
    )


def type_reduce(result: FuzzyClusterResult) -> tuple[Codebook, np.ndarray]:
    """Collapse the interval output to crisp midpoints."""
    centroids = (result.centroids_lower + result.centroids_upper) / 2.0
    membership = (result.membership_lower + result.membership_upper) / 2.0
    return Codebook(centroids), membership


def _scalar_lloyd(values: np.ndarray, k: int, max_iters: int) -> np.ndarray:
    """1-D Lloyd from quantile seeds; cell boundaries are codeword
    midpoints and boundary ties go to the lower cell.

    With k at or above the number of distinct values the quantizer is
    exact: every distinct value becomes its own codeword.
    """
    ordered = np.sort(values)
    distinct = np.unique(ordered)
    if distinct.size <= k:
        return np.sort(np.concatenate([distinct, np.full(k - distinct.size, distinct[-1])]))
    codewords = np.quantile(ordered, (np.arange(k) + 0.5) / k)
    for _ in range(max_iters):
        bounds = (codewords[:-1] + codewords[1:]) / 2.0
        cells = np.searchsorted(bounds, ordered, side="left")
        sums = np.bincount(cells, weights=ordered, minlength=k)
        counts = np.bincount(cells, minlength=k)
        filled = counts > 0
        updated = codewords.copy()
        updated[filled] = sums[filled] / counts[filled]
        if np.array_equal(updated, codewords):
            break
        codewords = updated
    return codewords


def kmeans_scalar(values: np.ndarray, k: int, *, max_iters: int = 100) -> NormCodebook:
    """Scalar Lloyd quantizer over non-negative values, codewords sorted."""
    values = np.asarray(values, dtype=np.float64).ravel()
    if values.size == 0:
        raise InvalidInputError("cannot train a norm codebook on no values")
    if not np.all(np.isfinite(values)):
        raise InvalidInputError("values must be finite")
    if values.min() < 0:
        raise InvalidInputError("norm values must be non-negative")
    if k < 1:
        raise InvalidInputError("k must be at least 1")
    return NormCodebook(_scalar_lloyd(values, k, max_iters))


def kmeans_scalar_signed(values: np.ndarray, k: int, *, max_iters: int = 100) -> NormCodebook:
    """Scalar Lloyd over signed values (norm residual stages)."""
    values = np.asarray(values, dtype=np.float64).ravel()
    if values.size == 0:
        raise InvalidInputError("cannot train a norm codebook on no values")
    if not np.all(np.isfinite(values)):
        raise InvalidInputError("values must be finite")
    if k < 1:
        raise InvalidInputError("k must be at least 1")
    return NormCodebook(_scalar_lloyd(values, k, max_iters), signed=True)


def encode_scalar(values: np.ndarray, codebook: NormCodebook) -> np.ndarray:
    """Nearest-codeword indices; boundary ties pick the lower index."""
    values = np.asarray(values, dtype=np.float64).ravel()
    cw = codebook.values
    bounds = (cw[:-1] + cw[1:]) / 2.0
    return np.searchsorted(bounds, values, side="left")
