"""Baseline vector quantizers: product quantization and residual
quantization, plus the per-query inner-product lookup table both share
with the norm-explicit index."""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .clustering import ClusteringParams, kmeans, squared_distances
from .core import Codebook, CodeMatrix, Dataset, SubVectorLayout
from .errors import CorruptionError, InvalidInputError


@dataclass(frozen=True)
class PQIndex:
    """One codebook per sub-space plus the codes of the training items."""

    layout: SubVectorLayout
    codebooks: tuple[Codebook, ...]
    codes: CodeMatrix

    def __post_init__(self):
        if len(self.codebooks) != self.layout.m_dir:
            raise InvalidInputError("expected one codebook per sub-space")
        for cb in self.codebooks:
            if cb.dim != self.layout.D_star:
                raise InvalidInputError("codebook width must equal D_star")
        object.__setattr__(self, "codebooks", tuple(self.codebooks))


@dataclass(frozen=True)
class RQIndex:
    """Full-dimension stage codebooks; reconstruction sums one codeword
    per stage."""

    codebooks: tuple[Codebook, ...]
    codes: CodeMatrix

    def __post_init__(self):
        dims = {cb.dim for cb in self.codebooks}
        if len(dims) != 1:
            raise InvalidInputError("all stage codebooks must share the data dimension")
        object.__setattr__(self, "codebooks", tuple(self.codebooks))

    @property
    def dim(self) -> int:
        return self.codebooks[0].dim


@dataclass(frozen=True)
class ADCTable:
    """Per-query partial inner products: ``tables[j][i] = <q_j, c_{j,i}>``."""

    tables: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "tables", np.asarray(self.tables, dtype=np.float64))


def _subseeds(seed: int, count: int) -> list[int]:
    """Independent per-sub-quantizer seeds, deterministic in ``seed``."""
    return [int(s.generate_state(1)[0]) for s in np.random.SeedSequence(seed).spawn(count)]


def nearest_codes(vectors: np.ndarray, codebook: Codebook) -> np.ndarray:
    """Index of the nearest codeword per row; ties pick the lowest index."""
    return squared_distances(vectors, codebook.codewords).argmin(axis=1)


def encode(
    x: np.ndarray, codebooks: tuple[Codebook, ...], layout: SubVectorLayout
) -> np.ndarray:
    """Nearest-codeword code per sub-space for one vector."""
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (layout.D,):
        raise InvalidInputError(f"expected a vector of length {layout.D}")
    return encode_batch(x[None, :], codebooks, layout)[0]


def encode_batch(
    items: np.ndarray, codebooks: tuple[Codebook, ...], layout: SubVectorLayout
) -> np.ndarray:
    items = np.asarray(items, dtype=np.float64)
    if items.ndim != 2 or items.shape[1] != layout.D:
        raise InvalidInputError(f"expected rows of length {layout.D}")
    codes = np.empty((items.shape[0], layout.m_dir), dtype=np.int64)
    for j, sl in enumerate(layout.slices()):
        codes[:, j] = nearest_codes(items[:, sl], codebooks[j])
    return codes


def decode(
    codes: np.ndarray, codebooks: tuple[Codebook, ...], layout: SubVectorLayout
) -> np.ndarray:
    """Concatenate the selected codewords back into a full vector."""
    codes = np.asarray(codes)
    single = codes.ndim == 1
    if single:
        codes = codes[None, :]
    if codes.shape[1] != layout.m_dir:
        raise InvalidInputError(f"expected {layout.m_dir} codes per item")
    out = np.empty((codes.shape[0], layout.D))
    for j, sl in enumerate(layout.slices()):
        col = codes[:, j]
        if col.size and (col.min() < 0 or col.max() >= codebooks[j].k_star):
            raise CorruptionError(f"code out of range for codebook {j}")
        out[:, sl] = codebooks[j].codewords[col]
    return out[0] if single else out


def train_pq(
    dataset: Dataset, m_dir: int, k_star: int, params: ClusteringParams
) -> PQIndex:
    """Independent k-means per sub-space, then encode every item."""
    layout = SubVectorLayout(D=dataset.dim, m_dir=m_dir)
    if k_star > dataset.n:
        raise InvalidInputError(f"k_star={k_star} exceeds n={dataset.n}")
    seeds = _subseeds(params.seed, m_dir)
    codebooks = []
    for j, sl in enumerate(layout.slices()):
        result = kmeans(dataset.items[:, sl], k_star, replace(params, seed=seeds[j]))
        codebooks.append(result.centroids)
    codebooks = tuple(codebooks)
    codes = encode_batch(dataset.items, codebooks, layout)
    return PQIndex(
        layout=layout,
        codebooks=codebooks,
        codes=CodeMatrix(codes, k_stars=(k_star,) * m_dir),
    )


def train_rq(
    dataset: Dataset, stages: int, k_star: int, params: ClusteringParams
) -> RQIndex:
    """Stage 1 clusters the raw data; every later stage clusters the
    residual left by the previous reconstructions."""
    if stages < 1:
        raise InvalidInputError("stages must be at least 1")
    if k_star > dataset.n:
        raise InvalidInputError(f"k_star={k_star} exceeds n={dataset.n}")
    seeds = _subseeds(params.seed, stages)
    residual = dataset.items.copy()
    codebooks = []
    codes = np.empty((dataset.n, stages), dtype=np.int64)
    for s in range(stages):
        result = kmeans(residual, k_star, replace(params, seed=seeds[s]))
        cb = result.centroids
        idx = nearest_codes(residual, cb)
        residual = residual - cb.codewords[idx]
        codebooks.append(cb)
        codes[:, s] = idx
    return RQIndex(
        codebooks=tuple(codebooks),
        codes=CodeMatrix(codes, k_stars=(k_star,) * stages),
    )


def rq_decode(codes: np.ndarray, codebooks: tuple[Codebook, ...]) -> np.ndarray:
    """Sum the selected codeword of every stage."""
    codes = np.asarray(codes)
    single = codes.ndim == 1
    if single:
        codes = codes[None, :]
    out = np.zeros((codes.shape[0], codebooks[0].dim))
    for s, cb in enumerate(codebooks):
        col = codes[:, s]
        if col.size and (col.min() < 0 or col.max() >= cb.k_star):
            raise CorruptionError(f"code out of range for stage {s}")
        out += cb.codewords[col]
    return out[0] if single else out


def build_adc_table(
    q: np.ndarray, codebooks: tuple[Codebook, ...], layout: SubVectorLayout
) -> ADCTable:
    """Precompute ``<q_j, codeword>`` for every sub-space and codeword.

    One table costs ``O(k_star * D)``; scanning an item afterwards is one
    lookup per sub-space.
    """
    q = np.asarray(q, dtype=np.float64)
    if q.shape != (layout.D,):
        raise InvalidInputError(f"expected a query of length {layout.D}")
    k_star = max(cb.k_star for cb in codebooks)
    tables = np.zeros((layout.m_dir, k_star))
    for j, sl in enumerate(layout.slices()):
        cb = codebooks[j]
        tables[j, : cb.k_star] = cb.codewords @ q[sl]
    return ADCTable(tables)


def build_stage_table(q: np.ndarray, codebooks: tuple[Codebook, ...]) -> ADCTable:
    """Residual-quantizer variant: ``tables[s][i] = <q, c_{s,i}>`` with the
    full-dimension query."""
    q = np.asarray(q, dtype=np.float64)
    if q.shape != (codebooks[0].dim,):
        raise InvalidInputError(f"expected a query of length {codebooks[0].dim}")
    k_star = max(cb.k_star for cb in codebooks)
    tables = np.zeros((len(codebooks), k_star))
    for s, cb in enumerate(codebooks):
        tables[s, : cb.k_star] = cb.codewords @ q
    return ADCTable(tables)
