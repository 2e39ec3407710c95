"""Domain types and vector primitives shared by every quantizer.

Conventions used throughout the package:

* item and query matrices are row-major ``(count, D)`` float arrays,
* training and scoring run in float64; persisted codebooks are float32,
* arrays stored inside the frozen dataclasses are marked read-only, so
  instances are safe to share between threads.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidInputError, ZeroNormError

#: Widest supported codeword index (codes are stored as u8 or u16).
MAX_CODEWORDS = 65535


def _frozen(a: np.ndarray) -> np.ndarray:
    """Return a C-contiguous read-only copy of ``a``."""
    out = np.ascontiguousarray(a)
    if out is a:
        out = out.copy()
    out.flags.writeable = False
    return out


def _require_finite(a: np.ndarray, name: str) -> None:
    if not np.all(np.isfinite(a)):
        raise InvalidInputError(f"{name} must contain only finite values")


@dataclass(frozen=True)
class Dataset:
    """An item corpus: ``n`` rows of ``D`` finite features."""

    items: np.ndarray

    def __post_init__(self):
        items = np.asarray(self.items, dtype=np.float64)
        if items.ndim != 2 or items.shape[0] < 1 or items.shape[1] < 1:
            raise InvalidInputError(
                f"items must be a non-empty 2-D matrix, got shape {items.shape}"
            )
        _require_finite(items, "items")
        object.__setattr__(self, "items", _frozen(items))

    @property
    def n(self) -> int:
        return self.items.shape[0]

    @property
    def dim(self) -> int:
        return self.items.shape[1]


@dataclass(frozen=True)
class QuerySet:
    """Query vectors sharing the dimensionality of the dataset they target."""

    queries: np.ndarray

    def __post_init__(self):
        queries = np.asarray(self.queries, dtype=np.float64)
        if queries.ndim != 2:
            raise InvalidInputError(
                f"queries must be a 2-D matrix, got shape {queries.shape}"
            )
        _require_finite(queries, "queries")
        object.__setattr__(self, "queries", _frozen(queries))

    @property
    def count(self) -> int:
        return self.queries.shape[0]

    @property
    def dim(self) -> int:
        return self.queries.shape[1]


@dataclass(frozen=True)
class SubVectorLayout:
    """How a ``D``-dimensional vector splits into equal sub-vectors.

    ``m_dir`` is the number of sub-quantizers operating on vector
    coordinates; it must divide ``D`` exactly and each sub-vector covers
    ``D_star = D // m_dir`` consecutive dimensions.
    """

    D: int
    m_dir: int

    def __post_init__(self):
        if self.D < 1 or self.m_dir < 1:
            raise InvalidInputError("D and m_dir must be positive")
        if self.D % self.m_dir != 0:
            raise InvalidInputError(
                f"m_dir={self.m_dir} does not divide D={self.D}; "
                "pad the data first (see pad_to_multiple)"
            )

    @property
    def D_star(self) -> int:
        return self.D // self.m_dir

    def slices(self) -> list[slice]:
        d = self.D_star
        return [slice(j * d, (j + 1) * d) for j in range(self.m_dir)]


@dataclass(frozen=True)
class Codebook:
    """``k_star`` codewords of length ``D_star`` for one sub-quantizer."""

    codewords: np.ndarray

    def __post_init__(self):
        cw = np.asarray(self.codewords, dtype=np.float64)
        if cw.ndim != 2 or cw.shape[0] < 1:
            raise InvalidInputError(
                f"codewords must be a non-empty 2-D matrix, got shape {cw.shape}"
            )
        if cw.shape[0] > MAX_CODEWORDS:
            raise InvalidInputError(
                f"k_star={cw.shape[0]} exceeds the {MAX_CODEWORDS} code-width bound"
            )
        _require_finite(cw, "codewords")
        object.__setattr__(self, "codewords", _frozen(cw))

    @property
    def k_star(self) -> int:
        return self.codewords.shape[0]

    @property
    def dim(self) -> int:
        return self.codewords.shape[1]


@dataclass(frozen=True)
class NormCodebook:
    """Scalar codewords for norm quantization, sorted ascending.

    The first training stage quantizes raw relative norms and is
    non-negative; later stages quantize signed residuals, so negative
    codewords are accepted only when ``signed=True``.
    """

    values: np.ndarray
    signed: bool = False

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=np.float64)
        if vals.ndim != 1 or vals.shape[0] < 1:
            raise InvalidInputError("values must be a non-empty 1-D array")
        if vals.shape[0] > MAX_CODEWORDS:
            raise InvalidInputError(
                f"k_star={vals.shape[0]} exceeds the {MAX_CODEWORDS} code-width bound"
            )
        _require_finite(vals, "values")
        if np.any(np.diff(vals) < 0):
            raise InvalidInputError("values must be sorted ascending")
        if not self.signed and vals[0] < 0:
            raise InvalidInputError("unsigned norm codewords must be >= 0")
        object.__setattr__(self, "values", _frozen(vals))

    @property
    def k_star(self) -> int:
        return self.values.shape[0]


@dataclass(frozen=True)
class CodeMatrix:
    """``n x m`` integer codes; column ``j`` indexes codebook ``j``.

    Bounds are checked at construction so downstream decode never sees an
    out-of-range code.
    """

    codes: np.ndarray
    k_stars: tuple[int, ...] = field(default=())

    def __post_init__(self):
        codes = np.asarray(self.codes)
        if codes.ndim != 2:
            raise InvalidInputError(f"codes must be 2-D, got shape {codes.shape}")
        if not np.issubdtype(codes.dtype, np.integer):
            raise InvalidInputError("codes must be integers")
        k_stars = tuple(int(k) for k in self.k_stars)
        if len(k_stars) != codes.shape[1]:
            raise InvalidInputError(
                f"expected {codes.shape[1]} per-column bounds, got {len(k_stars)}"
            )
        if codes.size and codes.min() < 0:
            raise InvalidInputError("codes must be non-negative")
        for j, k in enumerate(k_stars):
            if codes.shape[0] and codes[:, j].max() >= k:
                raise InvalidInputError(
                    f"column {j} holds code {codes[:, j].max()} >= k_star={k}"
                )
        width = code_dtype(max(k_stars, default=1))
        object.__setattr__(self, "codes", _frozen(codes.astype(width)))
        object.__setattr__(self, "k_stars", k_stars)

    @property
    def n(self) -> int:
        return self.codes.shape[0]

    @property
    def m(self) -> int:
        return self.codes.shape[1]


def code_dtype(k_star: int) -> type:
    """Storage width for codes: u8 up to 256 codewords, u16 beyond."""
    return np.uint8 if k_star <= 256 else np.uint16


def l2_norm(x: np.ndarray) -> float:
    """Euclidean norm of a vector; zero only for the zero vector."""
    x = np.asarray(x, dtype=np.float64)
    _require_finite(x, "x")
    return float(np.linalg.norm(x))


def row_norms(matrix: np.ndarray) -> np.ndarray:
    """Euclidean norm of every row of a matrix."""
    return np.linalg.norm(np.asarray(matrix, dtype=np.float64), axis=1)


def direction_vector(x: np.ndarray) -> np.ndarray:
    """Unit vector ``x / ||x||``.

    Raises:
        ZeroNormError: for the zero vector, whose direction is undefined.
            Callers substitute their own policy (training skips such rows).
    """
    x = np.asarray(x, dtype=np.float64)
    norm = l2_norm(x)
    if norm == 0.0:
        raise ZeroNormError("cannot take the direction of a zero vector")
    return x / norm


def split_subvectors(x: np.ndarray, layout: SubVectorLayout) -> list[np.ndarray]:
    """Split ``x`` into ``m_dir`` consecutive sub-vectors of length ``D_star``.

    Concatenating the output in order reproduces ``x`` exactly.
    """
    x = np.asarray(x)
    if x.ndim != 1 or x.shape[0] != layout.D:
        raise InvalidInputError(
            f"expected a vector of length {layout.D}, got shape {x.shape}"
        )
    return [x[s] for s in layout.slices()]


def pad_to_multiple(matrix: np.ndarray, m_dir: int) -> np.ndarray:
    """Zero-pad columns so the width becomes divisible by ``m_dir``.

    Padding with zero columns changes neither inner products nor norms,
    so MIPS results over padded items and queries are identical to the
    unpadded problem. Items and queries must be padded consistently.
    """
    matrix = np.asarray(matrix, dtype=np.float64)
    if matrix.ndim != 2:
        raise InvalidInputError("expected a 2-D matrix")
    if m_dir < 1:
        raise InvalidInputError("m_dir must be positive")
    short = (-matrix.shape[1]) % m_dir
    if short == 0:
        return matrix
    return np.hstack([matrix, np.zeros((matrix.shape[0], short))])
