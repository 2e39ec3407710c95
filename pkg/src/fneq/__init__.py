"""Norm-explicit product quantization for maximum inner product search.

The package trains compact codebook indexes over an item corpus and
answers top-k inner-product queries by table lookups. Direction
codebooks come from plain k-means or from interval type-2 fuzzy
clustering fused with a Sugeno integral; item norms are quantized
explicitly by scalar codebooks. PQ and RQ baselines, an exact oracle,
a bootstrap benchmark harness and a fuzziness tuner round out the
library.
"""

from .aggregation import FuzzyMeasure, SugenoInputs, fuse_codebooks, sugeno_integral
from .clustering import (
    ClusteringParams,
    FuzzyClusterResult,
    KMeansResult,
    encode_scalar,
    it2fpcm,
    kmeans,
    kmeans_scalar,
    type_reduce,
)
from .core import (
    Codebook,
    CodeMatrix,
    Dataset,
    NormCodebook,
    QuerySet,
    SubVectorLayout,
    direction_vector,
    l2_norm,
    pad_to_multiple,
    split_subvectors,
)
from .errors import CorruptionError, DomainError, InvalidInputError, ZeroNormError
from .evaluate import (
    EvalConfig,
    EvalReport,
    GroundTruth,
    bootstrap_eval,
    exact_topk,
    f1,
    precision,
    recall,
    recall_item_curve,
    running_time,
    write_curve_csv,
    write_metrics_csv,
)
from .io import load_csv, load_fvecs, save_csv, save_fvecs
from .neq import (
    IndexArtifact,
    IndexMetadata,
    OpCounter,
    estimate_inner_product,
    per_item_cost,
    reconstruct,
    reencode,
    scan_scores,
    select_top_k,
    top_k,
    train_index,
    train_neq,
)
from .persist import load_index, save_index
from .quantizers import (
    ADCTable,
    PQIndex,
    RQIndex,
    build_adc_table,
    decode,
    encode,
    train_pq,
    train_rq,
)
from .transform import (
    AugmentedSpace,
    augment_item,
    augment_items,
    augment_queries,
    augment_query,
    max_norm,
)
from .tuner import GAConfig, GAResult, ga_optimize, write_grid_csv, xi_grid

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
