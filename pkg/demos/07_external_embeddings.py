"""Benchmark protocol for user-supplied embedding files.

Point this script at item and query embedding files (for example ALS
factors exported as fvecs) and it runs the 8-codebooks/32-clusters
comparison between plain and fuzzy norm-explicit indexes, reporting the
recall at growing item counts. Dimensions that 7 direction sub-spaces
do not divide are zero-padded, which changes no inner product.

    python3 demos/07_external_embeddings.py items.fvecs queries.fvecs [fvecs|csv]
"""

import sys

from fneq import Dataset, EvalConfig, QuerySet, bootstrap_eval, pad_to_multiple
from fneq.clustering import ClusteringParams
from fneq.io import load_matrix

M, M_PRIME, K_STAR, T, ITERATIONS = 8, 1, 32, 20, 10

if len(sys.argv) < 3:
    print(__doc__)
    sys.exit(1)

fmt = sys.argv[3] if len(sys.argv) > 3 else "fvecs"
items = load_matrix(sys.argv[1], fmt)
queries = load_matrix(sys.argv[2], fmt)[:100]
print(f"items {items.shape}, queries {queries.shape}")

padded_items = pad_to_multiple(items, M - M_PRIME)
padded_queries = pad_to_multiple(queries, M - M_PRIME)
counts = tuple(c for c in (2048, 4096, 8192, 16384, 32768) if T <= c <= items.shape[0])

for mode in ("pq", "neq_kmeans", "fuzzy2_neq"):
    m_prime = 0 if mode == "pq" else M_PRIME
    data = items if mode == "pq" else padded_items
    qs = queries if mode == "pq" else padded_queries
    config = EvalConfig(
        dataset=Dataset(data),
        queries=QuerySet(qs),
        mode=mode,
        m=M,
        m_prime=m_prime,
        k_star=K_STAR,
        params=ClusteringParams(seed=0),
        truth_depth=T,
        item_counts=counts,
        dataset_label="external",
    )
    report = bootstrap_eval(config, iterations=ITERATIONS, seed=7)
    curve = "  ".join(f"{n}:{r:.4f}" for n, r in report.curve)
    print(f"{mode:12s} recall={report.recall_mean:.4f} (+/- {report.recall_std:.4f})  {curve}")
