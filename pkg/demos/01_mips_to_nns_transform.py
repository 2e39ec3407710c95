"""Lifting maximum inner product search onto a sphere.

Every item gains one leading coordinate so that all lifted items share
the maximum norm; queries gain a zero coordinate. Inner products are
unchanged, so the nearest lifted item in Euclidean distance is exactly
the inner-product maximizer.
"""

import numpy as np

from fneq import Dataset, augment_items, augment_queries, max_norm

rng = np.random.default_rng(7)
items = rng.normal(size=(2000, 24)) * rng.lognormal(size=(2000, 1))
queries = rng.normal(size=(5, 24))

phi = max_norm(Dataset(items))
lifted_items = augment_items(items, phi)
lifted_queries = augment_queries(queries)

print(f"max item norm phi = {phi:.4f}")
norms = np.linalg.norm(lifted_items, axis=1)
print(f"lifted norms: min={norms.min():.12f} max={norms.max():.12f} (all equal phi)")

before = queries @ items.T
after = lifted_queries @ lifted_items.T
print(f"largest inner-product change under lifting: {np.abs(after - before).max():.3e}")

for qi in range(queries.shape[0]):
    by_ip = int(np.argmax(before[qi]))
    dist = np.sum((lifted_queries[qi] - lifted_items) ** 2, axis=1)
    by_nns = int(np.argmin(dist))
    marker = "==" if by_ip == by_nns else "!!"
    print(f"query {qi}: argmax inner product {by_ip:4d} {marker} nearest lifted {by_nns:4d}")
