"""Independent count of occupied 0.005 cells for 1M band samples on the r=0.4 sphere.

Uniform proposals in [-0.6, 0.6]^3, accepted when | |p| - 0.4 | <= 0.05, moved
radially onto the sphere, then binned into origin-anchored cubic cells.
"""
import numpy as np


def count(seed, n=1_000_000, r=0.4, band=0.05, cell=0.005):
    rng = np.random.default_rng(seed)
    kept = []
    total = 0
    while total < n:
        p = rng.uniform(-0.6, 0.6, size=(4 * n, 3))
        d = np.abs(np.linalg.norm(p, axis=1) - r)
        p = p[d <= band]
        kept.append(p)
        total += len(p)
    p = np.concatenate(kept)[:n]
    p = r * p / np.linalg.norm(p, axis=1, keepdims=True)
    keys = np.floor(p / cell).astype(np.int64)
    return len(np.unique(keys, axis=0))


if __name__ == "__main__":
    counts = [count(s) for s in range(3)]
    print(counts, np.mean(counts))
