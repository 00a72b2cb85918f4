"""Seeded, chunked Monte Carlo runs.

Work is cut into fixed-size chunks and chunk ``i`` always draws from the
stream ``SeedSequence(seed, spawn_key=(i,))``.  The chunk layout never
depends on the number of worker threads, so results are identical for any
``threads`` value.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .povm import FAIL

CHUNK_SIZE = 1 << 16


def chunk_rng(seed, index, stream=0):
    return np.random.default_rng(np.random.SeedSequence(int(seed), spawn_key=(int(stream), int(index))))


def chunk_sizes(n, chunk_size=CHUNK_SIZE):
    full, rest = divmod(int(n), chunk_size)
    return [chunk_size] * full + ([rest] if rest else [])


def run_chunked(fn, n, seed, threads=1, chunk_size=CHUNK_SIZE, stream=0):
    """Call ``fn(size, rng, index)`` for each chunk and return results in chunk order."""
    sizes = chunk_sizes(n, chunk_size)
    jobs = [(size, chunk_rng(seed, i, stream), i) for i, size in enumerate(sizes)]
    if threads <= 1 or len(jobs) <= 1:
        return [fn(*job) for job in jobs]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(lambda job: fn(*job), jobs))


@dataclass(frozen=True)
class CategoricalTable:
    """Conditional law of an outcome tuple given a discrete key.

    ``outcomes`` is an ``(m, k)`` int array of label tuples and ``probs`` maps
    each key to a length-``m`` probability vector over those rows.
    """

    outcomes: np.ndarray
    probs: dict

    @classmethod
    def from_dists(cls, dists):
        """Build from ``{key: {label_tuple: p}}``; missing tuples get probability 0."""
        rows = sorted({t for d in dists.values() for t in d}, key=lambda t: tuple(_sort_key(x) for x in t))
        index = {t: i for i, t in enumerate(rows)}
        probs = {}
        for key, d in dists.items():
            p = np.zeros(len(rows))
            for t, v in d.items():
                p[index[t]] = v
            total = p.sum()
            if abs(total - 1.0) > 1e-9:
                raise ValueError(f"probabilities for key {key!r} sum to {total}")
            probs[key] = p / total
        return cls(np.array(rows, dtype=np.int64).reshape(len(rows), -1), probs)

    def sample(self, keys, rng, key_space=None):
        """Draw one outcome row per entry of ``keys`` (an int array).

        Keys are processed in sorted order of the key space, so the draw
        sequence is a pure function of ``(keys, rng state)``.
        """
        keys = np.asarray(keys)
        out = np.empty((keys.size, self.outcomes.shape[1]), dtype=np.int64)
        for key in sorted(self.probs) if key_space is None else key_space:
            mask = keys == key
            m = int(mask.sum())
            if m:
                cdf = np.cumsum(self.probs[key])
                cdf[-1] = 1.0
                idx = np.searchsorted(cdf, rng.random(m), side="right")
                out[mask] = self.outcomes[idx]
        return out


def _sort_key(x):
    return -(10**9) if x is None else x


def binomial_zscore(count, n, p):
    """``(count - n p) / sqrt(n p (1 - p))``; 0 when the variance vanishes and count matches."""
    var = n * p * (1.0 - p)
    if var <= 0.0:
        return 0.0 if count == round(n * p) else float("inf")
    return (count - n * p) / np.sqrt(var)


def decode_pairs(alice, bob):
    """Vectorized two-party decode: equal labels -> 1, unequal -> 0, any failure -> FAIL."""
    alice = np.asarray(alice)
    bob = np.asarray(bob)
    out = np.where(alice == bob, 1, 0)
    return np.where((alice == FAIL) | (bob == FAIL), FAIL, out)
