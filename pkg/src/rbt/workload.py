"""Workload generators and benchmark runners used by the CLI and tests."""

from __future__ import annotations

import math
import random
import time
from bisect import bisect_right
from collections import Counter
from dataclasses import dataclass, field

from .core import FOUND, MIN, TreeConfig
from .ops import RandomBufferTree
from .selfadjust import SelfAdjustMode

KEY_RANGE = 1 << 63  # keys are signed 64-bit


class ZipfSampler:
    """Bounded Zipf(s) sampler over ranks 1..n via inverse-CDF lookup."""

    def __init__(self, n_items: int, s: float, rng: random.Random):
        self._rng = rng
        weights = [1.0 / (r ** s) for r in range(1, n_items + 1)]
        total = 0.0
        self._cdf = []
        for w in weights:
            total += w
            self._cdf.append(total)
        self._total = total

    def sample_rank(self) -> int:
        """Zero-based rank, 0 being the hottest."""
        x = self._rng.random() * self._total
        return bisect_right(self._cdf, x)


def make_tree(block: int, fanout: int, seed: int,
              mode: SelfAdjustMode = SelfAdjustMode.NONE,
              counter_bits: int = 16) -> RandomBufferTree:
    return RandomBufferTree(TreeConfig(
        block_capacity=block, fanout=fanout, rng_seed=seed,
        selfadjust_mode=mode, counter_bits=counter_bits))


def random_keys(rng: random.Random, n: int) -> list[int]:
    return [rng.randrange(-KEY_RANGE, KEY_RANGE) for _ in range(n)]


@dataclass
class RunStats:
    reads: int
    writes: int
    height: int
    internal_nodes: int
    wall_ms: float
    ok: bool
    tree: RandomBufferTree
    extras: dict = field(default_factory=dict)

    @property
    def io_total(self) -> int:
        return self.reads + self.writes


def _finish(tree: RandomBufferTree, t0: float, ok: bool) -> RunStats:
    stats = tree.io_stats()
    return RunStats(
        reads=stats.reads,
        writes=stats.writes,
        height=tree.height(),
        internal_nodes=tree.internal_nodes(),
        wall_ms=(time.perf_counter() - t0) * 1000.0,
        ok=ok,
        tree=tree,
    )


def run_insert_workload(block: int, fanout: int, n: int, seed: int,
                        mode: SelfAdjustMode = SelfAdjustMode.NONE) -> RunStats:
    """N random-key inserts followed by one flush."""
    rng = random.Random(seed)
    tree = make_tree(block, fanout, seed, mode)
    t0 = time.perf_counter()
    for key in random_keys(rng, n):
        tree.insert(key)
    tree.flush()
    return _finish(tree, t0, True)


def run_sort_workload(block: int, fanout: int, n: int, seed: int,
                      mode: SelfAdjustMode = SelfAdjustMode.NONE,
                      keys: list[int] | None = None) -> RunStats:
    """N inserts then N delete-mins; verifies the output is the sorted input."""
    rng = random.Random(seed)
    if keys is None:
        keys = random_keys(rng, n)
    tree = make_tree(block, fanout, seed, mode)
    t0 = time.perf_counter()
    for key in keys:
        tree.insert(key)
    out = []
    while True:
        ev = tree.deletemin()
        if ev is None:
            break
        out.append(ev.key)
    ok = (out == sorted(keys)) and (Counter(out) == Counter(keys))
    return _finish(tree, t0, ok)


def run_zipf_search_workload(block: int, fanout: int, n_keys: int,
                             n_searches: int, seed: int,
                             mode: SelfAdjustMode = SelfAdjustMode.NONE,
                             s: float = 1.0,
                             flush_every: int = 10_000) -> RunStats:
    """Skewed lookups over a fixed key population.

    Inserts ``n_keys`` distinct keys, then performs ``n_searches`` lookups
    with Zipf-distributed ranks mapped to a seeded key permutation.
    Periodic flushes let the refill machinery promote re-prioritized
    elements.  Per-key found-depths are collected on ``stats.tree`` callers
    via the returned extras.
    """
    rng = random.Random(seed)
    tree = make_tree(block, fanout, seed, mode)
    keys = list(range(n_keys))
    rng.shuffle(keys)          # rank r -> keys[r]; decouples hotness from key order
    insert_order = keys[:]
    rng.shuffle(insert_order)
    sampler = ZipfSampler(n_keys, s, rng)

    t0 = time.perf_counter()
    for key in insert_order:
        tree.insert(key, payload=key)
    tree.flush()
    depth_sum: dict[int, int] = {}
    depth_cnt: dict[int, int] = {}

    def drain() -> None:
        for ev in tree.poll_results():
            if ev.outcome == FOUND and ev.depth is not None:
                depth_sum[ev.key] = depth_sum.get(ev.key, 0) + ev.depth
                depth_cnt[ev.key] = depth_cnt.get(ev.key, 0) + 1

    for i in range(n_searches):
        tree.search(keys[sampler.sample_rank()])
        if (i + 1) % flush_every == 0:
            tree.flush()
            drain()
    tree.flush()
    drain()

    stats = _finish(tree, t0, True)
    hot = keys[:max(1, n_keys // 100)]
    hot_pairs = [(depth_sum[k], depth_cnt[k]) for k in hot if k in depth_cnt]
    all_sum = sum(depth_sum.values())
    all_cnt = sum(depth_cnt.values())
    stats.extras = {
        "hot_mean_depth": (sum(s for s, _ in hot_pairs) / sum(c for _, c in hot_pairs))
        if hot_pairs else math.nan,
        "all_mean_depth": (all_sum / all_cnt) if all_cnt else math.nan,
    }
    return stats
