"""Batched dictionary API: insert, delete, search, flush, delete-min.

Operations return a ticket immediately; answers arrive later as
``ResultEvent`` records drained via ``poll_results``.  Incoming operations
accumulate in one in-memory staging block and enter the root buffer a block
at a time, so a burst of fewer than B operations costs no I/O at all.
"""

from __future__ import annotations

from . import pqueue, selfadjust
from .blockstore import BlockStore, IoStats
from .core import (
    DATA,
    DELETE,
    SEARCH,
    Element,
    EmptyMode,
    ResultEvent,
    TreeCore,
    TreeConfig,
    Violation,
    check_invariants,
)


class RandomBufferTree:
    """Externally buffered randomized search tree / priority queue.

    All dictionary operations are lazy: ``flush()`` forces every pending
    operation to a definite answer and restores the quiescent structural
    invariants.  ``deletemin`` answers eagerly out of the min cache.
    """

    def __init__(self, config: TreeConfig, store: BlockStore | None = None):
        self.config = config
        self.core = TreeCore(config, store)
        self.min_cache = pqueue.MinCache(
            (config.fanout // 4) * config.block_capacity)
        self._staging: list[Element] = []
        self._next_ticket = 0

    # ------------------------------------------------------------------
    # ticketing and staging

    def _take_ticket(self) -> int:
        t = self._next_ticket
        self._next_ticket += 1
        return t

    def _stage(self, el: Element) -> None:
        self._staging.append(el)
        if len(self._staging) >= self.config.block_capacity:
            self._push_staging()

    def _push_staging(self, force: bool = False) -> None:
        if not self._staging:
            return
        if not force and len(self._staging) < self.config.block_capacity:
            return
        block = sorted(self._staging, reverse=True)
        self._staging = []
        core = self.core
        core.append_run(core.root, block)
        if core.root.buffer_blocks > self.config.fanout:
            core.empty_buffer(core.root, EmptyMode.KEEP_HALF, 0)

    # ------------------------------------------------------------------
    # dictionary operations

    def insert(self, key: int, payload=None) -> int:
        """Store (key, payload); duplicate keys are kept as distinct elements."""
        t = self._take_ticket()
        core = self.core
        pri = selfadjust.initial_priority(
            self.config.selfadjust_mode, core.rng, self.config.counter_bits)
        el = Element(pri, key, t, DATA, payload)
        core.live_data += 1
        core.dirty = True
        if not pqueue.on_insert(self, el):
            self._stage(el)
        return t

    def delete(self, key: int) -> int:
        """Remove one element with ``key``; resolves lazily."""
        t = self._take_ticket()
        core = self.core
        core.dirty = True
        core.pending_ops += 1
        if not pqueue.on_delete(self, t, key):
            self._stage(Element(0, key, t, DELETE))
        return t

    def search(self, key: int) -> int:
        """Look up ``key``; resolves lazily to Found or NotFound."""
        t = self._take_ticket()
        core = self.core
        core.dirty = True
        core.pending_ops += 1
        if not pqueue.on_search(self, t, key):
            self._stage(Element(0, key, t, SEARCH))
        return t

    def deletemin(self) -> ResultEvent | None:
        """Pop the smallest key, or None when the structure is empty."""
        return pqueue.delete_min(self)

    def flush(self) -> None:
        """Quiesce: resolve every pending operation and restore invariants.

        Runs a top-down full emptying over the whole tree (each element
        moves down at most height levels, pending operations resolve at or
        above the leaves), then refills buffers bottom-up so heap order and
        internal occupancy hold exactly.
        """
        core = self.core
        if not core.dirty and not self._staging:
            return
        self._push_staging(force=True)
        f = self.config.fanout
        stack = [(core.root, 0)]
        while stack:
            node, depth = stack.pop()
            was_leaf = node.is_leaf
            core._empty_once(
                node, EmptyMode.FULL, depth, resolve_leaf=True, allow_fill=False)
            if was_leaf and node.children:
                # the leaf split while settling; shrink any oversized pieces
                for c in node.children:
                    if c.buffer_blocks > f:
                        core.empty_buffer(c, EmptyMode.KEEP_HALF, depth + 1, refill=False)
            else:
                stack.extend((c, depth + 1) for c in node.children)
        if core.root.children and not core.root.runs:
            core.fill_buffer(core.root, 0)
        core.dirty = False

    def poll_results(self) -> list[ResultEvent]:
        """Drain results emitted since the previous poll, in emission order."""
        out = self.core.results
        self.core.results = []
        return out

    # ------------------------------------------------------------------
    # introspection

    def io_stats(self) -> IoStats:
        return self.core.store.stats()

    def reset_io_stats(self) -> None:
        self.core.store.reset_stats()

    def height(self) -> int:
        return self.core.height()

    def internal_nodes(self) -> int:
        return self.core.internal_nodes()

    def live_blocks(self) -> int:
        return self.core.store.live_blocks

    def pending_ops(self) -> int:
        return self.core.pending_ops

    def check(self) -> list[Violation]:
        """Run the structural invariant suite (meaningful after a flush)."""
        return check_invariants(self.core)
