"""Delete-min support: leftmost-path emptying plus a main-memory min cache.

The cache holds a prefix of the globally smallest data elements (up to
floor(f/4) blocks' worth) so that a refill's I/O is amortized over that many
delete-mins served for free.  While the cache is nonempty, inserts with
small enough keys are intercepted into it and deletes/searches for cached
keys are answered without touching the tree, which preserves the prefix
property: every cached key is <= every data key remaining in the tree.
"""

from __future__ import annotations

from bisect import bisect_left
from typing import TYPE_CHECKING, Optional

from .core import DELETED, FOUND, MIN, Element, EmptyMode, ResultEvent

if TYPE_CHECKING:
    from .ops import RandomBufferTree


class MinCache:
    """Key-ordered in-memory prefix of the tree's smallest data elements."""

    def __init__(self, capacity: int):
        self.capacity = capacity
        self.entries: list[Element] = []   # ascending by (key, ticket)
        self._order: list[tuple[int, int]] = []

    def __len__(self) -> int:
        return len(self.entries)

    def max_key(self) -> int:
        return self._order[-1][0]

    def insert(self, el: Element) -> Optional[Element]:
        """Add an element; returns the evicted largest entry on overflow."""
        pos = bisect_left(self._order, (el.key, el.ticket))
        self._order.insert(pos, (el.key, el.ticket))
        self.entries.insert(pos, el)
        if len(self.entries) > self.capacity:
            self._order.pop()
            return self.entries.pop()
        return None

    def extend_sorted(self, elements: list[Element]) -> None:
        """Bulk-load elements already ascending by (key, ticket) into an empty cache."""
        for el in elements:
            self.entries.append(el)
            self._order.append((el.key, el.ticket))

    def find(self, key: int) -> Optional[Element]:
        i = bisect_left(self._order, (key, -1))
        if i < len(self._order) and self._order[i][0] == key:
            return self.entries[i]
        return None

    def remove(self, key: int) -> Optional[Element]:
        """Remove and return the lowest-ticketed entry for ``key``, if any."""
        i = bisect_left(self._order, (key, -1))
        if i < len(self._order) and self._order[i][0] == key:
            self._order.pop(i)
            return self.entries.pop(i)
        return None

    def pop_min(self) -> Element:
        self._order.pop(0)
        return self.entries.pop(0)


def on_insert(tree: "RandomBufferTree", el: Element) -> bool:
    """Intercept an insert whose key belongs in the nonempty cache.

    Returns True when the element was absorbed; an eviction re-enters the
    tree through the normal staging path with its priority and ticket
    preserved, so the treap distribution is unbiased.
    """
    cache = tree.min_cache
    if len(cache) == 0 or el.key > cache.max_key():
        return False
    evicted = cache.insert(el)
    if evicted is not None:
        tree._stage(evicted)
    return True


def on_delete(tree: "RandomBufferTree", ticket: int, key: int) -> bool:
    """Serve a delete from the cache when the key is cached; no tree traffic."""
    cache = tree.min_cache
    if len(cache) == 0:
        return False
    victim = cache.remove(key)
    if victim is None:
        return False
    tree.core._emit(ResultEvent(ticket, DELETED, key, victim.payload, None))
    return True


def on_search(tree: "RandomBufferTree", ticket: int, key: int) -> bool:
    """Serve a search from the cache when the key is cached."""
    cache = tree.min_cache
    if len(cache) == 0:
        return False
    hit = cache.find(key)
    if hit is None:
        return False
    tree.core._emit(ResultEvent(ticket, FOUND, key, hit.payload, None))
    return True


def delete_min(tree: "RandomBufferTree") -> Optional[ResultEvent]:
    """Pop the smallest key; refills the cache from the tree when empty."""
    core = tree.core
    cache = tree.min_cache
    if len(cache) == 0:
        if core.live_data == 0:
            return None
        _refill(tree)
        if len(cache) == 0:
            return None
    el = cache.pop_min()
    core.live_data -= 1
    core.dirty = True
    return ResultEvent(tree._take_ticket(), MIN, el.key, el.payload, None)


def _refill(tree: "RandomBufferTree") -> None:
    """Move the smallest data elements from the tree into the cache.

    Performs a full emptying along the root-to-leftmost-leaf path (which
    also resolves every pending operation routed through that path), then
    lifts up to floor(f/4) blocks of the smallest keys out of the leftmost
    leaf.  Leftmost children whose subtrees hold no data collapse on the
    way down (their stranded operations answer not-found), so the walk
    always descends toward real data.  If the leftmost leaf holds less
    than a full cache the refill takes what is there and stops; it never
    cascades into the next leaf, which keeps the prefix property trivial.
    """
    core = tree.core
    cache = tree.min_cache
    f = core.config.fanout
    B = core.config.block_capacity
    tree._push_staging(force=True)
    core.dirty = True

    while len(cache) == 0 and core.live_data > 0:
        node = core.root
        depth = 0
        parent = None
        while node.children:
            # Cascade-free full emptying: mass only moves down along the
            # walk, the next path node absorbs any size, and an off-path
            # child left over-full heals on its next organic emptying.
            core._empty_once(node, EmptyMode.FULL, depth,
                             resolve_leaf=False, allow_fill=False)
            while len(node.children) > 1 and core.subtree_data(node.children[0]) == 0:
                core.drop_dataless_subtree(node.children[0], depth + 1)
                _collapse_leftmost(node)
            parent = node
            node = node.children[0]
            depth += 1

        # node is the leftmost leaf; resolve, extract, write back
        if node.runs:
            core._frame_start()
            loaded = core._load_elements(node)
            survivors, events = core.annihilate(loaded, depth)
            for ev in events:
                core._emit(ev)
            data = core._resolve_leaf_ops(survivors, depth)
            data.sort(key=lambda e: (e.key, e.ticket))
            take = data[:cache.capacity]
            rest = data[cache.capacity:]
            cache.extend_sorted(take)
            rest.sort(reverse=True)
            if -(-len(rest) // B) > f:
                core._split_leaf(node, rest)
                over = [c for c in node.children if c.buffer_blocks > f]
                core._frame_end(core.metrics.empty_costs)
                for c in over:
                    core.empty_buffer(c, EmptyMode.KEEP_HALF, depth + 1, refill=False)
            else:
                core._set_buffer(node, rest)
                core._frame_end(core.metrics.empty_costs)

        if node.is_leaf and not node.runs:
            if parent is None:
                break  # the whole tree is a single empty leaf
            _collapse_leftmost(parent)


def _collapse_leftmost(parent) -> None:
    """Drop the parent's leftmost child slot together with its separator."""
    parent.children.pop(0)
    if parent.separators:
        parent.separators.pop(0)
