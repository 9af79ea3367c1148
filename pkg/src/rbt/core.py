"""Tree structure and the buffer-emptying / buffer-filling primitives.

The structure is an m-ary search tree over keys that is simultaneously a
max-heap over per-element random priorities.  Every node owns a buffer of at
most ``fanout`` blocks.  Dictionary traffic is batched: operations are
encoded as elements (priority zero for delete/search requests) that sink
through the buffers and are answered whenever they become co-resident with
matching data during an emptying.

Buffers are stored as a list of *runs*.  Each run is a sequence of blocks
whose concatenated elements are sorted by descending (priority, key,
ticket); pushing elements into a child appends one run, and a buffer is
consolidated into a single run whenever it is loaded wholesale.  In a
quiescent tree (after a flush) every buffer is a single run, so the
concatenation of a buffer's blocks is globally sorted.
"""

from __future__ import annotations

import heapq
import random
from bisect import bisect_right
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterator, NamedTuple, Optional

from . import selfadjust
from .blockstore import BlockStore, StoreConfig
from .selfadjust import SelfAdjustMode

# Element kinds.  DATA carries a payload; DELETE and SEARCH are pending
# operations travelling through the tree with priority zero.
DATA = 0
DELETE = 1
SEARCH = 2

# Result outcomes.
FOUND = "found"
NOT_FOUND = "not_found"
DELETED = "deleted"
DELETE_NOT_FOUND = "delete_not_found"
MIN = "min"


class Element(NamedTuple):
    """One stored record or pending operation.

    Field order matters: tuple comparison on (priority, key, ticket) is the
    total order used everywhere, and since tickets are unique the comparison
    never reaches ``kind`` or ``payload``.
    """

    priority: int
    key: int
    ticket: int
    kind: int
    payload: object = None


@dataclass
class ResultEvent:
    """Lazily emitted answer to a batched operation.

    ``depth`` records the tree level at which the answer was produced
    (0 = root); it is diagnostic and excluded from oracle comparisons.
    """

    ticket: int
    outcome: str
    key: int
    payload: object = None
    depth: int | None = None


class EmptyMode(Enum):
    KEEP_HALF = "keep_half"  # retain the largest ceil(f/2) blocks
    FULL = "full"            # retain nothing


@dataclass
class TreeConfig:
    block_capacity: int
    fanout: int
    rng_seed: int = 1
    selfadjust_mode: SelfAdjustMode = SelfAdjustMode.NONE
    counter_bits: int = 16

    def __post_init__(self) -> None:
        if self.block_capacity < 2:
            raise ValueError("block_capacity must be at least 2")
        if self.fanout < 4:
            raise ValueError("fanout must be at least 4")
        if self.counter_bits < 2:
            raise ValueError("counter_bits must be at least 2")


class CannotSplitError(Exception):
    """Separator selection was asked to split a batch with no data elements."""


class Run:
    """A maximal descending-sorted segment of a node's buffer.

    ``version`` is the counter-ageing epoch the run's priorities were
    written at; stale runs are normalized on load.  ``data_count`` tracks
    the data elements in the run so subtree occupancy is known without I/O.
    """

    __slots__ = ("blocks", "count", "version", "data_count")

    def __init__(self, blocks: list[int], count: int, version: int, data_count: int):
        self.blocks = blocks
        self.count = count
        self.version = version
        self.data_count = data_count


class Node:
    __slots__ = ("separators", "children", "runs")

    def __init__(self) -> None:
        self.separators: list[int] = []
        self.children: list[Node] = []
        self.runs: list[Run] = []

    @property
    def is_leaf(self) -> bool:
        return not self.children

    @property
    def buffer_blocks(self) -> int:
        return sum(len(r.blocks) for r in self.runs)

    @property
    def buffer_count(self) -> int:
        return sum(r.count for r in self.runs)

    @property
    def buffer_data(self) -> int:
        return sum(r.data_count for r in self.runs)


def route(separators: list[int], key: int) -> int:
    """Child index for ``key``: the count of separators <= key.

    Keys equal to a separator route to the right gap.
    """
    return bisect_right(separators, key)


def choose_separators(elements: list[Element], fanout: int) -> list[int]:
    """Pick up to fanout-1 strictly increasing separator keys.

    Candidates are the keys at evenly spaced ranks ceil(i*n/f) of the
    key-sorted data elements; duplicates are collapsed, so fewer distinct
    keys yield fewer separators.  Pending operation elements never define
    separators.
    """
    keys = sorted(e.key for e in elements if e.kind == DATA)
    if not keys:
        raise CannotSplitError("no data elements to split on")
    n = len(keys)
    seps: list[int] = []
    for i in range(1, fanout):
        rank = -(-i * n // fanout)  # ceil(i*n/f), 1-based
        candidate = keys[rank - 1]
        if not seps or candidate > seps[-1]:
            seps.append(candidate)
    return seps


@dataclass
class Violation:
    kind: str          # "heap" | "key-order" | "occupancy" | "buffer-order"
    path: tuple[int, ...]
    detail: str


@dataclass
class CoreMetrics:
    """Always-on instrumentation, cheap enough to keep in every run."""

    empty_costs: list[int] = field(default_factory=list)
    fill_costs: list[int] = field(default_factory=list)
    # Blocks retained by each KEEP_HALF emptying that pushed elements down.
    keep_half_retained: list[int] = field(default_factory=list)


class TreeCore:
    """Mutable tree state plus the emptying and filling machinery.

    Exclusive access only: the structure may be moved between threads but
    never shared mutably.  All traversals are iterative, so degenerate key
    patterns cannot exhaust the interpreter stack.
    """

    def __init__(self, config: TreeConfig, store: BlockStore | None = None):
        self.config = config
        self.store = store or BlockStore(StoreConfig(config.block_capacity))
        self.rng = random.Random(config.rng_seed)
        self.root = Node()
        self.epoch = 0
        self.results: list[ResultEvent] = []
        self.live_data = 0    # data elements inserted and not yet deleted/delivered
        self.pending_ops = 0  # delete/search tickets without a result yet
        self.dirty = False
        self.metrics = CoreMetrics()
        self._cost_stack: list[list[int]] = []

        f = config.fanout
        self.keep_blocks = (f + 1) // 2      # ceil(f/2)
        self.push_threshold = (3 * f) // 4   # floor(3f/4)
        self.min_blocks = f // 4             # floor(f/4)
        self._counter_bound = selfadjust.reset_bound(config.counter_bits)

    # ------------------------------------------------------------------
    # result emission and bookkeeping

    def _emit(self, ev: ResultEvent) -> None:
        self.results.append(ev)
        if ev.outcome == DELETED:
            self.live_data -= 1
            self.pending_ops -= 1
        elif ev.outcome in (FOUND, NOT_FOUND, DELETE_NOT_FOUND):
            self.pending_ops -= 1

    # ------------------------------------------------------------------
    # block-level helpers

    def _normalize_block(self, blk: tuple, shift: int) -> list[Element]:
        if shift <= 0 or self.config.selfadjust_mode is not SelfAdjustMode.COUNTER:
            return list(blk)
        out = []
        for e in blk:
            if e.kind == DATA:
                out.append(e._replace(priority=selfadjust.aged(e.priority, shift)))
            else:
                out.append(e)
        return out

    def _load_elements(self, node: Node) -> list[Element]:
        """Read a node's whole buffer into memory.  Charged per block."""
        out: list[Element] = []
        for run in node.runs:
            shift = self.epoch - run.version
            for bid in run.blocks:
                out.extend(self._normalize_block(self.store.read(bid), shift))
        return out

    def buffer_snapshot(self, node: Node) -> list[Element]:
        """Read-only copy of a buffer's concatenated elements (charged reads)."""
        return self._load_elements(node)

    def _free_buffer(self, node: Node) -> None:
        for run in node.runs:
            for bid in run.blocks:
                self.store.free(bid)
        node.runs = []

    def _make_run(self, elements: list[Element]) -> Run:
        B = self.config.block_capacity
        blocks = []
        for i in range(0, len(elements), B):
            bid = self.store.alloc()
            self.store.write(bid, elements[i:i + B])
            blocks.append(bid)
        data = sum(1 for e in elements if e.kind == DATA)
        return Run(blocks, len(elements), self.epoch, data)

    def _maybe_start_reset_epoch(self, node: Node, elements_desc: list[Element]) -> None:
        # A counter hitting its bound inside the root buffer starts a new
        # ageing epoch; every buffer halves lazily on its next load.
        if (
            self.config.selfadjust_mode is SelfAdjustMode.COUNTER
            and node is self.root
            and elements_desc
            and elements_desc[0].priority >= self._counter_bound
        ):
            self.epoch += 1

    def _set_buffer(self, node: Node, elements_desc: list[Element]) -> None:
        self._free_buffer(node)
        if elements_desc:
            node.runs = [self._make_run(elements_desc)]
            self._maybe_start_reset_epoch(node, elements_desc)

    def append_run(self, node: Node, elements_desc: list[Element]) -> None:
        """Append one descending-sorted run to a node's buffer."""
        if elements_desc:
            node.runs.append(self._make_run(elements_desc))
            self._maybe_start_reset_epoch(node, elements_desc)

    # ------------------------------------------------------------------
    # per-invocation I/O cost frames (self cost excludes nested invocations)

    def _frame_start(self) -> None:
        self._cost_stack.append([self.store.io_total(), 0])

    def _frame_end(self, sink: list[int]) -> int:
        start, nested = self._cost_stack.pop()
        total = self.store.io_total() - start
        if self._cost_stack:
            self._cost_stack[-1][1] += total
        self_cost = total - nested
        sink.append(self_cost)
        return self_cost

    # ------------------------------------------------------------------
    # annihilation

    def annihilate(self, loaded: list[Element], depth: int = 0) -> tuple[list[Element], list[ResultEvent]]:
        """Resolve pending operations against co-resident data, in memory.

        Operations are processed in ticket order and match only data with a
        smaller ticket, so the outcomes equal a replay of the operations in
        issue order.  A delete consumes the lowest-ticketed eligible
        duplicate; a search reports it and leaves it in place (bumping its
        priority in the self-adjusting modes).  Unmatched operations survive
        and keep sinking.  No I/O happens here.
        """
        ops = [e for e in loaded if e.kind != DATA]
        if not ops:
            return list(loaded), []
        data_by_key: dict[int, list[Element]] = {}
        for e in loaded:
            if e.kind == DATA:
                data_by_key.setdefault(e.key, []).append(e)
        for lst in data_by_key.values():
            lst.sort(key=lambda e: e.ticket)
        ops.sort(key=lambda e: e.ticket)

        mode = self.config.selfadjust_mode
        events: list[ResultEvent] = []
        surviving_ops: list[Element] = []
        for op in ops:
            lst = data_by_key.get(op.key)
            if lst and lst[0].ticket < op.ticket:
                if op.kind == DELETE:
                    victim = lst.pop(0)
                    events.append(ResultEvent(op.ticket, DELETED, op.key, victim.payload, depth))
                else:
                    target = lst[0]
                    events.append(ResultEvent(op.ticket, FOUND, op.key, target.payload, depth))
                    if mode is SelfAdjustMode.RERANDOMIZE:
                        lst[0] = target._replace(
                            priority=selfadjust.rerandomized(target.priority, self.rng))
                    elif mode is SelfAdjustMode.COUNTER:
                        lst[0] = target._replace(
                            priority=selfadjust.counter_bumped(target.priority, self._counter_bound))
            else:
                surviving_ops.append(op)
        survivors = [e for lst in data_by_key.values() for e in lst]
        survivors.extend(surviving_ops)
        return survivors, events

    def _resolve_leaf_ops(self, survivors: list[Element], depth: int) -> list[Element]:
        """Answer operations that exhausted their search path at a leaf.

        Only safe once every element routed through this leaf has arrived,
        i.e. after a top-down full-emptying pass; a surviving operation then
        provably has no matching data anywhere.
        """
        data = []
        ops = []
        for e in survivors:
            (data if e.kind == DATA else ops).append(e)
        for op in sorted(ops, key=lambda e: e.ticket):
            outcome = NOT_FOUND if op.kind == SEARCH else DELETE_NOT_FOUND
            self._emit(ResultEvent(op.ticket, outcome, op.key, None, depth))
        return data

    # ------------------------------------------------------------------
    # emptying

    def empty_buffer(self, node: Node, mode: EmptyMode = EmptyMode.KEEP_HALF,
                     depth: int = 0, *, refill: bool = True) -> None:
        """Empty a node's buffer, cascading into children that overflow.

        ``refill=False`` suppresses the shrink-triggered buffer refill for
        the whole cascade; the top-down passes (flush, delete-min) use it so
        mass only ever moves downward while they walk.
        """
        work = [(node, mode, depth)]
        while work:
            n, m, d = work.pop()
            over = self._empty_once(
                n, m, d,
                resolve_leaf=(m is EmptyMode.FULL),
                allow_fill=refill and (m is EmptyMode.KEEP_HALF),
            )
            work.extend((c, EmptyMode.KEEP_HALF, d + 1) for c in over)

    def _route_down(self, node: Node, elements_desc: list[Element]) -> None:
        buckets: list[list[Element]] = [[] for _ in node.children]
        seps = node.separators
        for e in elements_desc:
            buckets[bisect_right(seps, e.key)].append(e)
        for child, bucket in zip(node.children, buckets):
            if bucket:
                self.append_run(child, bucket)

    def _split_leaf(self, node: Node, elements_desc: list[Element]) -> None:
        """Turn an overflowing leaf into an internal node.

        Retains the largest ceil(f/2) blocks' worth of elements and routes
        the rest into freshly created children using rank-quantile
        separators over the routed batch.  Separators are fixed for the
        node's lifetime.
        """
        keep_n = self.keep_blocks * self.config.block_capacity
        retained = elements_desc[:keep_n]
        pushed = elements_desc[keep_n:]
        seps = choose_separators(pushed, self.config.fanout)
        node.separators = seps
        node.children = [Node() for _ in range(len(seps) + 1)]
        self._route_down(node, pushed)
        self._set_buffer(node, retained)

    def _empty_once(
        self,
        node: Node,
        mode: EmptyMode,
        depth: int,
        *,
        resolve_leaf: bool,
        allow_fill: bool,
    ) -> list[Node]:
        """One emptying pass over a single node.

        Returns children whose buffers now exceed ``fanout`` blocks; the
        caller decides when to empty them.  The refill step (when
        annihilation shrinks the buffer below floor(f/4) blocks) applies in
        KEEP_HALF mode only: every FULL-mode call site manages occupancy
        itself afterwards.
        """
        if not node.runs:
            return []
        f = self.config.fanout
        B = self.config.block_capacity
        self._frame_start()

        single_run = len(node.runs) == 1
        loaded = self._load_elements(node)
        survivors, events = self.annihilate(loaded, depth)
        for ev in events:
            self._emit(ev)
        mutated = len(survivors) != len(loaded) or (
            self.config.selfadjust_mode is not SelfAdjustMode.NONE
            and any(ev.outcome == FOUND for ev in events)
        )
        survivors.sort(reverse=True)
        rem_blocks = -(-len(survivors) // B)

        overflow: list[Node] = []
        needs_fill = False

        if mode is EmptyMode.FULL or rem_blocks > self.push_threshold:
            if node.is_leaf:
                if mode is EmptyMode.FULL and resolve_leaf:
                    data = self._resolve_leaf_ops(survivors, depth)
                    if -(-len(data) // B) > f:
                        self._split_leaf(node, data)
                        overflow = [c for c in node.children if c.buffer_blocks > f]
                    elif len(data) != len(survivors) or mutated or not single_run:
                        self._set_buffer(node, data)
                    # else: content and layout unchanged, keep the blocks
                elif mode is EmptyMode.FULL:
                    # consolidation only; nowhere to push from a leaf
                    if mutated or not single_run:
                        self._set_buffer(node, survivors)
                else:
                    # KEEP_HALF overflow at a leaf.  If the pushed part holds
                    # data the leaf splits; a pushed part of operations only
                    # cannot define separators and may still match data
                    # sinking behind it, so everything stays resident until
                    # a flush settles it.
                    keep_n = self.keep_blocks * B
                    pushed = survivors[keep_n:]
                    if any(e.kind == DATA for e in pushed):
                        self._split_leaf(node, survivors)
                        self.metrics.keep_half_retained.append(node.buffer_blocks)
                        overflow = [c for c in node.children if c.buffer_blocks > f]
                    elif mutated or not single_run:
                        self._set_buffer(node, survivors)
            else:
                keep_n = 0 if mode is EmptyMode.FULL else self.keep_blocks * B
                retained = survivors[:keep_n]
                pushed = survivors[keep_n:]
                self._route_down(node, pushed)
                self._set_buffer(node, retained)
                if mode is EmptyMode.KEEP_HALF and pushed:
                    self.metrics.keep_half_retained.append(node.buffer_blocks)
                overflow = [c for c in node.children if c.buffer_blocks > f]
        else:
            if mutated or not single_run:
                self._set_buffer(node, survivors)
            if allow_fill and rem_blocks < self.min_blocks and node.children:
                needs_fill = True

        self._frame_end(self.metrics.empty_costs)
        if needs_fill:
            self.fill_buffer(node, depth)
        return overflow

    # ------------------------------------------------------------------
    # filling

    def fill_buffer(self, node: Node, depth: int = 0) -> None:
        """Refill a node's buffer with the largest elements below it.

        First the node itself is fully emptied (pending operations sink
        ahead of the pull), then a multiway merge over the child buffers
        pulls the globally largest elements until the node holds ceil(f/2)
        blocks or its subtree is exhausted.  Children drained along the way
        are refilled on demand; a node whose subtree empties entirely
        reverts to a leaf.
        """
        if not node.children:
            return
        self._fill_pull(node, depth)
        work = [(node, depth)]
        while work:
            v, d = work.pop()
            for c in v.children:
                if c.children:
                    if c.buffer_blocks < self.min_blocks:
                        self._fill_pull(c, d + 1)
                    if c.children:
                        work.append((c, d + 1))

    class _Cursor:
        __slots__ = ("child", "run", "bidx", "off", "raw", "norm", "consumed",
                     "consumed_data", "done", "retired")

        def __init__(self, child: "Node", run: Run):
            self.child = child
            self.run = run
            self.bidx = 0
            self.off = 0
            self.raw: tuple = ()
            self.norm: list = []
            self.consumed = 0
            self.consumed_data = 0
            self.done = False
            self.retired = False

    def _cursor_open(self, child: Node, run: Run) -> "TreeCore._Cursor":
        cur = TreeCore._Cursor(child, run)
        cur.raw = self.store.read(run.blocks[0])
        cur.norm = self._normalize_block(cur.raw, self.epoch - run.version)
        return cur

    def _cursor_advance(self, cur: "TreeCore._Cursor") -> bool:
        """Consume the cursor's current element; False when the run is spent."""
        cur.consumed += 1
        if cur.raw[cur.off].kind == DATA:
            cur.consumed_data += 1
        cur.off += 1
        if cur.off < len(cur.raw):
            return True
        cur.bidx += 1
        cur.off = 0
        if cur.bidx < len(cur.run.blocks):
            cur.raw = self.store.read(cur.run.blocks[cur.bidx])
            cur.norm = self._normalize_block(cur.raw, self.epoch - cur.run.version)
            return True
        cur.done = True
        return False

    class _FillJob:
        __slots__ = ("node", "depth", "target", "pulled", "heap", "live", "queue",
                     "queued", "cursors", "waiting")

        def __init__(self, node: "Node", depth: int, target: int):
            self.node = node
            self.depth = depth
            self.target = target
            self.pulled: list[Element] = []
            self.heap: list = []
            self.live: dict[int, int] = {}
            self.queue: list = []
            self.queued: set[int] = set()
            self.cursors: list = []
            self.waiting: Optional[Node] = None

    def _job_open_child(self, job: "TreeCore._FillJob", child: Node) -> None:
        for run in child.runs:
            if not run.blocks:
                continue
            cur = self._cursor_open(child, run)
            job.cursors.append(cur)
            job.live[id(child)] = job.live.get(id(child), 0) + 1
            e = cur.norm[cur.off]
            heapq.heappush(job.heap, (-e.priority, -e.key, -e.ticket, len(job.cursors) - 1))

    def _new_fill_job(self, node: Node, depth: int) -> "TreeCore._FillJob":
        self._frame_start()
        # pending operations sink ahead of the pull
        self.empty_buffer(node, EmptyMode.FULL, depth, refill=False)
        job = TreeCore._FillJob(node, depth, self.keep_blocks * self.config.block_capacity)
        for child in node.children:
            self._job_open_child(job, child)
        for child in node.children:
            if child.children and job.live.get(id(child), 0) == 0:
                job.queue.append(child)
                job.queued.add(id(child))
        return job

    def _job_advance(self, job: "TreeCore._FillJob") -> Optional[Node]:
        """Pull until the target is met; returns a child that needs refilling."""
        if job.waiting is not None:
            child = job.waiting
            job.waiting = None
            job.queued.discard(id(child))
            self._job_open_child(job, child)
        while len(job.pulled) < job.target:
            while job.queue:
                child = job.queue[0]
                if child.children and job.live.get(id(child), 0) == 0:
                    job.waiting = child
                    return child
                job.queue.pop(0)
                job.queued.discard(id(child))
            if not job.heap:
                break
            _, _, _, ci = heapq.heappop(job.heap)
            cur = job.cursors[ci]
            job.pulled.append(cur.norm[cur.off])
            if self._cursor_advance(cur):
                e = cur.norm[cur.off]
                heapq.heappush(job.heap, (-e.priority, -e.key, -e.ticket, ci))
            else:
                # Retire the spent run right away so the child's run list
                # reflects reality before any nested refill looks at it.
                self._retire_run(cur)
                job.live[id(cur.child)] -= 1
                if (job.live[id(cur.child)] == 0 and cur.child.children
                        and id(cur.child) not in job.queued):
                    job.queue.append(cur.child)
                    job.queued.add(id(cur.child))
        self._job_finalize(job)
        return None

    def _retire_run(self, cur: "TreeCore._Cursor") -> None:
        for bid in cur.run.blocks:
            self.store.free(bid)
        cur.child.runs.remove(cur.run)
        cur.retired = True

    def _job_finalize(self, job: "TreeCore._FillJob") -> None:
        # Materialize the partial consumption of every run still attached:
        # free fully consumed blocks, rewrite the partially consumed head.
        for cur in job.cursors:
            if cur.retired or cur.consumed == 0:
                continue
            run = cur.run
            for bid in run.blocks[:cur.bidx]:
                self.store.free(bid)
            tail = run.blocks[cur.bidx:]
            if cur.off > 0:
                self.store.free(tail[0])
                bid = self.store.alloc()
                self.store.write(bid, cur.raw[cur.off:])
                tail = [bid] + tail[1:]
            run.blocks = tail
            run.count -= cur.consumed
            run.data_count -= cur.consumed_data
        node = job.node
        if job.pulled:
            self.append_run(node, job.pulled)
        if node.children and all(c.is_leaf and not c.runs for c in node.children):
            node.children = []
            node.separators = []
        self._frame_end(self.metrics.fill_costs)

    def _fill_pull(self, node: Node, depth: int) -> None:
        jobs = [self._new_fill_job(node, depth)]
        while jobs:
            job = jobs[-1]
            child = self._job_advance(job)
            if child is None:
                jobs.pop()
            else:
                jobs.append(self._new_fill_job(child, job.depth + 1))

    # ------------------------------------------------------------------
    # subtree bookkeeping (metadata only, no I/O)

    def subtree_data(self, node: Node) -> int:
        """Data elements stored anywhere in the subtree rooted at ``node``."""
        total = 0
        stack = [node]
        while stack:
            v = stack.pop()
            total += v.buffer_data
            stack.extend(v.children)
        return total

    def drop_dataless_subtree(self, node: Node, depth: int) -> None:
        """Discard a subtree holding no data, resolving its stranded operations.

        Safe only when every element routed toward this subtree has already
        arrived in it (i.e. after the path above was fully emptied): with no
        data in range, the operations can never match and answer not-found.
        """
        ops: list[Element] = []
        stack = [node]
        while stack:
            v = stack.pop()
            if v.runs:
                ops.extend(e for e in self._load_elements(v) if e.kind != DATA)
                self._free_buffer(v)
            stack.extend(v.children)
            v.children = []
            v.separators = []
        for op in sorted(ops, key=lambda e: e.ticket):
            outcome = NOT_FOUND if op.kind == SEARCH else DELETE_NOT_FOUND
            self._emit(ResultEvent(op.ticket, outcome, op.key, None, depth))

    # ------------------------------------------------------------------
    # traversal and statistics

    def iter_nodes(self) -> Iterator[tuple[Node, int]]:
        stack = [(self.root, 0)]
        while stack:
            node, depth = stack.pop()
            yield node, depth
            stack.extend((c, depth + 1) for c in node.children)

    def height(self) -> int:
        """Edges on the longest root-to-leaf path."""
        return max(d for _, d in self.iter_nodes())

    def internal_nodes(self) -> int:
        return sum(1 for n, _ in self.iter_nodes() if n.children)

    def node_count(self) -> int:
        return sum(1 for _ in self.iter_nodes())

    def scan_data(self) -> list[Element]:
        """All data elements currently stored in the tree (charged reads)."""
        out = []
        for node, _ in self.iter_nodes():
            out.extend(e for e in self.buffer_snapshot(node) if e.kind == DATA)
        return out


def check_invariants(core: TreeCore) -> list[Violation]:
    """Validate the quiescent structural invariants; empty means valid.

    Checks, per node: (a) heap order of data elements against the whole
    subtree below, (b) element keys within the separator gap, (c) internal
    occupancy between floor(f/4) and f blocks (root and leaves exempt),
    (d) descending priority order of the buffer's concatenated elements.
    """
    violations: list[Violation] = []
    f = core.config.fanout
    order: list[tuple[Node, tuple[int, ...], Optional[int], Optional[int]]] = []
    stack: list[tuple[Node, tuple[int, ...], Optional[int], Optional[int]]] = [
        (core.root, (), None, None)
    ]
    while stack:
        node, path, lo, hi = stack.pop()
        order.append((node, path, lo, hi))
        seps = node.separators
        for i, child in enumerate(node.children):
            clo = seps[i - 1] if i > 0 else lo
            chi = seps[i] if i < len(seps) else hi
            stack.append((child, path + (i,), clo, chi))

    subtree_max: dict[int, Optional[tuple]] = {}
    for node, path, lo, hi in reversed(order):
        elems = core.buffer_snapshot(node)
        for a, b in zip(elems, elems[1:]):
            if a[:3] <= b[:3]:
                violations.append(Violation(
                    "buffer-order", path,
                    f"elements out of order: {a[:3]} before {b[:3]}"))
                break
        for e in elems:
            if (lo is not None and e.key < lo) or (hi is not None and e.key >= hi):
                violations.append(Violation(
                    "key-order", path,
                    f"key {e.key} outside gap [{lo}, {hi})"))
                break
        if node.children and node is not core.root:
            blocks = node.buffer_blocks
            if not (core.min_blocks <= blocks <= f):
                violations.append(Violation(
                    "occupancy", path,
                    f"internal node holds {blocks} blocks, expected "
                    f"{core.min_blocks}..{f}"))
        data = [e[:3] for e in elems if e.kind == DATA]
        own_min = min(data) if data else None
        own_max = max(data) if data else None
        child_max = None
        for child in node.children:
            cm = subtree_max.get(id(child))
            if cm is not None and (child_max is None or cm > child_max):
                child_max = cm
        if own_min is not None and child_max is not None and child_max > own_min:
            violations.append(Violation(
                "heap", path,
                f"subtree priority {child_max} exceeds node minimum {own_min}"))
        best = own_max
        if child_max is not None and (best is None or child_max > best):
            best = child_max
        subtree_max[id(node)] = best
    return violations
