"""Simulated external memory with per-block I/O accounting.

The store keeps whole blocks in host memory; its job is not persistence but
bookkeeping.  Every block read or write counts as exactly one I/O no matter
how full the block is, while allocating and freeing block ids are metadata
operations and cost nothing.  This matches the cost model in which the only
currency is the number of block transfers.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence


class BlockStoreError(Exception):
    """Base class for block store failures."""


class InvalidHandleError(BlockStoreError):
    """Read, write or free of a dead, unknown or never-written block id."""


class OversizeBlockError(BlockStoreError):
    """Attempt to write more elements than fit in one block."""


@dataclass(frozen=True)
class StoreConfig:
    """Capacity settings for a simulated store.

    ``block_capacity`` is the number of elements per block (B).  When
    ``fail_on_oversize`` is set, writing a block with more than B elements
    raises; turning it off disables the check entirely.
    """

    block_capacity: int
    fail_on_oversize: bool = True

    def __post_init__(self) -> None:
        if self.block_capacity < 2:
            raise ValueError("block_capacity must be at least 2")


@dataclass
class IoStats:
    """Monotone counters of block transfers since the last reset."""

    reads: int = 0
    writes: int = 0

    def total(self) -> int:
        return self.reads + self.writes


# A block is stored as an immutable tuple of at most ``block_capacity``
# elements; the store is agnostic about what the elements are.
Block = tuple


class BlockStore:
    """Flat id -> block map that charges one I/O per block transfer.

    Single-writer: a store may be handed between threads but concurrent
    mutation is not supported.
    """

    def __init__(self, config: StoreConfig):
        self.config = config
        self._blocks: dict[int, tuple | None] = {}
        self._next_id = 1
        self._stats = IoStats()

    def alloc(self) -> int:
        """Reserve a fresh block id.  Never reuses ids; free of I/O charge."""
        bid = self._next_id
        self._next_id += 1
        self._blocks[bid] = None  # allocated but not yet written
        return bid

    def write(self, bid: int, elements: Sequence) -> None:
        """Store ``elements`` at ``bid``.  Costs one write regardless of fill."""
        if bid not in self._blocks:
            raise InvalidHandleError(f"write to dead block id {bid}")
        blk = tuple(elements)
        if self.config.fail_on_oversize and len(blk) > self.config.block_capacity:
            raise OversizeBlockError(
                f"{len(blk)} elements exceed block capacity "
                f"{self.config.block_capacity}"
            )
        self._blocks[bid] = blk
        self._stats.writes += 1

    def read(self, bid: int) -> tuple:
        """Return the block last written to ``bid``.  Costs one read."""
        blk = self._blocks.get(bid)
        if blk is None:
            raise InvalidHandleError(f"read of dead or unwritten block id {bid}")
        self._stats.reads += 1
        return blk

    def free(self, bid: int) -> None:
        """Release ``bid``.  Free of I/O charge; double frees raise."""
        if bid not in self._blocks:
            raise InvalidHandleError(f"double free or unknown block id {bid}")
        del self._blocks[bid]

    def stats(self) -> IoStats:
        return IoStats(self._stats.reads, self._stats.writes)

    def reset_stats(self) -> None:
        self._stats = IoStats()

    def io_total(self) -> int:
        return self._stats.reads + self._stats.writes

    @property
    def live_blocks(self) -> int:
        """Number of currently allocated block ids."""
        return len(self._blocks)
