"""Randomized buffered external-memory search tree over a simulated block store.

The package provides a batched, lazily answered dictionary / priority queue
whose every block transfer is counted, so the amortized I/O behaviour and
the structural invariants of the data structure can be checked empirically.
"""

from .blockstore import (
    Block,
    BlockStore,
    BlockStoreError,
    InvalidHandleError,
    IoStats,
    OversizeBlockError,
    StoreConfig,
)
from .core import (
    DATA,
    DELETE,
    DELETED,
    DELETE_NOT_FOUND,
    FOUND,
    MIN,
    NOT_FOUND,
    SEARCH,
    CannotSplitError,
    Element,
    EmptyMode,
    Node,
    ResultEvent,
    TreeConfig,
    TreeCore,
    Violation,
    check_invariants,
    choose_separators,
    route,
)
from .ops import RandomBufferTree
from .pqueue import MinCache
from .reference import ReferenceStore
from .selfadjust import SelfAdjustMode

__version__ = "0.1.0"

__all__ = [
    "Block",
    "BlockStore",
    "BlockStoreError",
    "CannotSplitError",
    "DATA",
    "DELETE",
    "DELETED",
    "DELETE_NOT_FOUND",
    "Element",
    "EmptyMode",
    "FOUND",
    "InvalidHandleError",
    "IoStats",
    "MIN",
    "MinCache",
    "NOT_FOUND",
    "Node",
    "OversizeBlockError",
    "RandomBufferTree",
    "ReferenceStore",
    "ResultEvent",
    "SEARCH",
    "SelfAdjustMode",
    "StoreConfig",
    "TreeConfig",
    "TreeCore",
    "Violation",
    "check_invariants",
    "choose_separators",
    "route",
]
