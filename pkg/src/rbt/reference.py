"""In-memory reference dictionary / priority queue for oracle comparisons.

Replays the same operation sequence eagerly, in ticket order, and produces
the outcome every lazy run must eventually match: a delete consumes the
lowest-ticketed duplicate, a search reports it, delete-min pops the smallest
(key, ticket) pair.
"""

from __future__ import annotations

from .core import (
    DELETED,
    DELETE_NOT_FOUND,
    FOUND,
    MIN,
    NOT_FOUND,
    ResultEvent,
)


class ReferenceStore:
    """Eager multiset dictionary keyed like the tree."""

    def __init__(self) -> None:
        self.entries: dict[int, list[tuple[int, object]]] = {}

    def __len__(self) -> int:
        return sum(len(v) for v in self.entries.values())

    def insert(self, ticket: int, key: int, payload=None) -> None:
        self.entries.setdefault(key, []).append((ticket, payload))

    def delete(self, ticket: int, key: int) -> ResultEvent:
        lst = self.entries.get(key)
        if lst:
            _, payload = lst.pop(0)
            if not lst:
                del self.entries[key]
            return ResultEvent(ticket, DELETED, key, payload)
        return ResultEvent(ticket, DELETE_NOT_FOUND, key, None)

    def search(self, ticket: int, key: int) -> ResultEvent:
        lst = self.entries.get(key)
        if lst:
            return ResultEvent(ticket, FOUND, key, lst[0][1])
        return ResultEvent(ticket, NOT_FOUND, key, None)

    def deletemin(self, ticket: int) -> ResultEvent | None:
        if not self.entries:
            return None
        key = min(self.entries)
        lst = self.entries[key]
        _, payload = lst.pop(0)
        if not lst:
            del self.entries[key]
        return ResultEvent(ticket, MIN, key, payload)

    def data_multiset(self) -> dict[tuple[int, object], int]:
        out: dict[tuple[int, object], int] = {}
        for key, lst in self.entries.items():
            for _, payload in lst:
                k = (key, payload)
                out[k] = out.get(k, 0) + 1
        return out


def events_match(a: ResultEvent, b: ResultEvent) -> bool:
    """Outcome equality; emission depth is diagnostic and ignored."""
    return (a.ticket, a.outcome, a.key, a.payload) == (b.ticket, b.outcome, b.key, b.payload)
