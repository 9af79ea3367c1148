import pytest

from rbt.blockstore import (
    BlockStore,
    InvalidHandleError,
    OversizeBlockError,
    StoreConfig,
)


@pytest.fixture
def store():
    return BlockStore(StoreConfig(block_capacity=4))


def test_alloc_returns_fresh_ids(store):
    a = store.alloc()
    b = store.alloc()
    assert a != b


def test_alloc_after_free_never_aliases_live_block(store):
    a = store.alloc()
    store.free(a)
    b = store.alloc()
    assert b != a


def test_alloc_is_io_free(store):
    ids = {store.alloc() for _ in range(1000)}
    assert len(ids) == 1000
    s = store.stats()
    assert (s.reads, s.writes) == (0, 0)


def test_write_counts_one_io_regardless_of_fill(store):
    a = store.alloc()
    store.write(a, (1, 2, 3))
    assert store.stats().writes == 1


def test_write_to_freed_id_raises(store):
    a = store.alloc()
    store.free(a)
    with pytest.raises(InvalidHandleError):
        store.write(a, (1,))


def test_oversize_write_raises(store):
    a = store.alloc()
    with pytest.raises(OversizeBlockError):
        store.write(a, (1, 2, 3, 4, 5))


def test_oversize_allowed_when_check_disabled():
    store = BlockStore(StoreConfig(block_capacity=4, fail_on_oversize=False))
    a = store.alloc()
    store.write(a, tuple(range(10)))
    assert store.read(a) == tuple(range(10))


def test_read_roundtrip_counts_one_read(store):
    a = store.alloc()
    store.write(a, ("x", "y"))
    assert store.read(a) == ("x", "y")
    s = store.stats()
    assert (s.reads, s.writes) == (1, 1)


def test_reads_are_never_cached(store):
    a = store.alloc()
    store.write(a, (1,))
    store.read(a)
    store.read(a)
    assert store.stats().reads == 2


def test_read_of_freed_id_raises(store):
    a = store.alloc()
    store.write(a, (1,))
    store.free(a)
    with pytest.raises(InvalidHandleError):
        store.read(a)


def test_read_of_unwritten_id_raises(store):
    a = store.alloc()
    with pytest.raises(InvalidHandleError):
        store.read(a)


def test_free_then_read_errors(store):
    a = store.alloc()
    store.write(a, (1,))
    store.free(a)
    with pytest.raises(InvalidHandleError):
        store.read(a)


def test_double_free_raises(store):
    a = store.alloc()
    store.free(a)
    with pytest.raises(InvalidHandleError):
        store.free(a)


def test_free_does_not_change_stats(store):
    a = store.alloc()
    store.write(a, (1,))
    before = store.stats()
    store.free(a)
    after = store.stats()
    assert (before.reads, before.writes) == (after.reads, after.writes)


def test_fresh_store_stats_zero(store):
    s = store.stats()
    assert (s.reads, s.writes, s.total()) == (0, 0, 0)


def test_reset_stats(store):
    a = store.alloc()
    store.write(a, (1,))
    store.read(a)
    store.reset_stats()
    s = store.stats()
    assert (s.reads, s.writes) == (0, 0)


def test_total_counts_every_transfer_exactly(store):
    # alloc/free are free; every read/write call adds exactly one
    calls = 0
    ids = []
    for i in range(10):
        ids.append(store.alloc())
        store.write(ids[-1], (i,))
        calls += 1
    for bid in ids[:5]:
        store.read(bid)
        calls += 1
    for bid in ids[5:]:
        store.free(bid)
    assert store.stats().total() == calls


def test_block_capacity_validation():
    with pytest.raises(ValueError):
        StoreConfig(block_capacity=1)


def test_live_blocks_tracks_allocations(store):
    a = store.alloc()
    b = store.alloc()
    assert store.live_blocks == 2
    store.free(a)
    assert store.live_blocks == 1
    store.free(b)
    assert store.live_blocks == 0
