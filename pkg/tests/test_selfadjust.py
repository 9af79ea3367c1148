import random
import statistics

from rbt import selfadjust
from rbt.core import DATA, FOUND
from rbt.selfadjust import SelfAdjustMode, aged, counter_bumped, rerandomized, reset_bound

from _util import make_tree


class FixedRng:
    def __init__(self, value):
        self.value = value

    def getrandbits(self, _bits):
        return self.value


# ----------------------------------------------------------------------
# rerandomize

def test_rerandomize_takes_larger_draw():
    assert rerandomized(10, FixedRng(900)) == 900


def test_rerandomize_keeps_larger_current():
    assert rerandomized(900, FixedRng(10)) == 900


def test_rerandomize_is_monotone_nondecreasing():
    rng = random.Random(1)
    p = selfadjust.initial_priority(SelfAdjustMode.RERANDOMIZE, rng, 16)
    for _ in range(50):
        q = rerandomized(p, rng)
        assert q >= p
        p = q


def test_priority_after_k_matches_is_max_of_k_plus_one_draws():
    # analytic oracle: E[max of m uniform draws on [0, 2^64)] = m/(m+1) * 2^64
    k = 4
    rng = random.Random(7)
    trials = 4000
    total = 0
    for _ in range(trials):
        p = rng.getrandbits(64)
        for _ in range(k):
            p = rerandomized(p, rng)
        total += p
    mean = total / trials / 2.0**64
    expected = (k + 1) / (k + 2)
    se = 1.0 / (trials ** 0.5)  # loose bound on the standard error
    assert abs(mean - expected) < 5 * se


def test_search_match_bumps_priority_in_tree():
    tree = make_tree(4, 4, 5, mode=SelfAdjustMode.RERANDOMIZE)
    for k in range(40):
        tree.insert(k, payload=k)
    tree.flush()
    start = {e.key: e.priority for e in tree.core.scan_data()}
    for _ in range(30):
        tree.search(17)
        tree.flush()
    end = {e.key: e.priority for e in tree.core.scan_data()}
    assert end[17] >= start[17]
    found = [e for e in tree.poll_results() if e.outcome == FOUND]
    assert len(found) == 30


# ----------------------------------------------------------------------
# counter

def test_counter_increments():
    assert counter_bumped(1, reset_bound(16)) == 2


def test_counter_saturates_at_bound():
    bound = reset_bound(4)
    assert counter_bumped(bound, bound) == bound
    assert counter_bumped(bound - 1, bound) == bound


def test_counter_mode_inserts_start_at_one():
    tree = make_tree(4, 4, 1, mode=SelfAdjustMode.COUNTER)
    for k in range(10):
        tree.insert(k)
    tree.flush()
    assert all(e.priority == 1 for e in tree.core.scan_data())


def test_counter_depth_bias_over_seeds():
    # keys matched five times settle strictly higher, on average, than keys
    # matched once
    n_keys, hot_n, warm_n = 2000, 100, 100
    hot_depths, warm_depths = [], []
    for seed in range(1, 31):
        tree = make_tree(8, 8, seed, mode=SelfAdjustMode.COUNTER)
        rng = random.Random(seed + 999)
        keys = list(range(n_keys))
        rng.shuffle(keys)
        for k in keys:
            tree.insert(k)
        tree.flush()
        hot, warm = keys[:hot_n], keys[hot_n:hot_n + warm_n]
        for rounds in range(5):
            for k in hot:
                tree.search(k)
            if rounds == 0:
                for k in warm:
                    tree.search(k)
            tree.flush()
        depth_of = {}
        for node, depth in tree.core.iter_nodes():
            for e in tree.core.buffer_snapshot(node):
                if e.kind == DATA:
                    depth_of[e.key] = depth
        hot_depths.append(statistics.mean(depth_of[k] for k in hot))
        warm_depths.append(statistics.mean(depth_of[k] for k in warm))
    assert statistics.mean(hot_depths) < statistics.mean(warm_depths)


# ----------------------------------------------------------------------
# counter ageing

def test_aged_halves_with_floor_one():
    assert [aged(v, 1) for v in (8, 3, 1)] == [4, 1, 1]


def test_aged_two_epochs_behind():
    assert aged(8, 2) == 2


def test_aged_is_monotone():
    for s in (1, 2, 3):
        values = sorted(random.Random(s).sample(range(1, 2**12), 60))
        halved = [aged(v, s) for v in values]
        assert halved == sorted(halved)


def test_aged_preserves_order_of_separated_counters():
    for a in range(1, 64):
        for gap in range(2, 10):
            assert aged(a + gap, 1) >= aged(a, 1)


def test_reset_epoch_triggers_and_tree_stays_valid():
    tree = make_tree(4, 4, 3, mode=SelfAdjustMode.COUNTER, counter_bits=2)
    bound = reset_bound(2)  # 3
    for k in range(40):
        tree.insert(k)
    tree.flush()
    # hammer one key until its counter saturates at the root
    for _ in range(12):
        tree.search(11)
        tree.flush()
    assert tree.core.epoch >= 1
    data = {e.key: e.priority for e in tree.core.scan_data()}
    assert all(1 <= p <= bound for p in data.values())
    assert tree.check() == []


def test_counter_mode_invariants_after_search_workload():
    tree = make_tree(4, 8, 9, mode=SelfAdjustMode.COUNTER)
    rng = random.Random(9)
    for k in range(300):
        tree.insert(rng.randrange(0, 500))
    for _ in range(200):
        tree.search(rng.randrange(0, 500))
    tree.flush()
    assert tree.check() == []
