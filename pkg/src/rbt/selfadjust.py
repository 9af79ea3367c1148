"""Heuristics that bias frequently accessed elements toward the root.

Two schemes sit on top of the plain randomized priorities:

* ``RERANDOMIZE`` -- whenever a search matches an element, draw a fresh
  random priority and keep the maximum of the old and the new value.  After
  k matches the priority is the maximum of k+1 uniform draws, so hot
  elements float upward during later buffer refills.
* ``COUNTER`` -- priorities are access counters: 1 at insert, +1 on every
  search match, saturating at ``2**counter_bits - 1``.  Counters are aged by
  halving; ageing is applied lazily through an epoch number recorded per
  buffer run, so no eager whole-tree sweep is ever needed.
"""

from __future__ import annotations

import random
from enum import Enum

PRIORITY_BITS = 64


class SelfAdjustMode(Enum):
    NONE = "none"
    RERANDOMIZE = "rerandomize"
    COUNTER = "counter"


def reset_bound(counter_bits: int) -> int:
    """Saturation value for COUNTER-mode priorities."""
    return (1 << counter_bits) - 1


def initial_priority(mode: SelfAdjustMode, rng: random.Random, counter_bits: int) -> int:
    """Priority assigned to a freshly inserted element."""
    if mode is SelfAdjustMode.COUNTER:
        return 1
    return rng.getrandbits(PRIORITY_BITS)


def rerandomized(old: int, rng: random.Random) -> int:
    """New priority after one access: max of the old value and a fresh draw."""
    return max(old, rng.getrandbits(PRIORITY_BITS))


def counter_bumped(old: int, bound: int) -> int:
    """Increment an access counter, saturating at ``bound``."""
    return old + 1 if old < bound else bound


def aged(value: int, shift: int) -> int:
    """Halve a counter once per elapsed epoch, never below 1.

    Monotone, so the relative order of counters at least a factor of two
    apart is preserved.
    """
    if shift <= 0:
        return value
    return max(1, value >> shift)
