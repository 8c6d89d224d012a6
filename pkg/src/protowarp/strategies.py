from typing import Iterable, List, Sequence

import numpy as np


class Strategy:
    """
    Base strategy defining which eligible records of one class donate their
    mean beats to that class's prototype libraries.
    """

    def __init__(self, *, name):
        self.name = name

    def select(
        self, record_ids: Sequence[str], rng: np.random.Generator
    ) -> List[str]:
        """Return the chosen record ids, in a deterministic order."""
        raise NotImplementedError

    def __repr__(self):
        return "{}(name={!r})".format(type(self).__name__, self.name)


class AllRecordsStrategy(Strategy):
    """Use every eligible record."""

    def select(self, record_ids, rng):
        return sorted(set(record_ids))


class RandomSampleStrategy(AllRecordsStrategy):
    """
    Draw a seeded random subset, used to balance a large class against a small
    one. Pools no larger than `count` are used whole.
    """

    def __init__(self, *args, count, **kwargs):
        super().__init__(*args, **kwargs)
        if count < 1:
            raise ValueError("count must be >= 1, got {}".format(count))
        self.count = count

    def select(self, record_ids, rng):
        pool = super().select(record_ids, rng)
        if len(pool) <= self.count:
            return pool
        chosen = rng.choice(len(pool), size=self.count, replace=False)
        return [pool[i] for i in sorted(chosen)]


class ExactRecordsStrategy(AllRecordsStrategy):
    """Use only the listed records, when eligible."""

    def __init__(self, *args, record_ids: Iterable[str], **kwargs):
        super().__init__(*args, **kwargs)
        self.record_ids = frozenset(str(x) for x in record_ids)

    def select(self, record_ids, rng):
        return [
            x for x in super().select(record_ids, rng) if x in self.record_ids
        ]
