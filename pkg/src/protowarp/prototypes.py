"""
Prototype generation by iterated pairing and merging.

Each round computes the affinity between every two current items, pairs the
items by a maximum-weight matching on the reciprocal distances, and merges
each pair whose warp stays within the amplitude and shift thresholds. Merged
items carry the summed occurrence; everything else passes through unchanged.
The process stops on a round without merges.
"""

import logging
from dataclasses import dataclass
from typing import Callable, Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from .exceptions import EmptyClassPool
from .library import Prototype, PrototypeLibraryFile
from .matching import AffinityMatrix, max_weight_matching
from .preprocess import MeanBeat
from .records import ALL_LEADS, Label, LeadId
from .settings import PrototypeConfig, WarpConfig
from .strategies import Strategy
from .utils import parallel_map
from .warping import WarpResult, merge_pair, warp

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class PairAffinity:
    distance: float
    r_std: float
    s_std: float
    forward: WarpResult


def gradient_weights(f, g, window: int = 25) -> np.ndarray:
    """
    Smoothed |f'| + |g'|, normalized to sum to one. Concentrates on the QRS
    complex, where both beats are steepest.
    """
    slope = np.abs(np.gradient(np.asarray(f, float))) + np.abs(
        np.gradient(np.asarray(g, float))
    )
    smoothed = np.convolve(slope, np.ones(window) / window, mode="same")
    total = smoothed.sum()
    if total <= 0:
        return np.full(smoothed.size, 1.0 / smoothed.size)
    return smoothed / total


def weighted_std(values: np.ndarray, weights: np.ndarray) -> float:
    mean = np.sum(weights * values)
    return float(np.sqrt(np.sum(weights * (values - mean) ** 2)))


def pair_affinity(
    f, g, cfg: WarpConfig = WarpConfig(), window: int = 25
) -> PairAffinity:
    """
    Warp both ways and average the weighted std of r and the std of s over the
    two directions, so the result is symmetric in (f, g).
    """
    weights = gradient_weights(f, g, window)
    forward = warp(f, g, cfg)
    backward = warp(g, f, cfg)

    r_std = (
        weighted_std(forward.r, weights) + weighted_std(backward.r, weights)
    ) / 2
    s_std = (float(np.std(forward.s)) + float(np.std(backward.s))) / 2
    return PairAffinity(
        distance=r_std + s_std, r_std=r_std, s_std=s_std, forward=forward
    )


def affinity(
    p_i, p_j, cfg: WarpConfig = WarpConfig(), window: int = 25
) -> float:
    return pair_affinity(p_i, p_j, cfg, window).distance


def _pair_job(args) -> PairAffinity:
    f, g, cfg, window = args
    return pair_affinity(f, g, cfg, window)


def merge_gate(
    pair: PairAffinity,
    f: np.ndarray,
    g: np.ndarray,
    config: PrototypeConfig = PrototypeConfig(),
) -> bool:
    amplitude = float(max(f.max(), g.max()) - min(f.min(), g.min()))
    return (
        pair.r_std <= config.r_threshold_ratio * amplitude
        and pair.s_std <= config.s_threshold
    )


RoundCallback = Callable[[int, Sequence[Prototype]], None]


def build_library(
    candidates: Sequence[MeanBeat],
    cfg: WarpConfig = WarpConfig(),
    config: PrototypeConfig = PrototypeConfig(),
    workers: int = 1,
    on_round: Optional[RoundCallback] = None,
) -> List[Prototype]:
    """
    Merge the mean beats of one lead and one class into prototypes, sorted by
    descending occurrence. `on_round` sees the items after every round.
    """
    items = [Prototype.from_beat(x.samples, x.record_id) for x in candidates]
    n_candidates = len(items)
    cache: Dict[Tuple[Tuple[str, ...], Tuple[str, ...]], PairAffinity] = {}

    if on_round is not None:
        on_round(0, items)

    for round_index in range(1, config.max_rounds + 1):
        if len(items) < 2:
            break

        n = len(items)
        pending = [
            (i, j)
            for i in range(n)
            for j in range(i + 1, n)
            if (items[i].lineage, items[j].lineage) not in cache
        ]
        results = parallel_map(
            _pair_job,
            [
                (
                    items[i].samples,
                    items[j].samples,
                    cfg,
                    config.smoothing_window,
                )
                for i, j in pending
            ],
            workers=workers,
        )
        for (i, j), result in zip(pending, results):
            cache[(items[i].lineage, items[j].lineage)] = result

        d = np.full((n, n), np.inf)
        for i in range(n):
            for j in range(i + 1, n):
                d[i, j] = d[j, i] = cache[
                    (items[i].lineage, items[j].lineage)
                ].distance

        matching = max_weight_matching(
            AffinityMatrix(d), eps=config.zero_distance_eps
        )

        merged = {}  # type: Dict[int, Prototype]
        absorbed = set()
        for i, j in matching.pairs:
            pair = cache[(items[i].lineage, items[j].lineage)]
            if not merge_gate(pair, items[i].samples, items[j].samples, config):
                continue
            merged[i] = Prototype(
                samples=merge_pair(
                    items[i].samples, items[j].samples, pair.forward
                ),
                occurrence=items[i].occurrence + items[j].occurrence,
                lineage=items[i].lineage + items[j].lineage,
            )
            absorbed.add(j)

        items = [
            merged.get(i, item)
            for i, item in enumerate(items)
            if i not in absorbed
        ]

        total = sum(x.occurrence for x in items)
        assert total == n_candidates, (
            "Occurrences sum to {} after round {}, expected {}".format(
                total, round_index, n_candidates
            )
        )

        logger.debug(
            "round=%d items=%d merges=%d", round_index, len(items), len(merged)
        )
        if on_round is not None:
            on_round(round_index, items)

        if not merged:
            break

    return sorted(items, key=lambda x: -x.occurrence)


def balance_pools(
    pools: Mapping[Label, Sequence[str]],
    strategies: Mapping[Label, Strategy],
    rng: np.random.Generator,
) -> Dict[Label, List[str]]:
    """Apply each class's selection strategy, in a fixed class order."""
    selected = {}
    for label in sorted(pools, key=lambda x: x.value):
        strategy = strategies.get(label)
        ids = list(pools[label])
        selected[label] = (
            strategy.select(ids, rng) if strategy is not None else sorted(ids)
        )
    return selected


def build_all_libraries(
    records_by_class: Mapping[Label, Sequence[Mapping[LeadId, MeanBeat]]],
    cfg: WarpConfig = WarpConfig(),
    config: PrototypeConfig = PrototypeConfig(),
    leads: Sequence[LeadId] = ALL_LEADS,
    workers: int = 1,
    progress: Callable = lambda x, **kwargs: x,
) -> List[PrototypeLibraryFile]:
    """Build one library per (lead, class): 12 x 2 for a full build."""
    for label, records in records_by_class.items():
        if not records:
            raise EmptyClassPool("No eligible {} records".format(label))

    jobs = [
        (label, lead)
        for label in sorted(records_by_class, key=lambda x: x.value)
        for lead in leads
    ]

    libraries = []
    bar = progress(jobs, desc="libraries")
    for label, lead in bar:
        if hasattr(bar, "set_postfix"):
            bar.set_postfix({"library": "{} {}".format(label, lead)})
        candidates = [record[lead] for record in records_by_class[label]]
        prototypes = build_library(candidates, cfg, config, workers=workers)
        libraries.append(
            PrototypeLibraryFile(
                lead=lead,
                class_label=label,
                prototypes=tuple(prototypes),
                beat_length=candidates[0].samples.size,
            )
        )
        logger.info(
            "stage=build class=%s lead=%s candidates=%d prototypes=%d",
            label,
            lead,
            len(candidates),
            len(prototypes),
        )

    return libraries
