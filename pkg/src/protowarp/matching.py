"""
Maximum-weight matching of prototypes on reciprocal affinity distances.

Weights are made exact integers before the blossom search. Among equally
heavy matchings the one whose partner list (partner of item 0, of item 1, ...)
is lexicographically smallest wins, so the result never depends on the order
edges are visited in.
"""

from dataclasses import dataclass
from typing import Dict, List, Tuple

import networkx as nx
import numpy as np

from .exceptions import LengthMismatch

ZERO_DISTANCE_EPS = 1e-9


@dataclass(frozen=True, eq=False)
class AffinityMatrix:
    """Symmetric pairwise distances with +inf on the diagonal."""

    d: np.ndarray

    def __post_init__(self):
        d = np.array(self.d, dtype=float)
        if d.ndim != 2 or d.shape[0] != d.shape[1]:
            raise LengthMismatch(
                "Affinity matrix must be square, got {}".format(d.shape)
            )
        np.fill_diagonal(d, np.inf)
        if not np.array_equal(d, d.T):
            raise ValueError("Affinity matrix must be symmetric")
        if np.any(d < 0):
            raise ValueError("Affinity distances must be nonnegative")
        d.setflags(write=False)
        object.__setattr__(self, "d", d)

    @property
    def n(self) -> int:
        return self.d.shape[0]

    def weight(self, i: int, j: int, eps: float = ZERO_DISTANCE_EPS) -> float:
        return 1.0 / max(self.d[i, j], eps)


@dataclass(frozen=True)
class MatchingResult:
    pairs: Tuple[Tuple[int, int], ...]
    unmatched: Tuple[int, ...]

    def total_weight(self, dist: AffinityMatrix) -> float:
        return sum(dist.weight(i, j) for i, j in self.pairs)


def max_weight_matching(
    dist: AffinityMatrix, eps: float = ZERO_DISTANCE_EPS
) -> MatchingResult:
    """
    Pair up items so that the summed reciprocal distance is maximal, using the
    blossom algorithm on the complete graph. With an odd number of items one
    is left over.
    """
    n = dist.n
    if n < 2:
        raise ValueError("Matching needs at least 2 items, got {}".format(n))

    weights = {
        (i, j): dist.weight(i, j, eps)
        for i in range(n)
        for j in range(i + 1, n)
        if np.isfinite(dist.d[i, j])
    }

    graph = nx.Graph()
    graph.add_nodes_from(range(n))
    for (i, j), weight in _tie_broken_weights(weights, n).items():
        graph.add_edge(i, j, weight=weight)

    matching = nx.max_weight_matching(graph, maxcardinality=True)

    pairs = sorted(tuple(sorted(edge)) for edge in matching)  # type: List
    matched = {i for pair in pairs for i in pair}
    return MatchingResult(
        pairs=tuple(pairs),
        unmatched=tuple(i for i in range(n) if i not in matched),
    )


def _tie_broken_weights(
    weights: Dict[Tuple[int, int], float], n: int
) -> Dict[Tuple[int, int], int]:
    # Floats are dyadic, so one power of two makes every weight an exact int.
    ratios = {edge: w.as_integer_ratio() for edge, w in weights.items()}
    denominator = max((d for _, d in ratios.values()), default=1)
    base = n + 1
    # Exceeds any difference of summed tie-breaking terms below.
    scale = base ** (n + 1)

    ret = {}
    for (i, j), (numerator, d) in ratios.items():
        exact = numerator * (denominator // d)
        # Item k gets a base-(n+1) digit worth more the smaller k is, and the
        # digit grows as its partner's index shrinks.
        digit_i = (n - j) * base ** (n - 1 - i)
        digit_j = (n - i) * base ** (n - 1 - j)
        ret[i, j] = exact * scale + digit_i + digit_j
    return ret
