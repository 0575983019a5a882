"""Independent brute-force oracles the implementations are checked against.

Everything here is deliberately naive: explicit pair enumeration, direct
contingency tables, exhaustive positive/negative score comparisons. None
of it shares code with the package.
"""

from __future__ import annotations

import itertools
import math
from collections import Counter


class DisjointSet:
    def __init__(self, n: int):
        self.parent = list(range(n))

    def find(self, x: int) -> int:
        while self.parent[x] != x:
            self.parent[x] = self.parent[self.parent[x]]
            x = self.parent[x]
        return x

    def union(self, a: int, b: int) -> None:
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.parent[rb] = ra


def union_find_components(matrix) -> list[list[int]]:
    """Connected components of a symmetric binary matrix via union-find."""
    n = len(matrix)
    dsu = DisjointSet(n)
    for i in range(n):
        for j in range(n):
            if matrix[i][j]:
                dsu.union(i, j)
    groups: dict[int, list[int]] = {}
    for i in range(n):
        groups.setdefault(dsu.find(i), []).append(i)
    return sorted((sorted(g) for g in groups.values()), key=lambda g: g[0])


def ari_oracle(y, y_hat) -> float:
    """ARI by explicit enumeration of all item pairs."""
    n = len(y)
    pairs = list(itertools.combinations(range(n), 2))
    tp = sum(1 for i, j in pairs if y[i] == y[j] and y_hat[i] == y_hat[j])
    same_y = sum(1 for i, j in pairs if y[i] == y[j])
    same_y_hat = sum(1 for i, j in pairs if y_hat[i] == y_hat[j])
    total = len(pairs)
    expected = same_y * same_y_hat / total
    maximum = (same_y + same_y_hat) / 2.0
    if maximum == expected:
        return 1.0
    return (tp - expected) / (maximum - expected)


def _probabilities(y, y_hat):
    n = len(y)
    joint = Counter(zip(y, y_hat))
    p_joint = {k: v / n for k, v in joint.items()}
    p_y = Counter(y)
    p_y = {k: v / n for k, v in p_y.items()}
    p_y_hat = Counter(y_hat)
    p_y_hat = {k: v / n for k, v in p_y_hat.items()}
    return p_joint, p_y, p_y_hat


def nmi_oracle(y, y_hat) -> float:
    p_joint, p_y, p_y_hat = _probabilities(y, y_hat)
    h_y = -sum(p * math.log(p) for p in p_y.values())
    h_y_hat = -sum(p * math.log(p) for p in p_y_hat.values())
    if h_y == 0.0 and h_y_hat == 0.0:
        return 1.0
    if h_y == 0.0 or h_y_hat == 0.0:
        return 0.0
    info = sum(
        p * math.log(p / (p_y[a] * p_y_hat[b])) for (a, b), p in p_joint.items()
    )
    return 2.0 * info / (h_y + h_y_hat)


def v_measure_oracle(y, y_hat) -> tuple[float, float, float]:
    """(homogeneity, completeness, v) via direct conditional entropies."""
    p_joint, p_y, p_y_hat = _probabilities(y, y_hat)
    h_y = -sum(p * math.log(p) for p in p_y.values())
    h_y_hat = -sum(p * math.log(p) for p in p_y_hat.values())
    h_y_given = -sum(p * math.log(p / p_y_hat[b]) for (a, b), p in p_joint.items())
    h_y_hat_given = -sum(p * math.log(p / p_y[a]) for (a, b), p in p_joint.items())
    homogeneity = 1.0 if h_y == 0.0 else 1.0 - h_y_given / h_y
    completeness = 1.0 if h_y_hat == 0.0 else 1.0 - h_y_hat_given / h_y_hat
    if homogeneity + completeness == 0.0:
        v = 0.0
    else:
        v = 2.0 * homogeneity * completeness / (homogeneity + completeness)
    return homogeneity, completeness, v


def auc_oracle(gold, scores) -> float:
    """AUC by comparing every positive/negative score pair."""
    positives = [s for g, s in zip(gold, scores) if g]
    negatives = [s for g, s in zip(gold, scores) if not g]
    wins = sum(1 for p in positives for q in negatives if p > q)
    ties = sum(1 for p in positives for q in negatives if p == q)
    return (wins + 0.5 * ties) / (len(positives) * len(negatives))


def partitions_with_max_blocks(n: int, max_blocks: int):
    """All canonical label sequences of n items using at most max_blocks labels.

    Canonical means first occurrences are 0, 1, 2, ... so each set
    partition appears exactly once; the metrics under test are invariant
    under relabeling, which the suites assert separately.
    """

    def extend(prefix: list[int], used: int):
        if len(prefix) == n:
            yield tuple(prefix)
            return
        for label in range(min(used + 1, max_blocks)):
            prefix.append(label)
            yield from extend(prefix, max(used, label + 1))
            prefix.pop()

    yield from extend([], 0)
