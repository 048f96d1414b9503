"""Ranking construction and the four ranking-similarity coefficients.

A scored table induces, per measure, a strict ranking of rule ids: score
descending, rule id ascending on ties, so every coefficient below is
deterministic and tie-free.

Coefficients over two rankings of the same rule set:

* Spearman:   1 - 6*sum(d^2) / (n(n^2-1)), d = per-rule rank difference
* Kendall:    (|concordant| - |discordant|) / (n(n-1)/2), computed by a
              mergesort-based discordant-pair count (O(n log^2 n))
* Overlap@k:  |top-k intersection| / k
* ndcc:       normalized discounted correlation -- rewards agreement near the
              top through a 1/log(1+rank) position discount on both sides:

                  dcc(L1, L2) = sum_r 1 / (log(1+rank1(r)) * log(1+rank2(r)))

              normalized to 1 on identical and -1 on reversed rankings via
              max = dcc(L2, L2), min = dcc(rev(L2), L2), avg = (max+min)/2,
              ndcc = (dcc - avg) / (max - avg). The result does not depend on
              the logarithm base (all terms scale by log(base)^2).

Matrices: the measure-vs-measure similarity matrix is computed either per
target and averaged arithmetically across targets, or pooled over a single
joint ranking of all rules.
"""

from __future__ import annotations

import csv
import json
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .rules import MEASURE_NAMES, CatalogError, ScoredRuleTable

METHODS = ("spearman", "kendall", "overlap", "ndcc")
PER_TARGET = "per-target-averaged"
POOLED = "pooled"
AGGREGATIONS = (PER_TARGET, POOLED)
DEFAULT_OVERLAP_K = 20


@dataclass(frozen=True)
class RankedList:
    """Strict total ranking of rule ids under one measure."""

    measure: str
    order: np.ndarray  # rule ids, best first
    ranks: np.ndarray  # ranks[rule_id] = 1-based rank

    def __len__(self):
        return self.order.size


def rank_scores(scores, measure="") -> RankedList:
    scores = np.asarray(scores, dtype=np.float64)
    order = np.argsort(-scores, kind="stable")  # stable keeps id order on ties
    ranks = np.empty(order.size, dtype=np.int64)
    ranks[order] = np.arange(1, order.size + 1)
    return RankedList(measure, order, ranks)


def rank_by_measure(table: ScoredRuleTable, measure: str) -> RankedList:
    if measure not in MEASURE_NAMES:
        raise CatalogError(measure)
    return rank_scores(table.measure_column(measure), measure)


def _check_pair(l1: RankedList, l2: RankedList):
    if len(l1) != len(l2):
        raise ValueError(f"rankings cover {len(l1)} vs {len(l2)} rules")
    if len(l1) < 2:
        raise ValueError("need at least 2 ranked rules")


def spearman(l1: RankedList, l2: RankedList) -> float:
    _check_pair(l1, l2)
    n = len(l1)
    d = l1.ranks - l2.ranks
    return 1.0 - 6.0 * float(np.dot(d, d)) / (n * (n * n - 1))


_MERGE_BASE = 64


def _discordant_pairs(seq: np.ndarray) -> int:
    """Inversions of a permutation: merge-count with a vectorized base case."""

    def rec(a):
        if a.size <= _MERGE_BASE:
            count = int(np.sum(a[:, None] > a[None, :], where=_upper(a.size)))
            return count, np.sort(a)
        mid = a.size // 2
        left_count, left = rec(a[:mid])
        right_count, right = rec(a[mid:])
        # pairs (x in left, y in right) with x > y
        cross = left.size * right.size - int(
            np.searchsorted(left, right, side="right").sum()
        )
        return left_count + right_count + cross, np.sort(np.concatenate((left, right)))

    total, _ = rec(np.asarray(seq))
    return total


def _upper(n, _cache={}):
    mask = _cache.get(n)
    if mask is None:
        mask = _cache[n] = np.triu(np.ones((n, n), dtype=bool), k=1)
    return mask


def kendall_tau(l1: RankedList, l2: RankedList) -> float:
    _check_pair(l1, l2)
    n = len(l1)
    seq = l2.ranks[l1.order]  # L2 ranks read in L1 order
    discordant = _discordant_pairs(seq)
    concordant = n * (n - 1) // 2 - discordant
    return (concordant - discordant) / (n * (n - 1) / 2)


def overlap_at_k(l1: RankedList, l2: RankedList, k: int) -> float:
    _check_pair(l1, l2)
    if not 1 <= k <= len(l1):
        raise ValueError(f"k={k} outside [1, {len(l1)}]")
    shared = np.intersect1d(l1.order[:k], l2.order[:k], assume_unique=True)
    return shared.size / k


def _discount(ranks, log_base):
    if log_base is None:
        return 1.0 / np.log1p(ranks)
    return float(np.log(log_base)) / np.log1p(ranks)


def dcc(l1: RankedList, l2: RankedList, log_base=None) -> float:
    _check_pair(l1, l2)
    return float(np.sum(_discount(l1.ranks, log_base) * _discount(l2.ranks, log_base)))


def ndcc(l1: RankedList, l2: RankedList, log_base=None) -> float:
    _check_pair(l1, l2)
    n = len(l1)
    positions = np.arange(1, n + 1)
    w = _discount(positions, log_base)
    value = dcc(l1, l2, log_base)
    best = float(np.sum(w * w))              # dcc of L2 against itself
    worst = float(np.sum(w * w[::-1]))       # dcc of rev(L2) against L2
    avg = 0.5 * (best + worst)
    return (value - avg) / (best - avg)


_COEFFS = {
    "spearman": lambda a, b, k: spearman(a, b),
    "kendall": lambda a, b, k: kendall_tau(a, b),
    "overlap": lambda a, b, k: overlap_at_k(a, b, min(k, len(a))),
    "ndcc": lambda a, b, k: ndcc(a, b),
}


@dataclass
class SimilarityMatrix:
    method: str
    aggregation: str
    measures: list[str]
    values: np.ndarray

    def to_payload(self) -> dict:
        return {
            "method": self.method,
            "aggregation": self.aggregation,
            "measures": list(self.measures),
            "values": [[float(v) for v in row] for row in self.values],
        }

    def save_json(self, path):
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_payload(), fh, indent=2)
            fh.write("\n")

    def save_csv(self, path):
        with open(path, "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["measure"] + list(self.measures))
            for name, row in zip(self.measures, self.values):
                writer.writerow([name] + [repr(float(v)) for v in row])


def _matrix_of_rankings(rankings, method, k, workers=1):
    m = len(rankings)
    values = np.ones((m, m), dtype=np.float64)
    coeff = _COEFFS[method]
    pairs = [(i, j) for i in range(m) for j in range(i, m)]

    def entry(pair):
        i, j = pair
        return coeff(rankings[i], rankings[j], k)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(entry, pairs))
    else:
        results = [entry(p) for p in pairs]
    for (i, j), v in zip(pairs, results):
        values[i, j] = v
        values[j, i] = v
    return values


def correlation_matrix(
    table: ScoredRuleTable,
    method: str,
    aggregation: str = PER_TARGET,
    k: int = DEFAULT_OVERLAP_K,
    workers: int = 1,
) -> SimilarityMatrix:
    """34x34 ranking-similarity matrix between all measure pairs."""
    if method not in METHODS:
        raise ValueError(f"unknown method {method!r}, expected one of {METHODS}")
    if aggregation not in AGGREGATIONS:
        raise ValueError(
            f"unknown aggregation {aggregation!r}, expected one of {AGGREGATIONS}"
        )

    def rankings_for(rows):
        sub = table.scores[rows] if rows is not None else table.scores
        return [rank_scores(sub[:, j], name) for j, name in enumerate(MEASURE_NAMES)]

    if aggregation == POOLED:
        if len(table) < 2:
            raise ValueError("pooled aggregation needs at least 2 rules")
        values = _matrix_of_rankings(rankings_for(None), method, k, workers)
    else:
        per_target = []
        for target in sorted(table.targets):
            rows = table.rows_for_target(target)
            if rows.size < 2:
                warnings.warn(
                    f"target {target!r} has {rows.size} rule(s); skipped in "
                    "per-target averaging"
                )
                continue
            per_target.append(_matrix_of_rankings(rankings_for(rows), method, k, workers))
        if not per_target:
            raise ValueError("no target with at least 2 rules")
        values = np.mean(np.stack(per_target), axis=0)

    tag = f"overlap@{k}" if method == "overlap" else method
    return SimilarityMatrix(tag, aggregation, list(MEASURE_NAMES), values)
