"""Agglomerative grouping of measures from a similarity matrix.

Average linkage operates on similarities directly: at every step the two
clusters with the highest mean pairwise similarity merge, and that mean is
recorded on the merge node. Cluster-cluster similarities update by the
size-weighted average, which equals the mean over all member pairs, so merge
values never increase towards the root.

Groups come from cutting the dendrogram: every maximal subtree whose internal
merge similarities all reach the threshold becomes one group (default 0.9).
Groups are then annotated with the mean recall/confidence of each member
measure's top-20 rules (averaged across targets, then across members) and a
representative: the member with the highest mean similarity to the rest of
its group.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace

import numpy as np

from .rankcorr import SimilarityMatrix, rank_scores
from .rules import (
    BLINDED_REPRESENTATIVES,
    GROUPS,
    MEASURE_NAMES,
    REPRESENTATIVES,
    ScoredRuleTable,
)

DEFAULT_CUT = 0.9
TOP_K = 20


@dataclass(frozen=True)
class Dendrogram:
    """Binary merge tree; leaves carry names, internal nodes similarities."""

    name: str | None = None
    left: "Dendrogram | None" = None
    right: "Dendrogram | None" = None
    similarity: float | None = None

    @property
    def is_leaf(self):
        return self.name is not None

    def leaves(self) -> list[str]:
        if self.is_leaf:
            return [self.name]
        return self.left.leaves() + self.right.leaves()

    def min_internal_similarity(self) -> float:
        if self.is_leaf:
            return float("inf")
        return min(
            self.similarity,
            self.left.min_internal_similarity(),
            self.right.min_internal_similarity(),
        )

    def to_payload(self):
        if self.is_leaf:
            return {"name": self.name}
        return {
            "similarity": float(self.similarity),
            "left": self.left.to_payload(),
            "right": self.right.to_payload(),
        }

    def save_json(self, path):
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_payload(), fh, indent=2)
            fh.write("\n")

    def to_dot(self) -> str:
        lines = ["digraph dendrogram {", "  node [shape=box];"]
        counter = [0]

        def emit(node):
            nid = f"n{counter[0]}"
            counter[0] += 1
            if node.is_leaf:
                label = node.name.replace('"', r"\"")
                lines.append(f'  {nid} [label="{label}"];')
            else:
                lines.append(f'  {nid} [label="{node.similarity:.3f}" shape=ellipse];')
                for child in (node.left, node.right):
                    lines.append(f"  {nid} -> {emit(child)};")
            return nid

        emit(self)
        lines.append("}")
        return "\n".join(lines) + "\n"

    def save_dot(self, path):
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(self.to_dot())


@dataclass(frozen=True)
class MeasureGroup:
    members: tuple[str, ...]
    label: str
    mean_recall: float | None = None
    mean_confidence: float | None = None
    representative: str | None = None


def average_linkage(matrix) -> Dendrogram:
    """Similarity-space agglomerative clustering with average linkage.

    Ties between candidate merges break on the lexicographically smallest
    pair of cluster leader names, so the tree is deterministic.
    """
    if isinstance(matrix, SimilarityMatrix):
        names, values = matrix.measures, matrix.values
    else:
        values = np.asarray(matrix, dtype=np.float64)
        names = list(MEASURE_NAMES[: values.shape[0]])
    values = np.asarray(values, dtype=np.float64)
    if values.ndim != 2 or values.shape[0] != values.shape[1]:
        raise ValueError(f"similarity matrix must be square, got {values.shape}")
    if not np.allclose(values, values.T, rtol=0.0, atol=1e-12):
        raise ValueError("similarity matrix must be symmetric")
    n = values.shape[0]
    if n == 0:
        raise ValueError("empty similarity matrix")
    if len(names) != n:
        raise ValueError("name count does not match matrix size")

    nodes = [Dendrogram(name=nm) for nm in names]
    sizes = [1] * n
    leaders = list(names)
    sim = values.astype(np.float64).copy()
    active = list(range(n))

    while len(active) > 1:
        best = None
        for ai in range(len(active)):
            for aj in range(ai + 1, len(active)):
                i, j = active[ai], active[aj]
                key = (-sim[i, j], *sorted((leaders[i], leaders[j])))
                if best is None or key < best[0]:
                    best = (key, i, j)
        _, i, j = best
        merged_sim = float(sim[i, j])
        node = Dendrogram(left=nodes[i], right=nodes[j], similarity=merged_sim)
        # size-weighted update == mean pairwise similarity between clusters
        for k in active:
            if k in (i, j):
                continue
            sim[i, k] = sim[k, i] = (sizes[i] * sim[i, k] + sizes[j] * sim[j, k]) / (
                sizes[i] + sizes[j]
            )
        nodes[i] = node
        sizes[i] += sizes[j]
        leaders[i] = min(leaders[i], leaders[j])
        active.remove(j)
    return nodes[active[0]]


def cut_at_threshold(dendrogram: Dendrogram, theta: float = DEFAULT_CUT) -> list[MeasureGroup]:
    """Maximal subtrees whose internal merges are all >= theta, as groups."""
    groups = []

    def walk(node):
        if node.is_leaf or node.min_internal_similarity() >= theta:
            groups.append(tuple(node.leaves()))
        else:
            walk(node.left)
            walk(node.right)

    walk(dendrogram)
    return [
        MeasureGroup(members=members, label=f"group_{idx + 1:02d}")
        for idx, members in enumerate(groups)
    ]


def _per_measure_annotation(table: ScoredRuleTable, k: int = TOP_K):
    """Mean recall/confidence of each measure's top-k rules, target-averaged."""
    recall_cols = {}
    confidence_cols = {}
    per_target_rows = [table.rows_for_target(t) for t in sorted(table.targets)]
    for j, name in enumerate(table.measures):
        rec_acc = []
        conf_acc = []
        for rows in per_target_rows:
            ranked = rank_scores(table.scores[rows, j])
            top = rows[ranked.order[: min(k, rows.size)]]
            rec_acc.append(float(np.mean(table.recall[top])))
            conf_acc.append(float(np.mean(table.confidence[top])))
        recall_cols[name] = float(np.mean(rec_acc))
        confidence_cols[name] = float(np.mean(conf_acc))
    return recall_cols, confidence_cols


def annotate_groups(groups, table: ScoredRuleTable, k: int = TOP_K) -> list[MeasureGroup]:
    recall_by_measure, confidence_by_measure = _per_measure_annotation(table, k)
    out = []
    for group in groups:
        rec = float(np.mean([recall_by_measure[m] for m in group.members]))
        conf = float(np.mean([confidence_by_measure[m] for m in group.members]))
        out.append(replace(group, mean_recall=rec, mean_confidence=conf))
    return out


def select_representatives(groups, matrix) -> list[MeasureGroup]:
    """Per group, the member with the highest mean similarity to the others."""
    if isinstance(matrix, SimilarityMatrix):
        names, values = matrix.measures, matrix.values
    else:
        names, values = list(MEASURE_NAMES), np.asarray(matrix)
    index = {name: i for i, name in enumerate(names)}
    out = []
    for group in groups:
        if len(group.members) == 1:
            out.append(replace(group, representative=group.members[0]))
            continue
        best = None
        for member in sorted(group.members):
            others = [index[m] for m in group.members if m != member]
            mean_sim = float(np.mean([values[index[member], o] for o in others]))
            if best is None or mean_sim > best[0]:
                best = (mean_sim, member)
        out.append(replace(group, representative=best[1]))
    return out


def groups_payload(groups) -> list[dict]:
    return [
        {
            "label": g.label,
            "members": list(g.members),
            "mean_recall": g.mean_recall,
            "mean_confidence": g.mean_confidence,
            "representative": g.representative,
        }
        for g in groups
    ]


def reference_groups_payload() -> list[dict]:
    """Static reference grouping and representatives shipped as metadata."""
    return [
        {
            "label": group,
            "members": list(members),
            "representative": REPRESENTATIVES[group],
            "blinded": REPRESENTATIVES[group] in BLINDED_REPRESENTATIVES,
        }
        for group, members in GROUPS.items()
    ]
