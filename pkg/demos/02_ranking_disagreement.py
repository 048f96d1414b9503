"""How differently do the 34 measures rank the same rules?

Builds a scored table, computes the measure-vs-measure similarity matrix
under all four ranking-similarity coefficients, clusters the ndcc matrix and
prints the resulting measure groups with their recall/confidence trade-off.

Run:  python demos/02_ranking_disagreement.py
"""

import numpy as np

from rulebench import (
    annotate_groups,
    average_linkage,
    build_transactions,
    correlation_matrix,
    count_antecedent_supports,
    cut_at_threshold,
    derive_rules,
    mine,
    score_table,
    select_representatives,
    synth_corpus,
)
from rulebench.corpus import PRODUCT_RECEIPT

corpus = synth_corpus(seed=13, n_customers=600, n_products=200, n_receipts=9000)
tset = build_transactions(corpus.records, PRODUCT_RECEIPT)
counts = {}
for t in tset.transactions:
    for item in t:
        counts[item] = counts.get(item, 0) + 1
targets = sorted(counts, key=lambda i: (-counts[i], i))[:8]
result = mine(tset, targets, epsilon=20)
supports = count_antecedent_supports(tset, result.trie)
rules = derive_rules(result.itemsets, supports, result.target_supports, len(tset))
table = score_table(rules, tset.dictionary, tset.scenario)
print(f"{len(table)} rules over {len(table.targets)} targets\n")

# the four coefficients weigh rank positions differently: overlap@k only sees
# the top, spearman/kendall weigh all positions equally, ndcc discounts
for method in ("spearman", "kendall", "overlap", "ndcc"):
    m = correlation_matrix(table, method, k=20)
    off = m.values[~np.eye(34, dtype=bool)]
    print(f"{m.method:>10}: mean pairwise similarity {off.mean():+.3f} "
          f"(min {off.min():+.3f})")

matrix = correlation_matrix(table, "ndcc")
groups = cut_at_threshold(average_linkage(matrix), 0.9)
groups = annotate_groups(groups, table)
groups = select_representatives(groups, matrix)
print(f"\nndcc clustering at 0.9 yields {len(groups)} groups:")
for g in sorted(groups, key=lambda g: -g.mean_confidence):
    members = ", ".join(g.members[:4]) + (" ..." if len(g.members) > 4 else "")
    print(f"  conf={g.mean_confidence:.2f} recall={g.mean_recall:.2f} "
          f"rep={g.representative}: {members}")
