"""End-to-end walk through the mining pipeline on a synthetic corpus.

Generates a small basket dataset, builds the receipt-level transaction set,
mines targeted closed itemsets, scores the resulting rules under the full
measure catalog and prints the top rules under a few measures.

Run:  python demos/01_end_to_end_pipeline.py
"""

from rulebench import (
    build_transactions,
    count_antecedent_supports,
    derive_rules,
    mine,
    rank_by_measure,
    score_table,
    synth_corpus,
)
from rulebench.corpus import PRODUCT_RECEIPT

corpus = synth_corpus(seed=9, n_customers=400, n_products=150, n_receipts=6000)
print(f"synthetic corpus: {len(corpus.records)} records, "
      f"{len(corpus.profiles)} customers")

tset = build_transactions(corpus.records, PRODUCT_RECEIPT)
print(f"transactions: {len(tset)} receipts over {tset.item_count()} products")

# pick the five best-selling products as rule targets
counts = {}
for t in tset.transactions:
    for item in t:
        counts[item] = counts.get(item, 0) + 1
targets = sorted(counts, key=lambda i: (-counts[i], i))[:5]
print("targets:", [tset.dictionary.label_of(b) for b in targets])

result = mine(tset, targets, epsilon=25)
print(f"closed itemsets with a target and support >= 25: {len(result.itemsets)}")

supports = count_antecedent_supports(tset, result.trie)
rules = derive_rules(result.itemsets, supports, result.target_supports, len(tset))
table = score_table(rules, tset.dictionary, tset.scenario)
print(f"scored rule table: {len(table)} rules x {len(table.measures)} measures")

for measure in ("Confidence", "Piatetsky-Shapiro", "Recall"):
    ranked = rank_by_measure(table, measure)
    print(f"\ntop 5 rules by {measure}:")
    for row in ranked.order[:5]:
        ant = " + ".join(table.antecedents[row])
        print(f"  {ant} -> {table.consequents[row]}"
              f"  support={int(table.support_ab[row])}"
              f"  conf={table.confidence[row]:.2f}"
              f"  recall={table.recall[row]:.2f}")
