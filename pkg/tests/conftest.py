import numpy as np
import pytest

from rulebench.corpus import PRODUCT_RECEIPT, ItemDictionary, TransactionSet
from rulebench.miner import count_antecedent_supports, mine
from rulebench.rules import derive_rules, score_table

# the worked mining example: four transactions over items a b c x y,
# mined with epsilon=2 and targets {x, y}
EXAMPLE_LABELS = ("a", "b", "c", "x", "y")
EXAMPLE_TRANSACTIONS = [
    ("a", "b", "c", "x", "y"),
    ("a", "c", "y"),
    ("a", "b", "x", "y"),
    ("b", "c", "x", "y"),
]

# brute-force oracle result: (target, items, support), ids a=0..y=4
EXAMPLE_CLOSED = {
    (3, (0, 1, 3), 2),
    (3, (1, 2, 3), 2),
    (3, (1, 3), 3),
    (4, (0, 1, 4), 2),
    (4, (0, 2, 4), 2),
    (4, (0, 4), 3),
    (4, (1, 2, 4), 2),
    (4, (1, 4), 3),
    (4, (2, 4), 3),
}


def make_example_tset() -> TransactionSet:
    dictionary = ItemDictionary()
    for label in EXAMPLE_LABELS:
        dictionary.intern(label)
    transactions = [
        tuple(sorted(dictionary.id_of(l) for l in t)) for t in EXAMPLE_TRANSACTIONS
    ]
    return TransactionSet(transactions, PRODUCT_RECEIPT, dictionary)


@pytest.fixture
def example_tset():
    return make_example_tset()


@pytest.fixture
def example_mined(example_tset):
    return mine(example_tset, targets=[3, 4], epsilon=2)


@pytest.fixture
def example_table(example_tset, example_mined):
    supports = count_antecedent_supports(example_tset, example_mined.trie)
    rules = derive_rules(
        example_mined.itemsets, supports, example_mined.target_supports, len(example_tset)
    )
    return score_table(rules, example_tset.dictionary, example_tset.scenario)


@pytest.fixture
def rng():
    return np.random.default_rng(20260808)
