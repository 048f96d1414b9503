"""Transaction corpus construction for retail basket mining.

Raw input is a set of sales records ``<receipt, customer, product>`` plus two
side tables: customer profiles (age band, gender, department) and a product
taxonomy. Three scenario builders turn these into integer-encoded transaction
sets:

* ``DEMO``            -- one transaction per record, pairing the customer's
                         demographic items with the product's ancestor
                         categories
* ``PRODUCT_RECEIPT`` -- one transaction per receipt (products bought in a
                         single store visit)
* ``PRODUCT_CLIENT``  -- one transaction per customer (all products ever
                         bought by that customer)

A deterministic synthetic generator provides desk-scale corpora with
Zipf-distributed product popularity for tests and demos.

File formats (all UTF-8 text):

* sales CSV:        ``receipt_id,customer_id,product_id``
* customers CSV:    ``customer_id,age_band,gender,department``
* taxonomy CSV:     ``child_id,parent_id`` edges
* transactions:     one line per transaction, space-separated decimal ids
* dictionary:       ``id<TAB>label``
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass
from difflib import get_close_matches

import numpy as np

WILDCARD = "*"
AGE_BANDS = ("<35", "35-49", "50-65", ">65")
GENDERS = ("F", "M", WILDCARD)

DEMO = "DEMO"
PRODUCT_RECEIPT = "PRODUCT_RECEIPT"
PRODUCT_CLIENT = "PRODUCT_CLIENT"
SCENARIOS = (DEMO, PRODUCT_RECEIPT, PRODUCT_CLIENT)

# Scenario-specific minimum support defaults, overridable everywhere.
DEFAULT_MIN_SUPPORT = {DEMO: 1000, PRODUCT_RECEIPT: 1000, PRODUCT_CLIENT: 10000}

TRANSACTIONS_FILE = "transactions.txt"
DICTIONARY_FILE = "dictionary.tsv"
META_FILE = "corpus_meta.json"

TAXONOMY_ROOT = "__root__"


class CorpusError(Exception):
    """Raised when an input corpus cannot be used as-is."""


class ParseError(CorpusError):
    """Malformed input line; carries the offending file and line number."""

    def __init__(self, path, line_no, message):
        super().__init__(f"{path}:{line_no}: {message}")
        self.path = str(path)
        self.line_no = line_no


class CurationError(CorpusError):
    """Records cannot be curated into transactions (missing profile, ...)."""


@dataclass(frozen=True)
class SalesRecord:
    receipt_id: str
    customer_id: str
    product_id: str


@dataclass(frozen=True)
class CustomerProfile:
    customer_id: str
    age_band: str
    gender: str
    department: str

    def __post_init__(self):
        if self.age_band not in AGE_BANDS:
            raise CurationError(
                f"customer {self.customer_id}: age band {self.age_band!r} "
                f"not in {AGE_BANDS}"
            )
        if self.gender not in GENDERS:
            raise CurationError(
                f"customer {self.customer_id}: gender {self.gender!r} not in {GENDERS}"
            )
        if not self.department:
            raise CurationError(f"customer {self.customer_id}: empty department")

    def demo_items(self):
        """Demographic item labels; unknown attributes stay explicit wildcards."""
        return (
            f"age:{self.age_band}",
            f"gender:{self.gender}",
            f"dept:{self.department}",
        )


class Taxonomy:
    """Product taxonomy: a forest of categories rooted at a synthetic root.

    Products are leaves; ``categories_of(p)`` returns the strict ancestors of
    ``p`` excluding the root.
    """

    def __init__(self, parent: dict[str, str], max_depth: int = 4):
        self.parent = dict(parent)
        self.max_depth = max_depth
        self.nodes = set(self.parent)
        self.nodes.update(p for p in self.parent.values() if p != TAXONOMY_ROOT)
        # Any node that never appears as a parent is a leaf (= product).
        parents = set(self.parent.values())
        self.leaves = frozenset(n for n in self.nodes if n not in parents)
        self._depths = {}
        for node in self.nodes:
            self._depth(node)

    def _depth(self, node):
        # Walk to the root once per node, catching cycles and depth overruns.
        if node in self._depths:
            return self._depths[node]
        chain = []
        cur = node
        seen = set()
        while cur != TAXONOMY_ROOT and cur not in self._depths:
            if cur in seen:
                raise CurationError(f"taxonomy cycle through {cur!r}")
            seen.add(cur)
            chain.append(cur)
            cur = self.parent.get(cur, TAXONOMY_ROOT)
        base = 0 if cur == TAXONOMY_ROOT else self._depths[cur]
        for n in reversed(chain):
            base += 1
            self._depths[n] = base
        depth = self._depths.get(node, 0)
        if depth > self.max_depth + 1:  # product sits one level below categories
            raise CurationError(
                f"taxonomy node {node!r} at depth {depth}, max is {self.max_depth + 1}"
            )
        return depth

    def parent_of(self, node):
        return self.parent.get(node, TAXONOMY_ROOT)

    def categories_of(self, product: str) -> tuple[str, ...]:
        """Strict ancestors of ``product``, nearest first, root excluded."""
        if product not in self.leaves:
            raise CurationError(f"product {product!r} is not a taxonomy leaf")
        out = []
        cur = self.parent.get(product, TAXONOMY_ROOT)
        while cur != TAXONOMY_ROOT:
            out.append(cur)
            cur = self.parent.get(cur, TAXONOMY_ROOT)
        return tuple(out)

    def __eq__(self, other):
        return isinstance(other, Taxonomy) and self.parent == other.parent

    @classmethod
    def from_edges(cls, edges, max_depth: int = 4):
        parent = {}
        for child, par in edges:
            if child in parent and parent[child] != par:
                raise CurationError(f"taxonomy node {child!r} has two parents")
            parent[child] = par
        return cls(parent, max_depth=max_depth)


class ItemDictionary:
    """Bijective label <-> dense integer id map, ids assigned first-seen."""

    def __init__(self):
        self._label_to_id: dict[str, int] = {}
        self._labels: list[str] = []

    def intern(self, label: str) -> int:
        if "\t" in label or "\n" in label or not label:
            raise CorpusError(f"illegal item label {label!r}")
        item = self._label_to_id.get(label)
        if item is None:
            item = len(self._labels)
            self._label_to_id[label] = item
            self._labels.append(label)
        return item

    def id_of(self, label: str) -> int:
        return self._label_to_id[label]

    def label_of(self, item: int) -> str:
        return self._labels[item]

    def __contains__(self, label):
        return label in self._label_to_id

    def __len__(self):
        return len(self._labels)

    def __eq__(self, other):
        return isinstance(other, ItemDictionary) and self._labels == other._labels

    def labels(self) -> list[str]:
        return list(self._labels)

    def closest(self, label: str, n: int = 3) -> list[str]:
        return get_close_matches(label, self._labels, n=n, cutoff=0.0)

    def save(self, path):
        with open(path, "w", encoding="utf-8") as fh:
            for item, label in enumerate(self._labels):
                fh.write(f"{item}\t{label}\n")

    @classmethod
    def load(cls, path):
        d = cls()
        with open(path, encoding="utf-8") as fh:
            for line_no, line in enumerate(fh, 1):
                line = line.rstrip("\n")
                if not line:
                    continue
                try:
                    item, label = line.split("\t", 1)
                except ValueError:
                    raise ParseError(path, line_no, "expected 'id<TAB>label'") from None
                if int(item) != len(d._labels):
                    raise ParseError(path, line_no, "ids must be dense and sorted")
                d.intern(label)
        return d


@dataclass
class TransactionSet:
    """Immutable-after-build set of integer-encoded transactions."""

    transactions: list[tuple[int, ...]]
    scenario: str
    dictionary: ItemDictionary
    category_items: frozenset[int] = frozenset()

    def __len__(self):
        return len(self.transactions)

    def item_count(self) -> int:
        return len(self.dictionary)

    def save(self, out_dir):
        os.makedirs(out_dir, exist_ok=True)
        with open(os.path.join(out_dir, TRANSACTIONS_FILE), "w", encoding="ascii") as fh:
            for t in self.transactions:
                fh.write(" ".join(map(str, t)))
                fh.write("\n")
        self.dictionary.save(os.path.join(out_dir, DICTIONARY_FILE))
        meta = {
            "scenario": self.scenario,
            "category_items": sorted(self.category_items),
        }
        with open(os.path.join(out_dir, META_FILE), "w", encoding="utf-8") as fh:
            json.dump(meta, fh, indent=2)
            fh.write("\n")

    @classmethod
    def load(cls, in_dir):
        dictionary = ItemDictionary.load(os.path.join(in_dir, DICTIONARY_FILE))
        path = os.path.join(in_dir, TRANSACTIONS_FILE)
        transactions = []
        with open(path, encoding="ascii") as fh:
            for line_no, line in enumerate(fh, 1):
                line = line.strip()
                if not line:
                    continue
                try:
                    items = tuple(int(tok) for tok in line.split(" "))
                except ValueError:
                    raise ParseError(path, line_no, "non-integer item id") from None
                if any(b <= a for a, b in zip(items, items[1:])):
                    raise ParseError(path, line_no, "items not strictly increasing")
                if items and items[-1] >= len(dictionary):
                    raise ParseError(path, line_no, "item id outside dictionary")
                transactions.append(items)
        meta_path = os.path.join(in_dir, META_FILE)
        scenario, category_items = PRODUCT_RECEIPT, frozenset()
        if os.path.exists(meta_path):
            with open(meta_path, encoding="utf-8") as fh:
                meta = json.load(fh)
            scenario = meta.get("scenario", PRODUCT_RECEIPT)
            category_items = frozenset(meta.get("category_items", ()))
        if not transactions:
            raise CorpusError(f"{path}: empty transaction set")
        return cls(transactions, scenario, dictionary, category_items)


def parse_sales(path) -> list[SalesRecord]:
    """Parse a sales CSV; duplicate (receipt, product) pairs collapse to one."""
    records = []
    seen = set()
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, 1):
            line = line.rstrip("\n")
            if not line:
                continue
            fields = line.split(",")
            if len(fields) != 3:
                raise ParseError(path, line_no, f"expected 3 fields, got {len(fields)}")
            receipt, customer, product = (f.strip() for f in fields)
            if not (receipt and customer and product):
                raise ParseError(path, line_no, "empty identifier")
            key = (receipt, product)
            if key in seen:
                continue
            seen.add(key)
            records.append(SalesRecord(receipt, customer, product))
    if not records:
        raise CorpusError(f"{path}: no sales records")
    return records


def parse_customers(path) -> dict[str, CustomerProfile]:
    profiles = {}
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, 1):
            line = line.rstrip("\n")
            if not line:
                continue
            fields = line.split(",")
            if len(fields) != 4:
                raise ParseError(path, line_no, f"expected 4 fields, got {len(fields)}")
            customer, age, gender, dept = (f.strip() for f in fields)
            if customer in profiles:
                raise ParseError(path, line_no, f"duplicate customer {customer!r}")
            try:
                profiles[customer] = CustomerProfile(customer, age, gender, dept)
            except CurationError as exc:
                raise ParseError(path, line_no, str(exc)) from None
    if not profiles:
        raise CorpusError(f"{path}: no customer profiles")
    return profiles


def parse_taxonomy(path, max_depth: int = 4) -> Taxonomy:
    edges = []
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, 1):
            line = line.rstrip("\n")
            if not line:
                continue
            fields = line.split(",")
            if len(fields) != 2:
                raise ParseError(path, line_no, f"expected 2 fields, got {len(fields)}")
            child, parent = (f.strip() for f in fields)
            if not child or not parent:
                raise ParseError(path, line_no, "empty identifier")
            edges.append((child, parent))
    if not edges:
        raise CorpusError(f"{path}: no taxonomy edges")
    return Taxonomy.from_edges(edges, max_depth=max_depth)


def build_transactions(
    records,
    scenario: str,
    profiles: dict[str, CustomerProfile] | None = None,
    taxonomy: Taxonomy | None = None,
) -> TransactionSet:
    """Group raw records into the scenario's transaction set.

    DEMO emits one transaction per record (demographics + product
    categories); PRODUCT_RECEIPT one per distinct receipt; PRODUCT_CLIENT one
    per distinct customer.
    """
    if scenario not in SCENARIOS:
        raise ValueError(f"unknown scenario {scenario!r}, expected one of {SCENARIOS}")
    if not records:
        raise CorpusError("no records to build transactions from")
    dictionary = ItemDictionary()
    category_items: set[int] = set()
    transactions: list[tuple[int, ...]] = []

    if scenario == DEMO:
        if profiles is None:
            raise CurationError("DEMO scenario requires customer profiles")
        if taxonomy is None:
            raise CurationError("DEMO scenario requires a product taxonomy")
        for rec in records:
            profile = profiles.get(rec.customer_id)
            if profile is None:
                raise CurationError(f"no profile for customer {rec.customer_id!r}")
            items = [dictionary.intern(lbl) for lbl in profile.demo_items()]
            for cat in taxonomy.categories_of(rec.product_id):
                item = dictionary.intern(f"cat:{cat}")
                category_items.add(item)
                items.append(item)
            transactions.append(tuple(sorted(set(items))))
    else:
        key = (lambda r: r.receipt_id) if scenario == PRODUCT_RECEIPT else (
            lambda r: r.customer_id
        )
        groups: dict[str, set[int]] = {}
        for rec in records:
            groups.setdefault(key(rec), set()).add(dictionary.intern(rec.product_id))
        transactions = [tuple(sorted(items)) for items in groups.values()]

    if not transactions:
        raise CorpusError("transaction set is empty after build")
    return TransactionSet(transactions, scenario, dictionary, frozenset(category_items))


@dataclass
class SynthCorpus:
    records: list[SalesRecord]
    profiles: dict[str, CustomerProfile]
    taxonomy: Taxonomy
    seed: int


_DEPARTMENTS = tuple(f"D{i:02d}" for i in range(1, 21))
_TAXONOMY_FANOUT = (4, 4, 4, 4)  # four category levels below the root


def _synth_taxonomy(n_products: int):
    """Balanced 4-level category tree with products spread over the bottom level."""
    parent = {}
    level_sizes = []
    size = 1
    for fanout in _TAXONOMY_FANOUT:
        size *= fanout
        level_sizes.append(size)
    n_bottom = min(level_sizes[-1], n_products)
    used = set(range(n_bottom))
    for level in range(len(_TAXONOMY_FANOUT) - 1, 0, -1):
        fanout = _TAXONOMY_FANOUT[level]
        above = set()
        for idx in used:
            parent[f"cat{level + 1}_{idx}"] = f"cat{level}_{idx // fanout}"
            above.add(idx // fanout)
        used = above
    # level-1 categories hang off the implicit root (no parent entry needed)
    for i in range(n_products):
        parent[f"p{i}"] = f"cat{len(_TAXONOMY_FANOUT)}_{i % n_bottom}"
    return Taxonomy(parent)


def synth_corpus(
    seed: int,
    n_customers: int,
    n_products: int,
    n_receipts: int,
    skew: float = 1.05,
    mean_items: float = 6.0,
) -> SynthCorpus:
    """Deterministic synthetic corpus with Zipf-distributed product popularity."""
    if min(n_customers, n_products, n_receipts) < 1:
        raise ValueError("all corpus counts must be >= 1")
    rng = np.random.default_rng(seed)

    weights = 1.0 / np.arange(1, n_products + 1, dtype=np.float64) ** skew
    weights /= weights.sum()

    profiles = {}
    ages = rng.integers(0, len(AGE_BANDS), n_customers)
    genders = rng.choice(len(GENDERS), n_customers, p=[0.48, 0.48, 0.04])
    depts = rng.integers(0, len(_DEPARTMENTS), n_customers)
    dept_unknown = rng.random(n_customers) < 0.03
    for i in range(n_customers):
        cid = f"u{i}"
        dept = WILDCARD if dept_unknown[i] else _DEPARTMENTS[depts[i]]
        profiles[cid] = CustomerProfile(cid, AGE_BANDS[ages[i]], GENDERS[genders[i]], dept)

    max_items = max(1, min(12, n_products))
    sizes = np.clip(1 + rng.poisson(max(mean_items - 1.0, 0.0), n_receipts), 1, max_items)
    customers = rng.integers(0, n_customers, n_receipts)
    flat = rng.choice(n_products, size=int(sizes.sum()), p=weights)

    records = []
    pos = 0
    for j in range(n_receipts):
        rid = f"r{j}"
        cid = f"u{customers[j]}"
        chunk = flat[pos : pos + sizes[j]]
        pos += sizes[j]
        seen = set()
        for prod in chunk:
            if prod in seen:  # with-replacement draws mirror duplicate <t,p> collapse
                continue
            seen.add(prod)
            records.append(SalesRecord(rid, cid, f"p{prod}"))
    return SynthCorpus(records, profiles, _synth_taxonomy(n_products), seed)


def write_corpus_csv(corpus: SynthCorpus, out_dir):
    """Write sales/customers/taxonomy CSVs in the formats parse_* expect."""
    os.makedirs(out_dir, exist_ok=True)
    with open(os.path.join(out_dir, "sales.csv"), "w", encoding="utf-8") as fh:
        for rec in corpus.records:
            fh.write(f"{rec.receipt_id},{rec.customer_id},{rec.product_id}\n")
    with open(os.path.join(out_dir, "customers.csv"), "w", encoding="utf-8") as fh:
        for profile in corpus.profiles.values():
            fh.write(
                f"{profile.customer_id},{profile.age_band},"
                f"{profile.gender},{profile.department}\n"
            )
    with open(os.path.join(out_dir, "taxonomy.csv"), "w", encoding="utf-8") as fh:
        for child in sorted(corpus.taxonomy.parent):
            fh.write(f"{child},{corpus.taxonomy.parent[child]}\n")
