"""Targeted closed frequent itemset mining.

LCM-style depth-first enumeration, restricted to itemsets that contain one of
the analyst's target items. The input is scanned once to build, per target
``b``, the conditional dataset of transactions containing ``b`` (with the
other targets removed -- and in the DEMO scenario every category except the
target, so itemsets carry a single category). Each conditional dataset is
then enumerated independently, which is what makes the per-target tasks
embarrassingly parallel.

Enumeration invariants:

* closure computation keeps only closed itemsets (an itemset equal to the
  intersection of its supporting transactions),
* the first-parent check ``max(Q \\ P) == e`` emits each closed itemset once,
* extension items always decrease, with the target ranked above every other
  item so the whole target-rooted subtree is reachable.

A second pass counts the support of every rule antecedent over the *full*
transaction set, using a prefix tree over sorted item arrays; partial counts
from transaction chunks merge by summation.

Conditional datasets are flat CSR-style arrays (items + row offsets), so per
node work is a handful of vectorized passes instead of per-transaction Python
loops.
"""

from __future__ import annotations

from bisect import bisect_left
from dataclasses import dataclass
from multiprocessing import get_context

import numpy as np

from .corpus import DEMO, DEFAULT_MIN_SUPPORT, TransactionSet


@dataclass(frozen=True)
class TargetSet:
    """Targets plus the minimum support they are mined at."""

    targets: frozenset[int]
    epsilon: int

    def __post_init__(self):
        if not self.targets:
            raise ValueError("target set must not be empty")
        if self.epsilon < 1:
            raise ValueError("minimum support must be >= 1")

    @classmethod
    def for_scenario(cls, targets, scenario, epsilon=None):
        eps = DEFAULT_MIN_SUPPORT[scenario] if epsilon is None else epsilon
        return cls(frozenset(targets), eps)


@dataclass(frozen=True)
class ClosedItemset:
    items: tuple[int, ...]
    support: int
    target: int

    def antecedent(self) -> tuple[int, ...]:
        return tuple(i for i in self.items if i != self.target)


class AntecedentTrie:
    """Prefix tree over sorted item-id sequences with counters at terminals."""

    def __init__(self):
        self._children: list[dict[int, int]] = [{}]
        self._terminal: list[bool] = [False]
        self._node_of: dict[tuple[int, ...], int] = {}

    def add(self, items: tuple[int, ...]):
        if not items:
            raise ValueError("empty antecedent")
        node = 0
        for item in items:
            nxt = self._children[node].get(item)
            if nxt is None:
                nxt = len(self._children)
                self._children[node][item] = nxt
                self._children.append({})
                self._terminal.append(False)
            node = nxt
        self._terminal[node] = True
        self._node_of[items] = node

    def __len__(self):
        return len(self._node_of)

    def __contains__(self, items):
        return tuple(items) in self._node_of

    def antecedents(self):
        return iter(self._node_of)

    def node_count(self):
        return len(self._children)

    def count_into(self, transactions, counts):
        """Add, for each terminal reachable inside a transaction, one count."""
        children = self._children
        terminal = self._terminal

        def walk(node, start, t):
            d = children[node]
            if not d:
                return
            if len(d) < len(t) - start:
                for item, child in d.items():
                    idx = bisect_left(t, item, start)
                    if idx < len(t) and t[idx] == item:
                        if terminal[child]:
                            counts[child] += 1
                        walk(child, idx + 1, t)
            else:
                for idx in range(start, len(t)):
                    child = d.get(t[idx])
                    if child is not None:
                        if terminal[child]:
                            counts[child] += 1
                        walk(child, idx + 1, t)

        for t in transactions:
            walk(0, 0, t)

    def supports_from(self, counts) -> dict[tuple[int, ...], int]:
        return {ant: int(counts[node]) for ant, node in self._node_of.items()}


@dataclass
class MineResult:
    itemsets: list[ClosedItemset]
    trie: AntecedentTrie
    target_supports: dict[int, int]

    def __iter__(self):  # allows `itemsets, trie = mine(...)`
        return iter((self.itemsets, self.trie))


def partition_by_target(tset, targets) -> dict[int, list[tuple[int, ...]]]:
    """Raw per-target partitions: every transaction containing the target.

    A transaction containing k targets lands in k partitions. Absent targets
    map to empty partitions.
    """
    transactions = tset.transactions if isinstance(tset, TransactionSet) else tset
    parts = {b: [] for b in targets}
    for t in transactions:
        ts = set(t)
        for b in parts:
            if b in ts:
                parts[b].append(t)
    return parts


def closure(itemset, supporting_transactions) -> tuple[int, ...]:
    """Intersection of all transactions that support ``itemset``.

    The caller guarantees ``supporting_transactions`` is exactly the set of
    transactions containing ``itemset``; the closure then has the same
    support and is the unique smallest closed superset.
    """
    it = iter(supporting_transactions)
    try:
        common = set(next(it))
    except StopIteration:
        raise ValueError("closure undefined on an empty transaction set") from None
    for t in it:
        common.intersection_update(t)
    return tuple(sorted(common))


# ---------------------------------------------------------------------------
# CSR representation + per-target enumeration

def _to_csr(transactions):
    n_rows = len(transactions)
    lens = np.fromiter((len(t) for t in transactions), np.int64, n_rows)
    off = np.zeros(n_rows + 1, np.int64)
    np.cumsum(lens, out=off[1:])
    flat = np.fromiter(
        (i for t in transactions for i in t), np.int32, int(off[-1])
    )
    return flat, off


def _conditional_csr(flat, off, n_items, b, strip):
    """Rows containing item ``b``, with items in ``strip`` dropped."""
    n_rows = off.size - 1
    lens = np.diff(off)
    row_of = np.repeat(np.arange(n_rows), lens)
    keep_row = np.zeros(n_rows, dtype=bool)
    keep_row[row_of[flat == b]] = True
    entry_sel = keep_row[row_of]
    c_flat = flat[entry_sel]
    c_lens = lens[keep_row]
    if strip:
        strip_mask = np.zeros(n_items, dtype=bool)
        strip_mask[list(strip)] = True
        keep_entry = ~strip_mask[c_flat]
        c_rows = np.repeat(np.arange(c_lens.size), c_lens)
        c_flat = c_flat[keep_entry]
        c_lens = np.bincount(c_rows[keep_entry], minlength=c_lens.size)
    c_off = np.zeros(c_lens.size + 1, np.int64)
    np.cumsum(c_lens, out=c_off[1:])
    return c_flat, c_off


def _enumerate_closed(flat, off, e, prev, eps, n_items, out, at_root):
    """One LCM node: dataset restricted to rows containing prev | {e}."""
    n_rows = off.size - 1
    if n_rows < eps:
        return
    counts = np.bincount(flat, minlength=n_items)
    closed = np.flatnonzero(counts == n_rows)
    q = set(closed.tolist())
    if not at_root:
        # first-parent check; the target is ranked above everything and only
        # ever appears as the root extension, so a plain max suffices here
        if max(q - prev) != e:
            return
    if len(q) >= 2:
        out.append((tuple(sorted(q)), n_rows))

    limit = n_items if at_root else e
    cand = [int(i) for i in np.flatnonzero(counts[:limit] >= eps) if i not in q]
    if not cand:
        return

    lens = np.diff(off)
    row_of = np.repeat(np.arange(n_rows), lens)
    # items infrequent here can be neither frequent nor closed deeper (child
    # datasets keep >= eps of these rows), so drop them from children
    keep_entry = counts[flat] >= eps
    if not keep_entry.all():
        flat = flat[keep_entry]
        row_of = row_of[keep_entry]
        lens = np.bincount(row_of, minlength=n_rows)
    order = np.argsort(flat, kind="stable")
    sorted_items = flat[order]
    sorted_rows = row_of[order]
    for i in cand:
        lo = np.searchsorted(sorted_items, i, "left")
        hi = np.searchsorted(sorted_items, i, "right")
        rows_i = sorted_rows[lo:hi]
        keep = np.zeros(n_rows, dtype=bool)
        keep[rows_i] = True
        entry_sel = keep[row_of]
        c_flat = flat[entry_sel]
        c_lens = lens[rows_i]
        c_off = np.zeros(c_lens.size + 1, np.int64)
        np.cumsum(c_lens, out=c_off[1:])
        _enumerate_closed(c_flat, c_off, i, q, eps, n_items, out, False)


def _strip_items_for(b, targets, scenario, category_items):
    strip = set(targets)
    if scenario == DEMO and category_items:
        strip |= set(category_items)
    strip.discard(b)
    return strip


def _mine_one_target(state, b):
    strip = _strip_items_for(b, state["targets"], state["scenario"], state["category_items"])
    c_flat, c_off = _conditional_csr(state["flat"], state["off"], state["n_items"], b, strip)
    support_b = c_off.size - 1
    out = []
    if support_b >= state["epsilon"]:
        _enumerate_closed(
            c_flat, c_off, b, frozenset(), state["epsilon"], state["n_items"], out, True
        )
    out.sort()
    return b, out, support_b


_WORKER_STATE = {}


def _init_mine_worker(state):
    _WORKER_STATE["mine"] = state


def _mine_worker(b):
    return _mine_one_target(_WORKER_STATE["mine"], b)


def mine(tset, targets, epsilon, workers: int = 1) -> MineResult:
    """All closed itemsets of size >= 2 with support >= epsilon containing a
    target, each emitted once per target, plus the antecedent prefix tree.
    """
    if epsilon < 1:
        raise ValueError("minimum support must be >= 1")
    if isinstance(tset, TransactionSet):
        transactions = tset.transactions
        scenario = tset.scenario
        category_items = tset.category_items
        n_items = tset.item_count()
    else:
        transactions = list(tset)
        scenario = None
        category_items = frozenset()
        n_items = max((t[-1] for t in transactions if t), default=-1) + 1
    target_list = sorted(set(targets))
    if not target_list:
        raise ValueError("target set must not be empty")
    n_items = max(n_items, target_list[-1] + 1)

    flat, off = _to_csr(transactions)
    state = {
        "flat": flat,
        "off": off,
        "n_items": n_items,
        "targets": frozenset(target_list),
        "scenario": scenario,
        "category_items": category_items,
        "epsilon": epsilon,
    }

    if workers <= 1 or len(target_list) == 1:
        per_target = [_mine_one_target(state, b) for b in target_list]
    else:
        ctx = get_context("fork")
        with ctx.Pool(
            min(workers, len(target_list)),
            initializer=_init_mine_worker,
            initargs=(state,),
        ) as pool:
            per_target = pool.map(_mine_worker, target_list)

    itemsets: list[ClosedItemset] = []
    trie = AntecedentTrie()
    target_supports: dict[int, int] = {}
    for b, found, support_b in sorted(per_target):
        target_supports[b] = support_b
        for items, support in found:
            ci = ClosedItemset(items, support, b)
            itemsets.append(ci)
            ant = ci.antecedent()
            if ant not in trie:
                trie.add(ant)
    return MineResult(itemsets, trie, target_supports)


def _init_count_worker(trie):
    _WORKER_STATE["trie"] = trie


def _count_worker(chunk):
    trie = _WORKER_STATE["trie"]
    counts = np.zeros(trie.node_count(), dtype=np.int64)
    trie.count_into(chunk, counts)
    return counts


def count_antecedent_supports(tset, trie, workers: int = 1) -> dict[tuple[int, ...], int]:
    """Support over the full transaction set for every antecedent in the trie."""
    transactions = tset.transactions if isinstance(tset, TransactionSet) else tset
    if len(trie) == 0:
        return {}
    if workers <= 1 or len(transactions) < 2 * workers:
        counts = np.zeros(trie.node_count(), dtype=np.int64)
        trie.count_into(transactions, counts)
    else:
        bounds = np.linspace(0, len(transactions), workers + 1, dtype=int)
        chunks = [transactions[bounds[i] : bounds[i + 1]] for i in range(workers)]
        ctx = get_context("fork")
        with ctx.Pool(workers, initializer=_init_count_worker, initargs=(trie,)) as pool:
            partials = pool.map(_count_worker, chunks)
        counts = np.sum(partials, axis=0)
    return trie.supports_from(counts)


def write_itemsets(itemsets, path):
    """Dump: one line per itemset, `target<TAB>support<TAB>items`."""
    with open(path, "w", encoding="ascii") as fh:
        for ci in itemsets:
            fh.write(f"{ci.target}\t{ci.support}\t{' '.join(map(str, ci.items))}\n")
