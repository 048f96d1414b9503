"""Acceptance suite: one test per criterion, one PASS/FAIL line each.

Run with `pytest tests/test_acceptance.py -s` to see the per-criterion lines.
"""

import itertools
import json
import subprocess
import sys
import time
from contextlib import contextmanager

import numpy as np
import pytest

from rulebench.clusterlab import (
    annotate_groups,
    average_linkage,
    cut_at_threshold,
)
from rulebench.miner import mine
from rulebench.rankcorr import (
    correlation_matrix,
    kendall_tau,
    ndcc,
    overlap_at_k,
    rank_scores,
    spearman,
)
from rulebench.rules import (
    ALWAYS_EQUIVALENT,
    EQUIVALENCE_CLASSES,
    SINGLE_TARGET_EQUIVALENT,
    Contingency,
    evaluate_measure,
)

from .conftest import EXAMPLE_CLOSED, make_example_tset
from .oracles import (
    brute_force_closed,
    dendrogram_merges,
    kendall_pair_counting,
    kendall_pair_counting_vec,
    naive_average_linkage_merges,
    random_corpus,
    random_single_target_tables,
)


@contextmanager
def criterion(num, title):
    try:
        yield
    except BaseException:
        print(f"ACCEPTANCE {num} [{title}]: FAIL")
        raise
    print(f"ACCEPTANCE {num} [{title}]: PASS")


def ranked_from_order(order):
    n = len(order)
    scores = np.empty(n)
    for rank, rid in enumerate(order):
        scores[rid] = n - rank
    return rank_scores(scores)


def test_criterion_1_worked_example_correlations():
    with criterion(1, "worked-example correlations"):
        t0 = time.perf_counter()
        l1 = ranked_from_order([0, 1, 2, 3])
        l2 = ranked_from_order([1, 0, 2, 3])
        l3 = ranked_from_order([0, 1, 3, 2])
        l4 = ranked_from_order([1, 2, 0, 3])
        assert spearman(l1, l2) == pytest.approx(0.80, abs=1e-9)
        assert spearman(l1, l3) == pytest.approx(0.80, abs=1e-9)
        assert spearman(l1, l4) == pytest.approx(0.40, abs=1e-9)
        assert kendall_tau(l1, l2) == pytest.approx(2 / 3, abs=1e-9)
        assert kendall_tau(l1, l3) == pytest.approx(2 / 3, abs=1e-9)
        assert kendall_tau(l1, l4) == pytest.approx(1 / 3, abs=1e-9)
        assert overlap_at_k(l1, l2, 2) == 1.0
        assert overlap_at_k(l1, l3, 2) == 1.0
        assert overlap_at_k(l1, l4, 2) == 0.5
        assert ndcc(l1, l2) == pytest.approx(0.20, abs=0.005)
        assert ndcc(l1, l3) == pytest.approx(0.97, abs=0.005)
        assert ndcc(l1, l4) == pytest.approx(-0.18, abs=0.005)
        assert time.perf_counter() - t0 < 1.0


def test_criterion_2_miner_oracle_equivalence():
    with criterion(2, "miner == brute-force closed enumeration"):
        t0 = time.perf_counter()
        example = make_example_tset()
        got = {
            (ci.target, ci.items, ci.support)
            for ci in mine(example, [3, 4], epsilon=2).itemsets
        }
        assert got == EXAMPLE_CLOSED
        rng = np.random.default_rng(1884)
        for case in range(200):
            transactions, targets, epsilon = random_corpus(rng)
            mined = {
                (ci.target, ci.items, ci.support)
                for ci in mine(transactions, targets, epsilon).itemsets
            }
            expected = brute_force_closed(transactions, targets, epsilon)
            assert mined == expected, f"corpus #{case}"
        assert time.perf_counter() - t0 < 30.0


def test_criterion_3_measure_equivalence_classes():
    with criterion(3, "equivalence classes on 1000 single-target tables"):
        rng = np.random.default_rng(0)
        violations = 0
        for supports in random_single_target_tables(rng, 1000):
            cts = [Contingency.from_supports(*s) for s in supports]
            for mark in ALWAYS_EQUIVALENT + SINGLE_TARGET_EQUIVALENT:
                orders = []
                for name in EQUIVALENCE_CLASSES[mark]:
                    scores = np.array([evaluate_measure(name, c) for c in cts])
                    orders.append(rank_scores(scores).order.tolist())
                if not all(o == orders[0] for o in orders):
                    violations += 1
        assert violations == 0


def test_criterion_4_ndcc_properties():
    with criterion(4, "ndcc identity/reversal/top-swap/log-base"):
        rng = np.random.default_rng(7)
        sizes = [2, 3, 4, 5, 10, 100, 1000, 10_000]
        sizes += [int(n) for n in rng.integers(2, 10_001, size=20)]
        for n in sizes:
            order = rng.permutation(n).tolist()
            lst = ranked_from_order(order)
            rev = ranked_from_order(order[::-1])
            assert abs(ndcc(lst, lst) - 1.0) <= 1e-9
            assert abs(ndcc(rev, lst) + 1.0) <= 1e-9
        for n in range(4, 1001):
            base = ranked_from_order(list(range(n)))
            top = list(range(n))
            top[0], top[1] = top[1], top[0]
            bottom = list(range(n))
            bottom[-1], bottom[-2] = bottom[-2], bottom[-1]
            assert ndcc(ranked_from_order(top), base) < ndcc(
                ranked_from_order(bottom), base
            ), n
        for _ in range(25):
            n = int(rng.integers(2, 2000))
            a = ranked_from_order(rng.permutation(n).tolist())
            b = ranked_from_order(rng.permutation(n).tolist())
            assert abs(ndcc(a, b) - ndcc(a, b, log_base=2)) <= 1e-9


def test_criterion_5_kendall_fast_path_vs_pair_counting():
    with criterion(5, "kendall merge-count == pair counting"):
        for n in range(2, 7):
            identity = ranked_from_order(list(range(n)))
            scrambled = ranked_from_order(
                list(range(1, n)) + [0]
            )
            for perm in itertools.permutations(range(n)):
                other = ranked_from_order(list(perm))
                assert kendall_tau(identity, other) == kendall_pair_counting(
                    identity.ranks, other.ranks
                )
                assert kendall_tau(scrambled, other) == kendall_pair_counting(
                    scrambled.ranks, other.ranks
                )
        rng = np.random.default_rng(500)
        for _ in range(100):
            a = ranked_from_order(rng.permutation(500).tolist())
            b = ranked_from_order(rng.permutation(500).tolist())
            assert kendall_tau(a, b) == kendall_pair_counting_vec(a.ranks, b.ranks)


def test_criterion_6_clustering_sanity(example_table):
    with criterion(6, "clustering oracle / cut / annotation"):
        rng = np.random.default_rng(34)
        for _ in range(100):
            n = int(rng.integers(2, 11))
            names = [f"m{i:02d}" for i in range(n)]
            values = rng.uniform(-1, 1, size=(n, n))
            values = (values + values.T) / 2
            np.fill_diagonal(values, 1.0)
            from rulebench.rankcorr import SimilarityMatrix

            dendro = average_linkage(SimilarityMatrix("ndcc", "pooled", names, values))
            got = dendrogram_merges(dendro)
            expected = naive_average_linkage_merges(names, values)
            assert set(got) == set(expected)
            for key, sim in expected.items():
                assert abs(got[key] - sim) <= 1e-9
            for theta in (-1.0, 0.0, 0.35, 0.9, 1.01):
                groups = cut_at_threshold(dendro, theta)
                members = sorted(m for g in groups for m in g.members)
                assert members == sorted(names)

        matrix = correlation_matrix(example_table, "ndcc")
        groups = annotate_groups(cut_at_threshold(average_linkage(matrix), 0.9), example_table)
        conf_group = next(g for g in groups if "Confidence" in g.members)
        rec_group = next(g for g in groups if "Recall" in g.members)
        assert conf_group.mean_confidence >= max(g.mean_confidence for g in groups) - 1e-12
        assert rec_group.mean_recall >= max(g.mean_recall for g in groups) - 1e-12


def _cli(*argv):
    proc = subprocess.run(
        [sys.executable, "-m", "rulebench.cli", *argv],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0, proc.stderr
    return proc


def test_criterion_7_end_to_end_desk_scale(tmp_path):
    with criterion(7, "end-to-end desk-scale run + worker determinism"):
        raw = tmp_path / "raw"
        prep = tmp_path / "prep"
        t0 = time.perf_counter()
        _cli(
            "synth", "--seed", "42", "--customers", "5000", "--products", "2000",
            "--receipts", "100000", "--out", str(raw),
        )
        _cli(
            "prepare", "--sales", str(raw / "sales.csv"),
            "--scenario", "PRODUCT_RECEIPT", "--out", str(prep),
        )
        _cli(
            "mine-score", "--data", str(prep), "--top-targets", "20",
            "--epsilon", "100", "--workers", "2", "--out", str(tmp_path / "mined_w2"),
        )
        _cli(
            "compare", "--rules", str(tmp_path / "mined_w2" / "rules.csv"),
            "--workers", "2", "--out", str(tmp_path / "cmp_w2"),
        )
        elapsed = time.perf_counter() - t0
        assert elapsed < 120.0, f"pipeline took {elapsed:.1f}s"

        mined_files = ["rules.csv", "rules.jsonl", "itemsets.tsv"]
        cmp_files = ["measure_annotation.csv", "reference_groups.json"]
        for method in ("spearman", "kendall", "overlap", "ndcc"):
            cmp_files += [
                f"matrix_{method}.json",
                f"matrix_{method}.csv",
                f"dendrogram_{method}.json",
                f"dendrogram_{method}.dot",
                f"groups_{method}.json",
            ]
        # manifest.json records the worker count itself, so it is excluded:
        # the analytic outputs are what must be byte-identical
        for workers in ("1", "8"):
            mined = tmp_path / f"mined_w{workers}"
            cmp_out = tmp_path / f"cmp_w{workers}"
            _cli(
                "mine-score", "--data", str(prep), "--top-targets", "20",
                "--epsilon", "100", "--workers", workers, "--out", str(mined),
            )
            _cli(
                "compare", "--rules", str(mined / "rules.csv"),
                "--workers", workers, "--out", str(cmp_out),
            )
            for name in mined_files:
                assert (mined / name).read_bytes() == (
                    tmp_path / "mined_w2" / name
                ).read_bytes(), f"{name} differs between workers=2 and workers={workers}"
            for name in cmp_files:
                assert (cmp_out / name).read_bytes() == (
                    tmp_path / "cmp_w2" / name
                ).read_bytes(), f"{name} differs between workers=2 and workers={workers}"
