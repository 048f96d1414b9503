import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rulebench.rankcorr import (
    AGGREGATIONS,
    PER_TARGET,
    POOLED,
    SimilarityMatrix,
    correlation_matrix,
    dcc,
    kendall_tau,
    ndcc,
    overlap_at_k,
    rank_by_measure,
    rank_scores,
    spearman,
)
from rulebench.rules import MEASURE_NAMES

from .oracles import kendall_pair_counting, spearman_direct


def ranked_from_order(order):
    """RankedList that places rule ids in the given order."""
    n = len(order)
    scores = np.empty(n)
    for rank, rid in enumerate(order):
        scores[rid] = n - rank
    return rank_scores(scores)


L1 = ranked_from_order([0, 1, 2, 3])
L2 = ranked_from_order([1, 0, 2, 3])
L3 = ranked_from_order([0, 1, 3, 2])
L4 = ranked_from_order([1, 2, 0, 3])


class TestRanking:
    def test_sort_descending(self):
        r = rank_scores(np.array([3.0, 1.0, 2.0]))
        assert r.order.tolist() == [0, 2, 1]

    def test_tie_breaks_by_id(self):
        r = rank_scores(np.array([2.0, 2.0]))
        assert r.order.tolist() == [0, 1]

    def test_infinities_sort_extreme(self):
        r = rank_scores(np.array([math.inf, 5.0, -math.inf]))
        assert r.order.tolist() == [0, 1, 2]

    def test_ranks_inverse_of_order(self):
        r = rank_scores(np.array([0.3, 0.9, 0.5, 0.7]))
        for rank, rid in enumerate(r.order, start=1):
            assert r.ranks[rid] == rank

    def test_rank_by_measure_validates_name(self, example_table):
        from rulebench.rules import CatalogError

        with pytest.raises(CatalogError):
            rank_by_measure(example_table, "nope")
        ranked = rank_by_measure(example_table, "Lift")
        assert sorted(ranked.order.tolist()) == list(range(len(example_table)))


class TestWorkedExample:
    def test_spearman(self):
        assert spearman(L1, L2) == pytest.approx(0.80)
        assert spearman(L1, L3) == pytest.approx(0.80)
        assert spearman(L1, L4) == pytest.approx(0.40)

    def test_kendall(self):
        assert kendall_tau(L1, L2) == pytest.approx(2 / 3)
        assert kendall_tau(L1, L3) == pytest.approx(2 / 3)
        assert kendall_tau(L1, L4) == pytest.approx(1 / 3)

    def test_overlap_at_2(self):
        assert overlap_at_k(L1, L2, 2) == 1.0
        assert overlap_at_k(L1, L3, 2) == 1.0
        assert overlap_at_k(L1, L4, 2) == 0.5

    def test_ndcc(self):
        assert ndcc(L1, L2) == pytest.approx(0.20, abs=0.005)
        assert ndcc(L1, L3) == pytest.approx(0.97, abs=0.005)
        assert ndcc(L1, L4) == pytest.approx(-0.18, abs=0.005)


class TestIdentities:
    def test_identical_lists(self):
        for f in (spearman, kendall_tau, ndcc):
            assert f(L1, L1) == pytest.approx(1.0, abs=1e-12)
        assert overlap_at_k(L1, L1, 4) == 1.0

    def test_reversal(self):
        rev = ranked_from_order([3, 2, 1, 0])
        assert spearman(L1, rev) == pytest.approx(-1.0)
        assert kendall_tau(L1, rev) == pytest.approx(-1.0)
        assert ndcc(rev, L1) == pytest.approx(-1.0, abs=1e-12)

    def test_overlap_full_k_is_one(self):
        assert overlap_at_k(L1, L4, 4) == 1.0

    def test_disjoint_topk(self):
        a = ranked_from_order([0, 1, 2, 3])
        b = ranked_from_order([2, 3, 0, 1])
        assert overlap_at_k(a, b, 2) == 0.0

    def test_mismatched_lengths_rejected(self):
        with pytest.raises(ValueError):
            spearman(L1, ranked_from_order([0, 1, 2]))

    def test_k_out_of_range(self):
        with pytest.raises(ValueError):
            overlap_at_k(L1, L2, 0)
        with pytest.raises(ValueError):
            overlap_at_k(L1, L2, 5)

    def test_dcc_symmetry(self, rng):
        for n in (2, 5, 31):
            a = ranked_from_order(rng.permutation(n).tolist())
            b = ranked_from_order(rng.permutation(n).tolist())
            assert dcc(a, b) == pytest.approx(dcc(b, a), rel=1e-12)


class TestKendallOracle:
    def test_all_permutations_to_n5(self):
        for n in range(2, 6):
            base = ranked_from_order(list(range(n)))
            for perm in itertools.permutations(range(n)):
                other = ranked_from_order(list(perm))
                expected = kendall_pair_counting(base.ranks, other.ranks)
                assert kendall_tau(base, other) == expected

    def test_random_pairs(self, rng):
        for _ in range(20):
            n = int(rng.integers(2, 120))
            a = ranked_from_order(rng.permutation(n).tolist())
            b = ranked_from_order(rng.permutation(n).tolist())
            assert kendall_tau(a, b) == kendall_pair_counting(a.ranks, b.ranks)
            assert spearman(a, b) == pytest.approx(
                spearman_direct(a.ranks, b.ranks), rel=1e-12
            )


class TestNdccProperties:
    def test_top_swap_penalized_more(self):
        for n in (4, 7, 20, 100):
            base = ranked_from_order(list(range(n)))
            top = list(range(n))
            top[0], top[1] = top[1], top[0]
            bottom = list(range(n))
            bottom[-1], bottom[-2] = bottom[-2], bottom[-1]
            assert ndcc(ranked_from_order(top), base) < ndcc(
                ranked_from_order(bottom), base
            )

    def test_log_base_invariance(self, rng):
        for _ in range(10):
            n = int(rng.integers(2, 200))
            a = ranked_from_order(rng.permutation(n).tolist())
            b = ranked_from_order(rng.permutation(n).tolist())
            assert ndcc(a, b) == pytest.approx(ndcc(a, b, log_base=2), abs=1e-9)

    @given(st.integers(2, 300), st.randoms(use_true_random=False))
    @settings(max_examples=30, deadline=None)
    def test_identity_and_reversal_bounds(self, n, pyrandom):
        order = list(range(n))
        pyrandom.shuffle(order)
        lst = ranked_from_order(order)
        assert ndcc(lst, lst) == pytest.approx(1.0, abs=1e-9)
        rev = ranked_from_order(order[::-1])
        assert ndcc(rev, lst) == pytest.approx(-1.0, abs=1e-9)


class TestMonotoneTransformInvariance:
    @given(
        st.lists(
            st.integers(-100, 100),
            min_size=2,
            max_size=40,
            unique=True,
        )
    )
    @settings(max_examples=50, deadline=None)
    def test_strictly_increasing_transform_keeps_coefficients(self, scores):
        scores = np.asarray(scores, dtype=np.float64)
        other = np.linspace(1.0, 0.0, scores.size)  # any second ranking
        before = rank_scores(scores)
        transformed = rank_scores(np.exp(scores / 50.0) * 3.0 + 1.0)
        ref = rank_scores(other)
        assert before.order.tolist() == transformed.order.tolist()
        for f in (spearman, kendall_tau, ndcc):
            assert f(before, ref) == f(transformed, ref)
        k = max(1, scores.size // 2)
        assert overlap_at_k(before, ref, k) == overlap_at_k(transformed, ref, k)


class TestMatrix:
    def test_symmetric_unit_diagonal(self, example_table):
        for method in ("spearman", "kendall", "overlap", "ndcc"):
            m = correlation_matrix(example_table, method, aggregation=POOLED, k=3)
            assert np.array_equal(m.values, m.values.T)
            assert np.allclose(np.diag(m.values), 1.0, atol=1e-9)
            assert m.values.shape == (34, 34)

    def test_single_target_average_equals_pooled(self, example_table):
        rows = example_table.rows_for_target("x")
        import rulebench.rules as rules_mod

        sub = rules_mod.ScoredRuleTable(
            [example_table.antecedents[i] for i in rows],
            [example_table.consequents[i] for i in rows],
            example_table.support_a[rows],
            example_table.support_b[rows],
            example_table.support_ab[rows],
            example_table.n,
            example_table.scores[rows],
        )
        averaged = correlation_matrix(sub, "ndcc", aggregation=PER_TARGET)
        pooled = correlation_matrix(sub, "ndcc", aggregation=POOLED)
        assert np.array_equal(averaged.values, pooled.values)

    def test_per_target_average_is_mean_of_target_matrices(self, example_table):
        full = correlation_matrix(example_table, "spearman", aggregation=PER_TARGET)
        per_target = []
        for target in sorted(example_table.targets):
            rows = example_table.rows_for_target(target)
            rankings = [
                rank_scores(example_table.scores[rows, j]) for j in range(34)
            ]
            m = np.ones((34, 34))
            for i in range(34):
                for j in range(i + 1, 34):
                    m[i, j] = m[j, i] = spearman(rankings[i], rankings[j])
            per_target.append(m)
        assert np.allclose(full.values, np.mean(per_target, axis=0), atol=0)

    def test_small_target_skipped_with_warning(self, example_table):
        import rulebench.rules as rules_mod

        # one target with a single rule: it must be skipped, not crash
        ants = example_table.antecedents + [("q",)]
        cons = example_table.consequents + ["solo"]
        table = rules_mod.ScoredRuleTable(
            ants,
            cons,
            np.append(example_table.support_a, 2),
            np.append(example_table.support_b, 2),
            np.append(example_table.support_ab, 2),
            example_table.n,
            np.vstack([example_table.scores, example_table.scores[:1]]),
        )
        with pytest.warns(UserWarning, match="solo"):
            m = correlation_matrix(table, "spearman", aggregation=PER_TARGET)
        assert m.values.shape == (34, 34)

    def test_worker_count_bitwise_identical(self, example_table):
        for method in ("spearman", "ndcc"):
            a = correlation_matrix(example_table, method, workers=1)
            b = correlation_matrix(example_table, method, workers=4)
            assert np.array_equal(a.values, b.values)

    def test_unknown_method_and_aggregation(self, example_table):
        with pytest.raises(ValueError):
            correlation_matrix(example_table, "pearson")
        with pytest.raises(ValueError):
            correlation_matrix(example_table, "ndcc", aggregation="mean")

    def test_payload_round_trip(self, example_table, tmp_path):
        import json

        m = correlation_matrix(example_table, "overlap", k=5)
        assert m.method == "overlap@5"
        m.save_json(tmp_path / "m.json")
        payload = json.loads((tmp_path / "m.json").read_text())
        assert payload["measures"] == list(MEASURE_NAMES)
        assert np.array_equal(np.array(payload["values"]), m.values)
        m.save_csv(tmp_path / "m.csv")
        header = (tmp_path / "m.csv").read_text().splitlines()[0]
        assert header.startswith("measure,")
