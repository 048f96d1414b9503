"""Association rules and the 34-measure interestingness catalog.

Every mined closed itemset Q with target b yields one rule A -> b with
A = Q \\ {b}. A rule's four-cell contingency table is fully determined by
P(A), P(B), P(AB) and the transaction count n:

    P(A~B)  = P(A) - P(AB)
    P(~AB)  = P(B) - P(AB)
    P(~A~B) = 1 - P(A) - P(B) + P(AB)

All 34 measures are closed-form functions of that table, evaluated in
extended-real arithmetic so rankings stay total:

    x/0 -> +inf (x > 0) or -inf (x < 0),   0/0 -> 0,
    0 * log 0 -> 0,                        log 0 -> -inf.

NaN never escapes. Fisher's exact test is the log of a single hypergeometric
term computed through log-gamma and returned *negated*, so that a larger
score means a more surprising rule, like every other column.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass
from math import inf, lgamma, log, log2, sqrt

import numpy as np


class IntegrityError(Exception):
    """Rule/contingency numbers that contradict each other."""


class CatalogError(KeyError):
    """Unknown interestingness measure name."""


class TableSchemaError(Exception):
    """Scored-rule file does not match the expected schema."""


@dataclass(frozen=True)
class AssociationRule:
    """Rule antecedent -> consequent with raw supports over n transactions."""

    antecedent: tuple[int, ...]
    consequent: int
    support_a: int
    support_b: int
    support_ab: int
    n: int

    def __post_init__(self):
        if self.consequent in self.antecedent:
            raise IntegrityError(f"consequent {self.consequent} inside antecedent")
        if not self.antecedent:
            raise IntegrityError("empty antecedent")
        ok = (
            0 < self.support_ab <= min(self.support_a, self.support_b)
            and max(self.support_a, self.support_b) <= self.n
            and self.support_a + self.support_b - self.support_ab <= self.n
        )
        if not ok:
            raise IntegrityError(
                f"inconsistent supports a={self.support_a} b={self.support_b} "
                f"ab={self.support_ab} n={self.n}"
            )


@dataclass(frozen=True)
class Contingency:
    """Four-cell joint probability table of A/~A x B/~B."""

    p_a: float
    p_b: float
    p_ab: float
    p_anb: float
    p_nab: float
    p_nanb: float
    n: int

    def __post_init__(self):
        cells = (self.p_ab, self.p_anb, self.p_nab, self.p_nanb)
        eps = 1e-12
        if any(c < -eps or c > 1 + eps for c in cells + (self.p_a, self.p_b)):
            raise IntegrityError(f"probabilities outside [0,1]: {self}")
        if abs(sum(cells) - 1.0) > eps:
            raise IntegrityError(f"contingency cells do not sum to 1: {self}")
        if (
            abs(self.p_anb - (self.p_a - self.p_ab)) > eps
            or abs(self.p_nab - (self.p_b - self.p_ab)) > eps
        ):
            raise IntegrityError(f"contingency identities violated: {self}")

    @classmethod
    def from_supports(cls, support_a, support_b, support_ab, n) -> "Contingency":
        # integer differences first, so cells are exact and never go negative
        # through float cancellation
        return cls(
            support_a / n,
            support_b / n,
            support_ab / n,
            (support_a - support_ab) / n,
            (support_b - support_ab) / n,
            (n - support_a - support_b + support_ab) / n,
            n,
        )


def contingency(rule: AssociationRule) -> Contingency:
    return Contingency.from_supports(rule.support_a, rule.support_b, rule.support_ab, rule.n)


# ---------------------------------------------------------------------------
# extended-real helpers

def _ratio(num, den):
    if den == 0.0:
        if num == 0.0:
            return 0.0
        return inf if num > 0 else -inf
    return num / den


def _xlog(coef, ratio, logf=log):
    """coef * log(ratio) with 0*log0 -> 0 and log 0 -> -inf."""
    if coef == 0.0:
        return 0.0
    if ratio == 0.0:
        return -inf if coef > 0 else inf
    if ratio == inf:
        return inf if coef > 0 else -inf
    return coef * logf(ratio)


def _product(x, y):
    # 0 * inf -> 0, matching the 0/0 -> 0 spirit; keeps scores NaN-free
    if x == 0.0 or y == 0.0:
        return 0.0
    return x * y


def _counts(ct: Contingency):
    n = ct.n
    n_a = round(ct.p_a * n)
    n_b = round(ct.p_b * n)
    n_ab = round(ct.p_ab * n)
    return n, n_a, n_b, n_ab


def _ln_choose(n, k):
    return lgamma(n + 1) - lgamma(k + 1) - lgamma(n - k + 1)


# ---------------------------------------------------------------------------
# the 34 measures, in catalog order (group blocks G1a .. G6)

def _one_way_support(ct):
    conf = _ratio(ct.p_ab, ct.p_a)
    return _xlog(conf, _ratio(ct.p_ab, ct.p_a * ct.p_b), log2)


def _relative_risk(ct):
    return _ratio(_ratio(ct.p_ab, ct.p_a), _ratio(ct.p_nab, 1.0 - ct.p_a))


def _odd_multiplier(ct):
    return _ratio(ct.p_ab * (1.0 - ct.p_b), ct.p_b * ct.p_anb)


def _zhang(ct):
    num = ct.p_ab - ct.p_a * ct.p_b
    return _ratio(num, max(ct.p_ab * (1.0 - ct.p_b), ct.p_b * ct.p_anb))


def _yules_q(ct):
    agree = ct.p_ab * ct.p_nanb
    cross = ct.p_anb * ct.p_nab
    return _ratio(agree - cross, agree + cross)


def _yules_y(ct):
    agree = sqrt(ct.p_ab * ct.p_nanb)
    cross = sqrt(ct.p_anb * ct.p_nab)
    return _ratio(agree - cross, agree + cross)


def _odds_ratio(ct):
    return _ratio(ct.p_ab * ct.p_nanb, ct.p_anb * ct.p_nab)


def _information_gain(ct):
    return _xlog(1.0, _ratio(ct.p_ab, ct.p_a * ct.p_b))


def _lift(ct):
    return _ratio(ct.p_ab, ct.p_a * ct.p_b)


def _added_value(ct):
    return _ratio(ct.p_ab, ct.p_a) - ct.p_b


def _certainty_factor(ct):
    return _ratio(_ratio(ct.p_ab, ct.p_a) - ct.p_b, 1.0 - ct.p_b)


def _confidence(ct):
    return _ratio(ct.p_ab, ct.p_a)


def _laplace_correction(ct):
    # raw supports, not probabilities
    n, n_a, _, n_ab = _counts(ct)
    return (n_ab + 1) / (n_a + 2)


def _loevinger(ct):
    return 1.0 - _ratio(ct.p_anb, ct.p_a * (1.0 - ct.p_b))


def _conviction(ct):
    return _ratio(ct.p_a * (1.0 - ct.p_b), ct.p_anb)


def _example_counterexample_rate(ct):
    return 1.0 - _ratio(ct.p_anb, ct.p_ab)


def _sebag_schoenauer(ct):
    return _ratio(ct.p_ab, ct.p_anb)


def _leverage(ct):
    return _ratio(ct.p_ab, ct.p_a) - ct.p_a * ct.p_b


def _least_contradiction(ct):
    return _ratio(ct.p_ab - ct.p_anb, ct.p_b)


def _accuracy(ct):
    return ct.p_ab + ct.p_nanb


def _pearson_chi_squared(ct):
    p_na = 1.0 - ct.p_a
    p_nb = 1.0 - ct.p_b
    total = 0.0
    for obs, exp in (
        (ct.p_ab, ct.p_a * ct.p_b),
        (ct.p_anb, ct.p_a * p_nb),
        (ct.p_nab, p_na * ct.p_b),
        (ct.p_nanb, p_na * p_nb),
    ):
        total += _ratio((obs - exp) ** 2, exp)
    return ct.n * total


def _gini_index(ct):
    p_na = 1.0 - ct.p_a
    p_nb = 1.0 - ct.p_b
    p_b_a = _ratio(ct.p_ab, ct.p_a)
    p_nb_a = _ratio(ct.p_anb, ct.p_a)
    p_b_na = _ratio(ct.p_nab, p_na)
    p_nb_na = _ratio(ct.p_nanb, p_na)
    return (
        ct.p_a * (p_b_a**2 + p_nb_a**2)
        + p_na * (p_b_na**2 + p_nb_na**2)
        - ct.p_b**2
        - p_nb**2
    )


def _j_measure(ct):
    p_nb = 1.0 - ct.p_b
    conf = _ratio(ct.p_ab, ct.p_a)
    counter = _ratio(ct.p_anb, ct.p_a)
    return _xlog(ct.p_ab, _ratio(conf, ct.p_b)) + _xlog(ct.p_anb, _ratio(counter, p_nb))


def _phi_coefficient(ct):
    p_na = 1.0 - ct.p_a
    p_nb = 1.0 - ct.p_b
    return _ratio(ct.p_ab - ct.p_a * ct.p_b, sqrt(ct.p_a * ct.p_b * p_na * p_nb))


def _two_way_support_variation(ct):
    p_na = 1.0 - ct.p_a
    p_nb = 1.0 - ct.p_b
    return (
        _xlog(ct.p_ab, _ratio(ct.p_ab, ct.p_a * ct.p_b), log2)
        + _xlog(ct.p_anb, _ratio(ct.p_anb, ct.p_a * p_nb), log2)
        + _xlog(ct.p_nab, _ratio(ct.p_nab, p_na * ct.p_b), log2)
        + _xlog(ct.p_nanb, _ratio(ct.p_nanb, p_na * p_nb), log2)
    )


def _fisher_exact(ct):
    n, n_a, n_b, n_ab = _counts(ct)
    log_p = (
        _ln_choose(n_b, n_ab)
        + _ln_choose(n - n_b, n_a - n_ab)
        - _ln_choose(n, n_a)
    )
    return -log_p


def _jaccard(ct):
    return _ratio(ct.p_ab, ct.p_a + ct.p_b - ct.p_ab)


def _cosine(ct):
    return _ratio(ct.p_ab, sqrt(ct.p_a * ct.p_b))


def _two_way_support(ct):
    return _xlog(ct.p_ab, _ratio(ct.p_ab, ct.p_a * ct.p_b), log2)


def _piatetsky_shapiro(ct):
    return ct.p_ab - ct.p_a * ct.p_b


def _klosgen(ct):
    conf = _ratio(ct.p_ab, ct.p_a)
    rec = _ratio(ct.p_ab, ct.p_b)
    return sqrt(ct.p_ab) * max(conf - ct.p_b, rec - ct.p_a)


def _specificity(ct):
    return _ratio(ct.p_nanb, 1.0 - ct.p_a)


def _recall(ct):
    return _ratio(ct.p_ab, ct.p_b)


def _collective_strength(ct):
    # as printed: uses the conditional P(~B|~A), not the joint P(~A~B)
    p_na = 1.0 - ct.p_a
    p_nb = 1.0 - ct.p_b
    p_nb_na = _ratio(ct.p_nanb, p_na)
    expected = ct.p_a * ct.p_b + p_na * p_nb
    f1 = _ratio(ct.p_ab + p_nb_na, expected)
    f2 = _ratio(1.0 - expected, 1.0 - ct.p_ab - p_nb_na)
    return _product(f1, f2)


# equivalence marks: diamond/dagger/ominus/otimes rank identically always,
# star/triangle rank identically when every rule shares one consequent
@dataclass(frozen=True)
class Measure:
    name: str
    group: str
    marks: frozenset
    fn: object

    def __call__(self, ct: Contingency) -> float:
        return self.fn(ct)


def _m(name, group, marks, fn):
    return Measure(name, group, frozenset(marks.split()), fn)


MEASURES: tuple[Measure, ...] = (
    _m("One-Way Support", "G1a", "", _one_way_support),
    _m("Relative Risk", "G1a", "", _relative_risk),
    _m("Odd Multiplier", "G1a", "", _odd_multiplier),
    _m("Zhang", "G1a", "", _zhang),
    _m("Yule's Q", "G1a", "diamond", _yules_q),
    _m("Yule's Y", "G1a", "diamond", _yules_y),
    _m("Odds Ratio", "G1a", "diamond", _odds_ratio),
    _m("Information Gain", "G1a", "star ominus", _information_gain),
    _m("Lift", "G1a", "star ominus", _lift),
    _m("Added Value", "G1b", "star", _added_value),
    _m("Certainty Factor", "G1b", "star", _certainty_factor),
    _m("Confidence", "G1b", "star otimes", _confidence),
    _m("Laplace Correction", "G1b", "star otimes", _laplace_correction),
    _m("Loevinger", "G1b", "dagger", _loevinger),
    _m("Conviction", "G1b", "dagger", _conviction),
    _m("Example and Counter-example Rate", "G1b", "", _example_counterexample_rate),
    _m("Sebag-Schoenauer", "G1b", "", _sebag_schoenauer),
    _m("Leverage", "G1b", "", _leverage),
    _m("Least Contradiction", "G2", "", _least_contradiction),
    _m("Accuracy", "G2", "", _accuracy),
    _m("Pearson's Chi-Squared", "G3", "triangle", _pearson_chi_squared),
    _m("Gini Index", "G3", "triangle", _gini_index),
    _m("J-Measure", "G3", "", _j_measure),
    _m("Phi Linear Correlation Coefficient", "G3", "", _phi_coefficient),
    _m("Two-Way Support Variation", "G3", "", _two_way_support_variation),
    _m("Fisher's Exact Test", "G3", "", _fisher_exact),
    _m("Jaccard", "G3", "", _jaccard),
    _m("Cosine", "G4", "", _cosine),
    _m("Two-Way Support", "G4", "", _two_way_support),
    _m("Piatetsky-Shapiro", "G5", "", _piatetsky_shapiro),
    _m("Klosgen", "G5", "", _klosgen),
    _m("Specificity", "G5", "", _specificity),
    _m("Recall", "G6", "", _recall),
    _m("Collective Strength", "G6", "", _collective_strength),
)

MEASURE_NAMES: tuple[str, ...] = tuple(m.name for m in MEASURES)
_MEASURE_BY_NAME = {m.name: m for m in MEASURES}

GROUPS: dict[str, tuple[str, ...]] = {}
for _measure in MEASURES:
    GROUPS.setdefault(_measure.group, ())
    GROUPS[_measure.group] += (_measure.name,)

EQUIVALENCE_CLASSES = {
    mark: tuple(m.name for m in MEASURES if mark in m.marks)
    for mark in ("diamond", "dagger", "ominus", "otimes", "star", "triangle")
}
# diamond/dagger/ominus/otimes hold for any rule mix; star/triangle only
# when a single target is selected
ALWAYS_EQUIVALENT = ("diamond", "dagger", "ominus", "otimes")
SINGLE_TARGET_EQUIVALENT = ("star", "triangle")

# group representatives (highest average within-group similarity on the
# reference corpus); the blinded chooser collapses G1a/G1b to Lift
REPRESENTATIVES = {
    "G1a": "Lift",
    "G1b": "Added Value",
    "G2": "Accuracy",
    "G3": "Fisher's Exact Test",
    "G4": "Cosine",
    "G5": "Piatetsky-Shapiro",
    "G6": "Collective Strength",
}
BLINDED_REPRESENTATIVES = (
    "Lift",
    "Accuracy",
    "Fisher's Exact Test",
    "Cosine",
    "Piatetsky-Shapiro",
    "Collective Strength",
)


def evaluate_measure(name: str, ct: Contingency) -> float:
    measure = _MEASURE_BY_NAME.get(name)
    if measure is None:
        raise CatalogError(name)
    return measure(ct)


def derive_rules(closed_itemsets, antecedent_supports, target_supports, n) -> list[AssociationRule]:
    """One rule (Q \\ {b}) -> b per mined itemset; A's support from pass two."""
    rules = []
    for ci in closed_itemsets:
        ant = ci.antecedent()
        support_a = antecedent_supports.get(ant)
        if support_a is None:
            raise IntegrityError(f"no antecedent support for {ant} (miner/counter mismatch)")
        support_b = target_supports.get(ci.target)
        if support_b is None:
            raise IntegrityError(f"no target support for {ci.target}")
        rules.append(AssociationRule(ant, ci.target, support_a, support_b, ci.support, n))
    return rules


class ScoredRuleTable:
    """Rules plus their display triple and all 34 measure columns."""

    def __init__(
        self,
        antecedents,
        consequents,
        support_a,
        support_b,
        support_ab,
        n,
        scores,
        scenario=None,
    ):
        self.antecedents = list(antecedents)
        self.consequents = list(consequents)
        self.support_a = np.asarray(support_a, dtype=np.int64)
        self.support_b = np.asarray(support_b, dtype=np.int64)
        self.support_ab = np.asarray(support_ab, dtype=np.int64)
        self.n = int(n)
        self.scores = np.asarray(scores, dtype=np.float64)
        self.scenario = scenario
        if self.scores.shape != (len(self.antecedents), len(MEASURES)):
            raise TableSchemaError(
                f"score matrix shape {self.scores.shape}, "
                f"expected ({len(self.antecedents)}, {len(MEASURES)})"
            )
        self.confidence = self.support_ab / self.support_a
        self.recall = self.support_ab / self.support_b
        self.measures = list(MEASURE_NAMES)

    def __len__(self):
        return len(self.antecedents)

    @property
    def targets(self) -> list[str]:
        seen = dict.fromkeys(self.consequents)
        return list(seen)

    def rows_for_target(self, target) -> np.ndarray:
        return np.flatnonzero(np.asarray([c == target for c in self.consequents]))

    def measure_column(self, name) -> np.ndarray:
        if name not in _MEASURE_BY_NAME:
            raise CatalogError(name)
        return self.scores[:, MEASURE_NAMES.index(name)]


def score_table(rules, dictionary=None, scenario=None) -> ScoredRuleTable:
    """Score every rule under every catalog measure.

    Rows are sorted by (consequent, antecedent) so the table is reproducible
    regardless of mining order.
    """
    if not rules:
        raise ValueError("cannot score an empty rule list")
    ordered = sorted(rules, key=lambda r: (r.consequent, r.antecedent))
    label = dictionary.label_of if dictionary is not None else str
    scores = np.empty((len(ordered), len(MEASURES)), dtype=np.float64)
    for i, rule in enumerate(ordered):
        ct = contingency(rule)
        for j, measure in enumerate(MEASURES):
            scores[i, j] = measure(ct)
    return ScoredRuleTable(
        antecedents=[tuple(label(a) for a in r.antecedent) for r in ordered],
        consequents=[label(r.consequent) for r in ordered],
        support_a=[r.support_a for r in ordered],
        support_b=[r.support_b for r in ordered],
        support_ab=[r.support_ab for r in ordered],
        n=ordered[0].n,
        scores=scores,
        scenario=scenario,
    )


_FIXED_COLUMNS = [
    "antecedent",
    "consequent",
    "support_a",
    "support_b",
    "support_ab",
    "n",
    "confidence",
    "recall",
]


def write_rules_csv(table: ScoredRuleTable, path):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(_FIXED_COLUMNS + list(MEASURE_NAMES))
        for i in range(len(table)):
            row = [
                " ".join(table.antecedents[i]),
                table.consequents[i],
                int(table.support_a[i]),
                int(table.support_b[i]),
                int(table.support_ab[i]),
                table.n,
                repr(float(table.confidence[i])),
                repr(float(table.recall[i])),
            ]
            row.extend(repr(float(v)) for v in table.scores[i])
            writer.writerow(row)


def write_rules_jsonl(table: ScoredRuleTable, path):
    with open(path, "w", encoding="utf-8") as fh:
        for i in range(len(table)):
            obj = {
                "antecedent": list(table.antecedents[i]),
                "consequent": table.consequents[i],
                "support_a": int(table.support_a[i]),
                "support_b": int(table.support_b[i]),
                "support_ab": int(table.support_ab[i]),
                "n": table.n,
                "confidence": float(table.confidence[i]),
                "recall": float(table.recall[i]),
            }
            for j, name in enumerate(MEASURE_NAMES):
                obj[name] = float(table.scores[i, j])
            fh.write(json.dumps(obj))
            fh.write("\n")


def read_rules_csv(path) -> ScoredRuleTable:
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise TableSchemaError(f"{path}: empty file") from None
        expected = _FIXED_COLUMNS + list(MEASURE_NAMES)
        for col in expected:
            if col not in header:
                raise TableSchemaError(f"{path}: missing column {col!r}")
        idx = {col: header.index(col) for col in expected}
        ants, cons, s_a, s_b, s_ab, ns = [], [], [], [], [], []
        score_rows = []
        for row in reader:
            ants.append(tuple(row[idx["antecedent"]].split(" ")))
            cons.append(row[idx["consequent"]])
            s_a.append(int(row[idx["support_a"]]))
            s_b.append(int(row[idx["support_b"]]))
            s_ab.append(int(row[idx["support_ab"]]))
            ns.append(int(row[idx["n"]]))
            score_rows.append([float(row[idx[name]]) for name in MEASURE_NAMES])
    if not ants:
        raise TableSchemaError(f"{path}: no rule rows")
    if len(set(ns)) != 1:
        raise TableSchemaError(f"{path}: inconsistent transaction counts in column 'n'")
    return ScoredRuleTable(ants, cons, s_a, s_b, s_ab, ns[0], np.array(score_rows))
