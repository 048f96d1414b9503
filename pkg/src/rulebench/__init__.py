"""rulebench: targeted closed-itemset mining and rule-ranking comparison.

The pipeline, end to end:

    corpus     raw sales/customers/taxonomy -> scenario transaction sets
    miner      targeted closed frequent itemsets + antecedent supports
    rules      association rules scored under 34 interestingness measures
    rankcorr   ranking similarity (spearman / kendall / overlap@k / ndcc)
    clusterlab measure grouping, annotation, representatives
    cli        prepare / synth / mine-score / compare / serve subcommands
    service    read-only HTTP API for the browser explorer
"""

from .corpus import (
    DEMO,
    PRODUCT_CLIENT,
    PRODUCT_RECEIPT,
    SCENARIOS,
    CorpusError,
    CurationError,
    CustomerProfile,
    ItemDictionary,
    ParseError,
    SalesRecord,
    Taxonomy,
    TransactionSet,
    build_transactions,
    parse_customers,
    parse_sales,
    parse_taxonomy,
    synth_corpus,
)
from .miner import (
    AntecedentTrie,
    ClosedItemset,
    MineResult,
    TargetSet,
    closure,
    count_antecedent_supports,
    mine,
    partition_by_target,
)
from .rules import (
    MEASURE_NAMES,
    MEASURES,
    AssociationRule,
    CatalogError,
    Contingency,
    IntegrityError,
    ScoredRuleTable,
    contingency,
    derive_rules,
    evaluate_measure,
    score_table,
)
from .rankcorr import (
    RankedList,
    SimilarityMatrix,
    correlation_matrix,
    dcc,
    kendall_tau,
    ndcc,
    overlap_at_k,
    rank_by_measure,
    spearman,
)
from .clusterlab import (
    Dendrogram,
    MeasureGroup,
    annotate_groups,
    average_linkage,
    cut_at_threshold,
    select_representatives,
)

__version__ = "0.1.0"
