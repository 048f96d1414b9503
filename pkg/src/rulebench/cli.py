"""Command-line pipeline: synth / prepare / mine-score / compare / serve.

Each subcommand is idempotent for a fixed configuration and writes a
manifest.json capturing every parameter, so runs are reproducible and
pipeable: prepare -> mine-score -> compare -> serve.

Exit codes: 0 success, 1 usage error, 2 data/integrity error.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys

import numpy as np

from . import clusterlab, corpus, miner, rankcorr, rules


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(message)


class DataError(Exception):
    """Anything wrong with the data rather than the invocation."""


def _write_manifest(out_dir, command, params):
    os.makedirs(out_dir, exist_ok=True)
    manifest = {"command": command, "parameters": params}
    with open(os.path.join(out_dir, "manifest.json"), "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _cmd_synth(args):
    synth = corpus.synth_corpus(
        seed=args.seed,
        n_customers=args.customers,
        n_products=args.products,
        n_receipts=args.receipts,
        skew=args.skew,
    )
    corpus.write_corpus_csv(synth, args.out)
    _write_manifest(
        args.out,
        "synth",
        {
            "seed": args.seed,
            "customers": args.customers,
            "products": args.products,
            "receipts": args.receipts,
            "skew": args.skew,
        },
    )
    print(f"records={len(synth.records)} customers={args.customers} products={args.products}")
    return 0


def _cmd_prepare(args):
    records = corpus.parse_sales(args.sales)
    profiles = taxonomy = None
    if args.scenario == corpus.DEMO:
        if not args.customers:
            raise DataError("DEMO scenario needs --customers <customers.csv>")
        if not args.taxonomy:
            raise DataError("DEMO scenario needs --taxonomy <taxonomy.csv>")
    if args.customers:
        profiles = corpus.parse_customers(args.customers)
    if args.taxonomy:
        taxonomy = corpus.parse_taxonomy(args.taxonomy)
    tset = corpus.build_transactions(records, args.scenario, profiles, taxonomy)
    tset.save(args.out)
    _write_manifest(
        args.out,
        "prepare",
        {"sales": args.sales, "customers": args.customers, "taxonomy": args.taxonomy,
         "scenario": args.scenario},
    )
    print(f"transactions={len(tset)} items={tset.item_count()}")
    if args.scenario == corpus.DEMO:
        # record-level vs customer-level reading of the DEMO transaction count
        distinct_customers = len({r.customer_id for r in records})
        print(f"records={len(records)} distinct_customers={distinct_customers}")
    return 0


def _resolve_targets(args, tset):
    dictionary = tset.dictionary
    if args.targets:
        labels = [t for chunk in args.targets for t in chunk.split(",") if t]
        ids = []
        for label in labels:
            if label not in dictionary:
                close = ", ".join(dictionary.closest(label))
                raise DataError(f"unknown target {label!r}; closest labels: {close}")
            ids.append(dictionary.id_of(label))
        return ids
    counts = {}
    eligible = tset.category_items if tset.scenario == corpus.DEMO else None
    for t in tset.transactions:
        for item in t:
            if eligible is None or item in eligible:
                counts[item] = counts.get(item, 0) + 1
    ranked = sorted(counts, key=lambda i: (-counts[i], i))
    if not ranked:
        raise DataError("no eligible target items in the transaction set")
    return ranked[: args.top_targets]


def _cmd_mine_score(args):
    tset = corpus.TransactionSet.load(args.data)
    targets = _resolve_targets(args, tset)
    epsilon = args.epsilon
    if epsilon is None:
        epsilon = corpus.DEFAULT_MIN_SUPPORT[tset.scenario]
    result = miner.mine(tset, targets, epsilon, workers=args.workers)
    os.makedirs(args.out, exist_ok=True)
    miner.write_itemsets(result.itemsets, os.path.join(args.out, "itemsets.tsv"))
    _write_manifest(
        args.out,
        "mine-score",
        {
            "data": args.data,
            "targets": sorted(tset.dictionary.label_of(b) for b in targets),
            "epsilon": epsilon,
            "workers": args.workers,
        },
    )
    csv_path = os.path.join(args.out, "rules.csv")
    jsonl_path = os.path.join(args.out, "rules.jsonl")
    if not result.itemsets:
        with open(csv_path, "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(rules._FIXED_COLUMNS + list(rules.MEASURE_NAMES))
        open(jsonl_path, "w").close()
        print("rules=0", file=sys.stderr)
        print("warning: no closed itemsets at this support threshold", file=sys.stderr)
        return 0
    supports = miner.count_antecedent_supports(tset, result.trie, workers=args.workers)
    rule_list = rules.derive_rules(result.itemsets, supports, result.target_supports, len(tset))
    table = rules.score_table(rule_list, tset.dictionary, tset.scenario)
    rules.write_rules_csv(table, csv_path)
    rules.write_rules_jsonl(table, jsonl_path)
    print(f"rules={len(table)}")
    return 0


def _cmd_compare(args):
    table = rules.read_rules_csv(args.rules)
    methods = args.method or list(rankcorr.METHODS)
    os.makedirs(args.out, exist_ok=True)
    _write_manifest(
        args.out,
        "compare",
        {
            "rules": args.rules,
            "methods": methods,
            "aggregation": args.aggregation,
            "k": args.k,
            "theta": args.theta,
            "workers": args.workers,
        },
    )
    for method in methods:
        matrix = rankcorr.correlation_matrix(
            table, method, aggregation=args.aggregation, k=args.k, workers=args.workers
        )
        matrix.save_json(os.path.join(args.out, f"matrix_{method}.json"))
        matrix.save_csv(os.path.join(args.out, f"matrix_{method}.csv"))
        dendro = clusterlab.average_linkage(matrix)
        dendro.save_json(os.path.join(args.out, f"dendrogram_{method}.json"))
        dendro.save_dot(os.path.join(args.out, f"dendrogram_{method}.dot"))
        groups = clusterlab.cut_at_threshold(dendro, args.theta)
        groups = clusterlab.annotate_groups(groups, table)
        groups = clusterlab.select_representatives(groups, matrix)
        with open(os.path.join(args.out, f"groups_{method}.json"), "w", encoding="utf-8") as fh:
            json.dump(clusterlab.groups_payload(groups), fh, indent=2)
            fh.write("\n")
        print(f"method={method} groups={len(groups)}")
    # static reference grouping, so reports can set computed groups side by
    # side with the shipped catalog grouping
    with open(os.path.join(args.out, "reference_groups.json"), "w", encoding="utf-8") as fh:
        json.dump(clusterlab.reference_groups_payload(), fh, indent=2)
        fh.write("\n")
    # plottable recall/confidence annotation per measure (one file, method-free)
    rec, conf = clusterlab._per_measure_annotation(table)
    with open(os.path.join(args.out, "measure_annotation.csv"), "w", encoding="utf-8",
              newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["measure", "mean_recall", "mean_confidence"])
        for name in rules.MEASURE_NAMES:
            writer.writerow([name, repr(rec[name]), repr(conf[name])])
    return 0


def _cmd_serve(args):
    from . import service

    app = service.ExplorerService.from_files(
        rules_path=args.rules, taxonomy_path=args.taxonomy
    )
    server = service.make_server(app, host=args.host, port=args.port)
    print(f"serving on http://{args.host}:{server.server_address[1]}", flush=True)
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    return 0


def build_parser() -> _Parser:
    parser = _Parser(prog="rulebench")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate a deterministic synthetic corpus")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--customers", type=int, default=5000)
    p.add_argument("--products", type=int, default=2000)
    p.add_argument("--receipts", type=int, default=100000)
    p.add_argument("--skew", type=float, default=1.05)
    p.add_argument("--out", required=True)
    p.set_defaults(fn=_cmd_synth)

    p = sub.add_parser("prepare", help="build the scenario transaction set")
    p.add_argument("--sales", required=True)
    p.add_argument("--customers")
    p.add_argument("--taxonomy")
    p.add_argument("--scenario", choices=corpus.SCENARIOS, required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(fn=_cmd_prepare)

    p = sub.add_parser("mine-score", help="mine closed itemsets and score rules")
    p.add_argument("--data", required=True, help="directory written by prepare")
    p.add_argument("--targets", action="append", help="target label(s), comma separated")
    p.add_argument("--top-targets", type=int, default=20, dest="top_targets")
    p.add_argument("--epsilon", type=int)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out", required=True)
    p.set_defaults(fn=_cmd_mine_score)

    p = sub.add_parser("compare", help="rank-correlation matrices and measure groups")
    p.add_argument("--rules", required=True, help="rules.csv from mine-score")
    p.add_argument("--method", action="append", choices=rankcorr.METHODS)
    p.add_argument("--aggregation", choices=rankcorr.AGGREGATIONS,
                   default=rankcorr.PER_TARGET)
    p.add_argument("--k", type=int, default=rankcorr.DEFAULT_OVERLAP_K)
    p.add_argument("--theta", type=float, default=clusterlab.DEFAULT_CUT)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out", required=True)
    p.set_defaults(fn=_cmd_compare)

    p = sub.add_parser("serve", help="serve rules and comparisons over HTTP")
    p.add_argument("--rules", required=True, help="rules.jsonl or rules.csv")
    p.add_argument("--taxonomy", help="taxonomy.csv for the same-category filter")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8765)
    p.set_defaults(fn=_cmd_serve)
    return parser


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except _UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    try:
        return args.fn(args)
    except (
        DataError,
        corpus.CorpusError,
        rules.IntegrityError,
        rules.CatalogError,
        rules.TableSchemaError,
    ) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
