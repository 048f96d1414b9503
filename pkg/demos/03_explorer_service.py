"""Tour of the HTTP explorer API, including a blinded review session.

Starts the service in-process on an ephemeral port, walks the endpoints the
browser explorer uses, and shows how a blinded session hides measure names
behind the labels A..F.

Run:  python demos/03_explorer_service.py
"""

import json
import threading
import urllib.request

from rulebench import (
    build_transactions,
    count_antecedent_supports,
    derive_rules,
    mine,
    score_table,
    synth_corpus,
)
from rulebench.corpus import PRODUCT_RECEIPT
from rulebench.service import ExplorerService, make_server

corpus = synth_corpus(seed=21, n_customers=300, n_products=120, n_receipts=5000)
tset = build_transactions(corpus.records, PRODUCT_RECEIPT)
counts = {}
for t in tset.transactions:
    for item in t:
        counts[item] = counts.get(item, 0) + 1
targets = sorted(counts, key=lambda i: (-counts[i], i))[:4]
result = mine(tset, targets, epsilon=15)
supports = count_antecedent_supports(tset, result.trie)
rules = derive_rules(result.itemsets, supports, result.target_supports, len(tset))
table = score_table(rules, tset.dictionary, tset.scenario)

app = ExplorerService(table, corpus.taxonomy)
server = make_server(app, port=0)
threading.Thread(target=server.serve_forever, daemon=True).start()
base = f"http://127.0.0.1:{server.server_address[1]}"
print(f"service up at {base}")


def get(path, session=None):
    req = urllib.request.Request(base + path)
    if session:
        req.add_header("X-Session-Id", session)
    with urllib.request.urlopen(req) as resp:
        return json.loads(resp.read())


def post(path, payload):
    req = urllib.request.Request(base + path, data=json.dumps(payload).encode(),
                                 method="POST")
    with urllib.request.urlopen(req) as resp:
        return json.loads(resp.read())


print("\ntargets:", get("/targets")["targets"])
print("open catalog has", len(get("/measures")["measures"]), "measures")

target = get("/targets")["targets"][0]
top = get(f"/rules?target={target}&measure=Confidence&limit=3")
print(f"\ntop-3 rules for {target} by Confidence:")
for item in top["items"]:
    print("  ", " + ".join(item["antecedent"]), "->", item["consequent"],
          f"(support {item['support']}, conf {item['confidence']:.2f})")

bottom = get(f"/rules?target={target}&measure=Confidence&offset=-2")
print(f"bottom of the same list (offset=-2): {len(bottom['items'])} rows "
      f"of {bottom['total']}")

# blinded review: measures hide behind the labels A..F
session = post("/session", {"blinded": True})["session_id"]
labels = get("/measures", session=session)["measures"]
print("\nblinded session sees only:", labels)
blind_top = get(f"/rules?target={target}&measure=A&limit=3", session=session)
print("top-3 under the anonymous measure 'A':")
for item in blind_top["items"]:
    print("  ", " + ".join(item["antecedent"]), "->", item["consequent"])

matrix = get("/correlation?method=ndcc")
print(f"\nndcc similarity matrix: {len(matrix['measures'])}x"
      f"{len(matrix['values'])} (unblinded view)")
server.shutdown()
print("done")
