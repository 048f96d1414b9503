"""Read-only HTTP API over a scored rule table, for the browser explorer.

The service reproduces the analyst review workflow server-side: pick a
target, pick a measure (optionally blinded), browse ranked rules with their
support/confidence/recall triple, optionally keep only rules whose antecedent
products share the target's immediate parent category, and inspect the
measure-comparison artifacts.

Sessions: ``POST /session {"blinded": bool}`` returns a session id, passed
back in the ``X-Session-Id`` header. A blinded session sees only the six
anonymous labels A..F (a per-session random permutation of the six group
representatives) and never a real measure name in any payload, including the
comparison endpoints (those answer 403 while blinded).

Endpoints:

    POST /session                        {"blinded": bool} -> {"session_id"}
    GET  /targets                        target catalog
    GET  /measures                       measure names, or blinded labels
    GET  /groups                         reference measure groups
    GET  /rules?target&measure&same_category&limit&offset
    GET  /correlation?method&aggregation
    GET  /dendrogram?method&aggregation

List responses use the envelope {"total", "offset", "items"}; offset may be
negative (-n means the last n rows), so the bottom of a ranking is one
request away.
"""

from __future__ import annotations

import json
import random
import threading
import uuid
from dataclasses import dataclass
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from urllib.parse import parse_qs, urlparse

import numpy as np

from . import clusterlab, rankcorr
from .corpus import Taxonomy, parse_taxonomy
from .rules import (
    BLINDED_REPRESENTATIVES,
    MEASURE_NAMES,
    ScoredRuleTable,
    read_rules_csv,
)

BLINDED_LABELS = tuple("ABCDEF")


class ApiError(Exception):
    def __init__(self, status, message):
        super().__init__(message)
        self.status = status
        self.message = message


@dataclass(frozen=True)
class Session:
    id: str
    blinded: bool
    label_to_measure: dict


_DEFAULT_SESSION = Session(id="", blinded=False, label_to_measure={})


def read_rules_jsonl(path) -> ScoredRuleTable:
    ants, cons, s_a, s_b, s_ab, ns, score_rows = [], [], [], [], [], [], []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            obj = json.loads(line)
            ants.append(tuple(obj["antecedent"]))
            cons.append(obj["consequent"])
            s_a.append(obj["support_a"])
            s_b.append(obj["support_b"])
            s_ab.append(obj["support_ab"])
            ns.append(obj["n"])
            score_rows.append([float(obj[name]) for name in MEASURE_NAMES])
    if not ants:
        raise ValueError(f"{path}: no rules")
    return ScoredRuleTable(ants, cons, s_a, s_b, s_ab, ns[0], np.array(score_rows))


class ExplorerService:
    """Application state: immutable table + caches + the session registry."""

    def __init__(self, table: ScoredRuleTable | None, taxonomy: Taxonomy | None = None):
        self.table = table
        self.taxonomy = taxonomy
        self._lock = threading.Lock()
        self._sessions: dict[str, Session] = {}
        self._rank_cache: dict[tuple, np.ndarray] = {}
        self._matrix_cache: dict[tuple, rankcorr.SimilarityMatrix] = {}

    @classmethod
    def from_files(cls, rules_path, taxonomy_path=None):
        if str(rules_path).endswith(".jsonl"):
            table = read_rules_jsonl(rules_path)
        else:
            table = read_rules_csv(rules_path)
        taxonomy = parse_taxonomy(taxonomy_path) if taxonomy_path else None
        return cls(table, taxonomy)

    # -- sessions ----------------------------------------------------------

    def create_session(self, blinded: bool) -> Session:
        sid = uuid.uuid4().hex
        mapping = {}
        if blinded:
            reps = list(BLINDED_REPRESENTATIVES)
            random.Random(sid).shuffle(reps)
            mapping = dict(zip(BLINDED_LABELS, reps))
        session = Session(sid, blinded, mapping)
        with self._lock:
            self._sessions[sid] = session
        return session

    def session_from_header(self, sid) -> Session:
        if not sid:
            return _DEFAULT_SESSION
        with self._lock:
            session = self._sessions.get(sid)
        if session is None:
            raise ApiError(400, "unknown session id")
        return session

    def _require_table(self) -> ScoredRuleTable:
        if self.table is None:
            raise ApiError(503, "rule table not loaded yet")
        return self.table

    # -- catalogs ----------------------------------------------------------

    def targets_payload(self):
        table = self._require_table()
        return {"targets": sorted(table.targets)}

    def measures_payload(self, session: Session):
        self._require_table()
        if session.blinded:
            return {"measures": list(BLINDED_LABELS), "blinded": True}
        return {"measures": list(MEASURE_NAMES), "blinded": False}

    def groups_payload(self, session: Session):
        self._require_table()
        if session.blinded:
            return {"groups": [{"label": lbl} for lbl in BLINDED_LABELS], "blinded": True}
        return {"groups": clusterlab.reference_groups_payload(), "blinded": False}

    # -- ranked rules ------------------------------------------------------

    def _resolve_measure(self, session: Session, label: str) -> str:
        if session.blinded:
            measure = session.label_to_measure.get(label)
            if measure is None:
                raise ApiError(400, f"unknown measure label {label!r}")
            return measure
        if label not in MEASURE_NAMES:
            raise ApiError(400, f"unknown measure label {label!r}")
        return label

    def _ranked_rows(self, target: str, measure: str) -> np.ndarray:
        table = self._require_table()
        key = (target, measure)
        with self._lock:
            cached = self._rank_cache.get(key)
        if cached is not None:
            return cached
        rows = table.rows_for_target(target)
        if rows.size == 0:
            raise ApiError(404, f"unknown target {target!r}")
        ranked = rankcorr.rank_scores(table.measure_column(measure)[rows])
        ordered = rows[ranked.order]
        with self._lock:
            self._rank_cache[key] = ordered
        return ordered

    def _same_category_mask(self, rows, target):
        table = self._require_table()
        if self.taxonomy is None:
            raise ApiError(400, "same_category filter needs a taxonomy")
        if target not in self.taxonomy.leaves:
            # target without a product parent (e.g. DEMO category): nothing matches
            return np.zeros(rows.size, dtype=bool)
        parent = self.taxonomy.parent_of(target)
        keep = np.empty(rows.size, dtype=bool)
        for idx, row in enumerate(rows):
            items = table.antecedents[row]
            keep[idx] = all(
                item in self.taxonomy.leaves and self.taxonomy.parent_of(item) == parent
                for item in items
            )
        return keep

    def rules_payload(self, session, target, measure_label, same_category, limit, offset):
        table = self._require_table()
        measure = self._resolve_measure(session, measure_label)
        ordered = self._ranked_rows(target, measure)
        if same_category:
            ordered = ordered[self._same_category_mask(ordered, target)]
        total = int(ordered.size)
        start = offset if offset >= 0 else total + offset
        start = min(max(start, 0), total)
        window = ordered[start : start + limit] if limit is not None else ordered[start:]
        items = [
            {
                "antecedent": list(table.antecedents[row]),
                "consequent": table.consequents[row],
                "support": int(table.support_ab[row]),
                "confidence": float(table.confidence[row]),
                "recall": float(table.recall[row]),
            }
            for row in window
        ]
        return {"total": total, "offset": start, "items": items}

    # -- comparison artifacts ----------------------------------------------

    def _matrix(self, method, aggregation) -> rankcorr.SimilarityMatrix:
        table = self._require_table()
        if method not in rankcorr.METHODS:
            raise ApiError(400, f"unknown method {method!r}")
        if aggregation not in rankcorr.AGGREGATIONS:
            raise ApiError(400, f"unknown aggregation {aggregation!r}")
        key = (method, aggregation)
        with self._lock:
            cached = self._matrix_cache.get(key)
        if cached is not None:
            return cached
        matrix = rankcorr.correlation_matrix(table, method, aggregation=aggregation)
        with self._lock:
            self._matrix_cache[key] = matrix
        return matrix

    def correlation_payload(self, session, method, aggregation):
        if session.blinded:
            raise ApiError(403, "comparison views are disabled for blinded sessions")
        return self._matrix(method, aggregation).to_payload()

    def dendrogram_payload(self, session, method, aggregation):
        if session.blinded:
            raise ApiError(403, "comparison views are disabled for blinded sessions")
        dendro = clusterlab.average_linkage(self._matrix(method, aggregation))
        return dendro.to_payload()


def _query_flag(params, name, default=False):
    raw = params.get(name, [None])[0]
    if raw is None:
        return default
    return raw.lower() in ("1", "true", "yes")


def _query_int(params, name, default):
    raw = params.get(name, [None])[0]
    if raw is None:
        return default
    try:
        return int(raw)
    except ValueError:
        raise ApiError(400, f"parameter {name!r} must be an integer") from None


class _Handler(BaseHTTPRequestHandler):
    app: ExplorerService = None  # bound by make_server
    protocol_version = "HTTP/1.1"

    def log_message(self, *args):  # quiet
        pass

    def _send(self, status, payload):
        body = json.dumps(payload).encode("utf-8")
        self.send_response(status)
        self.send_header("Content-Type", "application/json; charset=utf-8")
        self.send_header("Content-Length", str(len(body)))
        self.send_header("Access-Control-Allow-Origin", "*")
        self.send_header("Access-Control-Allow-Headers", "Content-Type, X-Session-Id")
        self.end_headers()
        self.wfile.write(body)

    def _session(self):
        return self.app.session_from_header(self.headers.get("X-Session-Id"))

    def do_OPTIONS(self):
        self._send(200, {})

    def do_POST(self):
        try:
            if urlparse(self.path).path != "/session":
                raise ApiError(404, "not found")
            length = int(self.headers.get("Content-Length") or 0)
            body = self.rfile.read(length) if length else b""
            blinded = False
            if body:
                try:
                    blinded = bool(json.loads(body).get("blinded", False))
                except json.JSONDecodeError:
                    raise ApiError(400, "body must be JSON") from None
            session = self.app.create_session(blinded)
            self._send(200, {"session_id": session.id, "blinded": session.blinded})
        except ApiError as exc:
            self._send(exc.status, {"error": exc.message})

    def do_GET(self):
        try:
            url = urlparse(self.path)
            params = parse_qs(url.query)
            session = self._session()
            route = url.path.rstrip("/") or "/"
            if route == "/targets":
                payload = self.app.targets_payload()
            elif route == "/measures":
                payload = self.app.measures_payload(session)
            elif route == "/groups":
                payload = self.app.groups_payload(session)
            elif route == "/rules":
                target = params.get("target", [None])[0]
                measure = params.get("measure", [None])[0]
                if target is None or measure is None:
                    raise ApiError(400, "target and measure are required")
                payload = self.app.rules_payload(
                    session,
                    target,
                    measure,
                    _query_flag(params, "same_category"),
                    _query_int(params, "limit", 50),
                    _query_int(params, "offset", 0),
                )
            elif route == "/correlation":
                payload = self.app.correlation_payload(
                    session,
                    params.get("method", ["ndcc"])[0],
                    params.get("aggregation", [rankcorr.PER_TARGET])[0],
                )
            elif route == "/dendrogram":
                payload = self.app.dendrogram_payload(
                    session,
                    params.get("method", ["ndcc"])[0],
                    params.get("aggregation", [rankcorr.PER_TARGET])[0],
                )
            elif route == "/":
                payload = {
                    "service": "rulebench explorer api",
                    "endpoints": [
                        "POST /session",
                        "GET /targets",
                        "GET /measures",
                        "GET /groups",
                        "GET /rules",
                        "GET /correlation",
                        "GET /dendrogram",
                    ],
                }
            else:
                raise ApiError(404, "not found")
            self._send(200, payload)
        except ApiError as exc:
            self._send(exc.status, {"error": exc.message})


def make_server(app: ExplorerService, host="127.0.0.1", port=8765) -> ThreadingHTTPServer:
    handler = type("BoundHandler", (_Handler,), {"app": app})
    return ThreadingHTTPServer((host, port), handler)
