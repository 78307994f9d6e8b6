"""Command line front end for the annotation pipeline."""

from __future__ import annotations

import argparse
import csv
import json
import sys
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path

from .classifier import FixtureClassifier, HttpClassifier, MissingFixture
from .enrich import load_link_table
from .evaluation import MissingGold, extraction_rate, read_gold
from .inference import DEFAULT_MIN_POSTS, HistoryStore
from .ontology import ValidationError, load_ontology
from .pipeline import (
    annotate_stage,
    classify_stage,
    clean_stage,
    enrich_stage,
    evaluate_stage,
    infer_stage,
    read_jsonl,
    write_jsonl,
)
from .repository import QueryParseError, TripleStore, parse_query
from .triples import Iri, Literal, ParseError, serialize_ntriples

USAGE_ERROR = 1
DATA_ERROR = 2


class CliDataError(Exception):
    pass


def _read_config(path: str) -> dict[str, str]:
    """Minimal key=value config; '#' comments and blank lines skipped."""
    values = {}
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").split("\n"), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise CliDataError(f"{path}:{lineno}: expected key=value")
        key, _, value = line.partition("=")
        values[key.strip().replace("-", "_")] = value.strip().strip('"')
    return values


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ontopost",
        description="Ontology-based entity annotation and domain "
        "classification for short social posts.",
    )
    parser.add_argument("--config", help="key=value config file; flags override it")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, help_text):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--dataset", help="input dataset JSONL")
        p.add_argument("--ontology", action="append", default=None,
                       help="ontology triple file (repeatable)")
        p.add_argument("--fixtures", help="classifier fixture JSONL")
        p.add_argument("--classifier-url", help="live classifier endpoint")
        p.add_argument("--links", help="sameAs link table triple file")
        p.add_argument("--gold", help="gold label JSONL")
        p.add_argument("--history", help="user domain history JSON file")
        p.add_argument("--out", help="output directory", default=".")
        p.add_argument("--min-posts", type=int, default=DEFAULT_MIN_POSTS)
        p.add_argument("--top-k", type=int, default=1)
        p.add_argument("--serve-addr", default="127.0.0.1:8077")
        return p

    add("clean", "normalize dataset text")
    add("classify", "attach external classifier responses")
    add("infer-domains", "update per-user domain history")
    add("annotate", "produce the annotation dump")
    add("enrich", "emit enrichment triples")
    add("load", "build the repository file")
    q = add("query", "run a query against a repository file")
    q.add_argument("--repository", help="repository triple file")
    q.add_argument("query_text", nargs="?", help="query string ('-' for stdin)")
    add("evaluate", "compute metrics against gold labels")
    add("report", "render markdown + CSV tables")
    add("pipeline", "run all stages in order")
    s = add("serve", "expose the repository over HTTP")
    s.add_argument("--repository", help="repository triple file")
    return parser


def _require(args, name: str) -> str:
    value = getattr(args, name, None)
    if not value:
        raise SystemExit(f"ontopost: --{name.replace('_', '-')} is required")
    return value


def _classifier(args):
    if getattr(args, "fixtures", None):
        return FixtureClassifier(args.fixtures)
    if getattr(args, "classifier_url", None):
        return HttpClassifier(args.classifier_url)
    raise SystemExit("ontopost: --fixtures or --classifier-url is required")


def _ontologies(args):
    paths = getattr(args, "ontology", None)
    if not paths:
        raise SystemExit("ontopost: --ontology is required")
    return [load_ontology(p) for p in paths]


def _out_dir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _cmd_clean(args) -> Path:
    records = clean_stage(read_jsonl(_require(args, "dataset")))
    path = _out_dir(args) / "cleaned.jsonl"
    write_jsonl(path, records)
    return path


def _cmd_classify(args, cleaned=None) -> Path:
    out = _out_dir(args)
    cleaned = cleaned if cleaned is not None else read_jsonl(out / "cleaned.jsonl")
    records = classify_stage(cleaned, _classifier(args))
    path = out / "classified.jsonl"
    write_jsonl(path, records)
    return path


def _cmd_infer(args, classified=None) -> Path:
    out = _out_dir(args)
    classified = (
        classified if classified is not None else read_jsonl(out / "classified.jsonl")
    )
    history_path = Path(args.history) if args.history else out / "history.json"
    store = HistoryStore.load(history_path)
    infer_stage(classified, store)
    store.save(history_path)
    return history_path


def _cmd_annotate(args, classified=None) -> Path:
    out = _out_dir(args)
    classified = (
        classified if classified is not None else read_jsonl(out / "classified.jsonl")
    )
    dump = annotate_stage(classified, _ontologies(args))
    path = out / "annotations.jsonl"
    write_jsonl(path, dump)
    return path


def _cmd_enrich(args, dump=None) -> Path:
    out = _out_dir(args)
    dump = dump if dump is not None else read_jsonl(out / "annotations.jsonl")
    links = load_link_table(args.links) if args.links else {}
    triples = enrich_stage(dump, _ontologies(args), links)
    path = out / "enrichment.nt"
    path.write_text(serialize_ntriples(triples), encoding="utf-8")
    return path


def _cmd_load(args) -> Path:
    out = _out_dir(args)
    store = TripleStore()
    store.load(out / "enrichment.nt")
    path = out / "repository.nt"
    store.persist(path)
    return path


def _row_to_json(t) -> dict:
    return {
        "s": t.subject.value,
        "p": t.predicate.value,
        "o": t.object.value,
        "o_kind": "literal" if isinstance(t.object, Literal) else "iri",
    }


def _cmd_query(args) -> int:
    repo = args.repository or str(Path(args.out) / "repository.nt")
    store = TripleStore()
    store.load(repo)
    text = args.query_text
    if text in (None, "-"):
        text = sys.stdin.read()
    rows = store.query(parse_query(text))
    for row in rows:
        print(json.dumps(_row_to_json(row), ensure_ascii=False))
    return 0


def _cmd_evaluate(args, dump=None) -> Path:
    out = _out_dir(args)
    dump = dump if dump is not None else read_jsonl(out / "annotations.jsonl")
    gold = read_gold(_require(args, "gold"))
    results = evaluate_stage(dump, gold)
    path = out / "metrics.json"
    path.write_text(json.dumps(results, indent=2, sort_keys=True) + "\n",
                    encoding="utf-8")
    return path


_CATEGORY_ROWS = {
    1: "classifier domain, ontology annotated",
    2: "classifier NON-domain, ontology annotated",
    3: "classifier domain, NOT ontology annotated",
    4: "classifier NON-domain, NOT ontology annotated",
}


def _cmd_report(args) -> Path:
    out = _out_dir(args)
    dump = read_jsonl(out / "annotations.jsonl")
    gold = read_gold(_require(args, "gold"))
    results = evaluate_stage(dump, gold)
    sample_size = len(dump)

    from .annotate import Source
    from .evaluation import entity_counts

    per_category: dict[int, dict[str, int]] = {}
    for cat in (1, 2, 3, 4):
        subset = [p for p in dump if int(p["category"]) == cat]
        subset_gold = [g for g in gold if g.post_id in {p["id"] for p in subset}]
        per_category[cat] = {
            name: entity_counts(subset, subset_gold, source).correct
            for name, source in (
                ("external", Source.EXTERNAL),
                ("ontology", Source.ONTOLOGY),
                ("combined", None),
            )
        }

    lines = ["# Evaluation report", "", "## Correct extracted entities", ""]
    lines.append("| Category | Classifier | Ontology | Combined |")
    lines.append("| --- | --- | --- | --- |")
    totals = {"external": 0, "ontology": 0, "combined": 0}
    csv_rows = [["category", "classifier", "ontology", "combined"]]
    for cat in (1, 2, 3, 4):
        row = per_category[cat]
        for key in totals:
            totals[key] += row[key]
        lines.append(
            f"| {_CATEGORY_ROWS[cat]} | {row['external']} | {row['ontology']} "
            f"| {row['combined']} |"
        )
        csv_rows.append(
            [str(cat), str(row["external"]), str(row["ontology"]),
             str(row["combined"])]
        )
    lines.append(
        f"| Total | {totals['external']} | {totals['ontology']} "
        f"| {totals['combined']} |"
    )
    if sample_size:
        rates = {
            key: extraction_rate(totals[key], sample_size) for key in totals
        }
        lines.append(
            f"| % correct (sample {sample_size}) | {rates['external']}% "
            f"| {rates['ontology']}% | {rates['combined']}% |"
        )

    lines += ["", "## Retrieval metrics", ""]
    lines.append("| Source | Correct | Incorrect | Missing | Precision | Recall | F |")
    lines.append("| --- | --- | --- | --- | --- | --- | --- |")
    for name in ("external", "ontology", "combined"):
        src = results["sources"][name]

        def fmt(metric):
            if metric in src["degenerate"]:
                return "n/a"
            return f"{src[metric]:.4f}"

        f_val = ("n/a" if src["degenerate"] else f"{src['f_measure']:.4f}")
        lines.append(
            f"| {name} | {src['correct']} | {src['incorrect']} | {src['missing']} "
            f"| {fmt('precision')} | {fmt('recall')} | {f_val} |"
        )

    lines += ["", "## Domain classification by category", ""]
    lines.append("| Category | Posts | % judged domain-relevant |")
    lines.append("| --- | --- | --- |")
    for cat in (1, 2, 3, 4):
        entry = results["categories"][str(cat)]
        percent = "n/a" if entry["percent"] is None else f"{entry['percent']}%"
        lines.append(f"| {_CATEGORY_ROWS[cat]} | {entry['size']} | {percent} |")

    report_path = out / "report.md"
    report_path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    with open(out / "report_correct_entities.csv", "w", newline="",
              encoding="utf-8") as fh:
        csv.writer(fh).writerows(csv_rows)
    with open(out / "report_categories.csv", "w", newline="",
              encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["category", "size", "percent_domain_relevant"])
        for cat in (1, 2, 3, 4):
            entry = results["categories"][str(cat)]
            writer.writerow([cat, entry["size"], entry["percent"]])
    return report_path


def _cmd_pipeline(args) -> int:
    cleaned = clean_stage(read_jsonl(_require(args, "dataset")))
    out = _out_dir(args)
    write_jsonl(out / "cleaned.jsonl", cleaned)
    classified = classify_stage(cleaned, _classifier(args))
    write_jsonl(out / "classified.jsonl", classified)
    _cmd_infer(args, classified)
    dump = annotate_stage(classified, _ontologies(args))
    write_jsonl(out / "annotations.jsonl", dump)
    _cmd_enrich(args, dump)
    _cmd_load(args)
    if args.gold:
        _cmd_evaluate(args, dump)
    return 0


class _QueryHandler(BaseHTTPRequestHandler):
    store: TripleStore = None  # type: ignore[assignment]

    def do_POST(self):  # noqa: N802  (http.server API)
        if self.path != "/query":
            self.send_error(404)
            return
        length = int(self.headers.get("Content-Length", "0"))
        body = self.rfile.read(length).decode("utf-8")
        try:
            rows = self.store.query(parse_query(body))
        except QueryParseError as exc:
            payload = json.dumps({"error": str(exc)}).encode("utf-8")
            self.send_response(400)
            self.send_header("Content-Type", "application/json")
            self.send_header("Content-Length", str(len(payload)))
            self.end_headers()
            self.wfile.write(payload)
            return
        payload = json.dumps(
            [_row_to_json(t) for t in rows], ensure_ascii=False
        ).encode("utf-8")
        self.send_response(200)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(payload)))
        self.end_headers()
        self.wfile.write(payload)

    def log_message(self, *_args):
        pass


def make_server(store: TripleStore, host: str, port: int) -> ThreadingHTTPServer:
    handler = type("BoundQueryHandler", (_QueryHandler,), {"store": store})
    return ThreadingHTTPServer((host, port), handler)


def _cmd_serve(args) -> int:
    repo = args.repository or str(Path(args.out) / "repository.nt")
    store = TripleStore()
    store.load(repo)
    host, _, port = args.serve_addr.partition(":")
    server = make_server(store, host or "127.0.0.1", int(port or "8077"))
    print(f"serving {repo} on http://{host}:{port}/query")
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        server.server_close()
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    if args.config:
        try:
            defaults = _read_config(args.config)
        except (OSError, CliDataError) as exc:
            print(f"ontopost: {exc}", file=sys.stderr)
            return DATA_ERROR
        flag_defaults = {
            "out": ".",
            "min_posts": DEFAULT_MIN_POSTS,
            "top_k": 1,
            "serve_addr": "127.0.0.1:8077",
        }
        for key, value in defaults.items():
            if key == "ontology":
                value = value.split(",")
            elif key in ("min_posts", "top_k"):
                value = int(value)
            if getattr(args, key, None) in (None, [], flag_defaults.get(key)):
                setattr(args, key, value)

    commands = {
        "clean": _cmd_clean,
        "classify": _cmd_classify,
        "infer-domains": _cmd_infer,
        "annotate": _cmd_annotate,
        "enrich": _cmd_enrich,
        "load": _cmd_load,
        "query": _cmd_query,
        "evaluate": _cmd_evaluate,
        "report": _cmd_report,
        "pipeline": _cmd_pipeline,
        "serve": _cmd_serve,
    }
    try:
        result = commands[args.command](args)
    except SystemExit as exc:
        if isinstance(exc.code, str):
            print(exc.code, file=sys.stderr)
            return USAGE_ERROR
        raise
    except (
        ParseError,
        QueryParseError,
        ValidationError,
        MissingFixture,
        MissingGold,
        CliDataError,
        FileNotFoundError,
        json.JSONDecodeError,
    ) as exc:
        print(f"ontopost: {exc}", file=sys.stderr)
        return DATA_ERROR
    if isinstance(result, Path):
        print(result)
        return 0
    return int(result or 0)


if __name__ == "__main__":
    sys.exit(main())
