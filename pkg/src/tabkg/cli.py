"""Command-line entry point: ``tabkg <subcommand> ...``.

Every stage reads and writes plain files, so a human can edit an
intermediate output (typically the HTML table) and re-run the next stage.
Exit codes: 0 success, 1 validation or metric threshold failure, 2 input
errors.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import yaml

from . import __version__
from .errors import TabKGError
from .extract import (
    RecordFile,
    load_schema,
    provenance_stats,
    read_records,
    rule_backend,
    http_backend,
    run_extraction,
    write_records,
)
from .extract.stats import ProvenanceStats
from .kg import (
    build_assertion_graph,
    build_provenance_graph,
    closure_problems,
    drop_unknown_cells,
    load_namespaces,
    namespaces_from_dict,
    serialize_quads,
)
from .metrics import CostModel, ImageMetrics, MetricsReport, ie_scores, mean_average_precision, ted_score
from .overlay import overlay_svg
from .pagexml import PageDocument, merge_pages, read_page, write_page
from .reconstruct import DEFAULT_THRESHOLD, build_table, reconstruct
from .shacl import load_shapes, load_shapes_file, provenance_shapes_turtle, validate
from .table import LogicalTable, from_html, to_html

log = logging.getLogger("tabkg")

EXIT_OK, EXIT_FAIL, EXIT_INPUT = 0, 1, 2
SHAPES_FILE = Path(__file__).parent / "data" / "provenance_shapes.ttl"


@dataclass
class Summary:
    command: str
    parameters: dict
    documents: list = field(default_factory=list)
    errors: list = field(default_factory=list)
    extra: dict = field(default_factory=dict)

    def write(self, out_dir: Path) -> None:
        payload = {
            "command": self.command,
            "version": __version__,
            "parameters": self.parameters,
            "documents": self.documents,
            "errors": self.errors,
            **self.extra,
        }
        (out_dir / "run_summary.json").write_text(
            json.dumps(payload, indent=2, ensure_ascii=False, default=str) + "\n", encoding="utf-8")


def _stem(path) -> str:
    name = Path(path).name
    for suffix in (".records.json", ".json", ".html", ".htm", ".xml"):
        if name.endswith(suffix):
            return name[: -len(suffix)]
    return Path(path).stem


def _record_files(paths) -> list:
    # shell globs like ex/*.json also pick up the run summary
    return [p for p in paths if Path(p).name != "run_summary.json"]


def _setting(args, config: dict, name: str, default=None):
    value = getattr(args, name, None)
    if value is not None:
        return value
    return config.get(name, default)


def _load_config(path) -> dict:
    if not path:
        return {}
    with open(path, encoding="utf-8") as fh:
        return yaml.safe_load(fh) or {}


def _pool(workers: int):
    return ThreadPoolExecutor(max_workers=max(1, workers))


# -- reconstruct ---------------------------------------------------------------

def _reconstruct_one(name: str, doc: PageDocument, threshold: float, relative_to: str,
                     xml_out: Path, html_out: Path, report_dir: Path) -> dict:
    result = reconstruct(doc, threshold, relative_to)
    write_page(result.page, xml_out)
    html_out.write_text(to_html(result.table) + "\n", encoding="utf-8")
    if result.unassigned:
        (report_dir / f"{name}.unassigned.txt").write_text(
            "\n".join(result.unassigned) + "\n", encoding="utf-8")
    return {
        "document": name,
        "cells": len(doc.cells),
        "lines": len(doc.lines),
        "unassigned_lines": list(result.unassigned),
        "dropped_regions": doc.dropped_regions,
        "outputs": [str(xml_out), str(html_out)],
    }


def cmd_reconstruct(args, config) -> int:
    threshold = float(_setting(args, config, "threshold", DEFAULT_THRESHOLD))
    relative_to = _setting(args, config, "relative_to", "line")
    workers = int(_setting(args, config, "workers", 1))
    out_dir = Path(args.out_dir or (Path(args.out).parent if args.out else "."))
    summary = Summary("reconstruct", {"threshold": threshold, "relative_to": relative_to})

    jobs = []
    if args.cells or args.lines:
        if not (args.cells and args.lines):
            log.error("--cells and --lines must be given together")
            return EXIT_INPUT
        name = _stem(args.cells)
        xml_out = Path(args.out) if args.out else out_dir / f"{name}.xml"
        html_out = Path(args.html) if args.html else out_dir / f"{name}.html"
        jobs.append((name, ("pair", args.cells, args.lines), xml_out, html_out))
    pages = list(args.pages or []) + list(args.page or [])
    for p in pages:
        name = _stem(p)
        single = len(pages) == 1 and not jobs
        xml_out = Path(args.out) if (single and args.out) else out_dir / f"{name}.xml"
        html_out = Path(args.html) if (single and args.html) else out_dir / f"{name}.html"
        jobs.append((name, ("page", p), xml_out, html_out))

    if not jobs:
        return EXIT_OK
    out_dir.mkdir(parents=True, exist_ok=True)

    def run(job):
        name, src, xml_out, html_out = job
        try:
            if src[0] == "pair":
                doc = merge_pages(read_page(src[1]), read_page(src[2]))
            else:
                doc = read_page(src[1])
            return _reconstruct_one(name, doc, threshold, relative_to, xml_out, html_out, out_dir)
        except (TabKGError, OSError) as exc:
            return {"document": name, "error": f"{type(exc).__name__}: {exc}"}

    with _pool(workers) as pool:
        results = list(pool.map(run, jobs))
    for r in results:
        (summary.errors if "error" in r else summary.documents).append(r)
    for e in summary.errors:
        log.error("%s: %s", e["document"], e["error"])
    summary.write(out_dir)
    return EXIT_INPUT if summary.errors else EXIT_OK


# -- extract -------------------------------------------------------------------

def load_table(path) -> tuple[LogicalTable, str]:
    """Table and image reference from an HTML table or a (merged) PageXML file.

    For HTML the image reference comes from a PageXML file with the same stem
    next to it, when there is one.
    """
    path = Path(path)
    raw = path.read_bytes()
    head = raw.lstrip()[:200].lower()
    if path.suffix.lower() in (".html", ".htm") or head.startswith(b"<table"):
        sibling = path.with_name(_stem(path) + ".xml")
        image_ref = read_page(sibling).image_ref if sibling.exists() else ""
        return from_html(raw.decode("utf-8")), image_ref
    doc = read_page(path)
    if doc.cell_text:
        assignment = {lid: cid for cid, lids in doc.cell_text.items() for lid in lids}
        _, table = build_table(doc, assignment)
    else:
        table = reconstruct(doc).table
    return table, doc.image_ref


def _make_backend(args, config, schema):
    kind = _setting(args, config, "backend", "rule")
    if kind == "rule":
        return rule_backend(schema)
    if kind == "http":
        endpoint = _setting(args, config, "endpoint")
        if not endpoint:
            raise TabKGError("http backend needs --endpoint")
        return http_backend(endpoint, _setting(args, config, "model", ""),
                            float(_setting(args, config, "timeout", 30.0)))
    raise TabKGError(f"unknown backend {kind!r}")


def cmd_extract(args, config) -> int:
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    try:
        schema = load_schema(_setting(args, config, "schema"))
        backend = _make_backend(args, config, schema)
    except (TabKGError, OSError, TypeError) as exc:
        log.error("cannot load schema/backend: %s", exc)
        return EXIT_INPUT
    mode = _setting(args, config, "mode", "row")
    workers = int(_setting(args, config, "workers", 1))
    summary = Summary("extract", {"schema": str(_setting(args, config, "schema")),
                                  "backend": type(backend).__name__, "mode": mode})

    def run(path):
        name = _stem(path)
        try:
            table, image_ref = load_table(path)
            result = run_extraction(table, schema, backend, mode=mode)
        except (TabKGError, OSError, UnicodeDecodeError) as exc:
            return {"document": name, "error": f"{type(exc).__name__}: {exc}"}
        rf = RecordFile(name, image_ref or name, schema.entity_type, result.records)
        out = out_dir / f"{name}.json"
        write_records(rf, out)
        return {
            "document": name,
            "records": len(result.records),
            "empty_rows": result.empty_rows,
            "failed_rows": [{"row": f.row, "error": f.message} for f in result.failed_rows],
            "warnings": [{"row": w.row, "message": w.message} for w in result.warnings],
            "output": str(out),
        }

    with _pool(workers) as pool:
        results = list(pool.map(run, args.inputs))
    for r in results:
        (summary.errors if "error" in r else summary.documents).append(r)
        if r.get("failed_rows"):
            summary.errors.append({"document": r["document"], "backend_failures": r["failed_rows"]})
    for e in summary.errors:
        log.error("%s: %s", e["document"], e.get("error") or e.get("backend_failures"))
    summary.write(out_dir)
    hard = [e for e in summary.errors if "error" in e]
    return EXIT_INPUT if hard else EXIT_OK


# -- build-kg ------------------------------------------------------------------

def _find_page(pages_dir: Optional[Path], rf: RecordFile, record_path: Path) -> Optional[Path]:
    if pages_dir is None:
        return None
    for name in (rf.document, _stem(record_path)):
        candidate = pages_dir / f"{name}.xml"
        if candidate.exists():
            return candidate
    return None


def cmd_build_kg(args, config) -> int:
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    try:
        schema = load_schema(_setting(args, config, "schema"))
        ns = namespaces_from_dict(
            _load_config(args.namespaces) if args.namespaces else config.get("namespaces"))
        shapes_path = _setting(args, config, "shapes")
        shapes = load_shapes_file(shapes_path) if shapes_path else load_shapes(provenance_shapes_turtle(ns))
    except (TabKGError, OSError) as exc:
        log.error("cannot load inputs: %s", exc)
        return EXIT_INPUT
    fmt = _setting(args, config, "format", "trig")
    ext = "trig" if fmt == "trig" else "nq"
    pages_dir = Path(args.pages) if args.pages else None
    default_copy = bool(_setting(args, config, "default_graph", False))
    summary = Summary("build-kg", {"format": fmt, "namespaces": ns.prefixes(), "base": ns.base,
                                   "default_graph_copy": default_copy})
    all_quads = []
    all_prov = []
    for path in _record_files(args.records):
        path = Path(path)
        try:
            rf = read_records(path)
        except (OSError, ValueError, KeyError) as exc:
            summary.errors.append({"document": _stem(path), "error": f"{type(exc).__name__}: {exc}"})
            continue
        doc = rf.document or _stem(path)
        entry = {"document": doc}
        records = rf.records
        page = None
        page_path = _find_page(pages_dir, rf, path)
        if page_path is not None:
            try:
                page = read_page(page_path)
            except TabKGError as exc:
                summary.errors.append({"document": doc, "error": f"{type(exc).__name__}: {exc}"})
                continue
        if page is None:
            page = PageDocument(rf.image_ref or doc, 0, 0)
            entry["warning"] = "no PageXML found; cell provenance reduced to row level"
        records, dangling = drop_unknown_cells(records, page)
        if dangling:
            entry["unknown_cells"] = sorted(set(dangling))
            log.warning("%s: unknown cell id(s) %s; row-level provenance substituted",
                        doc, ", ".join(sorted(set(dangling))))
        try:
            quads, contexts = build_assertion_graph(records, schema, doc, ns, default_copy)
            prov_quads = build_provenance_graph(contexts, page, doc, ns, image_ref=rf.image_ref or page.image_ref)
        except TabKGError as exc:
            summary.errors.append({"document": doc, "error": f"{type(exc).__name__}: {exc}"})
            continue
        a_out = out_dir / f"{_stem(path)}.assertions.{ext}"
        p_out = out_dir / f"{_stem(path)}.provenance.{ext}"
        a_out.write_bytes(serialize_quads(quads, fmt, ns.prefixes()))
        p_out.write_bytes(serialize_quads(prov_quads, fmt, ns.prefixes()))
        report = validate(prov_quads, shapes)
        entry.update({
            "assertion_quads": len(quads),
            "provenance_quads": len(prov_quads),
            "named_graphs": len(contexts),
            "closure_problems": closure_problems(quads, prov_quads, ns),
            "conforms": report.conforms,
            "violations": [v.__dict__ for v in report.violations],
            "outputs": [str(a_out), str(p_out)],
        })
        summary.documents.append(entry)
        all_quads.extend(quads)
        all_prov.extend(prov_quads)

    (out_dir / f"corpus.{ext}").write_bytes(serialize_quads(all_quads + all_prov, fmt, ns.prefixes()))
    corpus_report = validate(all_prov, shapes)
    summary.extra["conforms"] = corpus_report.conforms
    summary.extra["violations"] = len(corpus_report.violations)
    summary.write(out_dir)
    print(f"conforms: {str(corpus_report.conforms).lower()}")
    if summary.errors:
        for e in summary.errors:
            log.error("%s: %s", e["document"], e["error"])
        return EXIT_INPUT
    return EXIT_OK if corpus_report.conforms else EXIT_FAIL


# -- evaluation ----------------------------------------------------------------

_EVAL_SUFFIXES = {
    "cells": (".xml",),
    "table": (".html", ".htm", ".xml"),
    "ie": (".json",),
}


def _index_dir(d: Path, suffixes) -> dict[str, Path]:
    out = {}
    for p in sorted(d.iterdir()):
        if p.is_file() and p.suffix.lower() in suffixes and not p.name.startswith("run_summary"):
            out.setdefault(_stem(p), p)
    return out


def cmd_eval(pred_dir, gt_dir, which: str, sim_threshold: float = 0.6,
             threshold: float = DEFAULT_THRESHOLD) -> tuple[MetricsReport, list[str]]:
    """Score matching files of ``pred_dir`` against ``gt_dir``.

    Returns the report and a list of problems (files without a counterpart).
    """
    kinds = ("cells", "table", "ie") if which == "all" else (which,)
    suffixes = tuple(s for k in kinds for s in _EVAL_SUFFIXES[k])
    pred = _index_dir(Path(pred_dir), suffixes)
    gt = _index_dir(Path(gt_dir), suffixes)
    problems = [f"no ground truth for {n}" for n in sorted(pred.keys() - gt.keys())]
    problems += [f"no prediction for {n}" for n in sorted(gt.keys() - pred.keys())]
    report = MetricsReport()
    for name in sorted(pred.keys() & gt.keys()):
        row = ImageMetrics(name)
        p, g = pred[name], gt[name]
        if "cells" in kinds and p.suffix == ".xml" and g.suffix == ".xml":
            pd, gd = read_page(p), read_page(g)
            row.map = mean_average_precision([c.outline for c in pd.cells], [c.outline for c in gd.cells])
        if "table" in kinds and p.suffix != ".json":
            pt, _ = load_table(p)
            gtab, _ = load_table(g)
            row.ted = ted_score(pt, gtab, CostModel.CONTENT)
            row.ted_struct = ted_score(pt, gtab, CostModel.STRUCT)
        if "ie" in kinds and p.suffix == ".json":
            pr, rc, f1 = ie_scores(read_records(p).records, read_records(g).records, sim_threshold)
            row.ie_precision, row.ie_recall, row.ie_f1 = pr, rc, f1
        report.images.append(row)
    return report, problems


def _run_eval(args, config, which: str) -> int:
    sim = float(_setting(args, config, "sim_threshold", 0.6))
    try:
        report, problems = cmd_eval(args.pred_dir, args.gt_dir, which, sim)
    except (TabKGError, OSError) as exc:
        log.error("%s", exc)
        return EXIT_INPUT
    for p in problems:
        log.error(p)
    if not report.images:
        log.error("no matching files between %s and %s", args.pred_dir, args.gt_dir)
        return EXIT_INPUT
    tsv = report.to_tsv()
    sys.stdout.write(tsv)
    if args.out_dir:
        out = Path(args.out_dir)
        out.mkdir(parents=True, exist_ok=True)
        (out / f"eval_{which}.tsv").write_text(tsv, encoding="utf-8")
        (out / f"eval_{which}.json").write_text(report.to_json(), encoding="utf-8")
    if problems:
        return EXIT_INPUT
    if args.min_score is not None:
        for col in report.columns():
            mean = report.mean(col)
            if mean is not None and mean < args.min_score:
                log.error("mean %s %.4f below --min-score %.4f", col, mean, args.min_score)
                return EXIT_FAIL
    return EXIT_OK


# -- stats / overlay / validate ---------------------------------------------------

STATS_COLUMNS = ("instances", "properties", "properties_per_instance",
                 "cell_provenance", "cell_provenance_ratio")


def stats_table(files) -> str:
    lines = ["\t".join(("document", *STATS_COLUMNS))]
    total = ProvenanceStats()

    def fmt(st: ProvenanceStats, name: str) -> str:
        return "\t".join((name, str(st.instances), str(st.properties),
                          f"{st.properties_per_instance:.4f}", str(st.cell_provenance),
                          f"{st.cell_provenance_ratio:.4f}"))

    for path in files:
        st = provenance_stats(read_records(path).records)
        total = total + st
        lines.append(fmt(st, _stem(path)))
    lines.append(fmt(total, "total"))
    return "\n".join(lines) + "\n"


def cmd_stats(args, config) -> int:
    try:
        table = stats_table(_record_files(args.records))
    except (OSError, ValueError, KeyError) as exc:
        log.error("%s", exc)
        return EXIT_INPUT
    if args.out:
        Path(args.out).write_text(table, encoding="utf-8")
    sys.stdout.write(table)
    return EXIT_OK


def cmd_overlay(args, config) -> int:
    try:
        doc = read_page(args.page)
    except (TabKGError, OSError) as exc:
        log.error("%s", exc)
        return EXIT_INPUT
    Path(args.out).write_text(overlay_svg(doc, show_lines=args.lines), encoding="utf-8")
    return EXIT_OK


def cmd_validate(args, config) -> int:
    import rdflib

    from .kg.terms import IRI, BNode, Literal, Quad

    def conv(t):
        if isinstance(t, rdflib.URIRef):
            return IRI(str(t))
        if isinstance(t, rdflib.BNode):
            return BNode(str(t))
        if isinstance(t, rdflib.Literal):
            return Literal(str(t), str(t.datatype) if t.datatype else None, t.language)
        raise TabKGError(f"unsupported term {t!r}")

    try:
        if args.shapes:
            shapes = load_shapes_file(args.shapes)
        elif args.namespaces:
            shapes = load_shapes(provenance_shapes_turtle(load_namespaces(args.namespaces)))
        else:
            shapes = load_shapes(SHAPES_FILE.read_bytes())
        ds = rdflib.Dataset()
        for path in args.data:
            fmt = "nquads" if str(path).endswith((".nq", ".nquads")) else "trig"
            ds.parse(path, format=fmt)
        quads = [Quad(conv(s), conv(p), conv(o)) for s, p, o, _ in ds.quads((None, None, None, None))]
    except Exception as exc:  # parser errors from rdflib are not uniform
        log.error("%s", exc)
        return EXIT_INPUT
    report = validate(quads, shapes)
    sys.stdout.write(report.to_text())
    return EXIT_OK if report.conforms else EXIT_FAIL


# -- argument parsing ------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="tabkg", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"tabkg {__version__}")
    p.add_argument("--config", help="YAML file with default settings; flags win")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("reconstruct", help="merge cell regions and text lines into a table")
    r.add_argument("pages", nargs="*", help="PageXML files holding both cells and lines")
    r.add_argument("--page", action="append", help="PageXML file (repeatable)")
    r.add_argument("--cells", help="PageXML with table cells")
    r.add_argument("--lines", help="PageXML with text lines")
    r.add_argument("--threshold", type=float)
    r.add_argument("--relative-to", choices=("line", "cell"))
    r.add_argument("--out", help="merged PageXML path (single document)")
    r.add_argument("--html", help="HTML table path (single document)")
    r.add_argument("--out-dir")
    r.add_argument("--workers", type=int)
    r.set_defaults(func=cmd_reconstruct)

    e = sub.add_parser("extract", help="row-level entity extraction")
    e.add_argument("inputs", nargs="*", help="HTML tables or merged PageXML files")
    e.add_argument("--schema")
    e.add_argument("--backend", choices=("rule", "http"))
    e.add_argument("--endpoint")
    e.add_argument("--model")
    e.add_argument("--timeout", type=float)
    e.add_argument("--mode", choices=("row", "cell"))
    e.add_argument("--workers", type=int)
    e.add_argument("--out-dir", required=True)
    e.set_defaults(func=cmd_extract)

    k = sub.add_parser("build-kg", help="assertion and provenance graphs")
    k.add_argument("records", nargs="*")
    k.add_argument("--schema")
    k.add_argument("--pages", help="directory of merged PageXML files")
    k.add_argument("--namespaces", help="YAML namespace configuration")
    k.add_argument("--shapes", help="SHACL shapes (Turtle); defaults to the shipped provenance shapes")
    k.add_argument("--format", choices=("trig", "nquads"))
    k.add_argument("--default-graph", action="store_true", default=None,
                   help="also copy every assertion into the default graph")
    k.add_argument("--out-dir", required=True)
    k.set_defaults(func=cmd_build_kg)

    for which, helptext in (("cells", "cell detection mAP"), ("table", "TED and TEDS-Struct"),
                            ("ie", "information extraction P/R/F1")):
        ev = sub.add_parser(f"eval-{which}", help=helptext)
        ev.add_argument("pred_dir")
        ev.add_argument("gt_dir")
        ev.add_argument("--out-dir")
        ev.add_argument("--min-score", type=float)
        if which == "ie":
            ev.add_argument("--sim-threshold", type=float)
        ev.set_defaults(func=lambda a, c, w=which: _run_eval(a, c, w))

    s = sub.add_parser("stats", help="assertion graph statistics from record files")
    s.add_argument("records", nargs="*")
    s.add_argument("--out")
    s.set_defaults(func=cmd_stats)

    o = sub.add_parser("overlay", help="SVG overlay of cell regions")
    o.add_argument("page")
    o.add_argument("--out", required=True)
    o.add_argument("--lines", action="store_true", help="also draw text-line polygons")
    o.set_defaults(func=cmd_overlay)

    v = sub.add_parser("validate", help="check TriG/N-Quads files against SHACL shapes")
    v.add_argument("data", nargs="+")
    v.add_argument("--shapes", help="SHACL shapes (Turtle); default: provenance shapes for --namespaces")
    v.add_argument("--namespaces", help="YAML namespace configuration used to build the default shapes")
    v.set_defaults(func=cmd_validate)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        config = _load_config(args.config)
    except (OSError, yaml.YAMLError) as exc:
        log.error("cannot read config: %s", exc)
        return EXIT_INPUT
    section = {**{k: v for k, v in config.items() if not isinstance(v, dict) or k == "namespaces"},
               **(config.get(args.command) or {})}
    return args.func(args, section)


if __name__ == "__main__":
    sys.exit(main())
