import json
import random
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

import pytest

from tabkg.errors import BackendFailure, InvalidPattern, SchemaError
from tabkg.extract import (
    Candidate,
    EntityRecord,
    NestedValue,
    PropertyValue,
    RecordFile,
    ValueProvenance,
    dumps_records,
    extract_document,
    http_backend,
    loads_records,
    provenance_stats,
    restore_cell_provenance,
    rule_backend,
    run_extraction,
    schema_from_dict,
)
from tabkg.extract.stats import ProvenanceStats
from tabkg.reconstruct import reconstruct
from tabkg.table import LogicalTable, TableCell, row_text


def tbl(rows):
    return LogicalTable.from_cells(
        TableCell(r, c, text=t, source_cell_id=f"c{r}{c}") for r, row in enumerate(rows) for c, t in enumerate(row))


NAME_PLACE = schema_from_dict({
    "entity_type": "Person",
    "properties": [{"name": "name", "column": 0}, {"name": "place", "column": 1}],
})


class StubBackend:
    def __init__(self, answers):
        self.answers = answers

    def extract(self, row, schema):
        out = self.answers.get(row.row, [])
        if isinstance(out, Exception):
            raise out
        return out


def test_rule_backend_column_bindings():
    t = tbl([["Jan", "Amsterdam"], ["Piet", "Leiden"]])
    records = extract_document(t, NAME_PLACE, rule_backend(NAME_PLACE))
    assert len(records) == 2
    first = records[0]
    assert [(v.property, v.value, v.provenance.cell_id, v.provenance.span) for v in first.values] == [
        ("name", "Jan", "c00", (0, 3)), ("place", "Amsterdam", "c01", (4, 13))]


def test_pattern_binding():
    schema = schema_from_dict({"entity_type": "P", "properties": [
        {"name": "date", "pattern": r"\d{2}-\d{2}-\d{4}"}]})
    t = tbl([["born 12-03-1821 at Delft"]])
    (cand,) = rule_backend(schema).extract(row_text(t, 0), schema)
    assert cand == Candidate("date", "12-03-1821", (5, 15))
    assert rule_backend(schema).extract(row_text(tbl([["no date"]]), 0), schema) == []


def test_pattern_group_and_cell_scope():
    schema = schema_from_dict({"entity_type": "P", "properties": [
        {"name": "year", "column": 1, "pattern": r"(\d{4})"}]})
    t = tbl([["1700", "born 1821"]])
    (cand,) = rule_backend(schema).extract(row_text(t, 0), schema)
    assert cand == Candidate("year", "1821", (10, 14))


def test_invalid_pattern():
    with pytest.raises(InvalidPattern):
        schema_from_dict({"entity_type": "P", "properties": [{"name": "x", "pattern": "("}]})


def test_schema_errors():
    with pytest.raises(SchemaError):
        schema_from_dict({"properties": []})
    with pytest.raises(SchemaError):
        schema_from_dict({"entity_type": "P", "properties": [{"name": "a"}, {"name": "a"}]})
    with pytest.raises(SchemaError):
        schema_from_dict({"entity_type": "P", "properties": [
            {"name": "a", "attributes": [{"name": "b"}]}]})


def test_empty_row_yields_no_record():
    t = tbl([["Jan", "Amsterdam"], ["", ""], ["Piet", ""]])
    run = run_extraction(t, NAME_PLACE, rule_backend(NAME_PLACE))
    assert [r.row_index for r in run.records] == [0, 2]
    assert run.empty_rows == [1]


def test_unknown_property_discarded(caplog):
    t = tbl([["Jan", "Amsterdam"]])
    backend = StubBackend({0: [Candidate("name", "Jan", (0, 3)), Candidate("shoe_size", "42")]})
    run = run_extraction(t, NAME_PLACE, backend)
    assert [v.property for v in run.records[0].values] == ["name"]
    assert "shoe_size" in caplog.text
    assert run.warnings and "shoe_size" in run.warnings[0].message


def test_placeholders_filtered():
    t = tbl([["Jan", "Amsterdam"]])
    backend = StubBackend({0: [Candidate("name", "Jan"), Candidate("place", "Not Mentioned"),
                               Candidate("place", "  ")]})
    (rec,) = extract_document(t, NAME_PLACE, backend)
    assert [v.value for v in rec.values] == ["Jan"]


def test_backend_failure_skips_row():
    t = tbl([["Jan", "A"], ["Piet", "B"]])
    backend = StubBackend({0: BackendFailure("boom"), 1: [Candidate("name", "Piet")]})
    run = run_extraction(t, NAME_PLACE, backend)
    assert [r.row_index for r in run.records] == [1]
    assert run.failed_rows[0].row == 0


def test_nested_values_grouped(person_schema, register_page):
    table = reconstruct(register_page).table
    records = extract_document(table, person_schema, rule_backend(person_schema))
    assert len(records) == 2
    rec = records[0]
    assert [v.property for v in rec.values] == ["name", "birth_place", "birth_date"]
    place = rec.values[1]
    assert isinstance(place.value, NestedValue)
    (attr,) = place.value.attributes
    assert (attr.property, attr.value, attr.provenance.cell_id) == ("name", "Amsterdam", "c01")
    assert place.provenance == ValueProvenance(0)
    date = rec.values[2]
    assert (date.value, date.provenance.cell_id) == ("12-03-1821", "c02")
    second = records[1]
    assert second.values[0].value == "Pieter\nde Vries"


def test_cell_mode_matches_offsets():
    t = tbl([["Jan", "Amsterdam"]])
    run = run_extraction(t, NAME_PLACE, rule_backend(NAME_PLACE), mode="cell")
    # each cell is fed alone but keeps its column, so offsets map back to the row
    values = [(v.property, v.value, v.provenance.cell_id, v.provenance.span) for v in run.records[0].values]
    assert values == [("name", "Jan", "c00", (0, 3)), ("place", "Amsterdam", "c01", (4, 13))]


# -- provenance restoration --------------------------------------------------------

def _row():
    return row_text(tbl([["Jan", "Amsterdam"]]), 0)


def test_restore_span_inside_cell():
    rec = EntityRecord("P", 0, (PropertyValue("place", "Amsterdam", ValueProvenance(0, None, (4, 13))),))
    out = restore_cell_provenance(rec, _row())
    assert out.values[0].provenance == ValueProvenance(0, "c01", (4, 13))


def test_restore_normalized_value_stays_row_level():
    rec = EntityRecord("P", 0, (PropertyValue("date", "1850-01-02", ValueProvenance(0)),))
    out = restore_cell_provenance(rec, _row())
    assert out.values[0].provenance == ValueProvenance(0)


def test_restore_span_across_cells():
    rec = EntityRecord("P", 0, (PropertyValue("x", "Jan Amsterdam", ValueProvenance(0, None, (0, 13))),))
    out = restore_cell_provenance(rec, _row())
    assert out.values[0].provenance.cell_id is None
    assert out.values[0].provenance.span == (0, 13)


def test_restore_substring_fallback_first_occurrence():
    row = row_text(tbl([["Jan", "Jan"]]), 0)
    rec = EntityRecord("P", 0, (PropertyValue("x", "Jan", ValueProvenance(0)),))
    out = restore_cell_provenance(rec, row)
    assert out.values[0].provenance == ValueProvenance(0, "c00", (0, 3))


def test_restore_never_changes_values():
    rng = random.Random(1)
    row = _row()
    for _ in range(200):
        s = rng.randint(0, len(row.text))
        e = rng.randint(s, len(row.text))
        value = rng.choice(["Jan", "Amsterdam", "zzz", row.text[s:e]])
        span = rng.choice([None, (s, e)])
        rec = EntityRecord("P", 0, (PropertyValue("x", value, ValueProvenance(0, None, span)),))
        out = restore_cell_provenance(rec, row)
        assert out.values[0].value == value
        p = out.values[0].provenance
        if p.cell_id is not None:
            seg = next(sg for sg in row.segments if sg.cell_id == p.cell_id)
            assert seg.start <= p.span[0] <= p.span[1] <= seg.end


def test_rule_backend_is_deterministic(person_schema, register_page):
    table = reconstruct(register_page).table
    a = extract_document(table, person_schema, rule_backend(person_schema))
    b = extract_document(table, person_schema, rule_backend(person_schema))
    rf = lambda rs: dumps_records(RecordFile("d", "img", "Person", rs))  # noqa: E731
    assert rf(a) == rf(b)


def test_record_json_round_trip(person_schema, register_page):
    table = reconstruct(register_page).table
    rf = RecordFile("register", "register_0143.jpg", "Person",
                    extract_document(table, person_schema, rule_backend(person_schema)))
    assert loads_records(dumps_records(rf)) == rf


# -- http backend ------------------------------------------------------------------

class _Handler(BaseHTTPRequestHandler):
    response = b"[]"
    requests: list = []

    def do_POST(self):
        body = self.rfile.read(int(self.headers["Content-Length"]))
        type(self).requests.append(json.loads(body))
        self.send_response(200)
        self.send_header("Content-Type", "application/json")
        self.end_headers()
        self.wfile.write(type(self).response)

    def log_message(self, *args):
        pass


@pytest.fixture
def stub_server():
    handler = type("H", (_Handler,), {"requests": []})
    server = ThreadingHTTPServer(("127.0.0.1", 0), handler)
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    yield handler, f"http://127.0.0.1:{server.server_address[1]}/extract"
    server.shutdown()
    server.server_close()


def test_http_backend_parses_response(stub_server):
    handler, url = stub_server
    handler.response = json.dumps({"values": [
        {"property": "name", "value": "Jan", "span": [0, 3]},
        {"property": "place", "value": "not mentioned"},
        {"property": "place", "value": "Amsterdam", "span": [99, 100]},
        {"value": "no property"},
    ]}).encode()
    t = tbl([["Jan", "Amsterdam"]])
    (rec,) = extract_document(t, NAME_PLACE, http_backend(url, "stub", timeout=5))
    assert [(v.property, v.value, v.provenance.cell_id) for v in rec.values] == [
        ("name", "Jan", "c00"), ("place", "Amsterdam", "c01")]
    sent = handler.requests[0]
    assert sent["text"] == "Jan Amsterdam" and sent["model"] == "stub"
    assert sent["schema"]["entity_type"] == "Person"


def test_http_backend_bad_json(stub_server):
    handler, url = stub_server
    handler.response = b"not json"
    with pytest.raises(BackendFailure):
        http_backend(url).extract(_row(), NAME_PLACE)


def test_http_backend_unreachable():
    with pytest.raises(BackendFailure):
        http_backend("http://127.0.0.1:9/none", timeout=2).extract(_row(), NAME_PLACE)


# -- statistics --------------------------------------------------------------------

def test_stats_empty():
    s = provenance_stats([])
    assert (s.instances, s.properties, s.cell_provenance) == (0, 0, 0)
    assert s.properties_per_instance == 0.0 and s.cell_provenance_ratio == 0.0


def test_stats_counts(person_schema, register_page):
    table = reconstruct(register_page).table
    records = extract_document(table, person_schema, rule_backend(person_schema))
    s = provenance_stats(records)
    assert (s.instances, s.properties, s.cell_provenance) == (2, 6, 6)
    assert s.cell_provenance_ratio == 1.0


def test_stats_totals_arithmetic():
    s = ProvenanceStats(288, 1731, 420)
    assert s.properties_per_instance == pytest.approx(6.01, abs=1e-2)
    assert s.cell_provenance_ratio == pytest.approx(0.2426, abs=1e-4)
