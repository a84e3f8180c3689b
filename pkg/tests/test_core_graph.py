"""Registry and relation-store semantics: upserts, review, snapshots."""

import pytest
from hypothesis import given, settings, strategies as st

from suppliergraph.errors import (
    InvalidRecordError,
    InvalidVerdictError,
    SelfSupplyError,
    SnapshotFormatError,
    SnapshotVersionError,
    UnknownCompanyError,
    UnknownRelationError,
)
from suppliergraph.graph import SupplierGraph, load_snapshot
from suppliergraph.model import Company, Origin, Review

from conftest import FIXED_TIME, make_company, make_doc


class TestUpsertCompany:
    def test_id_derived_from_canonical_name(self):
        graph = SupplierGraph()
        assert graph.upsert_company(make_company("Apple Inc.")) == "apple"

    def test_reupsert_is_idempotent(self):
        graph = SupplierGraph()
        graph.upsert_company(make_company("Apple Inc."))
        graph.upsert_company(make_company("Apple Inc."))
        assert len(graph) == 1

    def test_absent_fields_never_overwrite_present_ones(self):
        graph = SupplierGraph()
        graph.upsert_company(make_company("Apple Inc.", industry="IT"))
        graph.upsert_company(make_company("Apple Inc."))
        assert graph.company("apple").industry == "IT"
        graph.upsert_company(make_company("Apple Inc.", industry="Retail", country="US"))
        merged = graph.company("apple")
        assert merged.industry == "IT"       # present value kept
        assert merged.country == "US"         # absent value filled

    def test_merge_unions_aliases_and_records_variant_names(self):
        graph = SupplierGraph()
        graph.upsert_company(make_company("Apple Inc.", aliases={"Apple Computer"}))
        graph.upsert_company(make_company("APPLE INC", aliases={"AAPL Apple"}))
        company = graph.company("apple")
        assert {"Apple Computer", "AAPL Apple", "APPLE INC"} <= company.aliases

    def test_empty_name_rejected(self):
        with pytest.raises(InvalidRecordError):
            Company(id="x", legal_name="  ")


class TestUpsertRelation:
    def test_extracted_requires_provenance(self, graph_ab):
        with pytest.raises(InvalidRecordError):
            graph_ab.upsert_relation("alpha", "beta", Origin.EXTRACTED)

    def test_same_url_twice_is_noop(self, graph_ab):
        doc = make_doc(score=0.7)
        graph_ab.upsert_relation("alpha", "beta", Origin.EXTRACTED, provenance=doc)
        rel = graph_ab.upsert_relation("alpha", "beta", Origin.EXTRACTED, provenance=doc)
        assert len(rel.provenance) == 1
        assert len(graph_ab.relations()) == 1

    def test_new_url_appends_and_confidence_is_max(self, graph_ab):
        graph_ab.upsert_relation("alpha", "beta", Origin.EXTRACTED,
                                 provenance=make_doc(url="https://a.com/1", score=0.7))
        rel = graph_ab.upsert_relation("alpha", "beta", Origin.EXTRACTED,
                                       provenance=make_doc(url="https://a.com/2", score=1.0))
        assert len(rel.provenance) == 2
        assert rel.confidence == 1.0

    def test_self_loop_rejected(self, graph_ab):
        with pytest.raises(SelfSupplyError):
            graph_ab.upsert_relation("alpha", "alpha", Origin.MANUAL)

    def test_unknown_endpoint_rejected(self, graph_ab):
        with pytest.raises(UnknownCompanyError):
            graph_ab.upsert_relation("alpha", "ghost", Origin.MANUAL)

    def test_manual_confidence_is_one(self, graph_ab):
        rel = graph_ab.upsert_relation("alpha", "beta", Origin.MANUAL)
        assert rel.confidence == 1.0

    def test_predicted_confidence_capped(self, graph_ab):
        rel = graph_ab.upsert_relation("alpha", "beta", Origin.PREDICTED, confidence=0.4)
        assert rel.confidence == 0.4
        with pytest.raises(InvalidRecordError):
            graph_ab.upsert_relation("beta", "alpha", Origin.PREDICTED, confidence=0.7)
        with pytest.raises(InvalidRecordError):
            graph_ab.upsert_relation("beta", "alpha", Origin.PREDICTED)

    def test_extracted_and_manual_edges_coexist(self, graph_ab):
        graph_ab.upsert_relation("alpha", "beta", Origin.EXTRACTED, provenance=make_doc())
        graph_ab.upsert_relation("alpha", "beta", Origin.MANUAL)
        assert len(graph_ab.relations()) == 2


class TestSetReview:
    def test_confirm_appends_audit(self, graph_ab):
        graph_ab.upsert_relation("alpha", "beta", Origin.MANUAL)
        rel = graph_ab.set_review("alpha", "beta", Origin.MANUAL, Review.CONFIRMED, actor="alpha")
        assert rel.review is Review.CONFIRMED
        assert len(rel.audit) == 1
        assert rel.audit[0].actor == "alpha"

    def test_latest_verdict_wins(self, graph_ab):
        graph_ab.upsert_relation("alpha", "beta", Origin.MANUAL)
        graph_ab.set_review("alpha", "beta", Origin.MANUAL, Review.CONFIRMED, actor="alpha")
        rel = graph_ab.set_review("alpha", "beta", Origin.MANUAL, Review.REJECTED, actor="beta")
        assert rel.review is Review.REJECTED
        assert len(rel.audit) == 2

    def test_unknown_relation(self, graph_ab):
        with pytest.raises(UnknownRelationError):
            graph_ab.set_review("alpha", "beta", Origin.MANUAL, Review.CONFIRMED, actor="alpha")

    def test_bad_verdict(self, graph_ab):
        graph_ab.upsert_relation("alpha", "beta", Origin.MANUAL)
        with pytest.raises(InvalidVerdictError):
            graph_ab.set_review("alpha", "beta", Origin.MANUAL, "unreviewed", actor="alpha")
        with pytest.raises(InvalidVerdictError):
            graph_ab.set_review("alpha", "beta", Origin.MANUAL, "maybe", actor="alpha")

    def test_review_survives_reupsert(self, graph_ab):
        doc = make_doc(score=0.8)
        graph_ab.upsert_relation("alpha", "beta", Origin.EXTRACTED, provenance=doc)
        graph_ab.set_review("alpha", "beta", Origin.EXTRACTED, Review.CONFIRMED, actor="beta")
        rel = graph_ab.upsert_relation("alpha", "beta", Origin.EXTRACTED,
                                       provenance=make_doc(url="https://b.com/x", score=0.9))
        assert rel.review is Review.CONFIRMED
        assert len(rel.audit) == 1


class TestSuppliersOf:
    def test_empty(self, graph_ab):
        assert graph_ab.suppliers_of("alpha") == []

    def test_origin_filter(self, graph_ab):
        graph_ab.upsert_company(make_company("Gamma SE"))
        graph_ab.upsert_relation("alpha", "beta", Origin.EXTRACTED, provenance=make_doc())
        graph_ab.upsert_relation("alpha", "gamma", Origin.PREDICTED, confidence=0.3)
        rows = graph_ab.suppliers_of("alpha", origin=Origin.EXTRACTED)
        assert [r.supplier for r in rows] == ["beta"]

    def test_rejected_excluded_by_default(self, graph_ab):
        graph_ab.upsert_relation("alpha", "beta", Origin.MANUAL)
        graph_ab.set_review("alpha", "beta", Origin.MANUAL, Review.REJECTED, actor="beta")
        assert graph_ab.suppliers_of("alpha") == []
        assert len(graph_ab.suppliers_of("alpha", include_rejected=True)) == 1

    def test_unknown_company(self, graph_ab):
        with pytest.raises(UnknownCompanyError):
            graph_ab.suppliers_of("ghost")

    def test_sorted_by_origin_then_supplier(self, graph_ab):
        graph_ab.upsert_company(make_company("Gamma SE"))
        graph_ab.upsert_relation("alpha", "gamma", Origin.MANUAL)
        graph_ab.upsert_relation("alpha", "beta", Origin.MANUAL)
        graph_ab.upsert_relation("alpha", "gamma", Origin.EXTRACTED, provenance=make_doc())
        rows = graph_ab.suppliers_of("alpha")
        assert [(r.origin.value, r.supplier) for r in rows] == [
            ("extracted", "gamma"), ("manual", "beta"), ("manual", "gamma")]


class TestSnapshot:
    def build(self):
        graph = SupplierGraph()
        graph.upsert_company(make_company("Apple Inc.", industry="IT", continent="NA",
                                          website_domain="apple.com"))
        graph.upsert_company(make_company("Beta Ltd", continent="EU"))
        graph.upsert_relation("apple", "beta", Origin.EXTRACTED,
                              provenance=make_doc(url="https://apple.com/suppliers.txt", score=0.9))
        graph.set_review("apple", "beta", Origin.EXTRACTED, Review.CONFIRMED, actor="beta",
                         timestamp=FIXED_TIME)
        graph.upsert_relation("beta", "apple", Origin.MANUAL)
        return graph

    def test_round_trip(self, tmp_path):
        graph = self.build()
        path = tmp_path / "graph.dat"
        graph.save_snapshot(path)
        loaded = load_snapshot(path)
        assert loaded.equal_content(graph)
        rel = loaded.relation("apple", "beta", Origin.EXTRACTED)
        assert rel.review is Review.CONFIRMED
        assert rel.provenance[0].content_type.value == "plain"
        assert rel.audit[0].actor == "beta"

    def test_canonical_bytes(self, tmp_path):
        a, b = tmp_path / "a.dat", tmp_path / "b.dat"
        self.build().save_snapshot(a)
        self.build().save_snapshot(b)
        assert a.read_bytes() == b.read_bytes()

    def test_insertion_order_does_not_change_bytes(self):
        g1 = SupplierGraph()
        g1.upsert_company(make_company("Beta Ltd"))
        g1.upsert_company(make_company("Apple Inc."))
        g2 = SupplierGraph()
        g2.upsert_company(make_company("Apple Inc."))
        g2.upsert_company(make_company("Beta Ltd"))
        assert g1.snapshot_bytes() == g2.snapshot_bytes()

    def test_unknown_schema_version(self, tmp_path):
        path = tmp_path / "graph.dat"
        path.write_text('{"schema_version":99}\n')
        with pytest.raises(SnapshotVersionError):
            load_snapshot(path)

    def test_garbage_rejected(self, tmp_path):
        path = tmp_path / "graph.dat"
        path.write_text("not a snapshot\n")
        with pytest.raises(SnapshotFormatError):
            load_snapshot(path)

    def test_dangling_relation_rejected(self, tmp_path):
        graph = self.build()
        lines = graph.snapshot_bytes().decode().splitlines()
        # drop the beta company record, keeping relations that reference it
        lines = [l for l in lines if '"id":"beta"' not in l]
        path = tmp_path / "graph.dat"
        path.write_text("\n".join(lines) + "\n")
        with pytest.raises(SnapshotFormatError):
            load_snapshot(path)


# -- properties ---------------------------------------------------------

company_names = st.sampled_from(
    ["Apple Inc.", "Beta Ltd", "Gamma SE", "Delta Corp", "Epsilon GmbH"])


@st.composite
def upsert_sequences(draw):
    names = draw(st.lists(company_names, min_size=2, max_size=5, unique=True))
    ids = [name.split()[0].lower() for name in names]
    ops = [("company", name) for name in names]
    n_rel = draw(st.integers(min_value=0, max_value=8))
    for _ in range(n_rel):
        customer = draw(st.sampled_from(ids))
        supplier = draw(st.sampled_from([i for i in ids if i != customer]))
        origin = draw(st.sampled_from(list(Origin)))
        score = draw(st.sampled_from([0.3, 0.7, 1.0]))
        url = draw(st.sampled_from(["https://x.com/1", "https://x.com/2"]))
        ops.append(("relation", customer, supplier, origin, url, score))
    return ops


def apply_ops(ops):
    graph = SupplierGraph()
    for op in ops:
        if op[0] == "company":
            graph.upsert_company(make_company(op[1]))
        else:
            _, customer, supplier, origin, url, score = op
            if origin is Origin.EXTRACTED:
                graph.upsert_relation(customer, supplier, origin,
                                      provenance=make_doc(url=url, score=score))
            elif origin is Origin.PREDICTED:
                graph.upsert_relation(customer, supplier, origin, confidence=0.3)
            else:
                graph.upsert_relation(customer, supplier, origin)
    return graph


@settings(max_examples=60)
@given(upsert_sequences())
def test_replaying_an_upsert_sequence_is_idempotent(ops):
    once = apply_ops(ops)
    twice = apply_ops(ops + ops)
    assert once.equal_content(twice)


@settings(max_examples=60)
@given(upsert_sequences())
def test_referential_integrity_after_any_sequence(ops):
    graph = apply_ops(ops)
    for rel in graph.relations():
        assert graph.has_company(rel.customer)
        assert graph.has_company(rel.supplier)


@given(st.lists(st.floats(min_value=0.0, max_value=1.0), min_size=1, max_size=6))
def test_adding_provenance_never_decreases_confidence(scores):
    graph = SupplierGraph()
    graph.upsert_company(make_company("Apple Inc."))
    graph.upsert_company(make_company("Beta Ltd"))
    last = 0.0
    for i, score in enumerate(scores):
        rel = graph.upsert_relation(
            "apple", "beta", Origin.EXTRACTED,
            provenance=make_doc(url=f"https://x.com/{i}", score=score))
        assert rel.confidence >= last
        last = rel.confidence


def test_audit_length_counts_accepted_reviews(graph_ab):
    graph_ab.upsert_relation("alpha", "beta", Origin.MANUAL)
    verdicts = [Review.CONFIRMED, Review.REJECTED, Review.CONFIRMED, Review.CONFIRMED]
    for verdict in verdicts:
        graph_ab.set_review("alpha", "beta", Origin.MANUAL, verdict, actor="alpha")
    rel = graph_ab.relation("alpha", "beta", Origin.MANUAL)
    assert len(rel.audit) == len(verdicts)
