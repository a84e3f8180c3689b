"""Collaboration API: browsing, auth, contributions, review, analytics."""

import json

import pytest
from fastapi.testclient import TestClient

from suppliergraph.graph import load_snapshot
from suppliergraph.model import Origin
from suppliergraph.service import ServiceConfig, create_app

from conftest import CORPUS


@pytest.fixture
def app_state(corpus_run, tmp_path):
    """A service over a fresh copy of the mined corpus graph."""
    graph = load_snapshot(corpus_run.snapshot_path)
    config = ServiceConfig(
        snapshot_path=tmp_path / "live.dat",
        state_path=tmp_path / "service.json",
        expose_outbox=True,
    )
    app = create_app(graph, config)
    return app, graph


@pytest.fixture
def client(app_state):
    app, _ = app_state
    return TestClient(app)


def obtain_token(client, company_id, email):
    response = client.post("/api/auth/claim", json={"company_id": company_id, "email": email})
    assert response.status_code == 200, response.text
    entries = client.get("/api/outbox", params={"cause": "verification"}).json()["items"]
    code = entries[-1]["body"].rsplit(": ", 1)[-1]
    verified = client.post("/api/auth/verify", json={"code": code})
    assert verified.status_code == 200, verified.text
    return verified.json()["token"]


def auth(token):
    return {"Authorization": f"Bearer {token}"}


class TestBrowse:
    def test_list_with_substring_query(self, client):
        body = client.get("/api/companies", params={"q": "orchard"}).json()
        assert body["total"] == 1
        assert body["items"][0]["id"] == "orchard-computing"
        assert body["items"][0]["transparent"] is True

    def test_pagination(self, client):
        body = client.get("/api/companies", params={"page_size": 10, "page": 2}).json()
        assert body["total"] == 30
        assert len(body["items"]) == 10

    def test_unknown_company_404(self, client):
        response = client.get("/api/companies/ghost")
        assert response.status_code == 404
        assert response.json()["code"] == "unknown-company"

    def test_detail_of_transparent_company(self, client):
        body = client.get("/api/companies/orchard-computing").json()
        assert body["transparent"] is True
        assert body["relation_counts"]["suppliers_extracted"] == 3
        body = client.get("/api/companies/bluewater-foods").json()
        assert body["transparent"] is False

    def test_unknown_query_parameter_rejected(self, client):
        response = client.get("/api/companies", params={"search": "x"})
        assert response.status_code == 400
        assert response.json()["code"] == "unknown-parameter"


class TestSuppliersEndpoint:
    def test_include_filters_origins(self, client):
        url = "/api/companies/orchard-computing/suppliers"
        rows = client.get(url, params={"include": "extracted"}).json()["items"]
        assert len(rows) == 3
        assert all(r["origin"] == "extracted" for r in rows)

    def test_provenance_url_present_on_every_extracted_row(self, client):
        url = "/api/companies/orchard-computing/suppliers"
        rows = client.get(url, params={"include": "extracted"}).json()["items"]
        for row in rows:
            assert row["provenance"], "extracted row without provenance"
            assert row["provenance"][0]["url"].startswith("https://")

    def test_predicted_rows_computed_on_demand(self, client):
        url = "/api/companies/bluewater-foods/suppliers"
        rows = client.get(url, params={"include": "predicted"}).json()["items"]
        # bluewater-foods is alone in Food and Beverage / NA: no candidates
        assert rows == []
        # vega-microdevices shares IT/NA with two list publishers
        url = "/api/companies/vega-microdevices/suppliers"
        rows = client.get(url, params={"include": "predicted", "k": 2}).json()["items"]
        assert 0 < len(rows) <= 2
        assert all(r["origin"] == "predicted" and not r["persisted"] for r in rows)
        assert all(r["confidence"] <= 0.6 for r in rows)

    def test_bad_include_value(self, client):
        response = client.get("/api/companies/orchard-computing/suppliers",
                              params={"include": "psychic"})
        assert response.status_code == 422

    def test_unknown_company(self, client):
        assert client.get("/api/companies/ghost/suppliers").status_code == 404


class TestClaimVerify:
    def test_claim_writes_verification_outbox_entry(self, client):
        client.post("/api/auth/claim",
                    json={"company_id": "orchard-computing", "email": "jo@orchardcomputing.com"})
        entries = client.get("/api/outbox", params={"cause": "verification"}).json()["items"]
        assert len(entries) == 1
        assert entries[0]["to"] == "jo@orchardcomputing.com"

    def test_domain_mismatch_403(self, client):
        response = client.post(
            "/api/auth/claim",
            json={"company_id": "orchard-computing", "email": "jo@evil.example"})
        assert response.status_code == 403
        assert response.json()["code"] == "domain-mismatch"

    def test_unknown_company_404(self, client):
        response = client.post("/api/auth/claim",
                               json={"company_id": "ghost", "email": "a@b.co"})
        assert response.status_code == 404

    def test_bad_email_422(self, client):
        response = client.post("/api/auth/claim",
                               json={"company_id": "orchard-computing", "email": "not-an-email"})
        assert response.status_code == 422

    def test_verify_is_single_use(self, client):
        client.post("/api/auth/claim",
                    json={"company_id": "orchard-computing", "email": "jo@orchardcomputing.com"})
        entries = client.get("/api/outbox").json()["items"]
        code = entries[-1]["body"].rsplit(": ", 1)[-1]
        first = client.post("/api/auth/verify", json={"code": code})
        assert first.status_code == 200
        second = client.post("/api/auth/verify", json={"code": code})
        assert second.status_code == 404

    def test_unknown_code_404(self, client):
        assert client.post("/api/auth/verify", json={"code": "nope"}).status_code == 404

    def test_expired_code_410(self, app_state):
        app, _ = app_state
        client = TestClient(app)
        client.post("/api/auth/claim",
                    json={"company_id": "orchard-computing", "email": "jo@orchardcomputing.com"})
        state = app.state.service
        (claim,) = state.claims.values()
        from datetime import timedelta
        claim.created_at -= timedelta(hours=25)
        response = client.post("/api/auth/verify", json={"code": claim.code})
        assert response.status_code == 410


class TestAddSupplier:
    def test_matched_supplier_and_notification(self, client):
        token = obtain_token(client, "meridian-motors", "rep@meridianmotors.com")
        response = client.post("/api/companies/meridian-motors/suppliers",
                               json={"supplier_name": "quartz precision"},
                               headers=auth(token))
        assert response.status_code == 200
        body = response.json()
        assert body["outcome"] == "matched"
        assert body["relation"]["supplier"] == "quartz-precision"
        assert body["relation"]["origin"] == "manual"
        assert body["relation"]["confidence"] == 1.0
        notices = client.get("/api/outbox", params={"cause": "added_as_supplier"}).json()["items"]
        assert len(notices) == 1
        assert notices[0]["to"] == "enquiries@quartzprecision.co.uk"

    def test_duplicate_add_sends_no_second_notification(self, client):
        token = obtain_token(client, "meridian-motors", "rep@meridianmotors.com")
        for _ in range(2):
            client.post("/api/companies/meridian-motors/suppliers",
                        json={"supplier_name": "Quartz Precision Ltd"},
                        headers=auth(token))
        notices = client.get("/api/outbox", params={"cause": "added_as_supplier"}).json()["items"]
        assert len(notices) == 1

    def test_unmatched_name_creates_minimal_company(self, client, app_state):
        _, graph = app_state
        token = obtain_token(client, "meridian-motors", "rep@meridianmotors.com")
        response = client.post("/api/companies/meridian-motors/suppliers",
                               json={"supplier_name": "Tiny Parts FZE"},
                               headers=auth(token))
        body = response.json()
        assert body["outcome"] == "created"
        assert body["relation"]["supplier"] == "tiny-parts-fze"
        created = graph.company("tiny-parts-fze")
        assert created.metadata_source.value == "manual"

    def test_no_token_401(self, client):
        response = client.post("/api/companies/meridian-motors/suppliers",
                               json={"supplier_name": "x"})
        assert response.status_code == 401

    def test_foreign_token_403(self, client):
        token = obtain_token(client, "orchard-computing", "rep@orchardcomputing.com")
        response = client.post("/api/companies/meridian-motors/suppliers",
                               json={"supplier_name": "x corp"},
                               headers=auth(token))
        assert response.status_code == 403

    def test_empty_name_422(self, client):
        token = obtain_token(client, "meridian-motors", "rep@meridianmotors.com")
        response = client.post("/api/companies/meridian-motors/suppliers",
                               json={"supplier_name": "   "},
                               headers=auth(token))
        assert response.status_code == 422


class TestUpload:
    CSV = "name,country\nQuartz Precision Ltd,GB\nTiny Parts FZE,AE\n,\n"

    def test_per_row_outcomes(self, client):
        token = obtain_token(client, "meridian-motors", "rep@meridianmotors.com")
        response = client.post("/api/companies/meridian-motors/suppliers/upload",
                               content=self.CSV, headers=auth(token))
        assert response.status_code == 200
        outcomes = response.json()["outcomes"]
        assert [o["outcome"] for o in outcomes] == ["matched", "created", "error"]
        assert outcomes[2]["error"]

    def test_duplicate_rows_stay_idempotent(self, client, app_state):
        _, graph = app_state
        token = obtain_token(client, "meridian-motors", "rep@meridianmotors.com")
        body = "name\nQuartz Precision Ltd\nQuartz Precision Ltd\n"
        response = client.post("/api/companies/meridian-motors/suppliers/upload",
                               content=body, headers=auth(token))
        outcomes = response.json()["outcomes"]
        assert [o["outcome"] for o in outcomes] == ["matched", "matched"]
        rows = graph.suppliers_of("meridian-motors", origin=Origin.MANUAL)
        assert len(rows) == 1

    def test_empty_file_422(self, client):
        token = obtain_token(client, "meridian-motors", "rep@meridianmotors.com")
        response = client.post("/api/companies/meridian-motors/suppliers/upload",
                               content="", headers=auth(token))
        assert response.status_code == 422

    def test_missing_name_header_422(self, client):
        token = obtain_token(client, "meridian-motors", "rep@meridianmotors.com")
        response = client.post("/api/companies/meridian-motors/suppliers/upload",
                               content="supplier\nAcme\n", headers=auth(token))
        assert response.status_code == 422

    def test_requires_auth(self, client):
        assert client.post("/api/companies/meridian-motors/suppliers/upload",
                           content=self.CSV).status_code == 401


class TestReview:
    URL = "/api/relations/orchard-computing/vega-microdevices/extracted/review"

    def test_customer_rep_confirms(self, client):
        token = obtain_token(client, "orchard-computing", "rep@orchardcomputing.com")
        response = client.post(self.URL, json={"verdict": "confirmed"}, headers=auth(token))
        assert response.status_code == 200
        assert response.json()["review"] == "confirmed"

    def test_supplier_rep_rejects_later_latest_wins(self, client, app_state):
        _, graph = app_state
        customer_token = obtain_token(client, "orchard-computing", "rep@orchardcomputing.com")
        supplier_token = obtain_token(client, "vega-microdevices", "rep@vegamicrodevices.com")
        client.post(self.URL, json={"verdict": "confirmed"}, headers=auth(customer_token))
        response = client.post(self.URL, json={"verdict": "rejected"}, headers=auth(supplier_token))
        assert response.json()["review"] == "rejected"
        relation = graph.relation("orchard-computing", "vega-microdevices", Origin.EXTRACTED)
        assert len(relation.audit) == 2
        assert relation.audit[0].actor == "orchard-computing"
        assert relation.audit[1].actor == "vega-microdevices"

    def test_third_company_403(self, client):
        token = obtain_token(client, "meridian-motors", "rep@meridianmotors.com")
        response = client.post(self.URL, json={"verdict": "confirmed"}, headers=auth(token))
        assert response.status_code == 403

    def test_unknown_relation_404(self, client):
        token = obtain_token(client, "orchard-computing", "rep@orchardcomputing.com")
        response = client.post("/api/relations/orchard-computing/bluewater-foods/extracted/review",
                               json={"verdict": "confirmed"}, headers=auth(token))
        assert response.status_code == 404

    def test_bad_verdict_422(self, client):
        token = obtain_token(client, "orchard-computing", "rep@orchardcomputing.com")
        response = client.post(self.URL, json={"verdict": "maybe"}, headers=auth(token))
        assert response.status_code == 422

    def test_rejected_row_hidden_from_default_view(self, client):
        token = obtain_token(client, "orchard-computing", "rep@orchardcomputing.com")
        client.post(self.URL, json={"verdict": "rejected"}, headers=auth(token))
        rows = client.get("/api/companies/orchard-computing/suppliers").json()["items"]
        assert "vega-microdevices" not in [r["supplier"] for r in rows]
        rows = client.get("/api/companies/orchard-computing/suppliers",
                          params={"include_rejected": "true"}).json()["items"]
        assert "vega-microdevices" in [r["supplier"] for r in rows]


class TestAnalyticsEndpoints:
    def test_transparency_by_continent(self, client):
        body = client.get("/api/analytics/transparency", params={"by": "continent"}).json()
        total = next(r for r in body["rows"] if r["group"] == "total")
        assert total["evaluated"] == 30
        assert total["transparent"] == 7
        assert total["percentage"] == 23.33

    def test_transparency_by_industry(self, client):
        body = client.get("/api/analytics/transparency", params={"by": "industry"}).json()
        labels = {r["group"] for r in body["rows"]}
        assert "Automotive" in labels and "total" in labels

    def test_bad_group_value(self, client):
        assert client.get("/api/analytics/transparency",
                          params={"by": "color"}).status_code == 422

    def test_nudge_endpoint(self, client):
        body = client.get("/api/companies/vega-microdevices/nudge").json()
        assert set(body) == {"percentage", "message"}
        assert str(body["percentage"]) + "%" in body["message"]

    def test_nudge_unknown_company(self, client):
        assert client.get("/api/companies/ghost/nudge").status_code == 404


class TestAuthorizationMatrix:
    """Every mutating endpoint, against no/foreign/owner tokens."""

    CASES = [
        ("add", "post", "/api/companies/meridian-motors/suppliers",
         {"json": {"supplier_name": "Atlas Foundry Corp"}}),
        ("upload", "post", "/api/companies/meridian-motors/suppliers/upload",
         {"content": "name\nAtlas Foundry Corp\n"}),
        ("review", "post", "/api/relations/meridian-motors/atlas-foundry/extracted/review",
         {"json": {"verdict": "confirmed"}}),
    ]

    @pytest.mark.parametrize("name,method,url,kwargs", CASES)
    def test_matrix(self, client, name, method, url, kwargs):
        send = getattr(client, method)
        assert send(url, **kwargs).status_code == 401

        foreign = obtain_token(client, "aurore-cosmetics", "rep@aurorecosmetics.fr")
        assert send(url, headers=auth(foreign), **kwargs).status_code == 403

        owner = obtain_token(client, "meridian-motors", "rep@meridianmotors.com")
        assert send(url, headers=auth(owner), **kwargs).status_code == 200

    def test_supplier_side_may_review(self, client):
        token = obtain_token(client, "atlas-foundry", "rep@atlasfoundry.com")
        response = client.post("/api/relations/meridian-motors/atlas-foundry/extracted/review",
                               json={"verdict": "confirmed"}, headers=auth(token))
        assert response.status_code == 200


class TestPersistence:
    def test_mutations_survive_restart(self, corpus_run, tmp_path):
        graph = load_snapshot(corpus_run.snapshot_path)
        config = ServiceConfig(snapshot_path=tmp_path / "live.dat",
                               state_path=tmp_path / "state.json",
                               expose_outbox=True)
        client = TestClient(create_app(graph, config))
        token = obtain_token(client, "meridian-motors", "rep@meridianmotors.com")
        client.post("/api/companies/meridian-motors/suppliers",
                    json={"supplier_name": "Quartz Precision Ltd"}, headers=auth(token))

        reloaded = load_snapshot(tmp_path / "live.dat")
        restarted = TestClient(create_app(reloaded, config))
        rows = restarted.get("/api/companies/meridian-motors/suppliers",
                             params={"include": "manual"}).json()["items"]
        assert [r["supplier"] for r in rows] == ["quartz-precision"]
        # the token store survives too
        response = restarted.post("/api/companies/meridian-motors/suppliers",
                                  json={"supplier_name": "Quartz Precision Ltd"},
                                  headers=auth(token))
        assert response.status_code == 200
        # and the notification dedup map prevents a duplicate email
        notices = restarted.get("/api/outbox",
                                params={"cause": "added_as_supplier"}).json()["items"]
        assert len(notices) == 1

    def test_pipeline_rerun_preserves_api_writes(self, corpus_run, tmp_path):
        from suppliergraph.clients import (
            FixtureFetcher, FixtureManifest, FixtureSearchClient, GazetteerRecognizer)
        from suppliergraph.pipeline import run_pipeline
        from suppliergraph.store import IntermediateStore
        from suppliergraph.model import Review

        graph = load_snapshot(corpus_run.snapshot_path)
        graph.upsert_relation("meridian-motors", "quartz-precision", Origin.MANUAL)
        graph.set_review("orchard-computing", "vega-microdevices", Origin.EXTRACTED,
                         Review.CONFIRMED, actor="orchard-computing")

        manifest = FixtureManifest.load(CORPUS / "manifest.json")
        run_pipeline(graph, IntermediateStore(tmp_path / "store"),
                     FixtureSearchClient(manifest), FixtureFetcher(manifest),
                     GazetteerRecognizer.from_graph(graph),
                     snapshot_path=tmp_path / "after.dat")

        after = load_snapshot(tmp_path / "after.dat")
        assert after.has_relation("meridian-motors", "quartz-precision", Origin.MANUAL)
        confirmed = after.relation("orchard-computing", "vega-microdevices", Origin.EXTRACTED)
        assert confirmed.review is Review.CONFIRMED


def test_openapi_schema_is_published(client):
    schema = client.get("/openapi.json").json()
    assert "/api/companies" in schema["paths"]
    assert "/api/auth/claim" in schema["paths"]


def test_static_ui_mount_serves_assets_beside_the_api(corpus_run, tmp_path):
    ui = tmp_path / "dist"
    ui.mkdir()
    (ui / "index.html").write_text("<!doctype html><title>ui</title>")
    graph = load_snapshot(corpus_run.snapshot_path)
    client = TestClient(create_app(graph, ServiceConfig(static_dir=ui)))
    assert "ui" in client.get("/").text
    assert client.get("/api/companies").json()["total"] == 30
