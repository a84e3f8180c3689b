import hashlib
from datetime import datetime, timezone
from pathlib import Path
from types import SimpleNamespace

import pytest

from suppliergraph.graph import SupplierGraph
from suppliergraph.model import Company, ContentType, Origin, SourceDocument

FIXTURES = Path(__file__).parent / "fixtures"
CORPUS = FIXTURES / "corpus"

FIXED_TIME = datetime(2024, 1, 1, tzinfo=timezone.utc)

# The seven (evaluated, transparent) pairs of the continent distribution
# the reports must reproduce, plus their expected percentages.
CONTINENT_PAIRS = {
    "EU": (1435, 213),
    "AF": (84, 9),
    "NA": (2564, 248),
    "AS": (790, 67),
    "SA": (225, 19),
    "OC": (209, 16),
    "ME": (364, 13),
}
CONTINENT_PERCENTAGES = {
    "EU": 14.84,
    "AF": 10.71,
    "NA": 9.67,
    "AS": 8.48,
    "SA": 8.44,
    "OC": 7.66,
    "ME": 3.57,
}
TOTAL_PERCENTAGE = 10.32


def make_doc(url="https://example.com/list.txt", score=0.7, content=b"doc",
             content_type=ContentType.PLAIN, retrieved_at=FIXED_TIME,
             extractor_id="plain"):
    return SourceDocument(
        url=url,
        retrieved_at=retrieved_at,
        content_hash=hashlib.sha256(content).hexdigest(),
        content_type=content_type,
        score=score,
        extractor_id=extractor_id,
    )


def make_company(name, **kwargs):
    return Company.from_name(name, **kwargs)


@pytest.fixture
def graph_ab():
    """Two-company graph: ids 'alpha' and 'beta'."""
    graph = SupplierGraph()
    graph.upsert_company(make_company("Alpha Inc."))
    graph.upsert_company(make_company("Beta Ltd"))
    return graph


@pytest.fixture
def fixtures_dir():
    return FIXTURES


def build_continent_fixture(pairs=None) -> SupplierGraph:
    """Synthetic registry reproducing given (evaluated, transparent) pairs.

    Each continent gets `evaluated` companies; the first `transparent` of
    them receive one extracted relation to another member of the same
    continent, so the graph contains exactly the evaluated population.
    """
    pairs = pairs or CONTINENT_PAIRS
    graph = SupplierGraph()
    ids_by_continent = {}
    for continent, (evaluated, _) in pairs.items():
        ids = []
        for i in range(evaluated):
            cid = f"{continent.lower()}-{i:04d}"
            graph.upsert_company(Company(
                id=cid, legal_name=f"{continent} Synthetic {i:04d}", continent=continent))
            ids.append(cid)
        ids_by_continent[continent] = ids
    for continent, (evaluated, transparent) in pairs.items():
        ids = ids_by_continent[continent]
        for i in range(transparent):
            supplier = ids[(i + 1) % evaluated]
            graph.upsert_relation(
                ids[i], supplier, Origin.EXTRACTED,
                provenance=make_doc(url=f"https://{ids[i]}.example/suppliers.txt", score=0.7))
    return graph


def build_nudge_fixture(peers=100, transparent=34) -> SupplierGraph:
    """One target company plus a peer group sharing its industry/continent."""
    graph = SupplierGraph()
    graph.upsert_company(Company(
        id="target", legal_name="Target Co", industry="IT", continent="NA"))
    supplier_pool = Company(id="depot", legal_name="Depot Co", industry="Logistics",
                            continent="SA")
    graph.upsert_company(supplier_pool)
    for i in range(peers):
        cid = f"peer-{i:03d}"
        graph.upsert_company(Company(
            id=cid, legal_name=f"Peer {i:03d}", industry="IT", continent="NA"))
        if i < transparent:
            graph.upsert_relation(
                cid, "depot", Origin.EXTRACTED,
                provenance=make_doc(url=f"https://{cid}.example/suppliers.txt", score=0.8))
    return graph


@pytest.fixture(scope="session")
def corpus_run(tmp_path_factory):
    """One shared pipeline run over the bundled 30-company corpus."""
    from suppliergraph.clients import (
        FixtureFetcher, FixtureManifest, FixtureSearchClient, GazetteerRecognizer)
    from suppliergraph.pipeline import load_seed_registry, run_pipeline
    from suppliergraph.store import IntermediateStore

    root = tmp_path_factory.mktemp("corpus_run")
    graph = load_seed_registry(CORPUS / "seed_30.csv").graph
    manifest = FixtureManifest.load(CORPUS / "manifest.json")
    snapshot_path = root / "graph.dat"
    report = run_pipeline(
        graph,
        IntermediateStore(root / "store"),
        FixtureSearchClient(manifest),
        FixtureFetcher(manifest),
        GazetteerRecognizer.from_graph(graph),
        snapshot_path=snapshot_path,
    )
    return SimpleNamespace(
        graph=graph, report=report, snapshot_path=snapshot_path, store_dir=root / "store")
