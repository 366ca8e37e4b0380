import copy
import json
from importlib import resources
from pathlib import Path

import pytest

from chainwatch.enrichment import load_catalog
from chainwatch.extraction import load_gazetteer, load_type_lexicon, rule_backend
from chainwatch.graph import load_graph
from chainwatch.pipeline import PipelineConfig
from chainwatch.sourcing import load_alternatives_catalog

DATA = resources.files("chainwatch").joinpath("data")
GOLDEN = Path(__file__).parent / "golden"


def data_path(name: str) -> str:
    return str(DATA.joinpath(name))


@pytest.fixture(scope="session")
def mini_mb():
    return load_graph(data_path("mini_mb.json"))


@pytest.fixture(scope="session")
def orion():
    return load_graph(data_path("orion_ev.json"))


@pytest.fixture(scope="session")
def gazetteer():
    return load_gazetteer(data_path("gazetteer.json"))


@pytest.fixture(scope="session")
def type_lexicon():
    return load_type_lexicon(data_path("type_lexicon.json"))


@pytest.fixture(scope="session")
def case_article():
    return Path(data_path("case_study_article.txt")).read_text(encoding="utf-8")


@pytest.fixture()
def pipeline_config(gazetteer, type_lexicon):
    return PipelineConfig(
        extraction_backend=rule_backend(gazetteer, type_lexicon),
        product_catalog=load_catalog(data_path("product_catalog.json")),
        sourcing_backend=load_alternatives_catalog(data_path("alternatives_catalog.json")),
        auto_approve=True,
    )


def canonical_record(doc: dict) -> dict:
    """Strip run id, timestamps, and timings so runs can be diffed."""
    doc = copy.deepcopy(doc)
    doc.pop("run_id", None)
    doc.pop("created", None)
    doc.pop("timings", None)
    if doc.get("stages", {}).get("o5_assessment"):
        doc["stages"]["o5_assessment"].pop("run_id", None)
    plan = doc.get("stages", {}).get("o6_plan")
    if plan:
        for entry in plan.get("audit", []):
            entry.pop("timestamp", None)
    return doc


def load_golden(name: str) -> dict:
    return json.loads((GOLDEN / name).read_text(encoding="utf-8"))
