import random

import pytest

from chainwatch.graph import (
    CompanyRecord,
    DisruptionCriteria,
    SupplyEdge,
    build_graph,
)
from chainwatch.sourcing import (
    CandidateSource,
    CandidateSupplier,
    NoCandidateSourceError,
    SourcingError,
    ValidationStatus,
    catalog_backend,
    find_alternatives,
    recorded_search_source,
    validate_candidate,
)

from .oracles import random_criteria, random_graph, relaxation_depths

RUSSIA_CRITERIA = DisruptionCriteria(
    countries=frozenset({"Russia", "Ukraine"}),
    industries=frozenset({"Metals & Mining", "Energy", "Chemicals"}),
    companies=frozenset({"mmc-norilsk-nickel-pjsc"}),
)

UMICORE_ROW = {"product": "Catalysts", "name": "Umicore", "country": "Belgium", "industry": "Chemicals"}


class TestFindAlternatives:
    def test_catalog_hit(self, mini_mb):
        backend = catalog_backend([UMICORE_ROW])
        found = find_alternatives("Catalysts", "johnson-matthey-plc", backend, mini_mb)
        assert [c.name for c in found] == ["Umicore"]
        assert found[0].country == "Belgium"
        assert found[0].industry == "Chemicals"
        assert found[0].validation is ValidationStatus.UNCHECKED
        assert found[0].source is CandidateSource.CATALOG

    def test_comma_separated_product_query_matches_parts(self, mini_mb):
        backend = catalog_backend([UMICORE_ROW])
        found = find_alternatives(
            "Catalysts, Precious Metal Products", "johnson-matthey-plc", backend, mini_mb
        )
        assert [c.name for c in found] == ["Umicore"]

    def test_empty_catalog_empty_result(self, mini_mb):
        backend = catalog_backend([])
        assert find_alternatives("Catalysts", "johnson-matthey-plc", backend, mini_mb) == []

    def test_excluded_supplier_never_returned(self, mini_mb):
        rows = [
            UMICORE_ROW,
            {
                "product": "Catalysts",
                "name": "Johnson Matthey PLC",
                "country": "United Kingdom",
                "industry": "Chemicals",
            },
        ]
        backend = catalog_backend(rows)
        found = find_alternatives("Catalysts", "johnson-matthey-plc", backend, mini_mb)
        assert [c.name for c in found] == ["Umicore"]

    def test_catalog_of_only_excluded_supplier(self, mini_mb):
        backend = catalog_backend(
            [
                {
                    "product": "Catalysts",
                    "name": "Johnson Matthey",
                    "country": "United Kingdom",
                    "industry": "Chemicals",
                }
            ]
        )
        assert find_alternatives("Catalysts", "johnson-matthey-plc", backend, mini_mb) == []

    def test_no_source_configured(self):
        with pytest.raises(NoCandidateSourceError):
            find_alternatives("Catalysts", "x", None)

    def test_malformed_catalog_row(self):
        with pytest.raises(SourcingError):
            catalog_backend([{"product": "Catalysts", "name": "X"}])

    def test_recorded_search_source_replays(self, mini_mb):
        backend = recorded_search_source(
            {
                "records": [
                    {
                        "product": "Catalysts",
                        "candidates": [
                            {"name": "Umicore", "country": "Belgium", "industry": "Chemicals"}
                        ],
                    }
                ]
            }
        )
        found = find_alternatives("Catalysts", "johnson-matthey-plc", backend, mini_mb)
        assert [c.name for c in found] == ["Umicore"]
        assert found[0].source is CandidateSource.SEARCH
        # an unrecorded product behaves like a search with no results
        assert find_alternatives("Widgets", "johnson-matthey-plc", backend, mini_mb) == []


class TestValidateCandidate:
    def candidate(self, name, country="Belgium", industry="Chemicals"):
        return CandidateSupplier(
            name=name, country=country, industry=industry, source=CandidateSource.CATALOG
        )

    def test_umicore_disruption_free(self, mini_mb):
        result = validate_candidate(mini_mb, self.candidate("Umicore"), RUSSIA_CRITERIA)
        assert result.validation is ValidationStatus.DISRUPTION_FREE
        assert result.exposure_evidence == ()

    def test_tier2_russian_supplier_exposes_candidate(self):
        graph = build_graph(
            [
                CompanyRecord("cand", "Candidate Corp", "Belgium", "Chemicals"),
                CompanyRecord("mid", "Mid Ltd", "France", "Alloys"),
                CompanyRecord("ru", "Volga Metals", "Russia", "Metals & Mining"),
            ],
            [SupplyEdge("mid", "cand"), SupplyEdge("ru", "mid")],
        )
        criteria = DisruptionCriteria(countries=frozenset({"Russia"}))
        result = validate_candidate(graph, self.candidate("Candidate Corp"), criteria)
        assert result.validation is ValidationStatus.EXPOSED
        (evidence,) = result.exposure_evidence
        assert evidence.disrupted_tier == 2
        assert [n.company for n in evidence.nodes] == ["cand", "mid", "ru"]

    def test_candidate_absent_from_graph_stays_unchecked(self, mini_mb):
        result = validate_candidate(
            mini_mb, self.candidate("Nordic Steel AB"), RUSSIA_CRITERIA
        )
        assert result.validation is ValidationStatus.UNCHECKED
        assert "not in graph" in result.note

    def test_depth_limits_the_scan(self):
        graph = build_graph(
            [
                CompanyRecord("cand", "Candidate Corp", "Belgium", "Chemicals"),
                CompanyRecord("a", "A", "France", "Alloys"),
                CompanyRecord("b", "B", "France", "Alloys"),
                CompanyRecord("c", "C", "France", "Alloys"),
                CompanyRecord("ru", "Deep Metals", "Russia", "Alloys"),
            ],
            [
                SupplyEdge("a", "cand"),
                SupplyEdge("b", "a"),
                SupplyEdge("c", "b"),
                SupplyEdge("ru", "c"),
            ],
        )
        criteria = DisruptionCriteria(countries=frozenset({"Russia"}))
        shallow = validate_candidate(graph, self.candidate("Candidate Corp"), criteria, depth=3)
        assert shallow.validation is ValidationStatus.DISRUPTION_FREE
        deep = validate_candidate(graph, self.candidate("Candidate Corp"), criteria, depth=4)
        assert deep.validation is ValidationStatus.EXPOSED

    def test_invalid_depth(self, mini_mb):
        with pytest.raises(SourcingError):
            validate_candidate(mini_mb, self.candidate("Umicore"), RUSSIA_CRITERIA, depth=0)

    def test_exposed_implies_evidence_with_valid_structure(self):
        rng = random.Random(77)
        edge_pairs = None
        checked = 0
        while checked < 30:
            graph = random_graph(rng, max_nodes=30, max_edges=90)
            criteria = random_criteria(rng, graph)
            root = rng.choice(sorted(graph.companies))
            candidate = CandidateSupplier(
                name=graph.record(root).name,
                country=graph.record(root).country,
                industry=graph.record(root).industry,
                source=CandidateSource.CATALOG,
            )
            if criteria.is_empty():
                continue
            checked += 1
            result = validate_candidate(graph, candidate, criteria, depth=3)
            edge_pairs = {(e.supplier, e.customer) for e in graph.edges}
            depths = relaxation_depths(graph, root)
            matches_within = sorted(
                cid
                for cid, d in depths.items()
                if 1 <= d <= 3 and criteria.matches(graph.record(cid))
            )
            if result.validation is ValidationStatus.DISRUPTION_FREE:
                assert matches_within == []
            else:
                assert matches_within
                assert {p.nodes[-1].company for p in result.exposure_evidence} == set(
                    matches_within
                )
                for path in result.exposure_evidence:
                    assert path.nodes[0].company == root
                    assert criteria.matches(graph.record(path.nodes[-1].company))
                    for i in range(len(path.nodes) - 1):
                        assert (
                            path.nodes[i + 1].company,
                            path.nodes[i].company,
                        ) in edge_pairs
