"""In-memory multi-tier supplier network with traversal and centrality tools.

The graph is loaded once from a JSON document and is immutable afterwards,
so every operation here is a pure read and safe under concurrent use.
Edges point supplier -> customer; tier annotation and path discovery walk
the reverse direction (customer -> supplier) outward from the focal firm.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from types import MappingProxyType
from typing import IO, Iterable, Mapping

from .text import normalize, token_set_similarity

PAGERANK_DAMPING = 0.85
PAGERANK_TOL = 1e-8
PAGERANK_MAX_ITER = 100

SIMILARITY_THRESHOLD = 0.8


class GraphError(Exception):
    """Base class for graph store failures."""


class GraphFormatError(GraphError):
    """The graph document does not match the expected schema."""


class DuplicateCompanyError(GraphError):
    def __init__(self, company_id: str):
        super().__init__(f"duplicate company id: {company_id!r}")
        self.company_id = company_id


class DanglingEdgeError(GraphError):
    def __init__(self, company_id: str, edge: tuple[str, str]):
        super().__init__(
            f"edge {edge[0]!r} -> {edge[1]!r} references unknown company {company_id!r}"
        )
        self.company_id = company_id


class UnknownCompanyError(GraphError):
    def __init__(self, company_id: str):
        super().__init__(f"unknown company id: {company_id!r}")
        self.company_id = company_id


class EmptyGraphError(GraphError):
    """Centrality is undefined on an empty graph."""


@dataclass(frozen=True)
class CompanyRecord:
    """One supplier/manufacturer node."""

    id: str
    name: str
    country: str
    industry: str


@dataclass(frozen=True)
class SupplyEdge:
    """Directed supply relationship: ``supplier`` ships to ``customer``."""

    supplier: str
    customer: str


@dataclass(frozen=True)
class PathNode:
    """(company id, country, industry) triple along a disruption path."""

    company: str
    country: str
    industry: str


@dataclass(frozen=True)
class DisruptedPath:
    """Chain from the focal firm (index 0) out to a disrupted supplier.

    ``nodes[k]`` sits at tier ``k``; consecutive nodes are joined by a
    supply edge ``nodes[k+1] -> nodes[k]``. ``products``, when set by
    enrichment, holds one label per edge: ``products[k]`` annotates the
    link between ``nodes[k]`` and ``nodes[k+1]``.
    """

    nodes: tuple[PathNode, ...]
    disrupted_tier: int
    products: tuple[str, ...] | None = None

    def to_dict(self) -> dict:
        return {
            "nodes": [
                {"company": n.company, "country": n.country, "industry": n.industry}
                for n in self.nodes
            ],
            "disrupted_tier": self.disrupted_tier,
            "products": list(self.products) if self.products is not None else None,
        }

    @classmethod
    def from_dict(cls, raw: Mapping) -> "DisruptedPath":
        return cls(
            nodes=tuple(
                PathNode(n["company"], n["country"], n["industry"])
                for n in raw["nodes"]
            ),
            disrupted_tier=int(raw["disrupted_tier"]),
            products=tuple(raw["products"]) if raw.get("products") is not None else None,
        )


@dataclass(frozen=True)
class DisruptionCriteria:
    """What counts as disrupted: any country, industry, or company hit.

    ``companies`` holds canonical graph ids; countries and industries are
    free-form labels compared after normalization. The three sets are
    OR-combined.
    """

    countries: frozenset[str] = frozenset()
    industries: frozenset[str] = frozenset()
    companies: frozenset[str] = frozenset()

    def __post_init__(self):
        object.__setattr__(
            self, "_norm_countries", frozenset(normalize(c) for c in self.countries)
        )
        object.__setattr__(
            self, "_norm_industries", frozenset(normalize(i) for i in self.industries)
        )

    def matches(self, record: CompanyRecord) -> bool:
        return (
            record.id in self.companies
            or normalize(record.country) in self._norm_countries
            or normalize(record.industry) in self._norm_industries
        )

    def is_empty(self) -> bool:
        return not (self.countries or self.industries or self.companies)


@dataclass(frozen=True)
class Resolution:
    """Outcome of resolving free text against the company catalogue."""

    matched: bool
    company: str | None
    candidates: tuple[tuple[str, float], ...] = ()


@dataclass(frozen=True)
class CentralityTable:
    """Degree centrality and PageRank for every company.

    ``pagerank`` is max-normalized into [0, 1]; ``pagerank_raw`` is the
    converged distribution (sums to 1).
    """

    degree: Mapping[str, float]
    pagerank: Mapping[str, float]
    pagerank_raw: Mapping[str, float]


@dataclass(frozen=True)
class SupplyGraph:
    """Immutable supplier network."""

    companies: Mapping[str, CompanyRecord]
    edges: tuple[SupplyEdge, ...]
    focal: str | None = None
    # adjacency caches, keyed by company id, values sorted for determinism
    suppliers_of: Mapping[str, tuple[str, ...]] = field(repr=False, default_factory=dict)
    customers_of: Mapping[str, tuple[str, ...]] = field(repr=False, default_factory=dict)

    def __contains__(self, company_id: str) -> bool:
        return company_id in self.companies

    def __len__(self) -> int:
        return len(self.companies)

    def record(self, company_id: str) -> CompanyRecord:
        try:
            return self.companies[company_id]
        except KeyError:
            raise UnknownCompanyError(company_id) from None

    def to_dict(self) -> dict:
        doc = {
            "companies": [
                {"id": c.id, "name": c.name, "country": c.country, "industry": c.industry}
                for c in sorted(self.companies.values(), key=lambda c: c.id)
            ],
            "edges": [
                {"supplier": e.supplier, "customer": e.customer} for e in self.edges
            ],
        }
        if self.focal is not None:
            doc["focal"] = self.focal
        return doc


def build_graph(
    companies: Iterable[CompanyRecord],
    edges: Iterable[SupplyEdge],
    focal: str | None = None,
) -> SupplyGraph:
    """Assemble and validate an immutable graph from parsed records."""
    catalog: dict[str, CompanyRecord] = {}
    for company in companies:
        if not company.id:
            raise GraphFormatError("company with empty id")
        if company.id in catalog:
            raise DuplicateCompanyError(company.id)
        if not company.country or not company.industry:
            raise GraphFormatError(
                f"company {company.id!r} must carry non-empty country and industry"
            )
        catalog[company.id] = company

    deduped: dict[tuple[str, str], SupplyEdge] = {}
    for edge in edges:
        for endpoint in (edge.supplier, edge.customer):
            if endpoint not in catalog:
                raise DanglingEdgeError(endpoint, (edge.supplier, edge.customer))
        if edge.supplier == edge.customer:
            raise GraphFormatError(f"self-loop on company {edge.supplier!r}")
        deduped[(edge.supplier, edge.customer)] = edge
    ordered = tuple(deduped[key] for key in sorted(deduped))

    if focal is not None and focal not in catalog:
        raise UnknownCompanyError(focal)

    suppliers: dict[str, list[str]] = {cid: [] for cid in catalog}
    customers: dict[str, list[str]] = {cid: [] for cid in catalog}
    for edge in ordered:
        suppliers[edge.customer].append(edge.supplier)
        customers[edge.supplier].append(edge.customer)

    return SupplyGraph(
        companies=MappingProxyType(catalog),
        edges=ordered,
        focal=focal,
        suppliers_of=MappingProxyType(
            {cid: tuple(sorted(ids)) for cid, ids in suppliers.items()}
        ),
        customers_of=MappingProxyType(
            {cid: tuple(sorted(ids)) for cid, ids in customers.items()}
        ),
    )


def load_graph(source: str | os.PathLike | IO[str]) -> SupplyGraph:
    """Load a graph document (JSON: ``companies`` + ``edges`` lists).

    Raises :class:`GraphFormatError` on malformed documents,
    :class:`DanglingEdgeError` / :class:`DuplicateCompanyError` naming the
    offending record.
    """
    if hasattr(source, "read"):
        text = source.read()
    else:
        with open(source, "r", encoding="utf-8") as fh:
            text = fh.read()
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise GraphFormatError(f"not valid JSON: {exc}") from exc
    return graph_from_dict(doc)


def graph_from_dict(doc: Mapping) -> SupplyGraph:
    if not isinstance(doc, Mapping):
        raise GraphFormatError("top level must be an object")
    for key in ("companies", "edges"):
        if key not in doc or not isinstance(doc[key], list):
            raise GraphFormatError(f"missing or non-list field: {key!r}")

    companies = []
    for i, raw in enumerate(doc["companies"]):
        try:
            companies.append(
                CompanyRecord(
                    id=str(raw["id"]),
                    name=str(raw["name"]),
                    country=str(raw["country"]),
                    industry=str(raw["industry"]),
                )
            )
        except (KeyError, TypeError) as exc:
            raise GraphFormatError(f"companies[{i}] malformed: {exc!r}") from exc

    edges = []
    for i, raw in enumerate(doc["edges"]):
        try:
            edges.append(SupplyEdge(supplier=str(raw["supplier"]), customer=str(raw["customer"])))
        except (KeyError, TypeError) as exc:
            raise GraphFormatError(f"edges[{i}] malformed: {exc!r}") from exc

    focal = doc.get("focal")
    return build_graph(companies, edges, focal=str(focal) if focal is not None else None)


def resolve_entity(free_text: str, graph: SupplyGraph) -> Resolution:
    """Map a free-text company mention onto a canonical graph id.

    Normalized-exact match wins; failing that, the best token-set Jaccard
    similarity >= 0.8 wins. Ties break to the lexicographically smallest
    id. Anything else is a no-match carrying the top-3 candidates.
    """
    if not free_text or not free_text.strip():
        raise ValueError("empty entity text")

    query = normalize(free_text)
    exact = sorted(
        cid for cid, rec in graph.companies.items() if normalize(rec.name) == query
    )
    if exact:
        return Resolution(matched=True, company=exact[0])

    scored = sorted(
        ((token_set_similarity(free_text, rec.name), cid) for cid, rec in graph.companies.items()),
        key=lambda pair: (-pair[0], pair[1]),
    )
    if scored and scored[0][0] >= SIMILARITY_THRESHOLD:
        return Resolution(matched=True, company=scored[0][1])
    return Resolution(
        matched=False,
        company=None,
        candidates=tuple((cid, sim) for sim, cid in scored[:3]),
    )


def annotate_tiers(graph: SupplyGraph, focal: str) -> dict[str, int]:
    """Breadth-first tier depths over reversed supply edges.

    The focal firm is tier 0; each company reachable through its supplier
    chain gets its minimum depth. Unreachable companies are absent.
    """
    if focal not in graph:
        raise UnknownCompanyError(focal)
    tiers = {focal: 0}
    frontier = [focal]
    depth = 0
    while frontier:
        depth += 1
        nxt = []
        for node in frontier:
            for supplier in graph.suppliers_of.get(node, ()):
                if supplier not in tiers:
                    tiers[supplier] = depth
                    nxt.append(supplier)
        frontier = nxt
    return tiers


def downstream_set(graph: SupplyGraph, supplier: str) -> dict[str, int]:
    """Minimal depths of every company in ``supplier``'s upstream subtree.

    Walks reversed supply edges from ``supplier`` (its suppliers, their
    suppliers, ...). The supplier itself is excluded.
    """
    if supplier not in graph:
        raise UnknownCompanyError(supplier)
    depths = annotate_tiers(graph, supplier)
    del depths[supplier]
    return depths


def disrupted_paths(
    graph: SupplyGraph,
    focal: str,
    criteria: DisruptionCriteria,
    max_tier: int = 4,
) -> list[DisruptedPath]:
    """Every minimal-depth route from the focal firm to a matching company.

    A company is disrupted when any criterion hits (country OR industry OR
    canonical company id). All distinct shortest routes to each disrupted
    company within ``max_tier`` are returned, one path per route, sorted by
    (tier, node ids). Cycles in the supplier data cannot appear because
    shortest routes never revisit a node.
    """
    if focal not in graph:
        raise UnknownCompanyError(focal)
    if max_tier < 1:
        raise ValueError("max_tier must be >= 1")
    if criteria.is_empty():
        return []

    dist = {focal: 0}
    parents: dict[str, list[str]] = {focal: []}
    frontier = [focal]
    depth = 0
    while frontier and depth < max_tier:
        depth += 1
        nxt = []
        for node in frontier:
            for supplier in graph.suppliers_of.get(node, ()):
                if supplier not in dist:
                    dist[supplier] = depth
                    parents[supplier] = [node]
                    nxt.append(supplier)
                elif dist[supplier] == depth:
                    parents[supplier].append(node)
        frontier = nxt

    paths: list[DisruptedPath] = []
    for node in sorted(dist):
        tier = dist[node]
        if tier == 0 or not criteria.matches(graph.record(node)):
            continue
        for route in _routes_to_focal(node, parents):
            nodes = tuple(
                PathNode(cid, graph.record(cid).country, graph.record(cid).industry)
                for cid in route
            )
            paths.append(DisruptedPath(nodes=nodes, disrupted_tier=tier))
    paths.sort(key=lambda p: (p.disrupted_tier, tuple(n.company for n in p.nodes)))
    return paths


def _routes_to_focal(node: str, parents: Mapping[str, list[str]]) -> list[list[str]]:
    """All shortest routes, each ordered focal-first."""
    if not parents[node]:
        return [[node]]
    routes = []
    for parent in sorted(parents[node]):
        for route in _routes_to_focal(parent, parents):
            routes.append(route + [node])
    return routes


def centrality(graph: SupplyGraph) -> CentralityTable:
    """Degree centrality (undirected) and PageRank (directed, damping 0.85).

    PageRank runs power iteration to an L1 tolerance of 1e-8 or 100
    iterations, treating dangling mass uniformly, then is max-normalized.
    """
    if len(graph) == 0:
        raise EmptyGraphError("centrality on empty graph")

    order = sorted(graph.companies)
    n = len(order)

    neighbors: dict[str, set[str]] = {cid: set() for cid in order}
    for edge in graph.edges:
        neighbors[edge.supplier].add(edge.customer)
        neighbors[edge.customer].add(edge.supplier)
    degree = {
        cid: (len(neighbors[cid]) / (n - 1)) if n > 1 else 0.0 for cid in order
    }

    out_degree = {cid: len(graph.customers_of.get(cid, ())) for cid in order}
    rank = {cid: 1.0 / n for cid in order}
    base = (1.0 - PAGERANK_DAMPING) / n
    for _ in range(PAGERANK_MAX_ITER):
        dangling = sum(rank[cid] for cid in order if out_degree[cid] == 0)
        spread = PAGERANK_DAMPING * dangling / n
        nxt = {cid: base + spread for cid in order}
        for cid in order:
            if out_degree[cid]:
                share = PAGERANK_DAMPING * rank[cid] / out_degree[cid]
                for customer in graph.customers_of[cid]:
                    nxt[customer] += share
        err = sum(abs(nxt[cid] - rank[cid]) for cid in order)
        rank = nxt
        if err < PAGERANK_TOL:
            break

    top = max(rank.values())
    normalized = {cid: (rank[cid] / top) if top > 0 else 0.0 for cid in order}
    return CentralityTable(
        degree=MappingProxyType(degree),
        pagerank=MappingProxyType(normalized),
        pagerank_raw=MappingProxyType(dict(rank)),
    )
