"""Alternative supplier discovery and upstream validation.

Candidates come from an offline catalog (or an optional search backend)
and are then validated against the active disruption: a candidate is
DisruptionFree only when no company in its upstream supplier chain, down
to the configured depth, matches the disruption criteria.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, replace
from enum import Enum
from typing import IO, Callable, Mapping, Sequence

from .graph import (
    DisruptedPath,
    DisruptionCriteria,
    SupplyGraph,
    disrupted_paths,
    resolve_entity,
)
from .text import normalize

DEFAULT_VALIDATION_DEPTH = 3


class SourcingError(Exception):
    pass


class NoCandidateSourceError(SourcingError):
    pass


class CandidateSource(Enum):
    CATALOG = "catalog"
    SEARCH = "search"


class ValidationStatus(Enum):
    UNCHECKED = "Unchecked"
    DISRUPTION_FREE = "DisruptionFree"
    EXPOSED = "Exposed"


@dataclass(frozen=True)
class CandidateSupplier:
    name: str
    country: str
    industry: str
    source: CandidateSource
    validation: ValidationStatus = ValidationStatus.UNCHECKED
    exposure_evidence: tuple[DisruptedPath, ...] = ()
    note: str | None = None

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "country": self.country,
            "industry": self.industry,
            "source": self.source.value,
            "validation": self.validation.value,
            "exposure_evidence": [p.to_dict() for p in self.exposure_evidence],
            "note": self.note,
        }


@dataclass(frozen=True)
class SourcingBackend:
    """Candidate source contract: ``find(product)`` returns raw candidates."""

    name: str
    find: Callable[[str], Sequence[CandidateSupplier]]


def catalog_backend(rows: Sequence[Mapping]) -> SourcingBackend:
    """Offline candidate source over ``{product, name, country, industry}`` rows.

    A row matches a query when its product equals the query or any of the
    query's comma-separated parts, compared after normalization, so an
    enriched label like "Catalysts, Precious Metal Products" still finds
    suppliers listed under "Catalysts".
    """
    table: list[tuple[str, CandidateSupplier]] = []
    for i, row in enumerate(rows):
        try:
            candidate = CandidateSupplier(
                name=row["name"],
                country=row["country"],
                industry=row["industry"],
                source=CandidateSource.CATALOG,
            )
            table.append((normalize(row["product"]), candidate))
        except (KeyError, TypeError) as exc:
            raise SourcingError(f"alternatives catalog row {i} malformed: {exc!r}") from exc

    def find(product: str) -> list[CandidateSupplier]:
        queries = {normalize(product)}
        queries.update(normalize(part) for part in product.split(",") if part.strip())
        queries.discard("")
        return [candidate for key, candidate in table if key in queries]

    return SourcingBackend(name="catalog", find=find)


def load_alternatives_catalog(source: str | os.PathLike | IO[str]) -> SourcingBackend:
    if hasattr(source, "read"):
        rows = json.load(source)
    else:
        with open(source, "r", encoding="utf-8") as fh:
            rows = json.load(fh)
    if not isinstance(rows, list):
        raise SourcingError("alternatives catalog must be a JSON list")
    return catalog_backend(rows)


def recorded_search_source(source: str | os.PathLike | IO[str] | Mapping) -> SourcingBackend:
    """Replay a recorded web-search candidate source.

    Document shape: ``{"records": [{product, candidates: [{name, country,
    industry}]}]}``. Unlike the catalog, results are tagged as search hits
    and an unrecorded product yields no candidates rather than an error,
    mirroring how a live search with no results behaves.
    """
    if isinstance(source, Mapping):
        doc = source
    elif hasattr(source, "read"):
        doc = json.load(source)
    else:
        with open(source, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    table: dict[str, list[CandidateSupplier]] = {}
    for row in doc.get("records", []):
        table[normalize(row["product"])] = [
            CandidateSupplier(
                name=c["name"],
                country=c["country"],
                industry=c["industry"],
                source=CandidateSource.SEARCH,
            )
            for c in row["candidates"]
        ]

    def find(product: str) -> list[CandidateSupplier]:
        queries = {normalize(product)}
        queries.update(normalize(part) for part in product.split(",") if part.strip())
        queries.discard("")
        out: list[CandidateSupplier] = []
        for key in sorted(queries):
            out.extend(table.get(key, []))
        return out

    return SourcingBackend(name="recorded-search", find=find)


def find_alternatives(
    product: str,
    excluded: str,
    backend: SourcingBackend | None,
    graph: SupplyGraph | None = None,
) -> list[CandidateSupplier]:
    """Unvalidated replacement candidates for a product.

    ``excluded`` is the supplier being replaced (canonical id); it never
    appears among the results. With a graph at hand the exclusion check
    resolves candidate names properly, otherwise it falls back to a
    normalized name comparison against the id.
    """
    if backend is None:
        raise NoCandidateSourceError("no candidate source configured")

    excluded_names = {normalize(excluded)}
    if graph is not None and excluded in graph:
        excluded_names.add(normalize(graph.record(excluded).name))

    out = []
    for candidate in backend.find(product):
        if normalize(candidate.name) in excluded_names:
            continue
        if graph is not None:
            resolution = resolve_entity(candidate.name, graph)
            if resolution.matched and resolution.company == excluded:
                continue
        out.append(candidate)
    return out


def validate_candidate(
    graph: SupplyGraph,
    candidate: CandidateSupplier,
    criteria: DisruptionCriteria,
    depth: int = DEFAULT_VALIDATION_DEPTH,
) -> CandidateSupplier:
    """Check a candidate's upstream chain against the disruption criteria.

    DisruptionFree when no supplier within ``depth`` tiers above the
    candidate matches; Exposed with the offending chains as evidence
    otherwise. Candidates absent from the graph stay Unchecked with a
    note, since there is nothing to traverse.
    """
    if depth <= 0:
        raise SourcingError(f"validation depth must be positive, got {depth}")

    resolution = resolve_entity(candidate.name, graph)
    if not resolution.matched:
        return replace(
            candidate,
            validation=ValidationStatus.UNCHECKED,
            note=f"not in graph: {candidate.name!r} did not resolve",
        )

    evidence = disrupted_paths(graph, resolution.company, criteria, max_tier=depth)
    if evidence:
        return replace(
            candidate,
            validation=ValidationStatus.EXPOSED,
            exposure_evidence=tuple(evidence),
        )
    return replace(candidate, validation=ValidationStatus.DISRUPTION_FREE)
