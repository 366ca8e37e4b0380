"""Product annotation for disrupted supplier chains.

Each supplier->customer link in a path gets a product label. The offline
catalog is authoritative; an optional search backend fills gaps; anything
still unresolved gets the "unknown" sentinel. Enrichment never fails a
pipeline run and never touches path structure.
"""

from __future__ import annotations

import json
import logging
import os
import threading
import time
from dataclasses import dataclass, field
from typing import IO, Callable, Mapping, Sequence

from .graph import DisruptedPath

logger = logging.getLogger(__name__)

UNKNOWN_PRODUCT = "unknown"

# Live search backends authenticate with this; the bundled catalog and
# recorded-replay backends never need it.
ENV_SEARCH_API_KEY = "CHAINWATCH_SEARCH_API_KEY"


class EnrichmentError(Exception):
    pass


@dataclass(frozen=True)
class ProductCatalog:
    """Offline product knowledge.

    ``entries`` maps (supplier id, customer id) to a product; ``fallback``
    maps a supplier id to its default product when the pair is unknown.
    """

    entries: Mapping[tuple[str, str], str]
    fallback: Mapping[str, str]

    @classmethod
    def empty(cls) -> "ProductCatalog":
        return cls(entries={}, fallback={})


def load_catalog(source: str | os.PathLike | IO[str]) -> ProductCatalog:
    """Read catalog rows ``{supplier, customer?, product}`` from JSON.

    Rows without a customer become supplier-level fallbacks.
    """
    if hasattr(source, "read"):
        rows = json.load(source)
    else:
        with open(source, "r", encoding="utf-8") as fh:
            rows = json.load(fh)
    if not isinstance(rows, list):
        raise EnrichmentError("catalog must be a JSON list")
    entries: dict[tuple[str, str], str] = {}
    fallback: dict[str, str] = {}
    for i, row in enumerate(rows):
        try:
            supplier = row["supplier"]
            product = row["product"]
        except (KeyError, TypeError) as exc:
            raise EnrichmentError(f"catalog row {i} malformed: {exc!r}") from exc
        if not product:
            raise EnrichmentError(f"catalog row {i}: empty product")
        customer = row.get("customer")
        if customer:
            entries[(supplier, customer)] = product
        else:
            fallback[supplier] = product
    return ProductCatalog(entries=entries, fallback=fallback)


@dataclass
class SearchBackend:
    """Optional product lookup by (supplier id, customer id).

    Results are unverified hints, ranked below the catalog. ``query``
    returns candidate product strings; the first one is used. Calls are
    throttled to ``rate_limit_qpm`` queries per minute.
    """

    name: str
    query: Callable[[str, str], Sequence[str]]
    rate_limit_qpm: int = 60
    _lock: threading.Lock = field(init=False, repr=False)
    _stamps: list = field(init=False, repr=False, default_factory=list)

    def __post_init__(self):
        self._lock = threading.Lock()

    def throttled_query(self, supplier: str, customer: str) -> Sequence[str]:
        with self._lock:
            now = time.monotonic()
            self._stamps = [t for t in self._stamps if now - t < 60.0]
            if len(self._stamps) >= self.rate_limit_qpm:
                wait = 60.0 - (now - self._stamps[0])
                time.sleep(max(wait, 0.0))
            self._stamps.append(time.monotonic())
        return self.query(supplier, customer)


def recorded_search_backend(source: str | os.PathLike | IO[str] | Mapping) -> SearchBackend:
    """Replay backend fed from recorded responses.

    The document is ``{"records": [{supplier, customer, products: [...]}]}``;
    a missed key raises, which enrichment degrades to "unknown".
    """
    if isinstance(source, Mapping):
        doc = source
    elif hasattr(source, "read"):
        doc = json.load(source)
    else:
        with open(source, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    table = {
        (row["supplier"], row["customer"]): list(row["products"])
        for row in doc.get("records", [])
    }

    def query(supplier: str, customer: str) -> Sequence[str]:
        try:
            return table[(supplier, customer)]
        except KeyError:
            raise EnrichmentError(f"no recorded response for {supplier!r} -> {customer!r}")

    return SearchBackend(name="recorded", query=query, rate_limit_qpm=100000)


def enrich_paths(
    paths: Sequence[DisruptedPath],
    catalog: ProductCatalog,
    backend: SearchBackend | None = None,
    warnings: list[str] | None = None,
) -> list[DisruptedPath]:
    """Annotate every edge of every path with a product label.

    Precedence per edge: exact catalog entry, then supplier fallback, then
    backend result, then "unknown". Node order and tiers are untouched,
    and re-enriching an already enriched path is a no-op for edges that
    already carry a real label.
    """
    out = []
    for path in paths:
        products = []
        for i in range(len(path.nodes) - 1):
            customer = path.nodes[i].company
            supplier = path.nodes[i + 1].company
            existing = path.products[i] if path.products is not None else None
            products.append(
                _annotate(supplier, customer, existing, catalog, backend, warnings)
            )
        out.append(
            DisruptedPath(
                nodes=path.nodes,
                disrupted_tier=path.disrupted_tier,
                products=tuple(products),
            )
        )
    return out


def _annotate(supplier, customer, existing, catalog, backend, warnings) -> str:
    hit = catalog.entries.get((supplier, customer))
    if hit:
        return hit
    hit = catalog.fallback.get(supplier)
    if hit:
        return hit
    if existing and existing != UNKNOWN_PRODUCT:
        return existing
    if backend is not None:
        try:
            results = backend.throttled_query(supplier, customer)
            if results:
                return results[0]
        except Exception as exc:
            message = f"search backend {backend.name!r} failed for {supplier!r} -> {customer!r}: {exc}"
            logger.warning(message)
            if warnings is not None:
                warnings.append(message)
    return UNKNOWN_PRODUCT
