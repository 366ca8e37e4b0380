"""Disruption detection: turn article text into a structured report.

Backends do the reading; this module owns the report schema, validation,
and a fully deterministic rule backend (gazetteer + keyword lexicon) so the
whole pipeline can run and be evaluated without any model or network.
"""

from __future__ import annotations

import json
import os
import re
import threading
import time
from dataclasses import dataclass, field
from enum import Enum
from typing import IO, Callable, Mapping, Sequence

from .text import dedupe

DEFAULT_TIMEOUT = 30.0
DEFAULT_MAX_RETRIES = 3
BACKOFF_INITIAL = 1.0


class ExtractionError(Exception):
    """Base class for extraction failures."""


class EmptyArticleError(ExtractionError):
    pass


class BackendTransportError(ExtractionError):
    """Backend could not produce a response (timeout, transport, HTTP)."""


class ReportValidationError(ExtractionError):
    """Backend response does not satisfy the report schema.

    ``path`` names the offending field, e.g. ``countries[2]``.
    """

    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}")
        self.path = path


class DisruptionType(Enum):
    GEOPOLITICAL = "Geopolitical"
    TRADE_POLICY = "TradePolicy"
    NATURAL_DISASTER = "NaturalDisaster"
    ECONOMIC_CRISIS = "EconomicCrisis"
    CYBERSECURITY = "Cybersecurity"
    LABOUR_STRIKE = "LabourStrike"
    COMPANY_BANKRUPTCY = "CompanyBankruptcy"
    OTHER = "Other"


def _coerce_type(raw: str) -> DisruptionType:
    key = re.sub(r"[^a-z]", "", raw.lower())
    aliases = {"laborstrike": DisruptionType.LABOUR_STRIKE}
    for member in DisruptionType:
        if re.sub(r"[^a-z]", "", member.value.lower()) == key:
            return member
    if key in aliases:
        return aliases[key]
    raise KeyError(raw)


@dataclass(frozen=True)
class DisruptionReport:
    """Structured output of the detection stage.

    Entity lists are deduplicated after normalization; a report with all
    entity lists empty is treated downstream as a non-event.
    """

    disruption_type: DisruptionType
    countries: tuple[str, ...]
    industries: tuple[str, ...]
    companies: tuple[str, ...]
    summary: str
    diagnostic_questions: tuple[str, ...] = ()

    def is_positive(self) -> bool:
        return bool(self.countries or self.industries or self.companies)

    def to_dict(self) -> dict:
        return {
            "disruption_type": self.disruption_type.value,
            "countries": list(self.countries),
            "industries": list(self.industries),
            "companies": list(self.companies),
            "summary": self.summary,
            "diagnostic_questions": list(self.diagnostic_questions),
        }


@dataclass
class ExtractionBackend:
    """Contract every detection backend satisfies.

    ``invoke(article, focal)`` returns a raw mapping that must validate
    against the report schema. ``max_in_flight`` bounds concurrent calls;
    the engine acquires the semaphore around every invocation.
    """

    name: str
    invoke: Callable[[str, str], Mapping]
    timeout: float = DEFAULT_TIMEOUT
    max_retries: int = DEFAULT_MAX_RETRIES
    max_in_flight: int = 4
    _slots: threading.BoundedSemaphore = field(init=False, repr=False)

    def __post_init__(self):
        self._slots = threading.BoundedSemaphore(self.max_in_flight)


def validate_report(raw: Mapping | str) -> DisruptionReport:
    """Schema-check, enum-coerce, and deduplicate a raw backend response.

    Never panics on arbitrary parseable input: anything that does not fit
    raises :class:`ReportValidationError` naming the offending path.
    """
    if isinstance(raw, (str, bytes)):
        try:
            raw = json.loads(raw)
        except json.JSONDecodeError as exc:
            raise ReportValidationError("$", f"not valid JSON: {exc}") from exc
    if not isinstance(raw, Mapping):
        raise ReportValidationError("$", "report must be an object")

    if "disruption_type" not in raw:
        raise ReportValidationError("disruption_type", "missing field")
    if not isinstance(raw["disruption_type"], str):
        raise ReportValidationError("disruption_type", "must be a string")
    try:
        dtype = _coerce_type(raw["disruption_type"])
    except KeyError:
        raise ReportValidationError(
            "disruption_type", f"unknown value {raw['disruption_type']!r}"
        ) from None

    lists: dict[str, tuple[str, ...]] = {}
    for key in ("countries", "industries", "companies"):
        if key not in raw:
            raise ReportValidationError(key, "missing field")
        value = raw[key]
        if not isinstance(value, Sequence) or isinstance(value, (str, bytes)):
            raise ReportValidationError(key, "must be a list of strings")
        for i, item in enumerate(value):
            if not isinstance(item, str):
                raise ReportValidationError(f"{key}[{i}]", "must be a string")
        lists[key] = dedupe(list(value))

    summary = raw.get("summary", "")
    if not isinstance(summary, str):
        raise ReportValidationError("summary", "must be a string")

    questions = raw.get("diagnostic_questions", [])
    if not isinstance(questions, Sequence) or isinstance(questions, (str, bytes)):
        raise ReportValidationError("diagnostic_questions", "must be a list of strings")
    for i, item in enumerate(questions):
        if not isinstance(item, str):
            raise ReportValidationError(f"diagnostic_questions[{i}]", "must be a string")

    return DisruptionReport(
        disruption_type=dtype,
        countries=lists["countries"],
        industries=lists["industries"],
        companies=lists["companies"],
        summary=summary,
        diagnostic_questions=tuple(questions),
    )


def extract_report(
    article: str,
    focal: str,
    backend: ExtractionBackend,
    sleep: Callable[[float], None] = time.sleep,
) -> DisruptionReport:
    """Run one article through a backend and validate the result.

    Transport failures are retried ``backend.max_retries`` times with
    exponential backoff starting at 1 s; schema failures are not retried.
    """
    if not article or not article.strip():
        raise EmptyArticleError("article text is empty")

    attempts = backend.max_retries + 1
    delay = BACKOFF_INITIAL
    last: BackendTransportError | None = None
    for attempt in range(attempts):
        try:
            with backend._slots:
                raw = backend.invoke(article, focal)
            return validate_report(raw)
        except BackendTransportError as exc:
            last = exc
            if attempt < attempts - 1:
                sleep(delay)
                delay *= 2
    raise BackendTransportError(
        f"backend {backend.name!r} failed after {attempts} attempts: {last}"
    )


# --------------------------------------------------------------------------
# Rule backend: deterministic gazetteer scan
# --------------------------------------------------------------------------

_KINDS = ("country", "industry", "company")


@dataclass(frozen=True)
class GazetteerEntry:
    term: str
    kind: str  # country | industry | company
    canonical: str


@dataclass(frozen=True)
class TypeRule:
    keyword: str
    type: DisruptionType
    priority: int


def rule_backend(
    gazetteer: Sequence[GazetteerEntry],
    type_lexicon: Sequence[TypeRule],
) -> ExtractionBackend:
    """Deterministic detection backend.

    Entities come from case-insensitive longest-match scanning of the
    gazetteer (word-boundary anchored, so "South Korea" beats "Korea");
    the type comes from the highest-priority lexicon keyword found, ties
    broken by earliest position then keyword text, else Other.
    """
    if not gazetteer:
        raise ValueError("gazetteer is empty")
    if not type_lexicon:
        raise ValueError("type lexicon is empty")
    for entry in gazetteer:
        if entry.kind not in _KINDS:
            raise ValueError(f"unknown gazetteer kind {entry.kind!r} for {entry.term!r}")

    by_term = {entry.term.lower(): entry for entry in gazetteer}
    terms = sorted(by_term, key=lambda t: (-len(t), t))
    entity_rx = re.compile(
        r"\b(?:" + "|".join(re.escape(t) for t in terms) + r")\b", re.IGNORECASE
    )
    keyword_rx = {
        rule: re.compile(r"\b" + re.escape(rule.keyword) + r"\b", re.IGNORECASE)
        for rule in type_lexicon
    }

    def invoke(article: str, focal: str) -> Mapping:
        found: dict[str, list[str]] = {kind: [] for kind in _KINDS}
        for match in entity_rx.finditer(article):
            entry = by_term[match.group(0).lower()]
            found[entry.kind].append(entry.canonical)

        hits = []
        for rule, rx in keyword_rx.items():
            m = rx.search(article)
            if m:
                hits.append((-rule.priority, m.start(), rule.keyword, rule.type.value))
        dtype = _coerce_type(min(hits)[3]) if hits else DisruptionType.OTHER

        countries = dedupe(found["country"])
        industries = dedupe(found["industry"])
        companies = dedupe(found["company"])
        return {
            "disruption_type": dtype.value,
            "countries": list(countries),
            "industries": list(industries),
            "companies": list(companies),
            "summary": _summarize(dtype, countries, industries, companies, focal),
            "diagnostic_questions": _questions(countries, industries, companies, focal),
        }

    return ExtractionBackend(name="rule", invoke=invoke, timeout=5.0, max_retries=0)


def _summarize(dtype, countries, industries, companies, focal) -> str:
    if not (countries or industries or companies):
        return f"No supply chain disruption signals detected relevant to {focal}."
    bits = []
    if countries:
        bits.append("countries: " + ", ".join(countries))
    if industries:
        bits.append("industries: " + ", ".join(industries))
    if companies:
        bits.append("companies: " + ", ".join(companies))
    return f"{dtype.value} disruption affecting {'; '.join(bits)}. {focal} should assess exposure across its extended supplier network."


def _questions(countries, industries, companies, focal) -> list[str]:
    questions = []
    if countries:
        where = " or ".join(countries)
        questions.append(f"Which Tier-1 suppliers of {focal} are located in {where}?")
        questions.append(
            f"Which Tier-2 to Tier-4 suppliers of {focal} are located in {where}, and through which upstream chains?"
        )
    if industries:
        what = " or ".join(industries)
        questions.append(
            f"Which suppliers of {focal} up to Tier-4 operate in {what}?"
        )
    if companies:
        who = " or ".join(companies)
        questions.append(
            f"Does {focal} depend on {who} directly or through deeper tiers?"
        )
    return questions


def load_gazetteer(source: str | os.PathLike | IO[str]) -> list[GazetteerEntry]:
    """Read gazetteer rows ``{term, kind, canonical}`` from JSON."""
    rows = _load_rows(source, "gazetteer")
    out = []
    for i, row in enumerate(rows):
        try:
            out.append(GazetteerEntry(term=row["term"], kind=row["kind"], canonical=row["canonical"]))
        except (KeyError, TypeError) as exc:
            raise ExtractionError(f"gazetteer row {i} malformed: {exc!r}") from exc
    return out


def load_type_lexicon(source: str | os.PathLike | IO[str]) -> list[TypeRule]:
    """Read lexicon rows ``{keyword, type, priority}`` from JSON."""
    rows = _load_rows(source, "type lexicon")
    out = []
    for i, row in enumerate(rows):
        try:
            out.append(
                TypeRule(
                    keyword=row["keyword"],
                    type=_coerce_type(row["type"]),
                    priority=int(row["priority"]),
                )
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise ExtractionError(f"type lexicon row {i} malformed: {exc!r}") from exc
    return out


def _load_rows(source, label: str) -> list:
    if hasattr(source, "read"):
        doc = json.load(source)
    else:
        with open(source, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    if not isinstance(doc, list):
        raise ExtractionError(f"{label} must be a JSON list")
    return doc


# --------------------------------------------------------------------------
# Model backend: OpenAI-compatible chat endpoint, JSON-only output
# --------------------------------------------------------------------------

_SYSTEM_PROMPT = (
    "You are a senior supply chain risk analyst for {focal}. Read the news "
    "article and decide whether it describes a supply chain disruption. "
    "Classify the disruption type as one of: Geopolitical, TradePolicy, "
    "NaturalDisaster, EconomicCrisis, Cybersecurity, LabourStrike, "
    "CompanyBankruptcy, Other. List only countries, industries, and "
    "companies explicitly supported by the article text. Write a short "
    "executive summary and up to four diagnostic questions that trace "
    "{focal}'s supplier network from Tier-1 down to Tier-4. Respond with a "
    "single JSON object with keys: disruption_type, countries, industries, "
    "companies, summary, diagnostic_questions. No prose outside the JSON."
)

ENV_MODEL_ENDPOINT = "CHAINWATCH_MODEL_ENDPOINT"
ENV_MODEL_API_KEY = "CHAINWATCH_MODEL_API_KEY"
ENV_MODEL_NAME = "CHAINWATCH_MODEL_NAME"


def model_backend(
    endpoint: str,
    api_key: str,
    model: str,
    timeout: float = DEFAULT_TIMEOUT,
    max_retries: int = DEFAULT_MAX_RETRIES,
    transport=None,
) -> ExtractionBackend:
    """Chat-completions backend against an OpenAI-compatible endpoint.

    ``transport`` is injectable for tests (an ``httpx`` transport); the
    default performs real HTTP calls.
    """
    import httpx

    def invoke(article: str, focal: str) -> Mapping:
        payload = {
            "model": model,
            "messages": [
                {"role": "system", "content": _SYSTEM_PROMPT.format(focal=focal)},
                {"role": "user", "content": article},
            ],
            "response_format": {"type": "json_object"},
            "temperature": 0,
        }
        try:
            with httpx.Client(timeout=timeout, transport=transport) as client:
                response = client.post(
                    endpoint,
                    json=payload,
                    headers={"Authorization": f"Bearer {api_key}"},
                )
                response.raise_for_status()
                body = response.json()
        except httpx.HTTPError as exc:
            raise BackendTransportError(str(exc)) from exc
        try:
            content = body["choices"][0]["message"]["content"]
        except (KeyError, IndexError, TypeError) as exc:
            raise BackendTransportError(f"unexpected response shape: {exc!r}") from exc
        return content

    return ExtractionBackend(
        name=f"model:{model}", invoke=invoke, timeout=timeout, max_retries=max_retries
    )


def model_backend_from_env(environ: Mapping[str, str] = os.environ) -> ExtractionBackend:
    try:
        endpoint = environ[ENV_MODEL_ENDPOINT]
        api_key = environ[ENV_MODEL_API_KEY]
        model = environ[ENV_MODEL_NAME]
    except KeyError as exc:
        raise ExtractionError(
            f"model backend requires {ENV_MODEL_ENDPOINT}, {ENV_MODEL_API_KEY}, "
            f"{ENV_MODEL_NAME} (missing {exc.args[0]})"
        ) from exc
    return model_backend(endpoint, api_key, model)
