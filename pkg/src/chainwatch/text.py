"""Shared text normalization used for entity resolution and metric matching.

Every component that compares entity strings (graph resolution, report
deduplication, evaluation matchers) goes through the same pipeline so that
"Johnson Matthey PLC", "johnson matthey plc" and "Johnson  Matthey"
all collapse to the same key.
"""

from __future__ import annotations

import re

# Legal-form tokens dropped from the end of company names.
LEGAL_SUFFIXES = frozenset(
    {"inc", "plc", "ag", "pjsc", "se", "ltd", "llc", "co", "corp", "gmbh", "sa"}
)

_NON_ALNUM = re.compile(r"[^0-9a-z]+")


def normalize(text: str) -> str:
    """Lowercase, strip punctuation, drop trailing legal-form suffixes.

    Stripping stops before the name would become empty, so a company
    actually named "Co" keeps its single token.
    """
    tokens = [t for t in _NON_ALNUM.split(text.lower()) if t]
    while len(tokens) > 1 and tokens[-1] in LEGAL_SUFFIXES:
        tokens.pop()
    return " ".join(tokens)


def tokens(text: str) -> frozenset[str]:
    """Token set of the normalized form."""
    norm = normalize(text)
    return frozenset(norm.split()) if norm else frozenset()


def token_set_similarity(a: str, b: str) -> float:
    """Jaccard similarity of normalized token sets, in [0, 1]."""
    ta, tb = tokens(a), tokens(b)
    if not ta and not tb:
        return 1.0
    if not ta or not tb:
        return 0.0
    return len(ta & tb) / len(ta | tb)


def dedupe(values: list[str] | tuple[str, ...]) -> tuple[str, ...]:
    """Drop later values whose normalized form repeats an earlier one.

    Keeps the first spelling seen, preserving input order.
    """
    seen: set[str] = set()
    out: list[str] = []
    for value in values:
        key = normalize(value)
        if key not in seen:
            seen.add(key)
            out.append(value)
    return tuple(out)
