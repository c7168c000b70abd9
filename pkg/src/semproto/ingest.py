"""Metadata corpus ingestion: JSON-lines reading, tokenization, vocabulary.

Input corpora are JSON-lines files with one photo per line:

    {"concept": "...", "user": "...", "title": "...", "tags": ["...", ...]}

Titles are free text and get split on whitespace/punctuation; tags are kept
whole because concatenated tags ("ivorygull", "lakesuperior") carry meaning
that splitting would destroy.
"""

from __future__ import annotations

import json
import logging
import re
import unicodedata
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Iterator

logger = logging.getLogger(__name__)

DEFAULT_PIECE_CAP = 5000

# Runs of Unicode letters/digits; underscores and punctuation separate tokens.
_WORD_RE = re.compile(r"[^\W_]+", re.UNICODE)


class CorpusError(Exception):
    """Unrecoverable problem with an input corpus."""


@dataclass(frozen=True)
class MetadataPiece:
    """One photo's textual record: owner, and its deduplicated token list."""

    concept_id: str
    user_id: str
    tokens: tuple[str, ...]


@dataclass
class ConceptCollection:
    """All retained metadata pieces for one concept."""

    concept_id: str
    pieces: list[MetadataPiece] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.pieces)


@dataclass
class Vocabulary:
    """Word <-> index mapping with per-word occurrence counts.

    Words are ordered by descending count, ties broken lexicographically, so
    the index assignment is deterministic for a given corpus.
    """

    words: list[str]
    index: dict[str, int]
    counts: dict[str, int]

    def __len__(self) -> int:
        return len(self.words)

    def __contains__(self, word: str) -> bool:
        return word in self.index

    @property
    def total(self) -> int:
        """Total retained-token occurrences (used by frequency subsampling)."""
        return sum(self.counts.values())

    def count_array(self):
        import numpy as np

        return np.array([self.counts[w] for w in self.words], dtype=np.int64)

    @classmethod
    def from_counts(cls, counts: Counter, min_count: int) -> "Vocabulary":
        if min_count < 1:
            raise ValueError("min_count must be >= 1")
        kept = {w: c for w, c in counts.items() if c >= min_count}
        if not kept:
            raise CorpusError("vocabulary is empty after min-count filtering")
        words = sorted(kept, key=lambda w: (-kept[w], w))
        return cls(words=words, index={w: i for i, w in enumerate(words)}, counts=kept)


def _normalize(text: str) -> str:
    return unicodedata.normalize("NFC", text).lower()


def tokenize(title: str, tags: Iterable[str], stopwords: frozenset[str] | set[str] = frozenset()) -> list[str]:
    """Turn a title and tag list into one deduplicated token list.

    The title is lowercased (NFC) and split on whitespace/punctuation; tags
    are lowercased but never split. Stop words and pure-digit tokens are
    dropped, and within-piece duplicates are removed keeping the first
    occurrence. May return an empty list; the caller drops such pieces.
    """
    seen: set[str] = set()
    out: list[str] = []
    candidates: list[str] = _WORD_RE.findall(_normalize(title))
    candidates.extend(_normalize(t).strip() for t in tags)
    for tok in candidates:
        if not tok or tok.isdigit() or tok in stopwords or tok in seen:
            continue
        seen.add(tok)
        out.append(tok)
    return out


def load_stopwords(path) -> frozenset[str]:
    """Read a stop-word list, one word per line, UTF-8."""
    with open(path, encoding="utf-8") as fh:
        return frozenset(_normalize(line.strip()) for line in fh if line.strip())


class MetadataReader:
    """Reads a JSON-lines metadata file and groups pieces by concept.

    Malformed lines (bad JSON, missing/ill-typed keys) are skipped and
    counted in ``skipped_lines``. Per-concept piece counts are truncated at
    ``cap`` in file order. Pieces whose token list is empty after filtering
    are dropped (counted in ``dropped_empty``).
    """

    def __init__(self, path, cap: int = DEFAULT_PIECE_CAP, stopwords: frozenset[str] | set[str] = frozenset()):
        if cap < 1:
            raise ValueError("cap must be >= 1")
        self.path = path
        self.cap = cap
        self.stopwords = stopwords
        self.skipped_lines = 0
        self.dropped_empty = 0

    def _parse_line(self, line: str) -> MetadataPiece | None:
        record = json.loads(line)
        if not isinstance(record, dict):
            raise ValueError("record is not an object")
        concept = record["concept"]
        user = record["user"]
        title = record["title"]
        tags = record["tags"]
        if not (isinstance(concept, str) and isinstance(user, str) and isinstance(title, str)):
            raise ValueError("concept/user/title must be strings")
        if not (isinstance(tags, list) and all(isinstance(t, str) for t in tags)):
            raise ValueError("tags must be a list of strings")
        tokens = tokenize(title, tags, self.stopwords)
        if not tokens:
            self.dropped_empty += 1
            return None
        return MetadataPiece(concept_id=concept, user_id=user, tokens=tuple(tokens))

    def read(self) -> list[ConceptCollection]:
        """Read the whole file; returns collections in first-seen concept order."""
        collections: dict[str, ConceptCollection] = {}
        try:
            fh = open(self.path, encoding="utf-8")
        except OSError as exc:
            raise CorpusError(f"cannot read metadata file {self.path}: {exc}") from exc
        with fh:
            for lineno, line in enumerate(fh, start=1):
                if not line.strip():
                    continue
                try:
                    piece = self._parse_line(line)
                except (json.JSONDecodeError, KeyError, ValueError) as exc:
                    self.skipped_lines += 1
                    logger.warning("skipping malformed line %d: %s", lineno, exc)
                    continue
                if piece is None:
                    continue
                coll = collections.setdefault(piece.concept_id, ConceptCollection(piece.concept_id))
                if len(coll) < self.cap:
                    coll.pieces.append(piece)
        return list(collections.values())


def load_metadata(
    path,
    cap: int = DEFAULT_PIECE_CAP,
    stopwords: frozenset[str] | set[str] = frozenset(),
) -> list[ConceptCollection]:
    """Convenience wrapper around :class:`MetadataReader` (discards counters)."""
    return MetadataReader(path, cap=cap, stopwords=stopwords).read()


def build_vocabulary(collections: Iterable[ConceptCollection], min_count: int = 5) -> Vocabulary:
    """Accumulate token counts over all pieces and apply the min-count filter."""
    counts: Counter = Counter()
    for coll in collections:
        for piece in coll.pieces:
            counts.update(piece.tokens)
    if not counts:
        raise CorpusError("empty corpus: no tokens to build a vocabulary from")
    return Vocabulary.from_counts(counts, min_count)


def iter_pieces(collections: Iterable[ConceptCollection]) -> Iterator[MetadataPiece]:
    for coll in collections:
        yield from coll.pieces
