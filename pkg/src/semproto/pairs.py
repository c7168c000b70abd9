"""Skip-gram training pairs from concept collections.

Two emission modes:

* raw: every piece with t in-vocabulary tokens emits all t(t-1)/2 unordered
  pairs; pairs repeat across pieces.
* voted: a pair is emitted at most once per (concept, user, pair), so one
  user bulk-tagging fifty photos with identical text counts exactly once.

Pairs are canonical: stored as (left, right) with left < right. Training
realizes both directions later.

Voted deduplication is exact. When the per-concept key volume fits the
configured budget an in-memory set is used; beyond that, fixed-width
(user, left, right, seq) records go through an external merge sort. Both
paths emit pairs in first-occurrence order, so a corpus crossing the budget
threshold produces byte-identical output either way.
"""

from __future__ import annotations

import heapq
import itertools
import struct
import tempfile
from typing import Iterable, Iterator

import numpy as np

from .ingest import ConceptCollection, Vocabulary

# Keys held in memory per concept before spilling to the external-sort path.
DEFAULT_MEM_BUDGET = 2_000_000

_RECORD = struct.Struct("<IIIQ")  # user, left, right, sequence number


def canonical_pair(i: int, j: int) -> tuple[int, int]:
    return (i, j) if i < j else (j, i)


def _piece_indices(piece_tokens, vocab: Vocabulary) -> list[int]:
    index = vocab.index
    return [index[t] for t in piece_tokens if t in index]


def pairs_raw(collection: ConceptCollection, vocab: Vocabulary) -> Iterator[tuple[int, int]]:
    """All distinct within-piece pairs, repeated across pieces."""
    for piece in collection.pieces:
        ids = _piece_indices(piece.tokens, vocab)
        for a, b in itertools.combinations(ids, 2):
            yield canonical_pair(a, b)


def _merge_sorted_chunks(chunks) -> Iterator[tuple[int, int, int, int]]:
    iters = []
    for fh in chunks:
        fh.seek(0)
        iters.append(_read_records(fh))
    yield from heapq.merge(*iters)


def _read_records(fh) -> Iterator[tuple[int, int, int, int]]:
    size = _RECORD.size
    for blob in iter(lambda: fh.read(size), b""):
        yield _RECORD.unpack(blob)


def _write_records(records, fh) -> None:
    pack = _RECORD.pack
    fh.write(b"".join(pack(*r) for r in records))


def _dedup_external(emitted, pending, mem_budget, skip_through) -> Iterator[tuple[int, int]]:
    """Spill path: sort (user, left, right, seq) records on disk, keep the
    first occurrence of each key, then restore input order via seq.

    ``emitted`` holds the unique records already yielded by the in-memory
    phase (all with seq <= ``skip_through``); they participate in dedup so
    later duplicates are dropped, but are not yielded again.
    """
    chunks = []

    def spill(records):
        records.sort()
        fh = tempfile.TemporaryFile()
        _write_records(records, fh)
        chunks.append(fh)

    spill(emitted)
    buf: list[tuple[int, int, int, int]] = []
    for rec in pending:
        buf.append(rec)
        if len(buf) >= mem_budget:
            spill(buf)
            buf = []
    if buf:
        spill(buf)

    survivors: list[tuple[int, int, int]] = []  # (seq, left, right)
    last_key = None
    for user, left, right, seq in _merge_sorted_chunks(chunks):
        key = (user, left, right)
        if key != last_key:
            if seq > skip_through:
                survivors.append((seq, left, right))
            last_key = key
    for fh in chunks:
        fh.close()
    survivors.sort()
    for _, left, right in survivors:
        yield (left, right)


def pairs_voted(
    collection: ConceptCollection,
    vocab: Vocabulary,
    mem_budget: int = DEFAULT_MEM_BUDGET,
) -> Iterator[tuple[int, int]]:
    """Pairs deduplicated per (user, pair) within this concept.

    Emission order is the order of first occurrence in the input, which is
    deterministic and invariant under replication of any user's pieces.
    Both dedup paths (in-memory set and external merge sort) emit in this
    same order, so crossing the memory budget cannot change the output.
    """
    users: dict[str, int] = {}

    def records() -> Iterator[tuple[int, int, int, int]]:
        seq = 0
        for piece in collection.pieces:
            uid = users.setdefault(piece.user_id, len(users))
            ids = _piece_indices(piece.tokens, vocab)
            for a, b in itertools.combinations(ids, 2):
                left, right = canonical_pair(a, b)
                yield (uid, left, right, seq)
                seq += 1

    stream = records()
    seen: set[tuple[int, int, int]] = set()
    emitted: list[tuple[int, int, int, int]] = []
    for rec in stream:
        key = rec[:3]
        if key not in seen:
            seen.add(key)
            emitted.append(rec)
            yield (rec[1], rec[2])
        if len(seen) >= mem_budget:
            seen.clear()
            yield from _dedup_external(emitted, stream, mem_budget, skip_through=emitted[-1][3])
            return


def ablate_corpus(
    collections: Iterable[ConceptCollection],
    remove_fraction: float,
    seed: int,
) -> list[ConceptCollection]:
    """Independently drop each piece with probability ``remove_fraction``.

    Deterministic for a fixed seed and input order.
    """
    if not 0.0 <= remove_fraction < 1.0:
        raise ValueError("remove_fraction must be in [0, 1)")
    rng = np.random.default_rng(seed)
    out = []
    for coll in collections:
        keep = [p for p in coll.pieces if rng.random() >= remove_fraction]
        out.append(ConceptCollection(coll.concept_id, keep))
    return out


# ---------------------------------------------------------------------------
# Pair files
# ---------------------------------------------------------------------------

_PAIR_BIN = struct.Struct("<II")


def write_pairs_text(pairs: Iterable[tuple[int, int]], vocab: Vocabulary, path) -> int:
    """One pair per line as surface forms: directly usable as a two-token-per-line corpus."""
    words = vocab.words
    n = 0
    with open(path, "w", encoding="utf-8") as fh:
        for left, right in pairs:
            fh.write(f"{words[left]} {words[right]}\n")
            n += 1
    return n


def read_pairs_text(path, vocab: Vocabulary) -> Iterator[tuple[int, int]]:
    index = vocab.index
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            parts = line.split()
            if not parts:
                continue
            if len(parts) != 2:
                raise ValueError(f"bad pair line: {line!r}")
            a, b = parts
            if a in index and b in index:
                yield (index[a], index[b])


def write_pairs_binary(pairs: Iterable[tuple[int, int]], path) -> int:
    n = 0
    with open(path, "wb") as fh:
        for left, right in pairs:
            fh.write(_PAIR_BIN.pack(left, right))
            n += 1
    return n


def read_pairs_binary(path) -> Iterator[tuple[int, int]]:
    size = _PAIR_BIN.size
    with open(path, "rb") as fh:
        for blob in iter(lambda: fh.read(size), b""):
            yield _PAIR_BIN.unpack(blob)


def read_pairs(path, vocab: Vocabulary) -> Iterator[tuple[int, int]]:
    """Dispatch on extension: .bin is the fixed-width index format."""
    if str(path).endswith(".bin"):
        return read_pairs_binary(path)
    return read_pairs_text(path, vocab)
