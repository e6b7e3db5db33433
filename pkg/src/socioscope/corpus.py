"""Corpus ingestion, tokenization, and indexing.

Reads line-delimited JSON (canonical) or CSV post records, normalizes
and tokenizes text, and builds the indexes the downstream analyses
share.  A built ``CorpusHandle`` is immutable and safe for concurrent
readers.
"""

from __future__ import annotations

import csv
import gzip
import json
import pickle
import random
import re
from dataclasses import dataclass, field
from datetime import date, datetime, timezone
from pathlib import Path

from .errors import IngestError
from .stemming import stem_fixpoint
from .stopwords import STOPWORDS, STOPWORD_LIST_ID

CACHE_VERSION = 3

TOKENIZER_META = {
    "stemmer": "porter",
    "stemming": "fixpoint",
    "stopword_list": STOPWORD_LIST_ID,
    "stopword_count": len(STOPWORDS),
    "urls": "dropped",
    "punctuation": "stripped",
    "paren_wrappers": "kept when >=2 parens on both sides",
    "language_filter": "none",
}

# Outer strip keeps parentheses so echo-style wrappers can be detected.
_OUTER_PUNCT = re.compile(r"^[^\w()]+|[^\w()]+$")
_WRAPPER = re.compile(r"(\({2,})(.+?)(\){2,})$")
_NON_WORD = re.compile(r"[\W_]+")
_ASCII_ALPHA = re.compile(r"[a-z]+$")


def tokenize(text: str) -> list[str]:
    """Normalize raw post text to a list of analysis tokens.

    Lowercases, splits on whitespace, drops URL-like tokens, strips
    punctuation, removes stopwords, and Porter-stems what remains (to a
    fixed point, so re-tokenizing output is a no-op).  Runs of two or
    more parentheses wrapping a word are kept as part of the token, so
    "(((word)))" survives as one vocabulary item.
    """
    out: list[str] = []
    for raw in text.lower().split():
        if raw.startswith(("http://", "https://", "www.")) or "://" in raw:
            continue
        tok = _OUTER_PUNCT.sub("", raw)
        if not tok:
            continue
        m = _WRAPPER.fullmatch(tok)
        if m:
            core = _NON_WORD.sub("", m.group(2))
            if not core:
                continue
            out.append(m.group(1) + _stem_token(core) + m.group(3))
            continue
        core = _NON_WORD.sub("", tok)
        if not core or core in STOPWORDS:
            continue
        stemmed = _stem_token(core)
        if stemmed in STOPWORDS:
            # stemming can map a non-stopword onto the list ("haves" -> "have")
            continue
        out.append(stemmed)
    return out


def _stem_token(core: str) -> str:
    # the stemmer is defined over a-z; leave digits/non-ascii tokens alone
    if _ASCII_ALPHA.fullmatch(core):
        return stem_fixpoint(core)
    return core


def day_of(ts: int) -> date:
    return datetime.fromtimestamp(ts, tz=timezone.utc).date()


@dataclass(frozen=True)
class Post:
    id: str
    community: str
    timestamp: int
    text: str
    image_refs: tuple[str, ...] = ()

    @property
    def key(self) -> tuple[str, str]:
        return (self.community, self.id)

    @property
    def day(self) -> date:
        return day_of(self.timestamp)


@dataclass
class IngestReport:
    """Per-reason tallies for one ingest run; conserves record count."""

    accepted: int = 0
    skipped_invalid_record: int = 0
    skipped_missing_field: int = 0
    skipped_bad_timestamp: int = 0
    skipped_duplicate: int = 0
    missing_image_refs: int = 0

    @property
    def skipped(self) -> int:
        return (
            self.skipped_invalid_record
            + self.skipped_missing_field
            + self.skipped_bad_timestamp
            + self.skipped_duplicate
        )

    def to_dict(self) -> dict:
        return {
            "accepted": self.accepted,
            "skipped": self.skipped,
            "skipped_by_reason": {
                "invalid_record": self.skipped_invalid_record,
                "missing_field": self.skipped_missing_field,
                "bad_timestamp": self.skipped_bad_timestamp,
                "duplicate": self.skipped_duplicate,
            },
            "missing_image_refs": self.missing_image_refs,
            "tokenizer": TOKENIZER_META,
        }


@dataclass(frozen=True)
class CorpusHandle:
    posts: tuple[Post, ...]
    tokens: tuple[tuple[str, ...], ...]
    index: dict[tuple[str, str], int]
    term_index: dict[str, frozenset[tuple[str, str]]]
    date_index: dict[date, dict[str, int]]
    image_index: dict[str, tuple[tuple[str, str], ...]]
    communities: tuple[str, ...]
    report: IngestReport = field(compare=False)

    def post(self, key: tuple[str, str]) -> Post:
        return self.posts[self.index[key]]

    def tokens_for(self, key: tuple[str, str]) -> tuple[str, ...]:
        return self.tokens[self.index[key]]

    def community_posts(self, community: str) -> int:
        return sum(1 for p in self.posts if p.community == community)

    def day_range(self, community: str) -> tuple[date, date]:
        days = [p.day for p in self.posts if p.community == community]
        if not days:
            raise IngestError(f"unknown community: {community}")
        return min(days), max(days)


def _build_handle(posts: list[Post], report: IngestReport) -> CorpusHandle:
    tokens = tuple(tuple(tokenize(p.text)) for p in posts)
    index = {p.key: i for i, p in enumerate(posts)}

    term_index: dict[str, set] = {}
    for p, toks in zip(posts, tokens):
        for t in set(toks):
            term_index.setdefault(t, set()).add(p.key)

    date_index: dict[date, dict[str, int]] = {}
    for p in posts:
        per_comm = date_index.setdefault(p.day, {})
        per_comm[p.community] = per_comm.get(p.community, 0) + 1

    image_index: dict[str, list] = {}
    for p in posts:
        for ref in p.image_refs:
            image_index.setdefault(ref, []).append(p.key)

    return CorpusHandle(
        posts=tuple(posts),
        tokens=tokens,
        index=index,
        term_index={t: frozenset(ks) for t, ks in term_index.items()},
        date_index=date_index,
        image_index={r: tuple(ks) for r, ks in image_index.items()},
        communities=tuple(sorted({p.community for p in posts})),
        report=report,
    )


def _coerce_record(rec: dict, report: IngestReport) -> Post | None:
    for fname in ("id", "community", "ts", "text"):
        if fname not in rec or rec[fname] is None:
            report.skipped_missing_field += 1
            return None
    try:
        ts = int(rec["ts"])
    except (TypeError, ValueError):
        report.skipped_bad_timestamp += 1
        return None
    if ts <= 0:
        report.skipped_bad_timestamp += 1
        return None
    images = rec.get("images") or []
    if not isinstance(images, (list, tuple)):
        report.skipped_invalid_record += 1
        return None
    return Post(
        id=str(rec["id"]),
        community=str(rec["community"]),
        timestamp=ts,
        text=str(rec["text"]),
        image_refs=tuple(str(r) for r in images),
    )


def _iter_jsonl(path: Path, report: IngestReport):
    with open(path, "r", encoding="utf-8", errors="replace") as f:
        for line in f:
            line = line.strip()
            if not line:
                continue
            try:
                rec = json.loads(line)
            except json.JSONDecodeError:
                report.skipped_invalid_record += 1
                continue
            if not isinstance(rec, dict):
                report.skipped_invalid_record += 1
                continue
            yield rec


def _iter_csv(path: Path, report: IngestReport):
    with open(path, "r", encoding="utf-8", errors="replace", newline="") as f:
        reader = csv.DictReader(f)
        for row in reader:
            if row.get("images"):
                row = dict(row)
                row["images"] = [r for r in row["images"].split("|") if r]
            yield row


def ingest_posts(
    path,
    format: str = "jsonl",
    image_store=None,
) -> CorpusHandle:
    """Read post records from ``path`` and build the shared corpus indexes.

    Invalid records are skipped and tallied in the handle's report; an
    unreadable file raises ``IngestError``.  ``image_store`` may be a
    directory or a set of known image ids; refs that do not resolve are
    counted as missing (the post is kept).
    """
    path = Path(path)
    if format not in ("jsonl", "csv"):
        raise IngestError(f"unsupported format: {format}")
    if not path.is_file():
        raise IngestError(f"input file not found: {path}")

    known_refs = None
    if image_store is not None:
        if isinstance(image_store, (set, frozenset)):
            known_refs = image_store
        else:
            store = Path(image_store)
            known_refs = {p.name for p in store.iterdir()} if store.is_dir() else set()

    report = IngestReport()
    posts: list[Post] = []
    seen: set[tuple[str, str]] = set()
    rows = _iter_jsonl(path, report) if format == "jsonl" else _iter_csv(path, report)
    for rec in rows:
        post = _coerce_record(rec, report)
        if post is None:
            continue
        if post.key in seen:
            report.skipped_duplicate += 1
            continue
        seen.add(post.key)
        if known_refs is not None:
            report.missing_image_refs += sum(
                1 for r in post.image_refs if r not in known_refs
            )
        posts.append(post)
        report.accepted += 1

    return _build_handle(posts, report)


def filter_by_term(corpus: CorpusHandle, term: str) -> set[tuple[str, str]]:
    """Keys of every post whose token stream contains ``term``.

    ``term`` must already be in tokenizer-normalized form; an unknown
    term yields the empty set.
    """
    return set(corpus.term_index.get(term, frozenset()))


def sample_for_annotation(
    corpus: CorpusHandle, term: str, n: int, seed: int
) -> list[Post]:
    """Uniform sample (without replacement) of posts matching ``term``.

    Deterministic under ``seed``; returns all matches when fewer than
    ``n`` exist.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    matches = sorted(filter_by_term(corpus, term))
    if len(matches) <= n:
        return [corpus.post(k) for k in matches]
    rng = random.Random(seed)
    return [corpus.post(k) for k in rng.sample(matches, n)]


def save_cache(corpus: CorpusHandle, path) -> None:
    """Persist a built handle; format is internal and version-tagged."""
    with gzip.open(path, "wb") as f:
        pickle.dump({"version": CACHE_VERSION, "handle": corpus}, f)


def load_cache(path) -> CorpusHandle | None:
    """Load a cached handle, or None when absent/stale (version mismatch)."""
    path = Path(path)
    if not path.is_file():
        return None
    try:
        with gzip.open(path, "rb") as f:
            payload = pickle.load(f)
    except (OSError, pickle.UnpicklingError, EOFError):
        return None
    if not isinstance(payload, dict) or payload.get("version") != CACHE_VERSION:
        return None
    return payload.get("handle")
