"""Document-keyword corpora: loading, validation, serialization and date windows.

A corpus is an ordered list of documents. The order is significant: it fixes
the row order of every incidence structure and distance matrix built from it.
"""

from __future__ import annotations

import csv
import json
import logging
from dataclasses import dataclass, field
from datetime import date, datetime, timezone
from importlib import resources
from pathlib import Path
from typing import Iterable, Sequence

logger = logging.getLogger(__name__)

__all__ = [
    "CorpusError",
    "Document",
    "Corpus",
    "normalize_keywords",
    "parse_timestamp",
    "build_corpus",
    "load_corpus",
    "dump_corpus",
    "window_corpus",
    "bundled_corpus_path",
]

CSV_FIELDS = ("id", "title", "keywords", "published", "url")


class CorpusError(ValueError):
    """Raised for unreadable or invalid corpus input."""


def normalize_keywords(keywords: Iterable[str]) -> frozenset[str]:
    """Case-fold and deduplicate keywords, dropping blank entries."""
    out = set()
    for kw in keywords:
        kw = kw.strip().lower()
        if kw:
            out.add(kw)
    return frozenset(out)


def parse_timestamp(value: str | datetime | date | None) -> datetime | None:
    """Parse an ISO-8601 value into an aware UTC datetime.

    Naive values are taken to be UTC. Plain dates map to midnight UTC.
    Raises ValueError on unparseable strings.
    """
    if value is None or value == "":
        return None
    if isinstance(value, datetime):
        dt = value
    elif isinstance(value, date):
        dt = datetime(value.year, value.month, value.day)
    else:
        text = value.strip()
        if text.endswith(("Z", "z")):
            text = text[:-1] + "+00:00"
        dt = datetime.fromisoformat(text)
    if dt.tzinfo is None:
        return dt.replace(tzinfo=timezone.utc)
    return dt.astimezone(timezone.utc)


def format_timestamp(dt: datetime | None) -> str:
    if dt is None:
        return ""
    return dt.astimezone(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")


@dataclass(frozen=True)
class Document:
    """A news item and its keyword simplex."""

    id: str
    title: str
    keywords: frozenset[str]
    published: datetime | None = None
    url: str | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "keywords", normalize_keywords(self.keywords))

    def to_json(self) -> dict:
        rec: dict = {"id": self.id, "title": self.title, "keywords": sorted(self.keywords)}
        if self.published is not None:
            rec["published"] = format_timestamp(self.published)
        if self.url is not None:
            rec["url"] = self.url
        return rec


@dataclass(frozen=True)
class Corpus:
    """Ordered, id-unique collection of documents with nonempty keyword sets.

    ``source`` and ``dropped`` describe where the corpus came from and which
    document ids were discarded for having no keywords; neither takes part
    in equality.
    """

    documents: tuple[Document, ...]
    source: str = field(default="", compare=False)
    dropped: tuple[str, ...] = field(default=(), compare=False)

    def __len__(self) -> int:
        return len(self.documents)

    def __iter__(self):
        return iter(self.documents)

    def __getitem__(self, i: int) -> Document:
        return self.documents[i]

    @property
    def ids(self) -> list[str]:
        return [d.id for d in self.documents]

    def by_id(self, doc_id: str) -> Document:
        for d in self.documents:
            if d.id == doc_id:
                return d
        raise KeyError(doc_id)


def build_corpus(documents: Iterable[Document], source: str = "") -> Corpus:
    """Validate documents into a Corpus.

    Documents without keywords are dropped (their ids recorded in
    ``Corpus.dropped``); a repeated id is an error.
    """
    kept: list[Document] = []
    dropped: list[str] = []
    seen: set[str] = set()
    for doc in documents:
        if doc.id in seen:
            raise CorpusError(f"duplicate document id {doc.id!r}")
        seen.add(doc.id)
        if not doc.keywords:
            dropped.append(doc.id)
            continue
        kept.append(doc)
    if dropped:
        logger.info("dropped %d document(s) with no keywords", len(dropped))
    return Corpus(tuple(kept), source=source, dropped=tuple(dropped))


def _record_to_document(rec: dict, where: str) -> Document:
    if not isinstance(rec, dict):
        raise CorpusError(f"{where}: expected an object")
    for key in ("id", "title", "keywords"):
        if key not in rec:
            raise CorpusError(f"{where}: missing field {key!r}")
    doc_id, title, keywords = rec["id"], rec["title"], rec["keywords"]
    if not isinstance(doc_id, str) or not doc_id:
        raise CorpusError(f"{where}: 'id' must be a nonempty string")
    if not isinstance(title, str):
        raise CorpusError(f"{where}: 'title' must be a string")
    if not isinstance(keywords, list) or not all(isinstance(k, str) for k in keywords):
        raise CorpusError(f"{where}: 'keywords' must be an array of strings")
    try:
        published = parse_timestamp(rec.get("published"))
    except (TypeError, ValueError) as exc:
        raise CorpusError(f"{where}: bad 'published' value: {exc}") from None
    url = rec.get("url")
    if url is not None and not isinstance(url, str):
        raise CorpusError(f"{where}: 'url' must be a string")
    return Document(doc_id, title, frozenset(keywords), published, url or None)


def _read_jsonl(path: Path) -> list[Document]:
    docs = []
    with path.open(encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
            except json.JSONDecodeError as exc:
                raise CorpusError(f"{path}:{lineno}: invalid JSON: {exc.msg}") from None
            docs.append(_record_to_document(rec, f"{path}:{lineno}"))
    return docs


def _read_csv(path: Path) -> list[Document]:
    docs = []
    with path.open(encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        missing = {"id", "title", "keywords"} - set(reader.fieldnames or ())
        if missing:
            raise CorpusError(f"{path}:1: header lacks {sorted(missing)}")
        for row in reader:
            where = f"{path}:{reader.line_num}"
            if None in row:
                raise CorpusError(f"{where}: too many fields")
            cell = row.get("keywords") or ""
            rec = {
                "id": row.get("id"),
                "title": row.get("title") or "",
                "keywords": [k for k in cell.split("|")] if cell else [],
                "published": row.get("published") or None,
                "url": row.get("url") or None,
            }
            docs.append(_record_to_document(rec, where))
    return docs


def load_corpus(path: str | Path, format: str | None = None) -> Corpus:
    """Load a corpus from a JSONL or CSV file.

    ``format`` is ``"jsonl"`` or ``"csv"``; when omitted it is inferred from the
    file extension.
    """
    path = Path(path)
    fmt = (format or path.suffix.lstrip(".")).lower()
    if fmt == "json":
        fmt = "jsonl"
    if fmt not in ("jsonl", "csv"):
        raise CorpusError(f"unsupported corpus format {fmt!r} for {path}")
    if not path.is_file():
        raise CorpusError(f"cannot read corpus file {path}")
    docs = _read_jsonl(path) if fmt == "jsonl" else _read_csv(path)
    return build_corpus(docs, source=str(path))


def dump_corpus(corpus: Corpus | Sequence[Document], path: str | Path, format: str | None = None) -> None:
    """Write documents in a form ``load_corpus`` reads back to an equal corpus."""
    path = Path(path)
    fmt = (format or path.suffix.lstrip(".")).lower()
    docs = corpus.documents if isinstance(corpus, Corpus) else tuple(corpus)
    if fmt in ("jsonl", "json"):
        with path.open("w", encoding="utf-8") as fh:
            for d in docs:
                fh.write(json.dumps(d.to_json(), ensure_ascii=False) + "\n")
    elif fmt == "csv":
        with path.open("w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(CSV_FIELDS)
            for d in docs:
                writer.writerow([d.id, d.title, "|".join(sorted(d.keywords)),
                                 format_timestamp(d.published), d.url or ""])
    else:
        raise CorpusError(f"unsupported corpus format {fmt!r}")


def window_corpus(corpus: Corpus, start: str | date | datetime, end: str | date | datetime) -> Corpus:
    """Documents published in the half-open interval ``[start, end)``.

    Undated documents are excluded. Order is preserved.
    """
    lo, hi = parse_timestamp(start), parse_timestamp(end)
    if lo is None or hi is None:
        raise CorpusError("window bounds are required")
    if lo > hi:
        raise CorpusError(f"inverted window: {format_timestamp(lo)} > {format_timestamp(hi)}")
    docs = tuple(d for d in corpus.documents
                 if d.published is not None and lo <= d.published < hi)
    return Corpus(docs, source=f"{corpus.source}[{format_timestamp(lo)},{format_timestamp(hi)})")


def bundled_corpus_path(name: str = "news20") -> Path:
    """Path of a corpus fixture shipped with the package."""
    p = resources.files("antnav") / "data" / f"{name}.jsonl"
    if not p.is_file():
        raise FileNotFoundError(f"no bundled corpus {name!r}")
    return Path(str(p))
