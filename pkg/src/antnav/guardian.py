"""Client for a Guardian-style content API.

Articles are fetched page by page and their keyword tags become document
keywords. All network I/O goes through an injected ``transport`` callable
with the signature of ``requests.get``::

    transport(url, params=..., timeout=...) -> response

where ``response`` exposes ``status_code`` and ``json()``.
"""

from __future__ import annotations

import logging
import time
import warnings
from dataclasses import dataclass, field
from datetime import date
from typing import Any, Callable

from .corpus import Corpus, Document, build_corpus, parse_timestamp

logger = logging.getLogger(__name__)

DEFAULT_BASE_URL = "https://content.guardianapis.com/search"
API_KEY_ENV = "GUARDIAN_API_KEY"
MAX_RETRIES = 3


class GuardianError(RuntimeError):
    """Upstream failure: bad status, malformed payload, exhausted retries."""


class AuthError(GuardianError):
    """The API rejected the credentials (401/403)."""


class RateLimitError(GuardianError):
    """Still rate limited after the configured number of retries."""


@dataclass(frozen=True)
class ApiQuery:
    start: date
    end: date
    api_key: str = field(repr=False)
    section: str | None = None
    page_size: int = 50

    def __post_init__(self) -> None:
        if self.start > self.end:
            raise ValueError(f"from-date {self.start} is after to-date {self.end}")
        if not 1 <= self.page_size <= 200:
            raise ValueError(f"page_size must be in [1, 200], got {self.page_size}")
        if not self.api_key:
            raise ValueError("api_key is required")

    def params(self, page: int) -> dict[str, Any]:
        p: dict[str, Any] = {
            "from-date": self.start.isoformat(),
            "to-date": self.end.isoformat(),
            "page": page,
            "page-size": self.page_size,
            "show-tags": "keyword",
            "api-key": self.api_key,
        }
        if self.section:
            p["section"] = self.section
        return p

    def describe(self) -> str:
        desc = f"guardian:{self.start.isoformat()}..{self.end.isoformat()}"
        return f"{desc}:{self.section}" if self.section else desc


@dataclass(frozen=True)
class Tag:
    tag_id: str
    tag_title: str


@dataclass(frozen=True)
class RawArticle:
    api_id: str
    web_title: str
    web_url: str
    publication_date: str
    tags: tuple[Tag, ...] = ()

    def __post_init__(self) -> None:
        if not self.api_id:
            raise ValueError("api_id must be nonempty")

    @classmethod
    def from_json(cls, obj: dict) -> "RawArticle":
        try:
            tags = tuple(Tag(t.get("id", ""), t["webTitle"]) for t in obj.get("tags") or ())
            return cls(
                api_id=obj["id"],
                web_title=obj.get("webTitle", ""),
                web_url=obj.get("webUrl", ""),
                publication_date=obj.get("webPublicationDate", ""),
                tags=tags,
            )
        except (KeyError, TypeError, AttributeError) as exc:
            raise GuardianError(f"malformed article record: {exc!r}") from None


def map_article(raw: RawArticle) -> Document:
    """Turn an API article into a Document; tag titles become keywords.

    An unparseable publication date is not fatal: the document keeps no
    timestamp and a warning is emitted.
    """
    try:
        published = parse_timestamp(raw.publication_date or None)
    except ValueError:
        warnings.warn(f"article {raw.api_id}: unparseable date {raw.publication_date!r}",
                      stacklevel=2)
        published = None
    return Document(
        id=raw.api_id,
        title=raw.web_title,
        keywords=frozenset(t.tag_title for t in raw.tags),
        published=published,
        url=raw.web_url or None,
    )


def _default_transport(url, params=None, timeout=None):
    import requests

    return requests.get(url, params=params, timeout=timeout)


def _get_page(transport, url, params, sleep, backoff, timeout) -> dict:
    for attempt in range(MAX_RETRIES + 1):
        resp = transport(url, params=params, timeout=timeout)
        status = resp.status_code
        if status == 200:
            try:
                return resp.json()
            except ValueError as exc:
                raise GuardianError(f"response is not JSON: {exc}") from None
        if status in (401, 403):
            raise AuthError(f"API rejected credentials (HTTP {status})")
        if status != 429:
            raise GuardianError(f"HTTP {status} from {url}")
        if attempt == MAX_RETRIES:
            break
        delay = backoff * 2 ** attempt
        logger.warning("rate limited; retry %d/%d in %.1fs", attempt + 1, MAX_RETRIES, delay)
        sleep(delay)
    raise RateLimitError(f"still rate limited after {MAX_RETRIES} retries")


def fetch_articles(
    query: ApiQuery,
    transport: Callable[..., Any] | None = None,
    *,
    base_url: str = DEFAULT_BASE_URL,
    max_pages: int | None = None,
    backoff: float = 1.0,
    sleep: Callable[[float], None] = time.sleep,
    timeout: float = 30.0,
) -> Corpus:
    """Fetch every article matching ``query`` and map it into a Corpus.

    Pages are requested sequentially until the reported total is covered
    or ``max_pages`` is reached. Only HTTP 429 is retried, with exponential
    backoff.
    """
    transport = transport or _default_transport
    docs: list[Document] = []
    seen: set[str] = set()
    total = None
    page = 1
    while True:
        payload = _get_page(transport, base_url, query.params(page), sleep, backoff, timeout)
        try:
            body = payload["response"]
            results = body["results"]
            total = int(body["total"])
            pages = int(body.get("pages", 0))
        except (KeyError, TypeError, ValueError) as exc:
            raise GuardianError(f"malformed payload on page {page}: {exc!r}") from None
        if not isinstance(results, list):
            raise GuardianError(f"malformed payload on page {page}: results is not a list")
        for obj in results:
            doc = map_article(RawArticle.from_json(obj))
            # page boundaries can shift while paginating a live index
            if doc.id in seen:
                continue
            seen.add(doc.id)
            docs.append(doc)
        if len(docs) >= total or not results or page >= pages:
            break
        if max_pages is not None and page >= max_pages:
            logger.warning("stopping at page cap %d of %d", max_pages, pages)
            break
        page += 1
    return build_corpus(docs[:total], source=query.describe())
