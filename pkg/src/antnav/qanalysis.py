"""Q-analysis of the document-keyword simplicial complex.

Each document is a simplex whose vertices are its keywords, so a document
with ``k`` keywords has top dimension ``k - 1``. Two documents share a face
of dimension ``|K_i & K_j| - 1`` (``-1`` when disjoint). The directed
eccentricity of ``i`` relative to ``j`` is::

    (top_i - shared_ij) / (shared_ij + 1)

which is 0 exactly when ``K_i`` is contained in ``K_j``. Symmetrizing it
gives a dissimilarity between documents. It is not a metric: the triangle
inequality can fail.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .corpus import Corpus

__all__ = [
    "DISJOINT",
    "POLICIES",
    "IncidenceStructure",
    "DistanceMatrix",
    "build_incidence",
    "shared_face_dim",
    "eccentricity_directed",
    "dissimilarity",
    "distance_matrix",
    "q_components",
    "structure_vector",
]

#: Marker for pairs of documents with no keyword in common.
DISJOINT = math.inf

POLICIES = ("mean", "max")


@dataclass(frozen=True)
class IncidenceStructure:
    """Boolean document x keyword membership.

    ``overlap[i, j]`` is ``|K_i & K_j|``; it is computed once on
    construction because every query reads it.
    """

    docs: tuple[str, ...]
    keywords: tuple[str, ...]
    membership: np.ndarray
    overlap: np.ndarray

    @property
    def n(self) -> int:
        return len(self.docs)

    @property
    def counts(self) -> np.ndarray:
        return np.diagonal(self.overlap)

    def top_dim(self, i: int) -> int:
        self._check(i)
        return int(self.overlap[i, i]) - 1

    def _check(self, *idx: int) -> None:
        for i in idx:
            if not 0 <= i < self.n:
                raise IndexError(f"document index {i} out of range for {self.n} documents")


def build_incidence(corpus: Corpus | Sequence) -> IncidenceStructure:
    """Build the incidence structure of a validated corpus.

    Accepts a Corpus or any sequence of objects with ``id`` and ``keywords``.
    The vocabulary is the sorted union of all keywords.
    """
    docs = list(corpus.documents if isinstance(corpus, Corpus) else corpus)
    if not docs:
        raise ValueError("cannot build an incidence structure from an empty corpus")
    vocab = sorted(set().union(*(d.keywords for d in docs)))
    col = {k: c for c, k in enumerate(vocab)}
    m = np.zeros((len(docs), len(vocab)), dtype=bool)
    for r, d in enumerate(docs):
        if not d.keywords:
            raise ValueError(f"document {d.id!r} has no keywords")
        m[r, [col[k] for k in d.keywords]] = True
    mi = m.astype(np.int64)
    overlap = mi @ mi.T
    return IncidenceStructure(tuple(d.id for d in docs), tuple(vocab), m, overlap)


def shared_face_dim(inc: IncidenceStructure, i: int, j: int) -> int:
    """Dimension of the face shared by documents ``i`` and ``j`` (-1 if disjoint)."""
    inc._check(i, j)
    return int(inc.overlap[i, j]) - 1


def eccentricity_directed(inc: IncidenceStructure, i: int, j: int) -> float:
    """Eccentricity of ``i`` relative to ``j``; ``DISJOINT`` when they share nothing."""
    q = shared_face_dim(inc, i, j)
    if q < 0:
        return DISJOINT
    return (inc.top_dim(i) - q) / (q + 1)


def dissimilarity(inc: IncidenceStructure, i: int, j: int, policy: str = "mean") -> float:
    if policy not in POLICIES:
        raise ValueError(f"unknown symmetrization policy {policy!r}; expected one of {POLICIES}")
    if i == j:
        inc._check(i)
        return 0.0
    a = eccentricity_directed(inc, i, j)
    if a == DISJOINT:
        return DISJOINT
    b = eccentricity_directed(inc, j, i)
    return (a + b) / 2 if policy == "mean" else max(a, b)


@dataclass(frozen=True)
class DistanceMatrix:
    """Symmetric, finite document dissimilarities.

    Disjoint pairs hold ``cap``, which is one more than the largest finite
    off-diagonal value, so a hop between unrelated documents always costs
    more than any hop between related ones.
    """

    ids: tuple[str, ...]
    entries: np.ndarray
    cap: float
    policy: str = "mean"

    @property
    def n(self) -> int:
        return len(self.ids)

    def to_json(self) -> dict:
        return {"ids": list(self.ids), "cap": self.cap, "policy": self.policy,
                "rows": self.entries.tolist()}

    @classmethod
    def from_json(cls, obj: dict) -> "DistanceMatrix":
        return cls(tuple(obj["ids"]), np.asarray(obj["rows"], dtype=float),
                   float(obj["cap"]), obj.get("policy", "mean"))

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.ids)
        for row in self.entries:
            w.writerow([repr(float(x)) for x in row])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str, cap: float | None = None) -> "DistanceMatrix":
        rows = list(csv.reader(io.StringIO(text)))
        ids = tuple(rows[0])
        entries = np.array([[float(x) for x in r] for r in rows[1:]])
        if cap is None:
            off = entries[~np.eye(len(ids), dtype=bool)]
            cap = float(off.max()) if off.size else 1.0
        return cls(ids, entries, cap)

    def dumps(self) -> str:
        return json.dumps(self.to_json())


def distance_matrix(inc: IncidenceStructure, policy: str = "mean") -> DistanceMatrix:
    """Pairwise dissimilarities with disjoint pairs replaced by the cap."""
    n = inc.n
    if n < 2:
        raise ValueError(f"a distance matrix needs at least 2 documents, got {n}")
    d = np.zeros((n, n))
    for i in range(n):
        for j in range(i + 1, n):
            d[i, j] = d[j, i] = dissimilarity(inc, i, j, policy)
    off = ~np.eye(n, dtype=bool)
    finite = d[off & np.isfinite(d)]
    cap = 1.0 + float(finite.max()) if finite.size else 1.0
    d[np.isinf(d)] = cap
    return DistanceMatrix(inc.docs, d, cap, policy)


def q_components(inc: IncidenceStructure, q: int) -> list[list[int]]:
    """Partition of the documents of top dimension >= q into q-connected classes.

    Each class is a sorted list of document indices; classes are ordered by
    their smallest member.
    """
    if q < 0:
        raise ValueError(f"q must be >= 0, got {q}")
    eligible = [i for i in range(inc.n) if inc.overlap[i, i] - 1 >= q]
    parent = {i: i for i in eligible}

    def find(x: int) -> int:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for a, i in enumerate(eligible):
        for j in eligible[a + 1:]:
            if inc.overlap[i, j] - 1 >= q:
                ri, rj = find(i), find(j)
                if ri != rj:
                    parent[max(ri, rj)] = min(ri, rj)
    classes: dict[int, list[int]] = {}
    for i in eligible:
        classes.setdefault(find(i), []).append(i)
    return sorted(classes.values(), key=lambda c: c[0])


def structure_vector(inc: IncidenceStructure) -> list[int]:
    """Number of q-connected components for q from the top dimension down to 0."""
    top = int(inc.counts.max()) - 1
    return [len(q_components(inc, q)) for q in range(top, -1, -1)]
