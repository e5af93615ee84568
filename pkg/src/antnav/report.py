"""Static renderings of a document cycle: Graphviz DOT and a plain HTML page."""

from __future__ import annotations

import html

from .aco import CycleResult
from .corpus import Corpus


def _dot_id(s: str) -> str:
    return '"' + s.replace("\\", "\\\\").replace('"', '\\"') + '"'


def cycle_dot(cycle: CycleResult, corpus: Corpus | None = None) -> str:
    """Undirected DOT graph with one node per document and one edge per hop."""
    lines = ["graph cycle {", "  node [shape=box];"]
    for doc_id in cycle.ids:
        label = corpus.by_id(doc_id).title if corpus is not None else doc_id
        lines.append(f"  {_dot_id(doc_id)} [label={_dot_id(label)}];")
    n = len(cycle.ids)
    for k in range(n):
        a, b = cycle.ids[k], cycle.ids[(k + 1) % n]
        lines.append(f"  {_dot_id(a)} -- {_dot_id(b)} [label=\"{cycle.hops[k]:.4g}\"];")
    lines.append("}")
    return "\n".join(lines) + "\n"


_PAGE = """<!DOCTYPE html>
<html lang="en">
<head>
<meta charset="utf-8">
<title>{title}</title>
<style>
body {{ font-family: sans-serif; max-width: 50em; margin: 2em auto; }}
ol li {{ margin-bottom: 0.8em; }}
.kw {{ color: #555; font-size: 0.9em; }}
.hop {{ color: #999; font-size: 0.8em; }}
</style>
</head>
<body>
<h1>{title}</h1>
<p>{n} documents, total cycle length {total:.4f}.
Coherence score (mean hop dissimilarity, lower is smoother): {coherence:.4f}.</p>
<ol class="cycle">
{items}
</ol>
</body>
</html>
"""


def cycle_html(cycle: CycleResult, corpus: Corpus, title: str = "Reading cycle") -> str:
    """One list entry per document, in cycle order, with the hop to the next one."""
    items = []
    n = len(cycle.ids)
    for k, doc_id in enumerate(cycle.ids):
        doc = corpus.by_id(doc_id)
        head = html.escape(doc.title or doc_id)
        if doc.url:
            head = f'<a href="{html.escape(doc.url)}">{head}</a>'
        date = f" ({doc.published:%Y-%m-%d})" if doc.published else ""
        kws = html.escape(", ".join(sorted(doc.keywords)))
        nxt = html.escape(cycle.ids[(k + 1) % n])
        items.append(
            f'<li class="doc" id="{html.escape(doc_id)}">{head}{date}'
            f'<div class="kw">{kws}</div>'
            f'<div class="hop">next: {nxt}, distance {cycle.hops[k]:.4f}</div></li>'
        )
    return _PAGE.format(title=html.escape(title), n=n, total=cycle.total_length,
                        coherence=cycle.coherence, items="\n".join(items))
