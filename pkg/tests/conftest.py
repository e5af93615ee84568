import pytest

from antnav.corpus import Document, build_corpus


@pytest.fixture
def three_docs():
    """The d1/d2/d3 corpus: two overlapping economy stories and one football story."""
    return build_corpus([
        Document("d1", "Greek bailout talks", frozenset({"economy", "eu", "greece"})),
        Document("d2", "Debt markets rally", frozenset({"economy", "eu", "markets", "debt"})),
        Document("d3", "World Cup squad named", frozenset({"football", "worldcup"})),
    ])


@pytest.fixture
def two_clusters():
    """Six documents in two keyword-identical clusters, interleaved in file order."""
    a = frozenset({"ukraine", "crimea", "russia"})
    b = frozenset({"mh370", "malaysia"})
    return build_corpus([
        Document("a1", "", a), Document("b1", "", b), Document("a2", "", a),
        Document("b2", "", b), Document("a3", "", a), Document("b3", "", b),
    ])


# One line per acceptance criterion, echoed live and again in the terminal summary.
ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def criterion(capsys):
    def record(cid: str, ok: bool, detail: str) -> None:
        line = f"{cid} {'PASS' if ok else 'FAIL'}: {detail}"
        ACCEPTANCE_LINES.append(line)
        with capsys.disabled():
            print("\n" + line)
    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[0][1:])):
            terminalreporter.write_line(line)
