import pytest

from textgnn.gateway import BackendConfig, Gateway, MockBackend
from textgnn.graph import AgentNode, CommunityGraph, DataNode, Edge, EdgeKind, PaperKind

SECTIONS = ("related-work", "introduction", "other")


def make_graph(
    n_agents: int,
    n_papers: int,
    *,
    edge: EdgeKind = EdgeKind.AUTHORSHIP,
    profiled: bool = True,
    target_content: str = "",
    tag: str = "",
) -> CommunityGraph:
    """Target paper ``t`` with ``n_agents`` agents and ``n_papers`` cited papers."""
    g = CommunityGraph()
    g.add_paper(DataNode("t", target_content, PaperKind.FULL_PAPER))
    for i in range(n_agents):
        profile = f"I study topic {i}{tag} in depth." if profiled else None
        g.add_agent(AgentNode(f"a{i:02d}", f"Agent {i}", profile, (f"paper by agent {i}{tag}",)))
        g.add_edge(Edge(f"a{i:02d}", "t", edge))
    for j in range(n_papers):
        g.add_paper(DataNode(f"p{j:02d}", f"abstract of cited work {j}{tag}"))
        g.add_edge(Edge("t", f"p{j:02d}", EdgeKind.CITATION, SECTIONS[j % 3]))
    return g


def new_mock(**overrides) -> tuple[Gateway, MockBackend]:
    backend = MockBackend()
    return Gateway(backend, BackendConfig(kind="mock", **overrides)), backend


@pytest.fixture
def mock():
    return new_mock()


def pytest_terminal_summary(terminalreporter):
    import test_acceptance

    if test_acceptance.LINES:
        terminalreporter.section("acceptance criteria")
        for line in test_acceptance.LINES:
            terminalreporter.write_line(line)
