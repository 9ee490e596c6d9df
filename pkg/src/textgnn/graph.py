"""Agent-data graph model specialized to research communities.

Agents are researchers whose hidden state is a text profile; data nodes are
papers whose hidden state is their text content. Edges are stored directed
but every neighborhood query treats them as undirected.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field, replace


class GraphError(ValueError):
    """Base class for graph construction and query errors."""


class DuplicateIdError(GraphError):
    pass


class DanglingEndpointError(GraphError):
    pass


class KindMismatchError(GraphError):
    pass


class UnknownNodeError(GraphError, KeyError):
    pass


class NotMaskableError(GraphError):
    pass


class AlreadyMaskedError(GraphError):
    pass


class EdgeKind(str, enum.Enum):
    AGENT_AGENT = "agent-agent"
    AUTHORSHIP = "authorship"
    REVIEW_QUALIFICATION = "review-qualification"
    CITATION = "citation"


class PaperKind(str, enum.Enum):
    ABSTRACT_ONLY = "abstract-only"
    FULL_PAPER = "full-paper"
    CONDENSED_5Q = "condensed-5q"


AGENT_DATA_KINDS = frozenset({EdgeKind.AUTHORSHIP, EdgeKind.REVIEW_QUALIFICATION})


@dataclass(frozen=True)
class AgentNode:
    id: str
    name: str = ""
    profile: str | None = None
    publications: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        if self.profile is not None and not self.profile.strip():
            raise ValueError(f"agent {self.id!r}: profile must be non-empty when present")
        object.__setattr__(self, "publications", tuple(self.publications))


@dataclass(frozen=True)
class DataNode:
    id: str
    content: str
    kind: PaperKind = PaperKind.ABSTRACT_ONLY

    @property
    def masked(self) -> bool:
        return self.content == ""


@dataclass(frozen=True)
class Edge:
    src: str
    dst: str
    kind: EdgeKind
    # Only meaningful on citation edges: which section of the citing paper cites dst.
    section: str | None = None


@dataclass
class CommunityGraph:
    """Researchers (agents) and papers (data) joined by typed edges.

    Agent-agent edges are representable but :meth:`add_edge` refuses them, so
    every graph built through this API is a community graph.
    """

    agents: dict[str, AgentNode] = field(default_factory=dict)
    papers: dict[str, DataNode] = field(default_factory=dict)
    edges: list[Edge] = field(default_factory=list)

    def __post_init__(self) -> None:
        self._adj: dict[str, list[Edge]] = {}
        for e in self.edges:
            self._index(e)

    def _index(self, e: Edge) -> None:
        self._adj.setdefault(e.src, []).append(e)
        if e.dst != e.src:
            self._adj.setdefault(e.dst, []).append(e)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, CommunityGraph):
            return NotImplemented
        return (
            self.agents == other.agents
            and self.papers == other.papers
            and self.edges == other.edges
        )

    def copy(self) -> CommunityGraph:
        return CommunityGraph(dict(self.agents), dict(self.papers), list(self.edges))

    # -- mutation -----------------------------------------------------------

    def _check_new_id(self, node_id: str) -> None:
        if node_id in self.agents or node_id in self.papers:
            raise DuplicateIdError(f"node id {node_id!r} already present")

    def add_agent(self, agent: AgentNode) -> CommunityGraph:
        self._check_new_id(agent.id)
        self.agents[agent.id] = agent
        return self

    def add_paper(self, paper: DataNode) -> CommunityGraph:
        self._check_new_id(paper.id)
        self.papers[paper.id] = paper
        return self

    def add_edge(self, edge: Edge) -> CommunityGraph:
        kind = EdgeKind(edge.kind)
        for end in (edge.src, edge.dst):
            if end not in self.agents and end not in self.papers:
                raise DanglingEndpointError(f"edge endpoint {end!r} not in graph")
        n_agents = (edge.src in self.agents) + (edge.dst in self.agents)
        if kind is EdgeKind.AGENT_AGENT:
            raise KindMismatchError("community graphs do not carry agent-agent edges")
        if kind in AGENT_DATA_KINDS and n_agents != 1:
            raise KindMismatchError(
                f"{kind.value} edge must join one agent and one paper: {edge.src}->{edge.dst}"
            )
        if kind is EdgeKind.CITATION and n_agents != 0:
            raise KindMismatchError(f"citation edge must join two papers: {edge.src}->{edge.dst}")
        if kind is not edge.kind:
            edge = replace(edge, kind=kind)
        self.edges.append(edge)
        self._index(edge)
        return self

    def set_profile(self, agent_id: str, profile: str) -> CommunityGraph:
        """Return a copy in which ``agent_id`` carries ``profile``."""
        g = self.copy()
        g.agents[agent_id] = replace(self.agent(agent_id), profile=profile)
        return g

    def set_content(self, paper_id: str, content: str) -> CommunityGraph:
        g = self.copy()
        g.papers[paper_id] = replace(self.paper(paper_id), content=content)
        return g

    # -- queries ------------------------------------------------------------

    def __contains__(self, node_id: object) -> bool:
        return node_id in self.agents or node_id in self.papers

    def agent(self, node_id: str) -> AgentNode:
        try:
            return self.agents[node_id]
        except KeyError:
            raise UnknownNodeError(node_id) from None

    def paper(self, node_id: str) -> DataNode:
        try:
            return self.papers[node_id]
        except KeyError:
            raise UnknownNodeError(node_id) from None

    def incident_edges(self, node: str, kind: EdgeKind | str | None = None) -> list[Edge]:
        if node not in self:
            raise UnknownNodeError(node)
        kind = EdgeKind(kind) if kind is not None else None
        return [e for e in self._adj.get(node, ()) if kind is None or e.kind is kind]

    def neighbors(self, node: str, kind: EdgeKind | str | None = None) -> list[str]:
        """Ids adjacent to ``node`` through edges of ``kind`` (any kind if None), sorted."""
        out = set()
        for e in self.incident_edges(node, kind):
            out.add(e.dst if e.src == node else e.src)
        return sorted(out)

    def agent_neighbors(self, node: str, kind: EdgeKind | str | None = None) -> list[str]:
        return [n for n in self.neighbors(node, kind) if n in self.agents]

    def paper_neighbors(self, node: str, kind: EdgeKind | str | None = None) -> list[str]:
        return [n for n in self.neighbors(node, kind) if n in self.papers]

    def validate(self) -> None:
        """Full scan of the structural invariants; raises GraphError on the first violation."""
        overlap = self.agents.keys() & self.papers.keys()
        if overlap:
            raise DuplicateIdError(f"ids used by both agents and papers: {sorted(overlap)}")
        probe = CommunityGraph(dict(self.agents), dict(self.papers))
        for e in self.edges:
            probe.add_edge(e)

    # -- masking ------------------------------------------------------------

    def mask_node(self, node: str) -> tuple[CommunityGraph, str]:
        """Blank a paper's content, returning the masked copy and the saved text."""
        if node in self.agents:
            raise NotMaskableError(f"{node!r} is an agent; only papers can be masked")
        paper = self.paper(node)
        if paper.masked:
            raise AlreadyMaskedError(node)
        return self.set_content(node, ""), paper.content
