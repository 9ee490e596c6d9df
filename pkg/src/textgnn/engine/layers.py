"""Generic text-space message passing over an agent-data graph.

Hidden states are strings (``None`` for an empty agent state). One call to
:func:`propagate` is one layer: agents aggregate messages from their agent
and data neighborhoods with their own function, data nodes aggregate with the
profile-free global function. The research stages in :mod:`.stages` are the
depth-2 specialisation of this recursion with dedicated prompts.
"""

from __future__ import annotations

from typing import Callable, Mapping, Sequence

from ..graph import AGENT_DATA_KINDS, CommunityGraph, EdgeKind

# f(inputs) -> text; inputs is the ordered concatenation [.] of texts.
TextFn = Callable[[Sequence[str]], str]


def _data_neighbors(graph: CommunityGraph, node: str, kinds) -> list[str]:
    out = set()
    for k in kinds:
        out.update(graph.paper_neighbors(node, k))
    return sorted(out)


def _agent_neighbors(graph: CommunityGraph, node: str, kinds) -> list[str]:
    out = set()
    for k in kinds:
        out.update(graph.agent_neighbors(node, k))
    return sorted(out)


def _messages(agent_fns, states, agents, centre, data, efficient):
    """f_a([h_a, h_centre, h_d]) over agent x data pairs, or one call per agent when efficient."""
    centre_state = [states[centre]] if states.get(centre) else []
    data_states = [states[d] for d in data if states.get(d)]
    if not agents:
        return data_states
    msgs = []
    for a in agents:
        head = [states[a]] if states.get(a) else []
        if efficient or not data_states:
            msgs.append(agent_fns(a)(head + centre_state + data_states))
        else:
            msgs.extend(agent_fns(a)(head + centre_state + [hd]) for hd in data_states)
    return msgs


def propagate(
    graph: CommunityGraph,
    states: Mapping[str, str | None],
    agent_fns: Callable[[str], TextFn],
    global_fn: TextFn,
    *,
    nodes: Sequence[str] | None = None,
    efficient: bool = True,
) -> dict[str, str | None]:
    """Run one layer and return the updated state map (untouched nodes keep their state)."""
    new = dict(states)
    targets = sorted(nodes) if nodes is not None else sorted(graph.agents) + sorted(graph.papers)
    for n in targets:
        if n in graph.agents:
            agents = _agent_neighbors(graph, n, (EdgeKind.AGENT_AGENT,))
            data = _data_neighbors(graph, n, AGENT_DATA_KINDS)
            msgs = _messages(agent_fns, states, agents, n, data, efficient)
            own = [states[n]] if states.get(n) else []
            new[n] = agent_fns(n)(own + msgs)
        else:
            agents = _agent_neighbors(graph, n, AGENT_DATA_KINDS)
            data = _data_neighbors(graph, n, (EdgeKind.CITATION,))
            msgs = _messages(agent_fns, states, agents, n, data, efficient)
            own = [states[n]] if states.get(n) else []
            new[n] = global_fn(own + msgs)
    return new


def initial_states(graph: CommunityGraph) -> dict[str, str | None]:
    """Data nodes start from their text attribute, agents from their profile (usually empty)."""
    states: dict[str, str | None] = {a.id: a.profile for a in graph.agents.values()}
    states.update({p.id: p.content or None for p in graph.papers.values()})
    return states


def run_layers(graph, agent_fns, global_fn, depth: int, *, efficient: bool = True) -> dict[str, str | None]:
    states = initial_states(graph)
    for _ in range(depth):
        states = propagate(graph, states, agent_fns, global_fn, efficient=efficient)
    return states
