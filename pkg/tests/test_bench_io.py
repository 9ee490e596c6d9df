import json

import pytest
from hypothesis import given, strategies as st

from textgnn.bench_io import (
    TARGET,
    BenchIOError,
    ResultRecord,
    SchemaError,
    detect_task_kind,
    load_paper_tasks,
    load_review_tasks,
    paper_task_from_record,
    paper_task_graph,
    paper_task_to_record,
    partition_by_difficulty,
    read_results,
    review_task_from_record,
    review_task_graph,
    review_task_to_record,
    save_results,
)
from textgnn.graph import EdgeKind

PAPER_REC = {
    "task-id": "p1",
    "target-title": "A title",
    "authors": [{"name": "Ada", "publications": ["abs 1", "abs 2"]}],
    "cited-papers": [{"abstract": "c0", "section": "introduction"}, {"abstract": "c1"}, "c2"],
    "reference-5q": ["q1", "q2", "q3", "q4", "q5"],
    "difficulty": "hard",
    "venue": "somewhere",
}

REVIEW_REC = {
    "task-id": "r1",
    "full-paper": "full text",
    "reviewers": [{"name": "Bo", "publications": ["x"]}, {"name": "Cy", "publications": []}],
    "cited-papers": [],
    "reference-reviews": [
        {"strength-text": "good", "weakness-text": "bad", "score": 6},
        {"strength-text": "fine", "weakness-text": "meh", "score": 5.5},
    ],
    "authors": ["Cy"],
    "decision": "accept",
}


def test_paper_record_round_trip():
    t = paper_task_from_record(PAPER_REC)
    assert t.extra == {"venue": "somewhere"}
    assert [c.section for c in t.cited_papers] == ["introduction", None, None]
    back = paper_task_to_record(t)
    assert paper_task_from_record(back) == t
    assert back["venue"] == "somewhere"


def test_review_record_round_trip():
    t = review_task_from_record(REVIEW_REC)
    assert t.reference_score == pytest.approx(5.75)
    assert t.extra == {"decision": "accept"}
    back = review_task_to_record(t)
    assert back["reference-reviews"][0]["score"] == 6
    assert review_task_from_record(back) == t


@pytest.mark.parametrize(
    "patch,field",
    [
        ({"task-id": None}, "task-id"),
        ({"authors": "Ada"}, "authors"),
        ({"reference-5q": ["only one"]}, "reference-5q"),
        ({"difficulty": "brutal"}, "difficulty"),
        ({"cited-papers": [42]}, "cited-papers[0]"),
    ],
)
def test_paper_schema_errors(patch, field):
    rec = {**PAPER_REC, **patch}
    if patch.get("task-id", 1) is None:
        del rec["task-id"]
    with pytest.raises(SchemaError) as err:
        paper_task_from_record(rec, line=7)
    assert err.value.field == field and err.value.line == 7


@pytest.mark.parametrize(
    "patch,field",
    [
        ({"reviewers": []}, "reviewers"),
        ({"reference-reviews": []}, "reference-reviews"),
        ({"reference-reviews": [{"strength-text": "s", "weakness-text": "w", "score": 12}]}, "reference-reviews[0].score"),
        ({"reference-reviews": [{"strength-text": "s"}]}, "reference-reviews[0]"),
    ],
)
def test_review_schema_errors(patch, field):
    with pytest.raises(SchemaError) as err:
        review_task_from_record({**REVIEW_REC, **patch})
    assert err.value.field == field


def test_files(tmp_path):
    paper, review = tmp_path / "p.jsonl", tmp_path / "r.jsonl"
    paper.write_text(json.dumps(PAPER_REC) + "\n\n" + json.dumps({**PAPER_REC, "task-id": 2}) + "\n")
    review.write_text(json.dumps(REVIEW_REC) + "\n")
    assert [t.task_id for t in load_paper_tasks(paper)] == ["p1", "2"]
    assert detect_task_kind(paper) == "paper" and detect_task_kind(review) == "review"
    assert len(load_review_tasks(review)) == 1
    bad = tmp_path / "bad.jsonl"
    bad.write_text(json.dumps(PAPER_REC) + "\n{not json\n")
    with pytest.raises(SchemaError) as err:
        load_paper_tasks(bad)
    assert err.value.line == 2
    with pytest.raises(BenchIOError):
        load_paper_tasks(tmp_path / "missing.jsonl")


def test_results_round_trip(tmp_path):
    recs = [
        ResultRecord("a", "paper", "global", generated={"paper": list("abcde")}, difficulty="easy", calls=3,
                     extra={"agent-failures": {"x": "y"}}),
        ResultRecord("b", "review", "self", status="failed", error="boom"),
    ]
    path = tmp_path / "out.jsonl"
    save_results(path, recs, {"tool": "t"})
    first = json.loads(path.read_text().splitlines()[0])
    assert first == {"record-type": "manifest", "tool": "t"}
    manifest, back = read_results(path)
    assert manifest == {"tool": "t"}
    assert back == recs
    assert "task-id" in path.read_text().splitlines()[1]


def test_graph_builders():
    t = paper_task_from_record(PAPER_REC)
    g = paper_task_graph(t)
    assert g.paper(TARGET).masked
    assert g.agent_neighbors(TARGET, EdgeKind.AUTHORSHIP) == ["a0"]
    assert [e.section for e in g.incident_edges(TARGET, EdgeKind.CITATION)] == ["introduction", "other", "other"]
    r = review_task_from_record(REVIEW_REC)
    g = review_task_graph(r, [1])
    assert list(g.agents) == ["r1"] and g.agent("r1").name == "Cy"
    assert g.paper(TARGET).content == ""


def test_partition_exact_sizes():
    scored = [(f"t{i:04d}", i / 1000) for i in range(1000)]
    parts = partition_by_difficulty(scored)
    assert [len(parts[k]) for k in ("hard", "medium", "easy")] == [333, 334, 333]
    assert parts["hard"][0] == "t0000" and parts["easy"][-1] == "t0999"
    with pytest.raises(BenchIOError):
        partition_by_difficulty(scored[:2])


def test_partition_ties_broken_by_id():
    parts = partition_by_difficulty([("c", 0.5), ("a", 0.5), ("b", 0.5)])
    assert parts == {"hard": ["a"], "medium": ["b"], "easy": ["c"]}


@given(st.lists(st.floats(0, 1, allow_nan=False), min_size=3, max_size=500))
def test_partition_is_disjoint_cover(scores):
    scored = [(f"t{i}", s) for i, s in enumerate(scores)]
    parts = partition_by_difficulty(scored)
    flat = parts["hard"] + parts["medium"] + parts["easy"]
    assert sorted(flat) == sorted(t for t, _ in scored)
    by_id = dict(scored)
    if parts["hard"] and parts["easy"]:
        assert max(by_id[t] for t in parts["hard"]) <= min(by_id[t] for t in parts["medium"] + parts["easy"])
