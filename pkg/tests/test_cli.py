import hashlib
import json
from pathlib import Path

import pytest

from textgnn.bench_io import read_results
from textgnn.cli import EXIT_OK, EXIT_PARTIAL, EXIT_UNAVAILABLE, EXIT_USAGE, main

import oracles


@pytest.fixture
def mini(tmp_path):
    assert main(["export-mini", str(tmp_path / "bench")]) == EXIT_OK
    return tmp_path / "bench"


def _lines(path):
    return [json.loads(x) for x in Path(path).read_text().splitlines()]


def _digest(path):
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def test_simulate_paper_is_byte_deterministic(mini, tmp_path):
    outs = []
    for run in ("one", "two"):
        out = tmp_path / run / "results.jsonl"
        assert main(["simulate-paper", str(mini / "mini_paper.jsonl"), "--backend", "mock", "--out", str(out)]) == EXIT_OK
        outs.append(out.read_bytes())
    assert outs[0] == outs[1]
    manifest, recs = read_results(tmp_path / "one" / "results.jsonl")
    assert manifest["mode"] == "global" and manifest["backend"] == "mock" and manifest["input"] == "mini_paper.jsonl"
    assert [r.status for r in recs] == ["ok"] * 5


def test_jobs_do_not_change_output(mini, tmp_path):
    args = ["simulate-review", str(mini / "mini_review.jsonl"), "--backend", "mock"]
    assert main(args + ["--out", str(tmp_path / "a.jsonl")]) == EXIT_OK
    assert main(args + ["--jobs", "4", "--out", str(tmp_path / "b.jsonl")]) == EXIT_OK
    assert _lines(tmp_path / "a.jsonl")[1:] == _lines(tmp_path / "b.jsonl")[1:]


def test_no_authors_is_partial_failure(mini, tmp_path):
    recs = _lines(mini / "mini_paper.jsonl")
    recs[0]["authors"] = []
    tasks = tmp_path / "tasks.jsonl"
    tasks.write_text("\n".join(json.dumps(r) for r in recs) + "\n")
    out = tmp_path / "r.jsonl"
    assert main(["simulate-paper", str(tasks), "--mode", "agent", "--backend", "mock", "--out", str(out)]) == EXIT_PARTIAL
    _, results = read_results(out)
    assert results[0].status == "failed" and "NoAgentsError" in results[0].error
    assert all(r.status == "ok" for r in results[1:])


@pytest.mark.parametrize(
    "argv",
    [
        ["simulate-paper", "x.jsonl", "--max-agents", "0", "--out", "o"],
        ["simulate-paper", "x.jsonl", "--mode", "everything", "--out", "o"],
        ["simulate-review", "x.jsonl", "--reviewers", "-1", "--out", "o"],
        ["ablate", "x.jsonl", "--axis", "temperature", "--values", "1", "--out", "o"],
        ["ablate", "x.jsonl", "--axis", "agents", "--values", "1,zero", "--out", "o"],
        ["ablate", "x.jsonl", "--axis", "papers", "--values", "appendix", "--out", "o"],
        ["frobnicate"],
        [],
    ],
)
def test_usage_errors(argv):
    try:
        code = main(argv)
    except SystemExit as exc:  # argparse exits directly
        code = exc.code
    assert code == EXIT_USAGE


def test_backend_unavailable(mini, tmp_path, monkeypatch):
    monkeypatch.delenv("TEXTGNN_NO_SUCH_KEY", raising=False)
    cfg = tmp_path / "cfg.txt"
    cfg.write_text("backend = http-api\ncredential-env-var = TEXTGNN_NO_SUCH_KEY\n")
    argv = ["simulate-paper", str(mini / "mini_paper.jsonl"), "--config", str(cfg), "--out", str(tmp_path / "o.jsonl")]
    assert main(argv) == EXIT_UNAVAILABLE
    # a flag overrides the config file
    assert main(argv + ["--backend", "mock"]) == EXIT_OK


def test_bad_config_file(mini, tmp_path):
    cfg = tmp_path / "cfg.txt"
    cfg.write_text("colour = blue\n")
    assert main(["simulate-paper", str(mini / "mini_paper.jsonl"), "--config", str(cfg), "--out", str(tmp_path / "o")]) == EXIT_USAGE


def test_inputs_not_mutated(mini, tmp_path):
    before = {p.name: _digest(p) for p in mini.iterdir()}
    main(["simulate-paper", str(mini / "mini_paper.jsonl"), "--backend", "mock", "--out", str(tmp_path / "p.jsonl")])
    main(["evaluate", str(tmp_path / "p.jsonl"), str(mini / "mini_paper.jsonl"), "--backend", "mock", "--out", str(tmp_path / "ev")])
    assert {p.name: _digest(p) for p in mini.iterdir()} == before


def test_evaluate_identical_fixture_scores_one(tmp_path):
    answers = ["alpha answer", "beta answer", "gamma answer", "delta answer", "epsilon answer"]
    tasks = tmp_path / "tasks.jsonl"
    tasks.write_text(
        json.dumps({"task-id": "x", "authors": [], "reference-5q": answers, "difficulty": "easy"}) + "\n"
        + json.dumps({"task-id": "y", "authors": []}) + "\n"
    )
    results = tmp_path / "res.jsonl"
    results.write_text(
        json.dumps({"task-id": "x", "kind": "paper", "mode": "self", "generated": {"paper": answers}}) + "\n"
        + json.dumps({"task-id": "y", "kind": "paper", "mode": "self", "generated": {"paper": answers}}) + "\n"
    )
    out = tmp_path / "ev"
    assert main(["evaluate", str(results), str(tasks), "--backend", "mock", "--out", str(out)]) == EXIT_OK
    _, evaluated = read_results(out / "evaluations.jsonl")
    assert evaluated[0].metrics["overall"] == pytest.approx(1.0)
    assert evaluated[1].status == "unevaluated" and evaluated[1].metrics is None
    rows = _lines(out / "report.jsonl")
    assert rows[0]["group"] == {} and rows[0]["means"]["overall"] == pytest.approx(1.0)
    assert "unevaluated: y" in (out / "report.txt").read_text()


def test_mini_bench_report_matches_oracle(mini, tmp_path):
    res, out, cache = tmp_path / "p.jsonl", tmp_path / "ev", tmp_path / "cache"
    main(["simulate-paper", str(mini / "mini_paper.jsonl"), "--backend", "mock", "--out", str(res)])
    assert main(["evaluate", str(res), str(mini / "mini_paper.jsonl"), "--backend", "mock",
                 "--cache-dir", str(cache), "--out", str(out)]) == EXIT_OK

    # independent recomputation: reference answers from the task file or the transform cache
    tasks = {t["task-id"]: t for t in _lines(mini / "mini_paper.jsonl")}
    cached = [json.loads(p.read_text()) for p in cache.iterdir()]
    assert len(cached) == 1, "one task carries an introduction instead of answers"
    rows = []
    for rec in _lines(res)[1:]:
        task = tasks[rec["task-id"]]
        ref = task.get("reference-5q") or cached[0]
        per_q, overall = oracles.d_p(
            [oracles.trigram_vector(a) for a in rec["generated"]["paper"]], [oracles.trigram_vector(a) for a in ref]
        )
        metrics = {f"q{i}": v for i, v in enumerate(per_q, 1)} | {"overall": overall}
        rows.append({"mode": rec["mode"], "difficulty": task.get("difficulty"), "metrics": metrics})
    expected = oracles.grouped_means(rows, ("mode", "difficulty"))

    report = _lines(out / "report.jsonl")
    assert len(report) == len(expected)
    for row in report:
        label = ", ".join(f"{k}={v}" for k, v in row["group"].items()) or "all"
        count, means = expected[label]
        assert row["count"] == count
        for k, v in means.items():
            assert row["means"][k] == pytest.approx(v, abs=1e-9)


def test_evaluate_reviews(mini, tmp_path):
    res = tmp_path / "r.jsonl"
    assert main(["simulate-review", str(mini / "mini_review.jsonl"), "--backend", "mock", "--reviewers", "2", "--out", str(res)]) == EXIT_OK
    _, recs = read_results(res)
    # the 7-reviewer task is matched down to 2: read all 7, then 2 x 3 reviewer calls and 2 metareviews
    assert recs[1].calls == 7 + 6 + 2
    assert all(1 <= r.generated["score"] <= 10 for r in recs)
    assert main(["evaluate", str(res), str(mini / "mini_review.jsonl"), "--backend", "mock", "--out", str(tmp_path / "ev")]) == EXIT_OK
    report = _lines(tmp_path / "ev" / "report.jsonl")
    assert [r["group"] for r in report] == [{}, {"mode": "global"}]
    assert set(report[0]["means"]) == {"strength", "weakness", "delta_score"}


def test_ablate_agents(mini, tmp_path):
    out = tmp_path / "abl"
    assert main(["ablate", str(mini / "mini_paper.jsonl"), "--axis", "agents", "--values", "1,2", "--backend", "mock", "--out", str(out)]) == EXIT_OK
    combined = _lines(out / "ablation.jsonl")
    assert sorted({r["value"] for r in combined}) == ["1", "2"]
    assert (out / "ablation-agents-1.report.txt").exists() and (out / "ablation-agents-2.report.txt").exists()


def test_ablate_papers(mini, tmp_path):
    out = tmp_path / "abl"
    code = main(["ablate", str(mini / "mini_paper.jsonl"), "--axis", "papers", "--values",
                 "related-work,introduction,other", "--backend", "mock", "--out", str(out)])
    assert code == EXIT_OK
    combined = _lines(out / "ablation.jsonl")
    assert [r["value"] for r in combined if r["group"] == {}] == ["related-work", "introduction", "other"]
