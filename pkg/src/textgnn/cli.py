"""Command-line entry point: simulate, evaluate, ablate.

Exit codes: 0 success, 2 some tasks failed, 64 usage error, 69 backend unavailable.
"""

from __future__ import annotations

import argparse
import logging
import os
import shutil
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import fields
from pathlib import Path
from typing import Callable, Sequence

from . import __version__
from .bench_io import (
    BenchIOError,
    ResultRecord,
    detect_task_kind,
    load_paper_tasks,
    load_review_tasks,
    read_results,
    save_results,
    write_jsonl,
)
from .engine import AggMode, StageConfig
from .evaluation import format_report
from .gateway import BackendConfig, BackendUnavailableError, make_gateway
from .runner import (
    ReferenceCache,
    build_report,
    evaluate_record,
    frozen_clock,
    simulate_paper_task,
    simulate_review_task,
    wall_clock,
)

EXIT_OK, EXIT_PARTIAL, EXIT_USAGE, EXIT_UNAVAILABLE = 0, 2, 64, 69

log = logging.getLogger("textgnn")

# config-file key -> BackendConfig field
CONFIG_KEYS = {
    "backend": "kind",
    "endpoint": "endpoint",
    "credential-env-var": "credential_env_var",
    "model": "model",
    "embedding-model": "embedding_model",
    "temperature": "temperature",
    "max-output-tokens": "max_output_tokens",
    "timeout": "request_timeout",
    "max-retries": "max_retries",
    "concurrency-limit": "concurrency_limit",
    "prompt-char-budget": "prompt_char_budget",
}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _positive_int(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"{text!r} is not an integer") from None
    if v < 1:
        raise argparse.ArgumentTypeError(f"{text!r} must be >= 1")
    return v


def read_config_file(path: str | os.PathLike) -> dict[str, str]:
    """Plain ``key = value`` lines; ``#`` starts a comment."""
    out = {}
    for n, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{n}: expected key = value")
        key, value = (s.strip() for s in line.split("=", 1))
        out[key] = value
    return out


def backend_config(args) -> BackendConfig:
    values: dict[str, object] = {}
    if getattr(args, "config", None):
        raw = read_config_file(args.config)
        unknown = set(raw) - set(CONFIG_KEYS) - {"cache-dir"}
        if unknown:
            raise UsageError(f"unknown config keys: {', '.join(sorted(unknown))}")
        types = {f.name: f.type for f in fields(BackendConfig)}
        for key, value in raw.items():
            if key == "cache-dir":
                continue
            name = CONFIG_KEYS[key]
            t = types[name]
            try:
                if "float" in str(t):
                    values[name] = float(value)
                elif "int" in str(t):
                    values[name] = None if value.lower() == "none" else int(value)
                else:
                    values[name] = value
            except ValueError:
                raise UsageError(f"config key {key}: bad value {value!r}") from None
    if getattr(args, "backend", None):
        values["kind"] = "http-api" if args.backend == "http" else args.backend
    if getattr(args, "model", None):
        values["model"] = args.model
    try:
        return BackendConfig(**values)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _cache_dir(args) -> str | None:
    if getattr(args, "cache_dir", None):
        return args.cache_dir
    if getattr(args, "config", None):
        return read_config_file(args.config).get("cache-dir")
    return None


def _manifest(args, command: str, cfg: BackendConfig, stage: StageConfig | None, **more) -> dict:
    m = {
        "tool": "textgnn",
        "version": __version__,
        "command": command,
        "backend": cfg.kind,
        "model": cfg.model,
        "embedding-model": cfg.embedding_model,
        "temperature": cfg.temperature,
        "note": "temperature-0 decoding; no sampling seed is involved",
    }
    if stage is not None:
        m.update({
            "mode": stage.mode.value,
            "max-agents": stage.max_agents,
            "max-cited-papers": stage.max_cited_papers,
            "citation-filter": stage.citation_filter,
        })
    m.update(more)
    return m


def _map(fn: Callable, items: Sequence, jobs: int) -> list:
    if jobs > 1 and len(items) > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(fn, items))
    return [fn(i) for i in items]


def _clock(cfg: BackendConfig):
    # Mock runs must be byte-reproducible, so they carry a fixed timestamp.
    return frozen_clock if cfg.kind == "mock" else wall_clock


def _stage_config(args, **overrides) -> StageConfig:
    kw = dict(
        mode=AggMode(args.mode),
        max_agents=getattr(args, "max_agents", None),
        max_cited_papers=getattr(args, "max_cited_papers", None),
        citation_filter=getattr(args, "citation_filter", "all"),
    )
    kw.update(overrides)
    return StageConfig(**kw)


def _status(records: Sequence[ResultRecord]) -> int:
    return EXIT_PARTIAL if any(r.status == "failed" for r in records) else EXIT_OK


def _simulate_papers(tasks, stage, gateway, cfg, jobs) -> list[ResultRecord]:
    clock = _clock(cfg)
    return _map(lambda t: simulate_paper_task(t, stage, gateway, clock), tasks, jobs)


def cmd_simulate_paper(args) -> int:
    cfg = backend_config(args)
    stage = _stage_config(args)
    tasks = load_paper_tasks(args.tasks)
    gateway = make_gateway(cfg)
    records = _simulate_papers(tasks, stage, gateway, cfg, args.jobs)
    manifest = _manifest(args, "simulate-paper", cfg, stage, input=Path(args.tasks).name, output=Path(args.out).name)
    save_results(args.out, records, manifest)
    _summary(records)
    return _status(records)


def cmd_simulate_review(args) -> int:
    cfg = backend_config(args)
    stage = _stage_config(args)
    tasks = load_review_tasks(args.tasks)
    gateway = make_gateway(cfg)
    clock = _clock(cfg)
    records = _map(lambda t: simulate_review_task(t, stage, gateway, args.reviewers, clock), tasks, args.jobs)
    manifest = _manifest(
        args, "simulate-review", cfg, stage, reviewers=args.reviewers,
        input=Path(args.tasks).name, output=Path(args.out).name,
    )
    save_results(args.out, records, manifest)
    _summary(records)
    return _status(records)


def _load_tasks(path):
    kind = detect_task_kind(path)
    tasks = load_review_tasks(path) if kind == "review" else load_paper_tasks(path)
    return {t.task_id: t for t in tasks}


def evaluate_records(records, tasks, gateway, cache, judge, jobs):
    return _map(lambda r: evaluate_record(r, tasks, gateway, cache, judge), records, jobs)


def write_report(out_dir: Path, stem: str, evaluated: Sequence[ResultRecord], title: str, extra: dict | None = None):
    sections = build_report(evaluated)
    text = [title, ""] if title else []
    rows = []
    for kind, summaries in sections:
        text.append(format_report(summaries, f"[{kind}]"))
        rows.extend({"kind": kind, **(extra or {}), **s.to_dict()} for s in summaries)
    unevaluated = sorted(r.task_id for r in evaluated if r.status != "ok")
    if unevaluated:
        text.append(f"unevaluated: {', '.join(unevaluated)}\n")
    if not sections:
        text.append("no evaluated results\n")
    (out_dir / f"{stem}.txt").write_text("\n".join(text), encoding="utf-8")
    write_jsonl(out_dir / f"{stem}.jsonl", rows)
    return "\n".join(text)


def cmd_evaluate(args) -> int:
    cfg = backend_config(args)
    manifest, records = read_results(args.results)
    tasks = _load_tasks(args.tasks)
    gateway = make_gateway(cfg)
    cache = ReferenceCache(_cache_dir(args), cfg.model)
    evaluated = evaluate_records(records, tasks, gateway, cache, args.judge, args.jobs)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    save_results(
        out / "evaluations.jsonl", evaluated,
        _manifest(args, "evaluate", cfg, None, input=Path(args.results).name, tasks=Path(args.tasks).name,
                  simulation=manifest or {}),
    )
    print(write_report(out, "report", evaluated, f"evaluation of {Path(args.results).name}"), end="")
    return _status(evaluated)


def cmd_ablate(args) -> int:
    values = [v.strip() for v in args.values.split(",") if v.strip()]
    if not values:
        raise UsageError("--values needs at least one value")
    if args.axis == "agents":
        try:
            overrides = [{"max_agents": _positive_int(v)} for v in values]
        except argparse.ArgumentTypeError as exc:
            raise UsageError(f"--values: {exc}") from None
    else:
        bad = [v for v in values if v not in ("all", "related-work", "introduction", "other")]
        if bad:
            raise UsageError(f"--values: unknown citation sections {bad}")
        overrides = [{"citation_filter": v} for v in values]
    cfg = backend_config(args)
    tasks = load_paper_tasks(args.tasks)
    by_id = {t.task_id: t for t in tasks}
    gateway = make_gateway(cfg)
    cache = ReferenceCache(_cache_dir(args), cfg.model)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    status = EXIT_OK
    combined = []
    for value, ov in zip(values, overrides):
        stage = _stage_config(args, **ov)
        records = _simulate_papers(tasks, stage, gateway, cfg, args.jobs)
        evaluated = evaluate_records(records, by_id, gateway, cache, False, args.jobs)
        stem = f"ablation-{args.axis}-{value}"
        save_results(
            out / f"{stem}.results.jsonl", evaluated,
            _manifest(args, "ablate", cfg, stage, axis=args.axis, value=value, input=Path(args.tasks).name),
        )
        print(write_report(out, f"{stem}.report", evaluated, f"{args.axis} = {value}", {"axis": args.axis, "value": value}), end="")
        for kind, summaries in build_report(evaluated):
            combined.extend({"kind": kind, "axis": args.axis, "value": value, **s.to_dict()} for s in summaries)
        status = max(status, _status(evaluated))
    write_jsonl(out / "ablation.jsonl", combined)
    return status


def cmd_export_mini(args) -> int:
    from importlib.resources import files

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for name in ("mini_paper.jsonl", "mini_review.jsonl"):
        with (files("textgnn") / "data" / name).open("rb") as src, open(out / name, "wb") as dst:
            shutil.copyfileobj(src, dst)
        print(out / name)
    return EXIT_OK


def _summary(records: Sequence[ResultRecord]) -> None:
    failed = [r for r in records if r.status == "failed"]
    log.info("%d tasks, %d failed", len(records), len(failed))
    for r in failed:
        print(f"task {r.task_id}: {r.error}", file=sys.stderr)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="textgnn", description="Research-community simulation on agent-data graphs.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def backend_flags(sp):
        sp.add_argument("--backend", choices=("mock", "http"), help="overrides the config file")
        sp.add_argument("--config", help="key = value config file")
        sp.add_argument("--model")
        sp.add_argument("--jobs", type=_positive_int, default=1, help="tasks run in parallel")

    modes = [m.value for m in AggMode]

    sp = sub.add_parser("simulate-paper", help="write the masked paper of every task")
    sp.add_argument("tasks")
    sp.add_argument("--mode", choices=modes, default="global")
    sp.add_argument("--max-agents", type=_positive_int)
    sp.add_argument("--max-cited-papers", type=_positive_int)
    sp.add_argument("--citation-filter", choices=("all", "related-work", "introduction", "other"), default="all")
    sp.add_argument("--out", required=True)
    backend_flags(sp)
    sp.set_defaults(func=cmd_simulate_paper)

    sp = sub.add_parser("simulate-review", help="review every task's ground-truth paper")
    sp.add_argument("tasks")
    sp.add_argument("--mode", choices=modes, default="global")
    sp.add_argument("--reviewers", type=_positive_int, default=5)
    sp.add_argument("--max-cited-papers", type=_positive_int)
    sp.add_argument("--out", required=True)
    backend_flags(sp)
    sp.set_defaults(func=cmd_simulate_review)

    sp = sub.add_parser("evaluate", help="score a results file against its tasks")
    sp.add_argument("results")
    sp.add_argument("tasks")
    sp.add_argument("--judge", action="store_true", help="also run the fine-grained LLM judge on papers")
    sp.add_argument("--cache-dir", help="where transformed references are cached")
    sp.add_argument("--out", required=True, help="output directory")
    backend_flags(sp)
    sp.set_defaults(func=cmd_evaluate)

    sp = sub.add_parser("ablate", help="simulate + evaluate once per value of one axis")
    sp.add_argument("tasks")
    sp.add_argument("--axis", choices=("agents", "papers"), required=True)
    sp.add_argument("--values", required=True, help="comma-separated")
    sp.add_argument("--mode", choices=modes, default="global")
    sp.add_argument("--cache-dir")
    sp.add_argument("--out", required=True, help="output directory")
    backend_flags(sp)
    sp.set_defaults(func=cmd_ablate)

    sp = sub.add_parser("export-mini", help="copy the bundled mini benchmark")
    sp.add_argument("out")
    sp.set_defaults(func=cmd_export_mini)
    return p


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"textgnn: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except BackendUnavailableError as exc:
        print(f"textgnn: backend unavailable: {exc}", file=sys.stderr)
        return EXIT_UNAVAILABLE
    except BenchIOError as exc:
        print(f"textgnn: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
