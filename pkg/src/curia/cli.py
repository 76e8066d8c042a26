"""Batch command line: validate logs, compute metrics, detect, simulate.

Exit codes: 0 success, 1 rule or replay violation, 2 usage or config error,
3 I/O or parse error. Machine-readable payload goes to stdout and nothing
else does; all diagnostics go to stderr.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click

from . import anomaly as anomaly_mod
from . import ledger, metrics, sim
from .anomaly import DetectorParams, InvalidThreshold
from .ledger import LogLoadResult, LogParseError, ReplayError
from .model import MIN_ISSUE_SIZE
from .sim import InvalidConfig

EXIT_VIOLATION = 1
EXIT_IO = 3


def _fail_io(message: str) -> None:
    click.echo(f"error: {message}", err=True)
    sys.exit(EXIT_IO)


def _load_events(path: str, permissive: bool) -> LogLoadResult:
    try:
        data = Path(path).read_bytes()
    except OSError as exc:
        _fail_io(str(exc))
    try:
        result = ledger.load_log(data, permissive=permissive)
    except LogParseError as exc:
        _fail_io(f"{path}: {exc}")
    for kind, count in sorted(result.skipped_kinds.items()):
        click.echo(f"skipped {count} event(s) of unknown kind {kind!r}", err=True)
    return result


def _replay_events(result: LogLoadResult, min_issue_size: int, permissive: bool):
    try:
        return ledger.replay(
            result.events, min_issue_size=min_issue_size, allow_gaps=permissive
        )
    except ReplayError as exc:
        click.echo(
            json.dumps(
                {
                    "seq": exc.seq,
                    "rule": exc.violation.code,
                    "message": exc.violation.message,
                },
                sort_keys=True,
            )
        )
        click.echo(f"replay failed at seq {exc.seq}: {exc.violation}", err=True)
        sys.exit(EXIT_VIOLATION)


def _log_options(fn):
    fn = click.option(
        "--min-issue-size",
        default=MIN_ISSUE_SIZE,
        show_default=True,
        help="Issue size floor used when replaying.",
    )(fn)
    fn = click.option(
        "--strict/--permissive",
        "strict",
        default=True,
        help="Permissive parsing skips unknown event kinds.",
    )(fn)
    return fn


@click.group()
@click.version_option(package_name="curia")
def main():
    """Event-sourced open review and curation engine."""


@main.command()
@click.argument("log_path", type=click.Path())
@_log_options
def validate(log_path, min_issue_size, strict):
    """Replay LOG_PATH and print its state digest."""
    result = _load_events(log_path, permissive=not strict)
    state = _replay_events(result, min_issue_size, permissive=not strict)
    click.echo(
        json.dumps(
            {"digest": ledger.digest(state).digest, "events": len(result.events)},
            sort_keys=True,
        )
    )
    click.echo(f"ok: {len(result.events)} events", err=True)


@main.command(name="metrics")
@click.argument("log_path", type=click.Path())
@click.option("--item", "items", multiple=True, help="Restrict to these item URIs.")
@click.option("--article", "articles", multiple=True, help="Restrict to these article ids.")
@click.option(
    "--format",
    "fmt",
    type=click.Choice(["json", "csv"]),
    default="json",
    show_default=True,
)
@_log_options
def metrics_cmd(log_path, items, articles, fmt, min_issue_size, strict):
    """Per-item validity, importance, and priority from LOG_PATH."""
    result = _load_events(log_path, permissive=not strict)
    state = _replay_events(result, min_issue_size, permissive=not strict)
    selected = list(items)
    for article_id in articles:
        article = state.articles.get(article_id)
        if article is None:
            raise click.UsageError(f"unknown article id {article_id!r}")
        selected.append(article.canonical_uri)
    records = metrics.collect_item_metrics(state, selected or None)
    if fmt == "csv":
        click.echo(metrics.metrics_csv(records), nl=False)
    else:
        click.echo(json.dumps(records, sort_keys=True, indent=2, ensure_ascii=False))


@main.command()
@click.argument("log_path", type=click.Path())
@click.option("--theta", default=0.5, show_default=True, help="Reciprocity share threshold.")
@click.option("--delta", default=0.8, show_default=True, help="Group density threshold.")
@click.option("--min-size", default=3, show_default=True, help="Minimum flagged group size.")
@_log_options
def detect(log_path, theta, delta, min_size, min_issue_size, strict):
    """Run the collusion detectors over LOG_PATH and print the report."""
    params = DetectorParams(theta=theta, delta=delta, min_size=min_size)
    try:
        params.validate()
    except InvalidThreshold as exc:
        raise click.UsageError(str(exc))
    result = _load_events(log_path, permissive=not strict)
    state = _replay_events(result, min_issue_size, permissive=not strict)
    click.echo(anomaly_mod.anomaly_report(state, params).to_json())


@main.command()
@click.argument("config_path", type=click.Path())
@click.argument("out_path", type=click.Path())
@click.option("--seed", type=int, default=None, help="Override the config seed.")
@click.option("--report", "report_path", type=click.Path(), default=None,
              help="Also write the report JSON to this file.")
def simulate(config_path, out_path, seed, report_path):
    """Run the scenario in CONFIG_PATH, write its log to OUT_PATH."""
    try:
        raw = json.loads(Path(config_path).read_text(encoding="utf-8"))
    except OSError as exc:
        _fail_io(str(exc))
    except json.JSONDecodeError as exc:
        _fail_io(f"{config_path}: invalid JSON: {exc}")
    if seed is not None:
        if not isinstance(raw, dict):
            raise click.UsageError("config must be a JSON object")
        raw["seed"] = seed
    try:
        config = sim.scenario_from_dict(raw)
    except InvalidConfig as exc:
        raise click.UsageError(str(exc))
    run = sim.run_scenario(config)
    try:
        Path(out_path).write_bytes(ledger.save_log(run.events))
    except OSError as exc:
        _fail_io(str(exc))
    report_json = run.report.to_json()
    if report_path is not None:
        try:
            Path(report_path).write_text(report_json + "\n", encoding="utf-8")
        except OSError as exc:
            _fail_io(str(exc))
    click.echo(report_json)
    click.echo(
        f"wrote {len(run.events)} events to {out_path}"
        f" (digest {run.report.state_digest[:12]})",
        err=True,
    )


@main.command(name="export-graph")
@click.argument("log_path", type=click.Path())
@click.option("--out", "out_path", type=click.Path(), default=None,
              help="Write the edge list here instead of stdout.")
@_log_options
def export_graph(log_path, out_path, min_issue_size, strict):
    """Export curation/authorship/review/co-curation edges as TSV."""
    result = _load_events(log_path, permissive=not strict)
    state = _replay_events(result, min_issue_size, permissive=not strict)
    edge_list = metrics.graph_edge_list(metrics.curation_graph(state))
    if out_path is None:
        click.echo(edge_list, nl=False)
    else:
        try:
            Path(out_path).write_text(edge_list, encoding="utf-8")
        except OSError as exc:
            _fail_io(str(exc))
        click.echo(f"wrote edge list to {out_path}", err=True)


if __name__ == "__main__":
    main()
