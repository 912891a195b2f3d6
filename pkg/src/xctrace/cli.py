"""Command-line front end.

Commands mirror the library: ``generate`` writes a synthetic corpus;
``analyze reads|lifetimes|transfers|sweep-tau`` compute log statistics;
``fit-powerlaw`` fits the lifetime histogram; ``simulate
hit-rate|content-model|fill-time`` run the cache simulator. Outputs are CSV
(header row, LF, reals at 12 significant digits) or JSON (one object with
``meta`` and ``data`` blocks); ``--plot`` additionally renders a PNG of the
same numbers. Exit codes: 0 success, 1 usage error, 2 data error. Malformed
log lines are warnings, never errors. XCT_LOG_LEVEL
(error|warn|info|debug) controls stderr diagnostics; data never goes to
stderr, diagnostics never to stdout.
"""

from __future__ import annotations

import csv
import datetime as dt
import io
import json
import logging
import os
import sys
from dataclasses import dataclass, replace
from fractions import Fraction
from pathlib import Path
from typing import Callable, Sequence

import click

from . import __version__, cache, stats, synth
from .events import SECONDS_PER_DAY, day_start
from .logparse import parse_logs, select_log_files
from .stats import UNRESOLVED_KEY
from .synth import InvalidProfile
from .units import (
    parse_date_range,
    parse_duration,
    parse_size,
    parse_size_list,
)

logger = logging.getLogger(__name__)

_LOG_LEVELS = {
    "error": logging.ERROR,
    "warn": logging.WARNING,
    "info": logging.INFO,
    "debug": logging.DEBUG,
}


class DataError(Exception):
    """The input data cannot support the requested computation (exit 2)."""


def _configure_logging() -> None:
    raw = os.environ.get("XCT_LOG_LEVEL", "warn").strip().lower()
    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(logging.Formatter("%(levelname)s %(name)s: %(message)s"))
    root = logging.getLogger("xctrace")
    root.handlers[:] = [handler]
    root.setLevel(_LOG_LEVELS.get(raw, logging.WARNING))
    if raw not in _LOG_LEVELS:
        logger.warning("unknown XCT_LOG_LEVEL %r; using warn", raw)


# ---------------------------------------------------------------------------
# output plumbing


def _real(value: float) -> str:
    return format(float(value), ".12g")


def _csv_cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, Fraction):
        return _real(float(value))
    if isinstance(value, float):
        return _real(value)
    return str(value)


def _jsonable(value):
    """JSON-safe copy; reals normalized to the same 12 significant digits CSV uses."""
    if isinstance(value, bool) or value is None or isinstance(value, (int, str)):
        return value
    if isinstance(value, Fraction):
        return float(_real(float(value)))
    if isinstance(value, float):
        return float(_real(value))
    if isinstance(value, dict):
        return {key: _jsonable(val) for key, val in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(item) for item in value]
    return str(value)


@dataclass(frozen=True)
class Column:
    name: str
    kind: str
    description: str


def _schema_dump(command: str, columns: Sequence[Column], notes: str = "") -> str:
    lines = [f"# schema: {command}", "column,type,description"]
    lines.extend(f"{c.name},{c.kind},{c.description}" for c in columns)
    if notes:
        lines.append(f"# {notes}")
    return "\n".join(lines) + "\n"


def _write_text(out: Path | None, text: str) -> None:
    if out is None:
        sys.stdout.write(text)
        return
    if str(out.parent) not in ("", "."):
        out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(text, encoding="utf-8", newline="")


def _resolve_format(fmt: str | None, out: Path | None) -> str:
    if fmt:
        return fmt
    if out is not None and out.suffix.lower() == ".json":
        return "json"
    return "csv"


def _meta(command: str, fmt: str, *, seed: int | None = None, **flags) -> dict:
    """The JSON meta block: version + semantic flags, never filesystem paths."""
    return {
        "version": __version__,
        "command": command,
        "format": fmt,
        "seed": seed,
        "flags": dict(sorted(flags.items())),
    }


def _emit(
    rows: Sequence[dict],
    columns: Sequence[Column],
    *,
    fmt: str,
    out: Path | None,
    meta: dict,
    rows_key: str = "rows",
    extra: dict | None = None,
) -> None:
    names = [column.name for column in columns]
    if fmt == "csv":
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(names)
        for row in rows:
            writer.writerow([_csv_cell(row.get(name)) for name in names])
        text = buffer.getvalue()
    else:
        data = {rows_key: [{name: _jsonable(row.get(name)) for name in names} for row in rows]}
        if extra:
            data.update({key: _jsonable(val) for key, val in extra.items()})
        text = json.dumps({"meta": _jsonable(meta), "data": data},
                          indent=2, sort_keys=True) + "\n"
    _write_text(out, text)


def _maybe_plot(plot_path: Path | None, build: Callable[[], "object"]) -> None:
    if plot_path is None:
        return
    from . import figures

    figures.save_figure(build(), plot_path)


# ---------------------------------------------------------------------------
# flag parsing helpers


def _parse_flag(parser: Callable, text: str, flag: str):
    try:
        return parser(text)
    except ValueError as exc:
        raise click.UsageError(f"{flag}: {exc}") from exc


def _parse_capacities(text: str) -> list[int]:
    """'40TB:60TB:2TB' (start:end:step, inclusive) or a comma list of sizes."""
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise ValueError("capacity range must be start:end:step")
        start, end, step = (parse_size(part) for part in parts)
        if end < start:
            raise ValueError("capacity range ends below its start")
        return list(range(start, end + 1, step))
    return parse_size_list(text)


def _parse_durations(text: str) -> list[int]:
    """'1d:10d:1d' (start:end:step, inclusive) or a comma list of durations."""
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise ValueError("duration range must be start:end:step")
        start, end, step = (parse_duration(part) for part in parts)
        if step <= 0:
            raise ValueError("duration step must be positive")
        if end < start:
            raise ValueError("duration range ends below its start")
        return list(range(start, end + 1, step))
    values = [parse_duration(part) for part in text.split(",") if part.strip()]
    if not values:
        raise ValueError("empty duration list")
    return values


def _time_range(days: str | None):
    if days is None:
        return None, (None, None)
    start, end = parse_date_range(days)
    span = (day_start(start), day_start(end) + SECONDS_PER_DAY - 1)
    return span, (start, end)


def _load_events(logs: str | None, days: str | None, skip_unreadable: bool):
    if not logs:
        raise click.UsageError("--logs is required")
    directory = Path(logs)
    if not directory.is_dir():
        raise DataError(f"log directory not found: {directory}")
    span, (start_day, end_day) = _time_range(days)
    files = select_log_files(directory, start_day, end_day)
    if not files:
        suffix = f" within {days}" if days else ""
        raise DataError(f"no xrootd-*.log[.gz] files in {directory}{suffix}")
    try:
        events, report = parse_logs(files, span, skip_unreadable=skip_unreadable)
    except OSError as exc:
        raise DataError(f"unreadable log file: {exc}") from exc
    if report.malformed:
        logger.warning("%d malformed lines skipped", report.malformed)
    if report.field_warnings:
        logger.warning("%d lines carried unexpected extra fields", report.field_warnings)
    if report.readv_unresolved:
        logger.info("%d readV operations left unresolved", report.readv_unresolved)
    logger.info("parsed %d events from %d files (%d bytes)",
                len(events), report.files_scanned, report.byte_volume_scanned)
    return events, report


# ---------------------------------------------------------------------------
# shared click option groups


def _io_options(fn):
    fn = click.option("--schema", "schema", is_flag=True,
                      help="Print this command's output schema and exit.")(fn)
    fn = click.option("--format", "fmt", type=click.Choice(["csv", "json"]), default=None,
                      help="Output format; default inferred from --out extension, else csv.")(fn)
    fn = click.option("--out", "out_path", type=click.Path(dir_okay=False, path_type=Path),
                      default=None, help="Output file (default: stdout).")(fn)
    return fn


def _logs_options(fn):
    fn = click.option("--skip-unreadable", is_flag=True,
                      help="Skip unreadable log files instead of failing.")(fn)
    fn = click.option("--days", default=None, metavar="RANGE",
                      help="Inclusive day filter, YYYY-MM-DD:YYYY-MM-DD or one date.")(fn)
    fn = click.option("--logs", "logs", type=click.Path(file_okay=False), default=None,
                      help="Directory holding xrootd-YYYYMMDD.log[.gz] files.")(fn)
    return fn


def _plot_option(fn):
    return click.option("--plot", "plot_path", type=click.Path(dir_okay=False, path_type=Path),
                        default=None, help="Also render this output as a PNG figure.")(fn)


# ---------------------------------------------------------------------------
# command tree


@click.group(name="xctrace")
@click.version_option(__version__, prog_name="xctrace")
def cli() -> None:
    """Trace analysis and cache simulation for XRootD-style server logs."""


# -- generate ----------------------------------------------------------------


@cli.command("generate")
@click.option("--seed", type=int, default=0, show_default=True, help="Generator seed.")
@click.option("--days", default=None, metavar="RANGE",
              help="Day range to generate, YYYY-MM-DD:YYYY-MM-DD (required).")
@click.option("--out", "out_dir", type=click.Path(file_okay=False, path_type=Path),
              default=None, help="Directory for the daily log files (required).")
@click.option("--population", type=int, default=None, help="Distinct file count.")
@click.option("--file-size-mean", default=None, metavar="SIZE",
              help="Mean file size (e.g. 200MB).")
@click.option("--read-size-mean", default=None, metavar="SIZE", help="Mean read size.")
@click.option("--offset-mean", default=None, metavar="SIZE", help="Mean read offset.")
@click.option("--read-count-mean", type=float, default=None,
              help="Mean monthly reads per file.")
@click.option("--readv-fraction", type=float, default=None,
              help="Fraction of reads emitted as vector reads.")
@click.option("--sessions-per-day", type=int, default=None)
@click.option("--junk-rate", type=float, default=None,
              help="Rate of keyphrase-free noise lines.")
@click.option("--orphan-readv-rate", type=float, default=None,
              help="Fault injection: rate of unresolvable readV lines.")
@click.option("--ground-truth", "truth_path", type=click.Path(dir_okay=False, path_type=Path),
              default=None, help="Also dump the exact generated events as JSON.")
@click.option("--schema", "schema", is_flag=True,
              help="Print this command's output description and exit.")
def cmd_generate(seed, days, out_dir, population, file_size_mean, read_size_mean,
                 offset_mean, read_count_mean, readv_fraction, sessions_per_day,
                 junk_rate, orphan_readv_rate, truth_path, schema):
    """Write a deterministic synthetic daily-log corpus."""
    if schema:
        click.echo(_schema_dump(
            "generate", [],
            notes="no tabular output; writes xrootd-YYYYMMDD.log files under --out; "
                  "--ground-truth JSON holds data.events"), nl=False)
        return
    if not days:
        raise click.UsageError("--days is required")
    if out_dir is None:
        raise click.UsageError("--out is required")
    day_range = _parse_flag(parse_date_range, days, "--days")

    profile = synth.default_profile()
    updates: dict = {}
    if population is not None:
        updates["file_population"] = population
    if file_size_mean is not None:
        size = _parse_flag(parse_size, file_size_mean, "--file-size-mean")
        updates["file_size_distribution"] = replace(
            profile.file_size_distribution, mean=float(size))
    if read_size_mean is not None:
        size = _parse_flag(parse_size, read_size_mean, "--read-size-mean")
        updates["read_size_distribution"] = replace(
            profile.read_size_distribution, mean=float(size))
    if offset_mean is not None:
        size = _parse_flag(parse_size, offset_mean, "--offset-mean")
        updates["offset_distribution"] = replace(
            profile.offset_distribution, mean=float(size))
    if read_count_mean is not None:
        updates["read_count_mixture"] = replace(
            profile.read_count_mixture, mean_total=read_count_mean)
    if readv_fraction is not None:
        updates["readv_fraction"] = readv_fraction
    if sessions_per_day is not None:
        updates["sessions_per_day"] = sessions_per_day
    if junk_rate is not None:
        updates["junk_line_rate"] = junk_rate
    if orphan_readv_rate is not None:
        updates["orphan_readv_rate"] = orphan_readv_rate
    if updates:
        profile = replace(profile, **updates)

    try:
        events, written = synth.generate(profile, seed, day_range, out_dir)
    except InvalidProfile as exc:
        raise click.UsageError(str(exc)) from exc
    logger.info("wrote %d daily logs (%d events) under %s", len(written), len(events), out_dir)

    if truth_path is not None:
        meta = _meta("generate", "json", seed=seed, days=days,
                     population=profile.file_population)
        payload = {"meta": _jsonable(meta),
                   "data": {"events": [synth.event_record(e) for e in events]}}
        _write_text(truth_path, json.dumps(payload, indent=2, sort_keys=True) + "\n")


# -- analyze -----------------------------------------------------------------


@cli.group("analyze")
def analyze() -> None:
    """Statistics over parsed logs."""


_READS_COLUMNS = (
    Column("distinct_files", "int", "files with at least one read operation"),
    Column("total_read_ops", "int", "read + readV operations (readV counts once)"),
    Column("unresolved_ops", "int", "readV operations with no session match"),
    Column("total_bytes_read", "int", "sum of all request sizes, every chunk counted"),
    Column("size_samples", "int", "number of size@offset samples (readV chunks separate)"),
    Column("mean_read_size", "real", "total_bytes_read / size_samples"),
    Column("mean_offset", "real", "mean of all request offsets"),
    Column("mean_reads_per_file", "real", "operations per distinct file (blank if none)"),
)


@analyze.command("reads")
@_logs_options
@_io_options
@_plot_option
@click.option("--per-file", "per_file_path", type=click.Path(dir_okay=False, path_type=Path),
              default=None, help="Also write per-file operation counts as CSV.")
def cmd_reads(logs, days, skip_unreadable, out_path, fmt, schema, plot_path, per_file_path):
    """Read-operation accounting: counts, byte totals, size/offset means."""
    if schema:
        click.echo(_schema_dump(
            "analyze reads", _READS_COLUMNS,
            notes="json adds data.read_count_histogram over per-file counts"), nl=False)
        return
    fmt = _resolve_format(fmt, out_path)
    events, _ = _load_events(logs, days, skip_unreadable)
    result = stats.count_reads_per_file(events)
    row = {
        "distinct_files": result.distinct_files,
        "total_read_ops": result.total_read_ops,
        "unresolved_ops": result.per_file_counts.get(UNRESOLVED_KEY, 0),
        "total_bytes_read": result.total_bytes_read,
        "size_samples": result.size_samples,
        "mean_read_size": result.mean_read_size,
        "mean_offset": result.mean_offset,
        "mean_reads_per_file": result.mean_reads_per_file,
    }
    per_file_counts = [count for path, count in result.per_file_counts.items()
                       if path != UNRESOLVED_KEY]
    hist = stats.build_histogram(per_file_counts, stats.READ_COUNT_EDGES)
    meta = _meta("analyze reads", fmt, days=days)
    _emit([row], _READS_COLUMNS, fmt=fmt, out=out_path, meta=meta, rows_key="summary",
          extra={"read_count_histogram": {"edges": hist.edges, "counts": hist.counts}})
    if per_file_path is not None:
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(["path", "read_ops"])
        for path, count in sorted(result.per_file_counts.items()):
            writer.writerow([path, count])
        _write_text(per_file_path, buffer.getvalue())
    _maybe_plot(plot_path, lambda: _bar(hist, xlabel="read operations per file (monthly)",
                                        title="Per-file read-operation counts"))


def _bar(hist: stats.Histogram, *, xlabel: str, title: str, fit_curve=None):
    from . import figures

    return figures.bar_figure(hist.centers, hist.counts, xlabel=xlabel, title=title,
                              fit_curve=fit_curve)


_LIFETIME_COLUMNS = (
    Column("path", "string", "file path"),
    Column("t_start", "int", "epoch seconds of the lifetime's first open"),
    Column("t_end", "int", "epoch seconds of its last close (or last open if incomplete)"),
    Column("duration_hours", "real", "(t_end - t_start) in hours"),
    Column("opens", "int", "opens grouped into this lifetime"),
    Column("incomplete", "bool", "true when no close bounded the lifetime"),
)


@analyze.command("lifetimes")
@_logs_options
@_io_options
@_plot_option
@click.option("--tau", default="1.2d", show_default=True, metavar="DURATION",
              help="Gap threshold splitting lifetimes (e.g. 1.2d, 28.8h).")
def cmd_lifetimes(logs, days, skip_unreadable, out_path, fmt, schema, plot_path, tau):
    """Per-file lifetime records with a summary and histogram."""
    if schema:
        click.echo(_schema_dump(
            "analyze lifetimes", _LIFETIME_COLUMNS,
            notes="json adds data.summary (mean_hours, fraction_under_{1h,5h,10h}, ...) "
                  "and data.histogram (1-hour bins over [0, 240] hours)"), nl=False)
        return
    fmt = _resolve_format(fmt, out_path)
    tau_seconds = _parse_flag(parse_duration, tau, "--tau")
    events, _ = _load_events(logs, days, skip_unreadable)
    records = stats.segment_lifetimes(events, gap_threshold=tau_seconds)
    rows = [{
        "path": record.path,
        "t_start": record.t_start,
        "t_end": record.t_end,
        "duration_hours": record.duration_hours,
        "opens": record.opens,
        "incomplete": record.incomplete,
    } for record in records]
    summary = dict(stats.lifetime_summary(records))
    summary["close_anomalies"] = stats.close_anomalies(events)
    hours = [record.duration_hours for record in records]
    hist = stats.build_histogram(hours, stats.LIFETIME_EDGES_HOURS)
    meta = _meta("analyze lifetimes", fmt, days=days, tau_seconds=tau_seconds)
    _emit(rows, _LIFETIME_COLUMNS, fmt=fmt, out=out_path, meta=meta, rows_key="records",
          extra={"summary": summary,
                 "histogram": {"edges": hist.edges, "counts": hist.counts}})
    _maybe_plot(plot_path, lambda: _bar(hist, xlabel="lifetime length (hours)",
                                        title="File lifetime distribution"))


_TRANSFER_COLUMNS = (
    Column("transfers", "int", "transfer (cache-miss fetch) events"),
    Column("bytes_total", "int", "total bytes moved into the cache"),
    Column("mean_size", "real", "bytes_total / transfers"),
    Column("days_observed", "int", "distinct calendar days with at least one transfer"),
)


@analyze.command("transfers")
@_logs_options
@_io_options
def cmd_transfers(logs, days, skip_unreadable, out_path, fmt, schema):
    """Transfer accounting: how much data entered the cache."""
    if schema:
        click.echo(_schema_dump("analyze transfers", _TRANSFER_COLUMNS,
                                notes="json adds data.per_day rows of (day, bytes)"), nl=False)
        return
    fmt = _resolve_format(fmt, out_path)
    events, _ = _load_events(logs, days, skip_unreadable)
    totals = stats.transfer_totals(events)
    row = {
        "transfers": totals.count,
        "bytes_total": totals.bytes_total,
        "mean_size": totals.mean_size,
        "days_observed": len(totals.per_day),
    }
    per_day = [
        {"day": dt.datetime.fromtimestamp(day, tz=dt.timezone.utc).date().isoformat(),
         "bytes": total}
        for day, total in sorted(totals.per_day.items())
    ]
    meta = _meta("analyze transfers", fmt, days=days)
    _emit([row], _TRANSFER_COLUMNS, fmt=fmt, out=out_path, meta=meta, rows_key="summary",
          extra={"per_day": per_day})


_SWEEP_COLUMNS = (
    Column("threshold_seconds", "int", "gap threshold tested"),
    Column("threshold_days", "real", "the same threshold in days"),
    Column("lifetime_count", "int", "lifetimes produced at this threshold"),
    Column("mean_hours", "real", "mean lifetime length at this threshold"),
    Column("median_hours", "real", "median lifetime length at this threshold"),
)


@analyze.command("sweep-tau")
@_logs_options
@_io_options
@_plot_option
@click.option("--taus", default="1d:10d:1d", show_default=True, metavar="RANGE",
              help="Thresholds to test: start:end:step range or comma list of durations.")
def cmd_sweep_tau(logs, days, skip_unreadable, out_path, fmt, schema, plot_path, taus):
    """Lifetime statistics across a range of gap thresholds."""
    if schema:
        click.echo(_schema_dump("analyze sweep-tau", _SWEEP_COLUMNS,
                                notes="json adds data.grand_mean_hours (mean of means)"),
                   nl=False)
        return
    fmt = _resolve_format(fmt, out_path)
    thresholds = _parse_flag(_parse_durations, taus, "--taus")
    events, _ = _load_events(logs, days, skip_unreadable)
    result = stats.threshold_sweep(events, thresholds)
    rows = [{
        "threshold_seconds": point.threshold_seconds,
        "threshold_days": point.threshold_seconds / SECONDS_PER_DAY,
        "lifetime_count": point.lifetime_count,
        "mean_hours": point.mean_duration_hours,
        "median_hours": point.median_duration_hours,
    } for point in result.points]
    meta = _meta("analyze sweep-tau", fmt, days=days, taus=taus)
    _emit(rows, _SWEEP_COLUMNS, fmt=fmt, out=out_path, meta=meta, rows_key="points",
          extra={"grand_mean_hours": result.grand_mean_hours})

    def build():
        from . import figures

        return figures.line_figure(
            [row["threshold_days"] for row in rows],
            [row["lifetime_count"] for row in rows],
            xlabel="gap threshold (days)", ylabel="lifetime count",
            title="Lifetime count vs gap threshold")

    _maybe_plot(plot_path, build)


# -- fit-powerlaw ------------------------------------------------------------


_FIT_COLUMNS = (
    Column("a", "real", "power-law coefficient in a*x^b + eps"),
    Column("b", "real", "power-law exponent"),
    Column("eps", "real", "additive offset"),
    Column("rmse", "real", "root-mean-square residual of the fit"),
    Column("converged", "bool", "false when the iteration budget was exhausted"),
    Column("points_used", "int", "points entering the fit"),
    Column("zero_crossing_hours", "real", "x where the fitted curve crosses zero (blank if never)"),
)


@cli.command("fit-powerlaw")
@_logs_options
@_io_options
@_plot_option
@click.option("--tau", default="1.2d", show_default=True, metavar="DURATION",
              help="Gap threshold for lifetime segmentation.")
@click.option("--bin-hours", type=float, default=1.0, show_default=True,
              help="Histogram bin width in hours.")
@click.option("--max-hours", type=float, default=240.0, show_default=True,
              help="Histogram upper edge in hours.")
@click.option("--points", "points_path", type=click.Path(dir_okay=False, path_type=Path),
              default=None, help="Fit a CSV of x,y points instead of log lifetimes.")
def cmd_fit_powerlaw(logs, days, skip_unreadable, out_path, fmt, schema, plot_path,
                     tau, bin_hours, max_hours, points_path):
    """Fit a*x^b + eps to the lifetime histogram (or an explicit point set)."""
    if schema:
        click.echo(_schema_dump("fit-powerlaw", _FIT_COLUMNS,
                                notes="json adds data.histogram when fitting log lifetimes"),
                   nl=False)
        return
    fmt = _resolve_format(fmt, out_path)
    hist = None
    if points_path is not None:
        if logs:
            raise click.UsageError("--points and --logs are mutually exclusive")
        xs, ys = _read_points(points_path)
        meta = _meta("fit-powerlaw", fmt, source="points")
    else:
        tau_seconds = _parse_flag(parse_duration, tau, "--tau")
        if bin_hours <= 0 or max_hours <= bin_hours:
            raise click.UsageError("--bin-hours must be positive and below --max-hours")
        events, _ = _load_events(logs, days, skip_unreadable)
        records = stats.segment_lifetimes(events, gap_threshold=tau_seconds)
        hours = [record.duration_hours for record in records]
        edges = stats.uniform_edges(0.0, max_hours, bin_hours)
        hist = stats.build_histogram(hours, edges)
        xs = [center for center in hist.centers if center > 0]
        ys = [count for center, count in zip(hist.centers, hist.counts) if center > 0]
        meta = _meta("fit-powerlaw", fmt, source="lifetimes", days=days,
                     tau_seconds=tau_seconds, bin_hours=bin_hours, max_hours=max_hours)
    try:
        fit = stats.fit_power_law(xs, ys)
    except ValueError as exc:
        raise DataError(f"cannot fit power law: {exc}") from exc
    row = {
        "a": fit.a, "b": fit.b, "eps": fit.eps, "rmse": fit.rmse,
        "converged": fit.converged, "points_used": len(xs),
        "zero_crossing_hours": fit.positive_root(),
    }
    extra = {}
    if hist is not None:
        extra["histogram"] = {"edges": hist.edges, "counts": hist.counts}
    _emit([row], _FIT_COLUMNS, fmt=fmt, out=out_path, meta=meta, rows_key="fit",
          extra=extra or None)
    if hist is not None:
        _maybe_plot(plot_path, lambda: _bar(
            hist, xlabel="lifetime length (hours)", title="Lifetime histogram with power-law fit",
            fit_curve=[max(float(v), 0.0) for v in fit.predict(hist.centers)]))


def _read_points(points_path: Path) -> tuple[list[float], list[float]]:
    try:
        with open(points_path, newline="", encoding="utf-8") as handle:
            reader = csv.DictReader(handle)
            if reader.fieldnames is None or not {"x", "y"} <= set(reader.fieldnames):
                raise DataError(f"{points_path}: need a CSV with x and y columns")
            xs, ys = [], []
            for record in reader:
                try:
                    xs.append(float(record["x"]))
                    ys.append(float(record["y"]))
                except (TypeError, ValueError) as exc:
                    raise DataError(f"{points_path}: non-numeric point row {record}") from exc
    except OSError as exc:
        raise DataError(f"cannot read points file: {exc}") from exc
    return xs, ys


# -- simulate ----------------------------------------------------------------


@cli.group("simulate")
def simulate() -> None:
    """Cache simulation modes."""


_HIT_RATE_COLUMNS = (
    Column("capacity_bytes", "int", "simulated cache capacity"),
    Column("hit_rate", "real", "hits / total reads (blank when the trace has no reads)"),
)


@simulate.command("hit-rate")
@_logs_options
@_io_options
@_plot_option
@click.option("--capacities", default=None, metavar="RANGE",
              help="Capacities: start:end:step range (e.g. 40TB:60TB:2TB) or comma list.")
def cmd_hit_rate(logs, days, skip_unreadable, out_path, fmt, schema, plot_path, capacities):
    """LRU hit rate across cache capacities."""
    if schema:
        click.echo(_schema_dump("simulate hit-rate", _HIT_RATE_COLUMNS,
                                notes="json adds data.details with full per-capacity counters"),
                   nl=False)
        return
    if not capacities:
        raise click.UsageError("--capacities is required")
    fmt = _resolve_format(fmt, out_path)
    capacity_list = _parse_flag(_parse_capacities, capacities, "--capacities")
    events, _ = _load_events(logs, days, skip_unreadable)
    results = cache.hit_rate_sweep(events, capacity_list)
    rows = [{"capacity_bytes": r.capacity, "hit_rate": r.hit_rate} for r in results]
    details = [{
        "capacity_bytes": r.capacity, "hits": r.hits, "misses": r.misses,
        "total_reads": r.total_reads, "inserts": r.inserts, "bypasses": r.bypasses,
        "eviction_events": r.eviction_events, "bytes_inserted": r.bytes_inserted,
        "bytes_evicted": r.bytes_evicted, "final_occupied": r.final_occupied,
        "final_resident": r.final_resident, "hit_rate": r.hit_rate,
    } for r in results]
    meta = _meta("simulate hit-rate", fmt, days=days, capacities=capacities)
    _emit(rows, _HIT_RATE_COLUMNS, fmt=fmt, out=out_path, meta=meta, rows_key="curve",
          extra={"details": details})

    def build():
        from . import figures

        scale, unit = _byte_axis(max(capacity_list))
        return figures.line_figure(
            [r.capacity / scale for r in results],
            [r.hit_rate if r.hit_rate is not None else 0.0 for r in results],
            xlabel=f"cache capacity ({unit})", ylabel="hit rate",
            title="LRU hit rate vs capacity", ylim=(0.0, 1.0))

    _maybe_plot(plot_path, build)


def _byte_axis(top: int) -> tuple[float, str]:
    for scale, unit in ((1e15, "PB"), (1e12, "TB"), (1e9, "GB"), (1e6, "MB")):
        if top >= scale:
            return scale, unit
    return 1.0, "B"


_CONTENT_COLUMNS = (
    Column("step", "int", "model step (one step is one day)"),
    Column("val_bytes", "real", "bytes added this step (may be negative)"),
    Column("cache_bytes", "real", "cache population after this step (clamped to capacity)"),
    Column("evicted_bytes", "real", "cumulative bytes pushed past capacity"),
    Column("hit_ratio", "real", "h used for this step's increment"),
)


@simulate.command("content-model")
@_io_options
@_plot_option
@click.option("--steps", type=int, default=60, show_default=True)
@click.option("--capacity", default="40TB", show_default=True, metavar="SIZE",
              help="Capacity clamp; 'none' disables clamping.")
@click.option("--seed", type=int, default=cache.DEFAULT_CONTENT_SEED, show_default=True,
              help="Seed for scalar draws (and the default scalar pools).")
@click.option("--access-rate", type=int, default=7000, show_default=True)
@click.option("--file-size", default="200MB", show_default=True, metavar="SIZE")
@click.option("--h0", default="0.1", show_default=True, help="Initial hit ratio.")
@click.option("--h-cap", default="0.6", show_default=True, help="Hit-ratio ceiling.")
@click.option("--delta", default=None, metavar="REAL",
              help="Per-step hit-ratio increment; default (h_cap - h0)/30.")
@click.option("--rate-params", default=None, metavar="LIST",
              help="Comma list of rate scalars in [-2, 2]; default calibrated pool.")
@click.option("--size-params", default=None, metavar="LIST",
              help="Comma list of size scalars in [-2, 2]; default calibrated pool.")
@click.option("--clamp-negative", is_flag=True, help="Clamp negative step increments to 0.")
def cmd_content_model(out_path, fmt, schema, plot_path, steps, capacity, seed, access_rate,
                      file_size, h0, h_cap, delta, rate_params, size_params, clamp_negative):
    """Stochastic cache-growth model (one step per day), no trace needed."""
    if schema:
        click.echo(_schema_dump("simulate content-model", _CONTENT_COLUMNS,
                                notes="json adds data.fill_step and data.capacity_bytes"),
                   nl=False)
        return
    fmt = _resolve_format(fmt, out_path)
    cap = None if capacity.strip().lower() in {"none", "unbounded"} else \
        _parse_flag(parse_size, capacity, "--capacity")
    params = cache.default_params(capacity=cap, steps=steps, seed=seed)
    overrides: dict = {"access_rate": access_rate, "clamp_negative_val": clamp_negative}
    overrides["file_size"] = _parse_flag(parse_size, file_size, "--file-size")
    try:
        overrides["h0"] = cache.as_fraction(h0)
        overrides["h_cap"] = cache.as_fraction(h_cap)
        if delta is not None:
            overrides["delta"] = cache.as_fraction(delta)
        if rate_params is not None:
            overrides["rate_params"] = tuple(
                cache.as_fraction(tok.strip()) for tok in rate_params.split(",") if tok.strip())
        if size_params is not None:
            overrides["size_params"] = tuple(
                cache.as_fraction(tok.strip()) for tok in size_params.split(",") if tok.strip())
    except (ValueError, ArithmeticError) as exc:
        raise click.UsageError(f"bad scalar value: {exc}") from exc
    params = replace(params, **overrides)
    try:
        series = cache.content_model(params)
    except ValueError as exc:
        raise click.UsageError(str(exc)) from exc
    fill = cache.fill_step(params) if cap is not None else None
    rows = [{
        "step": record.step,
        "val_bytes": record.val,
        "cache_bytes": record.cache_bytes,
        "evicted_bytes": record.evicted_bytes,
        "hit_ratio": record.h,
    } for record in series]
    meta = _meta("simulate content-model", fmt, seed=seed, steps=steps,
                 capacity_bytes=cap, access_rate=access_rate,
                 file_size=overrides["file_size"], h0=str(h0), h_cap=str(h_cap),
                 delta=None if delta is None else str(delta),
                 clamp_negative=clamp_negative)
    _emit(rows, _CONTENT_COLUMNS, fmt=fmt, out=out_path, meta=meta, rows_key="steps",
          extra={"fill_step": fill, "capacity_bytes": cap})

    def build():
        from . import figures

        scale, unit = _byte_axis(int(max(r.cache_bytes for r in series)) or 1)
        return figures.line_figure(
            [r.step for r in series],
            [float(r.cache_bytes) / scale for r in series],
            xlabel="step (days)", ylabel=f"cache population ({unit})",
            title="Content-model cache growth",
            hline=None if cap is None else cap / scale,
            hline_label=None if cap is None else "capacity")

    _maybe_plot(plot_path, build)


_FILL_COLUMNS = (
    Column("capacity_bytes", "int", "cache capacity"),
    Column("fill_seconds", "int", "seconds from first event to the filling transfer (blank if never)"),
    Column("fill_days", "real", "fill_seconds in days (blank if never)"),
)


@simulate.command("fill-time")
@_logs_options
@_io_options
@_plot_option
@click.option("--capacities", default=None, metavar="RANGE",
              help="Capacities: start:end:step range or comma list.")
def cmd_fill_time(logs, days, skip_unreadable, out_path, fmt, schema, plot_path, capacities):
    """How long the traced transfers take to fill each capacity."""
    if schema:
        click.echo(_schema_dump("simulate fill-time", _FILL_COLUMNS), nl=False)
        return
    if not capacities:
        raise click.UsageError("--capacities is required")
    fmt = _resolve_format(fmt, out_path)
    capacity_list = _parse_flag(_parse_capacities, capacities, "--capacities")
    events, _ = _load_events(logs, days, skip_unreadable)
    results = cache.fill_time(events, capacity_list)
    rows = [{
        "capacity_bytes": cap,
        "fill_seconds": seconds,
        "fill_days": None if seconds is None else seconds / SECONDS_PER_DAY,
    } for cap, seconds in results]
    meta = _meta("simulate fill-time", fmt, days=days, capacities=capacities)
    _emit(rows, _FILL_COLUMNS, fmt=fmt, out=out_path, meta=meta, rows_key="fill")

    def build():
        from . import figures

        filled = [(cap, seconds) for cap, seconds in results if seconds is not None]
        scale, unit = _byte_axis(max(cap for cap, _ in filled)) if filled else (1.0, "B")
        return figures.line_figure(
            [cap / scale for cap, _ in filled],
            [seconds / SECONDS_PER_DAY for _, seconds in filled],
            xlabel=f"cache capacity ({unit})", ylabel="days to fill",
            title="Fill time vs capacity")

    _maybe_plot(plot_path, build)


# -- oracle (hidden, test parity) ---------------------------------------------


_ORACLE_COLUMNS = (
    Column("capacity_bytes", "int", "cache capacity"),
    Column("hits", "int", "read operations served from cache"),
    Column("misses", "int", "read operations not in cache"),
    Column("total_reads", "int", "hits + misses"),
    Column("hit_rate", "real", "hits / total_reads (blank when no reads)"),
    Column("inserts", "int", "transfer events inserted"),
    Column("bypasses", "int", "oversize transfers that bypassed the cache"),
    Column("eviction_events", "int", "files evicted for capacity"),
    Column("bytes_inserted", "int", "bytes entering the cache"),
    Column("bytes_evicted", "int", "bytes leaving the cache"),
    Column("final_occupied", "int", "bytes resident at end of trace"),
    Column("final_resident", "int", "files resident at end of trace"),
)


@cli.group("oracle", hidden=True)
def oracle() -> None:
    """Naive reference implementations, kept for test parity."""


@oracle.command("lru")
@_logs_options
@_io_options
@click.option("--capacity", default=None, metavar="SIZE", help="Cache capacity.")
def cmd_oracle_lru(logs, days, skip_unreadable, out_path, fmt, schema, capacity):
    """Replay the trace through the brute-force LRU reference."""
    if schema:
        click.echo(_schema_dump("oracle lru", _ORACLE_COLUMNS), nl=False)
        return
    if not capacity:
        raise click.UsageError("--capacity is required")
    fmt = _resolve_format(fmt, out_path)
    capacity_bytes = _parse_flag(parse_size, capacity, "--capacity")
    events, _ = _load_events(logs, days, skip_unreadable)
    result = cache.oracle_lru(events, capacity_bytes)
    row = {
        "capacity_bytes": result.capacity, "hits": result.hits, "misses": result.misses,
        "total_reads": result.total_reads, "hit_rate": result.hit_rate,
        "inserts": result.inserts, "bypasses": result.bypasses,
        "eviction_events": result.eviction_events, "bytes_inserted": result.bytes_inserted,
        "bytes_evicted": result.bytes_evicted, "final_occupied": result.final_occupied,
        "final_resident": result.final_resident,
    }
    meta = _meta("oracle lru", fmt, days=days, capacity_bytes=capacity_bytes)
    _emit([row], _ORACLE_COLUMNS, fmt=fmt, out=out_path, meta=meta, rows_key="result")


# ---------------------------------------------------------------------------
# entry point


def main(argv: Sequence[str] | None = None) -> int:
    """Run the CLI; returns 0 on success, 1 on usage errors, 2 on data errors."""
    _configure_logging()
    try:
        cli.main(args=list(argv) if argv is not None else None,
                 prog_name="xctrace", standalone_mode=False)
    except click.exceptions.Exit as exc:
        return int(exc.exit_code)
    except click.UsageError as exc:
        exc.show()
        return 1
    except click.Abort:
        click.echo("aborted", err=True)
        return 1
    except click.ClickException as exc:
        exc.show()
        return 1
    except DataError as exc:
        click.echo(f"data error: {exc}", err=True)
        return 2
    except OSError as exc:
        click.echo(f"io error: {exc}", err=True)
        return 2
    return 0


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
