"""Tables, CSV and JSON renderings of result records, written atomically."""

from __future__ import annotations

import csv
import io
import os
import tempfile
from pathlib import Path
from typing import TYPE_CHECKING, Any

import msgspec
from rich.console import Console
from rich.table import Table

if TYPE_CHECKING:
    from collections.abc import Mapping, Sequence

    from ncycle_entropic.core.decomposition import Decomposition
    from ncycle_entropic.core.types import OutputFormat


def to_records(items: Sequence[Any]) -> list[dict[str, Any]]:
    """Plain dicts from dataclasses or msgspec structs, key order preserved."""
    return [msgspec.to_builtins(item) for item in items]


def format_cell(value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, list | tuple):
        return " ".join(format_cell(v) for v in value)
    return str(value)


def render_csv(records: Sequence[dict[str, Any]]) -> str:
    if not records:
        return ""
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    header = list(records[0])
    writer.writerow(header)
    for record in records:
        writer.writerow([format_cell(record.get(key)) for key in header])
    return buffer.getvalue()


def render_json(records: Sequence[dict[str, Any]]) -> str:
    return msgspec.json.format(msgspec.json.encode(list(records)), indent=2).decode() + "\n"


def render_table(records: Sequence[dict[str, Any]], title: str | None = None) -> Table:
    table = Table(title=title, show_lines=False)
    if not records:
        return table
    for key in records[0]:
        table.add_column(key)
    for record in records:
        table.add_row(*(format_cell(v) for v in record.values()))
    return table


def render_text(records: Sequence[dict[str, Any]], fmt: OutputFormat, title: str | None = None) -> str:
    """The exact text `emit` would print or write."""
    match fmt:
        case "csv":
            return render_csv(records)
        case "json":
            return render_json(records)
        case "table":
            console = Console(file=io.StringIO(), width=160, color_system=None, record=True)
            console.print(render_table(records, title))
            return console.export_text()


def atomic_write(path: Path, text: str) -> None:
    """Write through a sibling temporary file and rename over the target."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp_name = tempfile.mkstemp(prefix=f".{path.name}.", dir=path.parent)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as handle:
            handle.write(text)
        Path(tmp_name).replace(path)
    except BaseException:
        Path(tmp_name).unlink(missing_ok=True)
        raise


def emit(
    items: Sequence[Any],
    fmt: OutputFormat,
    *,
    out: Path | None = None,
    title: str | None = None,
    console: Console | None = None,
) -> None:
    records = to_records(items)
    if out is not None:
        atomic_write(out, render_text(records, fmt, title))
        return
    console = Console() if console is None else console
    if fmt == "table":
        console.print(render_table(records, title))
    else:
        console.out(render_text(records, fmt), end="", highlight=False)


def render_sections(
    sections: Mapping[str, Sequence[dict[str, Any]]],
    fmt: OutputFormat,
    title: str | None = None,
) -> str:
    """
    Several record sets in one document: CSV blocks separated by a blank
    line, a JSON object keyed by section, or one table per section.
    """
    match fmt:
        case "csv":
            return "\n".join(block for block in (render_csv(records) for records in sections.values()) if block)
        case "json":
            return msgspec.json.format(msgspec.json.encode(dict(sections)), indent=2).decode() + "\n"
        case "table":
            console = Console(file=io.StringIO(), width=160, color_system=None, record=True)
            for name, records in sections.items():
                console.print(render_table(records, _section_title(title, name)))
            return console.export_text()


def _section_title(title: str | None, name: str) -> str:
    return name if title is None else f"{title}: {name}"


def emit_sections(
    sections: Mapping[str, Sequence[Any]],
    fmt: OutputFormat,
    *,
    out: Path | None = None,
    title: str | None = None,
    console: Console | None = None,
) -> None:
    records = {name: to_records(items) for name, items in sections.items()}
    if out is not None:
        atomic_write(out, render_sections(records, fmt, title))
        return
    console = Console() if console is None else console
    if fmt == "table":
        for name, section in records.items():
            console.print(render_table(section, _section_title(title, name)))
    else:
        console.out(render_sections(records, fmt), end="", highlight=False)


def decomposition_rows(decomposition: Decomposition) -> list[dict[str, Any]]:
    """(label, weight) rows of a certificate, heaviest first."""
    rows = sorted(decomposition.rows(), key=lambda r: -r[1])
    return [{"label": label, "weight": weight} for label, weight in rows]
