"""Run configuration, persistence, and plot emission.

Config files are line-oriented `key = value` with `#` comments; unknown keys
are rejected so configs cannot drift silently.  Emitted artifacts (CSV,
manifest, SVG) are deterministic: identical runs produce byte-identical
files.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, fields, replace
from pathlib import Path

from .diagnostics import pinch_diagnostics
from .flow import CSV_COLUMNS, RunRecord, RunRow
from .pinching import PinchingProfile

VERSION_STRING = "pinchflow-v0.1.0-desk"


@dataclass(frozen=True)
class RunConfig:
    """Every CLI-settable flow parameter, with defaults."""

    preset: str = "cap"
    n: int = 6
    c: float = 1.0
    param: float = math.pi / 3
    eps: float = 0.01
    sigma: float = 1e-5
    nodes: int = 128
    dt_safety: float = 1.0
    max_steps: int = 500_000
    record_every: int = 25
    amplitude: float = 0.05
    mode: int = 2
    seed: int = 0
    out_csv: str = "run.csv"
    out_manifest: str = ""
    out_svg: str = ""

    def pinching_profile(self) -> PinchingProfile:
        return PinchingProfile(self.n, self.c, self.eps, self.sigma)


_FIELD_TYPES = {f.name: f.type for f in fields(RunConfig)}


def _parse_value(name: str, text: str):
    kind = _FIELD_TYPES[name]
    if kind == "int":
        return int(text)
    if kind == "float":
        return float(text)
    return text


def parse_config(text: str, base: RunConfig | None = None) -> RunConfig:
    """Parse `key = value` lines into a RunConfig; unknown keys are errors."""
    cfg = base or RunConfig()
    overrides = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"config line {lineno}: expected 'key = value', got {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in _FIELD_TYPES:
            raise ValueError(f"config line {lineno}: unknown key {key!r}")
        overrides[key] = _parse_value(key, value)
    return replace(cfg, **overrides)


def format_config(cfg: RunConfig) -> str:
    """Render a RunConfig as a config file; parse_config round-trips it.

    Strings are written bare; numbers use repr for lossless round-trips.
    """
    out = []
    for name in _FIELD_TYPES:
        value = getattr(cfg, name)
        out.append(f"{name} = {value}" if isinstance(value, str) else f"{name} = {value!r}")
    return "\n".join(out) + "\n"


def load_config(path) -> RunConfig:
    return parse_config(Path(path).read_text(encoding="utf-8"))


def write_run_csv(run: RunRecord, path) -> None:
    """The pinned ten-column schema; floats via repr for exact round-trips."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for row in run.rows:
        writer.writerow([repr(getattr(row, col)) for col in CSV_COLUMNS])
    Path(path).write_text(buf.getvalue(), encoding="utf-8")


def read_run_csv(path) -> RunRecord:
    text = Path(path).read_text(encoding="utf-8")
    reader = csv.reader(io.StringIO(text))
    header = next(reader)
    if tuple(header) != CSV_COLUMNS:
        raise ValueError(f"unexpected CSV header {header}")
    rows = [RunRow(**{col: float(val) for col, val in zip(CSV_COLUMNS, line)}) for line in reader]
    return RunRecord(config={}, rows=rows, termination="")


def write_manifest(run: RunRecord, path) -> None:
    """key = value manifest, keys sorted, UTF-8 with LF line endings."""
    entries = {f"config.{k}": v for k, v in run.config.items()}
    entries["termination"] = run.termination
    entries["rows"] = len(run.rows)
    entries["version"] = VERSION_STRING
    lines = [f"{key} = {entries[key]}" for key in sorted(entries)]
    Path(path).write_bytes(("\n".join(lines) + "\n").encode("utf-8"))


def read_manifest(path) -> dict:
    out = {}
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        if not line.strip():
            continue
        key, value = (part.strip() for part in line.split("=", 1))
        out[key] = value
    return out


def _svg_polyline(points, color):
    coords = " ".join(f"{x:.2f},{y:.2f}" for x, y in points)
    return f'<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{coords}"/>'


def plot_run_svg(run: RunRecord, path, width: int = 720, height: int = 440) -> None:
    """Static SVG line plot of maxU and maxFsigma against t (no renderer)."""
    rows = run.rows
    left, right, top, bottom = 70, 20, 30, 50
    pw, ph = width - left - right, height - top - bottom
    ts = [r.t for r in rows] or [0.0]
    series = [("maxU", "#1f77b4", [r.maxU for r in rows]),
              ("maxFsigma", "#d62728", [r.maxFsigma for r in rows])]
    t_lo, t_hi = min(ts), max(ts)
    ys = [v for _, _, vals in series for v in vals] or [0.0]
    y_lo, y_hi = min(ys + [0.0]), max(ys + [0.0])
    if t_hi == t_lo:
        t_hi = t_lo + 1.0
    if y_hi == y_lo:
        y_hi = y_lo + 1.0

    def px(t):
        return left + (t - t_lo) / (t_hi - t_lo) * pw

    def py(v):
        return top + (y_hi - v) / (y_hi - y_lo) * ph

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        '<rect width="100%" height="100%" fill="#ffffff"/>',
        f'<line x1="{left}" y1="{top + ph}" x2="{left + pw}" y2="{top + ph}" stroke="#000" stroke-width="1"/>',
        f'<line x1="{left}" y1="{top}" x2="{left}" y2="{top + ph}" stroke="#000" stroke-width="1"/>',
    ]
    for k in range(5):
        v = y_lo + (y_hi - y_lo) * k / 4
        parts.append(
            f'<text x="{left - 6}" y="{py(v) + 4:.2f}" text-anchor="end" '
            f'font-size="11" font-family="monospace">{v:.3g}</text>'
        )
        t = t_lo + (t_hi - t_lo) * k / 4
        parts.append(
            f'<text x="{px(t):.2f}" y="{top + ph + 16}" text-anchor="middle" '
            f'font-size="11" font-family="monospace">{t:.3g}</text>'
        )
    if rows:
        for name, color, vals in series:
            parts.append(_svg_polyline([(px(t), py(v)) for t, v in zip(ts, vals)], color))
    for i, (name, color, _) in enumerate(series):
        y = top + 14 * (i + 1)
        parts.append(f'<rect x="{left + pw - 105}" y="{y - 9}" width="10" height="10" fill="{color}"/>')
        parts.append(
            f'<text x="{left + pw - 90}" y="{y}" font-size="11" font-family="monospace">{name}</text>'
        )
    parts.append(
        f'<text x="{left + pw / 2:.2f}" y="{height - 12}" text-anchor="middle" '
        f'font-size="12" font-family="monospace">t</text>'
    )
    parts.append("</svg>")
    Path(path).write_bytes(("\n".join(parts) + "\n").encode("utf-8"))


def emit_outputs(run: RunRecord, csv_path, manifest_path=None, svg_path=None) -> list:
    """Write CSV (always), manifest, and SVG plot; returns written paths."""
    written = []
    try:
        write_run_csv(run, csv_path)
        written.append(str(csv_path))
        if manifest_path:
            write_manifest(run, manifest_path)
            written.append(str(manifest_path))
        if svg_path:
            plot_run_svg(run, svg_path)
            written.append(str(svg_path))
    except OSError as exc:
        raise OSError(f"failed writing run outputs near {exc.filename}: {exc}") from exc
    return written


def recompute_diagnostics(run: RunRecord, profile: PinchingProfile) -> dict:
    """Recompute diagnostic columns from each row's (t, maxH2, maxhring2).

    On homogeneous runs (all nodes identical) this reproduces the stored
    maxU / maxFsigma / ricciMin columns exactly; on inhomogeneous runs the
    reported discrepancy measures the spread hidden by the row aggregates.
    """
    max_dev = {"maxU": 0.0, "maxFsigma": 0.0, "ricciMin": 0.0}
    for row in run.rows:
        d = pinch_diagnostics(row.t, row.maxH2, row.maxhring2, profile)
        max_dev["maxU"] = max(max_dev["maxU"], abs(d.U - row.maxU))
        max_dev["maxFsigma"] = max(max_dev["maxFsigma"], abs(d.fSigma - row.maxFsigma))
        max_dev["ricciMin"] = max(max_dev["ricciMin"], abs(d.ricciLower - row.ricciMin))
    return max_dev
