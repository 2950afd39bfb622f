"""Deterministic artifact writers: JSON, CSV and small log-log SVG plots."""

from __future__ import annotations

import csv
import io
import json
import math
import os
import tempfile
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

SCHEMA_VERSION = 1


def atomic_write(path: str | os.PathLike, text: str) -> Path:
    """Write to a temporary file in the target directory, then rename over the target."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path


def to_jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [to_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return x
    return obj


def dump_json(payload: dict) -> str:
    body = {"schema": SCHEMA_VERSION, **payload}
    return json.dumps(to_jsonable(body), sort_keys=True, indent=2) + "\n"


def write_json(path, payload: dict) -> Path:
    return atomic_write(path, dump_json(payload))


def csv_text(header: Sequence[str], rows: Iterable[Sequence]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([repr(float(x)) if isinstance(x, (float, np.floating)) else x for x in r])
    return buf.getvalue()


def write_csv(path, header: Sequence[str], rows: Iterable[Sequence]) -> Path:
    return atomic_write(path, csv_text(header, rows))


def loglog_svg(x, y, title: str = "", target_slope: float | None = None, width: int = 480, height: int = 320) -> str:
    """Polyline of log10(y) against log10(x), with an optional reference slope through the last point."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    m = (x > 0) & (y > 0) & np.isfinite(y)
    lx, ly = np.log10(x[m]), np.log10(y[m])
    pad = 40
    if lx.size < 2:
        return f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}"></svg>\n'
    x0, x1 = lx.min(), lx.max()
    y0, y1 = ly.min(), ly.max()
    if y1 - y0 < 1e-12:
        y0, y1 = y0 - 0.5, y1 + 0.5

    def px(a, b):
        u = pad + (a - x0) / (x1 - x0) * (width - 2 * pad)
        v = height - pad - (b - y0) / (y1 - y0) * (height - 2 * pad)
        return f"{u:.2f},{v:.2f}"

    pts = " ".join(px(a, b) for a, b in zip(lx, ly))
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}">',
        f'<text x="{pad}" y="20" font-size="12">{title}</text>',
        f'<polyline fill="none" stroke="black" points="{pts}"/>',
    ]
    if target_slope is not None:
        yb = ly[-1] + target_slope * (x0 - lx[-1])
        parts.append(
            f'<polyline fill="none" stroke="red" stroke-dasharray="4,3" points="{px(x0, yb)} {px(lx[-1], ly[-1])}"/>'
        )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"
