"""Raw digital ink: parsing, validation, and arc-length parameterization.

Symbols arrive as multi-stroke point sequences in the JSON interchange format
described in the README. The canonical in-memory orientation is y increasing
upward; documents captured in screen coordinates set ``"y_down": true`` and are
flipped on ingestion.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateTraceError, ParseError, ValidationError

Point = tuple[float, float]


@dataclass(frozen=True)
class InkSymbol:
    """One handwritten symbol: ordered strokes of (x, y) points in device units."""

    strokes: tuple[tuple[Point, ...], ...]
    class_label: str | None = None
    source_id: str | None = None

    def __post_init__(self):
        if not self.strokes:
            raise ValidationError("symbol has no strokes")
        for i, stroke in enumerate(self.strokes):
            if len(stroke) < 2:
                raise ValidationError(f"stroke {i} has {len(stroke)} points, need at least 2")
            for x, y in stroke:
                if not (math.isfinite(x) and math.isfinite(y)):
                    raise ValidationError(f"stroke {i} contains a non-finite coordinate")

    @property
    def point_count(self) -> int:
        return sum(len(s) for s in self.strokes)


@dataclass(frozen=True)
class ParameterizedTrace:
    """A single curve reparameterized by normalized cumulative arc length.

    ``s`` runs from 0 to 1; ``xy`` holds the matching points with exact
    consecutive duplicates collapsed. ``total_length`` is the polyline length in
    the original device units.
    """

    s: np.ndarray
    xy: np.ndarray
    total_length: float

    def __post_init__(self):
        if self.s.shape[0] != self.xy.shape[0]:
            raise ValidationError("s and xy lengths differ")

    @property
    def points(self) -> np.ndarray:
        """(n, 3) array of (s, x, y) rows."""
        return np.column_stack([self.s, self.xy])


def _as_symbol(obj, index: int, default_y_down: bool = False) -> InkSymbol:
    where = f"symbols[{index}]"
    if not isinstance(obj, dict):
        raise ParseError(f"{where}: expected an object")
    label = obj.get("label")
    if label is not None and not isinstance(label, str):
        raise ParseError(f"{where}.label: expected string or null")
    y_down = obj.get("y_down", default_y_down)
    if not isinstance(y_down, bool):
        raise ParseError(f"{where}.y_down: expected boolean")
    raw_strokes = obj.get("strokes")
    if not isinstance(raw_strokes, list) or not raw_strokes:
        raise ParseError(f"{where}.strokes: expected a non-empty array")
    strokes = []
    for si, raw in enumerate(raw_strokes):
        if not isinstance(raw, list):
            raise ParseError(f"{where}.strokes[{si}]: expected an array of points")
        stroke = []
        for pi, pt in enumerate(raw):
            if (not isinstance(pt, list) or len(pt) != 2
                    or not all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in pt)):
                raise ParseError(f"{where}.strokes[{si}][{pi}]: expected [x, y]")
            x, y = float(pt[0]), float(pt[1])
            if not (math.isfinite(x) and math.isfinite(y)):
                raise ParseError(f"{where}.strokes[{si}][{pi}]: non-finite coordinate")
            stroke.append((x, -y if y_down else y))
        if len(stroke) < 2:
            raise ValidationError(f"{where}.strokes[{si}]: stroke has {len(stroke)} points, need at least 2")
        strokes.append(tuple(stroke))
    try:
        return InkSymbol(strokes=tuple(strokes), class_label=label)
    except ValidationError as exc:
        raise ValidationError(f"{where}: {exc}") from exc


def parse_ink(document: str, default_y_down: bool = False) -> list[InkSymbol]:
    """Parse an ink interchange document into validated symbols.

    ``default_y_down`` applies to symbols that do not set their own "y_down"
    flag (screen-coordinate captures). Raises ParseError with line/field
    context on malformed input and ValidationError when a stroke breaks the
    at-least-2-points rule.
    """
    try:
        data = json.loads(document)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc
    if not isinstance(data, dict) or "symbols" not in data:
        raise ParseError("top level: expected an object with a 'symbols' array")
    symbols = data["symbols"]
    if not isinstance(symbols, list):
        raise ParseError("symbols: expected an array")
    return [_as_symbol(obj, i, default_y_down) for i, obj in enumerate(symbols)]


def serialize_ink(symbols: list[InkSymbol]) -> str:
    """Write symbols back out in the interchange format (canonical y-up)."""
    doc = {
        "symbols": [
            {
                "label": sym.class_label,
                "y_down": False,
                "strokes": [[[x, y] for x, y in stroke] for stroke in sym.strokes],
            }
            for sym in symbols
        ]
    }
    return json.dumps(doc, indent=2)


def concatenate_strokes(symbol: InkSymbol) -> np.ndarray:
    """Join consecutive strokes into one (n, 2) point sequence.

    The pen-up jump between strokes becomes an ordinary chord of the joined
    curve, so it contributes to arc length downstream.
    """
    return np.array([pt for stroke in symbol.strokes for pt in stroke], dtype=float)


def parameterize(points) -> ParameterizedTrace:
    """Assign normalized cumulative chord length to a point sequence.

    The input is piecewise linear, so cumulative chord length is its exact arc
    length; no resampling is applied. Exact consecutive duplicates are collapsed
    first. Raises DegenerateTraceError when every point coincides.
    """
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 2 or pts.shape[0] < 2:
        raise ValidationError("need an (n, 2) sequence with n >= 2")
    keep = np.ones(len(pts), dtype=bool)
    keep[1:] = np.any(pts[1:] != pts[:-1], axis=1)
    pts = pts[keep]
    if len(pts) < 2:
        raise DegenerateTraceError("all points coincide; trace has zero length")
    seg = np.hypot(*np.diff(pts, axis=0).T)
    total = float(seg.sum())
    s = np.empty(len(pts))
    s[0] = 0.0
    np.cumsum(seg / total, out=s[1:])
    s[-1] = 1.0
    return ParameterizedTrace(s=s, xy=pts, total_length=total)


def parameterize_symbol(symbol: InkSymbol) -> ParameterizedTrace:
    """Concatenate a symbol's strokes and arc-length parameterize the result."""
    return parameterize(concatenate_strokes(symbol))
