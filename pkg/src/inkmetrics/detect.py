"""Locating determining points on samples from an annotated reference symbol.

The reference carries annotations (s_i, type, kind); for each one the sample's
y-coordinate polynomial is searched for the matching local extremum nearest
s_i. The primary search is damped Newton on y'(s) = 0 from s_i; wrong-kind
landings, divergence, and flat second derivatives fall back to exhaustive
critical-point enumeration. A multi-step variant follows the points along the
straight homotopy line between the class average and the sample, re-seeding
each step with the previous step's locations.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.polynomial import legendre as npleg

from .errors import ExtremumNotFound, ValidationError
from .space import AnnotatedModel, KINDS, LINE_TYPES, SymbolVector, interpolate

NEWTON_TOL = 1e-10
NEWTON_MAX_ITER = 50
NEWTON_MAX_HALVINGS = 8
ROOT_GRID = 513
_BOUNDARY_MARGIN = 1e-9


@dataclass(frozen=True)
class CriticalPoint:
    """A stationary point of y(s); kind is None only for flat boundary points."""

    s: float
    kind: str | None
    boundary: bool = False


@dataclass(frozen=True)
class SnapResult:
    s: float
    boundary: bool = False
    used_fallback: bool = False


@dataclass(frozen=True)
class LocatedPoint:
    """One detected determining point in page coordinates."""

    s: float
    line_type: str
    kind: str
    x: float
    y: float
    boundary: bool = False
    failed: bool = False


@dataclass(frozen=True)
class MetricLines:
    """Per-symbol metric-line heights (page coordinates, y up) and derived sizes."""

    baseline: float | None = None
    xline: float | None = None
    ascender: float | None = None
    capline: float | None = None
    descender: float | None = None
    slant_deg: float = 0.0
    width: float = 0.0
    x_height: float | None = None
    ascender_height: float | None = None
    cap_height: float | None = None
    descender_depth: float | None = None

    def line(self, line_type: str) -> float | None:
        return getattr(self, line_type)


def _fast_legval(c, x: float) -> float:
    """Scalar Clenshaw over a Python float tuple; mirrors npleg.legval."""
    n = len(c)
    if n == 1:
        return c[0]
    if n == 2:
        return c[0] + c[1] * x
    nd = float(n)
    c0 = c[-2]
    c1 = c[-1]
    for i in range(3, n + 1):
        tmp = c0
        nd -= 1.0
        c0 = c[-i] - c1 * (nd - 1.0) / nd
        c1 = tmp + c1 * x * (2.0 * nd - 1.0) / nd
    return c0 + c1 * x


class _YPoly:
    """y(s) of a series with fast scalar access to y, y', y''."""

    def __init__(self, yleg: np.ndarray):
        self.leg = yleg
        self.dleg = npleg.legder(yleg) * 2.0
        self.d2leg = npleg.legder(self.dleg) * 2.0
        self._t0 = tuple(map(float, yleg))
        self._t1 = tuple(map(float, self.dleg)) or (0.0,)
        self._t2 = tuple(map(float, self.d2leg)) or (0.0,)
        self.dmag = float(np.abs(self.dleg).sum()) if len(self.dleg) else 0.0
        # below this, y'(s) is indistinguishable from zero for this curve
        self.dnoise = 1e-12 * max(1.0, float(np.abs(yleg).sum()))

    def y(self, s: float) -> float:
        return _fast_legval(self._t0, 2.0 * s - 1.0)

    def dy(self, s: float) -> float:
        return _fast_legval(self._t1, 2.0 * s - 1.0)

    def d2y(self, s: float) -> float:
        return _fast_legval(self._t2, 2.0 * s - 1.0)

    @property
    def is_flat(self) -> bool:
        return self.dmag <= self.dnoise


def _classify_interior(poly: _YPoly, r: float) -> str | None:
    """Kind of a stationary point from the sign change of y' around it."""
    eps = 1e-7
    while eps <= 2e-2:
        lo = poly.dy(max(0.0, r - eps))
        hi = poly.dy(min(1.0, r + eps))
        if abs(lo) > poly.dnoise and abs(hi) > poly.dnoise:
            if lo > 0 and hi < 0:
                return "max"
            if lo < 0 and hi > 0:
                return "min"
            return None  # no sign change: saddle
        eps *= 10.0
    return None


def _endpoint_kind(poly: _YPoly, at_start: bool) -> str | None:
    """One-sided extremum kind at s=0 or s=1; None when the curve is flat there."""
    eps = 1e-9
    while eps <= 2e-2:
        d = poly.dy(eps if at_start else 1.0 - eps)
        if abs(d) > poly.dnoise:
            if at_start:
                return "min" if d > 0 else "max"
            return "max" if d > 0 else "min"
        eps *= 10.0
    return None


def _stationary_points(poly: _YPoly) -> list[float]:
    """All roots of y' in (0, 1): sign-change isolation on a grid plus the
    colleague-matrix roots of the derivative, merged and bisection-refined."""
    if poly.is_flat:
        return []
    grid = np.linspace(0.0, 1.0, ROOT_GRID)
    dv = npleg.legval(2.0 * grid - 1.0, poly.dleg)
    roots = []
    for i in np.nonzero(np.signbit(dv[:-1]) != np.signbit(dv[1:]))[0]:
        a, b = grid[i], grid[i + 1]
        fa = dv[i]
        for _ in range(60):
            m = 0.5 * (a + b)
            fm = poly.dy(m)
            if fa * fm <= 0:
                b = m
            else:
                a, fa = m, fm
        roots.append(0.5 * (a + b))
    for z in np.atleast_1d(npleg.legroots(poly.dleg)):
        if abs(complex(z).imag) > 1e-7:
            continue
        x = float(np.real(z))
        if not -1.0 - 1e-9 <= x <= 1.0 + 1e-9:
            continue
        r = min(1.0, max(0.0, 0.5 * (x + 1.0)))
        for _ in range(3):  # polish; harmless on multiple roots
            d2 = poly.d2y(r)
            if abs(d2) < poly.dnoise:
                break
            r = min(1.0, max(0.0, r - poly.dy(r) / d2))
        roots.append(r)
    roots.sort()
    merged = []
    for r in roots:
        if _BOUNDARY_MARGIN < r < 1.0 - _BOUNDARY_MARGIN:
            if not merged or r - merged[-1] > 1e-9:
                merged.append(r)
    return merged


def critical_points(series) -> list[CriticalPoint]:
    """All extrema of y(s) on [0, 1], endpoints included and flagged boundary.

    Interior stationary points are classified by the sign change of y'; roots
    without a sign change (saddles) are dropped. Endpoints are classified by
    one-sided behavior: y' pointing upward into the interval makes that
    endpoint a boundary minimum, and so on. A flat curve yields endpoints only,
    with kind None.
    """
    poly = _YPoly(series._yleg)
    out = [CriticalPoint(0.0, _endpoint_kind(poly, True), True)]
    for r in _stationary_points(poly):
        kind = _classify_interior(poly, r)
        if kind is not None:
            out.append(CriticalPoint(r, kind))
    out.append(CriticalPoint(1.0, _endpoint_kind(poly, False), True))
    return out


def _fallback_snap(series, poly: _YPoly, s_guess: float, kind: str) -> SnapResult:
    candidates = critical_points(series)
    matching = [c for c in candidates if c.kind == kind]
    if not matching:
        others = [c for c in candidates if c.kind is not None]
        nearest = min(others, key=lambda c: (abs(c.s - s_guess), c.s)) if others else None
        raise ExtremumNotFound(f"no {kind} of y(s) exists in [0, 1]", nearest=nearest)
    # ties within refinement noise break toward smaller s
    dmin = min(abs(c.s - s_guess) for c in matching)
    best = min((c for c in matching if abs(c.s - s_guess) <= dmin + 1e-9), key=lambda c: c.s)
    return SnapResult(s=best.s, boundary=best.boundary, used_fallback=True)


def _nothing_nearer(poly: _YPoly, s_guess: float, s_star: float, kind: str) -> bool:
    """Cheap guard against Newton overshoot: reject s_star when another root of
    y' (or a matching boundary extremum) lies strictly nearer to s_guess."""
    d = abs(s_star - s_guess)
    if d < 1e-9:
        return True
    lo = max(0.0, s_guess - d)
    hi = min(1.0, s_guess + d)
    grid = np.linspace(lo, hi, 33)
    dv = npleg.legval(2.0 * grid - 1.0, poly.dleg)
    for i in np.nonzero(np.signbit(dv[:-1]) != np.signbit(dv[1:]))[0]:
        if not grid[i] - 1e-9 <= s_star <= grid[i + 1] + 1e-9:
            return False  # a different root at distance <= d
    if lo == 0.0 and s_guess < d and _endpoint_kind(poly, True) == kind:
        return False
    if hi == 1.0 and 1.0 - s_guess < d and _endpoint_kind(poly, False) == kind:
        return False
    return True


def _snap_poly(series, poly: _YPoly, s_guess: float, kind: str) -> SnapResult:
    sign = 1.0 if kind == "min" else -1.0
    s = s_guess
    converged = False
    for _ in range(NEWTON_MAX_ITER):
        g0 = sign * poly.dy(s)
        h0 = sign * poly.d2y(s)
        if abs(h0) <= poly.dnoise:
            break
        step = -g0 / h0
        for _ in range(NEWTON_MAX_HALVINGS):
            trial = min(1.0, max(0.0, s + step))
            if abs(sign * poly.dy(trial)) <= abs(g0) or abs(step) < 1e-14:
                break
            step *= 0.5
        s_new = min(1.0, max(0.0, s + step))
        if abs(s_new - s) < NEWTON_TOL:
            s = s_new
            converged = True
            break
        s = s_new
    if converged:
        if _BOUNDARY_MARGIN < s < 1.0 - _BOUNDARY_MARGIN:
            if (abs(poly.dy(s)) <= max(poly.dnoise, 1e-7 * max(1.0, poly.dmag))
                    and _classify_interior(poly, s) == kind
                    and _nothing_nearer(poly, s_guess, s, kind)):
                return SnapResult(s=s, boundary=False, used_fallback=False)
        else:
            s_end = 0.0 if s <= 0.5 else 1.0
            if (_endpoint_kind(poly, s_end == 0.0) == kind
                    and _nothing_nearer(poly, s_guess, s_end, kind)):
                return SnapResult(s=s_end, boundary=True, used_fallback=False)
    return _fallback_snap(series, poly, s_guess, kind)


def snap_to_extremum(series, s_guess: float, kind: str) -> SnapResult:
    """Find the local extremum of y(s) of the given kind nearest to s_guess.

    Damped Newton on y'(s) = 0 starting at s_guess (iterates clamped to [0, 1],
    steps halved up to 8 times when |y'| grows, converged at |ds| < 1e-10 or 50
    iterations). Wrong-kind or ambiguous landings fall back to full enumeration
    and pick the matching-kind candidate nearest s_guess, ties toward smaller s.
    Interval endpoints are admitted as boundary extrema. Raises ExtremumNotFound
    (carrying the nearest any-kind candidate) when no match exists anywhere.
    """
    if not 0.0 <= s_guess <= 1.0:
        raise ValidationError(f"s_guess must be in [0, 1], got {s_guess!r}")
    if kind not in KINDS:
        raise ValidationError(f"kind must be 'min' or 'max', got {kind!r}")
    return _snap_poly(series, _YPoly(series._yleg), s_guess, kind)


def _locate_on_series(series, annotations, guesses):
    """Snap every annotation; a failed snap yields (diagnostic_s, boundary, failed)."""
    poly = _YPoly(series._yleg)
    out = []
    for ann, guess in zip(annotations, guesses):
        try:
            r = _snap_poly(series, poly, guess, ann.kind)
            out.append((r.s, r.boundary, False))
        except ExtremumNotFound as exc:
            diag = exc.nearest.s if exc.nearest is not None else guess
            out.append((diag, False, True))
    return out


def _as_located(sample: SymbolVector, annotations, snaps) -> list[LocatedPoint]:
    series = sample.series()
    svals = 2.0 * np.array([s for s, _, _ in snaps]) - 1.0
    xs = npleg.legval(svals, series._xleg)
    ys = npleg.legval(svals, series._yleg)
    points = []
    for i, (ann, (s, boundary, failed)) in enumerate(zip(annotations, snaps)):
        px, py = sample.transform.apply(xs[i], ys[i])
        points.append(LocatedPoint(s=float(s), line_type=ann.line_type, kind=ann.kind,
                                   x=float(px), y=float(py), boundary=boundary, failed=failed))
    return points


def _check_pair(reference: AnnotatedModel, sample: SymbolVector):
    if not reference.annotations:
        raise ValidationError(f"model {reference.class_id!r} has no annotations")
    if reference.average.basis != sample.basis:
        raise ValidationError("reference and sample use different bases")
    if not sample.is_normalized(tol=1e-6):
        raise ValidationError("sample is not normalized")


def locate_determining_points(reference: AnnotatedModel, sample: SymbolVector) -> list[LocatedPoint]:
    """Single-step determining-point detection.

    Each annotation (s_i, T_i, K_i) of the reference is located on the sample by
    snapping from s_i; a not-found snap is reported with its failure flag rather
    than aborting the symbol, so partial results remain usable.
    """
    _check_pair(reference, sample)
    snaps = _locate_on_series(sample.series(), reference.annotations,
                              [a.s for a in reference.annotations])
    return _as_located(sample, reference.annotations, snaps)


def locate_multistep(reference: AnnotatedModel, sample: SymbolVector, steps: int) -> list[LocatedPoint]:
    """Multi-step detection along the homotopy C(t) = (1-t)*average + t*sample.

    The line is divided into `steps` equal steps; each step re-runs the
    single-step search seeded with the previous step's locations. The
    intermediate vectors are intentionally not re-normalized. steps=1 reduces
    exactly to locate_determining_points. A failed snap at an intermediate step
    keeps that point's previous guess for the next step.
    """
    if not isinstance(steps, int) or steps < 1:
        raise ValidationError(f"steps must be an integer >= 1, got {steps!r}")
    _check_pair(reference, sample)
    annotations = reference.annotations
    guesses = [a.s for a in annotations]
    snaps = None
    for k in range(1, steps + 1):
        stage = interpolate(reference.average, sample, k / steps)
        snaps = _locate_on_series(stage.series(), annotations, guesses)
        guesses = [s if not failed else guesses[i]
                   for i, (s, _, failed) in enumerate(snaps)]
    return _as_located(sample, annotations, snaps)


def slanted_width(sample: SymbolVector, slant_deg: float) -> float:
    """Width between the left- and right-bounding lines of the given slant.

    Lines slanted theta degrees from vertical have constant sheared abscissa
    u = x - y*tan(theta); the width is the range of u over the curve, found by
    extremizing the polynomial u(s) over its stationary points and endpoints.
    """
    if not -90.0 < slant_deg < 90.0:
        raise ValidationError(f"slant must satisfy |slant| < 90, got {slant_deg!r}")
    series = sample.series()
    wleg = series._xleg - math.tan(math.radians(slant_deg)) * series._yleg
    poly = _YPoly(wleg)
    cand = [0.0, 1.0] + _stationary_points(poly)
    vals = npleg.legval(2.0 * np.asarray(cand) - 1.0, wleg)
    return float((vals.max() - vals.min()) * sample.transform.scale)


def metric_lines(sample: SymbolVector, points: list[LocatedPoint], slant_deg: float = 0.0) -> MetricLines:
    """Derive metric lines from located points: each line is the mean page-space
    y over all successfully located points of its type; heights are measured
    from the baseline; width uses the given slant."""
    lines: dict[str, float | None] = {t: None for t in LINE_TYPES}
    for t in LINE_TYPES:
        ys = [p.y for p in points if p.line_type == t and not p.failed]
        if ys:
            lines[t] = float(np.mean(ys))
    base = lines["baseline"]
    heights = {"x_height": None, "ascender_height": None, "cap_height": None,
               "descender_depth": None}
    if base is not None:
        if lines["xline"] is not None:
            heights["x_height"] = lines["xline"] - base
        if lines["ascender"] is not None:
            heights["ascender_height"] = lines["ascender"] - base
        if lines["capline"] is not None:
            heights["cap_height"] = lines["capline"] - base
        if lines["descender"] is not None:
            heights["descender_depth"] = base - lines["descender"]
    return MetricLines(slant_deg=float(slant_deg), width=slanted_width(sample, slant_deg),
                       **lines, **heights)


def curve_bounds(sample: SymbolVector) -> tuple[float, float, float, float]:
    """Page-space bounding box (xmin, xmax, ymin, ymax) of the reconstructed curve."""
    series = sample.series()
    out = []
    for leg in (series._xleg, series._yleg):
        poly = _YPoly(leg)
        cand = [0.0, 1.0] + _stationary_points(poly)
        vals = npleg.legval(2.0 * np.asarray(cand) - 1.0, leg)
        out.append((float(vals.min()), float(vals.max())))
    (x0, x1), (y0, y1) = out
    tr = sample.transform
    return (tr.tx + tr.scale * x0, tr.tx + tr.scale * x1,
            tr.ty + tr.scale * y0, tr.ty + tr.scale * y1)


def located_points_payload(points: list[LocatedPoint]) -> list[dict]:
    return [
        {"s": p.s, "type": p.line_type, "kind": p.kind, "x": p.x, "y": p.y,
         "boundary": p.boundary, "failed": p.failed}
        for p in points
    ]


def metric_lines_payload(m: MetricLines) -> dict:
    return {
        "lines": {t: m.line(t) for t in LINE_TYPES},
        "heights": {
            "x_height": m.x_height,
            "ascender_height": m.ascender_height,
            "cap_height": m.cap_height,
            "descender_depth": m.descender_depth,
        },
        "slant_deg": m.slant_deg,
        "width": m.width,
    }
