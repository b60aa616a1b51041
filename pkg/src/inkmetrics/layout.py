"""Use cases built on metric lines: juxtaposition disambiguation and neatening.

Both operations consume only page-space metric lines, so they are invariant
under joint translation and uniform scaling of their inputs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .detect import MetricLines, curve_bounds
from .errors import ValidationError
from .space import SymbolVector, Transform

SUPERSCRIPT = "superscript"
SUBSCRIPT = "subscript"
INLINE = "inline"


@dataclass(frozen=True)
class JuxtapositionConfig:
    """Decision thresholds for script classification.

    A right-hand symbol is a script when its baseline offset (in left x-heights)
    exceeds offset_threshold in magnitude AND its size ratio is below
    ratio_threshold. confidence_scale sets how fast margin distance saturates
    the confidence.
    """

    offset_threshold: float = 0.4
    ratio_threshold: float = 0.85
    confidence_scale: float = 0.25


@dataclass(frozen=True)
class PlacementJudgment:
    relation: str
    confidence: float
    baseline_offset: float | None = None
    size_ratio: float | None = None


def _reference_height(m: MetricLines) -> float | None:
    for h in (m.x_height, m.cap_height, m.ascender_height):
        if h is not None and h > 0:
            return h
    return None


def _squash(margin: float, scale: float) -> float:
    return float(1.0 - math.exp(-max(margin, 0.0) / scale))


def classify_juxtaposition(left: MetricLines, right: MetricLines,
                           config: JuxtapositionConfig = JuxtapositionConfig()) -> PlacementJudgment:
    """Decide superscript / subscript / inline for a right symbol next to a left one.

    Uses the determining-point baselines, not bounding boxes: a descender (as in
    "p") drags the bounding box down but leaves the baseline in place, which is
    exactly what makes "p9" inline rather than a subscript. Confidence is the
    distance from the nearest decision boundary squashed into [0, 1]; missing
    baselines yield an indeterminate (inline, 0.0) result.
    """
    lh = _reference_height(left)
    rh = _reference_height(right)
    if left.baseline is None or right.baseline is None or lh is None or rh is None:
        return PlacementJudgment(relation=INLINE, confidence=0.0)
    offset = (right.baseline - left.baseline) / lh
    ratio = rh / lh
    ot, rt = config.offset_threshold, config.ratio_threshold
    if offset > ot and ratio < rt:
        margin = min(offset - ot, rt - ratio)
        relation = SUPERSCRIPT
    elif offset < -ot and ratio < rt:
        margin = min(-offset - ot, rt - ratio)
        relation = SUBSCRIPT
    else:
        # distance to the nearer script region, in the same normalized units
        d_super = max(ot - offset, ratio - rt)
        d_sub = max(ot + offset, ratio - rt)
        margin = min(max(d_super, 0.0), max(d_sub, 0.0))
        relation = INLINE
    return PlacementJudgment(relation=relation, confidence=_squash(margin, config.confidence_scale),
                             baseline_offset=float(offset), size_ratio=float(ratio))


@dataclass(frozen=True)
class NeatenGuide:
    """Target geometry for a neatened line: where the baseline sits and how tall
    the x-height should be, plus script placement defaults."""

    baseline: float = 0.0
    x_height: float = 1.0
    script_offset: float = 0.5  # script baseline raise/drop, in guide x-heights
    script_scale: float = 0.7   # script size relative to inline symbols

    def __post_init__(self):
        if self.x_height <= 0:
            raise ValidationError("guide x_height must be positive")
        if not 0 < self.script_scale <= 1:
            raise ValidationError("script_scale must be in (0, 1]")


@dataclass(frozen=True)
class NeatenStep:
    """The similarity transform applied to one symbol, with its judged relation."""

    scale: float
    dx: float
    dy: float
    relation: str
    flagged: bool = False  # no usable height metric: translated only


@dataclass(frozen=True)
class NeatenPlan:
    guide: NeatenGuide
    steps: tuple[NeatenStep, ...]


def _transformed(sv: SymbolVector, step: NeatenStep) -> SymbolVector:
    tr = sv.transform
    return replace(sv, transform=Transform(tx=step.scale * tr.tx + step.dx,
                                           ty=step.scale * tr.ty + step.dy,
                                           scale=step.scale * tr.scale))


def neaten(items: list[tuple[SymbolVector, MetricLines]], guide: NeatenGuide = NeatenGuide(),
           config: JuxtapositionConfig = JuxtapositionConfig()):
    """Shift and scale symbols so corresponding metric lines align on the guide.

    Each symbol is scaled uniformly (both axes, preserving the letterform) so
    its reference height (x-height, else cap height, else ascender height)
    matches the guide x-height, then translated so its baseline lands on the
    guide baseline. Symbols judged super/subscript against the running inline
    anchor keep their raise/drop at +-script_offset guide x-heights and are
    additionally scaled by script_scale. Horizontal order is kept and gaps are
    rescaled by the mean inline scale. Symbols without a baseline or height are
    translated only and flagged.

    Returns (transformed symbols, NeatenPlan).
    """
    if not items:
        return [], NeatenPlan(guide=guide, steps=())
    for sv, m in items:
        if m.baseline is None:
            raise ValidationError("every symbol needs a located baseline to neaten")

    anchor: MetricLines | None = None
    relations = []
    for sv, m in items:
        if anchor is None:
            relations.append(INLINE)
        else:
            relations.append(classify_juxtaposition(anchor, m, config).relation)
        if relations[-1] == INLINE and _reference_height(m) is not None:
            anchor = m

    scales, flagged = [], []
    for (sv, m), rel in zip(items, relations):
        ref = _reference_height(m)
        if ref is None:
            scales.append(1.0)
            flagged.append(True)
        else:
            s = guide.x_height / ref
            if rel != INLINE:
                s *= guide.script_scale
            scales.append(s)
            flagged.append(False)
    inline_scales = [s for s, r, f in zip(scales, relations, flagged) if r == INLINE and not f]
    gap_scale = float(np.mean(inline_scales)) if inline_scales else 1.0

    bounds = [curve_bounds(sv) for sv, _ in items]
    steps = []
    cursor = None
    for i, ((sv, m), rel, scale) in enumerate(zip(items, relations, scales)):
        target_base = guide.baseline
        if rel == SUPERSCRIPT:
            target_base += guide.script_offset * guide.x_height
        elif rel == SUBSCRIPT:
            target_base -= guide.script_offset * guide.x_height
        dy = target_base - scale * m.baseline
        left, right = bounds[i][0], bounds[i][1]
        if cursor is None:
            new_left = left  # first symbol anchors the line horizontally
        else:
            gap = left - bounds[i - 1][1]
            new_left = cursor + gap * gap_scale
        dx = new_left - scale * left
        cursor = new_left + scale * (right - left)
        steps.append(NeatenStep(scale=scale, dx=dx, dy=dy, relation=rel, flagged=flagged[i]))

    transformed = [_transformed(sv, step) for (sv, _), step in zip(items, steps)]
    return transformed, NeatenPlan(guide=guide, steps=tuple(steps))
