import json
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from inkmetrics import (
    DeterminingPointSpec,
    build_basis,
    critical_points,
    load_catalog,
    save_catalog,
)


@pytest.fixture(scope="session")
def basis12():
    """The default operating point: degree 12, mu = 1/8."""
    return build_basis(12, 0.125)


def wiggle_points(n=120, lift=0.0, scale=1.0, phase=0.0):
    """A smooth single-stroke squiggle with one clear min and max."""
    t = np.linspace(0.0, 1.0, n)
    x = scale * (t + 0.1 * np.sin(2 * np.pi * t + phase))
    y = scale * (0.3 * np.sin(2 * np.pi * t + phase) + 0.1 * np.sin(4 * np.pi * t)) + lift
    return np.column_stack([x, y])


def write_ink_file(path, labels=("a", "b"), copies=3):
    symbols = []
    for i, lbl in enumerate(labels):
        for k in range(copies):
            pts = wiggle_points(lift=0.5 * i + 0.05 * k, scale=1.0 + 0.1 * k, phase=0.3 * i)
            symbols.append({"label": lbl, "strokes": [pts.tolist()]})
    Path(path).write_text(json.dumps({"symbols": symbols}))
    return str(path)


def annotate_catalog_file(path):
    """Add baseline/xline annotations at each average's actual extrema."""
    cat = load_catalog(str(path))
    models = []
    for m in cat.models:
        cps = [c for c in critical_points(m.average.series()) if not c.boundary]
        anns = []
        mins = [c for c in cps if c.kind == "min"]
        maxs = [c for c in cps if c.kind == "max"]
        if mins:
            anns.append(DeterminingPointSpec(s=mins[0].s, line_type="baseline", kind="min"))
        if maxs:
            anns.append(DeterminingPointSpec(s=maxs[-1].s, line_type="xline", kind="max"))
        models.append(replace(m, annotations=tuple(anns)))
    save_catalog(replace(cat, models=models), str(path))


@pytest.fixture(scope="session")
def basis_plain():
    """Ordinary shifted-Legendre basis (mu = 0) for closed-form comparisons."""
    return build_basis(8, 0.0)


def random_loop_trace(rng, n_points=400):
    """A smooth handwriting-like curve: a drifting loop with 1-2 oscillations.

    Amplitudes fall off as 1/k^2 so the shapes stay genuinely low-frequency,
    like single letterforms. Draws whose pen speed nearly vanishes are
    rejected: a near-cusp turns into a corner under arc-length
    parameterization, which is not a smooth curve.
    """
    t = np.linspace(0.0, 1.0, n_points)
    for _ in range(64):
        x = 1.5 * t
        y = np.zeros_like(t)
        for k in (1, 2):
            ax, px = rng.uniform(0.2, 1.0) / k**2, rng.uniform(0, 2 * np.pi)
            ay, py = rng.uniform(0.2, 1.0) / k**2, rng.uniform(0, 2 * np.pi)
            x = x + ax * np.sin(2 * np.pi * k * t + px)
            y = y + ay * np.sin(2 * np.pi * k * t + py)
        speed = np.hypot(np.diff(x), np.diff(y))
        if speed.min() > 0.3 * speed.mean():
            return np.column_stack([x, y])
    raise AssertionError("could not draw a cusp-free curve")
