"""Coefficient-space geometry: normalization, class averages, homotopy, catalogs.

A projected symbol is standardized by zeroing the constant coefficients and
rescaling the full coefficient vector to unit norm. The discarded translation
and scale are kept on the vector so detected features can be mapped back to
absolute page coordinates.
"""

from __future__ import annotations

import json
import math
import os
import tempfile
from dataclasses import dataclass, field, replace

import numpy as np

from .basis import LSBasis, SeriesPair, build_basis
from .errors import (
    CatalogBasisError,
    CatalogDuplicateClassError,
    CatalogError,
    CatalogVersionError,
    ConfigError,
    DegenerateSymbolError,
    ValidationError,
)

CATALOG_VERSION = 1

LINE_TYPES = ("baseline", "xline", "ascender", "capline", "descender")
KINDS = ("min", "max")

NORM_TOL = 1e-9


@dataclass(frozen=True)
class Transform:
    """Similarity transform from normalized coordinates back to page coordinates."""

    tx: float = 0.0
    ty: float = 0.0
    scale: float = 1.0

    def __post_init__(self):
        if not (self.scale > 0 and math.isfinite(self.scale)):
            raise ValidationError(f"scale must be positive, got {self.scale!r}")

    def apply(self, x, y):
        return self.tx + self.scale * np.asarray(x), self.ty + self.scale * np.asarray(y)


@dataclass(frozen=True)
class SymbolVector:
    """Coefficient vector (x_0..x_d, y_0..y_d) plus its page-coordinate transform.

    Vectors produced by normalize() have x[0] = y[0] = 0 and unit Euclidean
    norm; homotopy interpolants intentionally do not.
    """

    x: np.ndarray
    y: np.ndarray
    transform: Transform
    basis: LSBasis
    class_label: str | None = None

    def __post_init__(self):
        n = self.basis.degree + 1
        for name, c in (("x", self.x), ("y", self.y)):
            c = np.asarray(c, dtype=float)
            if c.shape != (n,) or not np.all(np.isfinite(c)):
                raise ValidationError(f"{name} coefficients must be {n} finite reals")
            object.__setattr__(self, name, c)

    @property
    def coeffs(self) -> np.ndarray:
        return np.concatenate([self.x, self.y])

    @property
    def norm(self) -> float:
        return float(np.hypot(np.linalg.norm(self.x), np.linalg.norm(self.y)))

    def series(self) -> SeriesPair:
        """The normalized-coordinate series (no transform applied)."""
        return SeriesPair(x=self.x, y=self.y, basis=self.basis)

    def is_normalized(self, tol: float = 1e-6) -> bool:
        return (abs(self.x[0]) <= tol and abs(self.y[0]) <= tol
                and abs(self.norm - 1.0) <= tol)


def normalize(series: SeriesPair, class_label: str | None = None) -> SymbolVector:
    """Standardize location and size: zero the constant terms, rescale to norm 1.

    B_0 is the constant function 1, so the dropped terms are a pure translation
    (tx, ty) and the dropped norm a pure scale; the returned transform maps the
    normalized curve back onto the original exactly.
    """
    tx, ty = float(series.x[0]), float(series.y[0])
    x = series.x.copy()
    y = series.y.copy()
    x[0] = 0.0
    y[0] = 0.0
    g = float(np.hypot(np.linalg.norm(x), np.linalg.norm(y)))
    if g < 1e-300:
        raise DegenerateSymbolError("zero coefficient norm after centering (single-point symbol)")
    return SymbolVector(x=x / g, y=y / g, transform=Transform(tx=tx, ty=ty, scale=g),
                        basis=series.basis, class_label=class_label)


def denormalize(symbol: SymbolVector) -> SeriesPair:
    """Reconstruct the raw page-coordinate series from a normalized vector."""
    x = symbol.x * symbol.transform.scale
    y = symbol.y * symbol.transform.scale
    x[0] += symbol.transform.tx
    y[0] += symbol.transform.ty
    return SeriesPair(x=x, y=y, basis=symbol.basis)


def _require_same_basis(vectors):
    basis = vectors[0].basis
    for v in vectors[1:]:
        if v.basis != basis:
            raise ValidationError("vectors use different bases")
    return basis


def average(samples: list[SymbolVector], class_label: str | None = None) -> SymbolVector:
    """Componentwise mean of normalized vectors, re-normalized to unit norm.

    The mean of unit vectors is generally shorter than 1, so the result is
    rescaled to keep average symbols on the same footing as samples.
    """
    if not samples:
        raise ValidationError("cannot average an empty sample list")
    basis = _require_same_basis(samples)
    for i, v in enumerate(samples):
        if not v.is_normalized():
            raise ValidationError(f"sample {i} is not normalized")
    x = np.mean([v.x for v in samples], axis=0)
    y = np.mean([v.y for v in samples], axis=0)
    g = float(np.hypot(np.linalg.norm(x), np.linalg.norm(y)))
    if g < 1e-300:
        raise DegenerateSymbolError("samples cancel to the zero vector")
    label = class_label if class_label is not None else samples[0].class_label
    return SymbolVector(x=x / g, y=y / g, transform=Transform(), basis=basis, class_label=label)


def interpolate(start: SymbolVector, target: SymbolVector, t: float) -> SymbolVector:
    """Point at parameter t on the straight homotopy line in coefficient space.

    The result is deliberately NOT re-normalized: the homotopy must stay on the
    line (1-t)*start + t*target. Its transform is taken from the target, which
    is the symbol whose page coordinates matter downstream.
    """
    if not 0.0 <= t <= 1.0:
        raise ValidationError(f"t must be in [0, 1], got {t!r}")
    _require_same_basis([start, target])
    return SymbolVector(
        x=(1.0 - t) * start.x + t * target.x,
        y=(1.0 - t) * start.y + t * target.y,
        transform=target.transform,
        basis=start.basis,
        class_label=target.class_label,
    )


@dataclass(frozen=True)
class DeterminingPointSpec:
    """One annotation on an average symbol: arc-length location, line type, kind."""

    s: float
    line_type: str
    kind: str

    def __post_init__(self):
        if not 0.0 <= self.s <= 1.0:
            raise ValidationError(f"annotation s must be in [0, 1], got {self.s!r}")
        if self.line_type not in LINE_TYPES:
            raise ValidationError(f"unknown line type {self.line_type!r}")
        if self.kind not in KINDS:
            raise ValidationError(f"kind must be 'min' or 'max', got {self.kind!r}")


@dataclass(frozen=True)
class AnnotatedModel:
    """A class's average symbol with its determining-point annotations."""

    class_id: str
    average: SymbolVector
    annotations: tuple[DeterminingPointSpec, ...] = ()
    sample_count: int = 1
    slant_deg: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "annotations", tuple(self.annotations))
        if self.sample_count < 1:
            raise ValidationError("sample_count must be >= 1")
        if not -90.0 < self.slant_deg < 90.0:
            raise ValidationError("slant_deg must lie in (-90, 90)")


@dataclass
class Catalog:
    """All annotated models sharing one basis, as persisted on disk."""

    basis: LSBasis
    models: list[AnnotatedModel] = field(default_factory=list)

    def __post_init__(self):
        seen = set()
        for m in self.models:
            if m.class_id in seen:
                raise CatalogDuplicateClassError(f"duplicate class_id {m.class_id!r}")
            seen.add(m.class_id)
            if m.average.basis != self.basis:
                raise ValidationError(f"model {m.class_id!r} uses a different basis")

    def get(self, class_id: str) -> AnnotatedModel | None:
        for m in self.models:
            if m.class_id == class_id:
                return m
        return None

    def replace_model(self, model: AnnotatedModel) -> "Catalog":
        models = [model if m.class_id == model.class_id else m for m in self.models]
        if model.class_id not in {m.class_id for m in self.models}:
            models.append(model)
        return Catalog(basis=self.basis, models=models)


def _model_to_json(m: AnnotatedModel) -> dict:
    return {
        "class_id": m.class_id,
        "sample_count": m.sample_count,
        "coeffs": {"x": list(map(float, m.average.x)), "y": list(map(float, m.average.y))},
        "transform": {
            "tx": m.average.transform.tx,
            "ty": m.average.transform.ty,
            "scale": m.average.transform.scale,
        },
        "annotations": [
            {"s": a.s, "type": a.line_type, "kind": a.kind} for a in m.annotations
        ],
        "slant_deg": m.slant_deg,
    }


def _model_from_json(obj: dict, basis: LSBasis) -> AnnotatedModel:
    try:
        tr = obj["transform"]
        average = SymbolVector(
            x=np.array(obj["coeffs"]["x"], dtype=float),
            y=np.array(obj["coeffs"]["y"], dtype=float),
            transform=Transform(tx=float(tr["tx"]), ty=float(tr["ty"]), scale=float(tr["scale"])),
            basis=basis,
            class_label=obj["class_id"],
        )
        annotations = tuple(
            DeterminingPointSpec(s=float(a["s"]), line_type=a["type"], kind=a["kind"])
            for a in obj.get("annotations", [])
        )
        return AnnotatedModel(
            class_id=obj["class_id"],
            average=average,
            annotations=annotations,
            sample_count=int(obj.get("sample_count", 1)),
            slant_deg=float(obj.get("slant_deg", 0.0)),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise CatalogError(f"malformed model entry {obj.get('class_id', '?')!r}: {exc}") from exc


def save_catalog(catalog: Catalog, path: str) -> None:
    """Write the catalog atomically (write-temp-then-rename).

    Floats round-trip bit-exactly: json emits the shortest decimal that parses
    back to the same double, never more than 17 significant digits.
    """
    doc = {
        "version": CATALOG_VERSION,
        "basis": {"degree": catalog.basis.degree, "mu": catalog.basis.mu},
        "models": [_model_to_json(m) for m in catalog.models],
    }
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".catalog-", suffix=".json")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            json.dump(doc, fh, indent=2)
            fh.write("\n")
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def load_catalog(path: str) -> Catalog:
    """Load a catalog, rebuilding its basis from the stored parameters."""
    with open(path, encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise CatalogError(f"invalid catalog JSON: {exc}") from exc
    if not isinstance(doc, dict) or doc.get("version") != CATALOG_VERSION:
        raise CatalogVersionError(
            f"unsupported catalog version {doc.get('version')!r}, expected {CATALOG_VERSION}")
    braw = doc.get("basis")
    if not isinstance(braw, dict):
        raise CatalogBasisError("catalog is missing basis parameters")
    try:
        basis = build_basis(braw.get("degree"), braw.get("mu"))
    except ConfigError as exc:
        raise CatalogBasisError(f"unknown basis parameters {braw!r}: {exc}") from exc
    models = [_model_from_json(obj, basis) for obj in doc.get("models", [])]
    return Catalog(basis=basis, models=models)
