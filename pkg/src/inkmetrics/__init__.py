"""inkmetrics: metric-line detection for handwritten symbols.

Symbols are arc-length parameterized, projected onto a Legendre-Sobolev basis,
and compared in coefficient space; determining points annotated once on a class
average are located on new samples by Newton search with an optional multi-step
homotopy refinement.
"""

from .basis import (
    DEFAULT_DEGREE,
    DEFAULT_MU,
    LSBasis,
    SeriesPair,
    build_basis,
    evaluate,
    project,
    reconstruction_error,
    series_from_monomials,
)
from .detect import (
    CriticalPoint,
    LocatedPoint,
    MetricLines,
    SnapResult,
    critical_points,
    curve_bounds,
    locate_determining_points,
    locate_multistep,
    metric_lines,
    slanted_width,
    snap_to_extremum,
)
from .errors import (
    CatalogBasisError,
    CatalogDuplicateClassError,
    CatalogError,
    CatalogVersionError,
    ConfigError,
    DegenerateSymbolError,
    DegenerateTraceError,
    ExtremumNotFound,
    InkMetricsError,
    ParseError,
    ValidationError,
)
from .ink import (
    InkSymbol,
    ParameterizedTrace,
    concatenate_strokes,
    parameterize,
    parameterize_symbol,
    parse_ink,
    serialize_ink,
)
from .layout import (
    INLINE,
    SUBSCRIPT,
    SUPERSCRIPT,
    JuxtapositionConfig,
    NeatenGuide,
    NeatenPlan,
    PlacementJudgment,
    classify_juxtaposition,
    neaten,
)
from .space import (
    AnnotatedModel,
    Catalog,
    DeterminingPointSpec,
    KINDS,
    LINE_TYPES,
    SymbolVector,
    Transform,
    average,
    denormalize,
    interpolate,
    load_catalog,
    normalize,
    save_catalog,
)

__version__ = "0.1.0"
