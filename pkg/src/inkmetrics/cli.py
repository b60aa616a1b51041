"""Command-line interface exposing the full pipeline.

Exit codes: 0 success, 1 validation/configuration error (including bad flags),
2 processing failure. Set INKMETRICS_LOG=DEBUG|INFO|WARNING|ERROR for log
verbosity; every run logs its resolved configuration at INFO.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import statistics
import sys

import numpy as np

from . import figures
from .basis import DEFAULT_DEGREE, DEFAULT_MU, build_basis, project, reconstruction_error
from .benchmark import (
    diagnostics_csv,
    generate_synthetic_class,
    make_benchmark_classes,
    run_evaluation,
)
from .detect import (
    locate_multistep,
    located_points_payload,
    metric_lines,
    metric_lines_payload,
)
from .errors import (
    CatalogError,
    ConfigError,
    InkMetricsError,
    ParseError,
    ValidationError,
)
from .ink import parameterize_symbol, parse_ink
from .layout import NeatenGuide, neaten
from .space import (
    AnnotatedModel,
    Catalog,
    average,
    load_catalog,
    normalize,
    save_catalog,
)

log = logging.getLogger("inkmetrics")

DEFAULT_STEPS = 3
EXIT_OK = 0
EXIT_USAGE = 1
EXIT_FAILURE = 2


class _Parser(argparse.ArgumentParser):
    # argparse exits 2 on bad flags by default; the contract here is 1
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _add_basis_flags(p):
    p.add_argument("--degree", type=int, default=DEFAULT_DEGREE, help="series degree (default 12)")
    p.add_argument("--mu", type=float, default=DEFAULT_MU, help="Sobolev weight (default 0.125)")


def _read_ink(path: str, y_down: bool):
    with open(path, encoding="utf-8") as fh:
        return parse_ink(fh.read(), default_y_down=y_down)


def _write_text(path: str, text: str):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(text)


def _json_dumps(payload) -> str:
    return json.dumps(payload, indent=2) + "\n"


def _steps_value(raw: str) -> int:
    try:
        v = int(raw)
    except ValueError:
        raise ValidationError(f"--steps must be an integer, got {raw!r}")
    if v < 1:
        raise ValidationError(f"--steps must be >= 1, got {v}")
    return v


def _steps_list(raw: str) -> list[int]:
    try:
        values = [int(tok) for tok in raw.split(",") if tok.strip()]
    except ValueError:
        raise ValidationError(f"--steps must be comma-separated integers, got {raw!r}")
    if not values or values != sorted(values) or len(set(values)) != len(values):
        raise ValidationError("--steps must be a strictly ascending list")
    if values[0] < 1:
        raise ValidationError("step counts must be >= 1")
    return values


def cmd_approximate(args) -> int:
    basis = build_basis(args.degree, args.mu)
    symbols = _read_ink(args.input, args.y_down)
    entries = []
    for i, sym in enumerate(symbols):
        trace = parameterize_symbol(sym)
        series = project(trace, basis)
        err = reconstruction_error(trace, series)
        sv = normalize(series, class_label=sym.class_label)
        entries.append({
            "label": sym.class_label,
            "reconstruction_error": err,
            "coeffs": {"x": list(map(float, sv.x)), "y": list(map(float, sv.y))},
            "transform": {"tx": sv.transform.tx, "ty": sv.transform.ty,
                          "scale": sv.transform.scale},
        })
        if args.figures:
            figures.plot_approximation(trace, series,
                                       os.path.join(args.figures, f"approx_{i:03d}.png"),
                                       title=sym.class_label or f"symbol {i}")
    payload = {"basis": {"degree": basis.degree, "mu": basis.mu}, "symbols": entries}
    out = _json_dumps(payload)
    if args.output:
        _write_text(args.output, out)
    else:
        sys.stdout.write(out)
    return EXIT_OK


def cmd_average(args) -> int:
    basis = build_basis(args.degree, args.mu)
    symbols = _read_ink(args.input, args.y_down)
    groups: dict[str, list] = {}
    for i, sym in enumerate(symbols):
        if not sym.class_label:
            raise ValidationError(f"symbols[{i}] has no label; averaging needs labeled symbols")
        sv = normalize(project(parameterize_symbol(sym), basis), class_label=sym.class_label)
        groups.setdefault(sym.class_label, []).append(sv)
    models = [
        AnnotatedModel(class_id=label, average=average(vecs, class_label=label),
                       annotations=(), sample_count=len(vecs))
        for label, vecs in groups.items()
    ]
    save_catalog(Catalog(basis=basis, models=models), args.output)
    log.info("wrote %d class averages to %s", len(models), args.output)
    return EXIT_OK


def _detect_symbols(catalog: Catalog, symbols, steps: int):
    """Shared by detect/neaten: (symbol, model, sample, points, metrics) rows."""
    rows = []
    for i, sym in enumerate(symbols):
        if not sym.class_label:
            raise ValidationError(f"symbols[{i}] has no label; detection needs a class id")
        model = catalog.get(sym.class_label)
        if model is None:
            raise ValidationError(f"symbols[{i}]: no model for class {sym.class_label!r}")
        sample = normalize(project(parameterize_symbol(sym), catalog.basis),
                           class_label=sym.class_label)
        points = locate_multistep(model, sample, steps)
        metrics = metric_lines(sample, points, slant_deg=model.slant_deg)
        rows.append((sym, model, sample, points, metrics))
    return rows


def cmd_detect(args) -> int:
    steps = _steps_value(args.steps)
    catalog = load_catalog(args.catalog)
    symbols = _read_ink(args.input, args.y_down)
    rows = _detect_symbols(catalog, symbols, steps)
    entries = []
    for i, (sym, model, sample, points, metrics) in enumerate(rows):
        entries.append({
            "label": sym.class_label,
            "class_id": model.class_id,
            "points": located_points_payload(points),
            "metrics": metric_lines_payload(metrics),
        })
        if args.figures:
            figures.plot_detection(sample, points, metrics,
                                   os.path.join(args.figures, f"detect_{i:03d}.png"),
                                   title=f"{model.class_id} (m={steps})")
    payload = {"basis": {"degree": catalog.basis.degree, "mu": catalog.basis.mu},
               "steps": steps, "symbols": entries}
    out = _json_dumps(payload)
    if args.output:
        _write_text(args.output, out)
    else:
        sys.stdout.write(out)
    return EXIT_OK


def cmd_neaten(args) -> int:
    steps = _steps_value(args.steps)
    catalog = load_catalog(args.catalog)
    symbols = _read_ink(args.input, args.y_down)
    rows = _detect_symbols(catalog, symbols, steps)
    items = [(sample, metrics) for _, _, sample, _, metrics in rows]
    for i, (_, m) in enumerate(items):
        if m.baseline is None:
            raise ValidationError(f"symbols[{i}]: no baseline located; cannot neaten")
    ref_heights = [h for _, m in items
                   for h in [next((v for v in (m.x_height, m.cap_height, m.ascender_height)
                                   if v is not None and v > 0), None)] if h is not None]
    baseline = args.baseline if args.baseline is not None else items[0][1].baseline
    x_height = args.x_height if args.x_height is not None else (
        statistics.median(ref_heights) if ref_heights else 1.0)
    guide = NeatenGuide(baseline=baseline, x_height=x_height)
    neat, plan = neaten(items, guide)
    _write_text(args.output, figures.symbols_to_ink(neat, n=args.samples_per_symbol))
    if args.svg:
        figures.write_svg_before_after([sv for sv, _ in items], neat, args.svg)
    if args.figures:
        figures.plot_neaten([sv for sv, _ in items], neat,
                            os.path.join(args.figures, "neaten.png"))
    log.info("neatened %d symbols onto baseline %.4g, x-height %.4g",
             len(neat), guide.baseline, guide.x_height)
    return EXIT_OK


def cmd_eval(args) -> int:
    steps_list = _steps_list(args.steps)
    basis = build_basis(args.degree, args.mu)
    bases = make_benchmark_classes(basis, n_classes=args.classes, seed=args.seed)
    sample_seeds = [int(np.random.SeedSequence([args.seed, 1, i]).generate_state(1)[0])
                    for i in range(len(bases))]
    classes = [generate_synthetic_class(base, n=args.samples, noise=args.noise, seed=s)
               for base, s in zip(bases, sample_seeds)]
    table, diag = run_evaluation(classes, steps_list, workers=args.workers)
    sys.stdout.write(table.to_text())
    if args.output:
        _write_text(args.output, table.to_csv())
    if args.diagnostics:
        _write_text(args.diagnostics, diagnostics_csv(diag))
    if args.figures:
        figures.plot_error_table(table.steps,
                                 [100.0 * r for r in table.error_rates],
                                 os.path.join(args.figures, "error_rates.png"))
    return EXIT_OK


def cmd_serve(args) -> int:
    from .service import AnnotationService, serve_forever

    service = AnnotationService(args.catalog, ui_dir=args.ui_dir)
    log.info("serving catalog %s on port %d", args.catalog, args.port)
    serve_forever(service, port=args.port)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="inkmetrics",
                     description="Handwritten-symbol metric lines via series coefficients "
                                 "and determining points")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("approximate", help="project ink onto the series basis")
    _add_basis_flags(p)
    p.add_argument("--input", required=True)
    p.add_argument("--output")
    p.add_argument("--y-down", action="store_true", dest="y_down")
    p.add_argument("--figures", help="directory for rendered figures")
    p.set_defaults(func=cmd_approximate)

    p = sub.add_parser("average", help="build class-average models from labeled ink")
    _add_basis_flags(p)
    p.add_argument("--input", required=True)
    p.add_argument("--output", required=True)
    p.add_argument("--y-down", action="store_true", dest="y_down")
    p.set_defaults(func=cmd_average)

    p = sub.add_parser("detect", help="locate determining points on labeled ink")
    p.add_argument("--catalog", required=True)
    p.add_argument("--input", required=True)
    p.add_argument("--steps", default=str(DEFAULT_STEPS))
    p.add_argument("--output")
    p.add_argument("--y-down", action="store_true", dest="y_down")
    p.add_argument("--figures")
    p.set_defaults(func=cmd_detect)

    p = sub.add_parser("neaten", help="align symbols onto a common baseline/x-height")
    p.add_argument("--catalog", required=True)
    p.add_argument("--input", required=True)
    p.add_argument("--output", required=True)
    p.add_argument("--steps", default=str(DEFAULT_STEPS))
    p.add_argument("--baseline", type=float, default=None)
    p.add_argument("--x-height", type=float, default=None, dest="x_height")
    p.add_argument("--samples-per-symbol", type=int, default=128, dest="samples_per_symbol")
    p.add_argument("--svg")
    p.add_argument("--y-down", action="store_true", dest="y_down")
    p.add_argument("--figures")
    p.set_defaults(func=cmd_neaten)

    p = sub.add_parser("eval", help="run the synthetic multi-step benchmark")
    _add_basis_flags(p)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--steps", default="1,2,3,4,6,8,10,20")
    p.add_argument("--classes", type=int, default=10)
    p.add_argument("--samples", type=int, default=100)
    p.add_argument("--noise", type=float, default=0.005)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--output", help="error table CSV path")
    p.add_argument("--diagnostics", help="per-failure diagnostics CSV path")
    p.add_argument("--figures")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("serve", help="start the annotation service")
    p.add_argument("--catalog", required=True)
    p.add_argument("--port", type=int, default=7117)
    p.add_argument("--ui-dir", dest="ui_dir")
    p.set_defaults(func=cmd_serve)
    return parser


def main(argv=None) -> int:
    logging.basicConfig(level=os.environ.get("INKMETRICS_LOG", "WARNING").upper(),
                        format="%(levelname)s %(name)s: %(message)s")
    parser = build_parser()
    args = parser.parse_args(argv)
    shown = {k: v for k, v in vars(args).items() if k != "func"}
    log.info("resolved config: %s", shown)
    try:
        for d in (getattr(args, "figures", None),):
            if d:
                os.makedirs(d, exist_ok=True)
        return args.func(args)
    except (ValidationError, ParseError, ConfigError, CatalogError, FileNotFoundError) as exc:
        print(f"inkmetrics: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except InkMetricsError as exc:
        print(f"inkmetrics: processing failed: {exc}", file=sys.stderr)
        return EXIT_FAILURE
    except OSError as exc:
        print(f"inkmetrics: {exc}", file=sys.stderr)
        return EXIT_FAILURE


if __name__ == "__main__":
    raise SystemExit(main())
