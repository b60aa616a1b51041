"""Local HTTP service backing the annotation UI.

A thin adapter over the library: every numeric value in a response comes
straight from the corresponding library call. Reads are served concurrently;
annotation saves are serialized through one writer lock and the catalog file is
swapped atomically, so it is never observable in a torn state. Saves carry a
revision counter; a stale expected revision gets a retryable 409.

Endpoints (JSON bodies):
    GET  /classes
    GET  /classes/{id}/curve?samples=N
    POST /classes/{id}/snap          {"s_guess": s | "point": [x, y], "kind": "min"|"max"}
    PUT  /classes/{id}/annotations   {"annotations": [...], "slant_deg": deg, "revision": n?}
    POST /classes/{id}/preview       {"ink": <interchange doc>, "steps": m}
Static UI files are served at / from the configured directory.
"""

from __future__ import annotations

import json
import mimetypes
import posixpath
import re
import threading
from dataclasses import replace
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path

import numpy as np

from .basis import evaluate, project
from .detect import (
    locate_determining_points,
    locate_multistep,
    located_points_payload,
    metric_lines,
    metric_lines_payload,
    slanted_width,
    snap_to_extremum,
)
from .errors import ExtremumNotFound, InkMetricsError, ValidationError
from .ink import parameterize_symbol, parse_ink
from .space import (
    AnnotatedModel,
    DeterminingPointSpec,
    load_catalog,
    normalize,
    save_catalog,
)

DEFAULT_PORT = 7117
_CLASS_ROUTE = re.compile(r"^/classes/([^/]+)/(curve|snap|annotations|preview)$")


class _HTTPError(Exception):
    def __init__(self, status: int, payload: dict):
        self.status = status
        self.payload = payload


class AnnotationService:
    """Catalog-backed request handlers, independent of the HTTP plumbing."""

    def __init__(self, catalog_path: str, ui_dir: str | None = None):
        self.catalog_path = catalog_path
        self.catalog = load_catalog(catalog_path)
        self.ui_dir = Path(ui_dir).resolve() if ui_dir else None
        self.revision = 0
        self._write_lock = threading.Lock()

    # -- helpers -------------------------------------------------------------

    def _model(self, class_id: str) -> AnnotatedModel:
        model = self.catalog.get(class_id)
        if model is None:
            raise _HTTPError(404, {"error": f"unknown class {class_id!r}"})
        return model

    def _model_payload(self, model: AnnotatedModel) -> dict:
        return {
            "class_id": model.class_id,
            "sample_count": model.sample_count,
            "slant_deg": model.slant_deg,
            "annotations": [
                {"s": a.s, "type": a.line_type, "kind": a.kind} for a in model.annotations
            ],
            "width": slanted_width(model.average, model.slant_deg),
            "revision": self.revision,
        }

    def _click_to_s(self, model: AnnotatedModel, point) -> float:
        """Arc length of the curve point nearest a clicked page-space point."""
        px, py = float(point[0]), float(point[1])
        series = model.average.series()
        tr = model.average.transform
        s = np.linspace(0.0, 1.0, 1024)
        for _ in range(3):  # coarse-to-fine local refinement
            x, y = evaluate(series, s)
            cx, cy = tr.apply(x, y)
            i = int(np.argmin((cx - px) ** 2 + (cy - py) ** 2))
            lo, hi = s[max(i - 1, 0)], s[min(i + 1, len(s) - 1)]
            best = float(s[i])
            s = np.linspace(lo, hi, 64)
        return best

    # -- endpoints -----------------------------------------------------------

    def list_classes(self) -> list[dict]:
        return [
            {
                "class_id": m.class_id,
                "annotation_count": len(m.annotations),
                "sample_count": m.sample_count,
                "slant_deg": m.slant_deg,
            }
            for m in self.catalog.models
        ]

    def class_curve(self, class_id: str, samples: int = 256) -> dict:
        model = self._model(class_id)
        if not 2 <= samples <= 100_000:
            raise _HTTPError(400, {"error": "samples must be in 2..100000"})
        s = np.linspace(0.0, 1.0, samples)
        x, y = evaluate(model.average.series(), s)
        px, py = model.average.transform.apply(x, y)
        payload = self._model_payload(model)
        payload["s"] = [float(v) for v in s]
        payload["points"] = [[float(a), float(b)] for a, b in zip(px, py)]
        if model.annotations:
            pts = locate_determining_points(model, model.average)
            payload["metric_lines"] = metric_lines_payload(
                metric_lines(model.average, pts, slant_deg=model.slant_deg))
            payload["located"] = located_points_payload(pts)
        else:
            payload["metric_lines"] = None
            payload["located"] = []
        return payload

    def snap(self, class_id: str, body: dict) -> dict:
        model = self._model(class_id)
        kind = body.get("kind")
        if kind not in ("min", "max"):
            raise _HTTPError(400, {"error": "kind must be 'min' or 'max'"})
        if "s_guess" in body:
            s_guess = float(body["s_guess"])
            if not 0.0 <= s_guess <= 1.0:
                raise _HTTPError(400, {"error": "s_guess must be in [0, 1]"})
        elif "point" in body:
            s_guess = self._click_to_s(model, body["point"])
        else:
            raise _HTTPError(400, {"error": "need 's_guess' or 'point'"})
        series = model.average.series()
        try:
            result = snap_to_extremum(series, s_guess, kind)
        except ExtremumNotFound as exc:
            nearest = None
            if exc.nearest is not None:
                nearest = {"s": exc.nearest.s, "kind": exc.nearest.kind}
            return {"found": False, "s_guess": s_guess, "nearest": nearest}
        x, y = evaluate(series, result.s)
        px, py = model.average.transform.apply(x, y)
        return {"found": True, "s": result.s, "x": float(px), "y": float(py),
                "boundary": result.boundary, "s_guess": s_guess}

    def save_annotations(self, class_id: str, body: dict) -> dict:
        model = self._model(class_id)
        try:
            annotations = tuple(
                DeterminingPointSpec(s=float(a["s"]), line_type=a["type"], kind=a["kind"])
                for a in body.get("annotations", [])
            )
            slant = float(body.get("slant_deg", model.slant_deg))
        except (KeyError, TypeError, ValueError, ValidationError) as exc:
            raise _HTTPError(400, {"error": f"invalid annotations: {exc}"})
        with self._write_lock:
            expected = body.get("revision")
            if expected is not None and int(expected) != self.revision:
                raise _HTTPError(409, {"error": "revision conflict, reload and retry",
                                       "revision": self.revision})
            updated = replace(model, annotations=annotations, slant_deg=slant)
            new_catalog = self.catalog.replace_model(updated)
            save_catalog(new_catalog, self.catalog_path)
            self.catalog = new_catalog
            self.revision += 1
            return self._model_payload(updated)

    def preview(self, class_id: str, body: dict) -> dict:
        model = self._model(class_id)
        if not model.annotations:
            raise _HTTPError(400, {"error": f"class {class_id!r} has no annotations yet"})
        steps = body.get("steps", 3)
        if not isinstance(steps, int) or steps < 1:
            raise _HTTPError(400, {"error": "steps must be an integer >= 1"})
        ink = body.get("ink")
        if ink is None:
            raise _HTTPError(400, {"error": "missing 'ink' document"})
        try:
            symbols = parse_ink(json.dumps(ink) if not isinstance(ink, str) else ink)
        except InkMetricsError as exc:
            raise _HTTPError(400, {"error": str(exc)})
        reports = []
        for sym in symbols:
            sample = normalize(project(parameterize_symbol(sym), self.catalog.basis),
                               class_label=class_id)
            points = locate_multistep(model, sample, steps)
            metrics = metric_lines(sample, points, slant_deg=model.slant_deg)
            ps = np.linspace(0.0, 1.0, 256)
            x, y = evaluate(sample.series(), ps)
            px, py = sample.transform.apply(x, y)
            reports.append({
                "label": sym.class_label,
                "steps": steps,
                "points": located_points_payload(points),
                "metrics": metric_lines_payload(metrics),
                "polyline": [[float(a), float(b)] for a, b in zip(px, py)],
            })
        return {"class_id": class_id, "reports": reports}


class _Handler(BaseHTTPRequestHandler):
    service: AnnotationService = None  # set on the subclass by make_server

    def log_message(self, fmt, *args):  # quiet by default
        pass

    def _send_json(self, status: int, payload):
        raw = json.dumps(payload).encode("utf-8")
        self.send_response(status)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(raw)))
        self.end_headers()
        self.wfile.write(raw)

    def _read_body(self) -> dict:
        length = int(self.headers.get("Content-Length") or 0)
        raw = self.rfile.read(length) if length else b""
        if not raw:
            return {}
        try:
            body = json.loads(raw)
        except json.JSONDecodeError as exc:
            raise _HTTPError(400, {"error": f"invalid JSON body: {exc}"})
        if not isinstance(body, dict):
            raise _HTTPError(400, {"error": "body must be a JSON object"})
        return body

    def _serve_static(self, path: str):
        ui = self.service.ui_dir
        if ui is None:
            self._send_json(404, {"error": "no UI directory configured; API lives under /classes"})
            return
        rel = posixpath.normpath(path.lstrip("/")) or "index.html"
        if rel in (".", ""):
            rel = "index.html"
        target = (ui / rel).resolve()
        if not str(target).startswith(str(ui)) or not target.is_file():
            self._send_json(404, {"error": f"not found: {path}"})
            return
        ctype = mimetypes.guess_type(str(target))[0] or "application/octet-stream"
        data = target.read_bytes()
        self.send_response(200)
        self.send_header("Content-Type", ctype)
        self.send_header("Content-Length", str(len(data)))
        self.end_headers()
        self.wfile.write(data)

    def _dispatch(self, method: str):
        path, _, query = self.path.partition("?")
        try:
            if method == "GET" and path == "/classes":
                self._send_json(200, self.service.list_classes())
                return
            m = _CLASS_ROUTE.match(path)
            if m:
                class_id, action = m.group(1), m.group(2)
                if method == "GET" and action == "curve":
                    samples = 256
                    for part in query.split("&"):
                        if part.startswith("samples="):
                            try:
                                samples = int(part.split("=", 1)[1])
                            except ValueError:
                                raise _HTTPError(400, {"error": "samples must be an integer"})
                    self._send_json(200, self.service.class_curve(class_id, samples))
                    return
                if method == "POST" and action == "snap":
                    self._send_json(200, self.service.snap(class_id, self._read_body()))
                    return
                if method == "PUT" and action == "annotations":
                    self._send_json(200, self.service.save_annotations(class_id, self._read_body()))
                    return
                if method == "POST" and action == "preview":
                    self._send_json(200, self.service.preview(class_id, self._read_body()))
                    return
                raise _HTTPError(405, {"error": f"{method} not allowed on {path}"})
            if method == "GET":
                self._serve_static(path)
                return
            raise _HTTPError(404, {"error": f"not found: {path}"})
        except _HTTPError as exc:
            self._send_json(exc.status, exc.payload)
        except InkMetricsError as exc:
            self._send_json(400, {"error": str(exc)})
        except Exception as exc:  # pragma: no cover - defensive
            self._send_json(500, {"error": f"internal error: {exc}"})

    def do_GET(self):
        self._dispatch("GET")

    def do_POST(self):
        self._dispatch("POST")

    def do_PUT(self):
        self._dispatch("PUT")


def make_server(service: AnnotationService, port: int = DEFAULT_PORT,
                host: str = "127.0.0.1") -> ThreadingHTTPServer:
    handler = type("BoundHandler", (_Handler,), {"service": service})
    server = ThreadingHTTPServer((host, port), handler)
    return server


def serve_forever(service: AnnotationService, port: int = DEFAULT_PORT):
    server = make_server(service, port=port)
    try:
        print(f"inkmetrics annotation service on http://127.0.0.1:{server.server_address[1]}/")
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        server.server_close()
