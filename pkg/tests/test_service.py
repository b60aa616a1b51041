import json
import threading
import urllib.error
import urllib.request

import numpy as np
import pytest

from inkmetrics import evaluate, load_catalog, slanted_width, snap_to_extremum
from inkmetrics.cli import main
from inkmetrics.service import AnnotationService, make_server

import oracles
from conftest import annotate_catalog_file, write_ink_file


@pytest.fixture
def catalog_path(tmp_path):
    ink = write_ink_file(tmp_path / "ink.json")
    path = tmp_path / "catalog.json"
    assert main(["average", "--input", ink, "--output", str(path)]) == 0
    annotate_catalog_file(path)
    return path


@pytest.fixture
def server(catalog_path, tmp_path):
    ui = tmp_path / "ui"
    ui.mkdir()
    (ui / "index.html").write_text("<html><body>annotator</body></html>")
    service = AnnotationService(str(catalog_path), ui_dir=str(ui))
    srv = make_server(service, port=0)
    thread = threading.Thread(target=srv.serve_forever, daemon=True)
    thread.start()
    yield service, srv.server_address[1]
    srv.shutdown()
    srv.server_close()


def request(port, method, path, body=None):
    data = json.dumps(body).encode() if body is not None else None
    req = urllib.request.Request(f"http://127.0.0.1:{port}{path}", data=data, method=method,
                                 headers={"Content-Type": "application/json"})
    try:
        with urllib.request.urlopen(req) as resp:
            return resp.status, json.loads(resp.read())
    except urllib.error.HTTPError as exc:
        return exc.code, json.loads(exc.read())


class TestClasses:
    def test_listing(self, server):
        _, port = server
        code, payload = request(port, "GET", "/classes")
        assert code == 200
        assert [c["class_id"] for c in payload] == ["a", "b"]
        assert all(c["annotation_count"] == 2 for c in payload)

    def test_curve_values_are_library_values(self, server):
        service, port = server
        code, payload = request(port, "GET", "/classes/a/curve?samples=64")
        assert code == 200
        assert len(payload["points"]) == 64
        model = service.catalog.get("a")
        s = np.linspace(0.0, 1.0, 64)
        x, y = evaluate(model.average.series(), s)
        px, py = model.average.transform.apply(x, y)
        got = np.array(payload["points"])
        assert np.array_equal(got[:, 0], px)  # bit-for-bit pass-through
        assert np.array_equal(got[:, 1], py)
        assert payload["metric_lines"]["lines"]["baseline"] is not None

    def test_unknown_class_404(self, server):
        _, port = server
        assert request(port, "GET", "/classes/nope/curve")[0] == 404
        assert request(port, "POST", "/classes/nope/snap", {"s_guess": 0.5, "kind": "min"})[0] == 404

    def test_bad_samples_param(self, server):
        _, port = server
        assert request(port, "GET", "/classes/a/curve?samples=1")[0] == 400
        assert request(port, "GET", "/classes/a/curve?samples=zap")[0] == 400


class TestSnap:
    def test_snap_equals_library_call(self, server):
        service, port = server
        code, payload = request(port, "POST", "/classes/a/snap",
                                {"s_guess": 0.4, "kind": "min"})
        assert code == 200 and payload["found"]
        model = service.catalog.get("a")
        ref = snap_to_extremum(model.average.series(), 0.4, "min")
        assert payload["s"] == ref.s
        assert payload["boundary"] == ref.boundary

    def test_click_near_extremum_snaps_to_it(self, server):
        service, port = server
        model = service.catalog.get("a")
        ann = model.annotations[0]
        # a click 0.03 arc length along the curve away from the extremum
        x, y = evaluate(model.average.series(), min(ann.s + 0.03, 1.0))
        px, py = model.average.transform.apply(x, y)
        code, payload = request(port, "POST", "/classes/a/snap",
                                {"point": [float(px), float(py)], "kind": ann.kind})
        assert code == 200 and payload["found"]
        ref = oracles.dense_nearest(model.average.series(), ann.s, ann.kind)
        assert abs(payload["s"] - ref) <= 1e-3

    def test_missing_kind_or_location(self, server):
        _, port = server
        assert request(port, "POST", "/classes/a/snap", {"s_guess": 0.5})[0] == 400
        assert request(port, "POST", "/classes/a/snap", {"kind": "min"})[0] == 400
        assert request(port, "POST", "/classes/a/snap",
                       {"s_guess": 2.0, "kind": "min"})[0] == 400


class TestSaveAnnotations:
    def test_save_roundtrip_and_width(self, server, catalog_path):
        service, port = server
        body = {"annotations": [{"s": 0.25, "type": "baseline", "kind": "min"},
                                {"s": 0.75, "type": "xline", "kind": "max"}],
                "slant_deg": 15.0}
        code, payload = request(port, "PUT", "/classes/a/annotations", body)
        assert code == 200
        model = service.catalog.get("a")
        assert payload["width"] == slanted_width(model.average, 15.0)
        assert payload["slant_deg"] == 15.0
        reloaded = load_catalog(str(catalog_path))
        saved = reloaded.get("a")
        assert [(a.s, a.line_type, a.kind) for a in saved.annotations] == \
            [(0.25, "baseline", "min"), (0.75, "xline", "max")]
        assert saved.slant_deg == 15.0

    def test_no_torn_files(self, server, catalog_path, tmp_path):
        _, port = server
        for k in range(3):
            code, _ = request(port, "PUT", "/classes/b/annotations",
                              {"annotations": [{"s": 0.1 * (k + 1), "type": "baseline",
                                                "kind": "min"}]})
            assert code == 200
        leftover = [p.name for p in tmp_path.iterdir() if p.name.startswith(".catalog-")]
        assert leftover == []

    def test_two_rapid_saves_last_writer_wins(self, server, catalog_path):
        _, port = server
        first = {"annotations": [{"s": 0.2, "type": "baseline", "kind": "min"}]}
        second = {"annotations": [{"s": 0.6, "type": "baseline", "kind": "min"}]}
        assert request(port, "PUT", "/classes/a/annotations", first)[0] == 200
        assert request(port, "PUT", "/classes/a/annotations", second)[0] == 200
        saved = load_catalog(str(catalog_path)).get("a")
        assert [a.s for a in saved.annotations] == [0.6]

    def test_stale_revision_conflict(self, server):
        _, port = server
        ok = {"annotations": [{"s": 0.2, "type": "baseline", "kind": "min"}]}
        assert request(port, "PUT", "/classes/a/annotations", ok)[0] == 200
        stale = dict(ok, revision=0)
        code, payload = request(port, "PUT", "/classes/a/annotations", stale)
        assert code == 409
        assert payload["revision"] >= 1

    def test_invalid_annotation_rejected(self, server):
        _, port = server
        bad = {"annotations": [{"s": 1.7, "type": "baseline", "kind": "min"}]}
        assert request(port, "PUT", "/classes/a/annotations", bad)[0] == 400
        bad = {"annotations": [{"s": 0.5, "type": "underline", "kind": "min"}]}
        assert request(port, "PUT", "/classes/a/annotations", bad)[0] == 400


class TestPreview:
    def test_detection_report(self, server, tmp_path):
        _, port = server
        ink = json.loads((tmp_path / "ink.json").read_text())
        body = {"ink": {"symbols": [ink["symbols"][0]]}, "steps": 3}
        code, payload = request(port, "POST", "/classes/a/preview", body)
        assert code == 200
        report = payload["reports"][0]
        assert report["steps"] == 3
        assert len(report["points"]) == 2
        assert report["metrics"]["lines"]["baseline"] is not None
        assert len(report["polyline"]) == 256

    def test_bad_steps(self, server, tmp_path):
        _, port = server
        ink = json.loads((tmp_path / "ink.json").read_text())
        body = {"ink": {"symbols": [ink["symbols"][0]]}, "steps": 0}
        assert request(port, "POST", "/classes/a/preview", body)[0] == 400

    def test_missing_ink(self, server):
        _, port = server
        assert request(port, "POST", "/classes/a/preview", {"steps": 2})[0] == 400


class TestStatic:
    def test_index_served(self, server):
        _, port = server
        with urllib.request.urlopen(f"http://127.0.0.1:{port}/") as resp:
            assert resp.status == 200
            assert b"annotator" in resp.read()

    def test_traversal_blocked(self, server):
        _, port = server
        code, _ = request(port, "GET", "/../catalog.json")
        assert code == 404
