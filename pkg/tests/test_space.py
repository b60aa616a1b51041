import json

import numpy as np
import pytest

from inkmetrics import (
    AnnotatedModel,
    Catalog,
    CatalogBasisError,
    CatalogDuplicateClassError,
    CatalogVersionError,
    DegenerateSymbolError,
    DeterminingPointSpec,
    SeriesPair,
    SymbolVector,
    Transform,
    ValidationError,
    average,
    build_basis,
    denormalize,
    interpolate,
    load_catalog,
    normalize,
    parameterize,
    project,
    save_catalog,
)


def make_series(basis, x0=0.0, y0=0.0, seed=0, scale=1.0):
    rng = np.random.default_rng(seed)
    x = np.concatenate([[x0], scale * rng.normal(size=basis.degree)])
    y = np.concatenate([[y0], scale * rng.normal(size=basis.degree)])
    return SeriesPair(x=x, y=y, basis=basis)


def make_normalized(basis, seed=0, label=None):
    return normalize(make_series(basis, seed=seed), class_label=label)


class TestNormalize:
    def test_definition(self):
        b = build_basis(2, 0.0)
        # remaining coefficients (1.2, 0, 1.6, 0) have norm exactly 2
        sp = SeriesPair(x=np.array([5.0, 1.2, 0.0]), y=np.array([7.0, 1.6, 0.0]), basis=b)
        sv = normalize(sp)
        assert sv.x[0] == 0.0 and sv.y[0] == 0.0
        assert sv.norm == pytest.approx(1.0, abs=1e-12)
        assert sv.transform == Transform(tx=5.0, ty=7.0, scale=2.0)

    def test_denormalize_reproduces_original(self, basis12):
        sp = make_series(basis12, x0=3.0, y0=-2.0, seed=4, scale=5.0)
        back = denormalize(normalize(sp))
        assert np.allclose(back.x, sp.x, atol=1e-12)
        assert np.allclose(back.y, sp.y, atol=1e-12)

    def test_idempotent(self, basis12):
        sv = make_normalized(basis12, seed=9)
        again = normalize(denormalize(sv))
        assert np.allclose(again.x, sv.x, atol=1e-14)
        assert np.allclose(again.y, sv.y, atol=1e-14)
        assert again.transform.scale == pytest.approx(sv.transform.scale, rel=1e-14)

    def test_translation_scale_collapse(self, basis12):
        rng = np.random.default_rng(31)
        pts = rng.normal(size=(80, 2))
        a = normalize(project(parameterize(pts), basis12))
        b = normalize(project(parameterize(4.0 * pts + np.array([10.0, -3.0])), basis12))
        assert np.allclose(a.x, b.x, atol=1e-10)
        assert np.allclose(a.y, b.y, atol=1e-10)

    def test_single_point_degenerate(self, basis12):
        sp = SeriesPair(x=np.zeros(13), y=np.zeros(13), basis=basis12)
        sp = SeriesPair(x=sp.x + np.eye(13)[0] * 5.0, y=sp.y + np.eye(13)[0] * 7.0, basis=basis12)
        with pytest.raises(DegenerateSymbolError):
            normalize(sp)


class TestAverage:
    def test_identical_vectors(self, basis12):
        sv = make_normalized(basis12, seed=1)
        avg = average([sv, sv, sv])
        assert np.allclose(avg.x, sv.x, atol=1e-12)
        assert np.allclose(avg.y, sv.y, atol=1e-12)

    def test_two_vector_midpoint_direction(self, basis12):
        a = make_normalized(basis12, seed=2)
        b = make_normalized(basis12, seed=3)
        avg = average([a, b])
        mid = 0.5 * (a.coeffs + b.coeffs)
        assert np.allclose(avg.coeffs, mid / np.linalg.norm(mid), atol=1e-12)

    def test_mean_lies_in_componentwise_hull(self, basis12):
        base = make_normalized(basis12, seed=5)
        rng = np.random.default_rng(6)
        cluster = []
        for _ in range(20):
            x = base.x + 0.02 * rng.normal(size=13)
            y = base.y + 0.02 * rng.normal(size=13)
            cluster.append(normalize(SeriesPair(x=x, y=y, basis=basis12)))
        coeffs = np.array([v.coeffs for v in cluster])
        mean = coeffs.mean(axis=0)
        assert np.all(coeffs.min(axis=0) <= mean + 1e-15)
        assert np.all(mean <= coeffs.max(axis=0) + 1e-15)
        avg = average(cluster)
        assert np.allclose(avg.coeffs, mean / np.linalg.norm(mean), atol=1e-12)

    def test_permutation_invariant(self, basis12):
        vs = [make_normalized(basis12, seed=s) for s in range(4)]
        a = average(vs)
        b = average(vs[::-1])
        assert np.allclose(a.coeffs, b.coeffs, atol=1e-15)

    def test_errors(self, basis12):
        with pytest.raises(ValidationError):
            average([])
        other = make_normalized(build_basis(8, 0.125), seed=1)
        with pytest.raises(ValidationError):
            average([make_normalized(basis12, seed=1), other])
        not_norm = interpolate(make_normalized(basis12, 1), make_normalized(basis12, 2), 0.5)
        if not not_norm.is_normalized():
            with pytest.raises(ValidationError):
                average([not_norm])


class TestInterpolate:
    def test_endpoints_exact(self, basis12):
        a = make_normalized(basis12, seed=7)
        b = make_normalized(basis12, seed=8)
        assert np.array_equal(interpolate(a, b, 0.0).coeffs, a.coeffs)
        assert np.array_equal(interpolate(a, b, 1.0).coeffs, b.coeffs)

    def test_midpoint_componentwise(self, basis12):
        a = make_normalized(basis12, seed=7)
        b = make_normalized(basis12, seed=8)
        mid = interpolate(a, b, 0.5)
        assert np.allclose(mid.coeffs, 0.5 * (a.coeffs + b.coeffs), atol=1e-15)
        # intentionally not re-normalized
        assert mid.norm < 1.0

    def test_symmetry_linearity(self, basis12):
        a = make_normalized(basis12, seed=7)
        b = make_normalized(basis12, seed=8)
        for t in (0.25, 0.5, 0.9):
            lhs = interpolate(a, b, t).coeffs + interpolate(b, a, t).coeffs
            assert np.allclose(lhs, a.coeffs + b.coeffs, atol=1e-12)

    def test_domain_checked(self, basis12):
        a = make_normalized(basis12, seed=7)
        b = make_normalized(basis12, seed=8)
        with pytest.raises(ValidationError):
            interpolate(a, b, -0.01)
        with pytest.raises(ValidationError):
            interpolate(a, b, 1.01)


class TestCatalog:
    def make_catalog(self, basis):
        avg = make_normalized(basis, seed=12, label="alpha")
        model = AnnotatedModel(
            class_id="alpha",
            average=avg,
            annotations=(DeterminingPointSpec(s=0.25, line_type="baseline", kind="min"),
                         DeterminingPointSpec(s=0.75, line_type="xline", kind="max")),
            sample_count=17,
            slant_deg=12.5,
        )
        return Catalog(basis=basis, models=[model])

    def test_roundtrip_bit_exact(self, basis12, tmp_path):
        cat = self.make_catalog(basis12)
        path = tmp_path / "cat.json"
        save_catalog(cat, str(path))
        loaded = load_catalog(str(path))
        assert loaded.basis is basis12  # cache returns the identical basis
        m0, m1 = cat.models[0], loaded.models[0]
        assert np.array_equal(m0.average.x, m1.average.x)
        assert np.array_equal(m0.average.y, m1.average.y)
        assert m0.average.transform == m1.average.transform
        assert m0.annotations == m1.annotations
        assert (m0.sample_count, m0.slant_deg) == (m1.sample_count, m1.slant_deg)

    def test_duplicate_class_id(self, basis12):
        avg = make_normalized(basis12, seed=12, label="alpha")
        m = AnnotatedModel(class_id="alpha", average=avg)
        with pytest.raises(CatalogDuplicateClassError, match="alpha"):
            Catalog(basis=basis12, models=[m, m])

    def test_duplicate_in_file(self, basis12, tmp_path):
        cat = self.make_catalog(basis12)
        path = tmp_path / "cat.json"
        save_catalog(cat, str(path))
        doc = json.loads(path.read_text())
        doc["models"].append(doc["models"][0])
        path.write_text(json.dumps(doc))
        with pytest.raises(CatalogDuplicateClassError, match="alpha"):
            load_catalog(str(path))

    def test_version_mismatch(self, basis12, tmp_path):
        cat = self.make_catalog(basis12)
        path = tmp_path / "cat.json"
        save_catalog(cat, str(path))
        doc = json.loads(path.read_text())
        doc["version"] = 99
        path.write_text(json.dumps(doc))
        with pytest.raises(CatalogVersionError):
            load_catalog(str(path))

    def test_unknown_basis(self, basis12, tmp_path):
        cat = self.make_catalog(basis12)
        path = tmp_path / "cat.json"
        save_catalog(cat, str(path))
        doc = json.loads(path.read_text())
        doc["basis"]["degree"] = 99
        path.write_text(json.dumps(doc))
        with pytest.raises(CatalogBasisError):
            load_catalog(str(path))

    def test_no_temp_files_left(self, basis12, tmp_path):
        save_catalog(self.make_catalog(basis12), str(tmp_path / "cat.json"))
        assert [p.name for p in tmp_path.iterdir()] == ["cat.json"]
