import numpy as np
import pytest

from bigtan import leafgeom as lg
from bigtan.bigtangent import BigTangentPoint, VerticalVector
from bigtan.errors import ArgumentError, DegenerateMetricError
from bigtan.finsler import FinslerStructure
from bigtan.legendre import CartanDual

from conftest import sample_points

R5 = np.sqrt(5.0)


def make_connection(family, a=(0.0, 0.0), **kw):
    s = FinslerStructure(family, len(a), **kw)
    return lg.LeafConnection(lg.Leaf(np.asarray(a, float), s, CartanDual(s)))


@pytest.fixture
def euclid():
    c = make_connection("euclidean")
    return c, c.leaf.point([1.0, 0.0], [0.0, 2.0])


def vv(a, b):
    return VerticalVector(np.asarray(a, float), np.asarray(b, float))


def leaf_samples(family, count, seed, dim=2):
    s = FinslerStructure(family, dim)
    d = CartanDual(s)
    for x, y, p in sample_points(s, count, seed=seed):
        c = lg.LeafConnection(lg.Leaf(x, s, d))
        yield c, BigTangentPoint(x, y, p)


class TestLeaf:
    def test_point_off_leaf(self, euclid):
        c, _ = euclid
        with pytest.raises(ArgumentError):
            c.local(BigTangentPoint([0.5, 0.0], [1, 0], [0, 1]))

    def test_contains(self, euclid):
        c, at = euclid
        assert c.leaf.contains(at)

    def test_christoffel_euclidean_zero(self, euclid):
        c, at = euclid
        assert np.max(np.abs(c.christoffel_y(at.y))) < 1e-15
        assert np.max(np.abs(c.christoffel_p(at.p))) < 1e-13


class TestFixtureValues:
    def test_unit_liouville_derivative(self, euclid):
        c, at = euclid
        loc = c.local(at)
        got = lg.covariant_derivative(c, vv([1, 0], [0, 0]), loc.E / loc.rS, at)
        expect = np.array([4, 0, 0, -2]) / (5 * R5)
        np.testing.assert_allclose(got.as_array(), expect, atol=1e-15)
        np.testing.assert_allclose(got.as_array(), loc.project_pt(vv([1, 0], [0, 0])).as_array() / R5,
                                   atol=1e-15)

    def test_umbilic_ratio_at_scale_four(self):
        c = make_connection("euclidean")
        at = c.leaf.point([2 / R5, 0.0], [0.0, 4 / R5])
        X = vv([0, 1], [0.3, 0])
        B = lg.second_fundamental_form(c, X, X, at)
        loc = c.local(at)
        PX = loc.project_pt(X)
        assert loc.metric.S == pytest.approx(4.0)
        assert B / loc.G_pt(PX, PX) == pytest.approx(-0.5, abs=1e-14)

    def test_indicatrix_second_fundamental_form(self):
        c = make_connection("randers", a=(0.2, -0.5))
        pt = c.leaf.point([0.8, 0.4], [-1.1, 0.6])
        m = c.local(pt).metric
        at = pt.scaled(1 / np.sqrt(2 * m.F2), 1 / np.sqrt(2 * m.K2))
        assert c.local(at).metric.S == pytest.approx(1.0, abs=1e-12)
        X = vv([0.3, -1.0], [0.5, 0.2])
        loc = c.local(at)
        PX = loc.project_pt(X)
        assert lg.second_fundamental_form(c, X, X, at) == pytest.approx(-loc.G_pt(PX, PX), abs=1e-12)
        assert lg.mean_curvature(c, at) == pytest.approx(-1.0, abs=1e-12)

    def test_flat_curvature_exact(self, euclid):
        c, at = euclid
        res = lg.curvature_check(c, vv([0.3, -1.2], [0.7, 0.1]), at)
        assert res["R_norm_over_X"] < 1e-13
        assert res["sectional_curvature"] < 1e-13

    def test_frame_brackets(self, euclid):
        c, at = euclid
        for kind in ("yy", "yp", "pp"):
            for i in range(2):
                for j in range(2):
                    assert lg.integrability_check(c, i, j, kind, at)["zeta"] < 1e-10

    def test_bracket_kind_validation(self, euclid):
        c, at = euclid
        with pytest.raises(ArgumentError):
            lg.integrability_check(c, 0, 0, "py", at)
        with pytest.raises(ArgumentError):
            lg.integrability_check(c, 0, 2, "yy", at)

    def test_exact_brackets(self, euclid):
        c, at = euclid
        res = lg.exact_bracket_check(c, at)
        assert res["E1_E2"] == 0.0
        assert res["P1_P2_frames"] == 0.0

    def test_eprime_acceleration(self, euclid):
        c, at = euclid
        loc = c.local(at)
        acc = loc.nabla(loc.Eprime, loc.Eprime).at()
        np.testing.assert_allclose(acc.as_array(), [8, 0, 0, -14], atol=1e-13)
        res = lg.eprime_acceleration(c, at)
        assert res["E_coefficient"] == pytest.approx(4.0)

    def test_split_leaf_scalings(self, euclid):
        # B' on V_E1 and V_E2 directions scales by -K^2/(FK|E|) and +F^2/(FK|E|)
        c, at = euclid
        loc = c.local(at)
        F, K = loc.metric.F, loc.metric.K
        norm = F * K * R5
        for X, expect in ((vv([0, 1], [0, 0]), -4 / norm), (vv([0, 0], [1, 0]), 1 / norm)):
            field = loc.project(loc.constant_field(X), "P1") + loc.project(loc.constant_field(X), "P2")
            B = loc.G_pt(loc.nabla(loc.constant_field(X), field).at(), loc.Eprime.at()) / norm
            assert B == pytest.approx(expect, abs=1e-14)
        res = lg.non_umbilic_witness(c, at)
        assert res["distance_to_umbilic"] > 0.05

    def test_orthonormal_frame_rank_error(self):
        with pytest.raises(DegenerateMetricError):
            lg.orthonormal_frame(np.eye(3), np.array([[1.0, 2.0], [0.0, 0.0], [0.0, 0.0]]), 2)

    def test_orthonormal_frame_deterministic(self):
        G = np.diag([1.0, 2.0, 3.0])
        cand = np.eye(3)
        f = lg.orthonormal_frame(G, cand, 3)
        np.testing.assert_allclose(f.T @ G @ f, np.eye(3), atol=1e-15)
        np.testing.assert_allclose(f[:, 0], [0, 0, 1 / np.sqrt(3)])


@pytest.mark.parametrize("family", ["euclidean", "riemannian_conformal", "randers"])
def test_leaf_properties(family):
    rng = np.random.default_rng(5)
    lemma_tol = 1e-6 if family == "randers" else 1e-9
    for c, at in leaf_samples(family, 30, 30):
        X = VerticalVector.from_array(rng.standard_normal(4))
        Y = VerticalVector.from_array(rng.standard_normal(4))
        con = lg.connection_checks(c, at)
        assert max(con["y_contraction"], con["p_contraction"]) < 1e-8
        assert max(con["metric_compatibility"], con["torsion_free"], con["cross_blocks"]) < 1e-7
        lem = lg.lemma_checks(c, X, Y, at)
        assert lem.pop("extension_independence") < 1e-7
        assert max(lem.values()) < lemma_tol
        assert lg.geodesic_residual(c, at) < 1e-7
        assert lg.umbilicity_residual(c, X, Y, at) < 1e-7
        assert max(lg.indicatrix_normal_checks(c, at).values()) < 1e-7
        curv = lg.curvature_check(c, X, at)
        assert curv["R_norm_over_X"] < 1e-5
        assert curv["sectional_curvature"] < 1e-5
        assert curv["formula_agreement"] < 1e-5
        assert max(curv["E_of_norm"], curv["projected_frame_derivatives"]) < 1e-9
        assert max(lg.span_checks(c, at).values()) < 1e-9
        coeffs = rng.standard_normal((4, 5))
        assert max(lg.totally_geodesic_check(c, coeffs, at).values()) < 1e-8
        acc = lg.eprime_acceleration(c, at)
        assert acc["residual"] < 1e-7 and acc["E_coefficient"] > 1e-3
        w = lg.non_umbilic_witness(c, at)
        assert w["derivative_of_Eprime"] < 1e-7
        assert w["direct_vs_closed"] < 1e-7
        assert w["unit_normal"] < 1e-9
        assert w["distance_to_umbilic"] > 0.05


def test_randers_brackets():
    rng = np.random.default_rng(6)
    count = 0
    for c, at in leaf_samples("randers", 100, 31):
        loc = c.local(at)

        def field():
            return loc.polynomial_field(rng.standard_normal(4), 0.5 * rng.standard_normal((4, 4)),
                                        0.5 * rng.standard_normal((4, 4, 4)))

        assert lg.random_bracket_check(c, field(), field(), at)["G_with_E"] < 1e-7
        assert max(lg.split_bracket_check(c, field(), field(), at).values()) < 1e-7
        assert max(lg.membership_derivative_check(c, field(), at).values()) < 1e-7
        count += 1
    assert count == 100


def test_randers_metric_is_not_flat():
    """The randers leaf metric has nonzero Christoffel symbols, so the curvature tests are not vacuous."""
    c = make_connection("randers", a=(0.1, 0.3))
    at = c.leaf.point([0.7, -0.9], [1.2, 0.4])
    assert np.max(np.abs(c.christoffel_y(at.y))) > 0.05
    assert np.max(np.abs(c.christoffel_p(at.p))) > 0.05


def test_three_dimensional_leaf():
    rng = np.random.default_rng(7)
    for c, at in leaf_samples("randers", 5, 32, dim=3):
        X = VerticalVector.from_array(rng.standard_normal(6))
        assert lg.curvature_check(c, X, at)["R_norm_over_X"] < 1e-5
        m = c.local(at).metric
        ind = at.scaled(1 / np.sqrt(2 * m.F2), 1 / np.sqrt(2 * m.K2))
        assert abs(lg.mean_curvature(c, ind) + 1.0) < 1e-6
        assert lg.non_umbilic_witness(c, at)["distance_to_umbilic"] > 0.05
