"""Named verification checks and the seeded sample points they run on.

Sample index 0 is a fixed reference point (x = 0, y = e_1, p = 2 e_2); all
other indices are random.  Every sample point is drawn from its own
SeedSequence spawned from (seed, index), and every check draws its random
vectors from (seed, index, crc32(check name)), so a sample's values do not
depend on which other checks or samples are run.
"""

from __future__ import annotations

import zlib
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .. import leafgeom as lg
from ..bigtangent import (
    BigTangentPoint,
    VerticalVector,
    coordinate_change_check,
    decomposition_checks,
    liouville_fields,
    liouville_forms,
    metric_G,
    vertical_metric,
)
from ..finsler import (
    euler_identity_check,
    fundamental_data,
    sample_base_point,
    sample_fiber_vector,
    sample_sphere,
)
from ..legendre import cartan_data, cartan_euler_check, legendre_forward, legendre_inverse

Residuals = dict[str, float]


class SampleSpace:
    """Seeded sample points for one run configuration, with cached leaf geometry."""

    def __init__(self, cfg):
        self.cfg = cfg
        self.structure = cfg.structure()
        self.dual = cfg.dual()
        self.dim = cfg.dim
        self._points: dict[int, BigTangentPoint] = {}
        self._conns: dict[int, lg.LeafConnection] = {}

    def rng(self, index: int, *salt: int) -> np.random.Generator:
        return np.random.default_rng(np.random.SeedSequence(self.cfg.seed, spawn_key=(index, *salt)))

    def point(self, index: int) -> BigTangentPoint:
        pt = self._points.get(index)
        if pt is None:
            n = self.dim
            if index == 0:
                e = np.eye(n)
                pt = BigTangentPoint(np.zeros(n), e[0], 2.0 * e[1])
            else:
                rng = self.rng(index)
                x = sample_base_point(rng, n)
                y = sample_fiber_vector(rng, self.structure, x)
                pt = BigTangentPoint(x, y, sample_sphere(rng, n))
            self._points[index] = pt
        return pt

    def connection(self, index: int) -> lg.LeafConnection:
        c = self._conns.get(index)
        if c is None:
            leaf = lg.Leaf(self.point(index).x, self.structure, self.dual)
            c = self._conns[index] = lg.LeafConnection(leaf)
        return c

    def indicatrix_point(self, index: int) -> BigTangentPoint:
        """The sample rescaled so that F^2 = K^2 = 1/2."""
        pt = self.point(index)
        m = self.connection(index).local(pt).metric
        return pt.scaled(1.0 / np.sqrt(2.0 * m.F2), 1.0 / np.sqrt(2.0 * m.K2))


@dataclass
class Sample:
    space: SampleSpace
    index: int
    rng: np.random.Generator

    @property
    def point(self) -> BigTangentPoint:
        return self.space.point(self.index)

    @property
    def conn(self) -> lg.LeafConnection:
        return self.space.connection(self.index)

    @property
    def loc(self) -> lg.LocalGeometry:
        return self.conn.local(self.point)

    @property
    def n(self) -> int:
        return self.space.dim

    def vector(self) -> VerticalVector:
        return VerticalVector.from_array(self.rng.standard_normal(2 * self.n))

    def polynomial_field(self, scale: float = 0.5) -> lg.VerticalField:
        N = 2 * self.n
        r = self.rng
        return self.loc.polynomial_field(r.standard_normal(N), scale * r.standard_normal((N, N)),
                                         scale * r.standard_normal((N, N, N)))

    def chart_matrix(self) -> np.ndarray:
        while True:
            A = np.eye(self.n) + 0.4 * self.rng.standard_normal((self.n, self.n))
            if np.linalg.cond(A) < 10.0:
                return A


@dataclass(frozen=True)
class Check:
    """A named property evaluated once per sample.

    ``evaluate`` returns named residuals; the check residual is their max.
    ``witness`` names an entry that must instead stay above a threshold; it
    is reported separately and excluded from the residual.
    """

    name: str
    paper_ref: str
    anchors: tuple[str, ...]
    evaluate: Callable[[Sample], Residuals]
    tolerance: float
    family_tolerance: dict[str, float] = field(default_factory=dict)
    witness: tuple[str, float] | None = None

    def tolerance_for(self, family: str) -> float:
        return self.family_tolerance.get(family, self.tolerance)

    def salt(self) -> int:
        return zlib.crc32(self.name.encode())


def _pick(res: Residuals, *keys: str) -> Residuals:
    return {k: res[k] for k in keys}


# -- Finsler and Cartan structures -----------------------------------------

def _euler_finsler(s: Sample) -> Residuals:
    pt = s.point
    return euler_identity_check(s.space.structure, pt.x, pt.y)


def _euler_cartan(s: Sample) -> Residuals:
    pt = s.point
    return cartan_euler_check(s.space.dual, pt.x, pt.p, lambdas=())


def _cartan_homogeneity(s: Sample) -> Residuals:
    pt = s.point
    d = s.space.dual
    K = d.K(pt.x, pt.p)
    return {"homogeneity": max(abs(d.K(pt.x, lam * pt.p) - lam * K) for lam in (0.5, 2.0, 7.0))}


def _positive_definite(s: Sample) -> Residuals:
    m = s.loc.metric
    low = min(np.linalg.eigvalsh(m.g)[0], np.linalg.eigvalsh(m.g_star)[0])
    return {"min_eigenvalue": float(low)}


def _legendre_roundtrip(s: Sample) -> Residuals:
    pt = s.point
    p = legendre_forward(s.space.structure, pt.x, pt.y)
    sol = legendre_inverse(s.space.dual, pt.x, p)
    return {"preimage": float(np.max(np.abs(sol.y_of_p - pt.y)))}


def _dual_metric(s: Sample) -> Residuals:
    pt = s.point
    cd = cartan_data(s.space.dual, pt.x, pt.p, order=2)
    fd = fundamental_data(s.space.structure, pt.x, cd.solution.y_of_p)
    return {"g_star_vs_g_inv": float(np.max(np.abs(cd.g_star - fd.g_inv)))}


def _dual_gradient(s: Sample) -> Residuals:
    pt = s.point
    cd = cartan_data(s.space.dual, pt.x, pt.p, order=2)
    return {"p_upper_vs_preimage": float(np.max(np.abs(cd.p_upper - cd.solution.y_of_p)))}


# -- pointwise vertical geometry -------------------------------------------

def _decomposition(s: Sample) -> Residuals:
    return decomposition_checks(s.loc.metric, s.vector(), s.vector())


def _vertical_metric(s: Sample) -> Residuals:
    pt = s.point
    s1 = vertical_metric(s.space.structure, s.space.dual, pt)
    m = s.loc.metric
    X, Y = s.vector(), s.vector()
    E1, E2, E, _ = liouville_fields(m)
    return {
        "G_symmetric": abs(metric_G(m, X, Y) - metric_G(m, Y, X)),
        "G_E1": abs(metric_G(m, E1, E1) - m.F2),
        "G_E2": abs(metric_G(m, E2, E2) - m.K2),
        "G_E": abs(metric_G(m, E, E) - m.S),
        "orthogonal_blocks": abs(metric_G(m, X.v1, Y.v2)),
        "pointwise_vs_leaf": max(float(np.max(np.abs(s1.g - m.g))), float(np.max(np.abs(s1.g_star - m.g_star)))),
    }


def _liouville_forms(s: Sample) -> Residuals:
    m = s.loc.metric
    X = s.vector()
    E1, E2, E, _ = liouville_fields(m)
    z1, z2, z = liouville_forms(m, X)
    return {
        "zeta1": abs(z1 - metric_G(m, X.v1, E1) / m.F),
        "zeta2": abs(z2 - metric_G(m, X.v2, E2) / m.K),
        "zeta": abs(z - metric_G(m, X, E) / m.norm_E),
        "zeta_of_E": abs(liouville_forms(m, E)[2] - m.norm_E),
    }


def _coordinate_change(s: Sample) -> Residuals:
    return coordinate_change_check(s.space.structure, s.space.dual, s.point,
                                   s.vector(), s.vector(), s.chart_matrix())


# -- leaf geometry -----------------------------------------------------------

def _connection(s: Sample) -> Residuals:
    return lg.connection_checks(s.conn, s.point)


def _lemma(s: Sample) -> Residuals:
    return lg.lemma_checks(s.conn, s.vector(), s.vector(), s.point)


def _geodesic(s: Sample) -> Residuals:
    return {"nabla_u_u": lg.geodesic_residual(s.conn, s.point)}


def _umbilicity(s: Sample) -> Residuals:
    return {"B_plus_G_over_norm": lg.umbilicity_residual(s.conn, s.vector(), s.vector(), s.point)}


def _mean_curvature(s: Sample) -> Residuals:
    at = s.space.indicatrix_point(s.index)
    return {"H_plus_one": abs(lg.mean_curvature(s.conn, at) + 1.0)}


def _indicatrix_normal(s: Sample) -> Residuals:
    return lg.indicatrix_normal_checks(s.conn, s.point)


def _curvature(s: Sample) -> Residuals:
    return _pick(lg.curvature_check(s.conn, s.vector(), s.point), "R_norm_over_X", "formula_agreement")


def _sectional(s: Sample) -> Residuals:
    return _pick(lg.curvature_check(s.conn, s.vector(), s.point), "sectional_curvature")


def _norm_derivatives(s: Sample) -> Residuals:
    return _pick(lg.curvature_check(s.conn, s.vector(), s.point), "E_of_norm", "projected_frame_derivatives")


def _frame_brackets(s: Sample) -> Residuals:
    worst: Residuals = {}
    for kind in ("yy", "yp", "pp"):
        for i in range(s.n):
            for j in range(s.n):
                for k, v in lg.integrability_check(s.conn, i, j, kind, s.point).items():
                    worst[k] = max(worst.get(k, 0.0), v)
    return worst


def _random_brackets(s: Sample) -> Residuals:
    return lg.random_bracket_check(s.conn, s.polynomial_field(), s.polynomial_field(), s.point)


def _split_brackets(s: Sample) -> Residuals:
    return lg.split_bracket_check(s.conn, s.polynomial_field(), s.polynomial_field(), s.point)


def _exact_brackets(s: Sample) -> Residuals:
    return lg.exact_bracket_check(s.conn, s.point)


def _membership(s: Sample) -> Residuals:
    return lg.membership_derivative_check(s.conn, s.polynomial_field(), s.point)


def _subfoliations(s: Sample) -> Residuals:
    return lg.span_checks(s.conn, s.point)


def _totally_geodesic(s: Sample) -> Residuals:
    return lg.totally_geodesic_check(s.conn, s.rng.standard_normal((4, 1 + 2 * s.n)), s.point)


def _eprime_acceleration(s: Sample) -> Residuals:
    return lg.eprime_acceleration(s.conn, s.point)


def _eprime_derivative(s: Sample) -> Residuals:
    return _pick(lg.non_umbilic_witness(s.conn, s.point), "derivative_of_Eprime", "direct_vs_closed",
                 "unit_normal", "orthonormality")


def _non_umbilic(s: Sample) -> Residuals:
    return _pick(lg.non_umbilic_witness(s.conn, s.point), "distance_to_umbilic")


_LC = {"randers": 1e-6}
_CURV = {"randers": 1e-5}

CHECKS: tuple[Check, ...] = (
    Check("euler_finsler", "Euler identities and 2-homogeneity of F^2",
          ("Finsler Euler identities", "Finsler axioms"), _euler_finsler, 1e-10),
    Check("euler_cartan", "Euler identities of the Cartan dual K^2",
          ("Cartan Euler identities",), _euler_cartan, 1e-10, {"randers": 1e-8}),
    Check("cartan_homogeneity", "1-homogeneity of the Cartan dual K",
          ("Cartan axioms",), _cartan_homogeneity, 1e-9),
    Check("positive_definite", "positive definiteness of g and g* (smallest eigenvalue)",
          ("Finsler axioms", "Cartan axioms"), _positive_definite, 0.0, witness=("min_eigenvalue", 0.0)),
    Check("legendre_roundtrip", "Legendre inverse recovers the fiber preimage",
          ("Legendre duality",), _legendre_roundtrip, 1e-9),
    Check("dual_metric", "g* of the dual equals the inverse of g at the preimage",
          ("Legendre duality",), _dual_metric, 1e-7),
    Check("dual_gradient", "gradient of K^2/2 equals the Legendre preimage",
          ("Legendre duality",), _dual_gradient, 1e-8),
    Check("coordinate_change", "linear chart change leaves F^2, K^2, G and zeta invariant",
          ("coordinate change rules",), _coordinate_change, 1e-9),
    Check("vertical_metric", "block structure and Liouville norms of the vertical metric G",
          ("vertical metric", "vertical splitting", "Liouville vector fields"), _vertical_metric, 1e-10),
    Check("liouville_forms", "zeta, zeta1, zeta2 as G-duals of the unit Liouville fields",
          ("Liouville one-forms",), _liouville_forms, 1e-10),
    Check("vertical_decomposition", "X = PX + zeta(X) E/|E| and its V1, V2 analogues, with metric identities",
          ("first vertical Liouville distribution", "second vertical Liouville distribution",
           "vertical Liouville distribution"),
          lambda s: _pick(_decomposition(s), "reconstruct_P", "reconstruct_P1", "reconstruct_P2",
                          "metric_P", "metric_P1", "metric_P2", "kernel_P"), 1e-10),
    Check("projector_algebra", "P, P1, P2 idempotent, G-self-adjoint and annihilated by zeta",
          ("projector components",),
          lambda s: _pick(_decomposition(s), "idempotent_P", "idempotent_P1", "idempotent_P2",
                          "selfadjoint_P", "selfadjoint_P1", "selfadjoint_P2", "zeta_of_PX",
                          "zeta1_of_P1X", "zeta2_of_P2X", "membership_PX", "annihilate_E"), 1e-10),
    Check("zeta_projector_relations", "zeta and P expressed through zeta1, zeta2, P1, P2 and E'",
          ("vertical decompositions",),
          lambda s: _pick(_decomposition(s), "zeta_split", "projector_split"), 1e-10),
    Check("liouville_decompositions", "V = V_E1 + V_E2 + {E1} + {E2} and {E1}+{E2} = {E}+{E'}",
          ("vertical decompositions",),
          lambda s: _pick(_decomposition(s), "four_way_split", "line_pair_split"), 1e-10),
    Check("eprime_geometry", "E' is G-orthogonal to E with |E'|^2 = F^2 K^2 (F^2 + K^2)",
          ("vertical decompositions",),
          lambda s: _pick(_decomposition(s), "Eprime_orthogonal", "Eprime_norm"), 1e-9),
    Check("leaf_connection_contractions", "Christoffel symbols vanish when contracted with y or p",
          ("leaf connection",),
          lambda s: _pick(_connection(s), "y_contraction", "p_contraction"), 1e-8),
    Check("levi_civita", "metric compatibility, zero torsion and block diagonality of the leaf connection",
          ("leaf connection",),
          lambda s: _pick(_connection(s), "metric_compatibility", "torsion_free", "cross_blocks"), 1e-7),
    Check("covariant_lemma", "covariant derivatives of E/|E|, zeta and P, both sides evaluated independently",
          ("covariant derivative lemma",),
          lambda s: _pick(_lemma(s), "unit_liouville", "zeta_derivative", "projector_derivative"),
          1e-9, _LC),
    Check("extension_independence", "covariant derivative results agree for two field extensions",
          ("covariant derivative lemma",),
          lambda s: _pick(_lemma(s), "extension_independence"), 1e-7),
    Check("liouville_geodesic", "E/|E| is a unit geodesic field of the leaf",
          ("Liouville leaf umbilicity",), _geodesic, 1e-7),
    Check("umbilicity", "second fundamental form of the Liouville leaf equals -G/|E|",
          ("Liouville leaf umbilicity",), _umbilicity, 1e-7),
    Check("mean_curvature", "mean curvature -1 on the generalized indicatrix",
          ("generalized indicatrix mean curvature",), _mean_curvature, 1e-6),
    Check("indicatrix_normal", "gradient of F^2 + K^2 is parallel to E; derivatives of |E|",
          ("generalized indicatrix mean curvature",), _indicatrix_normal, 1e-7),
    Check("curvature", "R(X, E)E vanishes and matches -(1 - E(|E|)/|E|) PX",
          ("curvature along the Liouville field",), _curvature, 1e-10, _CURV),
    Check("sectional_curvature", "sectional curvature of planes containing E vanishes",
          ("no curved leaves",), _sectional, 1e-10, _CURV),
    Check("liouville_norm_derivatives", "E(|E|) = |E| and P-projected frame derivatives of |E| vanish",
          ("projected frame derivatives",), _norm_derivatives, 1e-9),
    Check("frame_brackets", "brackets of projected coordinate frames have no E-component",
          ("integrability",), _frame_brackets, 1e-7),
    Check("random_brackets", "brackets of P-projected polynomial fields have no E-component",
          ("integrability",), _random_brackets, 1e-7),
    Check("split_brackets", "brackets of V_E1 + V_E2 fields stay in V_E1 + V_E2",
          ("integrability", "subfoliations"), _split_brackets, 1e-7),
    Check("exact_brackets", "[E1, E2] and [P1 frame, P2 frame] vanish exactly",
          ("integrability",), _exact_brackets, 0.0),
    Check("membership_derivatives", "derivatives of the membership condition of PW vanish",
          ("integrability",), _membership, 1e-7),
    Check("subfoliations", "rank tests for the nested Liouville distributions",
          ("subfoliations",), _subfoliations, 1e-9),
    Check("totally_geodesic", "covariant derivatives of {E1} + {E2} fields stay in span{E1, E2}",
          ("totally geodesic line-pair leaves",), _totally_geodesic, 1e-8),
    Check("eprime_acceleration", "nabla_E' E' = -K^2 F^2 E + (K^2 - F^2) E' with nonzero E-part",
          ("non-geodesic E' curves",), _eprime_acceleration, 1e-7, witness=("E_coefficient", 1e-3)),
    Check("eprime_derivative", "nabla_X E' = K^2 P1 X1 - F^2 P2 X2 and the unit normal E'/(FK|E|)",
          ("non-umbilical split leaves",), _eprime_derivative, 1e-7),
    Check("non_umbilic", "distance of B' from multiples of the induced metric",
          ("non-umbilical split leaves",), _non_umbilic, 0.0, witness=("distance_to_umbilic", 0.05)),
)

REGISTRY: dict[str, Check] = {c.name: c for c in CHECKS}
