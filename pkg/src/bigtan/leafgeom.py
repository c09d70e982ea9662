"""Intrinsic geometry of a fiber leaf x = a of TM + T*M.

The leaf carries the product Riemannian metric G = g_ij(a, y) dy dy +
g*^ij(a, p) dp dp.  Everything here works with germs of vertical vector
fields at a point: each component is a jet in the 2n leaf coordinates
z = (y, p), so covariant derivatives, Lie brackets and curvature are exact
up to floating point.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import jets
from .bigtangent import (
    BigTangentPoint,
    VerticalMetricData,
    VerticalVector,
    liouville_fields,
    liouville_forms,
    metric_G,
    projector_P,
    projector_matrix,
)
from .errors import ArgumentError, DegenerateMetricError
from .finsler import FinslerStructure, eval_F2_jet
from .jets import Jet
from .legendre import CartanDual, cartan_data

FIELD_ORDER = 2
RANK_TOL = 1e-9


@dataclass(frozen=True)
class Leaf:
    a: np.ndarray
    structure: FinslerStructure
    dual: CartanDual

    def __post_init__(self):
        a = np.array(self.a, dtype=float)
        if a.shape != (self.structure.dim,):
            raise ArgumentError("leaf base point must have the structure's dimension")
        a.setflags(write=False)
        object.__setattr__(self, "a", a)

    @property
    def dim(self) -> int:
        return 2 * self.structure.dim

    def point(self, y, p) -> BigTangentPoint:
        return BigTangentPoint(self.a, y, p)

    def contains(self, point: BigTangentPoint) -> bool:
        return point.dim == len(self.a) and bool(np.array_equal(point.x, self.a))


class VerticalField:
    """Germ of a vertical vector field: 2n component jets in (y, p)."""

    __slots__ = ("comps",)

    def __init__(self, comps: Jet):
        if comps.ndim != 1:
            raise ArgumentError("field components must be a 1-D jet array")
        self.comps = comps

    @property
    def order(self) -> int:
        return self.comps.order

    def at(self) -> VerticalVector:
        return VerticalVector.from_array(self.comps.value)

    def truncate(self, k: int) -> "VerticalField":
        return VerticalField(self.comps.truncate(k))

    def __add__(self, other):
        k = min(self.order, other.order)
        return VerticalField(self.comps.truncate(k) + other.comps.truncate(k))

    def __sub__(self, other):
        k = min(self.order, other.order)
        return VerticalField(self.comps.truncate(k) - other.comps.truncate(k))

    def __mul__(self, f):
        """Multiply by a float or a scalar jet (function on the leaf)."""
        if isinstance(f, Jet):
            k = min(self.order, f.order)
            return VerticalField(self.comps.truncate(k) * f.truncate(k))
        return VerticalField(self.comps * f)

    __rmul__ = __mul__

    def __truediv__(self, f):
        if isinstance(f, Jet):
            k = min(self.order, f.order)
            return VerticalField(self.comps.truncate(k) / f.truncate(k))
        return VerticalField(self.comps / f)


def _common(*items):
    k = min(i.order for i in items)
    return [i.truncate(k) for i in items]


class LocalGeometry:
    """Jets of all leaf quantities at one point, in the 2n variables (y, p)."""

    def __init__(self, leaf: Leaf, point: BigTangentPoint, order: int = FIELD_ORDER):
        if not leaf.contains(point):
            raise ArgumentError("point does not lie on this leaf")
        self.leaf, self.point = leaf, point
        s, n = leaf.structure, point.dim
        self.n = n
        N = 2 * n
        y0, p0 = point.y, point.p
        ymap, pmap = list(range(n)), list(range(n, N))
        zc = jets.context(N, order)
        self.ctx = zc

        # y side: F^2 to order 4 gives the Christoffel symbols to order 1
        Fy = eval_F2_jet(s, leaf.a, y0, order=4)
        yl = 0.5 * Fy.grad()
        g = yl.grad()
        g_inv = jets.inverse(g)
        gam_y = _christoffel(g_inv.truncate(1), g.grad())
        # p side through the Legendre jet pipeline
        cd = cartan_data(leaf.dual, leaf.a, p0, order=4)
        Kp = cd.K2_jet
        pu = 0.5 * Kp.grad()
        gs = pu.grad()
        gs_inv = jets.inverse(gs)
        gam_p = _christoffel(gs_inv.truncate(1), gs.grad())
        self.cartan_data = cd

        self.F2 = Fy.embed(zc, ymap)
        self.K2 = Kp.embed(zc, pmap)
        self.S = self.F2 + self.K2
        self.rS = self.S.sqrt()
        self.y_lower = yl.embed(zc, ymap)
        self.p_upper = pu.embed(zc, pmap)
        self.yv = jets.variables(zc, y0)
        self.pv = jets.variables(zc, p0, offset=n)
        self.zv = Jet.stack(list(self.yv) + list(self.pv))

        Gc = np.zeros((N, N, zc.size))
        Gc[:n, :n] = g.embed(zc, ymap).coeffs
        Gc[n:, n:] = gs.embed(zc, pmap).coeffs
        self.G = Jet(zc, Gc, check=False)

        c1 = zc.lower(1)
        Cc = np.zeros((N, N, N, c1.size))
        Cc[:n, :n, :n] = gam_y.embed(c1, ymap).coeffs
        Cc[n:, n:, n:] = gam_p.embed(c1, pmap).coeffs
        self.christoffel = Jet(c1, Cc, check=False)
        self.christoffel_y = gam_y.value
        self.christoffel_p = gam_p.value

        self.metric = VerticalMetricData(
            point=point, g=g.value, g_star=gs.value, F2=Fy.value, K2=Kp.value,
            norm_E=float(np.sqrt(Fy.value + Kp.value)), y_lower=yl.value, p_upper=pu.value)

        zero = Jet.zeros(zc, (n,))
        self.E1 = VerticalField(Jet.stack(list(self.yv) + list(zero)))
        self.E2 = VerticalField(Jet.stack(list(zero) + list(self.pv)))
        self.E = VerticalField(self.zv)
        self.Eprime = self.E1 * self.K2 - self.E2 * self.F2
        self.P = self._projector_jets()

    def _projector_jets(self) -> dict[str, Jet]:
        n, S = self.n, self.S
        y, p, yl, pu = self.yv, self.pv, self.y_lower, self.p_upper
        eye = np.eye(n)
        blocks = {
            "P1": (y[:, None] * yl[None, :]) * -1.0 / S + eye,
            "P2": (p[:, None] * pu[None, :]) * -1.0 / S + eye,
            "P3": (p[:, None] * yl[None, :]) * -1.0 / S,
            "P4": (y[:, None] * pu[None, :]) * -1.0 / S,
        }
        N, M = 2 * n, self.ctx.size
        full = np.zeros((N, N, M))
        full[:n, :n] = blocks["P1"].coeffs
        full[n:, n:] = blocks["P2"].coeffs
        full[n:, :n] = blocks["P3"].coeffs
        full[:n, n:] = blocks["P4"].coeffs
        p1 = np.zeros((N, N, M))
        p1[:n, :n] = ((y[:, None] * yl[None, :]) * -1.0 / self.F2 + eye).coeffs
        p2 = np.zeros((N, N, M))
        p2[n:, n:] = ((p[:, None] * pu[None, :]) * -1.0 / self.K2 + eye).coeffs
        return {"P": Jet(self.ctx, full, check=False), "P1": Jet(self.ctx, p1, check=False),
                "P2": Jet(self.ctx, p2, check=False)}

    # -- fields -------------------------------------------------------------

    def constant_field(self, v) -> VerticalField:
        v = v.as_array() if isinstance(v, VerticalVector) else np.asarray(v, float)
        return VerticalField(Jet.constant(self.ctx, v))

    def polynomial_field(self, const, linear=None, quad=None) -> VerticalField:
        """Field with components const + linear (z - z0) + quad (z - z0)(z - z0)."""
        N = 2 * self.n
        dz = self.zv - self.zv.value
        out = Jet.constant(self.ctx, np.asarray(const, float))
        if linear is not None:
            out = out + jets.lincomb(linear, dz)
        if quad is not None:
            dd = dz[:, None] * dz[None, :]
            out = out + Jet(self.ctx, np.tensordot(np.asarray(quad, float).reshape(N, N, N),
                                                    dd.coeffs, axes=([1, 2], [0, 1])), check=False)
        return VerticalField(out)

    def project(self, W: VerticalField, which: str = "P") -> VerticalField:
        P = self.P[which].truncate(min(W.order, self.ctx.max_order))
        return VerticalField(jets.matmul(P, W.comps.truncate(P.order)))

    def frame_field(self, b: int, which: str = "P") -> VerticalField:
        """P applied to the coordinate field d/dz^b (a column of P)."""
        return VerticalField(self.P[which][:, b])

    # -- scalar functions of fields -----------------------------------------

    def G_of(self, V: VerticalField, W: VerticalField) -> Jet:
        G, v, w = _common(self.G, V.comps, W.comps)
        return (G * v[:, None] * w[None, :]).sum()

    def zeta_of(self, V: VerticalField) -> Jet:
        n = self.n
        yl, pu, rS, v = _common(self.y_lower, self.p_upper, self.rS, V.comps)
        return ((yl * v[:n]).sum() + (pu * v[n:]).sum()) / rS

    def derive(self, V: VerticalField, f: Jet) -> Jet:
        """V(f) for a scalar jet f."""
        df = f.grad()
        v, df = _common(V.comps, df)
        return (v * df).sum()

    def directional(self, V: VerticalField, W: VerticalField) -> VerticalField:
        """Componentwise derivative V(W^a)."""
        dW = W.comps.grad()
        v, dW = _common(V.comps, dW)
        return VerticalField((v[None, :] * dW).sum(axis=1))

    def nabla(self, V: VerticalField, W: VerticalField) -> VerticalField:
        """Levi-Civita covariant derivative of W along V, as a germ."""
        dW = W.comps.grad()
        v, dW, w, gam = _common(V.comps, dW, W.comps, self.christoffel)
        t1 = (v[None, :] * dW).sum(axis=1)
        t2 = (gam * v[None, :, None] * w[None, None, :]).sum(axis=(1, 2))
        return VerticalField(t1 + t2)

    def bracket(self, V: VerticalField, W: VerticalField) -> VerticalField:
        return self.directional(V, W) - self.directional(W, V)

    # -- pointwise helpers ------------------------------------------------------

    def project_pt(self, X: VerticalVector, which: str = "P") -> VerticalVector:
        return projector_P(self.metric, X, which)

    def G_pt(self, X: VerticalVector, Y: VerticalVector) -> float:
        return metric_G(self.metric, X, Y)

    def zeta_pt(self, X: VerticalVector) -> float:
        return liouville_forms(self.metric, X)[2]


def _christoffel(g_inv: Jet, dg: Jet) -> Jet:
    """Gamma[k, i, j] = 1/2 g^{kl} d_i g_{jl} for a Hessian metric (dg[j, l, i] = d_i g_jl)."""
    t = dg.transpose(2, 0, 1)
    return 0.5 * (g_inv[:, None, None, :] * t[None, :, :, :]).sum(axis=-1)


class LeafConnection:
    """Levi-Civita connection of G on one leaf; local germs are cached per point."""

    def __init__(self, leaf: Leaf, order: int = FIELD_ORDER):
        self.leaf = leaf
        self.order = order
        self._cache: dict = {}

    def local(self, at: BigTangentPoint) -> LocalGeometry:
        if not self.leaf.contains(at):
            raise ArgumentError("evaluation point is outside the leaf")
        key = (at.y.tobytes(), at.p.tobytes())
        loc = self._cache.get(key)
        if loc is None:
            loc = self._cache[key] = LocalGeometry(self.leaf, at, self.order)
        return loc

    def christoffel_y(self, y) -> np.ndarray:
        """C^k_ij(a, y) as an array indexed [k, i, j]."""
        s = self.leaf.structure
        g = 0.5 * eval_F2_jet(s, self.leaf.a, y, order=3).grad().grad()
        return _christoffel(jets.inverse(g).truncate(0), g.grad()).value

    def christoffel_p(self, p) -> np.ndarray:
        """C^{ij}_k(a, p) as an array indexed [k, i, j]."""
        K2 = cartan_data(self.leaf.dual, self.leaf.a, p, order=3).K2_jet
        gs = 0.5 * K2.grad().grad()
        return _christoffel(jets.inverse(gs).truncate(0), gs.grad()).value


def _at_leaf(c: LeafConnection, at: BigTangentPoint) -> LocalGeometry:
    return c.local(at)


def connection_checks(c: LeafConnection, at: BigTangentPoint) -> dict[str, float]:
    """Vanishing Liouville contractions and the Levi-Civita axioms."""
    loc = _at_leaf(c, at)
    n = loc.n
    gam = loc.christoffel.value
    dG = loc.G.grad().value                   # dG[a, c, b] = d_b G_ac
    Gv = loc.G.value
    lowered = np.einsum("dba,dc->abc", gam, Gv)      # G(nabla_b d_a, d_c)
    compat = dG.transpose(0, 2, 1) - lowered - lowered.transpose(2, 1, 0)
    return {
        "y_contraction": float(np.max(np.abs(np.einsum("kij,j->ki", loc.christoffel_y, at.y)))),
        "p_contraction": float(np.max(np.abs(np.einsum("kij,j->ki", loc.christoffel_p, at.p)))),
        "metric_compatibility": float(np.max(np.abs(compat))),
        "torsion_free": float(np.max(np.abs(gam - gam.transpose(0, 2, 1)))),
        "cross_blocks": float(np.max(np.abs(gam[:n, n:, :])) + np.max(np.abs(gam[n:, :n, :]))),
    }


def covariant_derivative(c: LeafConnection, X: VerticalVector, Y: VerticalField,
                         at: BigTangentPoint) -> VerticalVector:
    loc = _at_leaf(c, at)
    return loc.nabla(loc.constant_field(X), Y).at()


def _twisted_extension(loc: LocalGeometry, Y: VerticalVector) -> VerticalField:
    N = 2 * loc.n
    a, b = np.meshgrid(np.arange(N), np.arange(N), indexing="ij")
    return loc.polynomial_field(Y.as_array(), linear=0.3 * np.sin(a + 2 * b + 1.0))


def lemma_checks(c: LeafConnection, X: VerticalVector, Y: VerticalVector,
                 at: BigTangentPoint) -> dict[str, float]:
    """Both sides of the covariant-derivative formulas for E/|E|, zeta and P."""
    loc = _at_leaf(c, at)
    m = loc.metric
    rS, S = m.norm_E, m.S
    Xf = loc.constant_field(X)
    PX, PY = loc.project_pt(X), loc.project_pt(Y)
    GPP = loc.G_pt(PX, PY)
    _, _, E, _ = liouville_fields(m)

    lhs16 = loc.nabla(Xf, loc.E / loc.rS).at()
    res = {"unit_liouville": (lhs16 - PX / rS).norm()}

    out17, out18 = [], []
    for Yf in (loc.constant_field(Y), _twisted_extension(loc, Y)):
        nXY = loc.nabla(Xf, Yf).at()
        out17.append(loc.derive(Xf, loc.zeta_of(Yf)).value - loc.zeta_pt(nXY))
        out18.append((loc.nabla(Xf, loc.project(Yf)).at() - loc.project_pt(nXY)).as_array())
    rhs17 = GPP / rS
    rhs18 = (-(GPP * E + rS * loc.zeta_pt(Y) * PX) / S).as_array()
    res["zeta_derivative"] = max(abs(v - rhs17) for v in out17)
    res["projector_derivative"] = max(float(np.max(np.abs(v - rhs18))) for v in out18)
    res["extension_independence"] = max(abs(out17[0] - out17[1]),
                                        float(np.max(np.abs(out18[0] - out18[1]))))
    return res


def geodesic_residual(c: LeafConnection, at: BigTangentPoint) -> float:
    """|nabla_u u| for the unit Liouville field u = E/|E|."""
    loc = _at_leaf(c, at)
    u = loc.E / loc.rS
    return loc.nabla(u, u).at().norm()


def second_fundamental_form(c: LeafConnection, X: VerticalVector, Y: VerticalVector,
                            at: BigTangentPoint) -> float:
    """B(X, Y) of the Liouville leaf inside the fiber leaf, unit normal E/|E|.

    Inputs are projected through P first; Y is extended by projecting its
    constant-component field.
    """
    loc = _at_leaf(c, at)
    PX, PY = loc.project_pt(X), loc.project_pt(Y)
    Yf = loc.project(loc.constant_field(PY))
    nab = loc.nabla(loc.constant_field(PX), Yf).at()
    return loc.G_pt(nab, liouville_fields(loc.metric)[2]) / loc.metric.norm_E


def orthonormal_frame(G: np.ndarray, candidates: np.ndarray, count: int,
                      tol: float = RANK_TOL) -> np.ndarray:
    """G-orthonormal vectors from the columns of ``candidates``.

    Gram-Schmidt with pivoting on the largest remaining G-norm; ties go to
    the lowest column index.
    """
    cand = np.array(candidates, dtype=float)
    chosen: list[np.ndarray] = []
    remaining = list(range(cand.shape[1]))
    for _ in range(count):
        best, best_norm, best_vec = None, -1.0, None
        for j in remaining:
            v = cand[:, j].copy()
            for _ in range(2):
                for e in chosen:
                    v -= (e @ G @ v) * e
            nrm = float(np.sqrt(max(v @ G @ v, 0.0)))
            if nrm > best_norm:
                best, best_norm, best_vec = j, nrm, v
        if best is None or best_norm < tol:
            raise DegenerateMetricError("candidate vectors do not span the requested rank")
        chosen.append(best_vec / best_norm)
        remaining.remove(best)
    return np.array(chosen).T


def liouville_frame(loc: LocalGeometry) -> np.ndarray:
    """G-orthonormal basis of V_E at the point, as columns."""
    N = 2 * loc.n
    return orthonormal_frame(loc.metric.G_matrix(), projector_matrix(loc.metric), N - 1)


def mean_curvature(c: LeafConnection, at: BigTangentPoint) -> float:
    loc = _at_leaf(c, at)
    frame = liouville_frame(loc)
    vals = [second_fundamental_form(c, VerticalVector.from_array(e), VerticalVector.from_array(e), at)
            for e in frame.T]
    return float(np.mean(vals))


def umbilicity_residual(c: LeafConnection, X: VerticalVector, Y: VerticalVector,
                        at: BigTangentPoint) -> float:
    loc = _at_leaf(c, at)
    PX, PY = loc.project_pt(X), loc.project_pt(Y)
    B = second_fundamental_form(c, PX, PY, at)
    return abs(B + loc.G_pt(PX, PY) / loc.metric.norm_E)


def indicatrix_normal_checks(c: LeafConnection, at: BigTangentPoint) -> dict[str, float]:
    """The G-gradient of F^2 + K^2 is 2E, and d|E|/dy, d|E|/dp are y_j/|E|, p^j/|E|."""
    loc = _at_leaf(c, at)
    n = loc.n
    m = loc.metric
    dS = loc.S.grad().value
    grad = np.linalg.solve(m.G_matrix(), dS)
    drS = loc.rS.grad().value
    return {
        "gradient_parallel_E": float(np.max(np.abs(grad - 2.0 * np.concatenate([at.y, at.p])))),
        "y_derivative": float(np.max(np.abs(drS[:n] - m.y_lower / m.norm_E))),
        "p_derivative": float(np.max(np.abs(drS[n:] - m.p_upper / m.norm_E))),
    }


def curvature_check(c: LeafConnection, X: VerticalVector, at: BigTangentPoint) -> dict[str, float]:
    """R(X, E)E from second covariant derivatives, and the facts it rests on.

    X is extended as a constant-component field, so [X, E] = X.
    """
    loc = _at_leaf(c, at)
    m = loc.metric
    Xf, E = loc.constant_field(X), loc.E
    t1 = loc.nabla(Xf, loc.nabla(E, E))
    t2 = loc.nabla(E, loc.nabla(Xf, E))
    t3 = loc.nabla(loc.bracket(Xf, E), E)
    R = (t1.at() - t2.at()) - t3.at()
    Ept = liouville_fields(m)[2]
    E_rS = loc.derive(E, loc.rS).value
    formula = -(1.0 - E_rS / m.norm_E) * loc.project_pt(X)
    xn = max(X.norm(), 1e-300)
    denom = loc.G_pt(X, X) * loc.G_pt(Ept, Ept) - loc.G_pt(X, Ept) ** 2
    Pm = projector_matrix(m)
    r1 = Pm.T @ loc.rS.grad().value
    out = {
        "R_norm_over_X": R.norm() / xn,
        "formula_agreement": (R - formula).norm() / xn,
        "E_of_norm": abs(E_rS - m.norm_E),
        "projected_frame_derivatives": float(np.max(np.abs(r1))),
    }
    # planes containing E: skip nearly degenerate ones
    if denom > 1e-8 * loc.G_pt(X, X) * loc.G_pt(Ept, Ept):
        out["sectional_curvature"] = abs(loc.G_pt(R, X) / denom)
    else:
        out["sectional_curvature"] = 0.0
    return out


def _bracket_residuals(loc: LocalGeometry, V: VerticalField, W: VerticalField) -> dict[str, float]:
    br = loc.bracket(V, W).at()
    Ept = liouville_fields(loc.metric)[2]
    return {"zeta": abs(loc.zeta_pt(br)), "G_with_E": abs(loc.G_pt(br, Ept))}


def integrability_check(c: LeafConnection, i: int, j: int, kind: str,
                        at: BigTangentPoint) -> dict[str, float]:
    """E-components of the bracket of two projected coordinate frame fields."""
    loc = _at_leaf(c, at)
    n = loc.n
    if kind not in ("yy", "yp", "pp"):
        raise ArgumentError(f"unknown bracket kind {kind!r}")
    if not (0 <= i < n and 0 <= j < n):
        raise ArgumentError("frame index out of range")
    a = i if kind[0] == "y" else n + i
    b = j if kind[1] == "y" else n + j
    return _bracket_residuals(loc, loc.frame_field(a), loc.frame_field(b))


def random_bracket_check(c: LeafConnection, W1: VerticalField, W2: VerticalField,
                         at: BigTangentPoint) -> dict[str, float]:
    """Bracket of the P-projections of two arbitrary fields."""
    loc = _at_leaf(c, at)
    return _bracket_residuals(loc, loc.project(W1), loc.project(W2))


def split_bracket_check(c: LeafConnection, W1: VerticalField, W2: VerticalField,
                        at: BigTangentPoint) -> dict[str, float]:
    """Brackets of fields in V_E1 + V_E2 stay there (zeta1, zeta2 of both parts vanish)."""
    loc = _at_leaf(c, at)
    V = loc.project(W1, "P1") + loc.project(W2, "P2")
    W = loc.project(W2, "P1") + loc.project(W1, "P2")
    br = loc.bracket(V, W).at()
    z1, z2, z = liouville_forms(loc.metric, br)
    return {"zeta1": abs(z1), "zeta2": abs(z2), "zeta": abs(z)}


def exact_bracket_check(c: LeafConnection, at: BigTangentPoint) -> dict[str, float]:
    """[E1, E2] and [P1 d/dy^i, P2 d/dp_l] as full germs, compared to exact zero."""
    loc = _at_leaf(c, at)
    n = loc.n
    worst = float(np.max(np.abs(loc.bracket(loc.E1, loc.E2).comps.coeffs)))
    cross = 0.0
    for i in range(n):
        for l in range(n):
            br = loc.bracket(loc.frame_field(i, "P1"), loc.frame_field(n + l, "P2"))
            cross = max(cross, float(np.max(np.abs(br.comps.coeffs))))
    return {"E1_E2": worst, "P1_P2_frames": cross}


def membership_derivative_check(c: LeafConnection, W: VerticalField, at: BigTangentPoint) -> dict[str, float]:
    """Derivatives of the membership condition for X = P W in the y and p directions."""
    loc = _at_leaf(c, at)
    n = loc.n
    m = loc.metric
    X = loc.project(W)
    dX = X.comps.grad().value          # dX[a, k] = d_k X^a
    x0 = X.comps.value
    gy, gsp = m.g @ at.y, m.g_star @ at.p
    y_dir = m.g @ x0[:n] + gy @ dX[:n, :n] + gsp @ dX[n:, :n]
    p_dir = m.g_star @ x0[n:] + gy @ dX[:n, n:] + gsp @ dX[n:, n:]
    return {"y_direction": float(np.max(np.abs(y_dir))), "p_direction": float(np.max(np.abs(p_dir)))}


def span_checks(c: LeafConnection, at: BigTangentPoint) -> dict[str, float]:
    """Rank tests for the chains {E} < {E1}+{E2} < V and V_E1+V_E2 < V_E < V.

    Each entry is the singular value that must vanish relative to the largest.
    """
    loc = _at_leaf(c, at)
    m = loc.metric
    N = 2 * loc.n
    E1, E2, E, _ = liouville_fields(m)
    lines = np.column_stack([E1.as_array(), E2.as_array(), E.as_array()])
    sv_lines = np.linalg.svd(lines, compute_uv=False)
    split = np.column_stack([projector_matrix(m, "P1"), projector_matrix(m, "P2")])
    split_frame = orthonormal_frame(m.G_matrix(), split, N - 2)
    lf = liouville_frame(loc)
    both = np.column_stack([split_frame, lf])
    sv_both = np.linalg.svd(both, compute_uv=False)
    zeta_split = max(abs(loc.zeta_pt(VerticalVector.from_array(v))) for v in split_frame.T)
    return {
        "E_in_line_pair": sv_lines[2] / sv_lines[0],
        "line_pair_rank": float(sv_lines[1] / sv_lines[0] < RANK_TOL),
        "split_in_liouville": sv_both[N - 1] / sv_both[0],
        "split_zeta": zeta_split,
    }


def totally_geodesic_check(c: LeafConnection, coeffs: np.ndarray, at: BigTangentPoint) -> dict[str, float]:
    """nabla stays in span{E1, E2} for fields f1 E1 + f2 E2 with polynomial coefficients.

    ``coeffs`` has shape (4, 1 + 2n): constant and linear parts of f1, f2, h1, h2.
    """
    loc = _at_leaf(c, at)
    m = loc.metric
    dz = loc.zv - loc.zv.value
    f = [jets.dot(row[1:], dz) + row[0] for row in np.asarray(coeffs, float)]
    V = loc.E1 * f[0] + loc.E2 * f[1]
    W = loc.E1 * f[2] + loc.E2 * f[3]
    E1, E2, _, _ = liouville_fields(m)

    def outside(w: VerticalVector) -> float:
        rest = w - (loc.G_pt(w, E1) / m.F2) * E1 - (loc.G_pt(w, E2) / m.K2) * E2
        return rest.norm()

    closed = {
        ("E1", "E1"): (loc.nabla(loc.E1, loc.E1).at() - E1).norm(),
        ("E1", "E2"): loc.nabla(loc.E1, loc.E2).at().norm(),
        ("E2", "E1"): loc.nabla(loc.E2, loc.E1).at().norm(),
        ("E2", "E2"): (loc.nabla(loc.E2, loc.E2).at() - E2).norm(),
    }
    return {"outside_span": outside(loc.nabla(V, W).at()), "liouville_pairs": max(closed.values())}


def eprime_acceleration(c: LeafConnection, at: BigTangentPoint) -> dict[str, float]:
    """nabla_{E'} E' against -K^2 F^2 E + (K^2 - F^2) E', and its E-coefficient."""
    loc = _at_leaf(c, at)
    m = loc.metric
    acc = loc.nabla(loc.Eprime, loc.Eprime).at()
    _, _, E, Ep = liouville_fields(m)
    formula = -m.K2 * m.F2 * E + (m.K2 - m.F2) * Ep
    coef_E = loc.G_pt(acc, E) / loc.G_pt(E, E)
    scale = max(1.0, formula.norm())
    return {"residual": (acc - formula).norm() / scale, "E_coefficient": abs(coef_E)}


def non_umbilic_witness(c: LeafConnection, at: BigTangentPoint) -> dict[str, float]:
    """Second fundamental form B' of V_E1 + V_E2 inside the Liouville leaf.

    Returns the Frobenius distance from B' (in a G-orthonormal basis) to the
    nearest multiple of the induced metric, plus the residuals of the
    closed-form derivative of E' and of the unit normal.
    """
    loc = _at_leaf(c, at)
    m = loc.metric
    n, N = loc.n, 2 * loc.n
    F, K = m.F, m.K
    _, _, _, Ep = liouville_fields(m)
    norm_c = F * K * m.norm_E
    split = np.column_stack([projector_matrix(m, "P1"), projector_matrix(m, "P2")])
    frame = orthonormal_frame(m.G_matrix(), split, N - 2)
    vecs = [VerticalVector.from_array(e) for e in frame.T]

    a9, direct = 0.0, np.zeros((N - 2, N - 2))
    closed = np.zeros((N - 2, N - 2))
    for i, Xp in enumerate(vecs):
        Xf = loc.constant_field(Xp)
        nab_E = loc.nabla(Xf, loc.Eprime).at()
        expect = m.K2 * loc.project_pt(Xp.v1, "P1") - m.F2 * loc.project_pt(Xp.v2, "P2")
        a9 = max(a9, (nab_E - expect).norm())
        for j, Yp in enumerate(vecs):
            closed[i, j] = -loc.G_pt(expect, Yp) / norm_c
            Yf = loc.project(loc.constant_field(Yp), "P1") + loc.project(loc.constant_field(Yp), "P2")
            direct[i, j] = loc.G_pt(loc.nabla(Xf, Yf).at(), Ep) / norm_c
    lam = np.trace(closed) / (N - 2)
    dist = float(np.linalg.norm(closed - lam * np.eye(N - 2)))
    return {
        "distance_to_umbilic": dist,
        "derivative_of_Eprime": a9,
        "direct_vs_closed": float(np.max(np.abs(direct - closed))),
        "unit_normal": abs(loc.G_pt(Ep / norm_c, Ep / norm_c) - 1.0),
        "orthonormality": float(np.max(np.abs(frame.T @ m.G_matrix() @ frame - np.eye(N - 2)))),
    }
