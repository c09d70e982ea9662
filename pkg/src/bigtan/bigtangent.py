"""Vertical geometry of the big-tangent manifold TM + T*M.

Vertical vectors are stored by components against the coordinate frames
d/dy^i (``comp1``) and d/dp_i (``comp2``).  Stacked as one array of length
2n, the y-block comes first.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ArgumentError, ZeroSectionError
from .finsler import FinslerStructure, fundamental_data
from .legendre import CartanDual, cartan_data


@dataclass(frozen=True)
class BigTangentPoint:
    x: np.ndarray
    y: np.ndarray
    p: np.ndarray

    def __post_init__(self):
        arrs = [np.array(v, dtype=float) for v in (self.x, self.y, self.p)]
        if arrs[0].ndim != 1 or any(a.shape != arrs[0].shape for a in arrs):
            raise ArgumentError("x, y and p must be 1-D arrays of the same length")
        if not np.any(arrs[1]):
            raise ZeroSectionError("y lies on the zero section")
        if not np.any(arrs[2]):
            raise ZeroSectionError("p lies on the zero section")
        for name, a in zip("xyp", arrs):
            a.setflags(write=False)
            object.__setattr__(self, name, a)

    @property
    def dim(self) -> int:
        return len(self.x)

    # projections onto M, TM and T*M
    def tau(self) -> np.ndarray:
        return self.x

    def tau1(self) -> tuple[np.ndarray, np.ndarray]:
        return self.x, self.y

    def tau2(self) -> tuple[np.ndarray, np.ndarray]:
        return self.x, self.p

    def scaled(self, ly: float, lp: float) -> "BigTangentPoint":
        return BigTangentPoint(self.x, ly * self.y, lp * self.p)


@dataclass(frozen=True)
class VerticalVector:
    comp1: np.ndarray
    comp2: np.ndarray

    def __post_init__(self):
        c1 = np.array(self.comp1, dtype=float)
        c2 = np.array(self.comp2, dtype=float)
        if c1.shape != c2.shape or c1.ndim != 1:
            raise ArgumentError("both components must be vectors of length n")
        if not (np.all(np.isfinite(c1)) and np.all(np.isfinite(c2))):
            raise ArgumentError("vertical vector components must be finite")
        object.__setattr__(self, "comp1", c1)
        object.__setattr__(self, "comp2", c2)

    @classmethod
    def from_array(cls, v) -> "VerticalVector":
        v = np.asarray(v, dtype=float)
        n = len(v) // 2
        return cls(v[:n], v[n:])

    def as_array(self) -> np.ndarray:
        return np.concatenate([self.comp1, self.comp2])

    @property
    def v1(self) -> "VerticalVector":
        """The V1 part."""
        return VerticalVector(self.comp1, np.zeros_like(self.comp2))

    @property
    def v2(self) -> "VerticalVector":
        """The V2 part."""
        return VerticalVector(np.zeros_like(self.comp1), self.comp2)

    def __add__(self, other):
        return VerticalVector(self.comp1 + other.comp1, self.comp2 + other.comp2)

    def __sub__(self, other):
        return VerticalVector(self.comp1 - other.comp1, self.comp2 - other.comp2)

    def __neg__(self):
        return VerticalVector(-self.comp1, -self.comp2)

    def __mul__(self, c):
        return VerticalVector(c * self.comp1, c * self.comp2)

    __rmul__ = __mul__

    def __truediv__(self, c):
        return VerticalVector(self.comp1 / c, self.comp2 / c)

    def norm(self) -> float:
        return float(np.linalg.norm(self.as_array()))


@dataclass(frozen=True)
class VerticalMetricData:
    """Everything the pointwise formulas need at one point of TM + T*M."""

    point: BigTangentPoint
    g: np.ndarray
    g_star: np.ndarray
    F2: float
    K2: float
    norm_E: float
    y_lower: np.ndarray
    p_upper: np.ndarray

    @property
    def F(self) -> float:
        return float(np.sqrt(self.F2))

    @property
    def K(self) -> float:
        return float(np.sqrt(self.K2))

    @property
    def S(self) -> float:
        """F^2 + K^2."""
        return self.F2 + self.K2

    @property
    def dim(self) -> int:
        return self.point.dim

    def G_matrix(self) -> np.ndarray:
        n = self.dim
        out = np.zeros((2 * n, 2 * n))
        out[:n, :n] = self.g
        out[n:, n:] = self.g_star
        return out


def vertical_metric(s: FinslerStructure, d: CartanDual, point: BigTangentPoint) -> VerticalMetricData:
    fd = fundamental_data(s, point.x, point.y)
    cd = cartan_data(d, point.x, point.p, order=2)
    return VerticalMetricData(
        point=point,
        g=fd.g,
        g_star=cd.g_star,
        F2=fd.F2,
        K2=cd.K2,
        norm_E=float(np.sqrt(fd.F2 + cd.K2)),
        y_lower=fd.y_lower,
        p_upper=cd.p_upper,
    )


def metric_G(m: VerticalMetricData, X: VerticalVector, Y: VerticalVector) -> float:
    return float(X.comp1 @ m.g @ Y.comp1 + X.comp2 @ m.g_star @ Y.comp2)


def liouville_fields(m: VerticalMetricData):
    """(E1, E2, E, E') at the point, with E' = K^2 E1 - F^2 E2."""
    y, p = m.point.y, m.point.p
    zero = np.zeros_like(y)
    E1 = VerticalVector(y, zero)
    E2 = VerticalVector(zero, p)
    return E1, E2, E1 + E2, m.K2 * E1 - m.F2 * E2


def zeta_components(m: VerticalMetricData):
    """Local components (zeta_lower, zeta_upper) of the vertical one-form zeta."""
    return m.y_lower / m.norm_E, m.p_upper / m.norm_E


def liouville_forms(m: VerticalMetricData, X: VerticalVector) -> tuple[float, float, float]:
    """(zeta1(X1), zeta2(X2), zeta(X))."""
    z1 = float(m.y_lower @ X.comp1) / m.F
    z2 = float(m.p_upper @ X.comp2) / m.K
    zl, zu = zeta_components(m)
    return z1, z2, float(zl @ X.comp1 + zu @ X.comp2)


def projector_blocks(m: VerticalMetricData) -> dict[str, np.ndarray]:
    """Component blocks of P, as matrices mapping input components to output ones.

    ``P1[i, j]``: y-input j to y-output i; ``P2[i, j]``: p-input j to p-output i;
    ``P3[i, j]``: y-input j to p-output i; ``P4[i, j]``: p-input j to y-output i.
    """
    y, p, yl, pu, S = m.point.y, m.point.p, m.y_lower, m.p_upper, m.S
    eye = np.eye(m.dim)
    return {
        "P1": eye - np.outer(y, yl) / S,
        "P2": eye - np.outer(p, pu) / S,
        "P3": -np.outer(p, yl) / S,
        "P4": -np.outer(y, pu) / S,
    }


def projector_matrix(m: VerticalMetricData, which: str = "P") -> np.ndarray:
    """The 2n x 2n matrix of P, P1 (on V1, zero on V2) or P2 (on V2, zero on V1)."""
    n = m.dim
    y, p = m.point.y, m.point.p
    out = np.zeros((2 * n, 2 * n))
    if which == "P":
        b = projector_blocks(m)
        out[:n, :n], out[n:, n:], out[n:, :n], out[:n, n:] = b["P1"], b["P2"], b["P3"], b["P4"]
    elif which == "P1":
        out[:n, :n] = np.eye(n) - np.outer(y, m.y_lower) / m.F2
    elif which == "P2":
        out[n:, n:] = np.eye(n) - np.outer(p, m.p_upper) / m.K2
    else:
        raise ArgumentError(f"unknown projector {which!r}")
    return out


def projector_P(m: VerticalMetricData, X: VerticalVector, which: str = "P") -> VerticalVector:
    return VerticalVector.from_array(projector_matrix(m, which) @ X.as_array())


def decomposition_checks(m: VerticalMetricData, X: VerticalVector, Y: VerticalVector) -> dict[str, float]:
    """Residuals of the projector and splitting identities at one point."""
    G = lambda a, b: metric_G(m, a, b)  # noqa: E731
    F, K, rS = m.F, m.K, m.norm_E
    E1, E2, E, Ep = liouville_fields(m)
    P = lambda v, w="P": projector_P(m, v, w)  # noqa: E731
    Pm = projector_matrix(m)
    zx1, zx2, zx = liouville_forms(m, X)
    zy1, zy2, zy = liouville_forms(m, Y)
    X1, X2, Y1, Y2 = X.v1, X.v2, Y.v1, Y.v2
    PX, PY = P(X), P(Y)
    res = {}
    # splitting of V and of each summand
    res["reconstruct_P"] = (X - PX - zx * E / rS).norm()
    res["reconstruct_P1"] = (X1 - P(X1, "P1") - zx1 * E1 / F).norm()
    res["reconstruct_P2"] = (X2 - P(X2, "P2") - zx2 * E2 / K).norm()
    base = G(X, Y) - zx * zy
    res["metric_P"] = max(abs(G(X, PY) - base), abs(G(PX, PY) - base))
    base1 = G(X1, Y1) - zx1 * zy1
    res["metric_P1"] = max(abs(G(X1, P(Y1, "P1")) - base1), abs(G(P(X1, "P1"), P(Y1, "P1")) - base1))
    base2 = G(X2, Y2) - zx2 * zy2
    res["metric_P2"] = max(abs(G(X2, P(Y2, "P2")) - base2), abs(G(P(X2, "P2"), P(Y2, "P2")) - base2))
    for w in ("P", "P1", "P2"):
        M = projector_matrix(m, w)
        res[f"idempotent_{w}"] = float(np.max(np.abs(M @ M - M)))
        res[f"selfadjoint_{w}"] = abs(G(P(X, w), Y) - G(X, P(Y, w)))
    res["zeta_of_PX"] = abs(liouville_forms(m, PX)[2])
    res["zeta1_of_P1X"] = abs(liouville_forms(m, P(X1, "P1"))[0])
    res["zeta2_of_P2X"] = abs(liouville_forms(m, P(X2, "P2"))[1])
    res["membership_PX"] = abs(float(m.g @ m.point.y @ PX.comp1 + m.g_star @ m.point.p @ PX.comp2))
    res["annihilate_E"] = max(P(E).norm(), P(E1, "P1").norm(), P(E2, "P2").norm())
    # relations between zeta, P and their V1, V2 counterparts
    res["zeta_split"] = abs(zx - (F * zx1 + K * zx2) / rS)
    rhs = P(X1, "P1") + P(X2, "P2") + ((zx1 / F - zx2 / K) / m.S) * Ep
    res["projector_split"] = (PX - rhs).norm()
    # V = V_E1 + V_E2 + {E1} + {E2}
    res["four_way_split"] = (X - P(X1, "P1") - P(X2, "P2") - zx1 * E1 / F - zx2 * E2 / K).norm()
    # {E1} + {E2} = {E} + {E'}: recover E1 and E2 from E and E'
    coef = np.linalg.solve(np.array([[1.0, m.K2], [1.0, -m.F2]]), np.eye(2))
    rec1 = coef[0, 0] * E + coef[1, 0] * Ep
    rec2 = coef[0, 1] * E + coef[1, 1] * Ep
    res["line_pair_split"] = max((rec1 - E1).norm(), (rec2 - E2).norm())
    res["Eprime_orthogonal"] = abs(G(Ep, E))
    res["Eprime_norm"] = abs(G(Ep, Ep) / (m.F2 * m.K2 * m.S) - 1.0)
    # kernel of P is the line of E
    null = X - PX
    lam = zx / rS
    res["kernel_P"] = (null - lam * E).norm() + float(np.max(np.abs(Pm @ null.as_array())))
    return res


def coordinate_change_check(s: FinslerStructure, d: CartanDual, point: BigTangentPoint,
                            X: VerticalVector, Y: VerticalVector, A) -> dict[str, float]:
    """Invariance of F^2, K^2, G and zeta under the linear chart change x~ = A x.

    The point moves to (A x, A y, A^-T p) and vertical vectors to (A X1, A^-T X2).
    """
    A = np.asarray(A, dtype=float)
    if A.shape != (point.dim, point.dim):
        raise ArgumentError("chart matrix must be dim x dim")
    AiT = np.linalg.inv(A).T
    s2 = s.in_linear_chart(A)
    d2 = CartanDual(s2, d.solver)
    pt2 = BigTangentPoint(A @ point.x, A @ point.y, AiT @ point.p)
    m, m2 = vertical_metric(s, d, point), vertical_metric(s2, d2, pt2)

    def move(v: VerticalVector) -> VerticalVector:
        return VerticalVector(A @ v.comp1, AiT @ v.comp2)

    X2, Y2 = move(X), move(Y)
    return {
        "F2": abs(m2.F2 - m.F2),
        "K2": abs(m2.K2 - m.K2),
        "G": abs(metric_G(m2, X2, Y2) - metric_G(m, X, Y)),
        "zeta": abs(liouville_forms(m2, X2)[2] - liouville_forms(m, X)[2]),
    }
