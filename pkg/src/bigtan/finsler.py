"""Built-in Finsler structures and their fundamental quantities."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import linalg

from . import jets
from .errors import ArgumentError, DegenerateMetricError, ZeroSectionError
from .jets import Jet

FAMILIES = ("euclidean", "riemannian_conformal", "randers")
COND_LIMIT = 1e12
RANDERS_MIN_F = 0.2


@dataclass(frozen=True)
class FinslerStructure:
    """A fiber norm F(x, y) on TM, evaluated through :meth:`F2`.

    ``euclidean``: F^2 = |y|^2.
    ``riemannian_conformal``: F^2 = exp(2 epsilon sin x^1) |y|^2.
    ``randers``: F = |y| + b.y with a constant drift covector |b| < 1.

    ``chart`` optionally holds a matrix M; the structure is then read in the
    linear chart (x, y) -> (M^-1 x, M^-1 y), i.e. F~(x, y) = F(M x, M y).
    """

    family: str
    dim: int
    epsilon: float = 0.1
    b: tuple[float, ...] = ()
    chart: tuple[tuple[float, ...], ...] | None = field(default=None, repr=False)

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ArgumentError(f"unknown metric family {self.family!r}; choose from {FAMILIES}")
        if self.dim < 2:
            raise ArgumentError(f"dimension must be >= 2, got {self.dim}")
        if self.family == "randers":
            b = tuple(float(v) for v in self.b) if self.b else (0.5,) + (0.0,) * (self.dim - 1)
            if len(b) != self.dim:
                raise ArgumentError(f"drift covector needs {self.dim} entries, got {len(b)}")
            if np.linalg.norm(b) >= 1.0:
                raise ArgumentError("Randers drift covector must have Euclidean norm < 1")
            object.__setattr__(self, "b", b)
        else:
            object.__setattr__(self, "b", ())
        if self.chart is not None:
            m = np.asarray(self.chart, dtype=float)
            if m.shape != (self.dim, self.dim):
                raise ArgumentError("chart matrix must be dim x dim")
            object.__setattr__(self, "chart", tuple(tuple(r) for r in m))

    def in_linear_chart(self, A) -> "FinslerStructure":
        """The same structure written in the coordinates x~ = A x, y~ = A y."""
        A = np.asarray(A, dtype=float)
        m = np.linalg.inv(A)
        if self.chart is not None:
            m = np.asarray(self.chart) @ m
        return FinslerStructure(self.family, self.dim, self.epsilon, self.b, chart=m)

    def F2(self, x, y):
        """F^2 at (x, y); x and y may be float arrays or vectors of jets."""
        if self.chart is not None:
            x = jets.lincomb(self.chart, x)
            y = jets.lincomb(self.chart, y)
        sq = jets.dot(y, y)
        if self.family == "euclidean":
            return sq
        if self.family == "riemannian_conformal":
            return jets.exp(2.0 * self.epsilon * jets.sin(x[0])) * sq
        f = jets.sqrt(sq) + jets.dot(np.asarray(self.b), y)
        return f * f

    def F(self, x, y) -> float:
        return float(np.sqrt(self.F2(np.asarray(x, float), np.asarray(y, float))))


@dataclass(frozen=True)
class FundamentalData:
    F2: float
    g: np.ndarray
    g_inv: np.ndarray
    y_lower: np.ndarray
    cartan: np.ndarray

    @property
    def F(self) -> float:
        return float(np.sqrt(self.F2))


def _check_fiber(v, what="y"):
    v = np.asarray(v, dtype=float)
    if not np.any(v):
        raise ZeroSectionError(f"{what} lies on the zero section")
    return v


def eval_F2_jet(s: FinslerStructure, x, y, order: int = 4, wrt: str = "y") -> Jet:
    """Jet of F^2 in the fiber variables (``wrt="y"``) or in (x, y) jointly."""
    x = np.asarray(x, dtype=float)
    y = _check_fiber(y)
    if wrt == "y":
        ctx = jets.context(s.dim, order)
        return s.F2(x, jets.variables(ctx, y))
    if wrt == "xy":
        ctx = jets.context(2 * s.dim, order)
        return s.F2(jets.variables(ctx, x), jets.variables(ctx, y, offset=s.dim))
    raise ArgumentError(f"wrt must be 'y' or 'xy', got {wrt!r}")


def metric_inverse(g: np.ndarray, what: str = "g") -> np.ndarray:
    """Inverse of a symmetric positive definite matrix, guarded by its condition number."""
    cond = np.linalg.cond(g)
    if not np.isfinite(cond) or cond > COND_LIMIT:
        raise DegenerateMetricError(f"{what} is numerically singular (condition number {cond:.3g})")
    try:
        factor = linalg.cho_factor(g)
    except linalg.LinAlgError as exc:
        raise DegenerateMetricError(f"{what} is not positive definite") from exc
    inv = linalg.cho_solve(factor, np.eye(len(g)))
    return 0.5 * (inv + inv.T)


def fundamental_data(s: FinslerStructure, x, y) -> FundamentalData:
    jet = eval_F2_jet(s, x, y, order=3)
    g = 0.5 * jet.derivative_tensor(2)
    return FundamentalData(
        F2=jet.value,
        g=g,
        g_inv=metric_inverse(g),
        y_lower=0.5 * jet.derivative_tensor(1),
        cartan=0.25 * jet.derivative_tensor(3),
    )


def euler_identity_check(s: FinslerStructure, x, y, lambdas=(0.5, 2.0, 7.0)) -> dict[str, float]:
    """Residuals of the Euler identities and of 2-homogeneity of F^2."""
    x = np.asarray(x, dtype=float)
    y = _check_fiber(y)
    fd = fundamental_data(s, x, y)
    res = {
        "F2_vs_gyy": abs(y @ fd.g @ y - fd.F2),
        "F2_vs_ylower_y": abs(fd.y_lower @ y - fd.F2),
        "ylower_vs_gy": float(np.max(np.abs(fd.y_lower - fd.g @ y))),
        "y_vs_ginv_ylower": float(np.max(np.abs(y - fd.g_inv @ fd.y_lower))),
        "cartan_contraction": float(np.max(np.abs(np.einsum("ijk,k->ij", fd.cartan, y)))),
    }
    res["homogeneity"] = max(abs(s.F2(x, lam * y) - lam**2 * fd.F2) for lam in lambdas)
    return res


def sample_base_point(rng: np.random.Generator, dim: int) -> np.ndarray:
    return rng.uniform(-1.0, 1.0, size=dim)


def sample_sphere(rng: np.random.Generator, dim: int, rmin=0.5, rmax=2.0) -> np.ndarray:
    v = rng.standard_normal(dim)
    return v / np.linalg.norm(v) * rng.uniform(rmin, rmax)


def sample_fiber_vector(rng: np.random.Generator, s: FinslerStructure, x) -> np.ndarray:
    """y on a sphere of radius in [0.5, 2]; Randers samples keep F > 0.2."""
    while True:
        y = sample_sphere(rng, s.dim)
        if s.family != "randers" or s.F(x, y) > RANDERS_MIN_F:
            return y
