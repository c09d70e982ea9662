"""Legendre duality between a Finsler structure F and its Cartan dual K.

The fiber map y -> p = y_lower(x, y) is inverted by damped Newton at value
level.  Taylor jets of the inverse are then obtained by continuing the
iteration in jet arithmetic, and K^2 is assembled as twice the Legendre
transform of F^2/2, which is stationary in y and therefore exact one order
beyond the inverse map itself.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import jets
from .errors import SolverError, ZeroSectionError
from .finsler import (
    FinslerStructure,
    eval_F2_jet,
    fundamental_data,
    metric_inverse,
    sample_sphere,
)
from .jets import Jet


@dataclass(frozen=True)
class SolverSettings:
    tol: float = 1e-12
    max_iter: int = 50
    restarts: int = 10
    restart_seed: int = 0
    jet_steps: int = 3


@dataclass(frozen=True)
class CartanDual:
    base: FinslerStructure
    solver: SolverSettings = field(default_factory=SolverSettings)

    @property
    def dim(self) -> int:
        return self.base.dim

    def K2(self, x, p) -> float:
        # value only: K^2(p) = F^2(y(p)), no jets needed
        y = legendre_inverse(self, x, p).y_of_p
        return float(self.base.F2(np.asarray(x, dtype=float), y))

    def K(self, x, p) -> float:
        return float(np.sqrt(self.K2(x, p)))


@dataclass(frozen=True)
class LegendreSolution:
    y_of_p: np.ndarray
    iterations: int
    residual: float
    restarts: int = 0


@dataclass(frozen=True)
class CartanData:
    """Fundamental quantities of K at (x, p).

    ``g_star`` is g*^{ij}, ``g_star_inv`` is g*_{ij}, ``p_upper`` is p^i and
    ``cartan`` is C^{ijk} = -1/4 d^3 K^2.  ``K2_jet`` is the jet of K^2 in
    the p variables.
    """

    K2: float
    p_upper: np.ndarray
    g_star: np.ndarray
    g_star_inv: np.ndarray
    cartan: np.ndarray
    K2_jet: Jet
    solution: LegendreSolution

    @property
    def K(self) -> float:
        return float(np.sqrt(self.K2))


def legendre_forward(s: FinslerStructure, x, y) -> np.ndarray:
    return 0.5 * eval_F2_jet(s, x, y, order=1).derivative_tensor(1)


def _newton(s, x, p, y, settings, tol):
    def resid(v):
        jet = eval_F2_jet(s, x, v, order=2)
        g = 0.5 * jet.derivative_tensor(2)
        r = 0.5 * jet.derivative_tensor(1) - p
        return g, r, float(np.max(np.abs(r)))

    g, r, rn = resid(y)
    for it in range(settings.max_iter + 1):
        if rn <= tol:
            return y, it, rn
        if it == settings.max_iter:
            break
        step = np.linalg.solve(g, r)
        t = 1.0
        while True:
            cand = y - t * step
            if np.any(cand):
                try:
                    cg, cr, crn = resid(cand)
                except ArithmeticError:
                    crn = np.inf
                if crn < rn:
                    break
            t *= 0.5
            if t < 1e-10:
                return y, it, rn
        y, g, r, rn = cand, cg, cr, crn
    return y, settings.max_iter, rn


def legendre_inverse(d: CartanDual, x, p) -> LegendreSolution:
    """The fiber preimage y of p under the Legendre map at x.

    Convergence means max_i |y_i(x, y) - p_i| <= tol * max(1, |p|_inf).
    """
    x = np.asarray(x, dtype=float)
    p = np.asarray(p, dtype=float)
    if not np.any(p):
        raise ZeroSectionError("p lies on the zero section")
    s, st = d.base, d.solver
    tol = st.tol * max(1.0, float(np.max(np.abs(p))))
    seed = fundamental_data(s, x, p).g_inv @ p
    y, it, rn = _newton(s, x, p, seed, st, tol)
    if rn <= tol:
        return LegendreSolution(y, it, rn)
    rng = np.random.default_rng(st.restart_seed)
    scale = float(np.linalg.norm(p))
    for k in range(1, st.restarts + 1):
        y, it, rn = _newton(s, x, p, sample_sphere(rng, s.dim, scale, scale), st, tol)
        if rn <= tol:
            return LegendreSolution(y, it, rn, restarts=k)
    raise SolverError(f"Legendre inverse did not converge at p={p.tolist()} (residual {rn:.3g})")


def _inverse_map_jet(s: FinslerStructure, x, y0, p0, order: int, steps: int):
    """Jets of y(p) and of the displacement Taylor polynomial of F^2 at y0."""
    n = s.dim
    F2u = eval_F2_jet(s, x, y0, order=order)        # polynomial in u = y - y0
    lower = 0.5 * F2u.grad()                        # y_lower(y0 + u), order - 1
    g0_inv = metric_inverse(0.5 * F2u.derivative_tensor(2))
    ctx_q = jets.context(n, order - 1)
    shift = lower.value
    # expand about the exact image of y0, which differs from p0 by the solver residual
    target = jets.variables(ctx_q, shift)
    delta = Jet.zeros(ctx_q, (n,))
    poly = lower - shift
    # frozen-Jacobian Newton: every step fixes one more Taylor degree
    for _ in range(max(steps, order - 1)):
        resid = poly.compose(delta) + shift - target
        delta = delta - jets.lincomb(g0_inv, resid)
    return delta, F2u


def cartan_data(d: CartanDual, x, p, order: int = 4) -> CartanData:
    """K^2 jet of the given order in the p variables plus its derived tensors."""
    x = np.asarray(x, dtype=float)
    p = np.asarray(p, dtype=float)
    sol = legendre_inverse(d, x, p)
    s, n = d.base, d.dim
    delta, F2u = _inverse_map_jet(s, x, sol.y_of_p, p, order, d.solver.jet_steps)
    ctx_p = jets.context(n, order)
    pv = jets.variables(ctx_p, p)
    dy = delta.padded(order)
    y_of_p = dy + sol.y_of_p
    # K^2 = 2 (p.y - F^2(y)/2) at y = y(p); the missing top-degree terms of y(p) drop out
    K2 = 2.0 * jets.dot(pv, y_of_p) - F2u.compose(dy)
    g_star = 0.5 * K2.derivative_tensor(2) if order >= 2 else None
    return CartanData(
        K2=K2.value,
        p_upper=0.5 * K2.derivative_tensor(1),
        g_star=g_star,
        g_star_inv=metric_inverse(g_star, "g*") if g_star is not None else None,
        cartan=-0.25 * K2.derivative_tensor(3) if order >= 3 else None,
        K2_jet=K2,
        solution=sol,
    )


def cartan_euler_check(d: CartanDual, x, p, lambdas=(0.5, 2.0, 7.0)) -> dict[str, float]:
    """Residuals of the Euler identities for K and of 1-homogeneity of K.

    Pass ``lambdas=()`` to skip the homogeneity solves.
    """
    p = np.asarray(p, dtype=float)
    cd = cartan_data(d, x, p, order=3)
    res = {
        "pupper_vs_gstar_p": float(np.max(np.abs(cd.p_upper - cd.g_star @ p))),
        "p_vs_gstarinv_pupper": float(np.max(np.abs(p - cd.g_star_inv @ cd.p_upper))),
        "K2_vs_gstar_pp": abs(p @ cd.g_star @ p - cd.K2),
        "K2_vs_p_pupper": abs(p @ cd.p_upper - cd.K2),
        "cartan_contraction": float(np.max(np.abs(np.einsum("ijk,k->ij", cd.cartan, p)))),
    }
    if lambdas:
        K = cd.K
        res["homogeneity"] = max(abs(d.K(x, lam * p) - lam * K) for lam in lambdas)
    return res
