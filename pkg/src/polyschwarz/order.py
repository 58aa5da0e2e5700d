"""Order of the normalized families: Moebius extremals, dilation contraction,
growth bounds and empirical covering radii.

Three kinds of number appear here and are kept apart: closed forms (the
Moebius order n + 1), search results (always lower bounds on a supremum), and
formula upper bounds evaluated from caller-supplied inputs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize

from .bergman import operator_norm, sup_norm
from .errors import NotNormalizedError, PreconditionError, SingularError
from .maps import (
    Compose,
    Dilation,
    MapExpr,
    Normalizer,
    check_normalized,
    eval_map,
    grad_jacobian,
    map_jet,
    moebius_from_l,
    perturbed_identity,
)

COARSE_GRID = (6, 8)


@dataclass
class MoebiusOrder:
    value: float
    extremal_a: np.ndarray
    search_value: float
    search_a: np.ndarray


@dataclass
class OrderReport:
    n: int
    alpha: float
    r: float
    lambda_lower: float
    witness: dict
    C_r: float
    growth_bound_at: list = field(default_factory=list)
    lower_bound_only: bool = True


@dataclass
class CoveringEstimate:
    center: np.ndarray
    radius_lower: float
    boundary_samples: int
    s0_proxy: float
    half_radius_min: float | None = None
    half_radius_ok: bool | None = None
    failures: list = field(default_factory=list)


@dataclass
class DilationReport:
    r: float
    s: float
    sup_f: float
    sup_g: float
    ratio: float
    predicted: float
    grad_ratio_error: float
    ok: bool
    witness_f: np.ndarray
    witness_g: np.ndarray


def C_of_r(r: float) -> float:
    """(1 - r^2)/(1 - 5 r^2), the Lipschitz exponent for r^2 < 1/5."""
    if not 0 <= r or r * r >= 0.2:
        raise PreconditionError("need 0 <= r and r^2 < 1/5")
    return (1 - r * r) / (1 - 5 * r * r)


def moebius_order(n: int, starts: int = 16, seed: int = 0) -> MoebiusOrder:
    """Maximize (n+1)|a| over sum |a_i| <= 1 (phases do not matter).

    The maximum n + 1 sits at a vertex; a constrained numerical search over
    the simplex is run alongside as an independent check.
    """
    if n < 2:
        raise PreconditionError("n must be at least 2")
    rng = np.random.default_rng(seed)
    cons = [{"type": "ineq", "fun": lambda m: 1.0 - np.sum(m), "jac": lambda m: -np.ones_like(m)}]
    best_val, best_m = -1.0, None
    for _ in range(starts):
        m0 = rng.dirichlet(np.ones(n)) * rng.uniform(0.2, 1.0)
        res = minimize(lambda m: -np.sum(m * m), m0, jac=lambda m: -2 * m, method="SLSQP",
                       bounds=[(0.0, 1.0)] * n, constraints=cons, options={"ftol": 1e-15, "maxiter": 500})
        val = (n + 1) * math.sqrt(max(-res.fun, 0.0))
        if val > best_val:
            best_val, best_m = val, res.x
    extremal = np.zeros(n)
    extremal[0] = 1.0
    return MoebiusOrder(float(n + 1), extremal, best_val, best_m)


def moebius_objective(a) -> float:
    a = np.asarray(a, dtype=complex)
    return (len(a) + 1) * float(np.linalg.norm(a))


def grad_jacobian_at_zero(f: MapExpr, tol: float = 1e-10) -> np.ndarray:
    check_normalized(f, tol)
    return grad_jacobian(f, np.zeros(f.n, complex))


# -- dilation ---------------------------------------------------------------

def dilation_factor(r: float, s: float) -> float:
    return s * ((1 - s * s * r * r) / (1 - r * r)) ** 2


def dilation_contraction_check(f: MapExpr, r: float, s: float, grid=COARSE_GRID, refine: int = 2,
                               tol: float = 1e-7, seed: int = 0, sup_f=None) -> DilationReport:
    """Compare sup-norms of f and g(z) = f(sz)/s on |z|_inf <= r.

    The sup of f is also sampled at s times the witness of g, starting the
    ascent from g's maximizing vector, so the two grid lower bounds are
    comparable.  ``sup_f`` may carry a precomputed SupNormResult for f.
    """
    if not 0 < r or r * r >= 0.2:
        raise PreconditionError("need r > 0 and r^2 < 1/5")
    if not 0 < s <= 1:
        raise PreconditionError("s must lie in (0, 1]")
    g = Dilation(s, f)
    res_g = sup_norm(g, r, grid=grid, refine=refine, seed=seed)
    res_f = sup_norm(f, r, grid=grid, refine=refine, seed=seed) if sup_f is None else sup_f
    val_f, wit_f = res_f.value, res_f.witness_z
    if res_g.norm is not None and res_g.value > 0:
        at = s * res_g.witness_z
        cand = operator_norm(f, at, seed=seed, starts=res_g.norm.argmax_v)
        if cand.value > val_f:
            val_f, wit_f = cand.value, at
    predicted = dilation_factor(r, s)
    if val_f <= 1e-12:
        ratio = 0.0 if res_g.value <= 1e-12 else math.inf
    else:
        ratio = res_g.value / val_f
    z0 = np.zeros(f.n, complex)
    gf = np.linalg.norm(grad_jacobian(f, z0))
    gg = np.linalg.norm(grad_jacobian(g, z0))
    grad_err = abs(gg - s * gf)
    ok = ratio <= predicted + tol and grad_err <= 1e-10 * max(1.0, gf)
    return DilationReport(r, s, val_f, res_g.value, ratio, predicted, grad_err, ok, wit_f, res_g.witness_z)


# -- growth -----------------------------------------------------------------

def growth_bound(alpha: float, alpha1: float, mu1: float, r: float) -> float:
    """mu1 / alpha1^C(r) * alpha^C(r)."""
    if not alpha1 > 0 or alpha < alpha1:
        raise PreconditionError("need alpha >= alpha1 > 0")
    if not mu1 > 0:
        raise PreconditionError("mu1 must be positive")
    c = C_of_r(r)
    return mu1 * (alpha / alpha1) ** c


def _candidate(n, r, rho, eps):
    a = np.zeros(n, complex)
    a[0] = rho / r
    m = moebius_from_l(a)
    if eps == 0:
        return m
    exps = tuple(2 if j == 0 else 0 for j in range(n))
    return Compose(perturbed_identity(n, [(0, exps, eps)]), m)


def _measured_sup(f, r, seed):
    try:
        res = sup_norm(f, r, grid=COARSE_GRID, refine=1, seed=seed)
    except SingularError:
        return math.inf
    return math.inf if res.failures else res.value


def mu_r_lower(n: int, alpha: float, r: float, budget: int = 4, seed: int = 0,
               alpha1: float | None = None) -> OrderReport:
    """Search lower bound for mu_r(alpha) = sup |grad J_f(0)| over F_{alpha, r}.

    The family is P o M with M = z/(1 - (rho/r) z_1) and P = z + eps (z_1^2, 0, ...);
    both push grad J(0) along e_1, giving (n+1) rho / r + 2 eps.  For each of
    ``budget`` values of rho the largest eps with measured sup-norm <= alpha
    is found by bisection.  The pure Moebius vertex (n+1)/r is always a
    candidate, so budget 0 returns it.
    """
    if not 0 < r < 1:
        raise PreconditionError("r must lie in (0, 1)")
    if alpha < 0:
        raise PreconditionError("alpha must be nonnegative")
    best = (n + 1) / r
    witness = {"rho": 1.0, "eps": 0.0, "a": [1.0 / r] + [0.0] * (n - 1)}
    if budget > 0 and alpha > 0:
        for rho in np.linspace(0.5, 0.95, budget):
            lo, hi = 0.0, 1.0
            if _measured_sup(_candidate(n, r, rho, hi), r, seed) <= alpha:
                lo = hi
            else:
                for _ in range(8):
                    mid = 0.5 * (lo + hi)
                    if _measured_sup(_candidate(n, r, rho, mid), r, seed) <= alpha:
                        lo = mid
                    else:
                        hi = mid
            val = (n + 1) * rho / r + 2 * lo
            if val > best:
                best = val
                witness = {"rho": float(rho), "eps": lo, "a": [float(rho / r)] + [0.0] * (n - 1)}
    c_r = C_of_r(r) if r * r < 0.2 else math.nan
    report = OrderReport(n, alpha, r, best, witness, c_r)
    if alpha1 is not None and r * r < 0.2 and alpha >= alpha1 > 0:
        report.growth_bound_at.append((alpha, growth_bound(alpha, alpha1, best, r)))
    return report


# -- covering ---------------------------------------------------------------

def torus_points(n: int, radius: float, samples: int) -> np.ndarray:
    """``samples`` phases per axis on |z_i| = radius."""
    ph = np.exp(2j * np.pi * np.arange(samples) / samples)
    grids = np.meshgrid(*([radius * ph] * n), indexing="ij")
    return np.stack([g.reshape(-1) for g in grids], axis=-1)


def covering_estimate(g: MapExpr, radius: float, boundary_samples: int = 32, a=None,
                      tol: float = 1e-12) -> CoveringEstimate:
    """min |g(z) - g(0)| over the torus |z_i| = radius.

    This bounds from above the radius of the ball around g(0) covered by the
    image of the truncated polydisk, and serves as an s0 proxy at this
    truncation.  When ``a`` is given, f = g/(1 - a.g) is the un-normalized map
    with normalization g, and min |f| >= radius_lower / 2 is tested.
    """
    if not 0 < radius < 1:
        raise PreconditionError("radius must lie in (0, 1)")
    n = g.n
    center = eval_map(g, np.zeros(n, complex))
    if np.max(np.abs(center)) > 1e-10:
        raise NotNormalizedError(f"g(0) = {center} is not 0")
    pts = torus_points(n, radius, boundary_samples)
    failures = []
    try:
        vals = eval_map(g, pts)
        keep = np.ones(len(pts), bool)
    except SingularError:
        vals = np.zeros_like(pts)
        keep = np.zeros(len(pts), bool)
        for i, p in enumerate(pts):
            try:
                vals[i] = eval_map(g, p)
                keep[i] = True
            except SingularError as exc:
                failures.append({"z": p, "error": str(exc)})
    dist = np.linalg.norm(vals[keep] - center, axis=-1)
    radius_lower = float(np.min(dist))
    est = CoveringEstimate(center, radius_lower, int(len(pts)), radius_lower, failures=failures)
    if a is not None:
        f = Compose(Normalizer(-np.asarray(a, dtype=complex)), g)
        fv = eval_map(f, pts[keep])
        est.half_radius_min = float(np.min(np.linalg.norm(fv, axis=-1)))
        est.half_radius_ok = est.half_radius_min >= radius_lower / 2 - tol
    return est


def smallest_singular_value(f: MapExpr, z) -> float:
    """eta(z) = min over |v| = 1 of |Df(z) v|."""
    jac = map_jet(f, np.asarray(z, dtype=complex)).jacobian
    return float(np.linalg.svd(jac, compute_uv=False)[-1])


def local_covering_bound(f: MapExpr, z, s0_proxy, alpha: float) -> float:
    """(1/2)(1 - |z|_inf) eta(z) s0(n, beta) with beta = alpha + 2 sqrt 2 |z|_inf.

    ``s0_proxy`` is a number or a callable (n, beta) -> s0.
    """
    z = np.asarray(z, dtype=complex)
    zi = float(np.max(np.abs(z)))
    if zi >= 1:
        raise PreconditionError("z must lie in the polydisk")
    beta = alpha + 2 * math.sqrt(2) * zi
    s0 = s0_proxy(f.n, beta) if callable(s0_proxy) else float(s0_proxy)
    eta = smallest_singular_value(f, z)
    if eta < 1e-14:
        raise SingularError("Df(z) is singular", eta)
    return 0.5 * (1 - zi) * eta * s0


def grad_jacobian_bound_check(f: MapExpr, z, lambda_beta: float) -> dict:
    """|grad J_f(z)|_inf <= (lambda_beta + 2|z|_inf)/(1 - |z|_inf^2) |J_f(z)|."""
    z = np.asarray(z, dtype=complex)
    zi = float(np.max(np.abs(z)))
    if zi >= 1:
        raise PreconditionError("z must lie in the polydisk")
    mj = map_jet(f, z)
    if abs(mj.det) < 1e-14:
        raise SingularError("Df(z) is singular", abs(mj.det))
    lhs = float(np.max(np.abs(grad_jacobian(f, z))))
    rhs = (lambda_beta + 2 * zi) / (1 - zi * zi) * abs(complex(mj.det))
    return {"lhs": lhs, "rhs": rhs, "margin": rhs - lhs, "ok": lhs <= rhs * (1 + 1e-12)}
