"""Bergman metric of the polydisk and the operator norm of the Schwarzian.

The operator norm is a nonconvex maximization of a degree-four polynomial on
a sphere, so every value returned here is a lower bound found by multistart
projected gradient ascent.  Nothing in this module claims global optimality.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionError, MetricBlowUpError, SingularError
from .maps import MapExpr
from .schwarzian import schwarzian_tensor

N_DETERMINISTIC_STARTS = 8
DEFAULT_BUDGET = 4
DEFAULT_TOL = 1e-10
MAX_ITER = 3000
ZERO_TENSOR = 1e-13


def _weights(z) -> np.ndarray:
    z = np.asarray(z, dtype=complex)
    d = 1.0 - np.abs(z) ** 2
    if np.any(d <= 0):
        raise MetricBlowUpError(f"Bergman metric undefined at boundary point {z}")
    return d


def bergman_norm(z, v) -> float | np.ndarray:
    """sqrt(sum_i 2 |v_i|^2 / (1 - |z_i|^2)^2)."""
    d = _weights(z)
    v = np.asarray(v, dtype=complex)
    if v.shape[-1] != d.shape[-1]:
        raise DimensionError("vector and point dimensions differ")
    out = np.sqrt(np.sum(2 * np.abs(v) ** 2 / d**2, axis=-1))
    return float(out) if np.ndim(out) == 0 else out


@dataclass
class NormResult:
    value: float
    argmax_v: np.ndarray
    converged: bool
    restarts_used: int


@dataclass
class SupNormResult:
    value: float
    witness_z: np.ndarray
    grid_spec: dict
    lower_bound_only: bool = True
    failures: list = field(default_factory=list)
    norm: NormResult | None = None


def deterministic_starts(n: int) -> np.ndarray:
    """Coordinate directions, the uniform direction, then mixed pairs; at least 8."""
    starts = [np.eye(n, dtype=complex)[i] for i in range(n)]
    starts.append(np.ones(n, complex) / np.sqrt(n))
    pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
    for phase in (1.0, 1j, -1.0, -1j):
        for i, j in pairs:
            if len(starts) >= N_DETERMINISTIC_STARTS:
                break
            v = np.zeros(n, complex)
            v[i], v[j] = 1.0, phase
            starts.append(v / np.sqrt(2))
    return np.array(starts)


def _objective(M, g, x):
    """F(x) = sum_k g_k |x^t M_k x|^2 and its conjugate gradient 2 dF/d(conj x)."""
    Mx = np.einsum("...kij,...j->...ki", M, x)
    q = np.einsum("...ki,...i->...k", Mx, x)
    F = np.sum(g * np.abs(q) ** 2, axis=-1)
    grad = 4 * np.einsum("...k,...ki->...i", g * q, np.conj(Mx))
    return F, grad


def _ascend(M, g, x0, tol, max_iter=MAX_ITER):
    """Projected gradient ascent on the unit sphere, vectorized over the batch."""
    x = x0 / np.linalg.norm(x0, axis=-1, keepdims=True)
    F, grad = _objective(M, g, x)
    scale = np.maximum(np.sum(g, axis=-1) * np.max(np.abs(M), axis=(-3, -2, -1)) ** 2, 1e-300)
    eta = 0.25 / scale
    # a tensor at roundoff level (Moebius maps) has no landscape worth climbing
    done = (F <= 1e-300) | (np.max(np.abs(M), axis=(-3, -2, -1)) < ZERO_TENSOR)
    for _ in range(max_iter):
        if np.all(done):
            break
        radial = np.real(np.sum(np.conj(x) * grad, axis=-1, keepdims=True))
        tang = grad - radial * x
        cand = x + eta[..., None] * tang
        cand /= np.linalg.norm(cand, axis=-1, keepdims=True)
        Fc, gc = _objective(M, g, cand)
        accept = (Fc >= F) & ~done
        rel = (Fc - F) / np.maximum(Fc, 1e-300)
        x = np.where(accept[..., None], cand, x)
        grad = np.where(accept[..., None], gc, grad)
        F = np.where(accept, Fc, F)
        eta = np.where(accept, eta * 1.5, eta * 0.5)
        done |= accept & (rel < tol)
        done |= eta * scale < 1e-18
    return x, F, done


def _scaled_tensor(S, z):
    d = _weights(z)
    D = d / np.sqrt(2)  # Bergman-unit v = D x with |x| = 1
    M = S * D[..., None, :, None] * D[..., None, None, :]
    g = 2.0 / d**2
    return M, g, D


def operator_norm_batch(S, z, budget=DEFAULT_BUDGET, tol=DEFAULT_TOL, seed=0, starts=None):
    """Operator norms for a batch of tensors ``S[..., k, i, j]`` at points ``z``.

    Returns (values, argmax_v, converged).
    """
    S = np.asarray(S, dtype=complex)
    z = np.asarray(z, dtype=complex)
    n = S.shape[-1]
    M, g, D = _scaled_tensor(S, z)
    batch = S.shape[:-3]
    x_starts = list(deterministic_starts(n))
    rng = np.random.default_rng(seed)
    for _ in range(budget):
        r = rng.normal(size=n) + 1j * rng.normal(size=n)
        x_starts.append(r / np.linalg.norm(r))
    best_F = np.full(batch, -1.0)
    best_x = np.zeros(batch + (n,), complex)
    best_done = np.zeros(batch, bool)
    extra = []
    if starts is not None:
        v = np.asarray(starts, dtype=complex)
        x = v / D
        extra.append(np.broadcast_to(x, batch + (n,)))
    for x0 in extra + [np.broadcast_to(s, batch + (n,)) for s in x_starts]:
        x, F, done = _ascend(M, g, np.array(x0, dtype=complex), tol)
        better = F > best_F
        best_F = np.where(better, F, best_F)
        best_x = np.where(better[..., None], x, best_x)
        best_done = np.where(better, done, best_done)
    # canonical phase so the maximizer is reproducible: largest entry real positive
    idx = np.argmax(np.abs(best_x), axis=-1)
    lead = np.take_along_axis(best_x, idx[..., None], axis=-1)
    phase = np.where(np.abs(lead) > 0, lead / np.maximum(np.abs(lead), 1e-300), 1.0)
    best_x = best_x * np.conj(phase)
    return np.sqrt(np.maximum(best_F, 0.0)), best_x * D[..., :], best_done


def operator_norm_of_tensor(T, budget=DEFAULT_BUDGET, tol=DEFAULT_TOL, seed=0, starts=None) -> NormResult:
    values, vs, done = operator_norm_batch(T.S, T.point, budget, tol, seed, starts)
    return NormResult(float(values), vs, bool(done), budget)


def operator_norm(f: MapExpr, z, budget: int = DEFAULT_BUDGET, tol: float = DEFAULT_TOL, seed: int = 0, starts=None) -> NormResult:
    """sup over Bergman-unit v of the Bergman norm of S_f(z)(v)."""
    z = np.asarray(z, dtype=complex)
    _weights(z)
    T = schwarzian_tensor(f, z)
    return operator_norm_of_tensor(T, budget, tol, seed, starts)


def objective(f: MapExpr, z, v) -> float:
    """Bergman norm of S_f(z)(v) (no normalization of v)."""
    from .schwarzian import apply_operator

    T = schwarzian_tensor(f, z)
    return bergman_norm(z, apply_operator(T, v))


# -- sup over a region --------------------------------------------------------

def default_grid(n: int) -> tuple[int, int]:
    """(radii, phases) per axis: 12 x 16 for n = 2, shrinking with n."""
    if n == 2:
        return 12, 16
    per_axis = max(int(round(40000 ** (1.0 / n))), 4)
    radii = max(per_axis // 3, 2)
    return radii, max(per_axis // radii, 2)


def _axis_radii(radius, count):
    # clustered toward the outer radius
    return radius * np.sin(0.5 * np.pi * np.arange(count) / max(count - 1, 1))


def _product_points(axes):
    grids = np.meshgrid(*axes, indexing="ij")
    return np.stack([g.reshape(-1) for g in grids], axis=-1)


def _norms_on_points(f, pts, budget, tol, seed, chunk=4096):
    values = np.full(len(pts), -np.inf)
    failures = []
    for start in range(0, len(pts), chunk):
        block = pts[start:start + chunk]
        try:
            T = schwarzian_tensor(f, block)
            values[start:start + chunk] = operator_norm_batch(T.S, block, budget, tol, seed)[0]
        except SingularError:
            for off, p in enumerate(block):
                try:
                    T = schwarzian_tensor(f, p)
                    values[start + off] = float(operator_norm_batch(T.S, p, budget, tol, seed)[0])
                except SingularError as exc:
                    failures.append({"z": p, "error": str(exc)})
    return values, failures


def _best_index(values, pts):
    top = np.max(values)
    ties = np.flatnonzero(values == top)
    if len(ties) == 1:
        return int(ties[0])
    keys = [tuple(np.c_[pts[t].real, pts[t].imag].reshape(-1)) for t in ties]
    return int(ties[min(range(len(ties)), key=lambda i: keys[i])])


def sup_norm(
    f: MapExpr,
    radius: float,
    grid=None,
    refine: int = 2,
    budget: int = 0,
    tol: float = 1e-9,
    seed: int = 0,
    extra_points=None,
) -> SupNormResult:
    """Largest operator norm over a polar-product grid of |z_i| <= radius.

    ``grid`` is ``(radii, phases)`` per axis or a single int used for both.
    The best cell is refined ``refine`` times by halving its width.  The final
    value is recomputed at the witness with the full multistart budget.
    """
    n = f.n
    if not 0 < radius < 1:
        raise ValueError("radius must lie in (0, 1)")
    if grid is None:
        grid = default_grid(n)
    if isinstance(grid, int):
        grid = (grid, grid)
    n_r, n_p = grid
    radii = _axis_radii(radius, n_r)
    phases = 2 * np.pi * np.arange(n_p) / n_p
    axis = (radii[:, None] * np.exp(1j * phases[None, :])).reshape(-1)
    pts = _product_points([axis] * n)
    if extra_points is not None:
        pts = np.concatenate([pts, np.asarray(extra_points, complex).reshape(-1, n)])
    values, failures = _norms_on_points(f, pts, budget, tol, seed)
    if not np.any(np.isfinite(values)):
        raise SingularError("operator norm undefined at every grid point")
    best = pts[_best_index(values, pts)]
    best_val = float(np.max(values))

    dr = radius / max(n_r - 1, 1)
    dp = 2 * np.pi / n_p
    for _ in range(refine):
        dr, dp = dr / 2, dp / 2
        axes = []
        for c in best:
            r0, p0 = abs(c), np.angle(c)
            rs = np.clip(r0 + dr * np.array([-1.0, 0.0, 1.0]), 0.0, radius)
            ps = p0 + dp * np.array([-1.0, 0.0, 1.0])
            axes.append((rs[:, None] * np.exp(1j * ps[None, :])).reshape(-1))
        local = _product_points(axes)
        lv, lf = _norms_on_points(f, local, budget, tol, seed)
        failures.extend(lf)
        if np.max(lv) > best_val:
            best_val = float(np.max(lv))
            best = local[_best_index(lv, local)]

    final = operator_norm(f, best, budget=DEFAULT_BUDGET, tol=DEFAULT_TOL, seed=seed)
    spec = {"radius": radius, "radii": n_r, "phases": n_p, "refine": refine, "points": int(len(pts))}
    return SupNormResult(max(final.value, 0.0), best, spec, True, failures, final)
