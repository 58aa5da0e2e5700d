"""Schwarzian tensor S^k_ij, the companion coefficients S^0_ij, and identity checks."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionError, TensorUndefinedError
from .jets import Jet3, jet_elementary
from .maps import JACOBIAN_FLAG_THRESHOLD, Compose, MapExpr, eval_map, map_jet


@dataclass(frozen=True, eq=False)
class SchwarzianTensor:
    """Tensor data at a point or batch of points.

    ``S[..., k, i, j]`` is S^k_ij, ``S0[..., i, j]`` is S^0_ij.  ``u0`` is the
    jet (order 2) of J_f^(-1/(n+1)), principal branch.
    """

    n: int
    point: np.ndarray
    S: np.ndarray
    S0: np.ndarray
    jacobian: np.ndarray
    logJ_grad: np.ndarray
    u0: Jet3

    def max_entry(self) -> float:
        return float(np.max(np.abs(self.S), initial=0.0))


def _log_jacobian_derivatives(jac, second, third):
    """First and second derivatives of log det Df."""
    dinv = np.linalg.inv(jac)
    # M_i = Df^{-1} d_i Df,  (d_i Df)[l, j] = second[l, j, i]
    m = np.einsum("...al,...lbi->...iab", dinv, second)
    grad = np.einsum("...iaa->...i", m)
    hess = np.einsum("...al,...laij->...ij", dinv, third) - np.einsum("...jab,...iba->...ij", m, m)
    return dinv, grad, hess


def tensor_from_jet(mj) -> SchwarzianTensor:
    n = mj.n
    jac = mj.jacobian
    det = np.linalg.det(jac)
    if np.any(~np.isfinite(det)) or np.any(np.abs(det) < JACOBIAN_FLAG_THRESHOLD):
        worst = float(np.min(np.abs(det)))
        raise TensorUndefinedError(f"Jacobian determinant too small (|J| = {worst:.3e})", worst)
    second = mj.second
    dinv, lg, lh = _log_jacobian_derivatives(jac, second, mj.third)

    eye = np.eye(n)
    S = np.einsum("...lij,...kl->...kij", second, dinv)
    S = S - (eye[:, :, None] * lg[..., None, None, :] + eye[:, None, :] * lg[..., None, :, None]) / (n + 1)

    # jet of J itself, then the power J^(-1/(n+1))
    jet_J = Jet3(det, det[..., None] * lg, det[..., None, None] * (lh + lg[..., :, None] * lg[..., None, :]))
    u0 = jet_elementary(jet_J, "pow", -1.0 / (n + 1))
    S0 = (u0.hess - np.einsum("...k,...kij->...ij", u0.grad, S)) / u0.value[..., None, None]
    return SchwarzianTensor(n, mj.point, S, S0, jac, lg, u0)


def schwarzian_tensor(f: MapExpr, z) -> SchwarzianTensor:
    return tensor_from_jet(map_jet(f, z))


def apply_operator(T: SchwarzianTensor, v) -> np.ndarray:
    """Component k is v^t S^k v."""
    v = np.asarray(v, dtype=complex)
    if v.shape[-1] != T.n:
        raise DimensionError(f"tangent vector has {v.shape[-1]} entries, tensor has n = {T.n}")
    return np.einsum("...kij,...i,...j->...k", T.S, v, v)


def apply_s0(T: SchwarzianTensor, v) -> np.ndarray:
    v = np.asarray(v, dtype=complex)
    return np.einsum("...ij,...i,...j->...", T.S0, v, v)


def chain_rule_residual(g: MapExpr, f: MapExpr, z) -> float:
    """Max deviation between S(g o f) and S(f) + pulled-back S(g)."""
    z = np.asarray(z, dtype=complex)
    direct = schwarzian_tensor(Compose(g, f), z)
    tf = schwarzian_tensor(f, z)
    w = eval_map(f, z)
    tg = schwarzian_tensor(g, w)
    df = tf.jacobian
    dinv = np.linalg.inv(df)
    pulled = np.einsum("...rlm,...li,...mj,...kr->...kij", tg.S, df, df, dinv)
    return float(np.max(np.abs(direct.S - tf.S - pulled)))


def hessian_residual(f: MapExpr, z, v) -> float:
    """|Hess(u0)(v,v) - S_f(v).grad u0 - S0_f(v) u0| for u0 = J_f^(-1/(n+1))."""
    T = schwarzian_tensor(f, z)
    v = np.asarray(v, dtype=complex)
    u = T.u0
    hess_vv = np.einsum("...ij,...i,...j->...", u.hess, v, v)
    rhs = np.einsum("...k,...k->...", apply_operator(T, v), u.grad) + apply_s0(T, v) * u.value
    return float(np.max(np.abs(hess_vv - rhs)))


def canonical_residual(T: SchwarzianTensor) -> float:
    """max_i |sum_j S^j_ij|."""
    trace = np.einsum("...jij->...i", T.S)
    return float(np.max(np.abs(trace), initial=0.0))


def off_pattern_max(T: SchwarzianTensor) -> float:
    """Largest |S^k_ij| with k not in {i, j}."""
    n = T.n
    k, i, j = np.indices((n, n, n))
    mask = (k != i) & (k != j)
    return float(np.max(np.abs(T.S[..., mask]), initial=0.0))


def s0_from_derivative_identities(f: MapExpr, z, step: float = 1e-5) -> np.ndarray:
    """Second route to S^0_ij from derivatives of the S^k_ij field.

    Uses the identities
      S0_ii = (-sum_k d_k S^k_ii + sum_{k,j} S^k_ij S^j_ki) / (n-1)
      S0_ij = d_j S^i_ii - d_i S^i_ij + sum_k S^k_ii S^i_kj - sum_k S^k_ij S^i_ki   (i != j)
    with the d_k taken by central differences along the coordinate axes.
    """
    z = np.asarray(z, dtype=complex)
    n = z.shape[-1]
    S = schwarzian_tensor(f, z).S
    dS = np.empty((n,) + S.shape, complex)  # dS[m, k, i, j] = d_m S^k_ij
    for m in range(n):
        e = np.zeros(n, complex)
        e[m] = step
        dS[m] = (schwarzian_tensor(f, z + e).S - schwarzian_tensor(f, z - e).S) / (2 * step)
    out = np.empty((n, n), complex)
    for i in range(n):
        for j in range(n):
            if i == j:
                lin = -sum(dS[k, k, i, i] for k in range(n))
                quad = sum(S[k, i, jj] * S[jj, k, i] for k in range(n) for jj in range(n))
                out[i, i] = (lin + quad) / (n - 1)
            else:
                out[i, j] = (
                    dS[j, i, i, i]
                    - dS[i, i, i, j]
                    + sum(S[k, i, i] * S[i, k, j] for k in range(n))
                    - sum(S[k, i, j] * S[i, k, i] for k in range(n))
                )
    return out
