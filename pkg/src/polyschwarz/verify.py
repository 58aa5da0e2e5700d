"""Inequality suites for the derivative and tensor bounds, with worst-case margins.

A suite samples points (and vectors), evaluates both sides of an inequality,
and records every case where the left side exceeds the right by more than the
tolerance.  Margins are ``bound - value``; the worst margin is their minimum.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .bergman import _axis_radii, _product_points, operator_norm_batch
from .comparison import SMALL_B_THRESHOLD, BoundParams, ray_directions
from .maps import MapExpr
from .mapio import map_from_dict, map_to_dict
from .schwarzian import schwarzian_tensor

CHECK_GRID = (4, 6)


@dataclass
class SuiteReport:
    name: str
    cases: int = 0
    violations: list = field(default_factory=list)
    worst_margin: float = math.inf
    status: str = "pass"  # pass | fail | skip
    notes: list = field(default_factory=list)
    check_margins: dict = field(default_factory=dict)

    def record(self, margins, tol, describe, check="bound", conclusion=True):
        """Fold an array of margins in; ``describe(k)`` builds the record for case k.

        Hypothesis checks (``conclusion=False``) can still fail the report
        but are kept out of ``worst_margin``.
        """
        margins = np.asarray(margins, dtype=float).reshape(-1)
        self.cases += margins.size
        if margins.size:
            worst = float(np.min(margins))
            self.check_margins[check] = min(self.check_margins.get(check, math.inf), worst)
            if conclusion:
                self.worst_margin = min(self.worst_margin, worst)
        tol = np.broadcast_to(np.asarray(tol, dtype=float).reshape(-1) if np.ndim(tol) else tol, margins.shape)
        for k in np.flatnonzero(margins < -tol):
            rec = describe(int(k))
            rec["margin"] = float(margins[k])
            self.violations.append(rec)
        if self.violations:
            self.status = "fail"

    def merge(self, other: "SuiteReport"):
        self.cases += other.cases
        self.worst_margin = min(self.worst_margin, other.worst_margin)
        self.violations.extend({"suite": other.name, **v} for v in other.violations)
        self.notes.extend(other.notes)
        for k, v in other.check_margins.items():
            self.check_margins[k] = min(self.check_margins.get(k, math.inf), v)
        if other.status == "fail":
            self.status = "fail"


# -- one-variable samples -----------------------------------------------------

def _blaschke(zeros):
    zeros = [complex(a) for a in zeros]

    def g(z):
        out = np.ones_like(z)
        for a in zeros:
            out = out * (z - a) / (1 - np.conj(a) * z)
        return out

    def dg(z):
        total = np.zeros_like(z)
        for i, a in enumerate(zeros):
            term = (1 - abs(a) ** 2) / (1 - np.conj(a) * z) ** 2
            for j, b in enumerate(zeros):
                if j != i:
                    term = term * (z - b) / (1 - np.conj(b) * z)
            total = total + term
        return total

    return g, dg


# name -> (g, g', hypothesis constant for kind i, for kind ii); None = hypothesis fails
DISK_SAMPLES = {
    "z": (lambda z: z, lambda z: np.ones_like(z), 1.0, 1.0),
    "z2": (lambda z: z * z, lambda z: 2 * z, 1.0, 1.0),
    "blaschke2": _blaschke([0.0, 0.5]) + (1.0, 1.0),
    "blaschke3": _blaschke([0.3, -0.6j, 0.2 + 0.1j]) + (1.0, 1.0),
    "inv_one_minus_z2": (lambda z: 1 / (1 - z * z), lambda z: 2 * z / (1 - z * z) ** 2, None, 1.0),
    "inv_one_minus_z": (lambda z: 1 / (1 - z), lambda z: 1 / (1 - z) ** 2, None, 2.0),
}


def disk_grid(grid=(40, 64), outer: float = 0.995) -> np.ndarray:
    n_r, n_p = grid
    radii = np.linspace(0.0, outer, n_r)
    phases = np.exp(2j * np.pi * np.arange(n_p) / n_p)
    return (radii[:, None] * phases[None, :]).reshape(-1)


def disk_lemma_check(sample: str, C: float = 1.0, kind: str = "i", grid=(40, 64), tol: float = 1e-9) -> SuiteReport:
    """|g| <= C gives |g'| <= C/(1-|z|^2); |g| <= C/(1-|z|^2) gives |g'| <= 4C/(1-|z|^2)^2.

    g is ``C`` times the named sample, whose own constant for the chosen kind
    is in ``DISK_SAMPLES``.  If the hypothesis fails on the grid the report
    has status "skip".
    """
    if kind not in ("i", "ii"):
        raise ValueError("kind is 'i' or 'ii'")
    base, dbase, c_i, c_ii = DISK_SAMPLES[sample]
    report = SuiteReport(f"disk_lemma_{kind}:{sample}")
    z = disk_grid(grid)
    w = 1 - np.abs(z) ** 2
    g = C * base(z)
    dg = C * dbase(z)
    const = c_i if kind == "i" else c_ii
    hyp_bound = None if const is None else (C * const if kind == "i" else C * const / w)
    if hyp_bound is None or np.any(np.abs(g) > hyp_bound + tol):
        report.status = "skip"
        report.notes.append(f"hypothesis fails for {sample} with kind {kind}")
        return report
    K = C * const
    bound = K / w if kind == "i" else 4 * K / w**2
    report.record(bound - np.abs(dg), tol * np.maximum(1.0, bound), lambda k: {"sample": sample, "z": z[k]})
    return report


# -- tensor bounds --------------------------------------------------------------

def check_points(n: int, radius: float, grid=CHECK_GRID) -> np.ndarray:
    n_r, n_p = grid
    radii = _axis_radii(radius, n_r)
    axis = (radii[:, None] * np.exp(2j * np.pi * (np.arange(n_p) + 0.5) / n_p)[None, :]).reshape(-1)
    return _product_points([axis] * n)


def unit_inf_vectors(n: int, count: int, rng) -> np.ndarray:
    """Vectors with |v|_inf = 1: half on the torus, half with one unimodular entry."""
    out = np.exp(2j * np.pi * rng.uniform(size=(count, n)))
    for c in range(count // 2):
        out[c] *= rng.uniform(0, 1, n)
        out[c, c % n] /= abs(out[c, c % n])
    return out


def _hypothesis(report, f, pts, S, alpha, tol, desc):
    """The lemmas assume ||S_f|| <= alpha; test it at every sampled point."""
    norms = operator_norm_batch(S, pts)[0]
    report.record(alpha - norms, tol * max(1.0, alpha),
                  lambda k: {"map": desc, "check": "norm_hypothesis", "z": pts[k], "norm": float(norms[k])},
                  "norm_hypothesis", conclusion=False)
    return norms


def measured_alpha(f: MapExpr, radius: float, grid=CHECK_GRID) -> float:
    """Largest operator norm over the same points the suites sample."""
    pts = check_points(f.n, radius, grid)
    T = schwarzian_tensor(f, pts)
    return float(np.max(operator_norm_batch(T.S, pts)[0]))


def tensor_bounds_check(f: MapExpr, alpha: float, radius: float = 0.9, grid=CHECK_GRID, vectors: int = 8,
                        seed: int = 0, tol: float = 1e-7) -> SuiteReport:
    """|S^k(v)| <= 3 n alpha/(1-|z|_inf^2) and |S^0(v)| <= (5n^2 alpha + 2n(n+1) alpha^2)/(1-|z|_inf^2)^2.

    Sampled over a polar grid of |z|_inf <= radius and |v|_inf = 1.
    """
    n = f.n
    desc = map_to_dict(f)
    report = SuiteReport("tensor_bounds")
    pts = check_points(n, radius, grid)
    T = schwarzian_tensor(f, pts)
    _hypothesis(report, f, pts, T.S, alpha, tol, desc)
    rng = np.random.default_rng(seed)
    V = unit_inf_vectors(n, vectors, rng)
    w = 1 - np.max(np.abs(pts), axis=-1) ** 2
    sk = np.abs(np.einsum("pkij,vi,vj->pvk", T.S, V, V)).max(axis=-1)
    s0 = np.abs(np.einsum("pij,vi,vj->pv", T.S0, V, V))
    b1 = (3 * n * alpha / w)[:, None]
    b2 = ((5 * n * n * alpha + 2 * n * (n + 1) * alpha**2) / w**2)[:, None]
    nv = len(V)

    def describe(check):
        return lambda k: {"map": desc, "check": check, "z": pts[k // nv], "v": V[k % nv]}

    report.record(b1 - sk, tol * np.maximum(1.0, b1 + 0 * sk), describe("Sk"), "Sk")
    report.record(b2 - s0, tol * np.maximum(1.0, b2 + 0 * s0), describe("S0"), "S0")
    return report


def AB_bounds_check(f: MapExpr, alpha: float, zetas=None, radius: float = 0.9, grid=CHECK_GRID,
                    rays: int = 8, seed: int = 0, tol: float = 1e-7) -> SuiteReport:
    """(1-|z|^2)|A| <= 1.6 n sqrt(n) alpha, (1-|z|^2)^2 |B| <= c1 alpha + c2 alpha^2,
    and (1-|z|^2)^2 |B| <= 4.5 n sqrt(n) alpha when n sqrt(n) alpha <= 3 sqrt 2 - 4.

    A_kj = sum_i zeta_i S^k_ij, B_j = sum_i zeta_i S^0_ij; |A| is the spectral norm.
    """
    n = f.n
    desc = map_to_dict(f)
    report = SuiteReport("AB_bounds")
    if zetas is None:
        zetas = ray_directions(n, rays, seed)
    zetas = np.asarray(zetas, dtype=complex).reshape(-1, n)
    if np.any(np.abs(zetas) > 1 + 1e-12):
        raise ValueError("zeta must lie in the closed polydisk")
    pts = check_points(n, radius, grid)
    T = schwarzian_tensor(f, pts)
    _hypothesis(report, f, pts, T.S, alpha, tol, desc)
    bp = BoundParams(n, alpha)
    w = (1 - np.max(np.abs(pts), axis=-1) ** 2)[:, None]
    A = np.einsum("ri,pkij->prkj", zetas, T.S)
    B = np.einsum("ri,pij->prj", zetas, T.S0)
    a_norm = np.linalg.norm(A, ord=2, axis=(-2, -1))
    b_norm = np.linalg.norm(B, axis=-1)
    nr = len(zetas)

    def describe(check):
        return lambda k: {"map": desc, "check": check, "z": pts[k // nr], "zeta": zetas[k % nr]}

    lhs_a = w * a_norm
    lhs_b = w**2 * b_norm
    report.record(bp.tau - lhs_a, tol * max(1.0, bp.tau), describe("A"), "A")
    cb = bp.c1 * alpha + bp.c2 * alpha**2
    report.record(cb - lhs_b, tol * max(1.0, cb), describe("B"), "B")
    small = n * math.sqrt(n) * alpha
    if small <= SMALL_B_THRESHOLD:
        report.record(4.5 * small - lhs_b, tol * max(1.0, 4.5 * small), describe("B_small"), "B_small")
        report.notes.append("small-alpha B bound active")
    return report


# -- aggregate ------------------------------------------------------------------

def default_config(seed: int = 0) -> dict:
    from .maps import Automorphism, catalog, perturbed_identity

    rng = np.random.default_rng(seed)
    maps = [map_to_dict(Automorphism([0.3, 0.0])), map_to_dict(Automorphism([0.2, 0.0]))]
    for _ in range(3):
        a = rng.uniform(0, 0.5, 2) * np.exp(2j * np.pi * rng.uniform(size=2))
        maps.append(map_to_dict(Automorphism(a)))
    maps.append(map_to_dict(perturbed_identity(2, [(0, (2, 0), 0.05), (1, (0, 2), 0.05)])))
    maps.append(map_to_dict(perturbed_identity(2, [(0, (0, 2), 0.02), (1, (2, 0), 0.02)])))
    maps.append(map_to_dict(catalog(2, seed)["identity"]))
    cases = [{"suite": "disk", "sample": s, "kind": k} for s in DISK_SAMPLES for k in ("i", "ii")]
    for m in maps:
        cases.append({"suite": "tensor_bounds", "map": m, "radius": 0.9})
        cases.append({"suite": "AB_bounds", "map": m, "radius": 0.9})
    return {"seed": seed, "cases": cases}


def run_suite(config: dict | None = None) -> SuiteReport:
    """Run the cases listed in ``config["cases"]`` and aggregate.

    Case kinds: {"suite": "disk", "sample", "kind", "C"}, and
    {"suite": "tensor_bounds" | "AB_bounds", "map": description, "radius",
    "alpha" (measured when absent), "alpha_scale" (multiplies alpha)}.
    """
    config = config or {}
    seed = int(config.get("seed", 0))
    total = SuiteReport("suite")
    skipped = 0
    for case in config.get("cases", []):
        kind = case["suite"]
        if kind == "disk":
            rep = disk_lemma_check(case["sample"], case.get("C", 1.0), case.get("kind", "i"))
            if rep.status == "skip":
                skipped += 1
                continue
        elif kind in ("tensor_bounds", "AB_bounds"):
            f = map_from_dict(case["map"])
            radius = case.get("radius", 0.9)
            alpha = case.get("alpha")
            if alpha is None:
                alpha = measured_alpha(f, radius)
            alpha *= case.get("alpha_scale", 1.0)
            check = tensor_bounds_check if kind == "tensor_bounds" else AB_bounds_check
            rep = check(f, alpha, radius=radius, seed=seed)
        else:
            raise ValueError(f"unknown suite {kind!r}")
        total.merge(rep)
    if skipped:
        total.notes.append(f"{skipped} disk cases skipped (hypothesis not met)")
    if total.cases == 0:
        total.worst_margin = 0.0
    return total
