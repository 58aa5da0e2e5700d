"""Expression trees for the locally biholomorphic maps used throughout.

Every map kind is a small immutable node.  Evaluation is written once, in
terms of generic arithmetic, so the same code path serves plain complex
points (``eval_map``) and Taylor jets (``map_jet``).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import DimensionError, NotNormalizedError, PreconditionError, SingularPointError
from .jets import Jet3, seed_point

DENOM_THRESHOLD = 1e-13
JACOBIAN_FLAG_THRESHOLD = 1e-10
MAX_POLY_DEGREE = 6


def _value(x):
    return x.value if isinstance(x, Jet3) else np.asarray(x)


def _check_denominator(den, what):
    mag = np.abs(_value(den))
    if np.any(mag < DENOM_THRESHOLD):
        worst = float(np.min(mag))
        raise SingularPointError(f"{what} vanishes at the evaluation point (|{what}| = {worst:.3e})", worst)


def _as_complex_vector(a, n=None, name="a"):
    a = np.asarray(a, dtype=complex).reshape(-1)
    if n is not None and a.shape[0] != n:
        raise DimensionError(f"{name} must have {n} entries, got {a.shape[0]}")
    return a


class MapExpr:
    """Base node.  Subclasses implement ``apply`` on a list of coordinates."""

    n: int

    def apply(self, zs: list) -> list:
        raise NotImplementedError

    def __call__(self, z):
        return eval_map(self, z)


@dataclass(frozen=True, eq=False)
class Identity(MapExpr):
    n: int

    def __post_init__(self):
        if self.n < 2:
            raise DimensionError("maps need n >= 2")

    def apply(self, zs):
        return list(zs)


@dataclass(frozen=True, eq=False)
class Moebius(MapExpr):
    """z -> (l_1/l_0, ..., l_n/l_0); row i of ``matrix`` holds l_i's coefficients
    (constant term first)."""

    matrix: np.ndarray

    def __post_init__(self):
        m = np.array(self.matrix, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] < 3:
            raise DimensionError(f"Moebius matrix must be (n+1)x(n+1) with n >= 2, got {m.shape}")
        if abs(np.linalg.det(m)) < 1e-14:
            raise PreconditionError("Moebius matrix is singular")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @property
    def n(self):
        return self.matrix.shape[0] - 1

    def apply(self, zs):
        m = self.matrix
        forms = []
        for row in m:
            form = row[0]
            for j, zj in enumerate(zs):
                if row[j + 1] != 0:
                    form = zj * row[j + 1] + form
            forms.append(form)
        _check_denominator(forms[0], "l0")
        inv = 1.0 / forms[0]
        return [form * inv for form in forms[1:]]


@dataclass(frozen=True, eq=False)
class Automorphism(MapExpr):
    """Componentwise disk automorphism z_j -> (z_j - a_j)/(1 - conj(a_j) z_j)."""

    a: np.ndarray

    def __post_init__(self):
        a = _as_complex_vector(self.a)
        if a.shape[0] < 2:
            raise DimensionError("maps need n >= 2")
        if np.any(np.abs(a) >= 1.0):
            raise PreconditionError("automorphism parameter must lie inside the polydisk")
        a.setflags(write=False)
        object.__setattr__(self, "a", a)

    @property
    def n(self):
        return self.a.shape[0]

    def apply(self, zs):
        out = []
        for zj, aj in zip(zs, self.a):
            den = 1.0 - zj * np.conj(aj)
            _check_denominator(den, "1 - conj(a) z")
            out.append((zj - aj) / den)
        return out


@dataclass(frozen=True, eq=False)
class Normalizer(MapExpr):
    """w -> w / (1 + a.w)."""

    a: np.ndarray

    def __post_init__(self):
        a = _as_complex_vector(self.a)
        if a.shape[0] < 2:
            raise DimensionError("maps need n >= 2")
        a.setflags(write=False)
        object.__setattr__(self, "a", a)

    @property
    def n(self):
        return self.a.shape[0]

    def apply(self, zs):
        den = 1.0
        for zj, aj in zip(zs, self.a):
            if aj != 0:
                den = zj * aj + den
        _check_denominator(den, "1 + a.w")
        inv = 1.0 / den
        return [zj * inv for zj in zs]

    def inverse(self) -> "Normalizer":
        return Normalizer(-self.a)


@dataclass(frozen=True, eq=False)
class Dilation(MapExpr):
    """z -> inner(s z) / s."""

    s: float
    inner: MapExpr

    def __post_init__(self):
        if not 0.0 < float(self.s) <= 1.0:
            raise PreconditionError(f"dilation factor must lie in (0, 1], got {self.s}")
        object.__setattr__(self, "s", float(self.s))

    @property
    def n(self):
        return self.inner.n

    def apply(self, zs):
        s = self.s
        return [w * (1.0 / s) for w in self.inner.apply([z * s for z in zs])]


@dataclass(frozen=True, eq=False)
class Compose(MapExpr):
    """z -> outer(inner(z))."""

    outer: MapExpr
    inner: MapExpr

    def __post_init__(self):
        if self.outer.n != self.inner.n:
            raise DimensionError(f"cannot compose maps of dimension {self.outer.n} and {self.inner.n}")

    @property
    def n(self):
        return self.inner.n

    def apply(self, zs):
        return self.outer.apply(self.inner.apply(zs))


@dataclass(frozen=True)
class PolyTerm:
    target: int
    exponents: tuple
    coeff: complex


@dataclass(frozen=True, eq=False)
class Polynomial(MapExpr):
    """Polynomial map; component ``target`` collects ``coeff * prod z_i**e_i``."""

    n: int
    terms: tuple = field(default_factory=tuple)
    max_degree: int = MAX_POLY_DEGREE

    def __post_init__(self):
        if self.n < 2:
            raise DimensionError("maps need n >= 2")
        terms = []
        for t in self.terms:
            if not isinstance(t, PolyTerm):
                target, exps, coeff = t
                t = PolyTerm(int(target), tuple(int(e) for e in exps), complex(coeff))
            if not 0 <= t.target < self.n:
                raise DimensionError(f"term target {t.target} out of range")
            if len(t.exponents) != self.n or min(t.exponents) < 0:
                raise DimensionError(f"term exponents {t.exponents} malformed for n = {self.n}")
            if sum(t.exponents) > self.max_degree:
                raise PreconditionError(f"term degree {sum(t.exponents)} exceeds {self.max_degree}")
            terms.append(t)
        object.__setattr__(self, "terms", tuple(terms))

    def apply(self, zs):
        top = max((max(t.exponents) for t in self.terms), default=0)
        powers = []
        for z in zs:
            row = [None, z]
            for _ in range(2, top + 1):
                row.append(row[-1] * z)
            powers.append(row)
        zero = zs[0] * 0.0
        out = [zero for _ in range(self.n)]
        for t in self.terms:
            mono = None
            for i, e in enumerate(t.exponents):
                if e:
                    mono = powers[i][e] if mono is None else mono * powers[i][e]
            if mono is None:
                out[t.target] = out[t.target] + t.coeff
            else:
                out[t.target] = mono * t.coeff + out[t.target]
        return out


# -- constructors -----------------------------------------------------------

def compose(g: MapExpr, f: MapExpr) -> MapExpr:
    return Compose(g, f)


def dilate(f: MapExpr, s: float) -> MapExpr:
    return Dilation(s, f)


def perturbed_identity(n: int, terms: Sequence) -> Polynomial:
    """z + (polynomial terms)."""
    ident = [(i, tuple(int(i == j) for j in range(n)), 1.0) for i in range(n)]
    return Polynomial(n, tuple(ident) + tuple(terms))


def moebius_from_l(a) -> Moebius:
    """z / l(z) with l(z) = 1 - a.z."""
    a = _as_complex_vector(a)
    n = a.shape[0]
    m = np.zeros((n + 1, n + 1), complex)
    m[0, 0] = 1.0
    m[0, 1:] = -a
    m[1:, 1:] = np.eye(n)
    return Moebius(m)


# -- evaluation -------------------------------------------------------------

def _check_point(expr: MapExpr, z) -> np.ndarray:
    z = np.asarray(z, dtype=complex)
    if z.shape[-1] != expr.n:
        raise DimensionError(f"point has {z.shape[-1]} coordinates, map has n = {expr.n}")
    return z


def eval_map(expr: MapExpr, z) -> np.ndarray:
    """f(z) for a point or a batch of points with last axis of length n."""
    z = _check_point(expr, z)
    out = expr.apply([z[..., i] for i in range(expr.n)])
    return np.stack([np.broadcast_to(np.asarray(o, complex), z.shape[:-1]) for o in out], axis=-1)


@dataclass(frozen=True, eq=False)
class MapJet:
    """Third-order jets of every component of a map at a point (or batch)."""

    point: np.ndarray
    components: tuple

    @property
    def n(self) -> int:
        return len(self.components)

    @property
    def values(self) -> np.ndarray:
        return np.stack([c.value for c in self.components], axis=-1)

    @property
    def jacobian(self) -> np.ndarray:
        """Df with entry [l, j] = d f_l / d z_j."""
        return np.stack([c.grad for c in self.components], axis=-2)

    @property
    def second(self) -> np.ndarray:
        """[l, i, j] = d^2 f_l / dz_i dz_j."""
        return np.stack([c.hess for c in self.components], axis=-3)

    @property
    def third(self) -> np.ndarray:
        return np.stack([c.third for c in self.components], axis=-4)

    @property
    def det(self) -> np.ndarray:
        return np.linalg.det(self.jacobian)

    @property
    def singular(self) -> np.ndarray:
        return np.abs(self.det) < JACOBIAN_FLAG_THRESHOLD


def map_jet(expr: MapExpr, z) -> MapJet:
    z = _check_point(expr, z)
    seeds = seed_point(z)
    out = expr.apply(seeds)
    comps = []
    for o in out:
        if not isinstance(o, Jet3):
            o = Jet3.constant(np.broadcast_to(np.asarray(o, complex), z.shape[:-1]), expr.n)
        comps.append(o)
    if not all(np.all(np.isfinite(c.grad)) for c in comps):
        raise SingularPointError("non-finite Jacobian entries")
    return MapJet(z, tuple(comps))


def jacobian_log_gradient(mj: MapJet) -> np.ndarray:
    """grad log J_f, via d_j log J = tr(Df^{-1} d_j Df)."""
    dinv = np.linalg.inv(mj.jacobian)
    return np.einsum("...jl,...lji->...i", dinv, mj.second)


def grad_jacobian(expr: MapExpr, z) -> np.ndarray:
    """grad J_f(z) = J_f(z) * grad log J_f(z)."""
    mj = map_jet(expr, z)
    return mj.det[..., None] * jacobian_log_gradient(mj)


def check_normalized(f: MapExpr, tol: float = 1e-10) -> MapJet:
    """Raise unless f(0) = 0 and Df(0) = I; returns the jet at the origin."""
    mj = map_jet(f, np.zeros(f.n, complex))
    if np.max(np.abs(mj.values)) > tol or np.max(np.abs(mj.jacobian - np.eye(f.n))) > tol:
        raise NotNormalizedError("map must satisfy f(0) = 0 and Df(0) = I")
    return mj


def make_normalizer(f: MapExpr, tol: float = 1e-10) -> Normalizer:
    """The Moebius map T_a with grad J_{T o f}(0) = 0, i.e. (n+1) a = grad J_f(0)."""
    mj = check_normalized(f, tol)
    grad_j = mj.det * jacobian_log_gradient(mj)
    return Normalizer(grad_j / (f.n + 1))


def normalize(f: MapExpr, tol: float = 1e-10) -> MapExpr:
    return Compose(make_normalizer(f, tol), f)


# -- catalog ----------------------------------------------------------------

def random_moebius(n: int, rng: np.random.Generator, spread: float = 0.4) -> Moebius:
    """Random Moebius map whose denominator stays away from zero on |z|_inf < 2.

    The denominator l0 = 1 + a.z has sum |a_i| <= spread/2 < 1/2.
    """
    def cplx(size, scale):
        return scale * (rng.normal(size=size) + 1j * rng.normal(size=size)) / np.sqrt(2)

    a = cplx(n, 1.0)
    a *= (spread / 2) * rng.uniform(0.2, 1.0) / np.sum(np.abs(a))
    m = np.zeros((n + 1, n + 1), complex)
    m[0, 0] = 1.0
    m[0, 1:] = a
    m[1:, 0] = cplx(n, 0.3)
    m[1:, 1:] = np.eye(n) + cplx((n, n), 0.3)
    return Moebius(m)


def random_automorphism(n: int, rng: np.random.Generator, max_modulus: float = 0.5) -> Automorphism:
    mods = rng.uniform(0, max_modulus, size=n)
    phases = rng.uniform(0, 2 * np.pi, size=n)
    return Automorphism(mods * np.exp(1j * phases))


def random_perturbation(n: int, rng: np.random.Generator, size: float = 0.05, degree: int = 3) -> Polynomial:
    """z + small polynomial terms of degree 2..degree (coefficient l1 mass = size)."""
    terms = []
    for target in range(n):
        for _ in range(2):
            d = int(rng.integers(2, degree + 1))
            exps = np.zeros(n, int)
            for _ in range(d):
                exps[rng.integers(n)] += 1
            coeff = complex(rng.normal(), rng.normal())
            terms.append((target, tuple(exps), coeff))
    total = sum(abs(c) for _, _, c in terms)
    terms = [(t, e, c * size / total) for t, e, c in terms]
    return perturbed_identity(n, terms)


def catalog(n: int = 2, seed: int = 0) -> dict[str, MapExpr]:
    """Named sample maps, all holomorphic with invertible Jacobian on |z|_inf <= 0.9."""
    rng = np.random.default_rng(seed)
    aut = random_automorphism(n, rng)
    pert = perturbed_identity(
        n, [(i, tuple(2 * int(j == (i + 1) % n) for j in range(n)), 0.05) for i in range(n)]
    )
    rpert = random_perturbation(n, rng)
    mob = random_moebius(n, rng)
    return {
        "identity": Identity(n),
        "moebius": mob,
        "moebius_l": moebius_from_l(np.r_[0.5, np.zeros(n - 1)]),
        "automorphism": aut,
        "dilated_automorphism": Dilation(0.7, aut),
        "perturbation": pert,
        "random_perturbation": rpert,
        "normalized_perturbation": normalize(rpert),
        "moebius_of_perturbation": Compose(mob, rpert),
        "automorphism_of_perturbation": Compose(random_automorphism(n, rng, 0.3), rpert),
    }
