"""Comparison ODEs: ray transport, linear envelopes, the Riccati threshold, vanish radius.

All integrations use :mod:`polyschwarz.ode` with steps capped at
``0.05 * (1 - t)`` so the coefficient singularity at t = 1 stays resolved.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import PreconditionError
from .maps import Compose, MapExpr, make_normalizer, map_jet
from .ode import integrate
from .schwarzian import schwarzian_tensor

RICCATI_THRESHOLD = 1 / 6.1
RICCATI_SHARP_LIMIT = 2 / (6.1 + math.sqrt(6.1**2 - 1.6**2))
BLOWUP_CAP = 1e6
SMALL_B_THRESHOLD = 3 * math.sqrt(2) - 4


def _cap(t):
    return 0.05 * (1.0 - t)


@dataclass
class OdeOutcome:
    samples: np.ndarray  # column 0 is t
    status: str  # completed_to | first_zero_at | blowup_at
    location: float  # t_end, t0 or x1
    bracket: tuple | None = None
    envelope_ok: bool | None = None
    worst_margin: float | None = None
    warnings: list = field(default_factory=list)
    log_rim_bracket: tuple | None = None

    def status_dict(self):
        if self.bracket is None:
            return {self.status: self.location}
        return {self.status: self.location, "bracket": list(self.bracket)}


@dataclass(frozen=True)
class BoundParams:
    """Constants chained through the comparison lemmas for given n and alpha."""

    n: int
    alpha: float
    gamma_variant: str = "proof"

    def __post_init__(self):
        if self.n < 2:
            raise PreconditionError("n must be at least 2")
        if self.alpha < 0:
            raise PreconditionError("alpha must be nonnegative")
        if self.gamma_variant not in ("proof", "statement"):
            raise ValueError("gamma_variant is 'proof' or 'statement'")

    @property
    def a(self):
        return 0.8 * self.n * math.sqrt(self.n) * self.alpha

    @property
    def b(self):
        return 2 * (3 + 2 * self.alpha) * math.sqrt(self.n) * self.a

    @property
    def tau(self):
        return 1.6 * self.n * math.sqrt(self.n) * self.alpha

    @property
    def c1(self):
        n = self.n
        return 2 * math.sqrt(2 * n) / (n - 1) * (2 + (n - 1) ** 2)

    @property
    def c2(self):
        n = self.n
        return 2 * math.sqrt(n) / (n - 1) * (n + (n - 1) ** 2)

    @property
    def gamma(self):
        root = math.sqrt(1 + self.b + self.a**2)
        if self.gamma_variant == "proof":
            return 0.5 * (self.a + root - 1)
        return 0.5 * (root - 1)

    def consolidation_holds(self) -> bool:
        """c1 alpha + c2 alpha^2 <= (3 + 2 alpha) tau."""
        lhs = self.c1 * self.alpha + self.c2 * self.alpha**2
        return lhs <= (3 + 2 * self.alpha) * self.tau * (1 + 1e-12) + 1e-300

    def vanish_constants(self):
        """(eps, delta) for the vanish-radius equation."""
        n, al = self.n, self.alpha
        eps = 5 * n**2 * al + 2 * n * (n + 1) * al**2
        delta = 3 * n * al * 2 * (1 + 2 * self.gamma)
        return eps, delta


# -- ray transport --------------------------------------------------------------

def _coefficient_provider(source):
    if isinstance(source, MapExpr):
        def provider(z):
            T = schwarzian_tensor(source, z)
            return T.S, T.S0
        return provider
    return source


def transport_ray(
    source: MapExpr | Callable,
    zeta,
    u0=1.0,
    grad0=None,
    t_end: float = 0.99,
    rtol: float = 1e-11,
    atol: float = 1e-13,
) -> OdeOutcome:
    """Integrate (u, grad u) of the second-order system along t -> t zeta.

    With A_kj = sum_i zeta_i S^k_ij and B_j = sum_i zeta_i S0_ij the state
    obeys u' = grad u . zeta and (grad u)_j' = sum_k A_kj (grad u)_k + B_j u.
    Samples are rows (t, u, du/dz_1, ..., du/dz_n).
    """
    zeta = np.asarray(zeta, dtype=complex)
    n = zeta.shape[0]
    if t_end >= 1:
        raise PreconditionError("t_end must be < 1")
    provider = _coefficient_provider(source)
    grad0 = np.zeros(n, complex) if grad0 is None else np.asarray(grad0, complex)

    def rhs(t, y):
        S, S0 = provider(t * zeta)
        A = np.einsum("i,kij->kj", zeta, S)
        B = zeta @ S0
        out = np.empty_like(y)
        out[0] = y[1:] @ zeta
        out[1:] = y[1:] @ A + B * y[0]
        return out

    peak = [abs(u0)]

    def event(t, y):
        peak[0] = max(peak[0], abs(y[0]))
        return abs(y[0]) - 1e-10 * peak[0]

    y0 = np.concatenate([[complex(u0)], grad0])
    tr = integrate(rhs, 0.0, y0, t_end, rtol=rtol, atol=atol, cap=_cap, event=event)
    samples = np.column_stack([tr.t, tr.y])
    if tr.status == "event":
        return OdeOutcome(samples, "first_zero_at", 0.5 * sum(tr.bracket), tr.bracket)
    if tr.status == "underflow":
        raise PreconditionError(f"step-size underflow near t = {tr.t[-1]}: {tr.messages}")
    return OdeOutcome(samples, "completed_to", t_end)


# -- linear comparison ------------------------------------------------------------

def linear_envelope(a: float, b: float, x: float) -> tuple[float, float]:
    """(h bound, h' bound) for h'' <= 2a/(1-x^2) h' + b/(1-x^2)^2 h, h(0)=1, h'(0)=0."""
    if x >= 1:
        raise PreconditionError("x must be < 1")
    c = math.sqrt(1 + b + a * a)
    h = 2 * ((1 + x) / (1 - x)) ** ((a + c - 1) / 2)
    return h, (a + c) / (1 - x * x) * h


def linear_comparison_check(a: float, b: float, x_end: float = 0.99, rtol_margin: float = 1e-6) -> OdeOutcome:
    """Solve the equality case and compare against the closed-form envelopes.

    Checks h <= h bound and h' <= (a + c) h / (1 - x^2) (which implies the
    h' bound) at every accepted step; the worst relative margin is reported.
    """
    if a < 0 or b < 0:
        raise PreconditionError("a and b must be nonnegative")
    if x_end >= 1:
        raise PreconditionError("x_end must be < 1")
    c = math.sqrt(1 + b + a * a)

    def rhs(x, y):
        w = 1 - x * x
        return np.array([y[1], 2 * a / w * y[1] + b / (w * w) * y[0]])

    tr = integrate(rhs, 0.0, np.array([1.0, 0.0]), x_end, cap=_cap)
    if tr.status != "completed":
        raise PreconditionError(f"integration failed: {tr.messages}")
    x, h, hp = tr.t, tr.y[:, 0], tr.y[:, 1]
    hb = 2 * ((1 + x) / (1 - x)) ** ((a + c - 1) / 2)
    hpb_own = (a + c) / (1 - x * x) * h
    hpb = (a + c) / (1 - x * x) * hb
    m1 = (hb - h) / hb
    m2 = (hpb_own - hp) / np.maximum(hpb_own, 1e-300)
    m3 = (hpb - hp) / hpb
    worst = float(min(m1.min(), m2.min(), m3.min()))
    samples = np.column_stack([x, h, hp, hb, hpb])
    return OdeOutcome(samples, "completed_to", x_end, envelope_ok=worst >= -rtol_margin, worst_margin=worst)


# -- Riccati threshold --------------------------------------------------------------

def riccati_solve(c: float, x_end: float = 0.999, rtol: float = 1e-11, atol: float = 1e-13,
                  bracket_tol: float = 1e-10, log_rim_end: float | None = None) -> OdeOutcome:
    """h' = 1.6c/(1-x^2) h + 4.5c/(1-x^2)^2 + h^2, h(0) = 0, through phi = (1-x) h.

    phi obeys (1-x) phi' = -(1 - 1.6c/(1+x)) phi + 4.5c/(1+x)^2 + phi^2, which
    is integrated in s = -log(1 - x) where its coefficients stay bounded.
    Near the sharp constant the blow-up point sits at 1 - x ~ exp(-200), far
    below double resolution in x, so ``log_rim_end`` lets the run continue to
    any s; the outcome then also reports s at the event.

    Blow-up is declared when phi passes ``BLOWUP_CAP`` while increasing; the
    crossing is bracketed in s by bisection.  Samples are rows
    (x, h, x/(1-x^2), s, phi).  The envelope h <= x/(1-x^2) is checked in the
    overflow-free form phi <= x/(1+x).
    """
    if c < 0:
        raise PreconditionError("c must be nonnegative")
    if log_rim_end is None:
        if x_end >= 1:
            raise PreconditionError("x_end must be < 1")
        log_rim_end = -math.log1p(-x_end)

    def rhs(s, y):
        x = -math.expm1(-s)
        phi = y[0]
        return np.array([-(1 - 1.6 * c / (1 + x)) * phi + 4.5 * c / (1 + x) ** 2 + phi * phi])

    def event(s, y):
        return BLOWUP_CAP - y[0]

    tr = integrate(rhs, 0.0, np.array([0.0]), log_rim_end, rtol=rtol, atol=atol, event=event,
                   event_tol=bracket_tol, h0=1e-3)
    s = tr.t
    phi = tr.y[:, 0]
    x = -np.expm1(-s)
    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        h = phi * np.exp(s)
        env = x / ((1 - x) * (1 + x))
    samples = np.column_stack([x, h, env, s, phi])
    phi_env = x / (1 + x)
    margin = phi_env - phi
    if tr.status in ("event", "underflow"):
        sb = tr.bracket if tr.bracket is not None else (s[-1], s[-1])
        sb = (float(sb[0]), float(sb[1]))
        xb = (float(-math.expm1(-sb[0])), float(-math.expm1(-sb[1])))
        warn = [f"log rim distance at blow-up: s in [{sb[0]!r}, {sb[1]!r}]"]
        if tr.status == "underflow":
            warn += tr.messages
        out = OdeOutcome(samples, "blowup_at", 0.5 * (xb[0] + xb[1]), xb, envelope_ok=False,
                         worst_margin=float(np.min(margin)), warnings=warn)
        out.log_rim_bracket = sb
        return out
    worst = float(np.min(margin[1:] / phi_env[1:])) if len(s) > 1 else 0.0
    return OdeOutcome(samples, "completed_to", float(x[-1]), envelope_ok=bool(np.all(margin >= 0)),
                      worst_margin=worst)


# -- vanish radius ----------------------------------------------------------------------

def vanish_radius(eps: float, delta: float, gamma: float = 0.0, rhs_power: int = 2,
                  t_max: float = 1 - 1e-6, bracket_tol: float = 1e-10) -> OdeOutcome:
    """First zero of y'' + eps/(1-t^2)^2 y = -delta/(1-t^2)^p ((1+t)/(1-t))^gamma.

    y(0) = 1, y'(0) = 0, p = ``rhs_power``.  Samples are rows (t, y, y').
    """
    if eps < 0 or delta < 0:
        raise PreconditionError("eps and delta must be nonnegative")
    if rhs_power not in (1, 2):
        raise ValueError("rhs_power is 1 or 2")

    def rhs(t, y):
        w = 1 - t * t
        forcing = -delta / w**rhs_power * ((1 + t) / (1 - t)) ** gamma if delta else 0.0
        return np.array([y[1], forcing - eps / (w * w) * y[0]])

    tr = integrate(rhs, 0.0, np.array([1.0, 0.0]), t_max, cap=_cap, event=lambda t, y: y[0],
                   event_tol=bracket_tol)
    samples = np.column_stack([tr.t, tr.y])
    if tr.status == "event":
        return OdeOutcome(samples, "first_zero_at", 0.5 * sum(tr.bracket), tr.bracket)
    warn = tr.messages if tr.status == "underflow" else []
    return OdeOutcome(samples, "completed_to", float(tr.t[-1]), warnings=warn)


# -- envelope checks for the normalized solution ---------------------------------------

@dataclass
class EnvelopeReport:
    applicable: bool
    n: int
    alpha: float
    rays: int
    t_end: float
    ratio_margin: float = math.inf  # min of t/(1-t^2) - |grad u / u|
    u_lower_margin: float = math.inf  # min of |u| - (1-t^2)^(sqrt n / 2)
    u_upper_margin: float = math.inf
    jacobian_margin: float | None = None
    consistency: float | None = None  # max | |u| - |J_g|^(-1/(n+1)) |
    violations: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.applicable and not self.violations


def ray_directions(n: int, count: int, seed: int = 0) -> np.ndarray:
    """Points zeta with |zeta|_inf = 1: one unimodular coordinate, others inside."""
    rng = np.random.default_rng(seed)
    out = np.empty((count, n), complex)
    for r in range(count):
        mods = rng.uniform(0, 1, n)
        mods[r % n] = 1.0
        out[r] = mods * np.exp(2j * np.pi * rng.uniform(0, 1, n))
    return out


def envelope_check_u(source: MapExpr, alpha: float, rays: int = 32, t_end: float = 0.95,
                     seed: int = 0, tol: float = 1e-9) -> EnvelopeReport:
    """Transport the normalized solution along rays and test the small-alpha envelopes."""
    n = source.n
    report = EnvelopeReport(n * math.sqrt(n) * alpha <= RICCATI_THRESHOLD, n, alpha, rays, t_end)
    if not report.applicable:
        return report
    normalized = Compose(make_normalizer(source), source)
    expo = math.sqrt(n) / 2
    jac_margin = math.inf
    consistency = 0.0
    for zeta in ray_directions(n, rays, seed):
        out = transport_ray(source, zeta, 1.0, np.zeros(n), t_end)
        if out.status != "completed_to":
            report.violations.append({"zeta": zeta, "kind": "zero", "t": out.location})
            continue
        t = out.samples[:, 0].real
        u = out.samples[:, 1]
        du = out.samples[:, 2:]
        w = 1 - t * t
        ratio = np.linalg.norm(du, axis=1) / np.abs(u)
        rm = t / w - ratio
        lo = np.abs(u) - w**expo
        hi = w**-expo - np.abs(u)
        mj = map_jet(normalized, t[:, None] * zeta[None, :])
        jg = np.abs(mj.det)
        jm = np.minimum(jg - w ** (expo * (n + 1)), w ** (-expo * (n + 1)) - jg)
        consistency = max(consistency, float(np.max(np.abs(np.abs(u) - jg ** (-1 / (n + 1))))))
        # every bound is attained at t = 0, so margins are reported over t > 0
        inner = t > 0
        if np.any(inner):
            report.ratio_margin = min(report.ratio_margin, float(rm[inner].min()))
            report.u_lower_margin = min(report.u_lower_margin, float(lo[inner].min()))
            report.u_upper_margin = min(report.u_upper_margin, float(hi[inner].min()))
            jac_margin = min(jac_margin, float(jm[inner].min()))
        for name, m in (("ratio", rm), ("u_lower", lo), ("u_upper", hi), ("jacobian", jm)):
            if m.min() < -tol:
                k = int(np.argmin(m))
                report.violations.append({"zeta": zeta, "kind": name, "t": float(t[k]), "margin": float(m[k])})
    report.jacobian_margin = jac_margin
    report.consistency = consistency
    return report
