"""Property-based checks of the algebraic identities on randomly drawn maps."""

import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st

from polyschwarz.maps import Automorphism, Compose, Moebius, eval_map, perturbed_identity
from polyschwarz.schwarzian import canonical_residual, chain_rule_residual, hessian_residual, schwarzian_tensor

small = st.floats(-0.3, 0.3)
cplx = st.builds(complex, small, small)


@st.composite
def points(draw, n=2, radius=0.7):
    mods = draw(st.lists(st.floats(0, radius), min_size=n, max_size=n))
    args = draw(st.lists(st.floats(0, 2 * np.pi), min_size=n, max_size=n))
    return np.array(mods) * np.exp(1j * np.array(args))


@st.composite
def moebius_maps(draw):
    a = np.array(draw(st.lists(cplx, min_size=2, max_size=2)))
    b = np.array(draw(st.lists(cplx, min_size=2, max_size=2)))
    c = np.array(draw(st.lists(cplx, min_size=4, max_size=4))).reshape(2, 2)
    m = np.zeros((3, 3), complex)
    m[0, 0] = 1
    m[0, 1:] = a
    m[1:, 0] = b
    m[1:, 1:] = np.eye(2) + c
    return Moebius(m)


@st.composite
def perturbations(draw):
    coeffs = draw(st.lists(cplx, min_size=3, max_size=3))
    terms = [(0, (2, 0), coeffs[0] / 6), (1, (1, 1), coeffs[1] / 6), (1, (0, 3), coeffs[2] / 6)]
    return perturbed_identity(2, terms)


@settings(max_examples=40, deadline=None)
@given(moebius_maps(), points())
def test_moebius_annihilated(f, z):
    den = 1 + f.matrix[0, 1:] @ z
    if abs(den) < 0.2 or abs(np.linalg.det(f.matrix[1:, 1:] - np.outer(f.matrix[1:, 0], f.matrix[0, 1:]))) < 0.1:
        return
    assert schwarzian_tensor(f, z).max_entry() < 1e-10


@settings(max_examples=40, deadline=None)
@given(perturbations(), points(), st.lists(cplx, min_size=2, max_size=2))
def test_solution_and_canonical_form(f, z, v):
    assert hessian_residual(f, z, np.array(v)) < 1e-10
    assert canonical_residual(schwarzian_tensor(f, z)) < 1e-12


@settings(max_examples=30, deadline=None)
@given(perturbations(), st.lists(cplx, min_size=2, max_size=2), points(radius=0.5))
def test_chain_rule(f, a, z):
    g = Automorphism(np.array(a))
    assert chain_rule_residual(g, f, z) < 1e-9


@settings(max_examples=30, deadline=None)
@given(perturbations(), moebius_maps(), points(radius=0.5))
def test_moebius_post_composition_keeps_tensor(f, m, z):
    w = eval_map(f, z)
    if abs(1 + m.matrix[0, 1:] @ w) < 0.2:
        return
    g = Compose(m, f)
    assert np.allclose(schwarzian_tensor(g, z).S, schwarzian_tensor(f, z).S, atol=1e-9)
