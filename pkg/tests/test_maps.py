import numpy as np
import pytest

from polyschwarz.errors import DimensionError, NotNormalizedError, PreconditionError, SingularPointError
from polyschwarz.maps import (
    Automorphism,
    Compose,
    Dilation,
    Identity,
    Moebius,
    Normalizer,
    Polynomial,
    check_normalized,
    eval_map,
    grad_jacobian,
    make_normalizer,
    map_jet,
    moebius_from_l,
    normalize,
    perturbed_identity,
)


def test_identity_jet():
    mj = map_jet(Identity(2), [0.3, 0.1j])
    assert np.allclose(mj.jacobian, np.eye(2))
    assert np.allclose(mj.det, 1.0)


def test_moebius_evaluation():
    m = np.array([[1, 0.2, 0], [0, 1, 0], [0, 0, 1]], complex)
    z = np.array([0.5, 0.25])
    assert np.allclose(eval_map(Moebius(m), z), z / (1 + 0.1))


def test_moebius_singular_matrix():
    with pytest.raises(PreconditionError):
        Moebius(np.ones((3, 3)))


def test_moebius_pole():
    f = moebius_from_l([1.0, 0.0])
    with pytest.raises(SingularPointError):
        eval_map(f, [1.0, 0.0])


def test_automorphism_maps_a_to_zero():
    a = np.array([0.3 + 0.1j, -0.2])
    assert np.allclose(eval_map(Automorphism(a), a), 0)
    with pytest.raises(PreconditionError):
        Automorphism([1.0, 0.0])


def test_normalizer_inverse():
    T = Normalizer([0.2, -0.1j])
    w = np.array([0.3, 0.4 + 0.1j])
    assert np.allclose(eval_map(T.inverse(), eval_map(T, w)), w)


def test_dilation():
    f = perturbed_identity(2, [(0, (2, 0), 0.1)])
    g = Dilation(0.5, f)
    z = np.array([0.4, 0.2])
    assert np.allclose(eval_map(g, z), eval_map(f, 0.5 * z) / 0.5)
    with pytest.raises(PreconditionError):
        Dilation(1.5, f)


def test_compose_dimension_mismatch():
    with pytest.raises(DimensionError):
        Compose(Identity(2), Identity(3))


def test_polynomial_degree_cap():
    with pytest.raises(PreconditionError):
        Polynomial(2, ((0, (7, 0), 1.0),))


def test_grad_jacobian_of_moebius_l():
    a = np.array([0.2, -0.1 + 0.05j, 0.3j])
    assert np.allclose(grad_jacobian(moebius_from_l(a), np.zeros(3)), 4 * a)


def test_cross_perturbation_has_zero_grad_jacobian():
    f = perturbed_identity(2, [(0, (0, 2), 0.05), (1, (2, 0), 0.05)])
    assert np.allclose(grad_jacobian(f, np.zeros(2)), 0)


def test_normalize_kills_grad_jacobian():
    f = perturbed_identity(2, [(0, (2, 0), 0.1), (1, (1, 1), 0.05j)])
    g = normalize(f)
    check_normalized(g)
    assert np.allclose(grad_jacobian(g, np.zeros(2)), 0, atol=1e-14)
    assert np.allclose(make_normalizer(f).a, grad_jacobian(f, np.zeros(2)) / 3)


def test_normalize_requires_normalized_input():
    with pytest.raises(NotNormalizedError):
        normalize(Automorphism([0.3, 0.0]))


def test_catalog_maps_regular(cat2):
    rng = np.random.default_rng(3)
    z = 0.9 * rng.uniform(size=(50, 2)) * np.exp(2j * np.pi * rng.uniform(size=(50, 2)))
    for name, f in cat2.items():
        assert not np.any(map_jet(f, z).singular), name
