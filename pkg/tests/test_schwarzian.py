import numpy as np
import pytest

from polyschwarz.errors import TensorUndefinedError
from polyschwarz.maps import Automorphism, Compose, Dilation, Identity, perturbed_identity, random_moebius
from polyschwarz.schwarzian import (
    apply_operator,
    canonical_residual,
    chain_rule_residual,
    hessian_residual,
    off_pattern_max,
    s0_from_derivative_identities,
    schwarzian_tensor,
)


def test_identity_tensor_vanishes():
    T = schwarzian_tensor(Identity(2), [0.1, 0.2])
    assert T.max_entry() == 0
    assert np.all(T.S0 == 0)


def test_automorphism_at_origin():
    T = schwarzian_tensor(Automorphism([0.5, 0.0]), [0.0, 0.0])
    assert np.isclose(T.S[0, 0, 0], 1 / 3)
    assert np.isclose(T.S[1, 1, 0], -1 / 3) and np.isclose(T.S[1, 0, 1], -1 / 3)
    assert np.isclose(T.S0[0, 0], 1 / 18)
    assert off_pattern_max(T) == 0


def test_moebius_tensor_vanishes():
    rng = np.random.default_rng(0)
    for n in (2, 3):
        f = random_moebius(n, rng)
        T = schwarzian_tensor(f, 0.5 * np.ones(n))
        assert T.max_entry() < 1e-12


def test_apply_operator_matches_einsum():
    T = schwarzian_tensor(Automorphism([0.3j, 0.2]), [0.1, -0.2])
    v = np.array([1.0, 0.5j])
    assert np.allclose(apply_operator(T, v), [v @ T.S[k] @ v for k in range(2)])


def test_chain_rule_and_residuals(cat2):
    f = cat2["random_perturbation"]
    g = cat2["automorphism"]
    z = np.array([0.3, -0.2j])
    assert chain_rule_residual(g, f, z) < 1e-10
    assert hessian_residual(f, z, [0.7, 0.2 + 0.3j]) < 1e-10
    assert canonical_residual(schwarzian_tensor(f, z)) < 1e-12


def test_dilation_scales_tensor():
    f = perturbed_identity(2, [(0, (0, 2), 0.05), (1, (2, 0), 0.05)])
    z = np.array([0.4, 0.1j])
    s = 0.6
    Tg = schwarzian_tensor(Dilation(s, f), z)
    Tf = schwarzian_tensor(f, s * z)
    assert np.allclose(Tg.S, s * Tf.S)


def test_s0_second_route(cat2):
    for name in ("automorphism", "perturbation", "random_perturbation"):
        f = cat2[name]
        z = np.array([0.2, 0.1 - 0.3j])
        assert np.allclose(schwarzian_tensor(f, z).S0, s0_from_derivative_identities(f, z), atol=1e-8), name


def test_singular_jacobian():
    f = perturbed_identity(2, [(0, (2, 0), 0.5)])  # J = 1 + z_1 vanishes at z_1 = -1
    with pytest.raises(TensorUndefinedError):
        schwarzian_tensor(f, [-1.0, 0.0])
