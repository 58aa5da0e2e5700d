import numpy as np
import pytest

from polyschwarz.errors import ContourRadiusError, DimensionError, SingularArgumentError, SingularDivisorError
from polyschwarz.jets import (
    Jet3,
    cauchy_oracle,
    cauchy_taylor_coefficients,
    jet_arith,
    jet_elementary,
    seed_point,
    seed_variable,
)
from polyschwarz.maps import Identity, moebius_from_l


def test_seed_variable_has_unit_gradient():
    j = seed_variable(1, 0.3 + 0.1j, 3)
    assert j.value == 0.3 + 0.1j
    assert np.allclose(j.grad, [0, 1, 0])
    assert not np.any(j.hess) and not np.any(j.third)


@pytest.mark.parametrize("index,n", [(2, 2), (-1, 2), (0, 1)])
def test_seed_variable_rejects_bad_arguments(index, n):
    with pytest.raises(DimensionError):
        seed_variable(index, 0.0, n)


def test_product_rule_on_z1_z2_squared():
    z1, z2 = seed_point([0.2, -0.4j])
    f = z1 * z2 * z2
    assert np.isclose(f.value, 0.2 * (-0.4j) ** 2)
    assert np.allclose(f.grad, [(-0.4j) ** 2, 2 * 0.2 * (-0.4j)])
    assert np.isclose(f.derivative((1, 2)), 2.0)
    assert np.isclose(f.derivative((0, 3)), 0.0)
    assert np.isclose(f.derivative((1, 1)), 2 * (-0.4j))


def test_quotient_third_derivative():
    z1, _ = seed_point([0.3, 0.0])
    f = 1.0 / (1.0 - z1)
    assert np.isclose(f.derivative((3, 0)), 6 / 0.7**4)
    assert np.isclose(jet_arith(z1, f, "mul").value, 0.3 / 0.7)


def test_division_by_zero_jet():
    z1, z2 = seed_point([0.0, 0.5])
    with pytest.raises(SingularDivisorError):
        z2 / z1


def test_log_and_pow_agree():
    z1, z2 = seed_point([0.2 + 0.1j, 0.3])
    base = 1.0 + z1 * z2
    p = jet_elementary(base, "pow", -1 / 3)
    via_log = jet_elementary(jet_elementary(base, "log") * (-1 / 3), "exp")
    for attr in ("value", "grad", "hess", "third"):
        assert np.allclose(getattr(p, attr), getattr(via_log, attr), atol=1e-14)


def test_log_near_zero_rejected():
    z1, _ = seed_point([0.0, 0.0])
    with pytest.raises(SingularArgumentError):
        jet_elementary(z1, "log")


def test_jets_are_symmetric():
    z1, z2 = seed_point([0.1, 0.2])
    f = z1 * z1 * z2 / (1 + z2)
    assert np.allclose(f.hess, f.hess.T)
    assert np.allclose(f.third, np.transpose(f.third, (1, 0, 2)))
    assert np.allclose(f.third, np.transpose(f.third, (2, 1, 0)))


def test_batched_jets_match_pointwise():
    pts = np.array([[0.1, 0.2j], [-0.3, 0.4]])
    z1, z2 = seed_point(pts)
    f = z1 * z2 + z1 ** 3
    for k, p in enumerate(pts):
        a, b = seed_point(p)
        g = a * b + a ** 3
        assert np.allclose(f.third[k], g.third)


def test_constant_jet_order_two():
    c = Jet3.constant(2.0, 2, order=2)
    assert c.order == 2 and c.third is None


def test_cauchy_coefficients_of_polynomial():
    coeffs = cauchy_taylor_coefficients(lambda w: np.stack([w[:, 0] ** 2 * w[:, 1], w[:, 1]], -1), np.zeros(2))
    assert np.isclose(coeffs[0, 2, 1], 1.0)
    assert abs(coeffs[0, 1, 1]) < 1e-14


def test_oracle_on_moebius():
    f = moebius_from_l([0.5, 0.0])
    z = np.array([0.1, 0.2])
    # f_1 = z_1/(1 - z_1/2): d^3/dz_1^3 = 3!/2^2 (1 - z_1/2)^-4
    expected = 6 * 0.25 / (1 - 0.05) ** 4
    assert np.isclose(cauchy_oracle(f, z, 0, (3, 0)), expected, rtol=1e-12)


def test_oracle_radius_checks():
    with pytest.raises(ContourRadiusError):
        cauchy_oracle(Identity(2), [0.9, 0.0], 0, (1, 0), radii=[0.2, 0.1])
    with pytest.raises(ValueError):
        cauchy_oracle(Identity(2), [0.0, 0.0], 0, (1, 0), nodes=16)
