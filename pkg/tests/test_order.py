import math

import numpy as np
import pytest

from polyschwarz.errors import NotNormalizedError, PreconditionError
from polyschwarz.maps import Automorphism, Identity, moebius_from_l, perturbed_identity
from polyschwarz.order import (
    C_of_r,
    covering_estimate,
    dilation_contraction_check,
    dilation_factor,
    grad_jacobian_at_zero,
    grad_jacobian_bound_check,
    growth_bound,
    local_covering_bound,
    moebius_objective,
    moebius_order,
    mu_r_lower,
    smallest_singular_value,
)


@pytest.mark.parametrize("n", [2, 3, 4])
def test_moebius_order(n):
    mo = moebius_order(n)
    assert mo.value == n + 1
    assert abs(mo.search_value - (n + 1)) < 1e-6


def test_moebius_objective_interior():
    assert np.isclose(moebius_objective([0.5, 0.5]), 3 * math.sqrt(0.5))


def test_grad_jacobian_at_zero():
    assert np.allclose(grad_jacobian_at_zero(Identity(2)), 0)
    a = np.array([0.1, 0.2j])
    assert np.allclose(grad_jacobian_at_zero(moebius_from_l(a)), 3 * a)
    with pytest.raises(NotNormalizedError):
        grad_jacobian_at_zero(Automorphism([0.2, 0.0]))


def test_dilation_factor_example():
    assert abs(dilation_factor(0.4, 0.9) - 0.9 * (0.8704 / 0.84) ** 2) < 1e-12
    assert dilation_factor(0.3, 1.0) == 1.0


def test_dilation_check_passes():
    f = perturbed_identity(2, [(0, (2, 0), 0.1), (1, (0, 2), 0.05)])
    rep = dilation_contraction_check(f, 0.3, 0.7)
    assert rep.ok and rep.ratio <= rep.predicted


def test_dilation_identity_ratio():
    rep = dilation_contraction_check(Automorphism([0.3, 0.1]), 0.2, 1.0)
    assert abs(rep.ratio - 1) < 1e-9


def test_dilation_precondition():
    with pytest.raises(PreconditionError):
        dilation_contraction_check(Identity(2), 0.45, 0.5)


def test_growth_bound():
    assert np.isclose(C_of_r(0.4), 4.2)
    assert growth_bound(0.3, 0.3, 2.0, 0.4) == 2.0
    assert np.isclose(growth_bound(0.6, 0.3, 2.0, 1e-6), 4.0)
    vals = [growth_bound(a, 0.1, 1.0, 0.3) for a in (0.1, 0.2, 0.4)]
    assert vals == sorted(vals)
    with pytest.raises(PreconditionError):
        growth_bound(0.1, 0.2, 1.0, 0.3)


def test_mu_r_lower_closed_form_and_monotone():
    rep0 = mu_r_lower(2, 0.0, 0.4, budget=0)
    assert np.isclose(rep0.lambda_lower, 3 / 0.4) and rep0.lower_bound_only
    rep1 = mu_r_lower(2, 0.1, 0.4, budget=2)
    assert rep1.lambda_lower >= rep0.lambda_lower
    assert rep0.C_r > 1


def test_covering_identity_torus_minimum():
    est = covering_estimate(Identity(2), 0.9)
    assert np.isclose(est.radius_lower, 0.9 * math.sqrt(2))


def test_covering_moebius_against_closed_form():
    a = np.array([0.1, 0.05j])
    est = covering_estimate(moebius_from_l(a), 0.9, 48)
    assert est.radius_lower >= 0.9 * math.sqrt(2) / (1 + 0.9 * np.sum(np.abs(a))) - 1e-12


def test_covering_half_radius():
    f = perturbed_identity(2, [(0, (2, 0), 0.1)])
    est = covering_estimate(f, 0.5, a=[0.1, 0.0])
    assert est.half_radius_ok


def test_covering_not_normalized():
    with pytest.raises(NotNormalizedError):
        covering_estimate(Automorphism([0.3, 0.0]), 0.5)


def test_local_covering_at_origin():
    assert np.isclose(smallest_singular_value(Identity(2), [0, 0]), 1.0)
    assert np.isclose(local_covering_bound(Identity(2), [0, 0], 0.4, 0.0), 0.2)


def test_grad_jacobian_bound_moebius():
    f = moebius_from_l([0.3, 0.0])
    rep = grad_jacobian_bound_check(f, [0.5, 0.0], moebius_order(2).value)
    assert np.isclose(rep["lhs"], 0.9 / 0.85**4)
    assert rep["ok"]
    assert grad_jacobian_bound_check(Identity(2), [0.3, 0.3], 0.0)["lhs"] == 0
