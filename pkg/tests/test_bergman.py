import math

import numpy as np
import pytest

from polyschwarz.bergman import (
    bergman_norm,
    deterministic_starts,
    objective,
    operator_norm,
    sup_norm,
)
from polyschwarz.errors import MetricBlowUpError
from polyschwarz.maps import Automorphism, Identity


def test_bergman_norm_at_origin():
    assert np.isclose(bergman_norm([0, 0], [1, 0]), math.sqrt(2))
    with pytest.raises(MetricBlowUpError):
        bergman_norm([1.0, 0], [1, 0])


def test_starts_are_unit():
    s = deterministic_starts(3)
    assert len(s) >= 8
    assert np.allclose(np.linalg.norm(s, axis=1), 1)


def test_automorphism_norm_closed_form():
    res = operator_norm(Automorphism([0.5, 0.0]), [0.0, 0.0])
    assert abs(res.value - math.sqrt(6) / 9) < 1e-9
    assert np.isclose(bergman_norm([0, 0], res.argmax_v), 1.0)
    assert np.isclose(objective(Automorphism([0.5, 0.0]), [0, 0], res.argmax_v), res.value)


def test_norm_is_phase_invariant():
    a = operator_norm(Automorphism([0.3, 0.2]), [0.1, 0.0]).value
    b = operator_norm(Automorphism([0.3j, 0.2j]), [0.1j, 0.0]).value
    assert abs(a - b) < 1e-9


def test_identity_sup_is_zero():
    res = sup_norm(Identity(2), 0.9, grid=(4, 4))
    assert res.value == 0 and res.lower_bound_only


def test_sup_is_deterministic():
    f = Automorphism([0.4, 0.1j])
    a = sup_norm(f, 0.8, grid=(5, 6), seed=3)
    b = sup_norm(f, 0.8, grid=(5, 6), seed=3)
    assert a.value == b.value and np.array_equal(a.witness_z, b.witness_z)


def test_sup_respects_automorphism_bound():
    a = np.array([0.45, 0.2j])
    res = sup_norm(Automorphism(a), 0.95, grid=(6, 8))
    assert res.value <= 2 * math.sqrt(2) * np.max(np.abs(a)) + 1e-9
