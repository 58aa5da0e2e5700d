import numpy as np
import pytest

from polyschwarz.maps import Automorphism, Identity, perturbed_identity, random_moebius
from polyschwarz.mapio import map_to_dict
from polyschwarz.verify import (
    AB_bounds_check,
    DISK_SAMPLES,
    default_config,
    disk_lemma_check,
    measured_alpha,
    run_suite,
    tensor_bounds_check,
)


@pytest.mark.parametrize("sample", sorted(DISK_SAMPLES))
def test_disk_lemma_kind_ii(sample):
    assert disk_lemma_check(sample, 1.0, "ii").status == "pass"


def test_disk_lemma_kind_i_skips_unbounded():
    assert disk_lemma_check("z", 1.0, "i").status == "pass"
    assert disk_lemma_check("blaschke2", 1.0, "i").status == "pass"
    assert disk_lemma_check("inv_one_minus_z2", 1.0, "i").status == "skip"


def test_identity_bounds_trivial():
    assert tensor_bounds_check(Identity(2), 0.0).status == "pass"
    rep = AB_bounds_check(Identity(2), 0.0)
    assert rep.status == "pass" and rep.check_margins["A"] == 0


def test_moebius_A_B_vanish():
    f = random_moebius(2, np.random.default_rng(2))
    rep = AB_bounds_check(f, 0.0)
    assert rep.status == "pass"


def test_automorphism_bounds_with_measured_alpha():
    f = Automorphism([0.3, 0.0])
    alpha = measured_alpha(f, 0.9)
    rep = tensor_bounds_check(f, alpha)
    assert rep.status == "pass" and rep.worst_margin > 0


def test_small_alpha_branch_activates():
    f = Automorphism([0.05, 0.0])
    rep = AB_bounds_check(f, measured_alpha(f, 0.9))
    assert "B_small" in rep.check_margins


def test_cross_perturbation_passes():
    f = perturbed_identity(2, [(0, (0, 2), 0.02), (1, (2, 0), 0.02)])
    alpha = measured_alpha(f, 0.9)
    assert tensor_bounds_check(f, alpha).status == "pass"
    assert AB_bounds_check(f, alpha).status == "pass"


def test_empty_config():
    rep = run_suite({})
    assert rep.status == "pass" and rep.cases == 0 and not rep.violations


def test_understated_alpha_fails_with_witness():
    f = Automorphism([0.3, 0.0])
    rep = run_suite({"cases": [{"suite": "tensor_bounds", "map": map_to_dict(f), "alpha_scale": 0.5}]})
    assert rep.status == "fail"
    v = rep.violations[0]
    assert "z" in v and v["map"] == map_to_dict(f)


def test_default_suite_passes_and_is_deterministic():
    a = run_suite(default_config(0))
    b = run_suite(default_config(0))
    assert a.status == "pass"
    assert a.cases == b.cases and a.worst_margin == b.worst_margin
