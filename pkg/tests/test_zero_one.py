import math

import numpy as np
import pytest

from ym2d.groups import GroupId, Irrep
from ym2d.heat import SmallTimeError
from ym2d.zero_one import convergence_experiment, product_statistic_samples, sample_product_statistic, target_mean


def test_target_mean():
    assert target_mean(Irrep(GroupId.SU2, 1), 1.0) == pytest.approx(2 * math.exp(-0.375))


def test_single_factor_is_character(rng):
    s = product_statistic_samples(Irrep(GroupId.SU2, 2), 1.0, 1, 20000, rng)
    assert s.mean() == pytest.approx(target_mean(Irrep(GroupId.SU2, 2), 1.0), abs=4 * s.std() / math.sqrt(s.size))


def test_u1_statistic_is_complex_and_unimodular(rng):
    s = product_statistic_samples(Irrep(GroupId.U1, 1), 1.0, 8, 100, rng)
    assert np.iscomplexobj(s)
    assert np.allclose(np.abs(s), 1.0)
    assert isinstance(sample_product_statistic(Irrep(GroupId.U1, 1), 1.0, 4, rng).value, complex)


def test_argument_errors(rng):
    with pytest.raises(ValueError):
        product_statistic_samples(Irrep(GroupId.SU2, 1), 1.0, 0, 10, rng)
    with pytest.raises(SmallTimeError):
        product_statistic_samples(Irrep(GroupId.SU2, 1), 1.0, 10**6, 1, rng)
    with pytest.raises(ValueError):
        convergence_experiment(Irrep(GroupId.SU2, 1), 1.0, [4, 1], 10, rng)


def test_su2_decays(rng):
    rep = convergence_experiment(Irrep(GroupId.SU2, 1), 1.0, [1, 4, 16, 64], 10000, rng)
    assert rep.means_ok and rep.decays and rep.passed


def test_so3_decays(rng):
    rep = convergence_experiment(Irrep(GroupId.SO3, 1), 0.5, [1, 4, 16, 64], 10000, rng)
    assert rep.passed


def test_u1_flat(rng):
    rep = convergence_experiment(Irrep(GroupId.U1, 1), 1.0, [1, 4, 16, 64], 10000, rng)
    assert rep.flat and rep.passed and not rep.decays
