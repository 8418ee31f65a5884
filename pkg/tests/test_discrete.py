import math

import numpy as np
import pytest
from scipy import integrate

import ym2d.discrete as discrete
from ym2d.discrete import (
    ConditioningSpec,
    DensityError,
    EdgeConfiguration,
    GaugeTransform,
    batch_means,
    chain_records,
    exact_sphere_loop_moment,
    gauge_transform,
    holonomy,
    holonomy_samples,
    log_density,
    metropolis_sample,
    random_configuration,
    sample_conditional_haar,
    small_disk_estimate,
    u1_exact_wilson,
    wilson_estimator,
)
from ym2d.groups import (
    ConjClass,
    GroupElement,
    GroupId,
    GroupMismatchError,
    Irrep,
    class_angles_array,
    conj_class,
    haar_sample,
    inverse,
)
from ym2d.heat import heat_kernel_values
from ym2d.surface import GraphError, PathWord, sphere_graph, theta_sphere, torus_graph

SU2, U1, SO3 = GroupId.SU2, GroupId.U1, GroupId.SO3


def wrapped_gaussian(t, x, n=30):
    k = np.arange(-n, n + 1)
    x = np.atleast_1d(x)[:, None]
    return np.exp(-((x + 2 * np.pi * k) ** 2) / (2 * t)).sum(axis=1) * np.sqrt(2 * np.pi / t)


@pytest.mark.parametrize("group", [U1, SU2, SO3])
def test_conditional_haar_product(group, rng):
    x = haar_sample(group, rng)
    gs = sample_conditional_haar(x, 5, rng)
    prod = GroupElement.identity(group)
    for g in gs:
        prod = g * prod
    assert prod.close_to(x, 1e-10)


def test_conditional_haar_marginal_is_uniform(rng):
    x = GroupElement(U1, 1.0)
    first = np.array([sample_conditional_haar(x, 3, rng)[0].angle for _ in range(4000)])
    # mean of exp(i theta) vanishes for a Haar marginal
    assert abs(np.exp(1j * first).mean()) < 4 / math.sqrt(4000)


@pytest.mark.parametrize("group", [U1, SU2, SO3])
def test_log_density_gauge_invariant(group, rng):
    g = theta_sphere([0.2, 0.3, 0.5])
    cfg = random_configuration(g, group, rng)
    j = GaugeTransform(tuple(haar_sample(group, rng) for _ in range(g.n_vertices)))
    assert log_density(gauge_transform(cfg, j)) == pytest.approx(log_density(cfg), abs=1e-9)


def test_gauge_transform_conjugates_loop_holonomy(rng):
    g = theta_sphere([0.2, 0.3, 0.5])
    cfg = random_configuration(g, SU2, rng)
    j = GaugeTransform(tuple(haar_sample(SU2, rng) for _ in range(g.n_vertices)))
    w = PathWord.of((0, 1), (2, -1))
    a = conj_class(holonomy(cfg, w)).angle
    b = conj_class(holonomy(gauge_transform(cfg, j), w)).angle
    assert a == pytest.approx(b, abs=1e-10)


def test_holonomy_order_is_reversed():
    g = theta_sphere([0.5, 0.5])
    a = GroupElement(SU2, (0.8, 0.6, 0.0, 0.0))
    b = GroupElement(SU2, (0.6, 0.0, 0.8, 0.0))
    cfg = EdgeConfiguration(g, (a, b))
    h = holonomy(cfg, PathWord.of((0, 1), (1, -1)))
    assert h.close_to(inverse(b) * a, 1e-12)


def test_density_error_reports_face(monkeypatch, rng):
    g = theta_sphere([0.5, 0.5])
    cfg = random_configuration(g, U1, rng)
    monkeypatch.setattr(discrete, "log_heat_kernel", lambda *a, **k: -math.inf)
    with pytest.raises(DensityError, match="face 0"):
        log_density(cfg)


def test_batch_means_iid(rng):
    x = rng.normal(size=16000)
    m, se = batch_means(x)
    assert se == pytest.approx(1 / math.sqrt(16000), rel=0.5)
    with pytest.raises(ValueError):
        batch_means(np.zeros(3))


def test_u1_exact_sphere_loop_matches_quadrature():
    A, a = 1.0, 0.3
    for n in (1, 2):
        num = integrate.quad(lambda t: (wrapped_gaussian(a, t) * wrapped_gaussian(A - a, -t))[0] * math.cos(n * t), 0, 2 * math.pi)[0]
        den = integrate.quad(lambda t: (wrapped_gaussian(a, t) * wrapped_gaussian(A - a, -t))[0], 0, 2 * math.pi)[0]
        g = sphere_graph(a, A)
        got = u1_exact_wilson(g, PathWord.of((0, 1)), n)
        assert got.real == pytest.approx(num / den, abs=1e-10)
        assert got == pytest.approx(exact_sphere_loop_moment(a, A, Irrep(U1, n)), abs=1e-10)


def test_u1_exact_vanishes_on_torus_generator():
    g, gens = torus_graph()
    assert u1_exact_wilson(g, gens[0], 1, h1_loops=gens) == 0


@pytest.mark.parametrize("k", [1, 2])
def test_sphere_oracle_su2_matches_class_integral(k):
    A, a = 1.0, 0.35
    # Weyl integration: dg = (2/pi) sin^2(theta) dtheta on half-angles
    def f(th, chi):
        return 2 / math.pi * math.sin(th) ** 2 * heat_kernel_values(SU2, a, [th])[0] * heat_kernel_values(SU2, A - a, [th])[0] * chi(th)

    num = integrate.quad(f, 0, math.pi, args=(lambda th: math.sin((k + 1) * th) / math.sin(th),))[0]
    den = integrate.quad(f, 0, math.pi, args=(lambda th: 1.0,))[0]
    assert exact_sphere_loop_moment(a, A, Irrep(SU2, k)).real == pytest.approx(num / den, abs=1e-9)


def test_conditioning_spec_checks():
    g = theta_sphere([0.2, 0.3, 0.5])
    x = GroupElement.identity(SU2)
    with pytest.raises(GraphError):
        ConditioningSpec((PathWord.of((0, 1)),), (x,)).check(g)
    with pytest.raises(GraphError):
        ConditioningSpec((PathWord.of((0, 1), (1, -1)), PathWord.of((1, 1), (2, -1))), (x, x)).check(g)
    with pytest.raises(ValueError):
        ConditioningSpec((PathWord.of((0, 1), (1, -1)),), ())


def test_conditioned_chain_pins_holonomy_and_matches_u1_oracle(rng):
    g = theta_sphere([0.2, 0.3, 0.5])
    loop = PathWord.of((0, 1), (1, -1))
    x = 1.3
    cond = ConditioningSpec((loop,), (GroupElement(U1, x),))
    chain = metropolis_sample(g, cond, 60000, None, rng, group=U1, stride=3)
    h = holonomy_samples(chain, loop)
    assert np.allclose(np.angle(np.exp(1j * (h - x))), 0, atol=1e-9)
    # face 1 holonomy phi, face 2 holonomy -x - phi
    w = lambda t: wrapped_gaussian(0.3, t)[0] * wrapped_gaussian(0.5, -x - t)[0]
    num = integrate.quad(lambda t: w(t) * math.cos(t), 0, 2 * math.pi)[0] + 1j * integrate.quad(lambda t: w(t) * math.sin(t), 0, 2 * math.pi)[0]
    den = integrate.quad(w, 0, 2 * math.pi)[0]
    m, se = wilson_estimator(chain, PathWord.of((1, 1), (2, -1)), Irrep(U1, 1), burn_in=len(chain) // 10)
    assert abs(m - num / den) < 4 * se


def test_class_conditioning_fixes_class_only(rng):
    g = theta_sphere([0.2, 0.3, 0.5])
    loop = PathWord.of((0, 1), (1, -1))
    cond = ConditioningSpec((loop,), (ConjClass(SU2, 1.1),), by_class=True)
    chain = metropolis_sample(g, cond, 5000, None, rng, group=SU2, stride=5)
    h = holonomy_samples(chain, loop)
    assert np.allclose(class_angles_array(SU2, h), 1.1, atol=1e-9)
    assert np.ptp(h[:, 1]) > 0.1


def test_metropolis_group_mismatch(rng):
    g = theta_sphere([0.5, 0.5])
    cond = ConditioningSpec((PathWord.of((0, 1), (1, -1)),), (GroupElement.identity(U1),))
    with pytest.raises(GroupMismatchError):
        metropolis_sample(g, cond, 10, None, rng, group=SU2)


def test_chain_acceptance_and_gauge_invariant_wilson(rng):
    g = theta_sphere([0.2, 0.3, 0.5])
    chain = metropolis_sample(g, None, 20000, None, rng, group=SU2, stride=4)
    assert 0.3 < chain.acceptance_rate < 0.8
    j = GaugeTransform(tuple(haar_sample(SU2, rng) for _ in range(g.n_vertices)))
    w = PathWord.of((0, 1), (2, -1))
    beta = Irrep(SU2, 1)
    a = wilson_estimator(chain, w, beta)[0]
    b = wilson_estimator(chain.gauge_transformed(j), w, beta)[0]
    assert a == pytest.approx(b, abs=1e-10)


def test_chain_is_reproducible():
    g = theta_sphere([0.4, 0.6])
    c1 = metropolis_sample(g, None, 500, None, np.random.default_rng(3), group=SO3)
    c2 = metropolis_sample(g, None, 500, None, np.random.default_rng(3), group=SO3)
    assert np.array_equal(c1.samples, c2.samples)


def test_chain_records_and_small_disk(rng):
    g = sphere_graph(0.2, 1.0)
    chain = metropolis_sample(g, None, 3200, None, rng, group=SU2, stride=100)
    rows = list(chain_records(chain, [PathWord.of((0, 1))], Irrep(SU2, 1)))
    assert len(rows) == 32
    assert rows[0][0] == 100 and rows[-1][0] == 3200
    est = small_disk_estimate(chain, PathWord.of((0, 1)), 0.2)
    assert est.ratio == pytest.approx(est.mean_rho / math.sqrt(0.2))
    with pytest.raises(ValueError):
        wilson_estimator(chain, PathWord.of((0, 1)), Irrep(SU2, 1), burn_in=32)
