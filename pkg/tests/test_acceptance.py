"""Acceptance suite: one test per criterion, each recording a PASS/FAIL line."""
import math
import time

import numpy as np
import pytest

from ym2d.abelian import constant_one, law_equality_test, mean_zero_unit, wn_extraction_experiment
from ym2d.cli import main
from ym2d.discrete import (
    exact_sphere_loop_moment,
    metropolis_sample,
    small_disk_estimate,
    subdivision_invariance_test,
    wilson_estimator,
)
from ym2d.groups import ConjClass, GroupId, Irrep, verify_character_identities
from ym2d.heat import semigroup_check
from ym2d.partition import (
    SurfaceSignature as S,
    bricks_reconstruct,
    glue_handle_check,
    glue_pair_check,
    pants_convolution_check,
    z_eval,
)
from ym2d.rng import make_rng
from ym2d.surface import PathWord, save_graph, sphere_graph, theta_sphere, torus_graph
from ym2d.zero_one import convergence_experiment

U1, SU2 = GroupId.U1, GroupId.SU2
LOOP = PathWord.of((0, 1))


def test_c01_semigroup(report_criterion):
    start = time.perf_counter()
    worst = 0.0
    for group in (U1, SU2):
        hi = 2 * math.pi if group is U1 else math.pi
        points = np.linspace(0.0, hi, 5, endpoint=group is not U1)
        for s in (0.25, 1.0, 4.0):
            for t in (0.25, 1.0, 4.0):
                for x in points:
                    worst = max(worst, semigroup_check(group, s, t, ConjClass(group, x)))
    elapsed = time.perf_counter() - start
    ok = worst < 1e-7 and elapsed < 10
    report_criterion(1, ok, f"heat semigroup max residual {worst:.2e} in {elapsed:.1f}s")
    assert ok


PAIRS = [
    (S(1, 0, 1.0), S(1, 0, 1.0), [], []),
    (S(3, 0, 1.0), S(1, 0, 0.5), [0.3, 1.1], []),
    (S(2, 1, 1.0), S(2, 0, 0.7), [0.3], [2.0]),
    (S(3, 0, 1.0), S(3, 1, 0.7), [0.3, 0.9], [2.0, 1.5]),
]
HANDLES = [(S(2, 0, 1.0), []), (S(3, 0, 1.0), [0.4]), (S(4, 1, 1.5), [0.4, 2.5])]


def test_c02_gluing(report_criterion):
    start = time.perf_counter()
    worst = 0.0
    for group in (U1, SU2):
        c = lambda xs: [ConjClass(group, x) for x in xs]  # noqa: E731
        for s1, s2, a, b in PAIRS:
            worst = max(worst, glue_pair_check(group, s1, s2, c(a), c(b), n_quad=256))
        for sig, a in HANDLES:
            worst = max(worst, glue_handle_check(group, sig, c(a), n_quad=256))
    elapsed = time.perf_counter() - start
    ok = worst < 1e-7 and elapsed < 30
    report_criterion(2, ok, f"pair and handle gluing max residual {worst:.2e} in {elapsed:.1f}s")
    assert ok


def test_c03_bricks(report_criterion):
    worst = 0.0
    for group in (U1, SU2):
        for p, g in [(0, 0), (2, 0), (0, 1), (1, 1)]:
            sig = S(p, g, 2.0)
            cl = [ConjClass(group, 0.3 + 0.5 * i) for i in range(p)]
            worst = max(worst, abs(bricks_reconstruct(group, sig, cl).value - z_eval(group, sig, cl).value))
    ok = worst < 1e-7
    report_criterion(3, ok, f"brick reconstruction max deviation {worst:.2e}")
    assert ok


def test_c04_pants(report_criterion):
    worst = max(pants_convolution_check(SU2, Irrep(SU2, a), Irrep(SU2, b), 1.0) for a in range(3) for b in range(3))
    ok = worst < 1e-7
    report_criterion(4, ok, f"pants convolution max residual {worst:.2e}")
    assert ok


def test_c05_subdivision(report_criterion):
    start = time.perf_counter()
    g = sphere_graph(0.4, 1.0)
    moves = [("V", 0), ("E", 0, 0, 1, 0.5), ("E", 1, 0, 1, 0.3)]
    rep = subdivision_invariance_test(g, moves, [LOOP], Irrep(SU2, 1), 100_000, make_rng(5, 0))
    elapsed = time.perf_counter() - start
    ok = rep.passed and elapsed < 120
    c = rep.comparisons[0]
    z = abs(c.mean_base - c.mean_refined) / math.hypot(c.stderr_base, c.stderr_refined)
    report_criterion(5, ok, f"U1 exact deviation {rep.exact_max_deviation:.1e}, SU2 gap {z:.2f} sigma, {elapsed:.1f}s")
    assert ok


def test_c06_sphere_wilson(report_criterion):
    start = time.perf_counter()
    worst = 0.0
    for k, frac in enumerate((0.2, 0.5)):
        chain = metropolis_sample(sphere_graph(frac, 1.0), None, 100_000, None, make_rng(6, k), group=SU2, stride=10)
        for lab in (1, 2, 3):
            beta = Irrep(SU2, lab)
            m, se = wilson_estimator(chain, LOOP, beta, burn_in=len(chain) // 10)
            worst = max(worst, abs(m - exact_sphere_loop_moment(frac, 1.0, beta)) / se)
    elapsed = time.perf_counter() - start
    ok = worst <= 3.0 and elapsed < 120
    report_criterion(6, ok, f"sphere Wilson worst gap {worst:.2f} sigma in {elapsed:.1f}s")
    assert ok


def test_c07_abelian_law(report_criterion):
    torus, gens = torus_graph(1.0)
    cases = [("theta2", theta_sphere([0.5, 0.5]), ()), ("theta3", theta_sphere([0.2, 0.3, 0.5]), ()), ("torus", torus, gens)]
    failed = []
    worst = 0.0
    for k, (name, g, h1) in enumerate(cases):
        rep = law_equality_test(g, 0.0, 100_000, make_rng(7, k), h1_loops=h1)
        for m in rep.moments + rep.h1_moments:
            # moments fixed by the product constraint have zero spread in both samplers
            sd = math.hypot(m.gaussian_se, m.metropolis_se)
            if sd > 1e-9:
                worst = max(worst, m.gap / sd)
        if not rep.passed:
            failed.append(name)
    ok = not failed
    report_criterion(7, ok, f"abelian law worst moment gap {worst:.2f} sigma" + (f", failed {failed}" if failed else ""))
    assert ok


def test_c08_extraction(report_criterion):
    r0 = wn_extraction_experiment([1024], mean_zero_unit, 0.0, 20_000, make_rng(8, 0))[0]
    r1 = wn_extraction_experiment([1024], constant_one, 0.0, 20_000, make_rng(8, 1))[0]
    ok = abs(r0.re_var - 1.0) < 0.05 and abs(r0.im_mean) < 0.01 and abs(r1.im_mean - 0.5) < 0.025
    report_criterion(8, ok, f"Var Re {r0.re_var:.4f}, |E Im| {abs(r0.im_mean):.4f}, E Im for f=1 {r1.im_mean:.4f}")
    assert ok


def test_c09_zero_one(report_criterion):
    start = time.perf_counter()
    ladder = [1, 4, 16, 64, 256]
    su2 = convergence_experiment(Irrep(SU2, 1), 1.0, ladder, 10_000, make_rng(9, 0))
    u1 = convergence_experiment(Irrep(U1, 1), 1.0, ladder, 10_000, make_rng(9, 1))
    elapsed = time.perf_counter() - start
    ok = su2.means_ok and su2.decays and u1.flat and elapsed < 180
    assert su2.rungs[0].target == pytest.approx(2 * math.exp(-0.375))
    report_criterion(9, ok, f"SU2 L2 ratio {su2.ratio:.3f}, U1 ratio {u1.ratio:.3f}, {elapsed:.1f}s")
    assert ok


def test_c10_character_identities(report_criterion):
    worst = 0.0
    ok = True
    for k in (1, 2):
        rep = verify_character_identities(Irrep(SU2, k), 100_000, make_rng(10, k))
        ok = ok and rep.passed
        worst = max(worst, max(c.deviation / c.stderr for c in rep.checks))
    report_criterion(10, ok, f"character identities worst deviation {worst:.2f} sigma")
    assert ok


def test_c11_small_disk(report_criterion):
    ratios = []
    for k, area in enumerate((0.2, 0.05, 0.0125)):
        chain = metropolis_sample(sphere_graph(area, 1.0), None, 100_000, None, make_rng(11, k), group=SU2, stride=10)
        ratios.append(small_disk_estimate(chain, LOOP, area, burn_in=len(chain) // 10).ratio)
    variation = (max(ratios) - min(ratios)) / max(ratios)
    ok = variation < 0.25
    report_criterion(11, ok, "E rho / sqrt(area) = " + ", ".join(f"{r:.3f}" for r in ratios) + f"; variation {variation:.1%}")
    assert ok


def test_c12_cli_determinism(tmp_path, report_criterion):
    gpath = tmp_path / "g.json"
    save_graph(theta_sphere([0.2, 0.3, 0.5]), gpath)
    runs = {
        "sample": ["sample", "--graph", str(gpath), "--steps", "5000", "--seed", "3"],
        "wilson": ["wilson", "--mc", "5000", "--seed", "3"],
        "abelian-compare": ["abelian-compare", "--fixture", "torus", "--mc", "5000", "--seed", "3"],
        "zero-one": ["zero-one", "--mc", "2000", "--seed", "3"],
        "characters": ["characters", "--mc", "5000", "--seed", "3"],
    }
    mismatched = []
    for name, argv in runs.items():
        blobs = []
        for rep in range(2):
            out = tmp_path / f"{name}-{rep}.csv"
            main(argv + ["--out", str(out)])
            blobs.append(out.read_bytes())
        if blobs[0] != blobs[1] or not blobs[0]:
            mismatched.append(name)
    ok = not mismatched
    report_criterion(12, ok, f"byte-identical CSV for {len(runs) - len(mismatched)}/{len(runs)} commands")
    assert ok
