"""Gaussian realization of the U(1) Yang-Mills holonomy and white-noise extraction.

Face ``i`` of area ``s_i`` gets ``Y_i ~ N(0, s_i)``; with ``S = sum Y`` and total
area ``A`` the centred lifts ``X_i = Y_i - (s_i / A) S`` sum to zero and the face
holonomies are ``exp(i (X_i + (s_i / A) T))`` where ``T`` is a discrete Gaussian
on ``x + 2 pi Z``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .groups import TWO_PI, GroupElement, GroupId
from .surface import HomologyError, IntCycle, PathWord, SurfaceGraph, homology_decompose


def t_law(sigma_M: float, x_angle: float, tail: float = 1e-15) -> tuple[np.ndarray, np.ndarray]:
    """Support points ``x + 2 pi k`` and probabilities proportional to ``exp(-t**2 / (2 sigma_M))``."""
    if not sigma_M > 0:
        raise ValueError("sigma_M must be positive")
    x = (x_angle + math.pi) % TWO_PI - math.pi
    sd = math.sqrt(sigma_M)
    # a point at distance d from 0 carries weight <= exp(-d^2 / 2s); stop once the rest is negligible
    K = 1
    while math.exp(-((TWO_PI * K - math.pi) ** 2) / (2 * sigma_M)) * (1 + sd) > tail * 1e-3:
        K += 1
    pts = x + TWO_PI * np.arange(-K, K + 1)
    logw = -pts * pts / (2 * sigma_M)
    w = np.exp(logw - logw.max())
    return pts, w / w.sum()


def sample_T(sigma_M: float, x_angle: float, rng: np.random.Generator, size: int | None = None):
    pts, probs = t_law(sigma_M, x_angle)
    return rng.choice(pts, size=size, p=probs)


@dataclass(frozen=True)
class GaussianFaceField:
    areas: np.ndarray
    Y: np.ndarray
    S: float
    X: np.ndarray
    T_sample: float


@dataclass(frozen=True)
class GaussianBatch:
    """``n`` independent draws; arrays have a leading sample axis."""

    areas: np.ndarray
    Y: np.ndarray
    X: np.ndarray
    T: np.ndarray

    @property
    def face_angles(self) -> np.ndarray:
        frac = self.areas / self.areas.sum()
        return self.X + frac[None, :] * self.T[:, None]


def _check_areas(areas) -> np.ndarray:
    areas = np.asarray(areas, dtype=float)
    if areas.ndim != 1 or areas.size == 0 or np.any(areas <= 0):
        raise ValueError("areas must be a nonempty list of positive numbers")
    return areas


def sample_gaussian_batch(areas, x_angle: float, n: int, rng: np.random.Generator) -> GaussianBatch:
    areas = _check_areas(areas)
    A = areas.sum()
    Y = rng.normal(size=(n, areas.size)) * np.sqrt(areas)
    S = Y.sum(axis=1)
    X = Y - (areas / A)[None, :] * S[:, None]
    T = sample_T(A, x_angle, rng, size=n)
    return GaussianBatch(areas, Y, X, T)


def sample_gaussian_rep(areas, x_angle: float, rng: np.random.Generator) -> tuple[list[GroupElement], GaussianFaceField]:
    b = sample_gaussian_batch(areas, x_angle, 1, rng)
    hol = [GroupElement(GroupId.U1, float(a)) for a in b.face_angles[0]]
    fld = GaussianFaceField(b.areas, b.Y[0], float(b.Y[0].sum()), b.X[0], float(b.T[0]))
    return hol, fld


# ---------------------------------------------------------------------------
# double layer potentials


@dataclass(frozen=True)
class DlpVector:
    """``u_c = sum_i mu_i (1_{F_i} - s_i / A)`` in the face indicator basis."""

    coefficients: np.ndarray
    sigma_int: float
    closed: bool = True

    def norm2(self, areas) -> float:
        return float(np.sum(self.coefficients**2 * np.asarray(areas, dtype=float)))

    def sigma_int_mod1(self) -> float:
        return self.sigma_int % 1.0 if self.closed else self.sigma_int

    def __add__(self, other: "DlpVector") -> "DlpVector":
        return DlpVector(self.coefficients + other.coefficients, self.sigma_int + other.sigma_int, self.closed)


def dlp_from_mu(areas, mu, closed: bool = True) -> DlpVector:
    areas = _check_areas(areas)
    mu = np.asarray(mu, dtype=float)
    sig = float(np.dot(mu, areas) / areas.sum())
    return DlpVector(mu - sig, sig, closed)


def dlp_of_cycle(g: SurfaceGraph, c: IntCycle) -> DlpVector:
    try:
        lam, mu = homology_decompose(g, c)
    except HomologyError as exc:
        raise HomologyError(f"cycle is not a sum of face boundaries: {exc}") from None
    return dlp_from_mu(g.areas, mu, g.closed)


# ---------------------------------------------------------------------------
# white-noise holonomy


def _cycle(g: SurfaceGraph, c) -> IntCycle:
    return g.word_cycle(c) if isinstance(c, PathWord) else c


def wn_holonomy_batch(
    g: SurfaceGraph,
    cycles: Sequence,
    h1_loops: Sequence = (),
    x_angles: Sequence[float] = (),
    n: int = 1,
    rng: np.random.Generator | None = None,
    h1_values: Sequence[float | None] | None = None,
) -> np.ndarray:
    """Angles of ``WH_c`` for every cycle, shape ``(n, len(cycles))``.

    One Gaussian field, one ``T`` and one set of uniform generator values are
    shared across cycles, so the map ``c -> WH_c`` is multiplicative per draw.
    ``h1_values[i]`` pins generator ``i`` (a boundary loop) to a fixed angle;
    ``None`` leaves it uniform.
    """
    rng = rng or np.random.default_rng()
    h1 = [_cycle(g, l) for l in h1_loops]
    decomp = [homology_decompose(g, _cycle(g, c), h1) for c in cycles]
    x = float(sum(x_angles)) if not g.closed else 0.0
    batch = sample_gaussian_batch(g.areas, x, n, rng)
    if h1_values is None:
        h1_values = [None] * len(h1)
    U = np.column_stack(
        [rng.uniform(0.0, TWO_PI, size=n) if v is None else np.full(n, float(v)) for v in h1_values]
    ) if h1 else np.zeros((n, 0))
    out = np.empty((n, len(cycles)))
    for k, (lam, mu) in enumerate(decomp):
        d = dlp_from_mu(g.areas, mu, g.closed)
        ang = batch.Y @ d.coefficients + d.sigma_int * batch.T
        if h1:
            ang = ang + U @ np.asarray(lam, dtype=float)
        out[:, k] = np.mod(ang, TWO_PI)
    return out


def wn_holonomy(g: SurfaceGraph, cycles: Sequence, h1_data: Sequence = (), x_angles: Sequence[float] = (), rng=None) -> list[GroupElement]:
    ang = wn_holonomy_batch(g, cycles, h1_data, x_angles, 1, rng)[0]
    return [GroupElement(GroupId.U1, float(a)) for a in ang]


# ---------------------------------------------------------------------------
# law comparison against the Metropolis sampler


def _iid_mean(values: np.ndarray) -> tuple[complex, float]:
    n = values.shape[0]
    var = np.var(values.real, ddof=1) + np.var(np.imag(values), ddof=1)
    return complex(values.mean()), float(math.sqrt(var / n))


@dataclass
class MomentGap:
    name: str
    gaussian: complex
    gaussian_se: float
    metropolis: complex
    metropolis_se: float
    n_sigma: float

    @property
    def gap(self) -> float:
        return abs(self.gaussian - self.metropolis)

    @property
    def passed(self) -> bool:
        return self.gap <= self.n_sigma * math.hypot(self.gaussian_se, self.metropolis_se) + 1e-12


@dataclass
class LawReport:
    moments: list[MomentGap] = field(default_factory=list)
    h1_moments: list[MomentGap] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(m.passed for m in self.moments) and all(m.passed for m in self.h1_moments)


def law_equality_test(
    g: SurfaceGraph,
    x_angle: float,
    n_mc: int,
    rng: np.random.Generator,
    h1_loops: Sequence[PathWord] = (),
    stride: int = 5,
) -> LawReport:
    """Compare face-holonomy moments of the Gaussian realization with a U(1) Metropolis chain.

    Moments of order 1 to 3 of each face holonomy and the pairwise products
    ``E h_i h_j`` must agree within 4 combined standard errors; moments of
    the H1 generators must vanish within 3 standard errors in both.
    ``n_mc`` is both the number of Gaussian draws and of Metropolis steps.
    """
    from .discrete import ConditioningSpec, batch_means, holonomy_samples, metropolis_sample
    from .groups import GroupElement as GE

    r_gauss, r_chain = rng.spawn(2)
    cond = None
    if not g.closed:
        if len(g.boundary_loops) != 1:
            raise ValueError("law comparison supports at most one boundary loop")
        cond = ConditioningSpec(g.boundary_loops, (GE(GroupId.U1, x_angle),))
    chain = metropolis_sample(g, cond, n_mc, None, r_chain, group=GroupId.U1, stride=stride)
    burn = len(chain) // 10
    face_mc = np.column_stack([holonomy_samples(chain, f.word)[burn:] for f in g.faces])
    face_g = sample_gaussian_batch(g.areas, x_angle, n_mc, r_gauss).face_angles

    report = LawReport()

    def add(name, gv, mv, n_sigma, target):
        gm, gs = _iid_mean(gv)
        mm, ms = batch_means(mv)
        target.append(MomentGap(name, gm, gs, mm, ms, n_sigma))

    F = g.n_faces
    for i in range(F):
        for k in (1, 2, 3):
            add(f"E h{i}^{k}", np.exp(1j * k * face_g[:, i]), np.exp(1j * k * face_mc[:, i]), 4.0, report.moments)
    for i in range(F):
        for j in range(i + 1, F):
            add(
                f"E h{i} h{j}",
                np.exp(1j * (face_g[:, i] + face_g[:, j])),
                np.exp(1j * (face_mc[:, i] + face_mc[:, j])),
                4.0,
                report.moments,
            )
    if h1_loops:
        wn = wn_holonomy_batch(g, h1_loops, h1_loops, (x_angle,), n_mc, r_gauss)
        for k, loop in enumerate(h1_loops):
            mc = np.exp(1j * holonomy_samples(chain, loop)[burn:])
            gm, gs = _iid_mean(np.exp(1j * wn[:, k]))
            mm, ms = batch_means(mc)
            # both realizations are compared with the exact value 0
            report.h1_moments.append(MomentGap(f"E gen{k} (gaussian)", gm, gs, 0j, 0.0, 3.0))
            report.h1_moments.append(MomentGap(f"E gen{k} (metropolis)", 0j, 0.0, mm, ms, 3.0))
    return report


# ---------------------------------------------------------------------------
# white-noise extraction


@dataclass
class ExtractionRow:
    n: int
    re_mean: float
    re_var: float
    im_mean: float
    im_var: float
    target_re_var: float
    target_im_mean: float
    passed: bool


def _extraction_targets(f: np.ndarray, sigma_M: float, x_angle: float) -> tuple[float, float]:
    n = f.size
    s = sigma_M / n
    integral = float(f.sum() * s)
    l2_0 = float(np.sum(f * f) * s - integral**2 / sigma_M)
    pts, probs = t_law(sigma_M, x_angle)
    var_T = float(np.dot(probs, pts**2) - np.dot(probs, pts) ** 2)
    return l2_0 + var_T * (integral / sigma_M) ** 2, integral / (2 * sigma_M)


def mean_zero_unit(n: int) -> np.ndarray:
    """Alternating +-1 on ``n`` equal faces of a unit-area surface: mean 0, norm 1."""
    return np.where(np.arange(n) % 2 == 0, 1.0, -1.0)


def constant_one(n: int) -> np.ndarray:
    return np.ones(n)


def wn_extraction_experiment(
    n_ladder: Sequence[int],
    f: Callable[[int], np.ndarray],
    x_angle: float,
    n_mc: int,
    rng: np.random.Generator,
    sigma_M: float = 1.0,
    areas_ladder: Sequence[Sequence[float]] | None = None,
    rel_tol: float = 0.05,
    abs_tol: float = 0.01,
    chunk: int = 2000,
) -> list[ExtractionRow]:
    """``I_n(f) = (1/i) sum_j f_j (H_j - 1)`` on ``n`` equal faces, across a ladder of ``n``.

    Writing ``H_j = exp(i phi_j)``, ``Re I_n = sum f_j sin(phi_j)`` and
    ``Im I_n = sum f_j (1 - cos(phi_j))``.  The limit law has
    ``Re I = W0_f + T int f / A`` and ``Im I = int f / (2 A)``.
    A rung passes when the variance of the real part and the mean of the
    imaginary part are within ``rel_tol`` of their limits (``abs_tol`` when a
    limit vanishes).
    """
    rows = []
    for k, n in enumerate(n_ladder):
        if areas_ladder is not None:
            areas = np.asarray(areas_ladder[k], dtype=float)
            if areas.size != n or not np.allclose(areas, areas[0], rtol=1e-12, atol=0.0):
                raise ValueError("faces must have equal areas")
            sigma_M = float(areas.sum())
        areas = np.full(n, sigma_M / n)
        fn = np.asarray(f(n), dtype=float)
        if fn.shape != (n,):
            raise ValueError("test function must give one value per face")
        re_parts, im_parts = [], []
        for start in range(0, n_mc, chunk):
            b = sample_gaussian_batch(areas, x_angle, min(chunk, n_mc - start), rng)
            phi = b.face_angles
            re_parts.append(np.sin(phi) @ fn)
            im_parts.append((1.0 - np.cos(phi)) @ fn)
        re = np.concatenate(re_parts)
        im = np.concatenate(im_parts)
        tv, tm = _extraction_targets(fn, sigma_M, x_angle)
        re_var = float(np.var(re, ddof=1))
        im_mean = float(im.mean())
        ok_var = abs(re_var - tv) <= (rel_tol * tv if tv > abs_tol else abs_tol)
        ok_im = abs(im_mean - tm) <= (rel_tol * abs(tm) if abs(tm) > abs_tol else abs_tol)
        rows.append(ExtractionRow(n, float(re.mean()), re_var, im_mean, float(np.var(im, ddof=1)), tv, tm, bool(ok_var and ok_im)))
    return rows
