"""Product-of-characters statistic behind the small-scale zero-one law.

For ``n`` independent heat-kernel increments of time ``T/n`` the statistic
``prod_i chi_beta(g_i) / dim(beta)**(n - 1)`` has mean ``dim(beta) exp(-c2 T / 2)``
for every ``n``.  For semisimple groups its variance vanishes as ``n`` grows;
for U(1) it is ``chi_beta`` of a single ``p_T`` variable and keeps its law.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .groups import Irrep, character_values
from .heat import SmallTimeError, _check_t, sample_heat_kernel_angles


@dataclass(frozen=True)
class ProductStatistic:
    beta: Irrep
    T: float
    n: int
    value: complex


def target_mean(beta: Irrep, T: float) -> float:
    return beta.dim * math.exp(-0.5 * beta.casimir * T)


def product_statistic_samples(beta: Irrep, T: float, n: int, n_mc: int, rng: np.random.Generator, chunk: int = 1 << 20) -> np.ndarray:
    if n < 1:
        raise ValueError("n must be at least 1")
    if not T > 0:
        raise ValueError("T must be positive")
    try:
        _check_t(beta.group, T / n)
    except SmallTimeError as exc:
        raise SmallTimeError(f"{exc}; use a smaller n") from None
    d = float(beta.dim)
    rows = max(1, chunk // n)
    out = []
    for start in range(0, n_mc, rows):
        m = min(rows, n_mc - start)
        ang = sample_heat_kernel_angles(beta.group, T / n, m * n, rng)
        chi = character_values(beta.group, beta.label, ang).reshape(m, n) / d
        out.append(d * np.prod(chi, axis=1))
    vals = np.concatenate(out)
    return vals if beta.group.abelian else vals.real


def sample_product_statistic(beta: Irrep, T: float, n: int, rng: np.random.Generator) -> ProductStatistic:
    v = product_statistic_samples(beta, T, n, 1, rng)[0]
    return ProductStatistic(beta, T, n, complex(v))


@dataclass
class RungResult:
    n: int
    mean: complex
    mean_se: float
    l2_dist: float
    l2_se: float
    target: float

    @property
    def mean_ok(self) -> bool:
        return abs(self.mean - self.target) <= 3.0 * self.mean_se + 1e-12


@dataclass
class ConvergenceReport:
    beta: Irrep
    rungs: list[RungResult]

    @property
    def means_ok(self) -> bool:
        return all(r.mean_ok for r in self.rungs)

    @property
    def ratio(self) -> float:
        return self.rungs[-1].l2_dist / self.rungs[0].l2_dist

    @property
    def monotone(self) -> bool:
        """Decreasing distances, with one inversion tolerated if it is within one stderr."""
        inversions = []
        for a, b in zip(self.rungs, self.rungs[1:]):
            if b.l2_dist > a.l2_dist:
                inversions.append(b.l2_dist - a.l2_dist <= math.hypot(a.l2_se, b.l2_se))
        return len(inversions) == 0 or (len(inversions) == 1 and inversions[0])

    @property
    def decays(self) -> bool:
        return self.monotone and self.ratio < 0.25

    @property
    def flat(self) -> bool:
        """Every distance agrees with the first one within 3 combined stderr."""
        r0 = self.rungs[0]
        return all(abs(r.l2_dist - r0.l2_dist) <= 3.0 * math.hypot(r.l2_se, r0.l2_se) for r in self.rungs)

    @property
    def passed(self) -> bool:
        return self.means_ok and (self.flat if self.beta.group.abelian else self.decays)


def convergence_experiment(beta: Irrep, T: float, n_ladder: Sequence[int], n_mc: int, rng: np.random.Generator) -> ConvergenceReport:
    """Mean and L2 distance to ``dim exp(-c2 T / 2)`` at every rung of ``n_ladder``.

    Semisimple groups pass when the distance decays (monotone up to one
    inversion, final below a quarter of the first); U(1) passes when it stays flat.
    """
    if list(n_ladder) != sorted(set(n_ladder)):
        raise ValueError("ladder must be strictly increasing")
    c = target_mean(beta, T)
    rungs = []
    for n in n_ladder:
        s = product_statistic_samples(beta, T, n, n_mc, rng)
        mean = complex(np.mean(s))
        var = np.var(np.real(s), ddof=1) + np.var(np.imag(s), ddof=1)
        sq = np.abs(s - c) ** 2
        d2 = float(sq.mean())
        d = math.sqrt(d2)
        d2_se = float(np.std(sq, ddof=1) / math.sqrt(n_mc))
        rungs.append(RungResult(n, mean, math.sqrt(var / n_mc), d, d2_se / (2 * d) if d > 0 else 0.0, c))
    return ConvergenceReport(beta, rungs)
