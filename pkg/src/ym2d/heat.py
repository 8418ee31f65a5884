"""Heat kernel ``p_t`` on U(1), SU(2), SO(3).

``p_t = sum_beta dim(beta) exp(-c2(beta) t / 2) chi_beta`` is the density of
Brownian motion at time ``t`` with respect to normalized Haar measure.  For
U(1) at ``t < 1`` the Poisson-dual wrapped Gaussian
``sqrt(2 pi / t) sum_k exp(-(theta - 2 pi k)**2 / (2 t))`` is used instead.
SU(2) has a similar image sum in the half angle: with ``s = t / 4``,
``p_t(theta) = C sum_n (theta - 2 pi n) exp(-(theta - 2 pi n)**2 / (2 s)) / sin(theta)``
where ``C = exp(t / 8) sqrt(2 pi / s) / (2 s)``; SO(3) follows from
``p_t(phi) = (p^SU2_t(phi / 2) + p^SU2_t(pi - phi / 2)) / 2``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.special import logsumexp, ndtr

from .groups import (
    TWO_PI,
    ConjClass,
    GroupElement,
    GroupId,
    canonical_so3,
    character_matrix,
    irrep_casimir,
    irrep_dim,
    quadrature_nodes,
)

CASIMIR_CAP = 1e6
SU2_T_FLOOR = 1e-4
U1_DUAL_BELOW = 1.0
DUAL_BELOW = 1.0
CDF_NODES = 4096


class SmallTimeError(ValueError):
    """Raised when a character series would need irreps beyond the hard cap."""


@dataclass(frozen=True)
class SeriesTruncation:
    """Irreps kept in a character series plus a certified bound on the rest."""

    group: GroupId
    labels: np.ndarray
    cutoff_casimir: float
    tail_bound: float


def _level_labels(group: GroupId, m: int) -> list[int]:
    if group is GroupId.U1 and m > 0:
        return [m, -m]
    return [m]


def _level_bound(group: GroupId, m: int, t: float, power: float) -> float:
    mult = 2 if (group is GroupId.U1 and m > 0) else 1
    return mult * float(irrep_dim(group, m)) ** power * math.exp(-0.5 * irrep_casimir(group, m) * t)


@lru_cache(maxsize=512)
def truncate_series(group: GroupId, t: float, power: float, tol: float) -> SeriesTruncation:
    """Keep irreps until ``sum_{omitted} dim**power exp(-c2 t/2) <= tol``.

    The omitted terms decay at least geometrically once the ratio of two
    consecutive level bounds drops below one (the ratio is decreasing in the
    level for these families), giving the certified tail
    ``b_{K+1} / (1 - b_{K+2} / b_{K+1})``.
    """
    if t <= 0:
        raise ValueError("t must be positive")
    if tol <= 0:
        raise ValueError("tol must be positive")
    power = max(power, 0.0)
    m = 0
    labels: list[int] = []
    while True:
        labels.extend(_level_labels(group, m))
        b1 = _level_bound(group, m + 1, t, power)
        b2 = _level_bound(group, m + 2, t, power)
        r = b2 / b1 if b1 > 0 else 0.0
        if r < 1.0:
            tail = b1 / (1.0 - r)
            if tail <= tol:
                break
        m += 1
        if irrep_casimir(group, m + 1) > CASIMIR_CAP:
            raise SmallTimeError(f"t={t} too small for character mode")
    arr = np.array(labels, dtype=np.int64)
    arr.setflags(write=False)
    return SeriesTruncation(group, arr, float(irrep_casimir(group, m)), tail)


@dataclass(frozen=True)
class HeatKernelEval:
    group: GroupId
    t: float
    value: float
    cutoff_casimir: float
    tail_bound: float


def _check_t(group: GroupId, t: float) -> None:
    if t <= 0:
        raise ValueError("t must be positive")
    if group is not GroupId.U1 and t < SU2_T_FLOOR:
        raise SmallTimeError(f"t={t} too small for character mode (floor {SU2_T_FLOOR})")


def _u1_dual_terms(t: float, tol: float) -> tuple[np.ndarray, float]:
    pref = math.sqrt(TWO_PI / t)
    # image charges beyond |k| = K sit at distance >= (2K - 1) pi from [-pi, pi]
    k_max = 1
    while True:
        d = (2 * k_max + 1) * math.pi
        tail = 2.0 * pref * math.exp(-d * d / (2 * t)) / (1.0 - math.exp(-2 * math.pi * d / t))
        if tail <= tol:
            break
        k_max += 1
    return np.arange(-k_max, k_max + 1), tail


def _wrap_pi(theta: np.ndarray) -> np.ndarray:
    return np.mod(theta + math.pi, TWO_PI) - math.pi


_DUAL_PAIRS = 4


def _pair_factor(c, x, s: float):
    """``((c - x) - (c + x) exp(-2 c x / s)) / sin(x)``, stable as ``x -> 0``."""
    z = 2.0 * c * x / s
    small = z < 1e-12
    h = np.where(small, 1.0, -np.expm1(-z) / np.where(small, 1.0, z))
    tiny = x < 1e-300
    ratio = np.where(tiny, 1.0, x / np.sin(np.where(tiny, 1.0, x)))
    return ratio * (-2.0 + (c + x) * (2.0 * c / s) * h)


def _su2_dual_log(t: float, theta) -> np.ndarray:
    """``log p_t`` on SU(2) at half angles in [0, pi] from the image sum."""
    theta = np.asarray(theta, dtype=float)
    s = 0.25 * t
    logc = t / 8.0 + 0.5 * math.log(TWO_PI / s) - math.log(2.0 * s)
    low = theta <= 0.5 * math.pi
    x = np.where(low, theta, math.pi - theta)
    expo, coef = [], []
    tiny = x < 1e-300
    ratio = np.where(tiny, 1.0, x / np.sin(np.where(tiny, 1.0, x)))
    # low half: the n = 0 image, then pairs n <-> -n
    expo.append(np.where(low, -x * x / (2 * s), -((math.pi - x) ** 2) / (2 * s)))
    coef.append(np.where(low, ratio, _pair_factor(math.pi, x, s)))
    for k in range(1, _DUAL_PAIRS):
        c_low, c_high = TWO_PI * k, (2 * k + 1) * math.pi
        c = np.where(low, c_low, c_high)
        expo.append(-((c - x) ** 2) / (2 * s))
        coef.append(np.where(low, -1.0, 1.0) * _pair_factor(c, x, s))
    val = logsumexp(np.stack(expo, axis=-1), b=np.stack(coef, axis=-1), axis=-1)
    return logc + val


def _pair_factor_scalar(c: float, x: float, s: float) -> float:
    z = 2.0 * c * x / s
    h = 1.0 if z < 1e-12 else -math.expm1(-z) / z
    ratio = 1.0 if x < 1e-300 else x / math.sin(x)
    return ratio * (-2.0 + (c + x) * (2.0 * c / s) * h)


def su2_dual_log_scalar(t: float, theta: float) -> float:
    """Scalar twin of the vectorized SU(2) image sum, for tight sampling loops."""
    s = 0.25 * t
    logc = t / 8.0 + 0.5 * math.log(TWO_PI / s) - math.log(2.0 * s)
    if theta <= 0.5 * math.pi:
        x = theta
        terms = [(-x * x / (2 * s), 1.0 if x < 1e-300 else x / math.sin(x))]
        terms += [(-((TWO_PI * k - x) ** 2) / (2 * s), -_pair_factor_scalar(TWO_PI * k, x, s)) for k in range(1, _DUAL_PAIRS)]
    else:
        x = math.pi - theta
        terms = [
            (-(((2 * k + 1) * math.pi - x) ** 2) / (2 * s), _pair_factor_scalar((2 * k + 1) * math.pi, x, s))
            for k in range(_DUAL_PAIRS)
        ]
    top = terms[0][0]
    total = sum(c * math.exp(e - top) for e, c in terms)
    return logc + top + math.log(total) if total > 0 else -math.inf


def _su2_dual_tail(t: float) -> float:
    """Bound on the omitted images: twice the largest first omitted pair."""
    s = 0.25 * t
    c = TWO_PI * _DUAL_PAIRS
    logc = t / 8.0 + 0.5 * math.log(TWO_PI / s) - math.log(2.0 * s)
    mag = 0.5 * math.pi * (2.0 + (c + math.pi) * 2.0 * c / s)
    return 2.0 * math.exp(logc - (c - 0.5 * math.pi) ** 2 / (2 * s)) * mag


def log_heat_kernel(group: GroupId, t: float, angles, tol: float = 1e-12) -> np.ndarray:
    """``log p_t``, finite wherever the kernel is positive even if it underflows."""
    group = GroupId.parse(group)
    _check_t(group, t)
    angles = np.asarray(angles, dtype=float)
    if group is GroupId.U1:
        return log_heat_kernel_u1(t, angles, tol)
    if t < DUAL_BELOW:
        if group is GroupId.SU2:
            return _su2_dual_log(t, angles)
        half = 0.5 * angles
        return np.logaddexp(_su2_dual_log(t, half), _su2_dual_log(t, math.pi - half)) - math.log(2.0)
    with np.errstate(divide="ignore"):
        return np.log(heat_kernel_values(group, t, angles, tol))


def heat_kernel_values(group: GroupId, t: float, angles, tol: float = 1e-12) -> np.ndarray:
    """``p_t`` at an array of class angles."""
    group = GroupId.parse(group)
    _check_t(group, t)
    angles = np.asarray(angles, dtype=float)
    if group is GroupId.U1 and t < U1_DUAL_BELOW:
        ks, _ = _u1_dual_terms(t, tol)
        th = _wrap_pi(angles)[..., None] - TWO_PI * ks
        return math.sqrt(TWO_PI / t) * np.exp(-th * th / (2 * t)).sum(axis=-1)
    if group is not GroupId.U1 and t < DUAL_BELOW:
        return np.exp(log_heat_kernel(group, t, angles, tol))
    tr = truncate_series(group, t, 2.0, tol)
    coef = irrep_dim(group, tr.labels) * np.exp(-0.5 * irrep_casimir(group, tr.labels) * t)
    flat = angles.reshape(-1)
    vals = character_matrix(group, tr.labels, flat) @ coef
    return np.real(vals).reshape(angles.shape)


def log_heat_kernel_u1(t: float, angles, tol: float = 1e-12) -> np.ndarray:
    """``log p_t`` for U(1), accurate where ``p_t`` underflows."""
    angles = np.asarray(angles, dtype=float)
    if t >= U1_DUAL_BELOW:
        return np.log(heat_kernel_values(GroupId.U1, t, angles, tol))
    ks, _ = _u1_dual_terms(t, tol)
    th = _wrap_pi(angles)[..., None] - TWO_PI * ks
    return 0.5 * math.log(TWO_PI / t) + logsumexp(-th * th / (2 * t), axis=-1)


def heat_kernel_eval(group: GroupId, t: float, c: ConjClass, tol: float = 1e-12) -> HeatKernelEval:
    group = GroupId.parse(group)
    _check_t(group, t)
    if c.group is not group:
        raise ValueError("class belongs to another group")
    value = float(heat_kernel_values(group, t, c.angle, tol))
    if group is GroupId.U1 and t < U1_DUAL_BELOW:
        _, tail = _u1_dual_terms(t, tol)
        cutoff = math.inf
    elif t < DUAL_BELOW:
        tail, cutoff = _su2_dual_tail(t), math.inf
    else:
        tr = truncate_series(group, t, 2.0, tol)
        tail, cutoff = tr.tail_bound, tr.cutoff_casimir
    return HeatKernelEval(group, t, value, cutoff, tail)


def heat_kernel(group: GroupId, t: float, c: ConjClass, tol: float = 1e-12) -> float:
    return heat_kernel_eval(group, t, c, tol).value


def character_coefficients(group: GroupId, f_values: np.ndarray, labels, n_quad: int) -> np.ndarray:
    """``int f conj(chi_alpha)`` by class quadrature, ``f_values`` given at the nodes."""
    angles, weights = quadrature_nodes(group, n_quad)
    chi = character_matrix(group, labels, angles)
    return (weights * f_values) @ np.conj(chi)


def convolve_central(group: GroupId, f_hat: np.ndarray, g_hat: np.ndarray, labels, angles) -> np.ndarray:
    """Evaluate ``f * g`` from character coefficients (``chi_a * chi_b = delta chi_a / dim``)."""
    dims = irrep_dim(group, np.asarray(labels))
    chi = character_matrix(group, labels, np.atleast_1d(np.asarray(angles, dtype=float)))
    return chi @ (f_hat * g_hat / dims)


def semigroup_check(group: GroupId, s: float, t: float, c: ConjClass, n_quad: int | None = None) -> float:
    """``|(p_s * p_t)(c) - p_{s+t}(c)|`` with the convolution done in character space.

    The character coefficients of ``p_s`` and ``p_t`` are obtained by class
    quadrature of the kernels themselves, not from the closed form.
    """
    group = GroupId.parse(group)
    if s <= 0 or t <= 0:
        raise ValueError("s and t must be positive")
    if n_quad is None:
        n_quad = 512 if group is GroupId.U1 else 256
    labels = truncate_series(group, s + t, 3.0, 1e-16).labels
    angles, _ = quadrature_nodes(group, n_quad)
    ps = heat_kernel_values(group, s, angles, 1e-15)
    pt = heat_kernel_values(group, t, angles, 1e-15)
    fs = character_coefficients(group, ps, labels, n_quad)
    ft = character_coefficients(group, pt, labels, n_quad)
    conv = convolve_central(group, fs, ft, labels, [c.angle])[0]
    exact = heat_kernel_values(group, s + t, c.angle, 1e-15)
    return float(abs(conv - exact))


# ---------------------------------------------------------------------------
# sampling


@dataclass(frozen=True)
class _CdfTable:
    nodes: np.ndarray
    cdf: np.ndarray


def _angle_scale(group: GroupId, t: float) -> float:
    """Upper end of the tabulated class-angle range (far beyond the bulk)."""
    if group is GroupId.SU2:
        return min(math.pi, 7.0 * math.sqrt(t))
    return min(math.pi, 14.0 * math.sqrt(t))


def _sin_sin_integral(m: np.ndarray, x: np.ndarray) -> np.ndarray:
    """``int_0^x sin(m s) sin(s) ds`` for integer ``m >= 1``, columns over ``m``."""
    x = x[:, None]
    lo = (m - 1).astype(float)
    hi = (m + 1).astype(float)
    with np.errstate(invalid="ignore", divide="ignore"):
        first = np.where(lo == 0, x, np.sin(lo * x) / np.where(lo == 0, 1.0, lo))
    return 0.5 * (first - np.sin(hi * x) / hi)


@lru_cache(maxsize=128)
def _cdf_table(group: GroupId, t: float) -> _CdfTable:
    hi = _angle_scale(group, t)
    if group is GroupId.U1:
        nodes = np.linspace(-hi, hi, CDF_NODES)
        if t < U1_DUAL_BELOW:
            ks, _ = _u1_dual_terms(t, 1e-16)
            st = math.sqrt(t)
            cdf = (ndtr((nodes[:, None] - TWO_PI * ks) / st) - ndtr((-hi - TWO_PI * ks) / st)).sum(axis=1)
        else:
            n = np.arange(1, truncate_series(group, t, 1.0, 1e-16).labels.max() + 1)
            w = np.exp(-0.5 * n * n * t)
            cdf = (nodes + hi) / TWO_PI + (np.sin(np.outer(nodes, n)) - np.sin(-hi * n)) @ (w / n) / math.pi
    else:
        labels = truncate_series(group, t, 2.0, 1e-16).labels
        nodes = np.linspace(0.0, hi, CDF_NODES)
        if group is GroupId.SU2:
            m = labels + 1
            cdf = (2.0 / math.pi) * _sin_sin_integral(m, nodes) @ (m * np.exp(-0.5 * irrep_casimir(group, labels) * t))
        else:
            m = 2 * labels + 1
            cdf = (4.0 / math.pi) * _sin_sin_integral(m, 0.5 * nodes) @ (m * np.exp(-0.5 * irrep_casimir(group, labels) * t))
    cdf = np.maximum.accumulate(cdf - cdf[0])
    cdf = cdf / cdf[-1]
    nodes.setflags(write=False)
    cdf.setflags(write=False)
    return _CdfTable(nodes, cdf)


def sample_heat_kernel_angles(group: GroupId, t: float, size: int, rng: np.random.Generator) -> np.ndarray:
    """Class angles of ``size`` independent draws from ``p_t(g) dg``.

    U(1) angles come back in ``(-pi, pi]``, SU(2) half-angles and SO(3)
    rotation angles in ``[0, pi]``.
    """
    group = GroupId.parse(group)
    _check_t(group, t)
    table = _cdf_table(group, float(t))
    return np.interp(rng.random(size), table.cdf, table.nodes)


def _random_axes(size: int, rng: np.random.Generator) -> np.ndarray:
    v = rng.standard_normal((size, 3))
    return v / np.linalg.norm(v, axis=1, keepdims=True)


def sample_heat_kernel_array(group: GroupId, t: float, size: int, rng: np.random.Generator) -> np.ndarray:
    """Raw payloads (angles or quaternions) of heat-kernel distributed elements."""
    group = GroupId.parse(group)
    ang = sample_heat_kernel_angles(group, t, size, rng)
    if group is GroupId.U1:
        return np.mod(ang, TWO_PI)
    half = ang if group is GroupId.SU2 else 0.5 * ang
    # a class representative conjugated by a Haar element has a uniform axis
    axes = _random_axes(size, rng)
    return np.concatenate([np.cos(half)[:, None], np.sin(half)[:, None] * axes], axis=1)


def sample_heat_kernel(group: GroupId, t: float, rng: np.random.Generator) -> GroupElement:
    group = GroupId.parse(group)
    raw = sample_heat_kernel_array(group, t, 1, rng)[0]
    if group is GroupId.U1:
        return GroupElement(group, float(raw))
    q = tuple(float(v) for v in raw)
    return GroupElement(group, canonical_so3(q) if group is GroupId.SO3 else q)


def rho_of_angles(group: GroupId, angles: np.ndarray) -> np.ndarray:
    """Distance of a class to the identity measured by its angle."""
    if group is GroupId.U1:
        a = np.mod(angles, TWO_PI)
        return np.minimum(a, TWO_PI - a)
    return np.asarray(angles, dtype=float)


def rho_moment(group: GroupId, t: float, p: int, n_mc: int, rng: np.random.Generator) -> float:
    """Monte-Carlo estimate of ``int rho(g)**p p_t(g) dg``."""
    if p not in (1, 2, 4):
        raise ValueError("p must be 1, 2 or 4")
    group = GroupId.parse(group)
    ang = sample_heat_kernel_angles(group, t, n_mc, rng)
    return float(np.mean(rho_of_angles(group, ang) ** p))
