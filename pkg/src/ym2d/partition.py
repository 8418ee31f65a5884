"""Conditional partition functions ``Z_{p,g,T}`` and numerical checks of their surgery algebra.

``Z_{p,g,T}(t_1, ..., t_p) = sum_alpha dim(alpha)**(2 - 2g) exp(-c2(alpha) T / 2)
prod_i chi_alpha(t_i) / dim(alpha)``, a central function of each boundary holonomy.
Gluing two boundary circles corresponds to integrating ``Z(..., t) Z(t^-1, ...)`` over
conjugacy classes.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

import numpy as np

from .groups import (
    ConjClass,
    GroupId,
    GroupMismatchError,
    Irrep,
    character_matrix,
    character_values,
    irrep_casimir,
    irrep_dim,
    quadrature_nodes,
)
from .heat import _check_t, character_coefficients, heat_kernel_values, truncate_series


@dataclass(frozen=True)
class SurfaceSignature:
    p: int
    g: int
    T: float

    def __post_init__(self):
        if self.p < 0 or self.g < 0:
            raise ValueError("p and g must be nonnegative")
        if not self.T > 0:
            raise ValueError("T must be positive")

    @classmethod
    def parse(cls, text: str) -> "SurfaceSignature":
        p, g, T = text.split(",")
        return cls(int(p), int(g), float(T))

    def as_tuple(self) -> tuple[int, int, float]:
        return (self.p, self.g, self.T)


@dataclass(frozen=True)
class ZValue:
    value: float
    tail_bound: float
    cutoff_casimir: float

    def __float__(self) -> float:
        return self.value


def default_nodes(group: GroupId) -> int:
    return 512 if group is GroupId.U1 else 256


def inverse_angles(group: GroupId, angles):
    """Class angles of inverses: negation for U(1), identity otherwise."""
    angles = np.asarray(angles, dtype=float)
    if group is GroupId.U1:
        return np.mod(-angles, 2.0 * math.pi)
    return angles


def _series(group: GroupId, g: int, T: float, tol: float):
    _check_t(group, T)
    tr = truncate_series(group, T, float(max(2 - 2 * g, 0)), tol)
    return tr, irrep_dim(group, tr.labels).astype(float), np.exp(-0.5 * irrep_casimir(group, tr.labels) * T)


def z_coefficients(group: GroupId, p: int, g: int, T: float, tol: float = 1e-12):
    """Labels and weights ``dim**(2 - 2g - p) exp(-c2 T / 2)`` of the character expansion."""
    tr, d, e = _series(group, g, T, tol)
    return tr, d ** (2 - 2 * g - p) * e


def z_values(group: GroupId, g: int, T: float, angles: Sequence, tol: float = 1e-12) -> np.ndarray:
    """Vectorized ``Z_{p,g,T}``; ``angles`` holds ``p`` broadcastable arrays of class angles."""
    group = GroupId.parse(group)
    arrays = np.broadcast_arrays(*[np.asarray(a, dtype=float) for a in angles]) if angles else [np.zeros(())]
    shape = arrays[0].shape
    tr, coef = z_coefficients(group, len(angles), g, T, tol)
    acc = np.ones((int(np.prod(shape, dtype=int)), len(tr.labels)), dtype=complex)
    for a in arrays if angles else []:
        acc *= character_matrix(group, tr.labels, a.reshape(-1))
    return np.real(acc @ coef).reshape(shape)


def _quantize(angles: Sequence[float]) -> tuple[float, ...]:
    return tuple(round(float(a), 12) for a in angles)


@lru_cache(maxsize=4096)
def _z_cached(group: GroupId, p: int, g: int, T: float, key: tuple[float, ...], tol: float) -> ZValue:
    tr, _ = z_coefficients(group, p, g, T, tol)
    val = float(z_values(group, g, T, [np.array(a) for a in key], tol)) if key else float(z_values(group, g, T, [], tol))
    return ZValue(val, tr.tail_bound, tr.cutoff_casimir)


def z_eval(group: GroupId | str, sig: SurfaceSignature, classes: Sequence[ConjClass], tol: float = 1e-12) -> ZValue:
    group = GroupId.parse(group)
    if len(classes) != sig.p:
        raise ValueError(f"expected {sig.p} boundary classes, got {len(classes)}")
    if not tol > 0:
        raise ValueError("tol must be positive")
    for c in classes:
        if c.group is not group:
            raise GroupMismatchError("boundary class in the wrong group")
    return _z_cached(group, sig.p, sig.g, float(sig.T), _quantize([c.angle for c in classes]), tol)


def z_to_json(group: GroupId, sig: SurfaceSignature, classes: Sequence[ConjClass], z: ZValue) -> dict:
    return {
        "group": group.value,
        "signature": list(sig.as_tuple()),
        "classes": [c.angle for c in classes],
        "value": z.value,
        "tail_bound": z.tail_bound,
    }


# ---------------------------------------------------------------------------
# gluing


def _nodes(group: GroupId, n_quad: int | None):
    return quadrature_nodes(group, n_quad or default_nodes(group))


def _angles(classes: Sequence[ConjClass]) -> list[float]:
    return [c.angle for c in classes]


def glue_pair_check(
    group: GroupId | str,
    sig1: SurfaceSignature,
    sig2: SurfaceSignature,
    classes1: Sequence[ConjClass],
    classes2: Sequence[ConjClass],
    n_quad: int | None = None,
    tol: float = 1e-12,
) -> float:
    """``|int Z_1(..., t) Z_2(t^-1, ...) dt - Z_glued|``; the glued boundary is the last of ``sig1`` and the first of ``sig2``."""
    group = GroupId.parse(group)
    if sig1.p < 1 or sig2.p < 1:
        raise ValueError("both surfaces need a boundary component to glue")
    if len(classes1) != sig1.p - 1 or len(classes2) != sig2.p - 1:
        raise ValueError("classes exclude the glued boundary")
    t, w = _nodes(group, n_quad)
    a1 = [np.full_like(t, a) for a in _angles(classes1)]
    a2 = [np.full_like(t, a) for a in _angles(classes2)]
    z1 = z_values(group, sig1.g, sig1.T, a1 + [t], tol)
    z2 = z_values(group, sig2.g, sig2.T, [inverse_angles(group, t)] + a2, tol)
    glued = SurfaceSignature(sig1.p + sig2.p - 2, sig1.g + sig2.g, sig1.T + sig2.T)
    target = z_eval(group, glued, list(classes1) + list(classes2), tol).value
    return abs(float(np.dot(w, z1 * z2)) - target)


def glue_handle_check(
    group: GroupId | str,
    sig: SurfaceSignature,
    classes: Sequence[ConjClass],
    n_quad: int | None = None,
    tol: float = 1e-12,
) -> float:
    """``|int Z_{p+2,g,T}(..., t, t^-1) dt - Z_{p,g+1,T}(...)|`` where ``sig`` is the pre-glue signature."""
    group = GroupId.parse(group)
    if sig.p < 2:
        raise ValueError("self-gluing needs two boundary components")
    if len(classes) != sig.p - 2:
        raise ValueError("classes exclude the two glued boundaries")
    t, w = _nodes(group, n_quad)
    a = [np.full_like(t, x) for x in _angles(classes)]
    z = z_values(group, sig.g, sig.T, a + [t, inverse_angles(group, t)], tol)
    target = z_eval(group, SurfaceSignature(sig.p - 2, sig.g + 1, sig.T), classes, tol).value
    return abs(float(np.dot(w, z)) - target)


def _pants_tensor(group: GroupId, T: float, grids: Sequence[np.ndarray], tol: float) -> np.ndarray:
    """``Z_{3,0,T}`` on the product grid ``grids[0] x grids[1] x grids[2]``."""
    tr, coef = z_coefficients(group, 3, 0, T, tol)
    m = [character_matrix(group, tr.labels, np.asarray(gr, dtype=float).reshape(-1)) for gr in grids]
    return np.real(np.einsum("a,ia,ja,ka->ijk", coef, m[0], m[1], m[2], optimize=True))


def bricks_reconstruct(
    group: GroupId | str,
    sig: SurfaceSignature,
    classes: Sequence[ConjClass],
    tol: float = 1e-12,
    n_quad: int = 96,
) -> ZValue:
    """Rebuild ``Z_{p,g,T}`` from disks ``Z_{1,0}`` and pants ``Z_{3,0}`` by gluing.

    Starting from a disk with an open boundary ``u``, each fixed boundary is
    attached by a pants, each handle by two pants glued along two circles,
    and a final disk closes ``u``.  All bricks share the area equally.
    """
    group = GroupId.parse(group)
    if len(classes) != sig.p:
        raise ValueError(f"expected {sig.p} boundary classes")
    n_bricks = 2 + sig.p + 2 * sig.g
    a = sig.T / n_bricks
    t, w = quadrature_nodes(group, n_quad)
    tinv = inverse_angles(group, t)
    F = z_values(group, 0, a, [t], tol)  # disk, open boundary u
    tail = 0.0
    for x in _angles(classes):
        P = _pants_tensor(group, a, [tinv, np.array([x]), t], tol)[:, 0, :]
        F = (w * F) @ P
    for _ in range(sig.g):
        P1 = _pants_tensor(group, a, [tinv, t, t], tol)
        P2 = _pants_tensor(group, a, [tinv, tinv, t], tol)
        F = np.einsum("s,svw,v,w,vwu->u", w * F, P1, w, w, P2, optimize=True)
    cap = z_values(group, 0, a, [tinv], tol)
    value = float(np.dot(w * F, cap))
    tr, _ = z_coefficients(group, 3, 0, a, tol)
    tail = n_bricks * tr.tail_bound
    return ZValue(value, tail, tr.cutoff_casimir)


def _class_grid(group: GroupId, n: int = 5) -> np.ndarray:
    hi = 2.0 * math.pi if group is GroupId.U1 else math.pi
    return np.linspace(0.0, hi, n, endpoint=group is not GroupId.U1)


def heat_flow_check(
    group: GroupId | str,
    sig: SurfaceSignature,
    classes: Sequence[ConjClass],
    dT: float,
    tol: float = 1e-12,
    n_quad: int | None = None,
) -> float:
    """Convolving ``Z_{p,g,T}`` with ``p_dT`` in the last variable gives ``Z_{p,g,T+dT}``.

    ``classes`` fixes the first ``p - 1`` variables; the last one runs over a
    5-point class grid.  The convolution is computed in character space from
    quadrature coefficients of both factors.
    """
    group = GroupId.parse(group)
    if not dT > 0:
        raise ValueError("dT must be positive")
    if sig.p < 1 or len(classes) != sig.p - 1:
        raise ValueError("need p >= 1 and p - 1 fixed classes")
    n = n_quad or default_nodes(group)
    t, _ = quadrature_nodes(group, n)
    fixed = [np.full_like(t, x) for x in _angles(classes)]
    labels = truncate_series(group, min(sig.T, dT), 3.0, tol * 1e-3).labels
    if group is GroupId.U1:
        lim = int(np.abs(labels).max())
        labels = np.arange(-lim, lim + 1)
    f_hat = character_coefficients(group, z_values(group, sig.g, sig.T, fixed + [t], tol), labels, n)
    k_hat = character_coefficients(group, heat_kernel_values(group, dT, t, tol), labels, n)
    grid = _class_grid(group)
    d = irrep_dim(group, labels).astype(float)
    conv = np.real(character_matrix(group, labels, grid) @ (f_hat * k_hat / d))
    fixed_g = [np.full_like(grid, x) for x in _angles(classes)]
    target = z_values(group, sig.g, sig.T + dT, fixed_g + [grid], tol)
    return float(np.max(np.abs(conv - target)))


def pants_convolution_check(
    group: GroupId | str,
    f1_irrep: Irrep,
    f2_irrep: Irrep,
    T: float,
    n_quad: int | None = None,
    tol: float = 1e-12,
) -> float:
    """``int int chi_a(t1) chi_b(t2) Z_{3,0,T}(t1, t2, x) = delta_ab exp(-c2 T / 2) chi_a(x^-1) / dim``.

    For SU(2) and SO(3) ``chi_a(x^-1) = chi_a(x)``; for U(1) the inverse matters.
    """
    group = GroupId.parse(group)
    if f1_irrep.group is not group or f2_irrep.group is not group:
        raise GroupMismatchError("irreps must belong to the given group")
    t, w = _nodes(group, n_quad)
    grid = _class_grid(group)
    P = _pants_tensor(group, T, [t, t, grid], tol)
    c1 = character_values(group, f1_irrep.label, t)
    c2 = character_values(group, f2_irrep.label, t)
    lhs = np.einsum("i,j,ijk->k", w * c1, w * c2, P)
    if f1_irrep == f2_irrep:
        rhs = math.exp(-0.5 * f1_irrep.casimir * T) * character_values(group, f1_irrep.label, inverse_angles(group, grid)) / f1_irrep.dim
    else:
        rhs = np.zeros_like(grid)
    return float(np.max(np.abs(lhs - rhs)))


# ---------------------------------------------------------------------------
# transitions and boundary densities


class CylinderTransition:
    """Joint law of holonomies along two parallel circles of a cylinder.

    The boundary classes are ``t0`` (at level 0) and ``t1`` (at level ``total``),
    the circles sit at levels ``s1 < s2``.
    """

    def __init__(self, group: GroupId | str, t0: ConjClass, t1: ConjClass, s1: float, s2: float, total: float, tol: float = 1e-12):
        if not 0 < s1 < s2 < total:
            raise ValueError("need 0 < s1 < s2 < total")
        self.group = GroupId.parse(group)
        self.a0 = inverse_angles(self.group, t0.angle)
        self.a1 = t1.angle
        self.s1, self.s2, self.total, self.tol = s1, s2, total, tol
        self.norm = float(z_values(self.group, 0, total, [self.a0, self.a1], tol))

    def _z2(self, x, y, T):
        return z_values(self.group, 0, T, [x, y], self.tol)

    def density(self, u1, u2) -> np.ndarray:
        g, inv = self.group, inverse_angles
        u1, u2 = np.broadcast_arrays(np.asarray(u1, float), np.asarray(u2, float))
        return (
            self._z2(self.a0, u1, self.s1)
            * self._z2(inv(g, u1), u2, self.s2 - self.s1)
            * self._z2(inv(g, u2), self.a1, self.total - self.s2)
            / self.norm
        )

    def one_slice(self, u, s: float) -> np.ndarray:
        u = np.asarray(u, dtype=float)
        return self._z2(self.a0, u, s) * self._z2(inverse_angles(self.group, u), self.a1, self.total - s) / self.norm

    def chapman_kolmogorov_residual(self, n_quad: int | None = None) -> float:
        t, w = _nodes(self.group, n_quad)
        D = self.density(t[:, None], t[None, :])
        r1 = np.max(np.abs(D @ w - self.one_slice(t, self.s1)))
        r2 = np.max(np.abs(w @ D - self.one_slice(t, self.s2)))
        return float(max(r1, r2))

    def normalization(self, n_quad: int | None = None) -> float:
        t, w = _nodes(self.group, n_quad)
        return float(w @ self.density(t[:, None], t[None, :]) @ w)

    def symmetry_residual(self, n_quad: int = 64) -> float:
        """Deviation of ``density(u1, u2)`` from the reflected cylinder's ``density(u2^-1, u1^-1)``."""
        inv = inverse_angles
        refl = CylinderTransition(
            self.group,
            ConjClass(self.group, float(inv(self.group, self.a1))),
            ConjClass(self.group, float(self.a0)),
            self.total - self.s2,
            self.total - self.s1,
            self.total,
            self.tol,
        )
        t, _ = _nodes(self.group, n_quad)
        D = self.density(t[:, None], t[None, :])
        R = refl.density(inv(self.group, t)[None, :], inv(self.group, t)[:, None])
        return float(np.max(np.abs(D - R)))


def cylinder_transition(group, t0: ConjClass, t1: ConjClass, s1: float, s2: float, total: float, tol: float = 1e-12) -> CylinderTransition:
    return CylinderTransition(group, t0, t1, s1, s2, total, tol)


@dataclass(frozen=True)
class Cut:
    """A separating loop: one side has the given area, genus and boundary indices."""

    area: float
    genus: int = 0
    boundary_indices: tuple[int, ...] = ()


class BoundaryDensity:
    def __init__(self, fn, group: GroupId):
        self._fn = fn
        self.group = group

    def __call__(self, u) -> np.ndarray:
        if isinstance(u, ConjClass):
            return float(self._fn(np.array(u.angle)))
        return self._fn(np.asarray(u, dtype=float))

    def normalization(self, n_quad: int | None = None) -> float:
        t, w = _nodes(self.group, n_quad)
        return float(np.dot(w, self._fn(t)))


def natural_boundary_density(
    group: GroupId | str,
    sig: SurfaceSignature,
    classes_fixed: Sequence[ConjClass],
    free_index: int | None = None,
    tol: float = 1e-12,
    cut: Cut | None = None,
) -> BoundaryDensity:
    """Density of the class of one loop given the holonomies of the others.

    Without ``cut`` the free loop is boundary ``free_index`` and
    ``classes_fixed`` holds the other ``p - 1`` boundaries; integrating the
    free variable out leaves only the trivial irrep, so the denominator is 1.
    With ``cut`` the free loop is an interior separating circle,
    ``classes_fixed`` holds all ``p`` boundaries, and the density is
    ``Z_side1(x, u) Z_side2(u^-1, x') / Z_{p,g,T}(x, x')``.
    """
    group = GroupId.parse(group)
    fixed = _angles(classes_fixed)
    if cut is None:
        if free_index is None or not 0 <= free_index < sig.p:
            raise ValueError("free_index must name a boundary component")
        if len(fixed) != sig.p - 1:
            raise ValueError("expected p - 1 fixed classes")

        def fn(u):
            args = [np.full_like(u, x) for x in fixed]
            args.insert(free_index, u)
            return z_values(group, sig.g, sig.T, args, tol)

        return BoundaryDensity(fn, group)
    if len(fixed) != sig.p:
        raise ValueError("expected p fixed classes when cutting along an interior loop")
    if not 0 < cut.area < sig.T or not 0 <= cut.genus <= sig.g:
        raise ValueError("cut does not fit inside the surface")
    side1 = [fixed[i] for i in cut.boundary_indices]
    side2 = [x for i, x in enumerate(fixed) if i not in set(cut.boundary_indices)]
    denom = float(z_values(group, sig.g, sig.T, [np.array(x) for x in fixed], tol)) if fixed else float(z_values(group, sig.g, sig.T, [], tol))
    if abs(denom) < 1e-300:
        raise ZeroDivisionError("conditioning event negligible")

    def fn(u):
        a1 = [np.full_like(u, x) for x in side1] + [u]
        a2 = [inverse_angles(group, u)] + [np.full_like(u, x) for x in side2]
        return z_values(group, cut.genus, cut.area, a1, tol) * z_values(group, sig.g - cut.genus, sig.T - cut.area, a2, tol) / denom

    return BoundaryDensity(fn, group)
