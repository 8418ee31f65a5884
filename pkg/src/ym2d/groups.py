"""Compact structure groups U(1), SU(2) and SO(3).

Elements of SU(2) are unit quaternions ``(w, x, y, z)``; SO(3) reuses the
same representation modulo ``q ~ -q``.  Conjugacy classes are described by a
single angle:

* U(1): the angle itself, in ``[0, 2pi)``;
* SU(2): the half-angle ``theta`` in ``[0, pi]`` of ``q = (cos theta, sin theta n)``;
* SO(3): the rotation angle ``phi`` in ``[0, pi]`` (twice the quaternion half-angle).

Casimir convention: ``c2(U1, n) = n**2`` and ``c2 = j(j+1)`` for SU(2)/SO(3).
Every area appearing in this package is measured in the units fixed by this
choice; identities between heat kernels and partition functions are
covariant under a global rescaling of area, so nothing else depends on it.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

TWO_PI = 2.0 * math.pi
_SERIES_EPS = 1e-6


class GroupMismatchError(ValueError):
    pass


class GroupId(str, enum.Enum):
    U1 = "u1"
    SU2 = "su2"
    SO3 = "so3"

    @property
    def abelian(self) -> bool:
        return self is GroupId.U1

    @property
    def semisimple(self) -> bool:
        return self is not GroupId.U1

    @classmethod
    def parse(cls, value: "str | GroupId") -> "GroupId":
        if isinstance(value, GroupId):
            return value
        try:
            return cls(str(value).lower())
        except ValueError:
            raise ValueError(f"unknown group {value!r}; expected one of u1, su2, so3") from None


# ---------------------------------------------------------------------------
# raw quaternion arithmetic (tuples for scalars, (n, 4) arrays for batches)


def qmul(a, b):
    aw, ax, ay, az = a
    bw, bx, by, bz = b
    w = aw * bw - ax * bx - ay * by - az * bz
    x = aw * bx + ax * bw + ay * bz - az * by
    y = aw * by - ax * bz + ay * bw + az * bx
    z = aw * bz + ax * by - ay * bx + az * bw
    n = math.sqrt(w * w + x * x + y * y + z * z)
    return (w / n, x / n, y / n, z / n)


def qinv(a):
    return (a[0], -a[1], -a[2], -a[3])


def qmul_array(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    aw, ax, ay, az = np.moveaxis(a, -1, 0)
    bw, bx, by, bz = np.moveaxis(b, -1, 0)
    out = np.stack(
        [
            aw * bw - ax * bx - ay * by - az * bz,
            aw * bx + ax * bw + ay * bz - az * by,
            aw * by - ax * bz + ay * bw + az * bx,
            aw * bz + ax * by - ay * bx + az * bw,
        ],
        axis=-1,
    )
    return out / np.linalg.norm(out, axis=-1, keepdims=True)


def qinv_array(a: np.ndarray) -> np.ndarray:
    out = -a
    out[..., 0] = a[..., 0]
    return out


def canonical_so3(q):
    """Representative of ``{q, -q}`` whose first nonzero coordinate is positive."""
    for c in q:
        if abs(c) > 1e-15:
            if c < 0:
                return tuple(-v for v in q)
            return tuple(q)
    return tuple(q)


def _canonical_so3_array(q: np.ndarray) -> np.ndarray:
    nz = np.abs(q) > 1e-15
    first = np.argmax(nz, axis=-1)
    lead = np.take_along_axis(q, first[..., None], axis=-1)
    return np.where(lead < 0, -q, q)


def quat_half_angle(q) -> float:
    return math.atan2(math.sqrt(q[1] * q[1] + q[2] * q[2] + q[3] * q[3]), q[0])


# ---------------------------------------------------------------------------
# value types


@dataclass(frozen=True)
class GroupElement:
    group: GroupId
    data: object  # float angle for U1, 4-tuple for SU2/SO3

    def __post_init__(self):
        if self.group is GroupId.U1:
            object.__setattr__(self, "data", float(self.data) % TWO_PI)
        else:
            q = tuple(float(v) for v in self.data)
            if len(q) != 4:
                raise ValueError("quaternion payload needs 4 components")
            n = math.sqrt(sum(v * v for v in q))
            if n == 0.0:
                raise ValueError("zero quaternion")
            q = tuple(v / n for v in q)
            if self.group is GroupId.SO3:
                q = canonical_so3(q)
            object.__setattr__(self, "data", q)

    @classmethod
    def identity(cls, group: GroupId) -> "GroupElement":
        group = GroupId.parse(group)
        if group is GroupId.U1:
            return cls(group, 0.0)
        return cls(group, (1.0, 0.0, 0.0, 0.0))

    @property
    def angle(self) -> float:
        if self.group is not GroupId.U1:
            raise AttributeError("angle is only defined for U1 elements")
        return self.data

    @property
    def quaternion(self) -> tuple:
        if self.group is GroupId.U1:
            raise AttributeError("U1 elements carry an angle, not a quaternion")
        return self.data

    def __mul__(self, other: "GroupElement") -> "GroupElement":
        return multiply(self, other)

    def close_to(self, other: "GroupElement", tol: float = 1e-12) -> bool:
        if self.group is not other.group:
            return False
        if self.group is GroupId.U1:
            d = (self.data - other.data) % TWO_PI
            return min(d, TWO_PI - d) <= tol
        d = max(abs(a - b) for a, b in zip(self.data, other.data))
        if self.group is GroupId.SO3:
            d = min(d, max(abs(a + b) for a, b in zip(self.data, other.data)))
        return d <= tol


@dataclass(frozen=True)
class ConjClass:
    group: GroupId
    angle: float

    def __post_init__(self):
        a = float(self.angle)
        if self.group is GroupId.U1:
            a %= TWO_PI
        elif not (-1e-12 <= a <= math.pi + 1e-12):
            raise ValueError(f"class angle {a} outside [0, pi]")
        else:
            a = min(max(a, 0.0), math.pi)
        object.__setattr__(self, "angle", a)

    @classmethod
    def identity(cls, group: GroupId) -> "ConjClass":
        return cls(GroupId.parse(group), 0.0)

    def inverse(self) -> "ConjClass":
        # every SU2/SO3 element is conjugate to its inverse
        if self.group is GroupId.U1:
            return ConjClass(self.group, -self.angle)
        return self


@dataclass(frozen=True)
class Irrep:
    group: GroupId
    label: int

    def __post_init__(self):
        if self.group is not GroupId.U1 and self.label < 0:
            raise ValueError("SU2/SO3 irrep labels are nonnegative")

    @property
    def dim(self) -> int:
        return irrep_dim(self.group, self.label)

    @property
    def casimir(self) -> float:
        return irrep_casimir(self.group, self.label)

    @property
    def trivial(self) -> bool:
        return self.label == 0


def irrep_dim(group: GroupId, label):
    if group is GroupId.U1:
        return np.ones_like(label) if isinstance(label, np.ndarray) else 1
    if group is GroupId.SU2:
        return label + 1
    return 2 * label + 1


def irrep_casimir(group: GroupId, label):
    if group is GroupId.U1:
        return label * label * 1.0
    if group is GroupId.SU2:
        return 0.25 * label * (label + 2)
    return label * (label + 1) * 1.0


# ---------------------------------------------------------------------------
# group operations


def _check_same(a: GroupElement, b: GroupElement) -> None:
    if a.group is not b.group:
        raise GroupMismatchError(f"cannot combine {a.group.value} with {b.group.value}")


def multiply(a: GroupElement, b: GroupElement) -> GroupElement:
    _check_same(a, b)
    if a.group is GroupId.U1:
        return GroupElement(a.group, a.data + b.data)
    return GroupElement(a.group, qmul(a.data, b.data))


def inverse(a: GroupElement) -> GroupElement:
    if a.group is GroupId.U1:
        return GroupElement(a.group, -a.data)
    return GroupElement(a.group, qinv(a.data))


def haar_array(group: GroupId, n: int, rng: np.random.Generator) -> np.ndarray:
    """``n`` Haar samples: angles of shape ``(n,)`` or quaternions ``(n, 4)``."""
    if group is GroupId.U1:
        return rng.uniform(0.0, TWO_PI, size=n)
    q = rng.standard_normal((n, 4))
    q /= np.linalg.norm(q, axis=1, keepdims=True)
    if group is GroupId.SO3:
        q = _canonical_so3_array(q)
    return q


def haar_sample(group: GroupId, rng: np.random.Generator) -> GroupElement:
    group = GroupId.parse(group)
    raw = haar_array(group, 1, rng)[0]
    return GroupElement(group, raw if group is GroupId.U1 else tuple(raw))


def class_angle_of(group: GroupId, data) -> float:
    """Class angle from a raw payload (angle or quaternion tuple)."""
    if group is GroupId.U1:
        return data % TWO_PI
    half = quat_half_angle(data)
    if group is GroupId.SU2:
        return half
    return 2.0 * min(half, math.pi - half)


def class_angles_array(group: GroupId, data: np.ndarray) -> np.ndarray:
    if group is GroupId.U1:
        return np.mod(data, TWO_PI)
    half = np.arctan2(np.linalg.norm(data[..., 1:], axis=-1), data[..., 0])
    if group is GroupId.SU2:
        return half
    return 2.0 * np.minimum(half, np.pi - half)


def conj_class(a: GroupElement) -> ConjClass:
    return ConjClass(a.group, class_angle_of(a.group, a.data))


def element_from_class(c: ConjClass, axis=(1.0, 0.0, 0.0)) -> GroupElement:
    """A representative of ``c`` (rotation about ``axis`` for SU2/SO3)."""
    if c.group is GroupId.U1:
        return GroupElement(c.group, c.angle)
    half = c.angle if c.group is GroupId.SU2 else 0.5 * c.angle
    n = math.sqrt(sum(v * v for v in axis))
    s = math.sin(half) / n
    return GroupElement(c.group, (math.cos(half), axis[0] * s, axis[1] * s, axis[2] * s))


# ---------------------------------------------------------------------------
# characters


def _sin_ratio(m: np.ndarray, theta: np.ndarray) -> np.ndarray:
    """``sin(m theta) / sin(theta)`` for integer ``m >= 1`` and ``theta`` in [0, pi]."""
    m = np.asarray(m, dtype=float)
    theta = np.asarray(theta, dtype=float)
    m, theta = np.broadcast_arrays(m, theta)
    out = np.empty(m.shape)
    near0 = theta < _SERIES_EPS
    nearpi = (math.pi - theta) < _SERIES_EPS
    mid = ~(near0 | nearpi)
    # reflect the upper half to pi - theta so that sin(m x) keeps full relative accuracy
    upper = theta > 0.5 * math.pi
    lo = mid & ~upper
    hi = mid & upper
    out[lo] = np.sin(m[lo] * theta[lo]) / np.sin(theta[lo])
    eps = math.pi - theta[hi]
    sign = np.where(np.mod(m[hi], 2.0) == 1.0, 1.0, -1.0)
    out[hi] = sign * np.sin(m[hi] * eps) / np.sin(eps)

    def taylor(mm, eps):
        m2 = mm * mm - 1.0
        e2 = eps * eps
        return mm * (1.0 - m2 * e2 / 6.0 + m2 * (3.0 * mm * mm - 7.0) * e2 * e2 / 360.0)

    out[near0] = taylor(m[near0], theta[near0])
    mp = m[nearpi]
    sign = np.where(np.mod(mp, 2.0) == 1.0, 1.0, -1.0)
    out[nearpi] = sign * taylor(mp, math.pi - theta[nearpi])
    return out


def character_values(group: GroupId, label, angles) -> np.ndarray:
    """Vectorized ``chi_label`` at class angles (complex for U1, real otherwise)."""
    angles = np.asarray(angles, dtype=float)
    if group is GroupId.U1:
        return np.exp(1j * np.asarray(label) * angles)
    if group is GroupId.SU2:
        return _sin_ratio(np.asarray(label) + 1, angles)
    return _sin_ratio(2 * np.asarray(label) + 1, 0.5 * angles)


def character_matrix(group: GroupId, labels, angles) -> np.ndarray:
    """Matrix ``M[i, a] = chi_{labels[a]}(angles[i])``."""
    labels = np.asarray(labels)
    angles = np.asarray(angles, dtype=float)
    return character_values(group, labels[None, :], angles[:, None])


def character(r: Irrep, c: ConjClass) -> complex:
    if r.group is not c.group:
        raise GroupMismatchError(f"irrep of {r.group.value} evaluated on class of {c.group.value}")
    return complex(character_values(r.group, r.label, c.angle))


def irrep_enumerate(group: GroupId, casimir_cutoff: float) -> list[Irrep]:
    group = GroupId.parse(group)
    if casimir_cutoff <= 0:
        raise ValueError("casimir_cutoff must be positive")
    out = []
    k = 0
    while irrep_casimir(group, k) <= casimir_cutoff:
        out.append(Irrep(group, k))
        if group is GroupId.U1 and k > 0:
            out.append(Irrep(group, -k))
        k += 1
    out.sort(key=lambda r: (r.casimir, r.label))
    return out


# ---------------------------------------------------------------------------
# integration over classes


@lru_cache(maxsize=64)
def quadrature_nodes(group: GroupId, n_points: int) -> tuple[np.ndarray, np.ndarray]:
    """Class angles and weights integrating class functions against Haar measure."""
    if n_points < 2:
        raise ValueError("class quadrature needs at least 2 points")
    if group is GroupId.U1:
        angles = TWO_PI * np.arange(n_points) / n_points
        weights = np.full(n_points, 1.0 / n_points)
    else:
        x, w = np.polynomial.legendre.leggauss(n_points)
        angles = 0.5 * math.pi * (x + 1.0)
        w = 0.5 * math.pi * w
        if group is GroupId.SU2:
            weights = w * (2.0 / math.pi) * np.sin(angles) ** 2
        else:
            weights = w * (1.0 - np.cos(angles)) / math.pi
    angles.setflags(write=False)
    weights.setflags(write=False)
    return angles, weights


def class_quadrature(group: GroupId, n_points: int) -> list[tuple[ConjClass, float]]:
    group = GroupId.parse(group)
    angles, weights = quadrature_nodes(group, n_points)
    return [(ConjClass(group, a), float(w)) for a, w in zip(angles, weights)]


def integrate_class_function(group: GroupId, f, n_points: int = 256) -> complex:
    """``int_G f([g]) dg`` for a vectorized function of class angles."""
    angles, weights = quadrature_nodes(GroupId.parse(group), n_points)
    return np.sum(weights * f(angles))


# ---------------------------------------------------------------------------
# character identities by Monte Carlo


def mul_array(group: GroupId, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    if group is GroupId.U1:
        return np.mod(a + b, TWO_PI)
    return qmul_array(a, b)


def inv_array(group: GroupId, a: np.ndarray) -> np.ndarray:
    if group is GroupId.U1:
        return np.mod(-a, TWO_PI)
    return qinv_array(a)


def _raw(x: GroupElement) -> np.ndarray:
    return np.asarray(x.data, dtype=float)


@dataclass
class IdentityCheck:
    name: str
    estimate: complex
    target: complex
    stderr: float
    passed: bool

    @property
    def deviation(self) -> float:
        return abs(self.estimate - self.target)


@dataclass
class CharacterIdentityReport:
    irrep: Irrep
    checks: list[IdentityCheck]

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)


def _mc_mean(values: np.ndarray) -> tuple[complex, float]:
    n = values.shape[0]
    mean = complex(values.mean())
    var = float(np.var(values.real) + np.var(np.imag(values)))
    return mean, math.sqrt(var / n)


def verify_character_identities(
    r: Irrep,
    n_mc: int,
    rng: np.random.Generator,
    y: GroupElement | None = None,
    z: GroupElement | None = None,
    x: GroupElement | None = None,
    n_sigma: float = 4.0,
) -> CharacterIdentityReport:
    """Monte-Carlo check of the two orthogonality integrals used in character sums.

    * ``int chi(x y x^-1 z) dx = chi(y) chi(z) / dim``
    * ``int int chi([a, b] x) da db = chi(x) / dim**2``
    """
    if n_mc < 1000:
        raise ValueError("n_mc must be at least 1000")
    g = r.group
    y = y if y is not None else haar_sample(g, rng)
    z = z if z is not None else haar_sample(g, rng)
    x = x if x is not None else haar_sample(g, rng)
    chi = lambda data: character_values(g, r.label, class_angles_array(g, data))  # noqa: E731

    u = haar_array(g, n_mc, rng)
    yb = np.broadcast_to(_raw(y), u.shape).copy()
    zb = np.broadcast_to(_raw(z), u.shape).copy()
    conj = mul_array(g, mul_array(g, u, yb), inv_array(g, u))
    est1, se1 = _mc_mean(chi(mul_array(g, conj, zb)))
    t1 = character(r, conj_class(y)) * character(r, conj_class(z)) / r.dim

    a = haar_array(g, n_mc, rng)
    b = haar_array(g, n_mc, rng)
    comm = mul_array(g, mul_array(g, a, b), mul_array(g, inv_array(g, a), inv_array(g, b)))
    xb = np.broadcast_to(_raw(x), u.shape).copy()
    est2, se2 = _mc_mean(chi(mul_array(g, comm, xb)))
    t2 = character(r, conj_class(x)) / r.dim**2

    checks = []
    for name, est, tgt, se in (("conjugation", est1, t1, se1), ("commutator", est2, t2, se2)):
        ok = abs(est - tgt) <= max(n_sigma * se, 1e-12)
        checks.append(IdentityCheck(name, est, tgt, se, ok))
    return CharacterIdentityReport(r, checks)
