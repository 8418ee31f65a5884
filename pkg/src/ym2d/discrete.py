"""Discrete Yang-Mills measure on a surface graph.

The density of an edge configuration with respect to the product of Haar
measures is ``prod_F p_{area(F)}(h_dF)``.  Holonomy along a word multiplies
edge values in reversed order: ``h_{e1 e2} = g_{e2} g_{e1}``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .groups import (
    TWO_PI,
    _SERIES_EPS,
    ConjClass,
    GroupElement,
    GroupId,
    GroupMismatchError,
    Irrep,
    character_matrix,
    character_values,
    class_angle_of,
    _sin_ratio,
    class_angles_array,
    element_from_class,
    haar_array,
    inv_array,
    irrep_casimir,
    irrep_dim,
    mul_array,
    qinv,
    qmul,
    quadrature_nodes,
)
from .heat import (
    DUAL_BELOW,
    U1_DUAL_BELOW,
    su2_dual_log_scalar,
    log_heat_kernel,
    _u1_dual_terms,
    heat_kernel_values,
    rho_of_angles,
    sample_heat_kernel_array,
    truncate_series,
)
from .surface import GraphError, PathWord, SurfaceGraph, homology_decompose, refine

_ID_Q = (1.0, 0.0, 0.0, 0.0)
_LOG2 = math.log(2.0)


class DensityError(ValueError):
    pass


# ---------------------------------------------------------------------------
# raw payload arithmetic


def _ops(group: GroupId):
    if group is GroupId.U1:
        return (lambda a, b: (a + b) % TWO_PI), (lambda a: (-a) % TWO_PI), 0.0
    return qmul, qinv, _ID_Q


def _to_raw(x: GroupElement):
    return x.data


def _from_raw(group: GroupId, raw) -> GroupElement:
    if group is GroupId.U1:
        return GroupElement(group, float(raw))
    return GroupElement(group, tuple(float(v) for v in raw))


def _holonomy_raw(group: GroupId, values, letters) -> object:
    mul, inv, h = _ops(group)
    for e, s in letters:
        g = values[e] if s > 0 else inv(values[e])
        h = mul(g, h)
    return h


# ---------------------------------------------------------------------------
# configurations


@dataclass(frozen=True)
class EdgeConfiguration:
    graph: SurfaceGraph
    values: tuple[GroupElement, ...]

    def __post_init__(self):
        object.__setattr__(self, "values", tuple(self.values))
        if len(self.values) != self.graph.n_edges:
            raise ValueError("one group element per edge is required")
        if len({v.group for v in self.values}) > 1:
            raise GroupMismatchError("all edge values must lie in the same group")

    @property
    def group(self) -> GroupId:
        return self.values[0].group


@dataclass(frozen=True)
class GaugeTransform:
    values: tuple[GroupElement, ...]


def random_configuration(graph: SurfaceGraph, group: GroupId, rng: np.random.Generator) -> EdgeConfiguration:
    group = GroupId.parse(group)
    raw = haar_array(group, graph.n_edges, rng)
    return EdgeConfiguration(graph, tuple(_from_raw(group, r) for r in raw))


def holonomy(cfg: EdgeConfiguration, w: PathWord) -> GroupElement:
    cfg.graph.word_vertices(w)
    raw = _holonomy_raw(cfg.group, [v.data for v in cfg.values], w.letters)
    return _from_raw(cfg.group, raw)


class _FaceLogWeight:
    """Fast scalar ``log p_area`` of a class angle."""

    def __init__(self, group: GroupId, area: float, tol: float = 1e-13):
        self.group = group
        self.area = area
        if group is not GroupId.U1 and area < DUAL_BELOW:
            self._mode = "su2dual" if group is GroupId.SU2 else "so3dual"
        elif group is GroupId.U1 and area < U1_DUAL_BELOW:
            ks, _ = _u1_dual_terms(area, tol)
            self._shifts = [TWO_PI * k for k in ks]
            self._lognorm = 0.5 * math.log(TWO_PI / area)
            self._mode = "dual"
        else:
            tr = truncate_series(group, area, 2.0, tol)
            if group is GroupId.U1:
                n = np.arange(1, int(tr.labels.max()) + 1)
                self._n = n.astype(float)
                self._w = 2.0 * np.exp(-0.5 * n * n * area)
                self._mode = "cos"
            else:
                labels = tr.labels
                m = labels + 1 if group is GroupId.SU2 else 2 * labels + 1
                self._m = m.astype(float)
                self._coef = irrep_dim(group, labels) * np.exp(-0.5 * irrep_casimir(group, labels) * area)
                self._coef_refl = self._coef * np.where(m % 2 == 1, 1.0, -1.0)
                self._mode = "sin"

    def __call__(self, angle: float) -> float:
        if self._mode == "su2dual":
            return su2_dual_log_scalar(self.area, angle)
        if self._mode == "so3dual":
            a = su2_dual_log_scalar(self.area, 0.5 * angle)
            b = su2_dual_log_scalar(self.area, math.pi - 0.5 * angle)
            top = max(a, b)
            if top == -math.inf:
                return top
            return top + math.log(math.exp(a - top) + math.exp(b - top)) - _LOG2
        if self._mode == "dual":
            th = (angle + math.pi) % TWO_PI - math.pi
            exps = [-((th - s) ** 2) / (2 * self.area) for s in self._shifts]
            top = max(exps)
            return self._lognorm + top + math.log(sum(math.exp(x - top) for x in exps))
        if self._mode == "cos":
            p = 1.0 + float(np.dot(self._w, np.cos(self._n * angle)))
        else:
            theta = angle if self.group is GroupId.SU2 else 0.5 * angle
            if _SERIES_EPS < theta <= 0.5 * math.pi:
                p = float(np.dot(self._coef, np.sin(self._m * theta))) / math.sin(theta)
            elif 0.5 * math.pi < theta < math.pi - _SERIES_EPS:
                eps = math.pi - theta
                p = float(np.dot(self._coef_refl, np.sin(self._m * eps))) / math.sin(eps)
            else:
                p = float(np.dot(self._coef, _sin_ratio(self._m, theta)))
        return math.log(p) if p > 0 else -math.inf


def log_density(cfg: EdgeConfiguration, tol: float = 1e-12) -> float:
    """``sum_F log p_{area(F)}([h_dF])``."""
    g = cfg.group
    raw = [v.data for v in cfg.values]
    total = 0.0
    for i, f in enumerate(cfg.graph.faces):
        ang = class_angle_of(g, _holonomy_raw(g, raw, f.word.letters))
        lp = float(log_heat_kernel(g, f.area, ang, tol))
        if not lp > -math.inf:
            raise DensityError(f"nonpositive heat kernel value on face {i}")
        total += lp
    return total


def gauge_transform(cfg: EdgeConfiguration, j: GaugeTransform) -> EdgeConfiguration:
    """``g_e -> j(target)^-1 g_e j(source)``."""
    if len(j.values) != cfg.graph.n_vertices:
        raise ValueError("gauge transform needs one element per vertex")
    group = cfg.group
    mul, inv, _ = _ops(group)
    out = []
    for (a, b), g in zip(cfg.graph.edges, cfg.values):
        out.append(_from_raw(group, mul(inv(j.values[b].data), mul(g.data, j.values[a].data))))
    return EdgeConfiguration(cfg.graph, tuple(out))


def sample_conditional_haar(x: GroupElement, n: int, rng: np.random.Generator) -> list[GroupElement]:
    """Haar variables ``g_1..g_n`` conditioned on ``g_n ... g_1 = x``."""
    if n < 1:
        raise ValueError("n must be at least 1")
    group = x.group
    mul, inv, prod = _ops(group)
    free = haar_array(group, n - 1, rng)
    out = []
    for raw in free:
        raw = float(raw) if group is GroupId.U1 else tuple(raw)
        out.append(_from_raw(group, raw))
        prod = mul(raw, prod)
    out.append(_from_raw(group, mul(x.data, inv(prod))))
    return out


# ---------------------------------------------------------------------------
# Metropolis sampling


@dataclass(frozen=True)
class ConditioningSpec:
    """Loops whose holonomy is pinned to a value, or to a conjugacy class."""

    loops: tuple[PathWord, ...] = ()
    values: tuple = ()
    by_class: bool = False

    def __post_init__(self):
        object.__setattr__(self, "loops", tuple(self.loops))
        object.__setattr__(self, "values", tuple(self.values))
        if len(self.loops) != len(self.values):
            raise ValueError("one value per conditioned loop")

    def check(self, graph: SurfaceGraph) -> None:
        used: set[int] = set()
        for w in self.loops:
            verts = graph.word_vertices(w)
            if not w.letters or verts[0] != verts[-1]:
                raise GraphError("conditioned loops must be closed")
            if len(set(verts[:-1])) != len(verts) - 1:
                raise GraphError("conditioned loops must be simple")
            edges = {e for e, _ in w.letters}
            if len(edges) != len(w.letters) or edges & used:
                raise GraphError("conditioned loops must be edge-disjoint")
            used |= edges


@dataclass
class Chain:
    graph: SurfaceGraph
    group: GroupId
    samples: np.ndarray  # (n_saved, E) angles or (n_saved, E, 4) quaternions
    acceptance_rate: float
    step_t: float
    stride: int
    n_steps: int
    conditioning: ConditioningSpec = field(default_factory=ConditioningSpec)

    def __len__(self) -> int:
        return self.samples.shape[0]

    def configuration(self, i: int) -> EdgeConfiguration:
        return EdgeConfiguration(self.graph, tuple(_from_raw(self.group, r) for r in self.samples[i]))

    def gauge_transformed(self, j: GaugeTransform) -> "Chain":
        """The same chain with every stored configuration gauge transformed."""
        s = self.samples
        jv = [np.broadcast_to(np.asarray(x.data, dtype=float), s[:, 0].shape) for x in j.values]
        out = np.empty_like(s)
        for e, (a, b) in enumerate(self.graph.edges):
            out[:, e] = mul_array(self.group, inv_array(self.group, jv[b].copy()), mul_array(self.group, s[:, e], jv[a].copy()))
        return Chain(self.graph, self.group, out, self.acceptance_rate, self.step_t, self.stride, self.n_steps, self.conditioning)


def default_step_t(graph: SurfaceGraph) -> float:
    return min(graph.areas) / 4.0


def metropolis_sample(
    graph: SurfaceGraph,
    cond: ConditioningSpec | None,
    n_steps: int,
    step_t: float | None,
    rng: np.random.Generator,
    group: GroupId | str = GroupId.SU2,
    stride: int = 1,
) -> Chain:
    """Random-walk Metropolis chain targeting the (conditioned) Yang-Mills measure.

    Each step left-multiplies one uniformly chosen free edge by a heat-kernel
    increment of time ``step_t``; since ``p_t(k) = p_t(k^-1)`` the proposal is
    symmetric with respect to Haar measure.  The last edge of every
    conditioned loop is derived from the others so that the loop holonomy
    equals its target exactly.  With ``cond.by_class`` each loop also
    carries a Haar conjugator, refreshed by independent Metropolis moves.
    """
    group = GroupId.parse(group)
    cond = cond or ConditioningSpec()
    cond.check(graph)
    for v in cond.values:
        if v.group is not group:
            raise GroupMismatchError("conditioning values belong to another group")
    step_t = default_step_t(graph) if step_t is None else step_t
    if step_t <= 0:
        raise ValueError("step_t must be positive")
    if stride < 1:
        raise ValueError("stride must be >= 1")
    mul, inv, ident = _ops(group)

    targets = []
    for v in cond.values:
        if isinstance(v, ConjClass):
            v = element_from_class(v)
        targets.append(v.data)
    derived = {}  # derived edge -> loop index
    loop_of = {}  # free edge -> loop index
    for li, w in enumerate(cond.loops):
        derived[w.letters[-1][0]] = li
        for e, _ in w.letters[:-1]:
            loop_of[e] = li
    free = [e for e in range(graph.n_edges) if e not in derived]
    if not free:
        raise ValueError("no free edges to update")

    faces_of_edge: dict[int, set[int]] = {e: set() for e in range(graph.n_edges)}
    for fi, f in enumerate(graph.faces):
        for e, _ in f.word.letters:
            faces_of_edge[e].add(fi)
    loop_derived_edge = [w.letters[-1][0] for w in cond.loops]
    affected = {}
    for e in free:
        fs = set(faces_of_edge[e])
        if e in loop_of:
            fs |= faces_of_edge[loop_derived_edge[loop_of[e]]]
        affected[e] = sorted(fs)
    loop_affected = [sorted(faces_of_edge[d]) for d in loop_derived_edge]
    weights = [_FaceLogWeight(group, f.area) for f in graph.faces]
    face_words = [f.word.letters for f in graph.faces]

    conj = [ident for _ in cond.loops]

    def set_derived(vals, li):
        w = cond.loops[li].letters
        prod = ident
        for e, s in w[:-1]:
            prod = mul(vals[e] if s > 0 else inv(vals[e]), prod)
        x = targets[li]
        if cond.by_class:
            x = mul(conj[li], mul(x, inv(conj[li])))
        last = mul(x, inv(prod))
        e, s = w[-1]
        vals[e] = last if s > 0 else inv(last)

    def face_lp(vals, fi):
        return weights[fi](class_angle_of(group, _holonomy_raw(group, vals, face_words[fi])))

    init = haar_array(group, graph.n_edges, rng)
    vals = [float(r) if group is GroupId.U1 else tuple(r) for r in init]
    if cond.by_class:
        conj = [tuple(r) if group is not GroupId.U1 else float(r) for r in haar_array(group, len(cond.loops), rng)]
    for li in range(len(cond.loops)):
        set_derived(vals, li)
    flp = [face_lp(vals, fi) for fi in range(graph.n_faces)]

    n_loops = len(cond.loops) if cond.by_class else 0
    n_moves = len(free) + n_loops
    block = 4096
    saved = []
    accepted = 0
    for start in range(0, n_steps, block):
        size = min(block, n_steps - start)
        incs = sample_heat_kernel_array(group, step_t, size, rng)
        incs = incs.tolist()
        if group is not GroupId.U1:
            incs = [tuple(q) for q in incs]
        picks = rng.integers(0, n_moves, size=size).tolist()
        logu = np.log(rng.random(size)).tolist()
        fresh = haar_array(group, size, rng).tolist() if n_loops else None
        for k in range(size):
            pick = picks[k]
            if pick < len(free):
                e = free[pick]
                old_e = vals[e]
                vals[e] = mul(incs[k], old_e)
                li = loop_of.get(e)
                if li is not None:
                    de = loop_derived_edge[li]
                    old_d = vals[de]
                    set_derived(vals, li)
                fs = affected[e]
                new = [face_lp(vals, fi) for fi in fs]
                delta = sum(new) - sum(flp[fi] for fi in fs)
                if delta >= 0 or logu[k] < delta:
                    for fi, v in zip(fs, new):
                        flp[fi] = v
                    accepted += 1
                else:
                    vals[e] = old_e
                    if li is not None:
                        vals[de] = old_d
            else:
                li = pick - len(free)
                de = loop_derived_edge[li]
                old_d, old_c = vals[de], conj[li]
                conj[li] = fresh[k] if group is GroupId.U1 else tuple(fresh[k])
                set_derived(vals, li)
                fs = loop_affected[li]
                new = [face_lp(vals, fi) for fi in fs]
                delta = sum(new) - sum(flp[fi] for fi in fs)
                if delta >= 0 or logu[k] < delta:
                    for fi, v in zip(fs, new):
                        flp[fi] = v
                    accepted += 1
                else:
                    vals[de], conj[li] = old_d, old_c
            if (start + k + 1) % stride == 0:
                saved.append(list(vals))
    samples = np.array(saved, dtype=float)
    if samples.size == 0:
        shape = (0, graph.n_edges) if group is GroupId.U1 else (0, graph.n_edges, 4)
        samples = np.zeros(shape)
    return Chain(graph, group, samples, accepted / max(n_steps, 1), step_t, stride, n_steps, cond)


# ---------------------------------------------------------------------------
# estimators


def holonomy_samples(chain: Chain, w: PathWord) -> np.ndarray:
    """Holonomy of ``w`` for every stored configuration (raw payload array)."""
    chain.graph.word_vertices(w)
    group = chain.group
    n = len(chain)
    if group is GroupId.U1:
        h = np.zeros(n)
    else:
        h = np.zeros((n, 4))
        h[:, 0] = 1.0
    for e, s in w.letters:
        g = chain.samples[:, e]
        if s < 0:
            g = inv_array(group, g)
        h = mul_array(group, g, h)
    return h


def batch_means(values: np.ndarray, n_batches: int = 16) -> tuple[complex, float]:
    """Mean and batch-means standard error (complex values allowed)."""
    values = np.asarray(values)
    n = values.shape[0]
    if n < n_batches:
        raise ValueError("not enough samples for batch means")
    size = n // n_batches
    trimmed = values[n - size * n_batches :]
    bm = trimmed.reshape(n_batches, size).mean(axis=1)
    mean = complex(trimmed.mean())
    var = np.var(bm.real, ddof=1) + np.var(np.imag(bm), ddof=1)
    return mean, float(math.sqrt(var / n_batches))


def wilson_estimator(chain: Chain, w: PathWord, beta: Irrep, burn_in: int = 0) -> tuple[complex, float]:
    """Batch-means estimate of ``E chi_beta(h_w)``; ``burn_in`` counts stored samples."""
    if beta.group is not chain.group:
        raise GroupMismatchError("irrep and chain groups differ")
    if not w.letters:
        return complex(beta.dim), 0.0
    if burn_in >= len(chain):
        raise ValueError("burn_in must be smaller than the chain length")
    h = holonomy_samples(chain, w)[burn_in:]
    chi = character_values(chain.group, beta.label, class_angles_array(chain.group, h))
    return batch_means(chi)


def _multiplicities(group: GroupId, beta: int, labels: np.ndarray) -> np.ndarray:
    """``N[a, c] = int chi_beta chi_a conj(chi_c)`` by class quadrature, rounded."""
    span = int(np.abs(labels).max()) + abs(beta) + 2
    n = max(256, 2 * span + 64) if group is GroupId.U1 else max(256, 3 * span + 64)
    angles, weights = quadrature_nodes(group, n)
    chi = character_matrix(group, labels, angles)
    chib = character_values(group, beta, angles)
    N = (chi * (weights * chib)[:, None]).T @ np.conj(chi)
    rounded = np.rint(N.real)
    if np.max(np.abs(N - rounded)) > 1e-6:
        raise ArithmeticError("fusion multiplicities not resolved by the quadrature")
    return rounded


def exact_sphere_loop_moment(a: float, A: float, beta: Irrep, tol: float = 1e-12) -> complex:
    """``E chi_beta(H_L)`` for a loop splitting a sphere of area ``A`` into ``a`` and ``A - a``.

    Character sum ``sum_{alpha,gamma} dim(alpha) dim(gamma)
    exp(-(c2(alpha) a + c2(gamma) (A - a)) / 2) N^{beta alpha}_gamma / Z_{0,0,A}``.
    """
    if not 0 < a < A:
        raise ValueError("need 0 < a < A")
    group = beta.group
    labels = truncate_series(group, min(a, A - a), 3.0, tol * 1e-3).labels
    if group is GroupId.U1:
        lim = int(np.abs(labels).max()) + abs(beta.label)
        labels = np.arange(-lim, lim + 1)
    else:
        labels = np.arange(0, int(labels.max()) + beta.label + 1)
    N = _multiplicities(group, beta.label, labels)
    d = irrep_dim(group, labels).astype(float)
    c = irrep_casimir(group, labels)
    wa = d * np.exp(-0.5 * c * a)
    wb = d * np.exp(-0.5 * c * (A - a))
    num = wa @ N @ wb
    den = np.sum(d * d * np.exp(-0.5 * c * A))
    val = complex(num / den)
    return val if group is GroupId.U1 else complex(val.real)


def u1_exact_wilson(graph: SurfaceGraph, w: PathWord, n: int, boundary_angles: Sequence[float] = (), h1_loops=()) -> complex:
    """Exact ``E chi_n(h_w)`` for U(1) from the joint law of face holonomies.

    Face holonomies ``v_j`` have density ``prod p_{s_j}(v_j)`` against the
    Haar measure conditioned on ``prod v_j = x``; expanding each kernel in
    characters gives
    ``E prod v_j^{m_j} = sum_K x^K prod_j exp(-(K - m_j)**2 s_j / 2) / sum_K x^K exp(-K**2 S / 2)``.
    Homologically nontrivial parts carry an independent uniform factor, so
    their presence makes the moment vanish.
    """
    c = graph.word_cycle(w)
    h1 = [graph.word_cycle(l) if isinstance(l, PathWord) else l for l in h1_loops]
    lam, mu = homology_decompose(graph, c, h1)
    if any(lam):
        return 0j
    x = float(sum(boundary_angles)) if not graph.closed else 0.0
    areas = np.array(graph.areas)
    m = n * np.array(mu)
    R = int(np.abs(m).max()) + int(math.ceil(math.sqrt(80.0 / areas.min()))) + 2
    K = np.arange(-R, R + 1)
    phase = np.exp(1j * K * x)
    logs = -0.5 * ((K[:, None] - m[None, :]) ** 2 * areas[None, :]).sum(axis=1)
    num = np.sum(phase * np.exp(logs))
    den = np.sum(phase * np.exp(-0.5 * K * K * areas.sum()))
    return complex(num / den)


@dataclass
class WordComparison:
    word_id: int
    mean_base: complex
    stderr_base: float
    mean_refined: complex
    stderr_refined: float
    passed: bool
    exact_base: complex | None = None
    exact_refined: complex | None = None


@dataclass
class SubdivisionReport:
    comparisons: list[WordComparison]
    exact_max_deviation: float | None

    @property
    def passed(self) -> bool:
        ok = all(c.passed for c in self.comparisons)
        if self.exact_max_deviation is not None:
            ok = ok and self.exact_max_deviation < 1e-8
        return ok


def subdivision_invariance_test(
    g1: SurfaceGraph,
    refinement_moves,
    words: Sequence[PathWord],
    beta: Irrep,
    n_steps: int,
    rng: np.random.Generator,
    n_sigma: float = 3.0,
    stride: int = 10,
    h1_loops: Sequence[PathWord] = (),
) -> SubdivisionReport:
    """Compare Wilson averages of ``words`` on ``g1`` and on its refinement.

    Both graphs get independent Metropolis chains; moreover, for U(1) the
    exact face-law moments of each closed word are compared on both graphs.
    """
    for w in words:
        g1.word_vertices(w)
    g2, words2 = refine(g1, refinement_moves, words)
    _, h1_2 = refine(g1, refinement_moves, h1_loops)
    for w in words2:
        g2.word_vertices(w)
    rng1, rng2 = rng.spawn(2)
    group = beta.group
    c1 = metropolis_sample(g1, None, n_steps, None, rng1, group=group, stride=stride)
    c2 = metropolis_sample(g2, None, n_steps, None, rng2, group=group, stride=stride)
    burn = len(c1) // 10
    out = []
    exact_dev = None
    for i, (w1, w2) in enumerate(zip(words, words2)):
        m1, s1 = wilson_estimator(c1, w1, beta, burn)
        m2, s2 = wilson_estimator(c2, w2, beta, burn)
        ok = abs(m1 - m2) <= n_sigma * math.hypot(s1, s2) + 1e-12
        cmp = WordComparison(i, m1, s1, m2, s2, ok)
        if g1.is_closed_word(w1) and w1.letters:
            n = beta.label if group is GroupId.U1 else 1
            cmp.exact_base = u1_exact_wilson(g1, w1, n, h1_loops=h1_loops)
            cmp.exact_refined = u1_exact_wilson(g2, w2, n, h1_loops=h1_2)
            dev = abs(cmp.exact_base - cmp.exact_refined)
            exact_dev = dev if exact_dev is None else max(exact_dev, dev)
        out.append(cmp)
    return SubdivisionReport(out, exact_dev)


@dataclass
class SmallDiskEstimate:
    area: float
    mean_rho: float
    stderr: float
    ratio: float


def small_disk_estimate(chain: Chain, w: PathWord, disk_area: float, burn_in: int = 0) -> SmallDiskEstimate:
    """``E rho(H_l)`` for a loop bounding a disk face, and its ratio to ``sqrt(area)``."""
    h = holonomy_samples(chain, w)[burn_in:]
    rho = rho_of_angles(chain.group, class_angles_array(chain.group, h))
    mean, se = batch_means(rho)
    return SmallDiskEstimate(disk_area, mean.real, se, mean.real / math.sqrt(disk_area))


def chain_records(chain: Chain, words: Sequence[PathWord], beta: Irrep):
    """Rows ``(step, word_id, re_chi, im_chi)`` for a chain dump."""
    cols = []
    for w in words:
        h = holonomy_samples(chain, w)
        cols.append(character_values(chain.group, beta.label, class_angles_array(chain.group, h)))
    for i in range(len(chain)):
        step = (i + 1) * chain.stride
        for wid, col in enumerate(cols):
            v = complex(col[i])
            yield step, wid, v.real, v.imag
