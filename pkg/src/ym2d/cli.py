"""Command line front end: ``ym2d <command> [flags]``.

Every command writes CSV data (to ``--out`` or stdout) and, when ``--out`` is
given, a ``<stem>.manifest.json`` next to it holding the resolved config, its
hash and the library version.  Exit status is 0 when all checks pass, 1 when
a check fails and 2 for a bad configuration.
"""
from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .groups import ConjClass, GroupId, Irrep, verify_character_identities
from .rng import make_rng

COMMON_DEFAULTS = {"group": "su2", "seed": 0, "tol": 1e-7, "mc": None, "nodes": None, "graph": None, "out": None}


class ConfigError(ValueError):
    pass


# ---------------------------------------------------------------------------
# helpers


def _floats(text) -> list[float]:
    if isinstance(text, (list, tuple)):
        return [float(x) for x in text]
    return [float(x) for x in str(text).split(",") if x.strip()]


def _ints(text) -> list[int]:
    return [int(round(x)) for x in _floats(text)]


def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


class Output:
    def __init__(self, header: list[str]):
        self.header = header
        self.rows: list[list] = []
        self.checks: dict[str, bool] = {}
        self.extra: dict = {}

    def add(self, *row):
        self.rows.append(list(row))

    def check(self, name: str, ok: bool):
        self.checks[name] = bool(ok)

    @property
    def ok(self) -> bool:
        return all(self.checks.values())

    def csv_text(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.header)
        for r in self.rows:
            w.writerow([_fmt(v) for v in r])
        return buf.getvalue()


def config_hash(cfg: dict) -> str:
    return hashlib.sha256(json.dumps(cfg, sort_keys=True).encode()).hexdigest()


def write_outputs(cfg: dict, out: Output) -> None:
    text = out.csv_text()
    if cfg["out"] is None:
        if "result" in out.extra:
            sys.stdout.write(json.dumps(out.extra["result"], sort_keys=True) + "\n")
        else:
            sys.stdout.write(text)
        return
    path = Path(cfg["out"])
    path.write_text(text)
    manifest = {
        "command": cfg["command"],
        "config": cfg,
        "config_hash": config_hash(cfg),
        "version": __version__,
        "checks": out.checks,
        "passed": out.ok,
        **out.extra,
    }
    path.with_name(path.stem + ".manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")


def _group(cfg) -> GroupId:
    try:
        return GroupId.parse(cfg["group"])
    except ValueError:
        raise ConfigError(f"unknown group {cfg['group']!r}; choose from u1, su2, so3") from None


def _class_list(group: GroupId, values) -> list[ConjClass]:
    return [ConjClass(group, a) for a in _floats(values)] if values not in (None, "") else []


# ---------------------------------------------------------------------------
# commands


def cmd_characters(cfg) -> Output:
    group = _group(cfg)
    labels = _ints(cfg.get("labels") or "1,2")
    n_mc = cfg["mc"] or 100_000
    out = Output(["label", "identity", "mc_mean_re", "mc_mean_im", "exact_re", "exact_im", "deviation", "stderr", "pass"])
    for k, lab in enumerate(labels):
        rep = verify_character_identities(Irrep(group, lab), n_mc, make_rng(cfg["seed"], k))
        for chk in rep.checks:
            out.add(lab, chk.name, chk.estimate.real, chk.estimate.imag, chk.target.real, chk.target.imag, chk.deviation, chk.stderr, chk.passed)
            out.check(f"{chk.name}[{lab}]", chk.passed)
    return out


def cmd_heat(cfg) -> Output:
    from .heat import heat_kernel, rho_moment, semigroup_check

    group = _group(cfg)
    times = _floats(cfg.get("times") or "0.25,1,4")
    angles = _floats(cfg.get("angles") or "0,0.5,1,2,3")
    tol = cfg["tol"]
    out = Output(["check", "s", "t", "angle", "value", "residual", "pass"])
    for s in times:
        for t in times:
            for a in angles:
                c = ConjClass(group, a)
                r = semigroup_check(group, s, t, c, cfg["nodes"])
                out.add("semigroup", s, t, a, heat_kernel(group, s + t, c), r, r < tol)
                out.check(f"semigroup[{s},{t},{a}]", r < tol)
    if cfg["mc"]:
        for k, t in enumerate(times):
            m = rho_moment(group, t, 2, cfg["mc"], make_rng(cfg["seed"], k))
            out.add("rho2_moment", "", t, "", m, "", True)
    return out


def cmd_partition(cfg) -> Output:
    from .partition import SurfaceSignature, z_eval, z_to_json

    group = _group(cfg)
    try:
        sig = SurfaceSignature.parse(cfg.get("sig") or "0,0,1")
    except ValueError as exc:
        raise ConfigError(f"bad signature: {exc}") from None
    classes = _class_list(group, cfg.get("classes"))
    if len(classes) != sig.p:
        raise ConfigError(f"signature needs {sig.p} classes, got {len(classes)}")
    z = z_eval(group, sig, classes, min(cfg["tol"], 1e-12))
    out = Output(["p", "g", "T", "classes", "value", "tail_bound"])
    out.add(sig.p, sig.g, sig.T, " ".join(repr(c.angle) for c in classes), z.value, z.tail_bound)
    out.extra["result"] = z_to_json(group, sig, classes, z)
    return out


def cmd_glue_check(cfg) -> Output:
    from .partition import (
        Cut,
        SurfaceSignature as S,
        bricks_reconstruct,
        cylinder_transition,
        glue_handle_check,
        glue_pair_check,
        natural_boundary_density,
        pants_convolution_check,
        z_eval,
    )

    group = _group(cfg)
    tol = cfg["tol"]
    n = cfg["nodes"]
    c = lambda a: ConjClass(group, a)  # noqa: E731
    out = Output(["check", "case", "residual", "tol", "pass"])

    def rec(name, case, r):
        out.add(name, case, r, tol, r < tol)
        out.check(f"{name}:{case}", r < tol)

    pairs = [
        (S(1, 0, 1.0), S(1, 0, 1.0), [], []),
        (S(3, 0, 1.0), S(1, 0, 0.5), [c(0.3), c(1.1)], []),
        (S(2, 1, 1.0), S(2, 0, 0.7), [c(0.3)], [c(2.0)]),
        (S(3, 0, 1.0), S(3, 1, 0.7), [c(0.3), c(0.9)], [c(2.0), c(1.5)]),
    ]
    for s1, s2, a, b in pairs:
        rec("pair", f"{s1.as_tuple()}+{s2.as_tuple()}", glue_pair_check(group, s1, s2, a, b, n))
    for sig, cl in [(S(2, 0, 1.0), []), (S(3, 0, 1.0), [c(0.4)]), (S(4, 1, 1.5), [c(0.4), c(2.5)])]:
        rec("handle", str(sig.as_tuple()), glue_handle_check(group, sig, cl, n))
    for p, g in [(0, 0), (2, 0), (0, 1), (1, 1)]:
        sig = S(p, g, 2.0)
        cl = [c(0.3 + 0.5 * i) for i in range(p)]
        rec("bricks", str(sig.as_tuple()), abs(bricks_reconstruct(group, sig, cl).value - z_eval(group, sig, cl).value))
    for a in range(3):
        for b in range(3):
            rec("pants", f"{a},{b}", pants_convolution_check(group, Irrep(group, a), Irrep(group, b), 1.0, n))
    ct = cylinder_transition(group, c(0.0), c(0.0), 0.3, 0.7, 1.0)
    rec("cylinder", "chapman_kolmogorov", ct.chapman_kolmogorov_residual(n))
    rec("cylinder", "normalization", abs(ct.normalization(n) - 1.0))
    rec("cylinder", "symmetry", ct.symmetry_residual())
    nb = natural_boundary_density(group, S(0, 0, 1.0), [], cut=Cut(0.3))
    rec("boundary_density", "sphere_cut", abs(nb.normalization(n) - 1.0))
    return out


def _load_graph(cfg):
    from .surface import load_graph, validate

    if not cfg["graph"]:
        raise ConfigError("--graph is required for this command")
    try:
        g = load_graph(cfg["graph"])
    except (OSError, ValueError, KeyError) as exc:
        raise ConfigError(f"cannot read graph: {exc}") from None
    rep = validate(g)
    if not rep.ok:
        raise ConfigError("invalid graph: " + "; ".join(rep.violations))
    return g


def cmd_sample(cfg) -> Output:
    from .discrete import chain_records, metropolis_sample

    group = _group(cfg)
    g = _load_graph(cfg)
    steps = int(cfg.get("steps") or cfg["mc"] or 10_000)
    stride = int(cfg.get("stride") or 10)
    label = int(cfg.get("irrep") or 1)
    step_t = float(cfg["step_t"]) if cfg.get("step_t") not in (None, "") else None
    chain = metropolis_sample(g, None, steps, step_t, make_rng(cfg["seed"], 0), group=group, stride=stride)
    out = Output(["step", "word_id", "re_chi", "im_chi"])
    for row in chain_records(chain, [f.word for f in g.faces], Irrep(group, label)):
        out.add(*row)
    out.extra.update(graph_hash=g.digest(), seed=cfg["seed"], step_t=chain.step_t, acceptance=chain.acceptance_rate)
    return out


def cmd_wilson(cfg) -> Output:
    from .discrete import exact_sphere_loop_moment, metropolis_sample, wilson_estimator
    from .surface import PathWord, sphere_graph

    group = _group(cfg)
    total = float(cfg.get("total") or 1.0)
    fractions = _floats(cfg.get("fractions") or "0.2,0.5")
    labels = _ints(cfg.get("irreps") or "1,2,3")
    steps = int(cfg["mc"] or 100_000)
    out = Output(["area", "total", "irrep", "estimate_re", "estimate_im", "stderr", "exact", "pass"])
    for k, fr in enumerate(fractions):
        a = fr * total
        chain = metropolis_sample(sphere_graph(a, total), None, steps, None, make_rng(cfg["seed"], k), group=group, stride=10)
        for lab in labels:
            beta = Irrep(group, lab)
            m, se = wilson_estimator(chain, PathWord.of((0, 1)), beta, burn_in=len(chain) // 10)
            ex = exact_sphere_loop_moment(a, total, beta).real
            ok = abs(m - ex) <= 3.0 * se
            out.add(a, total, lab, m.real, m.imag, se, ex, ok)
            out.check(f"wilson[{a},{lab}]", ok)
    return out


def cmd_abelian_compare(cfg) -> Output:
    from .abelian import law_equality_test
    from .surface import theta_sphere, torus_graph

    fixture = cfg.get("fixture") or "theta3"
    gens = []
    if cfg["graph"]:
        g = _load_graph(cfg)
    elif fixture == "theta2":
        g = theta_sphere([0.5, 0.5])
    elif fixture == "theta3":
        g = theta_sphere([0.2, 0.3, 0.5])
    elif fixture == "torus":
        g, gens = torus_graph(1.0)
    else:
        raise ConfigError(f"unknown fixture {fixture!r}")
    rep = law_equality_test(g, float(cfg.get("x") or 0.0), int(cfg["mc"] or 100_000), make_rng(cfg["seed"], 0), h1_loops=gens)
    out = Output(["moment", "gaussian_re", "gaussian_im", "gaussian_se", "metropolis_re", "metropolis_im", "metropolis_se", "gap", "pass"])
    for m in rep.moments + rep.h1_moments:
        out.add(m.name, m.gaussian.real, m.gaussian.imag, m.gaussian_se, m.metropolis.real, m.metropolis.imag, m.metropolis_se, m.gap, m.passed)
        out.check(m.name, m.passed)
    return out


def cmd_wn_extract(cfg) -> Output:
    from .abelian import constant_one, mean_zero_unit, wn_extraction_experiment

    fname = cfg.get("f") or "mean-zero"
    funcs = {"mean-zero": mean_zero_unit, "one": constant_one, "zero": lambda n: np.zeros(n)}
    if fname not in funcs:
        raise ConfigError(f"unknown test function {fname!r}; choose from {', '.join(funcs)}")
    ladder = _ints(cfg.get("ladder") or "16,64,256,1024")
    rows = wn_extraction_experiment(ladder, funcs[fname], float(cfg.get("x") or 0.0), int(cfg["mc"] or 20_000), make_rng(cfg["seed"], 0))
    out = Output(["n", "re_mean", "re_var", "im_mean", "im_var", "target_re_var", "target_im_mean", "pass"])
    for r in rows:
        out.add(r.n, r.re_mean, r.re_var, r.im_mean, r.im_var, r.target_re_var, r.target_im_mean, r.passed)
    out.check(f"final_rung[{rows[-1].n}]", rows[-1].passed)
    return out


def cmd_zero_one(cfg) -> Output:
    from .zero_one import convergence_experiment

    group = _group(cfg)
    beta = Irrep(group, int(cfg.get("irrep") or 1))
    T = float(cfg.get("T") or 1.0)
    ladder = _ints(cfg.get("ladder") or "1,4,16,64,256")
    rep = convergence_experiment(beta, T, ladder, int(cfg["mc"] or 10_000), make_rng(cfg["seed"], 0))
    out = Output(["n", "mean_re", "l2_dist", "stderr", "target"])
    for r in rep.rungs:
        out.add(r.n, r.mean.real, r.l2_dist, r.l2_se, r.target)
    out.check("means", rep.means_ok)
    out.check("flat" if group.abelian else "decay", rep.flat if group.abelian else rep.decays)
    return out


COMMANDS = {
    "characters": (cmd_characters, "character identity checks", ["labels"]),
    "heat": (cmd_heat, "heat kernel semigroup and moments", ["times", "angles"]),
    "partition": (cmd_partition, "evaluate Z_{p,g,T}", ["sig", "classes"]),
    "glue-check": (cmd_glue_check, "gluing, brick, pants and cylinder checks", []),
    "sample": (cmd_sample, "Metropolis chain on a JSON graph", ["steps", "stride", "step_t", "irrep"]),
    "wilson": (cmd_wilson, "sphere Wilson loop estimates against the exact formula", ["total", "fractions", "irreps"]),
    "abelian-compare": (cmd_abelian_compare, "Gaussian realization vs. Metropolis (U(1))", ["fixture", "x"]),
    "wn-extract": (cmd_wn_extract, "white-noise extraction ladder", ["f", "ladder", "x"]),
    "zero-one": (cmd_zero_one, "product-of-characters convergence ladder", ["irrep", "T", "ladder"]),
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ym2d", description="Two-dimensional Yang-Mills numerics.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name, (_, help_text, extra) in COMMANDS.items():
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--group", default=None)
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--tol", type=float, default=None)
        p.add_argument("--mc", type=int, default=None)
        p.add_argument("--nodes", type=int, default=None)
        p.add_argument("--graph", default=None)
        p.add_argument("--out", default=None)
        p.add_argument("--config", default=None, help="JSON file; explicit flags override it")
        for key in extra:
            p.add_argument("--" + key.replace("_", "-"), dest=key, default=None)
    return parser


def resolve_config(args: argparse.Namespace) -> dict:
    cfg = dict(COMMON_DEFAULTS)
    if args.config:
        try:
            loaded = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config: {exc}") from None
        if not isinstance(loaded, dict):
            raise ConfigError("config file must hold a JSON object")
        cfg.update(loaded)
    for k, v in vars(args).items():
        if k != "config" and v is not None:
            cfg[k] = v
    cfg["command"] = args.command
    if cfg["tol"] is not None and not float(cfg["tol"]) > 0:
        raise ConfigError("--tol must be positive")
    if cfg["mc"] is not None and int(cfg["mc"]) < 1:
        raise ConfigError("--mc must be positive")
    return cfg


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = resolve_config(args)
        _group(cfg)
        out = COMMANDS[args.command][0](cfg)
    except ConfigError as exc:
        parser.print_usage(sys.stderr)
        print(f"ym2d: error: {exc}", file=sys.stderr)
        return 2
    write_outputs(cfg, out)
    if not out.ok:
        failed = [k for k, v in out.checks.items() if not v]
        print("failed checks: " + ", ".join(failed), file=sys.stderr)
        return 1
    return 0
