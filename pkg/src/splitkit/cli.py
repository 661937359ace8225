"""Command-line front end for the splitting toolkit.

Subcommands:
  run                solve a generated (or file-loaded) problem with a named
                     method, print a summary, optionally write a trace CSV
  validate-schedule  check an asynchrony schedule file against the block rules
  list-algorithms    show every runnable method, its parameters and problems
  oracle             print the brute-force solution of a problem

Problem specs are flat: ``kind:key=value,key=value`` (for example
``lasso:n=6,seed=1``).  A spec that names an existing file is loaded with
the problem text format instead.  Config files hold one ``key = value`` per
line with the same keys as the long command-line flags; flags win over the
file.  The SPLITKIT_SEED environment variable overrides any configured seed.

Step-size parameters accept a constant (``0.5``), a comma list applied per
iteration with the last entry repeating (``1.0,0.9,0.8``), or a named rule
(``harmonic`` is 1/(n+2), ``two_minus_harmonic`` is 2 - 1/(n+2)).  For the
block methods a comma list gives per-block constants instead.

Exit status: 0 when the run converged, 2 when it stalled or hit the
iteration cap, 1 for configuration errors (unknown algorithm, a step-size
band violation, a malformed schedule) with a message naming the constraint.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
from dataclasses import replace

import numpy as np

from .algorithms import (
    PrimalDualPair,
    run_averaged_iteration,
    run_backward_backward,
    run_chambolle_pock,
    run_condat_vu,
    run_davis_yin,
    run_douglas_rachford,
    run_dual_forward_backward,
    run_dykstra,
    run_euler,
    run_fbhf,
    run_forward_backward,
    run_partial_inverse,
    run_partial_inverse_composite,
    run_partial_yosida,
    run_projected_landweber,
    run_proximal_point,
    run_resolvent_composition,
    run_tseng_fbf,
)
from .errors import EmptyIntersectionError, OracleError, ParameterError, ScheduleError
from .geometry import LoopConfig
from .operators import (
    AffineMonotone,
    IndicatorAffine,
    IndicatorBox,
    IndicatorHalfspace,
    L1Norm,
    NormalConeSubspace,
    OperatorSpec,
    Prox,
    ProductOperator,
    ZeroOperator,
    resolvent_eval,
)
from .problems import ProblemInstance, gen_problem, oracle_solve, residual_eval
from .projective import (
    SaddleProblem,
    make_block_schedule,
    parse_schedule,
    run_block_kt_projective,
    run_kt_projective,
    run_saddle_projective,
)
from .space import SpaceLayout, Subspace, as_array

__all__ = ["main", "ALGORITHMS"]

_STATUS_EXIT = {"converged": 0, "stalled": 2, "max_iter": 2, "failed": 2}

NAMED_RULES = {
    "harmonic": lambda n: 1.0 / (n + 2.0),
    "two_minus_harmonic": lambda n: 2.0 - 1.0 / (n + 2.0),
}


# ---------------------------------------------------------------------------
# parsing helpers
# ---------------------------------------------------------------------------

def _parse_scalar(s):
    s = s.strip()
    try:
        return int(s)
    except ValueError:
        pass
    try:
        return float(s)
    except ValueError:
        return s


def _parse_sched(raw, flag):
    """A step parameter: constant, comma list, or named rule."""
    if raw is None or not isinstance(raw, str):
        return raw
    s = raw.strip()
    if s in NAMED_RULES:
        return NAMED_RULES[s]
    parts = [t for t in s.split(",") if t.strip()]
    try:
        vals = [float(t) for t in parts]
    except ValueError:
        raise ParameterError(
            f"--{flag} must be a number, a comma list, or one of "
            f"{sorted(NAMED_RULES)}; got {raw!r}")
    if not vals:
        raise ParameterError(f"--{flag} is empty")
    return vals[0] if len(vals) == 1 else vals


def _parse_problem(spec, default_seed):
    if spec is None:
        raise ParameterError("a problem is required (--problem kind:key=value,... or a file)")
    if os.path.exists(spec):
        with open(spec) as fh:
            return ProblemInstance.from_text(fh.read())
    kind, _, rest = spec.partition(":")
    kind = kind.strip()
    opts = {}
    if rest.strip():
        for tok in rest.split(","):
            if not tok.strip():
                continue
            key, eq, val = tok.partition("=")
            if not eq:
                raise ParameterError(
                    f"problem options must look like key=value; got {tok!r}")
            opts[key.strip()] = _parse_scalar(val)
    seed = opts.pop("seed", default_seed)
    return gen_problem(kind, opts or None, seed=seed)


def _parse_schedule_spec(spec, m, p, seed):
    """--schedule 'kind[:k=v,...]' -> BlockSchedule (default full activation)."""
    if spec is None:
        spec = "full"
    kind, _, rest = spec.partition(":")
    kind = kind.strip()
    opts = {}
    for tok in rest.split(","):
        if not tok.strip():
            continue
        key, eq, val = tok.partition("=")
        if not eq:
            raise ParameterError(f"schedule options must look like key=value; got {tok!r}")
        opts[key.strip()] = _parse_scalar(val)
    unknown = set(opts) - {"R", "T", "seed"}
    if unknown:
        raise ParameterError(f"unknown schedule options {sorted(unknown)}; "
                             "supported: R, T, seed")
    R = opts.get("R", max(m, p) if kind == "round_robin" else 1)
    return make_block_schedule(kind, m, p, R=R, T=opts.get("T", 0),
                               seed=opts.get("seed", seed))


def _load_config_file(path):
    out = {}
    with open(path) as fh:
        for raw in fh:
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            key, eq, val = line.partition("=")
            if not eq:
                raise ParameterError(f"config lines must look like key = value; got {raw!r}")
            out[key.strip().replace("-", "_")] = val.strip()
    return out


def _lam_for_engine(lam):
    """LoopConfig.lam takes a float or a callable(n, report)."""
    if lam is None:
        return 1.0
    if callable(lam):
        return lambda n, report: float(lam(n))
    if isinstance(lam, list):
        return lambda n, report: float(lam[min(n, len(lam) - 1)])
    return float(lam)


# ---------------------------------------------------------------------------
# small operator builders shared by the adapters
# ---------------------------------------------------------------------------

def _aff(S, b):
    return AffineMonotone(np.atleast_2d(np.asarray(S, dtype=float)),
                          np.atleast_1d(np.asarray(b, dtype=float)))


class _BoxAffine(OperatorSpec):
    """One-dimensional N_[lo,hi] + (a x + b); the resolvent is a clipped
    affine solve, so product stacks of these stay cheap."""

    def __init__(self, lo, hi, a, b):
        self.lo, self.hi = float(lo), float(hi)
        self.a, self.b = float(a), float(b)
        if self.a < 0:
            raise ParameterError("the affine slope must be nonnegative to stay monotone")
        self.dim = 1

    def resolvent(self, gamma, x):
        g = float(gamma)
        y = (as_array(x) - g * self.b) / (1.0 + g * self.a)
        return np.clip(y, self.lo, self.hi)


def _need_kind(problem, kinds, algo):
    if problem.kind not in kinds:
        raise ParameterError(
            f"{algo} runs on {', '.join(kinds)} problems; got {problem.kind!r}")


def _interval_atoms(problem):
    lo, hi = problem.data["lo"], problem.data["hi"]
    return [Prox(IndicatorBox(np.array([lo[i]]), np.array([hi[i]])), dim=1)
            for i in range(len(lo))]


def _two_set_atoms(problem):
    if problem.dims["shape"] == "halfspaces":
        return [IndicatorHalfspace(problem.data["a1"], float(problem.data["b1"])),
                IndicatorHalfspace(problem.data["a2"], float(problem.data["b2"]))]
    C, d = problem.data["C"], problem.data["d"]
    return [IndicatorAffine(C[:1], d[:1]), IndicatorAffine(C[1:], d[1:])]


def _consensus_slope(problem):
    return float(problem.data["slope"]), float(problem.data["offset"])


def _affine_zero_parts(problem):
    S, b = problem.data["S"], problem.data["b"]
    K, G, nu = problem.data["K"], problem.data["G"], float(problem.data["nu"])
    n = S.shape[0]
    co = G.T @ G + nu * np.eye(n)
    skew = K - K.T
    return S, b, co, skew, n


def _composite_ops(problem):
    return (_aff(problem.data["SA"], problem.data["bA"]),
            _aff(problem.data["SB"], problem.data["bB"]),
            problem.data["L"])


def _x0_or(params, problem, default):
    x0 = params.get("x0")
    if x0 is None:
        return default
    x0 = as_array(x0)
    if x0.shape[0] != default.shape[0]:
        raise ParameterError(
            f"--x0 must have dimension {default.shape[0]}; got {x0.shape[0]}")
    return x0


def _mean_point(vec):
    return np.array([float(np.mean(as_array(vec)))])


# ---------------------------------------------------------------------------
# algorithm adapters
# ---------------------------------------------------------------------------

class _Algo:
    def __init__(self, name, help_text, kinds, params, fn, uses=()):
        self.name = name
        self.help = help_text
        self.kinds = kinds
        self.params = params  # name -> default (None means computed)
        self.fn = fn
        self.uses = tuple(uses)  # library runners this command drives

    def run(self, problem, params, cfg):
        _need_kind(problem, self.kinds, self.name)
        return self.fn(problem, params, cfg)


def _run_ppa(p, prm, cfg):
    S, b = p.data["S"], p.data["b"]
    n = S.shape[0]
    return run_proximal_point(_aff(S, b), prm["gamma"], cfg,
                              x0=_x0_or(prm, p, np.zeros(n)))


def _run_km(p, prm, cfg):
    S, b = p.data["S"], p.data["b"]
    n = S.shape[0]
    M = _aff(S, b)
    if callable(prm["gamma"]) or isinstance(prm["gamma"], list):
        raise ParameterError("the fixed-point map uses one constant gamma")
    g = float(prm["gamma"])
    T = lambda x: resolvent_eval(M, g, x)
    return run_averaged_iteration(T, 0.5, prm["lam"], cfg,
                                  x0=_x0_or(prm, p, np.zeros(n)), dim=n)


def _run_euler(p, prm, cfg):
    S, b, co, skew, n = _affine_zero_parts(p)
    if float(np.linalg.norm(skew)) > 1e-12:
        raise ParameterError("the explicit Euler step needs a cocoercive map; "
                             "generate affine_zero:sym=1")
    B = _aff(S, b)
    gamma = prm["gamma"] if prm["gamma"] is not None else B.alpha
    return run_euler(B, gamma, cfg, x0=_x0_or(prm, p, np.zeros(n)))


def _run_resolvent_composition(p, prm, cfg):
    s, t = _consensus_slope(p)
    if s != 0.0:
        raise ParameterError("the resolvent-composition driver handles plain "
                             "consensus feasibility (slope = 0)")
    k = p.dims["p"]
    B = Prox(IndicatorBox(p.data["lo"], p.data["hi"]), dim=k)
    V = Subspace(np.ones((1, k)))
    x, tr = run_resolvent_composition(B, np.eye(k), V, prm["gamma"], prm["lam"],
                                      cfg, x0=np.zeros(k))
    return _mean_point(x), tr


def _run_partial_inverse(p, prm, cfg):
    s, t = _consensus_slope(p)
    k = p.dims["p"]
    lo, hi = p.data["lo"], p.data["hi"]
    ops = [_BoxAffine(lo[i], hi[i], s / k, t / k) for i in range(k)]
    A = ProductOperator(SpaceLayout((1,) * k), ops)
    V = Subspace(np.ones((1, k)))
    pair, tr = run_partial_inverse(A, V, cfg)
    return _mean_point(pair.x), tr


def _run_partial_inverse_composite(p, prm, cfg):
    pk = p.dims["p"]
    rho = float(p.data["rho"])
    n = p.dims["n"]
    A = _aff(p.data["SA"] + rho * np.eye(n), p.data["bA"] - p.data["z"])
    Bs = [_aff(p.data[f"S{k + 1}"], p.data[f"b{k + 1}"]) for k in range(pk)]
    Ls = [p.data[f"L{k + 1}"] for k in range(pk)]
    return run_partial_inverse_composite(A, Bs, Ls, cfg)


def _run_dr(p, prm, cfg):
    if p.dims["shape"] != "lines":
        raise ParameterError("this splitting solves feasibility; use two_set:shape=lines "
                             "(the Dykstra method handles half-space best approximation)")
    a1, a2 = _two_set_atoms(p)
    n = p.dims["n"]
    return run_douglas_rachford(Prox(a1, dim=n), Prox(a2, dim=n), prm["gamma"], cfg,
                                y0=_x0_or(prm, p, p.data["z"].copy()))


def _run_dy(p, prm, cfg):
    if p.dims["p"] != 2:
        raise ParameterError("the three-operator driver takes consensus with p = 2 intervals")
    s, t = _consensus_slope(p)
    A, B = _interval_atoms(p)
    C = _aff([[s]], [t]) if s > 0.0 else None
    pair, tr = run_davis_yin(A, B, C, prm["gamma"], cfg,
                             y0=_x0_or(prm, p, np.zeros(1)))
    return pair.x, tr


def _run_fbf(p, prm, cfg):
    if p.kind == "bilinear_minimax":
        n, m = p.dims["n"], p.dims["m"]
        P, c, K, Q, d = (p.data[k] for k in ("P", "c", "K", "Q", "d"))
        M = np.block([[P, K.T], [-K, Q]])
        F = _aff(M, np.concatenate([c, d]))
        A = ZeroOperator(n + m)
        gamma = prm["gamma"] if prm["gamma"] is not None else 0.9 * (1.0 - cfg.eps) / F.beta
        x, tr = run_tseng_fbf(A, F, gamma, cfg, x0=_x0_or(prm, p, np.zeros(n + m)))
        x = as_array(x)
        return PrimalDualPair(x[:n], x[n:], tr.final_residual, tr.final_residual), tr
    S, b, co, skew, n = _affine_zero_parts(p)
    F = _aff(S, b)
    gamma = prm["gamma"] if prm["gamma"] is not None else 0.9 * (1.0 - cfg.eps) / max(F.beta, 1e-12)
    return run_tseng_fbf(ZeroOperator(n), F, gamma, cfg,
                         x0=_x0_or(prm, p, np.zeros(n)))


def _run_fbhf(p, prm, cfg):
    S, b, co, skew, n = _affine_zero_parts(p)
    C = _aff(co, b)
    Q = _aff(skew, np.zeros(n))
    alpha, beta = C.alpha, Q.beta
    gamma = prm["gamma"]
    if gamma is None:
        chi = 4.0 * alpha / (1.0 + math.sqrt(1.0 + 16.0 * alpha ** 2 * beta ** 2))
        gamma = 0.9 * (1.0 - cfg.eps) * chi
    return run_fbhf(ZeroOperator(n), C, Q, gamma, cfg,
                    x0=_x0_or(prm, p, np.zeros(n)))


def _run_fb(p, prm, cfg):
    G, h, w = p.data["G"], p.data["h"], float(p.data["w"])
    n = G.shape[1]
    A = Prox(L1Norm(w), dim=n)
    B = _aff(G.T @ G, -G.T @ h)
    return run_forward_backward(A, B, prm["gamma"], prm["mu"], cfg,
                                x0=_x0_or(prm, p, np.zeros(n)))


def _run_landweber(p, prm, cfg):
    L = p.data["L"]
    y = L @ p.planted["x_star"]  # a reachable target, so the split problem is solved
    atom = IndicatorBox(p.data["lo"], p.data["hi"])
    alpha = 1.0 / float(np.linalg.eigvalsh(L.T @ L)[-1])
    gamma = prm["gamma"] if prm["gamma"] is not None else alpha
    return run_projected_landweber(atom, L, y, gamma, prm["mu"], cfg,
                                   x0=_x0_or(prm, p, np.zeros(p.dims["n"])))


def _run_partial_yosida(p, prm, cfg):
    s, t = _consensus_slope(p)
    k = p.dims["p"]
    lo, hi = p.data["lo"], p.data["hi"]
    A = _BoxAffine(lo[0], hi[0], s, t)
    Bs = _interval_atoms(p)[1:]
    rho = prm["rho"]
    rhos = rho if isinstance(rho, list) else [float(rho)] * (k - 1)
    if len(rhos) != k - 1:
        raise ParameterError(f"--rho needs one value or {k - 1} comma values")
    a = 1.0 / sum(1.0 / r for r in rhos)
    gamma = prm["gamma"] if prm["gamma"] is not None else a
    return run_partial_yosida(A, Bs, rhos, gamma, prm["mu"], cfg,
                              x0=_x0_or(prm, p, np.zeros(1)))


def _run_bb(p, prm, cfg):
    if p.dims["p"] != 2:
        raise ParameterError("alternating resolvents take consensus with p = 2 intervals")
    s, t = _consensus_slope(p)
    lo, hi = p.data["lo"], p.data["hi"]
    A = _BoxAffine(lo[0], hi[0], s, t)
    B = _interval_atoms(p)[1]
    return run_backward_backward(A, B, prm["rho"], cfg,
                                 x0=_x0_or(prm, p, np.zeros(1)))


def _run_dual_fb(p, prm, cfg):
    pk = p.dims["p"]
    rho = float(p.data["rho"])
    A = _aff(p.data["SA"], p.data["bA"])
    Bs = [_aff(p.data[f"S{k + 1}"], p.data[f"b{k + 1}"]) for k in range(pk)]
    Ls = [p.data[f"L{k + 1}"] for k in range(pk)]
    gamma = prm["gamma"]
    if gamma is None:
        gamma = 1.0 / (sum(float(np.linalg.norm(L, 2)) ** 2 for L in Ls) / rho)
    return run_dual_forward_backward(A, rho, p.data["z"], Bs, None, Ls,
                                     gamma, prm["mu"], cfg)


def _run_dykstra(p, prm, cfg):
    pair, tr = run_dykstra(_two_set_atoms(p), p.data["z"], cfg)
    # the stacked normal-cone covectors are not the per-constraint multipliers,
    # so report the primal and let the residual complete the dual itself
    return as_array(pair.x), tr


def _run_cp(p, prm, cfg):
    A, B, L = _composite_ops(p)
    nrm = float(np.linalg.norm(L, 2))
    tau = prm["tau"] if prm["tau"] is not None else 0.9 / max(nrm, 1e-12)
    sigma = prm["sigma"] if prm["sigma"] is not None else 0.9 / max(nrm, 1e-12)
    return run_chambolle_pock(A, B, L, tau, sigma, cfg)


def _run_cv(p, prm, cfg):
    SB, bB, L = p.data["SB"], p.data["bB"], p.data["L"]
    KA, GA, nu = p.data["KA"], p.data["GA"], float(p.data["nu"])
    n = p.dims["n"]
    A = _aff(KA - KA.T, np.zeros(n))
    C = _aff(GA.T @ GA + nu * np.eye(n), p.data["bA"])
    alpha = C.alpha
    nrm = float(np.linalg.norm(L, 2))
    s = prm["tau"]
    if s is None:
        s = 0.8 * alpha
        if s * nrm >= 0.5:
            s = 0.5 / nrm
    tau = s
    sigma = prm["sigma"] if prm["sigma"] is not None else tau
    return run_condat_vu(A, C, [_aff(SB, bB)], [L], tau, [sigma], cfg,
                         lam=prm["lam"])


def _run_kt(p, prm, cfg):
    A, B, L = _composite_ops(p)
    return run_kt_projective(A, B, L, prm["gamma"], prm["sigma"], cfg)


def _block_parts(p):
    if p.kind == "composite_pd":
        A, B, L = _composite_ops(p)
        return [A], [B], [[L]], 1, 1
    pk = p.dims["p"]
    rho = float(p.data["rho"])
    n = p.dims["n"]
    As = [_aff(p.data["SA"] + rho * np.eye(n), p.data["bA"] - p.data["z"])]
    Bs = [_aff(p.data[f"S{k + 1}"], p.data[f"b{k + 1}"]) for k in range(pk)]
    Ls = [[p.data[f"L{k + 1}"]] for k in range(pk)]
    return As, Bs, Ls, 1, pk


def _clamp_to_schedule(cfg, sched):
    """A finite schedule file bounds the horizon instead of erroring mid-run."""
    if sched.entries is not None and len(sched.entries) < cfg.max_iter:
        return replace(cfg, max_iter=len(sched.entries))
    return cfg


def _run_block_kt(p, prm, cfg):
    As, Bs, Ls, m, pk = _block_parts(p)
    sched = prm["_schedule"](m, pk)
    return run_block_kt_projective(As, Bs, Ls, sched, prm["gamma"], prm["sigma"],
                                   _clamp_to_schedule(cfg, sched))


def _run_saddle(p, prm, cfg):
    A, B, L = _composite_ops(p)
    m = p.dims["m"]
    prob = SaddleProblem([p.dims["n"]], [m], [A], [B],
                         [NormalConeSubspace(Subspace.trivial(m))], [[L]])
    sched = prm["_schedule"](1, 1)
    return run_saddle_projective(prob, sched, _clamp_to_schedule(cfg, sched),
                                 sigma=prm["sigmaw"], gammas=prm["gamma"],
                                 mus=prm["mu"], rhos=prm["rho"], sigmas=prm["sigma"])


ALGORITHMS = {
    "ppa": _Algo("ppa", "relaxed proximal point iterations",
                 ("affine_zero",), {"gamma": 1.0, "x0": None}, _run_ppa,
                 uses=("run_proximal_point",)),
    "km": _Algo("km", "relaxed fixed-point iterations of the resolvent",
                ("affine_zero",), {"gamma": 1.0, "lam": 1.0, "x0": None}, _run_km,
                uses=("run_averaged_iteration",)),
    "euler": _Algo("euler", "explicit steps on a cocoercive map (affine_zero:sym=1)",
                   ("affine_zero",), {"gamma": None, "x0": None}, _run_euler,
                   uses=("run_euler",)),
    "resolvent_composition": _Algo(
        "resolvent_composition", "projected resolvent steps for consensus feasibility",
        ("consensus",), {"gamma": 1.0, "lam": 1.0}, _run_resolvent_composition,
        uses=("run_resolvent_composition",)),
    "partial_inverse": _Algo(
        "partial_inverse", "proximal point on the partial inverse (consensus)",
        ("consensus",), {}, _run_partial_inverse,
        uses=("run_partial_inverse",)),
    "partial_inverse_composite": _Algo(
        "partial_inverse_composite", "partial inverse on the product graph subspace",
        ("strongly_monotone_dual",), {}, _run_partial_inverse_composite,
        uses=("run_partial_inverse_composite",)),
    "dr": _Algo("dr", "two-operator splitting on two lines",
                ("two_set",), {"gamma": 1.0, "x0": None}, _run_dr,
                uses=("run_douglas_rachford",)),
    "dy": _Algo("dy", "three-operator splitting on two intervals plus a slope",
                ("consensus",), {"gamma": 1.0, "x0": None}, _run_dy,
                uses=("run_davis_yin",)),
    "fbf": _Algo("fbf", "forward-backward-forward on a Lipschitz monotone map",
                 ("bilinear_minimax", "affine_zero"), {"gamma": None, "x0": None},
                 _run_fbf, uses=("run_tseng_fbf",)),
    "fbhf": _Algo("fbhf", "forward-backward-half-forward (cocoercive + skew parts)",
                  ("affine_zero",), {"gamma": None, "x0": None}, _run_fbhf,
                  uses=("run_fbhf",)),
    "fb": _Algo("fb", "relaxed forward-backward on the l1 least-squares problem",
                ("lasso",), {"gamma": 1.0, "mu": 1.0, "x0": None}, _run_fb,
                uses=("run_forward_backward",)),
    "landweber": _Algo("landweber", "projected least squares for split feasibility",
                       ("split_feasibility",), {"gamma": None, "mu": 1.0, "x0": None},
                       _run_landweber, uses=("run_projected_landweber",)),
    "partial_yosida": _Algo(
        "partial_yosida", "forward-backward with smoothed interval terms",
        ("consensus",), {"rho": 1.0, "gamma": None, "mu": 1.0, "x0": None},
        _run_partial_yosida, uses=("run_partial_yosida",)),
    "bb": _Algo("bb", "alternating resolvents on two intervals",
                ("consensus",), {"rho": 1.0, "x0": None}, _run_bb,
                uses=("run_backward_backward",)),
    "dual_fb": _Algo("dual_fb", "forward-backward on the duals (strongly monotone)",
                     ("strongly_monotone_dual",), {"gamma": None, "mu": 1.0},
                     _run_dual_fb, uses=("run_dual_forward_backward",)),
    "dykstra": _Algo("dykstra", "best approximation onto an intersection",
                     ("two_set",), {}, _run_dykstra,
                     uses=("run_dykstra",)),
    "cp": _Algo("cp", "primal-dual proximal iterations for composite inclusions",
                ("composite_pd",), {"tau": None, "sigma": None}, _run_cp,
                uses=("run_chambolle_pock",)),
    "cv": _Algo("cv", "primal-dual iterations with a cocoercive forward part",
                ("composite_pd",), {"tau": None, "sigma": None, "lam": 1.0}, _run_cv,
                uses=("run_condat_vu",)),
    "kt": _Algo("kt", "projective splitting for one primal-dual pair",
                ("composite_pd",), {"gamma": 1.0, "sigma": 1.0}, _run_kt,
                uses=("run_kt_projective",)),
    "block_kt": _Algo("block_kt", "asynchronous block projective splitting",
                      ("composite_pd", "strongly_monotone_dual"),
                      {"gamma": 1.0, "sigma": 1.0, "_schedule": None}, _run_block_kt,
                      uses=("run_block_kt_projective",)),
    "saddle": _Algo("saddle", "asynchronous saddle projective splitting",
                    ("composite_pd",),
                    {"sigmaw": None, "gamma": None, "mu": None, "rho": None,
                     "sigma": None, "_schedule": None}, _run_saddle,
                    uses=("run_saddle_projective",)),
}


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def _merge_settings(args):
    """File config under the flags; returns a plain dict of strings/None."""
    merged = dict(_load_config_file(args.config)) if args.config else {}
    for key, val in vars(args).items():
        if key in ("command", "config", "fn") or val is None:
            continue
        merged[key] = val
    return merged


_RUN_KEYS = ("problem", "algo", "mode", "max_iter", "tol", "eps", "seed", "lam",
             "gamma", "mu", "tau", "sigma", "sigmaw", "rho", "x0", "inertia",
             "perturb", "trace", "schedule", "schedule_file")


def cmd_run(args):
    settings = _merge_settings(args)
    unknown = set(settings) - set(_RUN_KEYS)
    if unknown:
        raise ParameterError(f"unknown config keys {sorted(unknown)}")

    seed = int(settings.get("seed", 0))
    env_seed = os.environ.get("SPLITKIT_SEED")
    if env_seed is not None:
        try:
            seed = int(env_seed)
        except ValueError:
            raise ParameterError(f"SPLITKIT_SEED must be an integer; got {env_seed!r}")

    problem = _parse_problem(settings.get("problem"), seed)

    name = settings.get("algo")
    if name is None:
        raise ParameterError("an algorithm is required (--algo, see list-algorithms)")
    key = str(name).strip().replace("-", "_")
    algo = ALGORITHMS.get(key)
    if algo is None:
        raise ParameterError(
            f"unknown algorithm {name!r}; known: {', '.join(sorted(ALGORITHMS))}")

    mode = str(settings.get("mode", "fejer"))
    perturbation = None
    if settings.get("inertia") is not None:
        perturbation = ("inertial", float(settings["inertia"]))
    elif settings.get("perturb") is not None:
        if settings["perturb"] != "identity":
            raise ParameterError("--perturb takes only 'identity' (use --inertia for inertia)")
        perturbation = "identity"
    cfg = LoopConfig(mode=mode,
                     lam=_lam_for_engine(_parse_sched(settings.get("lam"), "lam")),
                     max_iter=int(settings.get("max_iter", 10000)),
                     tol=float(settings.get("tol", 1e-8)),
                     eps=float(settings.get("eps", 1e-3)),
                     perturbation=perturbation,
                     seed=seed)

    params = {}
    for pname, default in algo.params.items():
        if pname == "_schedule":
            spec = settings.get("schedule")
            sched_file = settings.get("schedule_file")
            if sched_file is not None:
                with open(sched_file) as fh:
                    text = fh.read()
                params[pname] = lambda m, p, _t=text: parse_schedule(_t, m, p)
            else:
                params[pname] = lambda m, p, _s=spec: _parse_schedule_spec(_s, m, p, seed)
            continue
        if pname == "x0":
            raw = settings.get("x0")
            params[pname] = None if raw is None else np.array(
                [float(t) for t in str(raw).split(",")])
            continue
        raw = settings.get(pname)
        params[pname] = default if raw is None else _parse_sched(str(raw), pname)
    extra = {k for k in ("gamma", "mu", "tau", "sigma", "sigmaw", "rho", "x0")
             if settings.get(k) is not None and k not in algo.params}
    if extra:
        raise ParameterError(
            f"{algo.name} does not take {sorted(extra)}; its parameters are "
            f"{sorted(k for k in algo.params if not k.startswith('_'))}")

    result, trace = algo.run(problem, params, cfg)

    primal = as_array(result.x) if isinstance(result, PrimalDualPair) else as_array(result)
    candidate = result if isinstance(result, PrimalDualPair) else primal
    prob_res = residual_eval(problem, candidate)

    dist = None
    try:
        ref = oracle_solve(problem)
        dist = float(np.linalg.norm(primal - ref.primal))
    except (OracleError, ParameterError):
        pass

    trace_path = settings.get("trace")
    if trace_path:
        with open(trace_path, "w", newline="") as fh:
            fh.write(trace.to_csv())

    print(f"algorithm: {algo.name}")
    print(f"problem: {problem.kind} (seed {problem.seed})")
    print(f"status: {trace.status}")
    print(f"iterations: {trace.n_iter}")
    print(f"final_residual: {trace.final_residual:.9e}")
    print(f"problem_residual: {prob_res:.9e}")
    if dist is not None:
        print(f"dist_to_oracle: {dist:.9e}")
    if trace_path:
        print(f"trace: {trace_path}")
    return _STATUS_EXIT.get(trace.status, 2)


def cmd_validate_schedule(args):
    with open(args.file) as fh:
        text = fh.read()
    try:
        sched = parse_schedule(text, args.m, args.p, R=args.window, T=args.stale)
    except (ScheduleError, ParameterError) as e:
        print(f"invalid schedule: {e}", file=sys.stderr)
        return 1
    print(f"ok: {len(sched.entries)} iterations, m = {args.m}, p = {args.p}, "
          f"window R = {sched.R}, staleness T = {sched.T}")
    return 0


def cmd_list_algorithms(args):
    for name in sorted(ALGORITHMS):
        algo = ALGORITHMS[name]
        shown = [k for k in algo.params if not k.startswith("_") and k != "x0"]
        extras = []
        if "_schedule" in algo.params:
            extras.append("schedule")
        parms = ", ".join(shown + extras) or "-"
        print(f"{name:26s} kinds: {', '.join(algo.kinds)}")
        print(f"{'':26s} params: {parms}")
        print(f"{'':26s} {algo.help}")
    return 0


def cmd_oracle(args):
    problem = _parse_problem(args.problem, int(args.seed or 0))
    sol = oracle_solve(problem)
    print("kind:", problem.kind)
    print("primal:", " ".join(f"{v:.17g}" for v in np.atleast_1d(sol.primal)))
    if sol.dual is not None:
        print("dual:", " ".join(f"{v:.17g}" for v in np.atleast_1d(sol.dual)))
    print(f"certificate: {sol.residual:.3e}")
    return 0


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------

def _build_parser():
    parser = argparse.ArgumentParser(
        prog="splitkit",
        description="Monotone splitting methods driven from one projection engine.")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="solve a problem with a named method")
    run.add_argument("--problem", help="kind:key=value,... or a problem file path")
    run.add_argument("--algo", help="algorithm name (see list-algorithms)")
    run.add_argument("--mode", choices=("fejer", "haugazeau"))
    run.add_argument("--max-iter", dest="max_iter", type=int)
    run.add_argument("--tol", type=float)
    run.add_argument("--eps", type=float)
    run.add_argument("--seed", type=int)
    run.add_argument("--lam", help="engine relaxation (number, comma list, or rule)")
    for flag in ("gamma", "mu", "tau", "sigma", "sigmaw", "rho"):
        run.add_argument(f"--{flag}")
    run.add_argument("--x0", help="starting point as a comma list")
    run.add_argument("--inertia", type=float, help="inertial weight (capped internally)")
    run.add_argument("--perturb", help="'identity' for the vanishing-perturbation run")
    run.add_argument("--trace", help="write the iteration trace CSV here")
    run.add_argument("--schedule", help="block schedule: full | round_robin[:R=..,T=..] "
                                        "| random_with_cover[:R=..,T=..,seed=..]")
    run.add_argument("--schedule-file", dest="schedule_file",
                     help="explicit schedule file (overrides --schedule)")
    run.add_argument("--config", help="key = value file with these same keys")
    run.set_defaults(fn=cmd_run)

    val = sub.add_parser("validate-schedule", help="check a schedule file")
    val.add_argument("--file", required=True)
    val.add_argument("--m", type=int, required=True, help="number of primal blocks")
    val.add_argument("--p", type=int, required=True, help="number of dual blocks")
    val.add_argument("--window", type=int, help="declared coverage window R")
    val.add_argument("--stale", type=int, help="declared staleness bound T")
    val.set_defaults(fn=cmd_validate_schedule)

    lst = sub.add_parser("list-algorithms", help="show runnable methods")
    lst.set_defaults(fn=cmd_list_algorithms)

    orc = sub.add_parser("oracle", help="print the brute-force solution")
    orc.add_argument("--problem", required=True)
    orc.add_argument("--seed", type=int)
    orc.set_defaults(fn=cmd_oracle)
    return parser


def main(argv=None):
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except (ParameterError, ScheduleError, OracleError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    except EmptyIntersectionError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except FileNotFoundError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
