"""Classical splitting algorithms as configurations of the outer-loop engines.

Every driver here builds a cut oracle (how to produce a separating half-space
from resolvent and forward evaluations) plus a relaxation schedule, and then
calls ``outer_loop_run``.  Named methods differ only in that data:

* proximal point / Krasnosel'skii-Mann / partial inverse: one resolvent-type
  evaluation per step, displacement = projection onto the graph cut;
* Douglas-Rachford / Davis-Yin: fixed-point map of two resolvents (plus a
  forward step), displacement encoded through the map's averagedness;
* forward-backward: graph cut with a cocoercive forward probe;
* Tseng's method and its half-forward extension: graph cut evaluated with a
  Lipschitz forward correction, stepped by gamma*t* rather than the full
  projection;
* Chambolle-Pock / Condat-Vu: the same proximal-point/forward-backward loops
  run under a primal-dual metric kernel.

Strong (Haugazeau) variants come from cfg.mode = "haugazeau"; nothing else
changes.  Schedule bands are validated on every draw and violations report
the inequality that failed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np
import scipy.linalg

from .errors import ParameterError
from .geometry import CutReport, LoopConfig, outer_loop_run
from .operators import (
    AffineMonotone,
    GAMMA_MIN,
    Inverse,
    OperatorSpec,
    PartialInverse,
    ProductOperator,
    Prox,
    Scaled,
    Skew,
    YosidaOperator,
    ZeroOperator,
    as_affine,
    check_gamma,
)
from .space import (
    LinOp,
    MetricKernel,
    SpaceLayout,
    Subspace,
    Vec,
    as_array,
    estimate_operator_norm,
)

__all__ = [
    "Schedule",
    "PrimalDualPair",
    "Embedding",
    "KuhnTuckerOperator",
    "SaddleBlockOperator",
    "AveragedReflectionsOperator",
    "build_embedding",
    "run_proximal_point",
    "run_chambolle_pock",
    "chambolle_pock_kernel",
    "run_averaged_iteration",
    "run_euler",
    "run_resolvent_composition",
    "run_partial_inverse",
    "run_partial_inverse_composite",
    "run_douglas_rachford",
    "run_davis_yin",
    "run_tseng_fbf",
    "fbf_monotone_skew_setup",
    "fbf_lagrangian_setup",
    "fbf_parallel_sum_setup",
    "run_fbhf",
    "fbhf_saddle_setup",
    "run_forward_backward",
    "run_projected_landweber",
    "run_partial_yosida",
    "run_backward_backward",
    "run_dual_forward_backward",
    "run_dykstra",
    "run_condat_vu",
    "condat_vu_kernel",
]

GAMMA_CAP = 1e6


# ---------------------------------------------------------------------------
# schedules and validation helpers
# ---------------------------------------------------------------------------

class Schedule:
    """A per-iteration parameter sequence with a band check on every draw.

    Accepts a float (constant), a sequence (last value repeats), or a
    callable n -> value.  ``band`` is a predicate; ``text`` is the inequality
    quoted when it fails.
    """

    def __init__(self, value, name, band=None, text=None):
        self.name = name
        self.band = band
        self.text = text
        if callable(value):
            self._fn = value
            self.is_constant = False
        elif np.ndim(value) == 0:
            v = float(value)
            self._fn = lambda n: v
            self.is_constant = True
        else:
            arr = [float(v) for v in value]
            if not arr:
                raise ParameterError(f"{name} schedule must not be empty")
            self._fn = lambda n: arr[min(n, len(arr) - 1)]
            self.is_constant = len(set(arr)) == 1

    def __call__(self, n):
        v = float(self._fn(n))
        if self.band is not None and not self.band(v):
            raise ParameterError(
                f"{self.name} must satisfy {self.text}; got {self.name} = {v:g} at n = {n}")
        return v


def _unwrap(x):
    if isinstance(x, Vec):
        return np.array(x.data, dtype=float), x.layout
    return np.array(as_array(x), dtype=float), None


def _start_point(x0, dim, what):
    if x0 is None:
        if dim is None:
            raise ParameterError(f"{what} needs an explicit starting point (dimension unknown)")
        return np.zeros(int(dim)), None
    return _unwrap(x0)


def _alpha_of(op, given, what):
    a = given if given is not None else getattr(op, "alpha", None)
    if a is None or float(a) <= 0:
        raise ParameterError(f"{what} requires a cocoercivity constant alpha > 0")
    return float(a)


def _beta_of(op, given, what):
    b = given if given is not None else getattr(op, "beta", None)
    if b is None or float(b) <= 0:
        raise ParameterError(f"{what} requires a Lipschitz constant beta > 0")
    return float(b)


@dataclass
class PrimalDualPair:
    """A primal point with an optional dual block and their joint residual."""

    x: np.ndarray
    y_star: np.ndarray = None
    primal_residual: float = math.nan
    dual_residual: float = math.nan


# ---------------------------------------------------------------------------
# embeddings
# ---------------------------------------------------------------------------

class KuhnTuckerOperator(OperatorSpec):
    """Block operator (x, y*) -> (Ax + sum L_k* y_k*) x (B_k^{-1} y_k* - L_k x).

    Its zeros are exactly the primal-dual solution pairs of the composite
    inclusion 0 in Ax + sum L_k* B_k(L_k x).  Resolvents are not available in
    closed form; drivers consume the block structure instead.
    """

    def __init__(self, A, Bs, Ls):
        self.A = A
        self.Bs = list(Bs)
        self.Ls = [L if isinstance(L, LinOp) else LinOp(L) for L in Ls]
        if len(self.Bs) != len(self.Ls):
            raise ParameterError("one linear map per dual block required")
        n = self.Ls[0].cols
        for L in self.Ls:
            if L.cols != n:
                raise ParameterError("all linear maps must share the primal dimension")
        self.layout = SpaceLayout((n,) + tuple(L.rows for L in self.Ls))
        self.dim = self.layout.total_dim

    def forward(self, u):
        parts = self.layout.split(as_array(u))
        x, ys = parts[0], parts[1:]
        out = [self.A.forward(x) + sum(L.adjoint_apply(y) for L, y in zip(self.Ls, ys))]
        for B, L, y in zip(self.Bs, self.Ls, ys):
            aff = as_affine(B)
            if aff is None:
                raise ParameterError("forward evaluation needs affine dual blocks")
            S, b = aff
            out.append(np.linalg.solve(S, y - b) - L.apply(x))
        return self.layout.concat(out)

    def as_affine_spec(self):
        """Dense AffineMonotone assembly when every block is affine, else None."""
        n = self.layout.factors[0]
        aff = as_affine(self.A, n)
        if aff is None:
            return None
        invs = []
        for B, L in zip(self.Bs, self.Ls):
            v = as_affine(Inverse(B), L.rows)
            if v is None:
                return None
            invs.append(v)
        S = scipy.linalg.block_diag(aff[0], *[v[0] for v in invs])
        b = np.concatenate([aff[1]] + [v[1] for v in invs])
        slices = self.layout.slices()
        for k, L in enumerate(self.Ls):
            S[slices[0], slices[k + 1]] += L.matrix.T
            S[slices[k + 1], slices[0]] -= L.matrix
        return AffineMonotone(S, b)


class SaddleBlockOperator(OperatorSpec):
    """Block operator (x, y, v*) -> (Ax + L*v*) x (By - v*) x {-Lx + y}.

    A zero gives a solution of 0 in Ax + L*B(Lx) with the constraint block
    enforcing y = Lx.
    """

    def __init__(self, A, B, L):
        self.A = A
        self.B = B
        self.L = L if isinstance(L, LinOp) else LinOp(L)
        self.layout = SpaceLayout((self.L.cols, self.L.rows, self.L.rows))
        self.dim = self.layout.total_dim


@dataclass
class Embedding:
    """Auxiliary space + surrogate operator + recovery map for a problem."""

    layout: SpaceLayout
    operator: OperatorSpec
    recover: object
    tag: str
    data: dict = field(default_factory=dict)


def build_embedding(kind, **kw):
    """Construct the standard product-space embeddings.

    kinds: "spingarn" (ops=[A_1..A_p], dim=n), "kuhn_tucker" (A, B, L),
    "product_dual" (A, Bs, Ls), "saddle" (A, B, L).  Recovery maps return the
    primal block (consensus mean for spingarn).
    """
    if kind == "spingarn":
        ops = list(kw["ops"])
        n = int(kw["dim"])
        p = len(ops)
        if p < 1:
            raise ParameterError("spingarn embedding needs at least one operator")
        layout = SpaceLayout((n,) * p)
        V = Subspace.consensus(p, n)
        big = ProductOperator(layout, ops)
        op = PartialInverse(big, V)

        def recover(z):
            return layout.split(V.proj(as_array(z)))[0]

        return Embedding(layout, op, recover, "spingarn", {"V": V, "product": big})
    if kind in ("kuhn_tucker", "product_dual"):
        if kind == "kuhn_tucker":
            A, Bs, Ls = kw["A"], [kw["B"]], [kw["L"]]
        else:
            A, Bs, Ls = kw["A"], list(kw["Bs"]), list(kw["Ls"])
        op = KuhnTuckerOperator(A, Bs, Ls)

        def recover(z):
            return op.layout.split(as_array(z))[0]

        return Embedding(op.layout, op, recover, kind, {})
    if kind == "saddle":
        op = SaddleBlockOperator(kw["A"], kw["B"], kw["L"])

        def recover(z):
            return op.layout.split(as_array(z))[0]

        return Embedding(op.layout, op, recover, "saddle", {})
    raise ParameterError(f"unknown embedding kind {kind!r}")


# ---------------------------------------------------------------------------
# proximal point (plain, kernel, perturbed) and its presets
# ---------------------------------------------------------------------------

def _kernel_solver(M, kernel, what):
    """Dense route for (gamma^{-1} U + M)^{-1}(gamma^{-1} U x): affine M only."""
    aff = as_affine(M)
    if aff is None:
        raise ParameterError(
            f"{what} with a metric kernel needs affine operator data "
            "(or an explicit warped_solver)")
    S, b = aff
    U = kernel.U.matrix
    cache = {}

    def solve(g, x):
        fac = cache.get(g)
        if fac is None:
            fac = scipy.linalg.lu_factor(U + g * S)
            cache[g] = fac
        return scipy.linalg.lu_solve(fac, U @ x - g * b)

    return solve


def run_proximal_point(M, gamma, cfg: LoopConfig, x0=None, kernel=None, warped_solver=None):
    """Relaxed proximal iterations x_{n+1} = x_n - lam_n d_n toward zer M.

    gamma may grow (classical regime lam = 1 allows unbounded steps, capped
    at 1e6); with varying relaxations the step sizes must stay >= eps.  With
    a metric kernel the inner step solves (gamma^{-1} U + M) p = gamma^{-1} U x
    (dense for affine M, or through warped_solver); the update then moves
    along x - p as the kernel theory prescribes, except under inertial
    perturbation where the Euclidean projection form is used.

    Returns (final point, RunTrace); haugazeau mode converges to the zero
    nearest x0.
    """
    lam_is_one = not callable(cfg.lam) and float(cfg.lam) == 1.0
    eps = cfg.eps

    def gamma_band(g):
        if not (GAMMA_MIN <= g <= GAMMA_CAP):
            return False
        if not lam_is_one and g < eps:
            return False
        return True

    text = (f"gamma_n in [{GAMMA_MIN:g}, {GAMMA_CAP:g}]" if lam_is_one
            else f"gamma_n in [eps, {GAMMA_CAP:g}] when lam_n is not identically 1")
    gamma_sched = Schedule(gamma, "gamma_n", gamma_band, text)

    x_arr, layout = _start_point(x0, getattr(M, "dim", None), "proximal point")
    solver = None
    if kernel is not None or warped_solver is not None:
        solver = warped_solver or _kernel_solver(M, kernel, "proximal point")
    inertial = cfg.perturbation not in (None, "identity")
    if inertial and solver is not None and kernel is None:
        raise ParameterError("inertial perturbation with a warped step needs the "
                             "metric kernel to form a valid cut")
    U = kernel.U.matrix if kernel is not None else None
    use_override = solver is not None and not inertial

    def oracle(n, x_t, x):
        g = gamma_sched(n)
        if solver is not None:
            p = solver(g, x_t)
        else:
            p = M.resolvent(g, x_t)
        gap = x_t - p
        t_star = gap / g if U is None else (U @ gap) / g
        delta = float((x - p) @ t_star)
        report = CutReport(w=p, t_star=t_star, delta=delta)
        if use_override:
            report.aux["d"] = x - p
        return report

    return outer_loop_run(oracle, Vec(layout, x_arr) if layout else x_arr, cfg)


def chambolle_pock_kernel(L, tau, sigma):
    """Primal-dual metric [[Id/tau, -L*], [-L, Id/sigma]]; needs tau sigma ||L||^2 < 1."""
    L = L if isinstance(L, LinOp) else LinOp(L)
    tau = float(tau)
    sigma = float(sigma)
    if tau <= 0 or sigma <= 0:
        raise ParameterError("step sizes must satisfy tau > 0 and sigma > 0")
    nrmL = float(np.linalg.norm(L.matrix, 2))
    if tau * sigma * nrmL ** 2 >= 1.0:
        raise ParameterError(
            f"step sizes must satisfy tau*sigma*||L||^2 < 1; "
            f"got {tau * sigma * nrmL ** 2:.6g}")
    n, m = L.cols, L.rows
    W = np.block([[np.eye(n) / tau, -L.matrix.T], [-L.matrix, np.eye(m) / sigma]])
    beta = max(float(np.linalg.eigvalsh(0.5 * (W + W.T))[0]), 1e-12)
    return MetricKernel(LinOp(W), beta)


def run_chambolle_pock(A, B, L, tau, sigma, cfg: LoopConfig, x0=None, y0=None):
    """Primal-dual iterations for 0 in Ax + L*B(Lx).

    One step: p = J_{tau A}(x - tau L* y*), then
    q* = J_{sigma B^{-1}}(y* + sigma L(2p - x)), relaxed by lam_n.  This is
    exactly the unit-step proximal point method under the primal-dual kernel
    returned by chambolle_pock_kernel; the structured solver below evaluates
    that warped resolvent with two prox calls instead of a linear solve.
    """
    L = L if isinstance(L, LinOp) else LinOp(L)
    kernel = chambolle_pock_kernel(L, tau, sigma)
    layout = SpaceLayout((L.cols, L.rows))
    tau = float(tau)
    sigma = float(sigma)
    Binv = Inverse(B)

    def cp_step(g, u):
        if abs(g - 1.0) > 1e-14:
            raise ParameterError("this primal-dual step is defined for gamma == 1")
        x, ys = layout.split(u)
        p = A.resolvent(tau, x - tau * L.adjoint_apply(ys))
        q = Binv.resolvent(sigma, ys + sigma * L.apply(2.0 * p - x))
        return layout.concat([p, q])

    if x0 is None:
        x0 = np.zeros(L.cols)
    if y0 is None:
        y0 = np.zeros(L.rows)
    u0 = Vec.from_parts(layout, [as_array(x0), as_array(y0)])
    u, trace = run_proximal_point(None, 1.0, cfg, x0=u0, kernel=kernel,
                                  warped_solver=cp_step)
    x, ys = u.parts() if isinstance(u, Vec) else layout.split(u)
    pair = PrimalDualPair(x, ys, trace.final_residual, trace.final_residual)
    return pair, trace


# ---------------------------------------------------------------------------
# averaged maps (Krasnosel'skii-Mann) and presets
# ---------------------------------------------------------------------------

def run_averaged_iteration(T, alpha, lam, cfg: LoopConfig, x0=None, dim=None):
    """Relaxed fixed-point iterations x_{n+1} = x_n + lam_n (T x_n - x_n).

    T must be alpha-averaged with alpha in (0,1); lam_n stays in (0, 1/alpha)
    (fejer) or (0, 1/(2 alpha)] (haugazeau).  Internally the iteration is the
    proximal point method on the monotone operator whose resolvent is
    Id + (T - Id)/(2 alpha), which lands exactly on the engine's projection
    step.
    """
    alpha = float(alpha)
    if not (0.0 < alpha < 1.0):
        raise ParameterError(f"averagedness must satisfy alpha in (0, 1); got {alpha:g}")
    hi = 1.0 / alpha if cfg.mode == "fejer" else 1.0 / (2.0 * alpha)
    text = ("lam_n in (0, 1/alpha)" if cfg.mode == "fejer"
            else "lam_n in (0, 1/(2*alpha)]")
    lam_sched = Schedule(lam, "lam_n", lambda v: 0.0 < v <= hi + 1e-15, text)

    x_arr, layout = _start_point(x0, dim, "averaged iteration")

    def oracle(n, x_t, x):
        w = x_t + (T(x_t) - x_t) / (2.0 * alpha)
        t_star = x_t - w
        return CutReport(w=w, t_star=t_star, delta=float((x - w) @ t_star))

    cfg2 = replace(cfg, lam=lambda n, report: 2.0 * alpha * lam_sched(n))
    return outer_loop_run(oracle, Vec(layout, x_arr) if layout else x_arr, cfg2)


def run_euler(B, gamma, cfg: LoopConfig, x0=None, alpha=None):
    """Explicit steps x_{n+1} = x_n - gamma_n B x_n for cocoercive B.

    Runs as the averaged iteration of T = Id - alpha B (which is 1/2-averaged)
    with relaxation gamma_n / alpha; gamma_n must stay in [eps, (2-eps)*alpha].
    """
    a = _alpha_of(B, alpha, "Euler iteration")
    eps = cfg.eps
    gamma_sched = Schedule(gamma, "gamma_n",
                           lambda v: eps <= v <= (2.0 - eps) * a + 1e-15,
                           "gamma_n in [eps, (2-eps)*alpha]")
    T = lambda x: x - a * B.forward(x)
    return run_averaged_iteration(T, 0.5, lambda n: gamma_sched(n) / a, cfg,
                                  x0=x0, dim=getattr(B, "dim", None))


def run_resolvent_composition(B, L, V: Subspace, gamma, lam, cfg: LoopConfig, x0=None):
    """Relaxation of: find x in V with 0 in B(Lx), for ||L|| <= 1.

    Iterates x_{n+1} = x_n + lam_n proj_V L*(J_{gamma B}(L x_n) - L x_n).
    The underlying map proj_V (Id - L*L + L* J_{gamma B} L) proj_V is firmly
    nonexpansive, so this is an averaged iteration with alpha = 1/2.
    """
    L = L if isinstance(L, LinOp) else LinOp(L)
    g = check_gamma(gamma)
    nrmL = float(np.linalg.norm(L.matrix, 2))
    if not (0.0 < nrmL <= 1.0 + 1e-12):
        raise ParameterError(f"the linear map must satisfy 0 < ||L|| <= 1; got ||L|| = {nrmL:.6g}")
    if x0 is None:
        raise ParameterError("a starting point x0 in V is required")
    x_arr, _ = _unwrap(x0)
    if float(np.linalg.norm(V.proj(x_arr) - x_arr)) > 1e-10 * (1.0 + float(np.linalg.norm(x_arr))):
        raise ParameterError("the starting point must satisfy x0 in V")

    def T(x):
        xv = V.proj(x)
        y = L.apply(xv)
        inner = xv + L.adjoint_apply(B.resolvent(g, y) - y)
        return V.proj(inner)

    return run_averaged_iteration(T, 0.5, lam, cfg, x0=x_arr)


# ---------------------------------------------------------------------------
# partial inverse
# ---------------------------------------------------------------------------

def run_partial_inverse(A, V: Subspace, cfg: LoopConfig, x0=None, x0_star=None):
    """Solve: find x in V and x* in V-perp with x* in Ax.

    Runs the unit-step proximal point method on the partial inverse of A
    with respect to V at z = x + x*; one step reads p = J_A(z) and moves x by
    proj_V of the covector and x* by proj_{V-perp} of the point.  Returns
    (PrimalDualPair(x, x*), trace).
    """
    n = V.dim_ambient
    x_arr = np.zeros(n) if x0 is None else _unwrap(x0)[0]
    s_arr = np.zeros(n) if x0_star is None else _unwrap(x0_star)[0]
    scale = 1.0 + float(np.linalg.norm(x_arr)) + float(np.linalg.norm(s_arr))
    if float(np.linalg.norm(V.proj(x_arr) - x_arr)) > 1e-10 * scale:
        raise ParameterError("the primal start must satisfy x0 in V")
    if float(np.linalg.norm(V.proj_perp(s_arr) - s_arr)) > 1e-10 * scale:
        raise ParameterError("the dual start must satisfy x0_star in V_perp")
    z, trace = run_proximal_point(PartialInverse(A, V), 1.0, cfg, x0=x_arr + s_arr)
    z_arr, _ = _unwrap(z)
    pair = PrimalDualPair(V.proj(z_arr), V.proj_perp(z_arr),
                          trace.final_residual, trace.final_residual)
    return pair, trace


def run_partial_inverse_composite(A, Bs, Ls, cfg: LoopConfig, x0=None):
    """Composite variant for 0 in Ax + sum L_k* B_k(L_k x).

    Lifts to the product space H x G_1 x ... x G_p, takes V as the graph
    subspace {(x, L_1 x, ..., L_p x)}, and runs the partial inverse of
    A x B_1 x ... x B_p with respect to V.
    """
    Ls = [L if isinstance(L, LinOp) else LinOp(L) for L in Ls]
    if len(Bs) != len(Ls):
        raise ParameterError("one linear map per operator block required")
    n = Ls[0].cols
    layout = SpaceLayout((n,) + tuple(L.rows for L in Ls))
    basis = np.hstack([np.eye(n)] + [L.matrix.T for L in Ls])
    V = Subspace(basis)
    big = ProductOperator(layout, [A] + list(Bs))
    x_arr = np.zeros(n) if x0 is None else _unwrap(x0)[0]
    z0 = layout.concat([x_arr] + [L.apply(x_arr) for L in Ls])
    pair, trace = run_partial_inverse(big, V, cfg, x0=z0)
    x = layout.split(pair.x)[0]
    dual_parts = layout.split(pair.y_star)[1:]
    duals = np.concatenate([np.asarray(p) for p in dual_parts]) if dual_parts else None
    return PrimalDualPair(x, duals, pair.primal_residual, pair.dual_residual), trace


# ---------------------------------------------------------------------------
# Douglas-Rachford and Davis-Yin (shared loop)
# ---------------------------------------------------------------------------

def run_davis_yin(A, B, C, gamma, cfg: LoopConfig, y0=None, tau=None, peaceman=False):
    """Three-operator iterations toward zer(A + B + C), C cocoercive or None.

    Governing sequence: x = J_{gamma B} y; r = y + gamma C x; z = J_{gamma A}(2x - r);
    y+ = y + lam (z - x).  With C = None this is Douglas-Rachford on the same
    code path (r is y itself, bit for bit).  The reported half-space encodes
    the averagedness constant 1/(2 - gamma/(2 tau)) of the fixed-point map, so
    the engine's relaxed projection reproduces the classical update and the
    user relaxation lives in (0, 2 - gamma/(2 tau)).

    Returns (PrimalDualPair(x, x*), trace) with x* = (y - x)/gamma the dual
    point.  peaceman=True forces the un-averaged reflection step (lam = 2);
    it has no general convergence guarantee and is exposed for experiments.
    """
    g = check_gamma(gamma)
    if C is not None:
        t = _alpha_of(C, tau, "the three-operator step")
        if not (g < 2.0 * t):
            raise ParameterError(f"step size must satisfy gamma in (0, 2*tau); "
                                 f"got gamma = {g:g}, tau = {t:g}")
        delta_avg = 2.0 - g / (2.0 * t)
    else:
        delta_avg = 2.0
    half = delta_avg / 2.0

    if cfg.perturbation not in (None, "identity"):
        raise ParameterError("inertial perturbation is not wired for this driver; "
                             "run the proximal point method on the reflected composition instead")

    lam_user = cfg.lam

    def lam_wrap(n, report):
        v = float(lam_user(n, report)) if callable(lam_user) else float(lam_user)
        if not (0.0 < v < delta_avg + 1e-15):
            raise ParameterError(
                f"relaxation must satisfy lam_n in (0, 2 - gamma/(2*tau)); "
                f"got lam_n = {v:g}")
        return v / half

    y_arr, layout = _start_point(y0, getattr(B, "dim", None) or getattr(A, "dim", None),
                                 "this driver")

    def oracle(n, y_t, y):
        x = B.resolvent(g, y_t)
        r = y_t if C is None else y_t + g * C.forward(x)
        z = A.resolvent(g, 2.0 * x - r)
        d = x - z
        dd = float(d @ d)
        aux = {"residual": float(np.linalg.norm(d)) / g}
        if peaceman:
            # the full reflection sits outside the engine's relaxation band,
            # so it rides in as an explicit displacement under lam = 1
            aux["d"] = 2.0 * d
        return CutReport(w=y - half * d, t_star=d, delta=half * dd, aux=aux)

    cfg2 = replace(cfg, lam=1.0 if peaceman else lam_wrap)
    y_fin, trace = outer_loop_run(oracle, Vec(layout, y_arr) if layout else y_arr, cfg2)
    y_arr_fin, _ = _unwrap(y_fin)
    x_fin = B.resolvent(g, y_arr_fin)
    pair = PrimalDualPair(x_fin, (y_arr_fin - x_fin) / g,
                          trace.final_residual, trace.final_residual)
    return pair, trace


def run_douglas_rachford(A, B, gamma=1.0, cfg: LoopConfig = None, y0=None, peaceman=False):
    """Two-operator splitting toward zer(A + B); see run_davis_yin (C = None)."""
    if cfg is None:
        cfg = LoopConfig()
    return run_davis_yin(A, B, None, gamma, cfg, y0=y0, peaceman=peaceman)


# ---------------------------------------------------------------------------
# forward-backward-(half-)forward family (shared core)
# ---------------------------------------------------------------------------

def _fbhf_run(A, C, Q, gamma, cfg, x0, alpha, beta, band_text, what):
    """Common loop: w = J_{gamma A}(x - gamma(Cx + Qx)); step gamma * t*.

    t* = (x - w)/gamma + Qw - Qx is a covector of (A + Q) at w with the
    cocoercive part folded at the probe point, so the reported cut is valid;
    the classical update x+ = w - gamma(Qw - Qx) is the step along gamma t*.
    """
    if cfg.perturbation not in (None, "identity"):
        raise ParameterError("inertial perturbation is not wired for forward-corrected steps")
    if C is not None and alpha is None:
        alpha = _alpha_of(C, None, what)
    if Q is not None and beta is None:
        beta = _beta_of(Q, None, what)
    if C is None and Q is None:
        raise ParameterError(f"{what} needs at least one forward part")
    if C is None:
        chi = 1.0 / beta
    elif Q is None:
        chi = 2.0 * alpha
    else:
        chi = 4.0 * alpha / (1.0 + math.sqrt(1.0 + 16.0 * alpha ** 2 * beta ** 2))
    eps = cfg.eps
    gamma_sched = Schedule(gamma, "gamma_n",
                           lambda v: eps <= v <= (1.0 - eps) * chi + 1e-15, band_text)

    x_arr, layout = _start_point(x0, getattr(A, "dim", None) or getattr(Q, "dim", None)
                                 or getattr(C, "dim", None), what)

    def oracle(n, x_t, x):
        g = gamma_sched(n)
        cx = C.forward(x_t) if C is not None else 0.0
        qx = Q.forward(x_t) if Q is not None else 0.0
        w = A.resolvent(g, x_t - g * (cx + qx))
        qw = Q.forward(w) if Q is not None else 0.0
        t_star = (x_t - w) / g + qw - qx
        quad = 0.0
        if C is not None:
            diff = w - x_t
            quad = float(diff @ diff) / (4.0 * alpha)
        delta = float((x - w) @ t_star) - quad
        return CutReport(w=w, t_star=t_star, delta=delta,
                         q=(x_t if C is not None else None),
                         aux={"d": g * t_star, "gamma": g})

    cfg2 = cfg
    if cfg.mode == "haugazeau":
        # the strong variant relaxes with the midpoint step
        cfg2 = replace(cfg, lam=0.5)
    x_fin, trace = outer_loop_run(oracle, Vec(layout, x_arr) if layout else x_arr, cfg2)
    return x_fin, trace


def run_tseng_fbf(A, B, gamma, cfg: LoopConfig, x0=None, beta=None):
    """Forward-backward-forward steps toward zer(A + B), B Lipschitz monotone.

    w = J_{gamma A}(x - gamma Bx); x+ = w - gamma(Bw - Bx).  gamma_n stays in
    [eps, (1-eps)/beta].  In haugazeau mode the midpoint x - (gamma/2) t* is
    combined with the anchor, giving strong convergence to proj_Z x0.
    """
    b = _beta_of(B, beta, "the forward-backward-forward step")
    return _fbhf_run(A, None, B, gamma, cfg, x0, None, b,
                     "gamma_n in [eps, (1-eps)/beta]",
                     "the forward-backward-forward step")


def run_fbhf(A, C, Q, gamma, cfg: LoopConfig, x0=None, alpha=None, beta=None):
    """Forward-backward-half-forward steps toward zer(A + C + Q).

    C is cocoercive (alpha), Q is Lipschitz monotone (beta); either may be
    None, recovering the plain forward-backward and forward-backward-forward
    bands chi = 2*alpha and chi = 1/beta on the same code path.
    """
    return _fbhf_run(A, C, Q, gamma, cfg, x0, alpha, beta,
                     "gamma_n in [eps, (1-eps)*chi] with "
                     "chi = 4*alpha/(1 + sqrt(1 + 16*alpha^2*beta^2))",
                     "the forward-backward-half-forward step")


class _StitchedForward(OperatorSpec):
    """Forward map assembled from per-block closures on a product layout."""

    def __init__(self, layout, func, beta=None, alpha=None):
        self.layout = layout
        self._func = func
        self.dim = layout.total_dim
        if beta is not None:
            self.beta = float(beta)
        if alpha is not None:
            self.alpha = float(alpha)

    def forward(self, u):
        return self._func(as_array(u))


def fbf_monotone_skew_setup(A, B, L):
    """Product-space data for 0 in Ax + L*B(Lx) via the monotone + skew split.

    Returns (layout, M, S, beta) with M = A x B^{-1} (resolvent-able) and S
    the skew coupling; beta = ||L|| estimated by power iteration.
    """
    L = L if isinstance(L, LinOp) else LinOp(L)
    layout = SpaceLayout((L.cols, L.rows))
    M = ProductOperator(layout, [A, Inverse(B)])
    Smat = np.block([[np.zeros((L.cols, L.cols)), L.matrix.T],
                     [-L.matrix, np.zeros((L.rows, L.rows))]])
    S = Skew(Smat)
    beta = max(estimate_operator_norm(L), GAMMA_MIN)
    return layout, M, S, beta


def fbf_lagrangian_setup(A, B, L):
    """Three-block multiplier data for: find x with 0 in Ax + L* B(Lx), via (x, y, y*).

    The skew coupling is (x, y, y*) -> (L*y*, -y*, -Lx + y) with norm
    sqrt(1 + ||L||^2); returns (layout, M, S, beta).
    """
    L = L if isinstance(L, LinOp) else LinOp(L)
    n, m = L.cols, L.rows
    layout = SpaceLayout((n, m, m))
    M = ProductOperator(layout, [A, B, ZeroOperator(m)])
    Smat = np.block([
        [np.zeros((n, n)), np.zeros((n, m)), L.matrix.T],
        [np.zeros((m, n)), np.zeros((m, m)), -np.eye(m)],
        [-L.matrix, np.eye(m), np.zeros((m, m))],
    ])
    S = Skew(Smat)
    beta = math.sqrt(1.0 + estimate_operator_norm(L) ** 2)
    return layout, M, S, beta


def fbf_parallel_sum_setup(A, Bs, D_invs, Ls, Q=None, mu=0.0, nus=None):
    """Product-space data for 0 in Ax + sum L_k*((B_k par D_k)(L_k x)) + Qx.

    M = A x B_1^{-1} x ... x B_p^{-1}; the Lipschitz part maps (x, y*) to
    (Qx + sum L_k* y_k*, D_k^{-1} y_k* - L_k x) with constant
    beta = max{mu, nu_1, ..., nu_p} + sqrt(sum ||L_k||^2).  D_invs entries are
    forward-evaluable specs (None for a zero block); nus are their Lipschitz
    constants.
    """
    Ls = [L if isinstance(L, LinOp) else LinOp(L) for L in Ls]
    p = len(Ls)
    if len(Bs) != p or (D_invs is not None and len(D_invs) != p):
        raise ParameterError("one B_k, D_k, L_k triple per dual block required")
    D_invs = D_invs or [None] * p
    nus = list(nus) if nus is not None else [
        (0.0 if D is None else _beta_of(D, None, "the parallel-sum block")) for D in D_invs]
    n = Ls[0].cols
    layout = SpaceLayout((n,) + tuple(L.rows for L in Ls))
    M = ProductOperator(layout, [A] + [Inverse(B) for B in Bs])

    def func(u):
        parts = layout.split(u)
        x, ys = parts[0], parts[1:]
        qx = Q.forward(x) if Q is not None else np.zeros_like(x)
        first = qx + sum(L.adjoint_apply(y) for L, y in zip(Ls, ys))
        rest = []
        for D, L, y in zip(D_invs, Ls, ys):
            dy = D.forward(y) if D is not None else np.zeros_like(y)
            rest.append(dy - L.apply(x))
        return layout.concat([first] + rest)

    beta = max([float(mu)] + [float(v) for v in nus]) + math.sqrt(
        sum(estimate_operator_norm(L) ** 2 for L in Ls))
    return layout, M, _StitchedForward(layout, func, beta=beta), beta


def fbhf_saddle_setup(A, B, L, C=None, alpha=None):
    """Three-block saddle data (x, y, v*) for 0 in Ax + Cx + L*B(Lx).

    The backward part is A x B x {0}; the skew part maps (x, y, v*) to
    (L*v*, -v*, -Lx + y) with norm sqrt(1 + ||L||^2); C (if any) acts on the
    first block only and keeps its cocoercivity constant.
    """
    L = L if isinstance(L, LinOp) else LinOp(L)
    n, m = L.cols, L.rows
    layout = SpaceLayout((n, m, m))
    A_big = ProductOperator(layout, [A, B, ZeroOperator(m)])
    Smat = np.block([
        [np.zeros((n, n)), np.zeros((n, m)), L.matrix.T],
        [np.zeros((m, n)), np.zeros((m, m)), -np.eye(m)],
        [-L.matrix, np.eye(m), np.zeros((m, m))],
    ])
    Q_big = Skew(Smat)
    beta = math.sqrt(1.0 + estimate_operator_norm(L) ** 2)
    C_big = None
    if C is not None:
        a = _alpha_of(C, alpha, "the saddle forward part")

        def cfunc(u):
            parts = layout.split(u)
            return layout.concat([C.forward(parts[0]),
                                  np.zeros(m), np.zeros(m)])

        C_big = _StitchedForward(layout, cfunc, alpha=a)
    return layout, A_big, C_big, Q_big, beta


# ---------------------------------------------------------------------------
# forward-backward (plain, renormed/kernel) and presets
# ---------------------------------------------------------------------------

def run_forward_backward(A, B, gamma, mu, cfg: LoopConfig, x0=None, alpha=None,
                         kernel=None, warped_solver=None):
    """Relaxed forward-backward steps x+ = x + mu_n (J_{gamma_n A}(x - gamma_n Bx) - x).

    B is alpha-cocoercive; gamma_n stays in [eps, (2-eps)*alpha] and mu_n in
    [eps, (1-eps)*(4*alpha-gamma_n)/(2*alpha)] (fejer) or
    [eps, (4*alpha-gamma_n)/(4*alpha)] (haugazeau).  The cut uses the forward
    probe at the evaluation point, so the projection step reproduces the
    classical update exactly.

    With a metric kernel (or warped_solver) the inner step solves
    (gamma^{-1} U + A) w = gamma^{-1} U x - Bx and the relaxation band becomes
    mu_n in [eps, 1].
    """
    a = _alpha_of(B, alpha, "the forward-backward step")
    eps = cfg.eps
    renormed = kernel is not None or warped_solver is not None
    if renormed and kernel is None:
        raise ParameterError("the renormed step needs the metric kernel alongside "
                             "warped_solver (its ellipticity bounds the step band)")
    if renormed:
        hi = (2.0 - eps) * a * kernel.beta
        gamma_sched = Schedule(gamma, "gamma_n",
                               lambda v: eps <= v <= hi + 1e-15,
                               "gamma_n in [eps, (2-eps)*alpha*beta] (kernel metric)")
    else:
        gamma_sched = Schedule(gamma, "gamma_n",
                               lambda v: eps <= v <= (2.0 - eps) * a + 1e-15,
                               "gamma_n in [eps, (2-eps)*alpha]")
    if renormed:
        mu_sched = Schedule(mu, "mu_n", lambda v: eps <= v <= 1.0 + 1e-15,
                            "mu_n in [eps, 1] (renormed step)")
    elif cfg.mode == "fejer":
        mu_sched = Schedule(mu, "mu_n", lambda v: v >= eps,
                            "mu_n in [eps, (1-eps)*(4*alpha-gamma_n)/(2*alpha)]")
    else:
        mu_sched = Schedule(mu, "mu_n", lambda v: v >= eps,
                            "mu_n in [eps, (4*alpha-gamma_n)/(4*alpha)]")

    def check_mu(n, g):
        v = mu_sched(n)
        if renormed:
            return v
        if cfg.mode == "fejer":
            hi = (1.0 - eps) * (4.0 * a - g) / (2.0 * a)
            text = "mu_n in [eps, (1-eps)*(4*alpha-gamma_n)/(2*alpha)]"
        else:
            hi = (4.0 * a - g) / (4.0 * a)
            text = "mu_n in [eps, (4*alpha-gamma_n)/(4*alpha)]"
        if v > hi + 1e-15:
            raise ParameterError(f"mu_n must satisfy {text}; got mu_{n} = {v:g}")
        return v

    if cfg.perturbation not in (None, "identity") and renormed:
        raise ParameterError("inertial perturbation is not wired for the renormed step")

    x_arr, layout = _start_point(x0, getattr(A, "dim", None) or getattr(B, "dim", None),
                                 "the forward-backward step")
    solver = None
    if renormed:
        solver = warped_solver or _fb_kernel_solver(A, kernel)
    U = kernel.U.matrix if kernel is not None else None

    def oracle(n, x_t, x):
        g = gamma_sched(n)
        bx = B.forward(x_t)
        if solver is not None:
            w = solver(g, x_t, bx)
        else:
            w = A.resolvent(g, x_t - g * bx)
        if U is None:
            t_star = (x_t - w) / g
        else:
            t_star = (U @ (x_t - w)) / g - bx + B.forward(w)
        diff = w - x_t
        delta = float((x - w) @ t_star) - float(diff @ diff) / (4.0 * a)
        report = CutReport(w=w, t_star=t_star, delta=delta, q=x_t, aux={"gamma": g})
        if renormed:
            report.aux["d"] = x - w
        return report

    if renormed:
        lam_wrap = lambda n, report: check_mu(n, report.aux["gamma"])
    else:
        def lam_wrap(n, report):
            g = report.aux["gamma"]
            return check_mu(n, g) * (4.0 * a) / (4.0 * a - g)

    cfg2 = replace(cfg, lam=lam_wrap)
    return outer_loop_run(oracle, Vec(layout, x_arr) if layout else x_arr, cfg2)


def _fb_kernel_solver(A, kernel):
    aff = as_affine(A)
    if aff is None:
        raise ParameterError("the renormed step with a metric kernel needs affine "
                             "operator data (or an explicit warped_solver)")
    S, b = aff
    U = kernel.U.matrix
    cache = {}

    def solve(g, x, bx):
        fac = cache.get(g)
        if fac is None:
            fac = scipy.linalg.lu_factor(U + g * S)
            cache[g] = fac
        return scipy.linalg.lu_solve(fac, U @ x - g * (b + bx))

    return solve


def run_projected_landweber(C_atom, L, y, gamma, mu, cfg: LoopConfig, x0=None):
    """Least squares over a constraint set: min ||Lx - y||^2 over x in C.

    Forward-backward with A the normal cone to C and B = L*(Lx - y), whose
    cocoercivity constant is 1/||L||^2 (computed from the spectrum).
    """
    L = L if isinstance(L, LinOp) else LinOp(L)
    y = as_array(y)
    G = L.matrix.T @ L.matrix
    B = AffineMonotone(G, -L.adjoint_apply(y))
    top = float(np.linalg.eigvalsh(G)[-1])
    if top <= 0:
        raise ParameterError("the data map must be nonzero")
    return run_forward_backward(Prox(C_atom), B, gamma, mu, cfg, x0=x0, alpha=1.0 / top)


def run_partial_yosida(A, Bs, rhos, gamma, mu, cfg: LoopConfig, x0=None):
    """Forward-backward on 0 in Ax + sum of Yosida regularizations of the B_k.

    Each smoothed term (Id - J_{rho_k B_k})/rho_k is rho_k-cocoercive; the sum
    keeps constant 1/sum(1/rho_k).
    """
    rhos = [check_gamma(r) for r in rhos]
    if len(Bs) != len(rhos):
        raise ParameterError("one smoothing parameter per operator required")
    yos = [YosidaOperator(B, r) for B, r in zip(Bs, rhos)]
    dim = getattr(A, "dim", None)
    for op in yos:
        dim = dim or op.dim

    def func(x):
        return sum(op.forward(x) for op in yos)

    a = 1.0 / sum(1.0 / r for r in rhos)
    B_sum = _StitchedForward(SpaceLayout((int(dim),)), func, alpha=a) if dim else None
    if B_sum is None:
        raise ParameterError("operator dimensions are unknown; supply dimensioned specs")
    return run_forward_backward(A, B_sum, gamma, mu, cfg, x0=x0, alpha=a)


def run_backward_backward(A, B, rho, cfg: LoopConfig, x0=None):
    """Alternating resolvents x+ = J_{rho A}(J_{rho B} x).

    This is the unrelaxed forward-backward step with the Yosida regularization
    of B as the forward part and gamma = rho.
    """
    r = check_gamma(rho)
    return run_forward_backward(A, YosidaOperator(B, r), r, 1.0, cfg, x0=x0, alpha=r)


def run_dual_forward_backward(A, rho, z, Bs, D_invs, Ls, gamma, mu, cfg: LoopConfig,
                              y0=None, nus=None):
    """Strongly monotone composite problems via forward-backward on the duals.

    Solves: find x with z in Ax + sum L_k* ((B_k par D_k)(L_k x)) + rho x.
    The dual stack y* follows w_k = y*_k + gamma(L_k x(y*) - D_k^{-1} y*_k),
    y*_k+ = y*_k + mu (J_{gamma B_k^{-1}} w_k - y*_k) where
    x(y*) = J_{A/rho}((z - sum L_k* y*_k)/rho); the primal recovers strongly
    from the final duals.  The dual forward map is cocoercive with constant
    1/(max_k nu_k... sum ||L_k||^2 / rho + max_k nu_k) computed below.
    """
    Ls = [L if isinstance(L, LinOp) else LinOp(L) for L in Ls]
    p = len(Ls)
    if len(Bs) != p or (D_invs is not None and len(D_invs) != p):
        raise ParameterError("one B_k, D_k, L_k triple per dual block required")
    D_invs = D_invs or [None] * p
    rho = check_gamma(rho)
    z = as_array(z)
    nus = list(nus) if nus is not None else [
        (0.0 if D is None else _beta_of(D, None, "the dual forward map")) for D in D_invs]
    layout = SpaceLayout(tuple(L.rows for L in Ls))
    A_scaled = Scaled(1.0 / rho, A)

    def primal_of(ys_flat):
        ys = layout.split(ys_flat)
        q = z - sum(L.adjoint_apply(y) for L, y in zip(Ls, ys))
        return A_scaled.resolvent(1.0, q / rho)

    def func(ys_flat):
        ys = layout.split(ys_flat)
        x = primal_of(ys_flat)
        out = []
        for D, L, y in zip(D_invs, Ls, ys):
            dy = D.forward(y) if D is not None else np.zeros_like(y)
            out.append(dy - L.apply(x))
        return layout.concat(out)

    a = 1.0 / (max([0.0] + [float(v) for v in nus]) +
               sum(float(np.linalg.norm(L.matrix, 2)) ** 2 for L in Ls) / rho)
    B_dual = _StitchedForward(layout, func, alpha=a)
    A_dual = ProductOperator(layout, [Inverse(B) for B in Bs])
    y_fin, trace = run_forward_backward(A_dual, B_dual, gamma, mu, cfg,
                                        x0=(y0 if y0 is not None else np.zeros(layout.total_dim)),
                                        alpha=a)
    ys_arr, _ = _unwrap(y_fin)
    pair = PrimalDualPair(primal_of(ys_arr), ys_arr,
                          trace.final_residual, trace.final_residual)
    return pair, trace


def run_dykstra(atoms, z, cfg: LoopConfig):
    """Best approximation: project z onto the intersection of the given sets.

    Barycentric variant: dual forward-backward with A = 0, rho = 1, all
    L_k = Id, gamma = 1/p, mu = 1, zero dual start; the primal iterate is
    z - sum y*_k.
    """
    p = len(atoms)
    if p < 1:
        raise ParameterError("at least one set is required")
    z = as_array(z)
    n = z.shape[0]
    eye = LinOp.identity(n)
    return run_dual_forward_backward(
        ZeroOperator(n), 1.0, z, [Prox(a, dim=n) for a in atoms], None,
        [eye] * p, 1.0 / p, 1.0, cfg, y0=np.zeros(n * p), nus=[0.0] * p)


def condat_vu_kernel(Ls, tau, sigmas):
    """Primal-dual metric for the forward-backward kernel step.

    Returns (MetricKernel, beta) with
    beta = (1 - sqrt(tau * sum sigma_k ||L_k||^2)) / max{tau, sigma_1, ...}.
    """
    Ls = [L if isinstance(L, LinOp) else LinOp(L) for L in Ls]
    tau = float(tau)
    sigmas = [float(s) for s in sigmas]
    if tau <= 0 or any(s <= 0 for s in sigmas):
        raise ParameterError("step sizes must satisfy tau > 0 and sigma_k > 0")
    load = tau * sum(s * float(np.linalg.norm(L.matrix, 2)) ** 2
                     for s, L in zip(sigmas, Ls))
    if load >= 1.0:
        raise ParameterError(
            f"step sizes must satisfy tau * sum(sigma_k*||L_k||^2) < 1; got {load:.6g}")
    beta = (1.0 - math.sqrt(load)) / max([tau] + sigmas)
    n = Ls[0].cols
    rows = [np.hstack([np.eye(n) / tau] + [-L.matrix.T for L in Ls])]
    for i, (s, Li) in enumerate(zip(sigmas, Ls)):
        blocks = [-Li.matrix]
        for j, Lj in enumerate(Ls):
            blocks.append(np.eye(Lj.rows) / s if i == j else
                          np.zeros((Li.rows, Lj.rows)))
        rows.append(np.hstack(blocks))
    W = np.vstack(rows)
    return MetricKernel(LinOp(W), beta), beta


def run_condat_vu(A, C, Bs, Ls, tau, sigmas, cfg: LoopConfig, x0=None, y0s=None,
                  lam=1.0, nu=None):
    """Primal-dual steps for 0 in Ax + sum L_k* B_k(L_k x) + Cx, C cocoercive.

    One step: p = J_{tau A}(x - tau(Cx + sum L_k* y_k*)), then
    q_k* = J_{sigma_k B_k^{-1}}(y_k* + sigma_k L_k(2p - x)), relaxed by lam in
    [eps, 1].  This is the forward-backward iteration under the primal-dual
    kernel of condat_vu_kernel; validity requires alpha * beta > 1/2 where
    alpha is C's cocoercivity constant and beta the kernel constant.
    """
    Ls = [L if isinstance(L, LinOp) else LinOp(L) for L in Ls]
    a = _alpha_of(C, nu, "the primal-dual step")
    kernel, beta = condat_vu_kernel(Ls, tau, sigmas)
    if not (a * beta > 0.5):
        raise ParameterError(
            "step sizes must satisfy alpha*beta > 1/2 with "
            "beta = (1 - sqrt(tau*sum(sigma_k*||L_k||^2)))/max{tau, sigma_1, ...}; "
            f"got alpha*beta = {a * beta:.6g}")
    tau = float(tau)
    sigmas = [float(s) for s in sigmas]
    n = Ls[0].cols
    layout = SpaceLayout((n,) + tuple(L.rows for L in Ls))
    invs = [Inverse(B) for B in Bs]

    def cfunc(u):
        parts = layout.split(u)
        out = [C.forward(parts[0])] + [np.zeros_like(y) for y in parts[1:]]
        return layout.concat(out)

    C_big = _StitchedForward(layout, cfunc, alpha=a)

    def cv_step(g, u, bu):
        # bu is C_big(u); the triangular structure solves the kernel step exactly
        if abs(g - 1.0) > 1e-14:
            raise ParameterError("this primal-dual step is defined for gamma == 1")
        parts = layout.split(u)
        x, ys = parts[0], parts[1:]
        cx = layout.split(bu)[0]
        p = A.resolvent(tau, x - tau * (cx + sum(L.adjoint_apply(y)
                                                 for L, y in zip(Ls, ys))))
        qs = [inv.resolvent(s, y + s * L.apply(2.0 * p - x))
              for inv, s, L, y in zip(invs, sigmas, Ls, ys)]
        return layout.concat([p] + qs)

    parts0 = [as_array(x0) if x0 is not None else np.zeros(n)]
    if y0s is None:
        parts0 += [np.zeros(L.rows) for L in Ls]
    else:
        parts0 += [as_array(y) for y in y0s]
    u0 = Vec.from_parts(layout, parts0)
    u_fin, trace = run_forward_backward(None, C_big, 1.0, lam, cfg, x0=u0,
                                        alpha=a, kernel=kernel, warped_solver=cv_step)
    parts = u_fin.parts() if isinstance(u_fin, Vec) else layout.split(u_fin)
    duals = np.concatenate([np.asarray(p) for p in parts[1:]]) if len(parts) > 1 else None
    pair = PrimalDualPair(parts[0], duals, trace.final_residual, trace.final_residual)
    return pair, trace


# ---------------------------------------------------------------------------
# the operator behind Douglas-Rachford seen as a proximal iteration
# ---------------------------------------------------------------------------

class AveragedReflectionsOperator(OperatorSpec):
    """The monotone operator whose unit resolvent is the two-reflection average.

    J_M y = y + J_{gamma A}(2 J_{gamma B} y - y) - J_{gamma B} y, so the unit
    proximal point iteration on this operator is exactly Douglas-Rachford
    with parameter gamma; its zeros are the fixed points of that map.
    """

    def __init__(self, A, B, gamma):
        self.A = A
        self.B = B
        self.gamma = check_gamma(gamma)
        self.dim = getattr(B, "dim", None) or getattr(A, "dim", None)

    def resolvent(self, g, y):
        if abs(float(g) - 1.0) > 1e-14:
            raise ParameterError("this composition resolvent is defined for gamma == 1")
        y = as_array(y)
        x = self.B.resolvent(self.gamma, y)
        z = self.A.resolvent(self.gamma, 2.0 * x - y)
        return y + z - x
