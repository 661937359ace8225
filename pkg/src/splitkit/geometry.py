"""Outer-loop engines: relaxed and anchored projections onto separating half-spaces.

Every solver in this package reduces to the same picture.  A cut oracle looks
at the current point and returns a half-space that contains the whole target
set but (usually) not the point.  The engine then moves by a relaxed
projection onto that half-space, either directly (Fejér mode) or through the
three-branch anchored combination that keeps the iterate closest to the start
point (strong mode).

The cut oracle is a callable ``(n, x_tilde, x) -> CutReport`` where ``x_tilde``
is the (possibly inertially perturbed) evaluation point and ``x`` the current
iterate.  Oracles may override the displacement or the reported residual
through ``CutReport.aux``; otherwise the engine projects using ``delta`` and
``t_star``.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from .errors import EmptyIntersectionError, ParameterError
from .space import Vec, as_array

TRACE_HEADER = "iter,residual,disp_norm,theta,fejer_gap,elapsed_ms"

__all__ = [
    "TRACE_HEADER",
    "HalfSpace",
    "CutReport",
    "LoopConfig",
    "TraceRow",
    "RunTrace",
    "project_onto_halfspace",
    "haugazeau_combine",
    "graph_cut_halfspace",
    "outer_loop_run",
]


def _unwrap(x):
    if isinstance(x, Vec):
        return x.data, x.layout
    return as_array(x), None


def _rewrap(arr, layout):
    return Vec(layout, arr) if layout is not None else arr


class HalfSpace:
    """The set {z : <z, u_star> <= eta}."""

    __slots__ = ("u_star", "eta")

    def __init__(self, u_star, eta):
        self.u_star = as_array(u_star)
        self.eta = float(eta)
        if not np.any(self.u_star) and self.eta < 0.0:
            raise EmptyIntersectionError("half-space with zero normal and negative offset is empty")

    def contains(self, x, tol=1e-12):
        return float(as_array(x) @ self.u_star) <= self.eta + tol

    def __repr__(self):
        return f"HalfSpace(u_star={self.u_star!r}, eta={self.eta!r})"


def project_onto_halfspace(x, H: HalfSpace):
    """Project x onto {z : <z, u*> <= eta}; returns x itself when feasible."""
    arr, layout = _unwrap(x)
    if not np.any(H.u_star):
        if H.eta < 0.0:
            raise EmptyIntersectionError("cannot project onto an empty half-space")
        return _rewrap(arr.copy(), layout)
    slack = float(arr @ H.u_star) - H.eta
    if slack <= 0.0:
        return _rewrap(arr.copy(), layout)
    return _rewrap(arr - (slack / float(H.u_star @ H.u_star)) * H.u_star, layout)


def haugazeau_combine(x, y, z):
    """Project x onto H(x,y) ∩ H(y,z) using the three-branch combination.

    H(a,b) is the half-space {u : <u-b, a-b> <= 0}; the intersection always
    contains the target set when y, z come from valid outer steps.  Raises
    EmptyIntersectionError in the degenerate branch that certifies an empty
    intersection.
    """
    x_arr, layout = _unwrap(x)
    y_arr, _ = _unwrap(y)
    z_arr, _ = _unwrap(z)
    xy = x_arr - y_arr
    yz = y_arr - z_arr
    chi = float(xy @ yz)
    mu = float(xy @ xy)
    nu = float(yz @ yz)
    rho = mu * nu - chi * chi
    if rho < 0.0:  # Cauchy-Schwarz guarantees rho >= 0 up to rounding
        rho = 0.0
    if rho == 0.0:
        if chi < 0.0:
            raise EmptyIntersectionError("the two half-spaces in the anchored step do not intersect")
        return _rewrap(z_arr.copy(), layout)
    if chi * nu >= rho:
        return _rewrap(x_arr + (1.0 + chi / nu) * (z_arr - y_arr), layout)
    return _rewrap(y_arr + (nu / rho) * (chi * xy + mu * (z_arr - y_arr)), layout)


@dataclass
class CutReport:
    """What a cut oracle hands back to the engine.

    w and t_star define the separating half-space
    {z : <z - w, t_star> <= quad_term}; delta is the gap of the current
    iterate against it.  q is the point where the cocoercive part was
    evaluated (None when there is none).  aux may carry:

    * "d": explicit displacement overriding the engine's projection step
    * "lam": not read by the engine, but available to relaxation schedules
    * "residual": algorithm-specific stopping residual
    plus anything a driver wants to surface to schedules or tests.
    """

    w: np.ndarray
    t_star: np.ndarray
    delta: float
    q: np.ndarray = None
    aux: dict = field(default_factory=dict)


def graph_cut_halfspace(x, w, q=None, alpha=None):
    """Build the separating cut from a graph point and a forward probe.

    Parameters
    ----------
    x : current iterate (Vec or array)
    w : GraphPoint whose covector already includes the forward term at q
    q : point where the cocoercive part was evaluated, or None when absent
    alpha : cocoercivity constant of the forward part; None means there is
        no cocoercive part and the quadratic slack term is exactly zero.

    Returns
    -------
    CutReport with delta = <x - w.point, t*> - ||w.point - q||^2 / (4 alpha).
    """
    x_arr, _ = _unwrap(x)
    w_pt, _ = _unwrap(w.point)
    t_star, _ = _unwrap(w.covector)
    quad = 0.0
    q_arr = None
    if q is not None:
        q_arr, _ = _unwrap(q)
    if alpha is not None:
        a = float(alpha)
        if a <= 0.0:
            raise ParameterError("cocoercivity constant must satisfy alpha > 0")
        if q_arr is None:
            raise ParameterError("a forward probe point q is required when alpha is given")
        diff = w_pt - q_arr
        quad = float(diff @ diff) / (4.0 * a)
    delta = float((x_arr - w_pt) @ t_star) - quad
    return CutReport(w=w_pt, t_star=t_star, delta=delta, q=q_arr)


@dataclass
class LoopConfig:
    """Settings for one outer-loop run.

    lam may be a float or a callable (n, report) -> float; the result must
    stay in [eps, 2-eps] in fejer mode and [eps, 1] in haugazeau mode.
    perturbation is None for the identity rule or ("inertial", alpha) where
    alpha is a float or callable n -> float; the extrapolation magnitude is
    clamped to min(alpha_n, 1/(n+1)) so it always vanishes.
    reference, when given, is a known solution used to record the Fejér gap
    column of the trace.
    """

    mode: str = "fejer"
    lam: object = 1.0
    max_iter: int = 500
    tol: float = 1e-8
    eps: float = 1e-3
    perturbation: object = None
    seed: object = None
    stall_patience: int = 3
    reference: object = None
    collect_points: bool = False

    def __post_init__(self):
        if self.mode not in ("fejer", "haugazeau"):
            raise ParameterError(f"mode must be 'fejer' or 'haugazeau', got {self.mode!r}")
        if int(self.max_iter) < 1:
            raise ParameterError("max_iter must be at least 1")
        if not (0.0 < self.eps < 0.5):
            raise ParameterError("eps must lie in (0, 0.5)")
        if float(self.tol) < 0.0:
            raise ParameterError("tol must be nonnegative")
        if int(self.stall_patience) < 1:
            raise ParameterError("stall_patience must be at least 1")
        if self.perturbation is not None and self.perturbation != "identity":
            ok = (isinstance(self.perturbation, tuple) and len(self.perturbation) == 2
                  and self.perturbation[0] == "inertial")
            if not ok:
                raise ParameterError(
                    f"perturbation must be None, 'identity', or ('inertial', alpha); "
                    f"got {self.perturbation!r}")

    def lam_at(self, n, report):
        lam = self.lam(n, report) if callable(self.lam) else self.lam
        lam = float(lam)
        hi = 1.0 if self.mode == "haugazeau" else 2.0 - self.eps
        band = "[eps, 1]" if self.mode == "haugazeau" else "[eps, 2-eps]"
        if not (self.eps <= lam <= hi + 1e-15):
            raise ParameterError(
                f"relaxation must satisfy lam_n in {band}; got lam_{n} = {lam:g}")
        return lam

    def inertia_at(self, n):
        if self.perturbation is None or self.perturbation == "identity":
            return 0.0
        alpha = self.perturbation[1]
        a = float(alpha(n)) if callable(alpha) else float(alpha)
        if a < 0.0:
            raise ParameterError("inertial coefficient must be nonnegative")
        return a


@dataclass
class TraceRow:
    iter: int
    residual: float
    disp_norm: float
    theta: float
    fejer_gap: float
    elapsed_ms: float
    tilde_gap: float = 0.0  # kept in memory only, not serialized


class RunTrace:
    """Per-iteration records plus terminal status for one engine run."""

    def __init__(self):
        self.rows = []
        self.status = None
        self.n_iter = 0
        self.final_residual = math.nan
        self.x_final = None
        self.points = []
        self.wall_time_s = 0.0

    def finish(self, status, n_iter, residual, x_final, wall_time_s):
        if self.status is not None:
            raise RuntimeError("trace status already set")
        self.status = status
        self.n_iter = n_iter
        self.final_residual = residual
        self.x_final = x_final
        self.wall_time_s = wall_time_s

    def to_csv(self):
        """Serialize with the fixed header; floats carry 17 significant digits.

        The elapsed_ms column is written as 0 so traces from identical
        configurations are byte-identical; per-row wall times stay available
        in memory on the rows themselves.
        """
        lines = [TRACE_HEADER]
        for r in self.rows:
            lines.append(
                f"{r.iter},{r.residual:.17g},{r.disp_norm:.17g},"
                f"{r.theta:.17g},{r.fejer_gap:.17g},0")
        return "\n".join(lines) + "\n"

    @staticmethod
    def parse_csv(text):
        """Parse a serialized trace back into a list of TraceRow."""
        lines = [ln for ln in text.strip().splitlines() if ln]
        if not lines or lines[0] != TRACE_HEADER:
            raise ParameterError(f"trace must start with header {TRACE_HEADER!r}")
        rows = []
        for ln in lines[1:]:
            parts = ln.split(",")
            if len(parts) != 6:
                raise ParameterError(f"malformed trace row: {ln!r}")
            rows.append(TraceRow(int(parts[0]), float(parts[1]), float(parts[2]),
                                 float(parts[3]), float(parts[4]), float(parts[5])))
        return rows


def _default_residual(report, x):
    return float(np.linalg.norm(report.t_star) + np.linalg.norm(report.w - x))


def outer_loop_run(cut_oracle, x0, cfg: LoopConfig):
    """Run one engine loop from x0 and return (final point, trace).

    fejer mode: x_{n+1} = x_n - lam_n d_n.  haugazeau mode: the relaxed point
    r_n = x_n - lam_n d_n is combined with the anchor x_0 through
    haugazeau_combine, which forces strong convergence to the solution
    nearest x_0.  d_n comes from aux["d"] when the oracle supplies it,
    otherwise from the projection formula (delta / ||t*||^2) t* when
    delta > 0 and zero otherwise.
    """
    x_arr, layout = _unwrap(x0)
    x = np.array(x_arr, dtype=float)
    x_prev = x.copy()
    anchor = x.copy()
    ref = None
    if cfg.reference is not None:
        ref, _ = _unwrap(cfg.reference)

    trace = RunTrace()
    if cfg.collect_points:
        trace.points.append(x.copy())

    status = None
    residual = math.nan
    zero_run = 0
    n_done = 0
    t0 = time.perf_counter()

    for n in range(int(cfg.max_iter)):
        # perturbed evaluation point; magnitude clamp keeps x_tilde - x -> 0
        a_n = cfg.inertia_at(n)
        if a_n > 0.0 and n > 0:
            term = a_n * (x - x_prev)
            cap = min(a_n, 1.0 / (n + 1.0))
            mag = float(np.linalg.norm(term))
            if mag > cap > 0.0:
                term *= cap / mag
            x_tilde = x + term
        else:
            x_tilde = x
        tilde_gap = float(np.linalg.norm(x_tilde - x))

        report = cut_oracle(n, x_tilde, x)
        residual = report.aux.get("residual")
        if residual is None:
            residual = _default_residual(report, x)
        residual = float(residual)

        if residual <= cfg.tol:
            status = "converged"
            n_done = n
            break

        if "d" in report.aux:
            d = as_array(report.aux["d"])
            scale = None
        elif report.delta > 0.0:
            tnorm2 = float(report.t_star @ report.t_star)
            if tnorm2 <= 0.0:
                raise ParameterError("cut oracle returned delta > 0 with t_star = 0")
            scale = report.delta / tnorm2
            d = scale * report.t_star
        else:
            scale = 0.0
            d = np.zeros_like(x)

        lam = cfg.lam_at(n, report)
        step = lam * d
        if cfg.mode == "fejer":
            x_next = x - step
        else:
            try:
                x_next = haugazeau_combine(anchor, x, x - step)
            except EmptyIntersectionError:
                status = "failed"
                n_done = n
                break

        theta = lam if scale is None else lam * scale
        gap = math.nan
        if ref is not None:
            gap = float(np.linalg.norm(x_next - ref) - np.linalg.norm(x - ref))
        elapsed_ms = (time.perf_counter() - t0) * 1000.0
        trace.rows.append(TraceRow(n, residual, float(np.linalg.norm(x_next - x)),
                                   theta, gap, elapsed_ms, tilde_gap))

        stalled_step = not np.any(d)
        zero_run = zero_run + 1 if stalled_step else 0

        x_prev = x
        x = x_next
        n_done = n + 1
        if cfg.collect_points:
            trace.points.append(x.copy())

        if zero_run >= cfg.stall_patience:
            status = "stalled"
            break

    if status is None:
        status = "max_iter"
    trace.finish(status, n_done, residual, x.copy(), time.perf_counter() - t0)
    return _rewrap(x, layout), trace
