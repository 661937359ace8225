"""Projective splitting: Kuhn-Tucker and saddle variants, block-iterative.

These runners work in a stacked primal-dual space.  Each iteration evaluates
some subset of the operators (possibly on stale data read from a ring buffer
of past iterates), assembles graph points, and hands the engine a separating
half-space for the solution set; the update is the relaxed projection onto
it.  Asynchrony is simulated deterministically through activation sets and
delay maps; no threads are involved, so traces are reproducible.

Schedule files are line-oriented text, one iteration per line::

    n | I: i1,i2 | K: k1 | pi: i1=5,i2=4 | omega: k1=6

with 1-based operator ids and absolute (0-based) iteration stamps for the
delay maps.  ``pi``/``omega`` entries may be omitted for inactive operators.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field, replace

import numpy as np

from .algorithms import PrimalDualPair, Schedule
from .errors import ParameterError, ScheduleError
from .geometry import CutReport, LoopConfig, outer_loop_run
from .operators import resolvent_eval
from .space import LinOp, SpaceLayout, as_array

__all__ = [
    "ScheduleEntry",
    "BlockSchedule",
    "GraphCache",
    "make_block_schedule",
    "schedule_to_text",
    "parse_schedule",
    "validate_block_schedule",
    "run_kt_projective",
    "run_block_kt_projective",
    "SaddleProblem",
    "run_saddle_projective",
]


# ---------------------------------------------------------------------------
# schedules
# ---------------------------------------------------------------------------

@dataclass
class ScheduleEntry:
    """Activation sets and delay maps for one iteration (0-based indices)."""

    active_i: tuple
    active_k: tuple
    pi: dict
    omega: dict


class BlockSchedule:
    """Per-iteration activation/delay data for block-iterative runs.

    ``entry(n)`` returns the ScheduleEntry for iteration n.  The first
    iteration must activate every operator, every window of ``R`` consecutive
    iterations must activate every operator at least once, and all delay
    stamps must stay within ``[n - T, n]``.  Delay and first-iteration rules
    are enforced on every access; ``validate_block_schedule`` adds the
    coverage check over a whole horizon.
    """

    def __init__(self, m, p, R, T, entry_fn=None, entries=None, kind="custom"):
        self.m = int(m)
        self.p = int(p)
        self.R = int(R)
        self.T = int(T)
        self.kind = kind
        if self.R < 1:
            raise ScheduleError(f"coverage window must satisfy R >= 1; got R = {self.R}")
        if self.T < 0:
            raise ScheduleError(f"delay bound must satisfy T >= 0; got T = {self.T}")
        self._fn = entry_fn
        self.entries = entries
        if entry_fn is None and entries is None:
            raise ScheduleError("a schedule needs entries or a generator")

    def entry(self, n) -> ScheduleEntry:
        if self.entries is not None:
            if n >= len(self.entries):
                raise ScheduleError(
                    f"schedule provides {len(self.entries)} iterations but iteration "
                    f"{n} was requested")
            e = self.entries[n]
        else:
            e = self._fn(n)
        self._check_entry(n, e)
        return e

    def _check_entry(self, n, e):
        if n == 0:
            if set(e.active_i) != set(range(self.m)) or set(e.active_k) != set(range(self.p)):
                raise ScheduleError(
                    "the first iteration must activate every operator (I_0 = I, K_0 = K)")
        for i in e.active_i:
            if not (0 <= i < self.m):
                raise ScheduleError(f"primal operator id {i + 1} out of range 1..{self.m}")
            d = e.pi.get(i, n)
            if not (max(0, n - self.T) <= d <= n):
                raise ScheduleError(
                    f"delays must satisfy n - T <= pi_i(n) <= n; got pi_{i + 1}({n}) = {d} "
                    f"with T = {self.T}")
        for k in e.active_k:
            if not (0 <= k < self.p):
                raise ScheduleError(f"dual operator id {k + 1} out of range 1..{self.p}")
            d = e.omega.get(k, n)
            if not (max(0, n - self.T) <= d <= n):
                raise ScheduleError(
                    f"delays must satisfy n - T <= omega_k(n) <= n; got omega_{k + 1}({n}) = {d} "
                    f"with T = {self.T}")


def make_block_schedule(kind, m, p, R=1, T=0, seed=None):
    """Build a schedule: "full", "round_robin", or "random_with_cover".

    full: everything active each iteration, no staleness.  round_robin:
    iteration 0 activates everything, then single operators cycle (needs
    R >= max(m, p)); reads are T-stale.  random_with_cover: random nonempty
    activation sets with random delays in [n-T, n], patched per R-window so
    coverage holds; deterministic in ``seed``.
    """
    m, p, R, T = int(m), int(p), int(R), int(T)
    if R < 1:
        raise ScheduleError(f"coverage window must satisfy R >= 1; got R = {R}")
    all_i = tuple(range(m))
    all_k = tuple(range(p))

    if kind == "full":
        def fn(n):
            return ScheduleEntry(all_i, all_k, {i: n for i in all_i}, {k: n for k in all_k})

        return BlockSchedule(m, p, R, T, entry_fn=fn, kind="full")

    if kind == "round_robin":
        if R < max(m, p):
            raise ScheduleError(
                f"round robin needs R >= max(m, p) so every window of R consecutive "
                f"iterations covers I and K; got R = {R}")

        def fn(n):
            if n == 0:
                acts_i, acts_k = all_i, all_k
            else:
                acts_i = (n % m,)
                acts_k = (n % p,)
            d = max(0, n - T)
            return ScheduleEntry(acts_i, acts_k,
                                 {i: d for i in acts_i}, {k: d for k in acts_k})

        return BlockSchedule(m, p, R, T, entry_fn=fn, kind="round_robin")

    if kind == "random_with_cover":
        rng = np.random.default_rng(0 if seed is None else int(seed))
        built = []
        last_i = [0] * m
        last_k = [0] * p

        def build_next():
            n = len(built)
            if n == 0:
                built.append(ScheduleEntry(all_i, all_k,
                                           {i: 0 for i in all_i}, {k: 0 for k in all_k}))
                return
            acts_i = {i for i in all_i if rng.random() < 0.5}
            acts_k = {k for k in all_k if rng.random() < 0.5}
            if not acts_i:
                acts_i = {int(rng.integers(m))}
            if not acts_k:
                acts_k = {int(rng.integers(p))}
            # force-activate anything whose coverage deadline has arrived, so
            # every window of R consecutive iterations covers I and K
            acts_i |= {i for i in all_i if n - last_i[i] >= R}
            acts_k |= {k for k in all_k if n - last_k[k] >= R}
            acts_i = tuple(sorted(acts_i))
            acts_k = tuple(sorted(acts_k))
            pi = {i: int(rng.integers(max(0, n - T), n + 1)) for i in acts_i}
            om = {k: int(rng.integers(max(0, n - T), n + 1)) for k in acts_k}
            for i in acts_i:
                last_i[i] = n
            for k in acts_k:
                last_k[k] = n
            built.append(ScheduleEntry(acts_i, acts_k, pi, om))

        def fn(n):
            while len(built) <= n:
                build_next()
            return built[n]

        return BlockSchedule(m, p, R, T, entry_fn=fn, kind="random_with_cover")

    raise ScheduleError(f"unknown schedule kind {kind!r}")


def schedule_to_text(sched: BlockSchedule, horizon):
    """Serialize the first ``horizon`` iterations in the schedule file format."""
    lines = []
    for n in range(int(horizon)):
        e = sched.entry(n)
        ii = ",".join(str(i + 1) for i in e.active_i)
        kk = ",".join(str(k + 1) for k in e.active_k)
        pi = ",".join(f"{i + 1}={e.pi.get(i, n)}" for i in e.active_i)
        om = ",".join(f"{k + 1}={e.omega.get(k, n)}" for k in e.active_k)
        lines.append(f"{n} | I: {ii} | K: {kk} | pi: {pi} | omega: {om}")
    return "\n".join(lines) + "\n"


_STAMP = re.compile(r"^(\d+)=(\d+)$")


def parse_schedule(text, m, p, R=None, T=None):
    """Parse the schedule file format into a BlockSchedule.

    Operator ids are 1-based in the file; iteration stamps are absolute.
    R and T default to the least values consistent with the file.  Raises
    ScheduleError for malformed lines, gaps in the iteration numbering, ids
    out of range, future reads, or (given R/T) coverage and delay violations.
    """
    entries = []
    max_stale = 0
    for raw in str(text).splitlines():
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = [s.strip() for s in line.split("|")]
        if len(parts) != 5:
            raise ScheduleError(f"malformed schedule line (need 5 fields): {raw!r}")
        try:
            n = int(parts[0])
        except ValueError:
            raise ScheduleError(f"malformed iteration number in line: {raw!r}") from None
        if n != len(entries):
            raise ScheduleError(
                f"iteration numbers must be consecutive from 0; got {n} after "
                f"{len(entries) - 1}")

        def body(chunk, tag):
            if not chunk.startswith(tag + ":"):
                raise ScheduleError(f"expected '{tag}:' field in line: {raw!r}")
            return chunk[len(tag) + 1:].strip()

        def ids(s, hi, what):
            if not s:
                return tuple()
            out = []
            for tok in s.split(","):
                try:
                    v = int(tok)
                except ValueError:
                    raise ScheduleError(f"malformed {what} id {tok!r} in line: {raw!r}") from None
                if not (1 <= v <= hi):
                    raise ScheduleError(f"{what} id {v} out of range 1..{hi}")
                out.append(v - 1)
            return tuple(out)

        def stamps(s, allowed, what):
            out = {}
            if not s:
                return out
            for tok in s.split(","):
                mch = _STAMP.match(tok.strip())
                if not mch:
                    raise ScheduleError(f"malformed {what} stamp {tok!r} in line: {raw!r}")
                idx = int(mch.group(1)) - 1
                d = int(mch.group(2))
                if idx not in allowed:
                    raise ScheduleError(
                        f"{what} stamp given for inactive operator {idx + 1} at iteration {n}")
                if d > n:
                    raise ScheduleError(
                        f"delays must satisfy pi/omega <= n; got stamp {d} at iteration {n}")
                out[idx] = d
            return out

        acts_i = ids(body(parts[1], "I"), m, "primal")
        acts_k = ids(body(parts[2], "K"), p, "dual")
        pi = stamps(body(parts[3], "pi"), set(acts_i), "pi")
        om = stamps(body(parts[4], "omega"), set(acts_k), "omega")
        for i in acts_i:
            pi.setdefault(i, n)
        for k in acts_k:
            om.setdefault(k, n)
        for d in list(pi.values()) + list(om.values()):
            max_stale = max(max_stale, n - d)
        entries.append(ScheduleEntry(acts_i, acts_k, pi, om))
    if not entries:
        raise ScheduleError("schedule file has no iterations")
    if T is None:
        T = max_stale
    if R is None:
        R = _least_cover_window(entries, m, p)
    sched = BlockSchedule(m, p, R, T, entries=entries, kind="file")
    validate_block_schedule(sched, len(entries))
    return sched


def _least_cover_window(entries, m, p):
    N = len(entries)
    all_i, all_k = set(range(m)), set(range(p))
    for R in range(1, N + 1):
        ok = True
        for start in range(0, N - R + 1):
            got_i, got_k = set(), set()
            for e in entries[start:start + R]:
                got_i.update(e.active_i)
                got_k.update(e.active_k)
            if got_i != all_i or got_k != all_k:
                ok = False
                break
        if ok:
            return R
    raise ScheduleError(
        "every window of R consecutive iterations must cover I and K; "
        "some operator is never activated in this file")


def validate_block_schedule(sched: BlockSchedule, horizon):
    """Check the coverage and delay assumptions over the first ``horizon`` iters.

    Raises ScheduleError quoting the violated rule; returns None when valid.
    """
    horizon = int(horizon)
    all_i, all_k = set(range(sched.m)), set(range(sched.p))
    entries = [sched.entry(n) for n in range(horizon)]  # entry() checks delays + iter 0
    for start in range(0, horizon - sched.R + 1):
        got_i, got_k = set(), set()
        for e in entries[start:start + sched.R]:
            got_i.update(e.active_i)
            got_k.update(e.active_k)
        if got_i != all_i or got_k != all_k:
            miss_i = sorted(x + 1 for x in (all_i - got_i))
            miss_k = sorted(x + 1 for x in (all_k - got_k))
            raise ScheduleError(
                f"every window of {sched.R} consecutive iterations must cover I and K; "
                f"window starting at {start} misses primal {miss_i} / dual {miss_k}")


# ---------------------------------------------------------------------------
# shared plumbing
# ---------------------------------------------------------------------------

@dataclass
class GraphCache:
    """Last computed graph points per operator, with their data's iteration stamp."""

    points: dict = field(default_factory=dict)
    stamps: dict = field(default_factory=dict)

    def put(self, key, value, stamp):
        self.points[key] = value
        self.stamps[key] = stamp

    def get(self, key):
        return self.points[key]


class _History:
    """Ring buffer of past stacked iterates, depth T+1."""

    def __init__(self, depth):
        self.depth = int(depth) + 1
        self.data = {}

    def put(self, n, u):
        self.data[n] = np.array(u, copy=True)
        stale = n - self.depth
        if stale in self.data:
            del self.data[stale]

    def get(self, n):
        return self.data[n]


def _per_block(values, count, what):
    """Split a parameter into per-block entries (each a float or callable)."""
    if isinstance(values, (list, tuple)):
        if len(values) != count:
            raise ParameterError(
                f"{what} must be a single value or a list with one entry per block; "
                f"got {len(values)} entries for {count} blocks")
        return list(values)
    return [values] * count


def _coerce_grid(Ls, m, p):
    if len(Ls) != p or any(len(row) != m for row in Ls):
        raise ParameterError("coupling grid must be p rows of m entries")
    return [[None if Lki is None else (Lki if isinstance(Lki, LinOp) else LinOp(Lki))
             for Lki in row] for row in Ls]


def _norm(v):
    return float(np.linalg.norm(v))


def _patient(cfg, schedule):
    """Vacuous cuts are normal transients when blocks are stale, so a run
    should only count as stalled after fresh data has had time to propagate.
    Raises the default stall patience to cover a coverage window plus delays;
    an explicitly set patience is left alone."""
    if cfg.stall_patience != 3:
        return cfg
    return replace(cfg, stall_patience=max(10, 2 * (schedule.R + schedule.T + 1)))


# ---------------------------------------------------------------------------
# Kuhn-Tucker projective splitting
# ---------------------------------------------------------------------------

def run_block_kt_projective(As, Bs, Ls, schedule: BlockSchedule, gammas, sigmas,
                            cfg: LoopConfig, x0s=None, y0s=None):
    """Block-iterative projective splitting for the coupled system

        (for all i)  0 in A_i x_i + sum_k L_ki* y_k*,
        (for all k)  y_k* in B_k(sum_i L_ki x_i).

    Each iteration activates I_n/K_n per the schedule, evaluating resolvents
    on snapshots delayed by pi/omega (ring buffer of depth T+1); inactive
    operators keep their cached graph points.  The engine projects onto

        sum_i <., t_i*> + sum_k <t_k, .>  <=  sum <a_i, a_i*> + sum <b_k, b_k*>

    with relaxation lam_n in [eps, 2-eps] (or combines with the anchor in
    haugazeau mode, lam_n in [eps, 1]).  gammas/sigmas are per-operator step
    schedules in [eps, 1/eps], drawn at the *delayed* iteration; pass one
    value for all blocks or a list with one entry per block.

    Returns (PrimalDualPair, trace).  trace.gaps records the raw separation
    gap each iteration (negative means the cut was vacuous and the point did
    not move); with cfg.collect_points, trace.graph_snapshots holds
    per-iteration copies of all cached graph pairs.
    """
    m, p = len(As), len(Bs)
    if schedule.m != m or schedule.p != p:
        raise ScheduleError(
            f"schedule is sized for {schedule.m}+{schedule.p} operators; "
            f"problem has {m}+{p}")
    L = _coerce_grid(Ls, m, p)
    if cfg.perturbation not in (None, "identity"):
        raise ParameterError("inertial perturbation is not wired for projective runs")

    x_dims = []
    for i in range(m):
        d = getattr(As[i], "dim", None)
        if d is None:
            for k in range(p):
                if L[k][i] is not None:
                    d = L[k][i].cols
                    break
        if d is None:
            raise ParameterError(f"cannot infer the dimension of primal block {i + 1}")
        x_dims.append(int(d))
    g_dims = []
    for k in range(p):
        d = getattr(Bs[k], "dim", None)
        if d is None:
            for i in range(m):
                if L[k][i] is not None:
                    d = L[k][i].rows
                    break
        if d is None:
            raise ParameterError(f"cannot infer the dimension of dual block {k + 1}")
        g_dims.append(int(d))

    eps = cfg.eps
    hi = 1.0 / eps

    def step_scheds(values, count, name):
        vals = _per_block(values, count, name)
        return [Schedule(vals[j], f"{name}_{j + 1}",
                         lambda v: eps <= v <= hi * (1.0 + 1e-12),
                         f"{name}_n in [eps, 1/eps]")
                for j in range(count)]

    g_scheds = step_scheds(gammas, m, "gamma")
    s_scheds = step_scheds(sigmas, p, "sigma")

    layout = SpaceLayout(tuple(x_dims) + tuple(g_dims))
    parts0 = [(np.zeros(x_dims[i]) if x0s is None else as_array(x0s[i])) for i in range(m)]
    parts0 += [(np.zeros(g_dims[k]) if y0s is None else as_array(y0s[k])) for k in range(p)]
    u0 = layout.concat(parts0)

    hist = _History(schedule.T)
    cache = GraphCache()
    gaps = []
    snapshots = [] if cfg.collect_points else None

    def Lrow(k, xs):
        out = np.zeros(g_dims[k])
        for i in range(m):
            if L[k][i] is not None:
                out += L[k][i].apply(xs[i])
        return out

    def Lcol_adj(i, ys):
        out = np.zeros(x_dims[i])
        for k in range(p):
            if L[k][i] is not None:
                out += L[k][i].adjoint_apply(ys[k])
        return out

    def eval_primal(i, parts, gamma):
        xs, ys = parts[:m], parts[m:]
        drift = Lcol_adj(i, ys)
        a = resolvent_eval(As[i], gamma, xs[i] - gamma * drift)
        a_star = (xs[i] - a) / gamma - drift
        return a, a_star

    def eval_dual(k, parts, sigma):
        xs, ys = parts[:m], parts[m:]
        lk = Lrow(k, xs)
        b = resolvent_eval(Bs[k], sigma, lk + sigma * ys[k])
        b_star = ys[k] + (lk - b) / sigma
        return b, b_star

    def oracle(n, u_t, u):
        hist.put(n, u)
        e = schedule.entry(n)
        parts = layout.split(u)
        xs, ys = parts[:m], parts[m:]

        synchronous = (len(e.active_i) == m and len(e.active_k) == p
                       and all(e.pi.get(i, n) == n for i in e.active_i)
                       and all(e.omega.get(k, n) == n for k in e.active_k))

        for i in e.active_i:
            d = e.pi.get(i, n)
            snap = layout.split(hist.get(d))
            cache.put(("a", i), eval_primal(i, snap, g_scheds[i](d)), d)
        for k in e.active_k:
            d = e.omega.get(k, n)
            snap = layout.split(hist.get(d))
            cache.put(("b", k), eval_dual(k, snap, s_scheds[k](d)), d)

        a = [cache.get(("a", i)) for i in range(m)]
        b = [cache.get(("b", k)) for k in range(p)]

        t_star = [a[i][1] + Lcol_adj(i, [b[k][1] for k in range(p)]) for i in range(m)]
        t = [b[k][0] - Lrow(k, [a[i][0] for i in range(m)]) for k in range(p)]
        direction = layout.concat(t_star + t)
        tau = float(direction @ direction)
        gap = (sum(float(xs[i] @ t_star[i]) for i in range(m))
               + sum(float(t[k] @ ys[k]) for k in range(p))
               - sum(float(ai @ asi) for ai, asi in a)
               - sum(float(bk @ bsk) for bk, bsk in b))
        gaps.append(gap)
        if snapshots is not None:
            snapshots.append(([(ai.copy(), asi.copy()) for ai, asi in a],
                              [(bk.copy(), bsk.copy()) for bk, bsk in b]))

        if synchronous:
            res = (sum(_norm(xs[i] - a[i][0]) for i in range(m))
                   + sum(_norm(Lrow(k, xs) - b[k][0]) for k in range(p)))
        else:
            # re-derive the stopping quantity synchronously at the current point
            res = 0.0
            for i in range(m):
                ai, _ = eval_primal(i, parts, g_scheds[i](n))
                res += _norm(xs[i] - ai)
            for k in range(p):
                bk, _ = eval_dual(k, parts, s_scheds[k](n))
                res += _norm(Lrow(k, xs) - bk)

        delta = gap if tau > 0.0 else min(gap, 0.0)
        w = u - (gap / tau) * direction if tau > 0.0 else u
        return CutReport(w=w, t_star=direction, delta=delta, aux={"residual": res})

    u_fin, trace = outer_loop_run(oracle, u0, _patient(cfg, schedule))
    trace.gaps = gaps
    if snapshots is not None:
        trace.graph_snapshots = snapshots
    parts = layout.split(as_array(u_fin))
    x = np.concatenate(parts[:m]) if m > 1 else parts[0]
    y = np.concatenate(parts[m:]) if p > 1 else parts[m]
    pair = PrimalDualPair(x, y, trace.final_residual, trace.final_residual)
    return pair, trace


def run_kt_projective(A, B, L, gamma, sigma, cfg: LoopConfig, x0=None, y0=None):
    """Projective splitting for 0 in Ax + L*B(Lx) via its primal-dual system.

    One iteration: a = J_{gamma A}(x - gamma L* y*), b = J_{sigma B}(Lx +
    sigma y*), then (x, y*) moves by the lam_n-relaxed projection onto the
    half-space built from the two graph points.  gamma_n and sigma_n range
    freely over [eps, 1/eps] — they may be large and wildly different from
    each other.  haugazeau mode converges strongly to the Kuhn-Tucker point
    nearest the start.

    This is the two-operator case of run_block_kt_projective under the full
    schedule (same code path, so traces match bitwise).
    """
    sched = make_block_schedule("full", 1, 1)
    return run_block_kt_projective(
        [A], [B], [[L]], sched, gamma, sigma, cfg,
        x0s=None if x0 is None else [x0],
        y0s=None if y0 is None else [y0])


# ---------------------------------------------------------------------------
# saddle projective splitting
# ---------------------------------------------------------------------------

class SaddleProblem:
    """Coupled-inclusion data with three-way operator decompositions.

    Primal blocks i: A_i (set-valued) + C_i (cocoercive) + Q_i (Lipschitz),
    plus one monotone Lipschitz map R acting on the whole primal stack.
    Dual blocks k: two parallel-summed operators, each split the same way
    (Bm/Bc/Bl and Dm/Dc/Dl).  Ls is the p-by-m coupling grid (None = zero).
    c/l parts may be None; cocoercivity constants feed alpha = min over the
    constants that are present (None when no cocoercive part exists, in
    which case the quadratic slack in the separation gap is exactly zero).
    """

    def __init__(self, x_dims, g_dims, As, Bm, Dm, Ls, Cs=None, Qs=None, R=None,
                 Bc=None, Bl=None, Dc=None, Dl=None):
        self.x_dims = tuple(int(d) for d in x_dims)
        self.g_dims = tuple(int(d) for d in g_dims)
        self.m = len(self.x_dims)
        self.p = len(self.g_dims)
        if len(As) != self.m or len(Bm) != self.p or len(Dm) != self.p:
            raise ParameterError("operator lists must match the block counts")
        self.As = list(As)
        self.Bm = list(Bm)
        self.Dm = list(Dm)
        self.Ls = _coerce_grid(Ls, self.m, self.p)
        self.Cs = list(Cs) if Cs is not None else [None] * self.m
        self.Qs = list(Qs) if Qs is not None else [None] * self.m
        self.Bc = list(Bc) if Bc is not None else [None] * self.p
        self.Bl = list(Bl) if Bl is not None else [None] * self.p
        self.Dc = list(Dc) if Dc is not None else [None] * self.p
        self.Dl = list(Dl) if Dl is not None else [None] * self.p
        self.R = R
        self.chi = 0.0 if R is None else float(getattr(R, "beta"))

        consts = []
        for op in self.Cs + self.Bc + self.Dc:
            if op is not None:
                a = getattr(op, "alpha", None)
                if a is None or float(a) <= 0:
                    raise ParameterError(
                        "every cocoercive part must carry a constant alpha > 0")
                consts.append(float(a))
        self.alpha = min(consts) if consts else None

        def lip(op, what):
            if op is None:
                return 0.0
            b = getattr(op, "beta", None)
            if b is None or float(b) < 0:
                raise ParameterError(f"{what} must carry a Lipschitz constant beta >= 0")
            return float(b)

        self.q_lip = [lip(q, "each Q_i") for q in self.Qs]
        self.b_lip = [lip(q, "each B_k Lipschitz part") for q in self.Bl]
        self.d_lip = [lip(q, "each D_k Lipschitz part") for q in self.Dl]
        self.x_layout = SpaceLayout(self.x_dims)

    def L_row(self, k, xs):
        out = np.zeros(self.g_dims[k])
        for i in range(self.m):
            if self.Ls[k][i] is not None:
                out += self.Ls[k][i].apply(xs[i])
        return out

    def L_col_adj(self, i, vs):
        out = np.zeros(self.x_dims[i])
        for k in range(self.p):
            if self.Ls[k][i] is not None:
                out += self.Ls[k][i].adjoint_apply(vs[k])
        return out

    def R_at(self, xs):
        if self.R is None:
            return [np.zeros(d) for d in self.x_dims]
        return self.x_layout.split(self.R.forward(self.x_layout.concat(xs)))


def run_saddle_projective(prob: SaddleProblem, schedule: BlockSchedule,
                          cfg: LoopConfig, sigma=None, gammas=None, mus=None,
                          rhos=None, sigmas=None, x0s=None, y0s=None, z0s=None,
                          v0s=None):
    """Asynchronous block-iterative splitting on the saddle extension of prob.

    State: (x_i, y_k, z_k, v_k*), where y_k + z_k tracks the coupled image
    sum_i L_ki x_i and v_k* the multiplier.  Active primal blocks take one
    resolvent of A_i warped by forward steps of C_i, Q_i, R and the coupling;
    active dual blocks take resolvents of Bm_k and Dm_k with forward steps of
    their c/l parts plus the multiplier probe e_k*.  A separation gap is
    assembled from cached graph data (stale blocks keep their last values;
    the constraint direction e_k is always recomputed at the current primal
    points).  A positive gap moves every coordinate by the lam_n-relaxed
    projection; otherwise nothing moves, the raw gap still lands in
    trace.gaps, and repeated vacuous cuts end the run as stalled.

    Bands (validated on every draw; sigma is the multiplier step weight):
    sigma in (1/(4*alpha), +inf); 1/eps > sigma + max{alpha_i_l + chi,
    beta_k_l, delta_k_l}; gamma_{i,n} in [eps, 1/(alpha_i_l + chi + sigma)];
    mu_{k,n} in [eps, 1/(beta_k_l + sigma)]; rho_{k,n} in
    [eps, 1/(delta_k_l + sigma)]; sigma_{k,n} in [eps, 1/eps].  Defaults sit
    at the top of each band.  Returns (PrimalDualPair(x, v*), trace).
    """
    m, p = prob.m, prob.p
    if schedule.m != m or schedule.p != p:
        raise ScheduleError(
            f"schedule is sized for {schedule.m}+{schedule.p} operators; "
            f"problem has {m}+{p}")
    if cfg.perturbation not in (None, "identity"):
        raise ParameterError("inertial perturbation is not wired for projective runs")
    eps = cfg.eps

    if sigma is None:
        sigma = 1.01 / (4.0 * prob.alpha) if prob.alpha is not None else 1.0
    sigma = float(sigma)
    if prob.alpha is not None and not (sigma > 1.0 / (4.0 * prob.alpha)):
        raise ParameterError(
            f"multiplier weight must satisfy sigma in (1/(4*alpha), +inf); "
            f"got sigma = {sigma:g} with alpha = {prob.alpha:g}")
    if sigma <= 0.0:
        raise ParameterError("multiplier weight must satisfy sigma > 0")
    load = sigma + max([prob.q_lip[i] + prob.chi for i in range(m)]
                       + prob.b_lip + prob.d_lip)
    if not (1.0 / eps > load):
        raise ParameterError(
            "step bands require 1/eps > sigma + max{alpha_i_l + chi, beta_k_l, "
            f"delta_k_l}}; got {load:g} with eps = {eps:g}")

    def top_g(i):
        return 1.0 / (prob.q_lip[i] + prob.chi + sigma)

    def top_mu(k):
        return 1.0 / (prob.b_lip[k] + sigma)

    def top_rho(k):
        return 1.0 / (prob.d_lip[k] + sigma)

    def band_sched(vals, count, name, top_of, text):
        vals = _per_block(vals, count, name)
        return [Schedule(vals[j], f"{name}_{j + 1}",
                         lambda v, t=top_of(j): eps <= v <= t * (1.0 + 1e-12), text)
                for j in range(count)]

    g_scheds = band_sched([top_g(i) for i in range(m)] if gammas is None else gammas,
                          m, "gamma", top_g,
                          "gamma_{i,n} in [eps, 1/(alpha_i_l + chi + sigma)]")
    mu_scheds = band_sched([top_mu(k) for k in range(p)] if mus is None else mus,
                           p, "mu", top_mu,
                           "mu_{k,n} in [eps, 1/(beta_k_l + sigma)]")
    rho_scheds = band_sched([top_rho(k) for k in range(p)] if rhos is None else rhos,
                            p, "rho", top_rho,
                            "rho_{k,n} in [eps, 1/(delta_k_l + sigma)]")
    s_scheds = band_sched(min(max(sigma, eps), 1.0 / eps) if sigmas is None else sigmas,
                          p, "sigma_e", lambda k: 1.0 / eps,
                          "sigma_{k,n} in [eps, 1/eps]")

    layout = SpaceLayout(prob.x_dims + prob.g_dims + prob.g_dims + prob.g_dims)

    def blocks(parts):
        return (parts[:m], parts[m:m + p], parts[m + p:m + 2 * p], parts[m + 2 * p:])

    parts0 = [(np.zeros(prob.x_dims[i]) if x0s is None else as_array(x0s[i]))
              for i in range(m)]
    for src in (y0s, z0s, v0s):
        parts0 += [(np.zeros(prob.g_dims[k]) if src is None else as_array(src[k]))
                   for k in range(p)]
    u0 = layout.concat(parts0)

    quad = 0.0 if prob.alpha is None else 1.0 / (4.0 * prob.alpha)
    hist = _History(schedule.T)
    cache = GraphCache()
    gaps = []
    snapshots = [] if cfg.collect_points else None

    def fwd(op, v):
        return op.forward(v) if op is not None else np.zeros_like(v)

    def eval_primal(i, parts, gamma):
        """Returns (a_i, a_i*, xi_i, pure graph pair of A_i)."""
        xs, ys, zs, vs = blocks(parts)
        l_star = fwd(prob.Qs[i], xs[i]) + prob.R_at(xs)[i] + prob.L_col_adj(i, vs)
        cx = fwd(prob.Cs[i], xs[i])
        a = resolvent_eval(prob.As[i], gamma, xs[i] - gamma * (l_star + cx))
        pure = (xs[i] - a) / gamma - l_star - cx
        a_star = (xs[i] - a) / gamma - l_star + fwd(prob.Qs[i], a)
        xi = float((a - xs[i]) @ (a - xs[i]))
        return a, a_star, xi, (a, pure)

    def eval_dual(k, parts, mu, rho, sk):
        """Returns (b, d, e*, q*, t*, eta, pure pair of Bm, pure pair of Dm)."""
        xs, ys, zs, vs = blocks(parts)
        u_star = vs[k] - fwd(prob.Bl[k], ys[k])
        w_star = vs[k] - fwd(prob.Dl[k], zs[k])
        b = resolvent_eval(prob.Bm[k], mu, ys[k] + mu * (u_star - fwd(prob.Bc[k], ys[k])))
        d = resolvent_eval(prob.Dm[k], rho, zs[k] + rho * (w_star - fwd(prob.Dc[k], zs[k])))
        e_star = sk * (prob.L_row(k, xs) - ys[k] - zs[k]) + vs[k]
        q_star = (ys[k] - b) / mu + u_star + fwd(prob.Bl[k], b) - e_star
        t_star = (zs[k] - d) / rho + w_star + fwd(prob.Dl[k], d) - e_star
        eta = float((b - ys[k]) @ (b - ys[k])) + float((d - zs[k]) @ (d - zs[k]))
        pure_b = (b, (ys[k] - b) / mu + u_star - fwd(prob.Bc[k], ys[k]))
        pure_d = (d, (zs[k] - d) / rho + w_star - fwd(prob.Dc[k], zs[k]))
        return b, d, e_star, q_star, t_star, eta, pure_b, pure_d

    def oracle(n, u_t, u):
        hist.put(n, u)
        e = schedule.entry(n)
        parts = layout.split(u)
        xs, ys, zs, vs = blocks(parts)

        for i in e.active_i:
            dd = e.pi.get(i, n)
            snap = layout.split(hist.get(dd))
            cache.put(("a", i), eval_primal(i, snap, g_scheds[i](dd)), dd)
        for k in e.active_k:
            dd = e.omega.get(k, n)
            snap = layout.split(hist.get(dd))
            cache.put(("b", k), eval_dual(k, snap, mu_scheds[k](dd),
                                          rho_scheds[k](dd), s_scheds[k](dd)), dd)

        A_data = [cache.get(("a", i)) for i in range(m)]
        B_data = [cache.get(("b", k)) for k in range(p)]
        a_pts = [ad[0] for ad in A_data]
        R_at_a = prob.R_at(a_pts)

        p_star = [A_data[i][1] + R_at_a[i]
                  + prob.L_col_adj(i, [B_data[k][2] for k in range(p)])
                  for i in range(m)]
        e_vec = [B_data[k][0] + B_data[k][1] - prob.L_row(k, a_pts) for k in range(p)]

        delta_n = (-quad * (sum(ad[2] for ad in A_data) + sum(bd[5] for bd in B_data))
                   + sum(float((xs[i] - A_data[i][0]) @ p_star[i]) for i in range(m))
                   + sum(float((ys[k] - B_data[k][0]) @ B_data[k][3])
                         + float((zs[k] - B_data[k][1]) @ B_data[k][4])
                         + float(e_vec[k] @ (vs[k] - B_data[k][2]))
                         for k in range(p)))
        gaps.append(delta_n)

        direction = layout.concat(p_star + [B_data[k][3] for k in range(p)]
                                  + [B_data[k][4] for k in range(p)] + e_vec)
        tau = float(direction @ direction)
        delta = delta_n if tau > 0.0 else min(delta_n, 0.0)

        if snapshots is not None:
            snapshots.append(([ad[3] for ad in A_data],
                              [bd[6] for bd in B_data], [bd[7] for bd in B_data]))

        synchronous = (len(e.active_i) == m and len(e.active_k) == p
                       and all(e.pi.get(i, n) == n for i in e.active_i)
                       and all(e.omega.get(k, n) == n for k in e.active_k))
        if synchronous:
            res = (sum(_norm(xs[i] - A_data[i][0]) for i in range(m))
                   + sum(_norm(ys[k] - B_data[k][0]) + _norm(zs[k] - B_data[k][1])
                         + _norm(e_vec[k]) for k in range(p)))
        else:
            # re-derive the stopping quantity synchronously at the current point
            res = 0.0
            cur_a = []
            for i in range(m):
                a, _, _, _ = eval_primal(i, parts, g_scheds[i](n))
                cur_a.append(a)
                res += _norm(xs[i] - a)
            for k in range(p):
                b, d = eval_dual(k, parts, mu_scheds[k](n), rho_scheds[k](n),
                                 s_scheds[k](n))[:2]
                res += (_norm(ys[k] - b) + _norm(zs[k] - d)
                        + _norm(b + d - prob.L_row(k, cur_a)))

        w = u - (delta_n / tau) * direction if tau > 0.0 else u
        return CutReport(w=w, t_star=direction, delta=delta, aux={"residual": res})

    u_fin, trace = outer_loop_run(oracle, u0, _patient(cfg, schedule))
    trace.gaps = gaps
    if snapshots is not None:
        trace.graph_snapshots = snapshots
    parts = layout.split(as_array(u_fin))
    xs, ys, zs, vs = blocks(parts)
    x = np.concatenate(xs) if m > 1 else xs[0]
    v = np.concatenate(vs) if p > 1 else vs[0]
    pair = PrimalDualPair(x, v, trace.final_residual, trace.final_residual)
    return pair, trace
