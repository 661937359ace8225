"""Seeded test problems with planted structure, and brute-force oracles.

Every generator builds its instance around a solution chosen first, so the
planted data satisfies its inclusion to machine precision.  The oracles
recompute ground truth independently — dense linear algebra, active-set
enumeration over small constraint-pattern sets, exhaustive sign patterns for
l1 problems, and bisection for 1-D inclusions.  Nothing in this module calls
the iteration engines; that independence is what makes the oracle
comparisons in the test suite meaningful.

Instances serialize to a line-oriented text format (kind, dims, seed,
matrices row-major, planted data) so CLI runs can be replayed from files.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import OracleError, ParameterError
from .space import SpaceLayout, as_array

__all__ = [
    "ProblemInstance",
    "OracleSolution",
    "PROBLEM_KINDS",
    "gen_problem",
    "oracle_solve",
    "residual_eval",
    "project_polyhedron",
    "monotone_affine_matrix",
]

PROBLEM_KINDS = (
    "two_set",
    "lasso",
    "split_feasibility",
    "composite_pd",
    "strongly_monotone_dual",
    "minkowski",
    "consensus",
    "bilinear_minimax",
    "affine_zero",
)

_MAX_DIM = 64


@dataclass
class ProblemInstance:
    """One generated problem: kind tag, sizes, matrices, optional plant.

    ``dims`` holds the named sizes and generator options; ``data`` the
    vectors/matrices/scalars; ``planted`` a solution built into the instance
    (satisfying its inclusion to 1e-12 by construction) when the kind
    supports planting.
    """

    kind: str
    dims: dict
    seed: int
    data: dict = field(default_factory=dict)
    planted: dict = None

    @property
    def primal_dim(self):
        return _kind_impl(self.kind).primal_dim(self)

    @property
    def dual_dim(self):
        return _kind_impl(self.kind).dual_dim(self)

    @property
    def layout(self):
        d = self.dual_dim
        dims = (self.primal_dim,) if d is None else (self.primal_dim, d)
        return SpaceLayout(dims)

    # -- text serialization ------------------------------------------------

    def to_text(self):
        lines = ["splitkit problem v1", f"kind: {self.kind}", f"seed: {self.seed}"]
        lines.append("dims: " + " ".join(f"{k}={_fmt_opt(v)}" for k, v in self.dims.items()))

        def emit(prefix, name, val):
            if np.ndim(val) == 0 and not isinstance(val, np.ndarray):
                lines.append(f"{prefix} {name}: scalar")
                lines.append(_fmt(float(val)))
            else:
                arr = np.asarray(val, dtype=float)
                if arr.ndim == 1:
                    lines.append(f"{prefix} {name}: {arr.shape[0]}")
                    lines.append(" ".join(_fmt(v) for v in arr))
                else:
                    lines.append(f"{prefix} {name}: {arr.shape[0]}x{arr.shape[1]}")
                    for row in arr:
                        lines.append(" ".join(_fmt(v) for v in row))

        for name in sorted(self.data):
            emit("array", name, self.data[name])
        if self.planted:
            for name in sorted(self.planted):
                emit("planted", name, self.planted[name])
        return "\n".join(lines) + "\n"

    @staticmethod
    def from_text(text):
        lines = [ln.rstrip() for ln in str(text).splitlines()]
        lines = [ln for ln in lines if ln.strip()]
        if not lines or lines[0] != "splitkit problem v1":
            raise ParameterError("problem text must start with 'splitkit problem v1'")
        kind = seed = None
        dims = {}
        data = {}
        planted = {}
        i = 1
        while i < len(lines):
            ln = lines[i]
            if ln.startswith("kind: "):
                kind = ln[6:].strip()
                i += 1
            elif ln.startswith("seed: "):
                seed = int(ln[6:])
                i += 1
            elif ln.startswith("dims: "):
                for tok in ln[6:].split():
                    k, _, v = tok.partition("=")
                    dims[k] = _parse_opt(v)
                i += 1
            elif ln.startswith(("array ", "planted ")):
                prefix, rest = ln.split(" ", 1)
                name, _, shape = rest.partition(":")
                name, shape = name.strip(), shape.strip()
                target = data if prefix == "array" else planted
                if shape == "scalar":
                    target[name] = float(lines[i + 1])
                    i += 2
                elif "x" in shape:
                    r, c = (int(s) for s in shape.split("x"))
                    rows = [_parse_row(lines[i + 1 + j]) for j in range(r)]
                    mat = np.vstack(rows)
                    if mat.shape != (r, c):
                        raise ParameterError(f"array {name} does not match its declared shape")
                    target[name] = mat
                    i += 1 + r
                else:
                    n = int(shape)
                    vec = _parse_row(lines[i + 1])
                    if vec.shape != (n,):
                        raise ParameterError(f"array {name} does not match its declared shape")
                    target[name] = vec
                    i += 2
            else:
                raise ParameterError(f"unrecognized problem line: {ln!r}")
        if kind is None or seed is None:
            raise ParameterError("problem text needs 'kind:' and 'seed:' lines")
        return ProblemInstance(kind, dims, seed, data, planted or None)


@dataclass
class OracleSolution:
    """Ground truth from a brute-force solve; the certificate is its own
    inclusion residual, checked to be at most 1e-10 before returning."""

    primal: np.ndarray
    dual: np.ndarray = None
    residual: float = np.nan


def _fmt(v):
    return f"{float(v):.17g}"


def _fmt_opt(v):
    return v if isinstance(v, str) else f"{v:.17g}" if isinstance(v, float) else str(v)


def _parse_opt(s):
    try:
        return int(s)
    except ValueError:
        pass
    try:
        return float(s)
    except ValueError:
        return s


def _parse_row(line):
    try:
        return np.array([float(tok) for tok in line.split()])
    except ValueError as exc:
        raise ParameterError(f"bad number in problem file: {line!r}") from exc


def monotone_affine_matrix(rng, n, nu, rank=None):
    """S = K - K^T + G^T G + nu*Id: monotone by construction.

    nu > 0 makes it strongly monotone; rank < n with nu = 0 leaves a
    nontrivial kernel, so the zero set of x -> S x + b is a proper affine
    subspace.  Returns (S, K, G).
    """
    K = rng.standard_normal((n, n))
    r = n if rank is None else int(rank)
    G = rng.standard_normal((r, n))
    S = K - K.T + G.T @ G + float(nu) * np.eye(n)
    return S, K, G


def project_polyhedron(z, A, b):
    """Projection of z onto {x : A x <= b} by active-set enumeration.

    Tries every subset of rows as the active set (so A can have at most 12
    rows), solving the equality-constrained projection and checking primal
    feasibility plus multiplier signs.  Returns (x, multipliers).
    """
    z = as_array(z)
    A = np.atleast_2d(np.asarray(A, dtype=float))
    b = as_array(b)
    k = A.shape[0]
    if k > 12:
        raise OracleError("active-set enumeration supports at most 12 constraints")
    from itertools import combinations
    for size in range(k + 1):
        for S in combinations(range(k), size):
            S = list(S)
            mu = np.zeros(k)
            if S:
                AS = A[S]
                Gram = AS @ AS.T
                if np.linalg.matrix_rank(Gram) < len(S):
                    continue
                mu_S = np.linalg.solve(Gram, AS @ z - b[S])
                if np.any(mu_S < -1e-10):
                    continue
                mu[S] = mu_S
                x = z - AS.T @ mu_S
            else:
                x = np.array(z, copy=True)
            if np.all(A @ x <= b + 1e-9):
                # stationarity and signs hold by construction; feasibility just checked
                return x, mu
    raise OracleError("no active set certified the projection (empty polyhedron?)")


def _bisect_inclusion(g, lo, hi, tol=1e-14):
    """Solve 0 in g(x) + N_[lo,hi](x) for increasing g by bisection."""
    if g(lo) >= 0.0:
        return lo
    if g(hi) <= 0.0:
        return hi
    a, b = lo, hi
    for _ in range(200):
        mid = 0.5 * (a + b)
        if b - a <= tol:
            return mid
        if g(mid) < 0.0:
            a = mid
        else:
            b = mid
    return 0.5 * (a + b)


def _soft(x, t):
    return np.sign(x) * np.maximum(np.abs(x) - t, 0.0)


def _candidate_xy(candidate):
    if hasattr(candidate, "x"):
        y = getattr(candidate, "y_star", None)
        return as_array(candidate.x), None if y is None else as_array(y)
    if isinstance(candidate, tuple) and len(candidate) == 2:
        x, y = candidate
        return as_array(x), None if y is None else as_array(y)
    return as_array(candidate), None


# ---------------------------------------------------------------------------
# kind implementations
# ---------------------------------------------------------------------------

class _TwoSet:
    """Best approximation: project z onto the intersection of two sets —
    either two half-spaces (active-set oracle) or two hyperplanes (dense
    KKT solve; the intersection is affine, which strong-mode runs target)."""

    defaults = {"n": 2, "shape": "halfspaces"}

    @staticmethod
    def primal_dim(p):
        return p.dims["n"]

    @staticmethod
    def dual_dim(p):
        return 2

    @staticmethod
    def gen(dims, seed, rng):
        n = dims["n"]
        shape = dims["shape"]
        x_f = rng.standard_normal(n)
        if shape == "halfspaces":
            while True:
                a1 = rng.standard_normal(n)
                a2 = rng.standard_normal(n)
                a1 /= np.linalg.norm(a1)
                a2 /= np.linalg.norm(a2)
                if abs(a1 @ a2) < 0.95:
                    break
            b1 = a1 @ x_f + rng.uniform(0.1, 0.6)
            b2 = a2 @ x_f + rng.uniform(0.1, 0.6)
            z = x_f + rng.uniform(0.5, 1.5) * a1 + rng.uniform(0.5, 1.5) * a2
            data = {"a1": a1, "b1": b1, "a2": a2, "b2": b2, "z": z}
            return data, None
        if shape == "lines":
            while True:
                C = rng.standard_normal((2, n))
                C /= np.linalg.norm(C, axis=1)[:, None]
                if abs(C[0] @ C[1]) < 0.95:
                    break
            d = C @ x_f
            z = x_f + 2.0 * rng.standard_normal(n)
            return {"C": C, "d": d, "z": z}, {"x_star": x_f}
        raise ParameterError(f"two_set shape must be 'halfspaces' or 'lines', got {shape!r}")

    @staticmethod
    def solve(p):
        z = p.data["z"]
        if p.dims["shape"] == "halfspaces":
            A = np.vstack([p.data["a1"], p.data["a2"]])
            b = np.array([p.data["b1"], p.data["b2"]])
            x, mu = project_polyhedron(z, A, b)
            return x, mu
        C, d = p.data["C"], p.data["d"]
        # proj onto {Cx = d}: x = z - C^T (C C^T)^{-1} (C z - d)
        mu = np.linalg.solve(C @ C.T, C @ z - d)
        return z - C.T @ mu, mu

    @staticmethod
    def residual(p, x, y):
        z = p.data["z"]
        if p.dims["shape"] == "halfspaces":
            A = np.vstack([p.data["a1"], p.data["a2"]])
            b = np.array([p.data["b1"], p.data["b2"]])
            feas = float(np.maximum(A @ x - b, 0.0).sum())
            if y is None:
                # best multipliers for this x over the four sign patterns
                best = np.inf
                from itertools import combinations
                for size in range(3):
                    for S in combinations(range(2), size):
                        S = list(S)
                        mu = np.zeros(2)
                        if S:
                            AS = A[S]
                            Gram = AS @ AS.T
                            if np.linalg.matrix_rank(Gram) < len(S):
                                continue
                            mu[S] = np.linalg.solve(Gram, AS @ (z - x))
                        r = _twoset_kkt(A, b, z, x, mu)
                        best = min(best, r)
                return feas + best
            return feas + _twoset_kkt(A, b, z, x, as_array(y))
        C, d = p.data["C"], p.data["d"]
        feas = float(np.linalg.norm(C @ x - d))
        resid = z - x
        mu = np.linalg.lstsq(C.T, resid, rcond=None)[0]
        return feas + float(np.linalg.norm(resid - C.T @ mu))


def _twoset_kkt(A, b, z, x, mu):
    stat = float(np.linalg.norm(z - x - A.T @ mu))
    neg = float(np.maximum(-mu, 0.0).sum())
    comp = float(np.abs(mu * (A @ x - b)).sum())
    return stat + neg + comp


class _Lasso:
    """min (1/2)||G x - h||^2 + w ||x||_1 with the support {1, 3} planted:
    the data is reverse-engineered so the chosen sparse point is optimal."""

    defaults = {"n": 6, "m": 8, "w": 0.7}

    @staticmethod
    def primal_dim(p):
        return p.dims["n"]

    @staticmethod
    def dual_dim(p):
        return None

    @staticmethod
    def gen(dims, seed, rng):
        n, m, w = dims["n"], dims["m"], float(dims["w"])
        if n < 4:
            raise ParameterError("lasso needs n >= 4 to plant support {1, 3}")
        if m < n:
            raise ParameterError("lasso needs m >= n so the design has full column rank")
        G = rng.standard_normal((m, n))
        G /= np.linalg.norm(G, 2)  # ||G'G|| = 1, so the smooth part is 1-cocoercive
        x_star = np.zeros(n)
        x_star[1] = rng.uniform(0.8, 1.6)
        x_star[3] = -rng.uniform(0.8, 1.6)
        v = w * rng.uniform(-0.6, 0.6, size=n)
        v[1] = -w * np.sign(x_star[1])
        v[3] = -w * np.sign(x_star[3])
        # choose h so the optimality condition G^T(G x* - h) = v holds exactly
        r = G @ np.linalg.solve(G.T @ G, v)
        h = G @ x_star - r
        return {"G": G, "h": h, "w": w}, {"x_star": x_star}

    @staticmethod
    def solve(p):
        G, h, w = p.data["G"], p.data["h"], float(p.data["w"])
        n = G.shape[1]
        if n > 10:
            raise OracleError("sign enumeration supports n <= 10")
        best_x, best_obj = None, np.inf
        from itertools import product
        for signs in product((-1, 0, 1), repeat=n):
            s = np.array(signs, dtype=float)
            S = np.flatnonzero(s)
            x = np.zeros(n)
            if S.size:
                GS = G[:, S]
                try:
                    xS = np.linalg.solve(GS.T @ GS, GS.T @ h - w * s[S])
                except np.linalg.LinAlgError:
                    continue
                if np.any(xS * s[S] < -1e-12):
                    continue
                x[S] = xS
            g = G.T @ (G @ x - h)
            off = np.setdiff1d(np.arange(n), S)
            if np.any(np.abs(g[off]) > w * (1.0 + 1e-10)):
                continue
            obj = 0.5 * float((G @ x - h) @ (G @ x - h)) + w * float(np.abs(x).sum())
            if obj < best_obj - 1e-15:
                best_obj, best_x = obj, x
        if best_x is None:
            raise OracleError("no sign pattern certified an l1 minimizer")
        return best_x, None

    @staticmethod
    def residual(p, x, y):
        G, h, w = p.data["G"], p.data["h"], float(p.data["w"])
        t = 1.0 / float(np.linalg.norm(G.T @ G, 2))
        step = x - t * (G.T @ (G @ x - h))
        return float(np.linalg.norm(x - _soft(step, t * w)))


class _SplitFeasibility:
    """Find x in the box C with L x in the box D; built around a point
    strictly inside both, which doubles as the oracle answer."""

    defaults = {"n": 4, "m": 3}

    @staticmethod
    def primal_dim(p):
        return p.dims["n"]

    @staticmethod
    def dual_dim(p):
        return None

    @staticmethod
    def gen(dims, seed, rng):
        n, m = dims["n"], dims["m"]
        L = rng.standard_normal((m, n))
        x_f = rng.standard_normal(n)
        lo = x_f - rng.uniform(0.2, 1.0, size=n)
        hi = x_f + rng.uniform(0.2, 1.0, size=n)
        y_f = L @ x_f
        lo2 = y_f - rng.uniform(0.2, 1.0, size=m)
        hi2 = y_f + rng.uniform(0.2, 1.0, size=m)
        return {"L": L, "lo": lo, "hi": hi, "lo2": lo2, "hi2": hi2}, {"x_star": x_f}

    @staticmethod
    def solve(p):
        # feasibility has many solutions; the planted interior point is one
        return p.planted["x_star"].copy(), None

    @staticmethod
    def residual(p, x, y):
        L = p.data["L"]
        gx = x - np.clip(x, p.data["lo"], p.data["hi"])
        v = L @ x
        gv = v - np.clip(v, p.data["lo2"], p.data["hi2"])
        return float(np.linalg.norm(gx) + np.linalg.norm(gv))


class _CompositePD:
    """0 in A x + L* B(L x) with affine monotone A and B; the primal-dual
    pair is planted first and the offsets derived from it."""

    defaults = {"n": 3, "m": 2, "nu": 0.1}

    @staticmethod
    def primal_dim(p):
        return p.dims["n"]

    @staticmethod
    def dual_dim(p):
        return p.dims["m"]

    @staticmethod
    def gen(dims, seed, rng):
        n, m, nu = dims["n"], dims["m"], float(dims["nu"])
        SA, KA, GA = monotone_affine_matrix(rng, n, nu)
        SB, _, _ = monotone_affine_matrix(rng, m, 0.1)
        L = rng.standard_normal((m, n))
        x_star = rng.standard_normal(n)
        y_star = rng.standard_normal(m)
        bB = y_star - SB @ (L @ x_star)
        bA = -SA @ x_star - L.T @ y_star
        # KA, GA expose the skew / cocoercive split of SA for forward-part methods
        return ({"SA": SA, "bA": bA, "SB": SB, "bB": bB, "L": L,
                 "KA": KA, "GA": GA, "nu": nu},
                {"x_star": x_star, "y_star": y_star})

    @staticmethod
    def solve(p):
        SA, bA = p.data["SA"], p.data["bA"]
        SB, bB = p.data["SB"], p.data["bB"]
        L = p.data["L"]
        x = np.linalg.solve(SA + L.T @ SB @ L, -bA - L.T @ bB)
        return x, SB @ (L @ x) + bB

    @staticmethod
    def residual(p, x, y):
        SA, bA = p.data["SA"], p.data["bA"]
        SB, bB = p.data["SB"], p.data["bB"]
        L = p.data["L"]
        if y is None:
            y = SB @ (L @ x) + bB
        return float(np.linalg.norm(SA @ x + bA + L.T @ y)
                     + np.linalg.norm(y - SB @ (L @ x) - bB))


class _StronglyMonotoneDual:
    """z in A x + rho x + sum_k L_k* B_k(L_k x) with strongly monotone B_k;
    planted pair, dense-solve oracle."""

    defaults = {"n": 4, "m": 3, "p": 1, "rho": 1.0}

    @staticmethod
    def primal_dim(p):
        return p.dims["n"]

    @staticmethod
    def dual_dim(p):
        return p.dims["m"] * p.dims["p"]

    @staticmethod
    def gen(dims, seed, rng):
        n, m, pk, rho = dims["n"], dims["m"], dims["p"], float(dims["rho"])
        SA, _, _ = monotone_affine_matrix(rng, n, 0.0)
        x_star = rng.standard_normal(n)
        z = rng.standard_normal(n)
        data = {"SA": SA, "z": z, "rho": rho}
        acc = SA @ x_star + rho * x_star - z
        planted = {"x_star": x_star}
        for k in range(pk):
            Sk, _, _ = monotone_affine_matrix(rng, m, 0.1)
            Lk = rng.standard_normal((m, n))
            yk = rng.standard_normal(m)
            data[f"S{k + 1}"] = Sk
            data[f"L{k + 1}"] = Lk
            data[f"b{k + 1}"] = yk - Sk @ (Lk @ x_star)
            planted[f"y{k + 1}_star"] = yk
            acc += Lk.T @ yk
        data["bA"] = -acc
        return data, planted

    @staticmethod
    def solve(p):
        n, pk, rho = p.dims["n"], p.dims["p"], float(p.data["rho"])
        M = p.data["SA"] + rho * np.eye(n)
        rhs = p.data["z"] - p.data["bA"]
        for k in range(pk):
            Sk, Lk, bk = p.data[f"S{k + 1}"], p.data[f"L{k + 1}"], p.data[f"b{k + 1}"]
            M = M + Lk.T @ Sk @ Lk
            rhs = rhs - Lk.T @ bk
        x = np.linalg.solve(M, rhs)
        duals = [p.data[f"S{k + 1}"] @ (p.data[f"L{k + 1}"] @ x) + p.data[f"b{k + 1}"]
                 for k in range(pk)]
        return x, np.concatenate(duals)

    @staticmethod
    def residual(p, x, y):
        pk, m, rho = p.dims["p"], p.dims["m"], float(p.data["rho"])
        if y is None:
            y = np.concatenate([p.data[f"S{k + 1}"] @ (p.data[f"L{k + 1}"] @ x)
                                + p.data[f"b{k + 1}"] for k in range(pk)])
        ys = [y[k * m:(k + 1) * m] for k in range(pk)]
        r = p.data["SA"] @ x + p.data["bA"] + rho * x - p.data["z"]
        out = 0.0
        for k in range(pk):
            Sk, Lk, bk = p.data[f"S{k + 1}"], p.data[f"L{k + 1}"], p.data[f"b{k + 1}"]
            r = r + Lk.T @ ys[k]
            out += float(np.linalg.norm(ys[k] - Sk @ (Lk @ x) - bk))
        return out + float(np.linalg.norm(r))


class _Minkowski:
    """Project y onto L_1(C_1) + L_2(C_2) + ... for boxes C_k: a small
    box-constrained least-squares solved by enumerating which coordinates
    sit at their bounds."""

    defaults = {"n": 2, "p": 2, "c": 2}

    @staticmethod
    def primal_dim(p):
        return p.dims["n"]

    @staticmethod
    def dual_dim(p):
        return p.dims["p"] * p.dims["c"]

    @staticmethod
    def gen(dims, seed, rng):
        n, pk, c = dims["n"], dims["p"], dims["c"]
        data = {"y": 2.0 * rng.standard_normal(n)}
        for k in range(pk):
            data[f"L{k + 1}"] = rng.standard_normal((n, c))
            lo = rng.standard_normal(c)
            data[f"lo{k + 1}"] = lo
            data[f"hi{k + 1}"] = lo + rng.uniform(0.5, 1.5, size=c)
        return data, None

    @staticmethod
    def _stacked(p):
        pk = p.dims["p"]
        L = np.hstack([p.data[f"L{k + 1}"] for k in range(pk)])
        lo = np.concatenate([p.data[f"lo{k + 1}"] for k in range(pk)])
        hi = np.concatenate([p.data[f"hi{k + 1}"] for k in range(pk)])
        return L, lo, hi

    @staticmethod
    def solve(p):
        L, lo, hi = _Minkowski._stacked(p)
        y = p.data["y"]
        total = L.shape[1]
        if total > 6:
            raise OracleError("bound-pattern enumeration supports at most 6 box coordinates")
        from itertools import product
        best = None
        for pattern in product((0, 1, 2), repeat=total):  # free / at lo / at hi
            pat = np.array(pattern)
            c = np.where(pat == 1, lo, np.where(pat == 2, hi, 0.0))
            F = np.flatnonzero(pat == 0)
            if F.size:
                target = y - L[:, pat != 0] @ c[pat != 0]
                cF = np.linalg.lstsq(L[:, F], target, rcond=None)[0]
                if np.any(cF < lo[F] - 1e-10) or np.any(cF > hi[F] + 1e-10):
                    continue
                c[F] = np.clip(cF, lo[F], hi[F])
            g = L.T @ (L @ c - y)
            if np.any(g[pat == 1] < -1e-8) or np.any(g[pat == 2] > 1e-8):
                continue
            if F.size and np.any(np.abs(g[F]) > 1e-8):
                continue
            obj = 0.5 * float((L @ c - y) @ (L @ c - y))
            if best is None or obj < best[0] - 1e-15:
                best = (obj, c)
        if best is None:
            raise OracleError("no bound pattern certified the projection")
        c = best[1]
        return L @ c, c

    @staticmethod
    def residual(p, x, y):
        L, lo, hi = _Minkowski._stacked(p)
        target = p.data["y"]
        if y is None:
            q, _ = _Minkowski.solve(p)
            return float(np.linalg.norm(x - q))
        c = as_array(y)
        t = 1.0 / float(np.linalg.norm(L.T @ L, 2))
        g = L.T @ (L @ c - target)
        fixed = float(np.linalg.norm(c - np.clip(c - t * g, lo, hi)))
        return fixed + float(np.linalg.norm(x - L @ c))


class _Consensus:
    """0 in sum_i N_[lo_i, hi_i](x) + (slope*x + offset) on the line; the
    intervals share a common interior point by construction.  Without the
    affine term any common point solves and the oracle picks the midpoint;
    with it, the oracle bisects the monotone inclusion."""

    defaults = {"p": 3, "slope": 0.0, "offset": 0.0, "identical": 0}

    @staticmethod
    def primal_dim(p):
        return 1

    @staticmethod
    def dual_dim(p):
        return None

    @staticmethod
    def gen(dims, seed, rng):
        pk = dims["p"]
        slope, offset = float(dims["slope"]), float(dims["offset"])
        if slope < 0:
            raise ParameterError("consensus slope must be nonnegative (monotone term)")
        if slope == 0.0 and offset != 0.0:
            raise ParameterError("a constant forward term with zero slope has no zero")
        center = rng.standard_normal()
        if dims.get("identical"):
            lo = np.full(pk, center - 1.0)
            hi = np.full(pk, center + 1.0)
        else:
            lo = center - rng.uniform(0.3, 1.2, size=pk)
            hi = center + rng.uniform(0.3, 1.2, size=pk)
        return {"lo": lo, "hi": hi, "slope": slope, "offset": offset}, None

    @staticmethod
    def solve(p):
        lo = float(np.max(p.data["lo"]))
        hi = float(np.min(p.data["hi"]))
        s, t = float(p.data["slope"]), float(p.data["offset"])
        if s == 0.0:
            return np.array([0.5 * (lo + hi)]), None
        x = _bisect_inclusion(lambda v: s * v + t, lo, hi)
        return np.array([x]), None

    @staticmethod
    def residual(p, x, y):
        v = float(np.asarray(x).reshape(-1)[0])
        lo, hi = p.data["lo"], p.data["hi"]
        dist = float(np.maximum(lo - v, 0.0).sum() + np.maximum(v - hi, 0.0).sum())
        g = float(p.data["slope"]) * v + float(p.data["offset"])
        tol = 1e-12
        lower_active = bool(np.any(np.abs(v - lo) <= tol))
        upper_active = bool(np.any(np.abs(v - hi) <= tol))
        g_lo = -np.inf if upper_active else 0.0
        g_hi = np.inf if lower_active else 0.0
        return dist + max(g_lo - g, 0.0, g - g_hi)


class _BilinearMinimax:
    """Saddle point of (1/2)x'Px + c'x + y'Kx - (1/2)y'Qy - d'y with P, Q
    positive definite; the saddle pair is planted and the oracle re-solves
    the stationarity system densely."""

    defaults = {"n": 3, "m": 2}

    @staticmethod
    def primal_dim(p):
        return p.dims["n"]

    @staticmethod
    def dual_dim(p):
        return p.dims["m"]

    @staticmethod
    def gen(dims, seed, rng):
        n, m = dims["n"], dims["m"]
        Gp = rng.standard_normal((n, n))
        P = Gp.T @ Gp + 0.5 * np.eye(n)
        Gq = rng.standard_normal((m, m))
        Q = Gq.T @ Gq + 0.5 * np.eye(m)
        K = rng.standard_normal((m, n))
        x_star = rng.standard_normal(n)
        y_star = rng.standard_normal(m)
        c = -(P @ x_star + K.T @ y_star)
        d = K @ x_star - Q @ y_star
        return ({"P": P, "c": c, "K": K, "Q": Q, "d": d},
                {"x_star": x_star, "y_star": y_star})

    @staticmethod
    def solve(p):
        n, m = p.dims["n"], p.dims["m"]
        P, c, K, Q, d = (p.data[k] for k in ("P", "c", "K", "Q", "d"))
        M = np.block([[P, K.T], [-K, Q]])
        sol = np.linalg.solve(M, np.concatenate([-c, -d]))
        return sol[:n], sol[n:]

    @staticmethod
    def residual(p, x, y):
        P, c, K, Q, d = (p.data[k] for k in ("P", "c", "K", "Q", "d"))
        if y is None:
            y = np.linalg.solve(Q, K @ x - d)
        return float(np.linalg.norm(P @ x + c + K.T @ y)
                     + np.linalg.norm(Q @ y + d - K @ x))


class _AffineZero:
    """Zero of x -> Sx + b with S = K - K^T + G^T G + nu*Id and a planted
    zero; with nu = 0 and a short G the zero set is a proper affine
    subspace (the oracle then returns the minimum-norm member).  sym=1
    drops the skew part, leaving a symmetric PSD (hence cocoercive) map."""

    defaults = {"n": 4, "nu": 0.1, "rank": 0, "sym": 0}

    @staticmethod
    def primal_dim(p):
        return p.dims["n"]

    @staticmethod
    def dual_dim(p):
        return None

    @staticmethod
    def gen(dims, seed, rng):
        n, nu = dims["n"], float(dims["nu"])
        rank = dims["rank"] or n
        S, K, G = monotone_affine_matrix(rng, n, nu, rank=rank)
        if dims.get("sym"):
            K = np.zeros((n, n))
            S = G.T @ G + nu * np.eye(n)
        x_star = rng.standard_normal(n)
        b = -S @ x_star
        return {"S": S, "b": b, "K": K, "G": G, "nu": nu}, {"x_star": x_star}

    @staticmethod
    def solve(p):
        S, b = p.data["S"], p.data["b"]
        if np.linalg.cond(S) < 1e10:
            return np.linalg.solve(S, -b), None
        return np.linalg.pinv(S) @ (-b), None

    @staticmethod
    def residual(p, x, y):
        return float(np.linalg.norm(p.data["S"] @ x + p.data["b"]))


_KINDS = {
    "two_set": _TwoSet,
    "lasso": _Lasso,
    "split_feasibility": _SplitFeasibility,
    "composite_pd": _CompositePD,
    "strongly_monotone_dual": _StronglyMonotoneDual,
    "minkowski": _Minkowski,
    "consensus": _Consensus,
    "bilinear_minimax": _BilinearMinimax,
    "affine_zero": _AffineZero,
}


def _kind_impl(kind):
    impl = _KINDS.get(kind)
    if impl is None:
        raise ParameterError(
            f"unknown problem kind {kind!r}; known kinds: {', '.join(PROBLEM_KINDS)}")
    return impl


def gen_problem(kind, dims=None, seed=0):
    """Generate a seeded instance of the given kind.

    dims may be an int (the primary dimension n), a dict of named sizes and
    options overriding the kind's defaults, or None.  Every integer size is
    capped at 64 so the brute-force oracles stay cheap.
    """
    impl = _kind_impl(kind)
    merged = dict(impl.defaults)
    if dims is None:
        pass
    elif isinstance(dims, dict):
        unknown = set(dims) - set(merged)
        if unknown:
            raise ParameterError(
                f"unknown {kind} options {sorted(unknown)}; supported: {sorted(merged)}")
        merged.update(dims)
    else:
        first = next(iter(merged))
        merged[first] = int(dims)
    for k, v in merged.items():
        if isinstance(v, (int, np.integer)) and not isinstance(v, bool) and v > _MAX_DIM:
            raise ParameterError(f"dimension {k} = {v} exceeds the oracle cap of {_MAX_DIM}")
    seed = int(seed)
    rng = np.random.default_rng(seed)
    data, planted = impl.gen(merged, seed, rng)
    return ProblemInstance(kind, merged, seed, data, planted)


def oracle_solve(p: ProblemInstance) -> OracleSolution:
    """Brute-force ground truth, with its own residual as the certificate.

    Raises OracleError when the kind/dims combination is outside what the
    enumeration strategies can certify, or when the certificate is worse
    than 1e-10.
    """
    impl = _kind_impl(p.kind)
    primal, dual = impl.solve(p)
    cert = residual_eval(p, (primal, dual))
    if not (cert <= 1e-10):
        raise OracleError(
            f"oracle produced an uncertified solution for {p.kind} "
            f"(residual {cert:.3e} > 1e-10)")
    return OracleSolution(primal, dual, cert)


def residual_eval(p: ProblemInstance, candidate) -> float:
    """Kind-specific inclusion residual of a candidate; 0 iff it solves p.

    The candidate may be a bare primal array, an (x, y) tuple, or anything
    with .x / .y_star attributes.  A missing dual is completed by the
    natural formula where one exists.
    """
    x, y = _candidate_xy(candidate)
    return float(_kind_impl(p.kind).residual(p, as_array(x), y))
