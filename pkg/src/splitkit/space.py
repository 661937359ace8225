"""Dense vectors over products of Euclidean factors, linear maps, metric kernels.

Everything is desk-scale and dense: a point is a flat float64 array plus a
layout describing how it splits into factors, and a linear operator is an
explicit matrix with an explicit adjoint (by default the transpose).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "SpaceLayout",
    "Vec",
    "LinOp",
    "MetricKernel",
    "Subspace",
    "estimate_operator_norm",
    "adjoint_consistency_check",
]

# Uniform floating-point policy: tolerances are relative with this absolute floor.
ABS_FLOOR = 1e-12


def as_array(x) -> np.ndarray:
    """Coerce scalars/lists/Vec to a 1-D float64 array."""
    if isinstance(x, Vec):
        return x.data
    a = np.asarray(x, dtype=float)
    if a.ndim == 0:
        a = a.reshape(1)
    return np.atleast_1d(a)


@dataclass(frozen=True)
class SpaceLayout:
    """Shape of a product space: one dimension per factor."""

    factors: tuple[int, ...]

    def __post_init__(self):
        factors = tuple(int(f) for f in self.factors)
        if not factors or any(f <= 0 for f in factors):
            raise ValueError(f"factors must be positive, got {factors}")
        object.__setattr__(self, "factors", factors)

    @property
    def total_dim(self) -> int:
        return sum(self.factors)

    @property
    def offsets(self) -> tuple[int, ...]:
        out, acc = [], 0
        for f in self.factors:
            out.append(acc)
            acc += f
        return tuple(out)

    def slices(self) -> tuple[slice, ...]:
        return tuple(slice(o, o + f) for o, f in zip(self.offsets, self.factors))

    def split(self, data: np.ndarray) -> list[np.ndarray]:
        data = as_array(data)
        if data.shape != (self.total_dim,):
            raise ValueError(f"expected length {self.total_dim}, got {data.shape}")
        return [data[s] for s in self.slices()]

    def concat(self, parts) -> np.ndarray:
        parts = [as_array(p) for p in parts]
        if tuple(len(p) for p in parts) != self.factors:
            raise ValueError(
                f"part lengths {tuple(len(p) for p in parts)} do not match factors {self.factors}"
            )
        return np.concatenate(parts)


def flat(n: int) -> SpaceLayout:
    """Single-factor layout of dimension n."""
    return SpaceLayout((n,))


@dataclass(frozen=True)
class Vec:
    """A point of a product space: a layout and flat coordinates.

    Vec is immutable; arithmetic returns fresh instances.  All engine code
    works on these so traces and invariant checks see one carrier type.
    """

    layout: SpaceLayout
    data: np.ndarray

    def __post_init__(self):
        a = np.array(self.data, dtype=float)  # defensive copy
        if a.shape != (self.layout.total_dim,):
            raise ValueError(
                f"data length {a.shape} does not match layout dim {self.layout.total_dim}"
            )
        if not np.all(np.isfinite(a)):
            raise ValueError("Vec entries must be finite")
        a.flags.writeable = False
        object.__setattr__(self, "data", a)

    # -- constructors ------------------------------------------------------
    @staticmethod
    def of(layout: SpaceLayout, data) -> "Vec":
        return Vec(layout, as_array(data))

    @staticmethod
    def zeros(layout: SpaceLayout) -> "Vec":
        return Vec(layout, np.zeros(layout.total_dim))

    @staticmethod
    def from_parts(layout: SpaceLayout, parts) -> "Vec":
        return Vec(layout, layout.concat(parts))

    # -- product structure -------------------------------------------------
    def parts(self) -> list[np.ndarray]:
        return self.layout.split(self.data)

    def part(self, i: int) -> np.ndarray:
        return self.data[self.layout.slices()[i]]

    # -- arithmetic ---------------------------------------------------------
    def __add__(self, other: "Vec") -> "Vec":
        return Vec(self.layout, self.data + other.data)

    def __sub__(self, other: "Vec") -> "Vec":
        return Vec(self.layout, self.data - other.data)

    def __mul__(self, s: float) -> "Vec":
        return Vec(self.layout, self.data * float(s))

    __rmul__ = __mul__

    def __neg__(self) -> "Vec":
        return Vec(self.layout, -self.data)

    def inner(self, other: "Vec") -> float:
        return float(np.dot(self.data, other.data))

    def norm(self) -> float:
        return float(np.linalg.norm(self.data))

    def __len__(self) -> int:
        return self.layout.total_dim


class LinOp:
    """Dense linear operator with an explicit adjoint.

    Parameters
    ----------
    matrix : (rows, cols) array
        Forward action.
    adjoint_matrix : (cols, rows) array, optional
        Adjoint action; defaults to ``matrix.T``.  A mismatched adjoint is
        allowed at construction so consistency checks have something to flag.
    """

    def __init__(self, matrix, adjoint_matrix=None):
        self.matrix = np.atleast_2d(np.asarray(matrix, dtype=float))
        self.adjoint_matrix = (
            self.matrix.T.copy()
            if adjoint_matrix is None
            else np.atleast_2d(np.asarray(adjoint_matrix, dtype=float))
        )
        if self.adjoint_matrix.shape != self.matrix.T.shape:
            raise ValueError("adjoint shape must be the transpose shape")

    @property
    def rows(self) -> int:
        return self.matrix.shape[0]

    @property
    def cols(self) -> int:
        return self.matrix.shape[1]

    def apply(self, x) -> np.ndarray:
        return self.matrix @ as_array(x)

    def adjoint_apply(self, y) -> np.ndarray:
        return self.adjoint_matrix @ as_array(y)

    __call__ = apply

    @staticmethod
    def identity(n: int) -> "LinOp":
        return LinOp(np.eye(n))

    @staticmethod
    def zero(rows: int, cols: int) -> "LinOp":
        return LinOp(np.zeros((rows, cols)))

    def __repr__(self):
        return f"LinOp({self.rows}x{self.cols})"


@dataclass
class MetricKernel:
    """Self-adjoint strongly monotone kernel U with constant beta > 0."""

    U: LinOp
    beta: float

    def __post_init__(self):
        M = self.U.matrix
        if M.shape[0] != M.shape[1]:
            raise ValueError("kernel must be square")
        if not np.allclose(M, M.T, atol=1e-10, rtol=1e-10):
            raise ValueError("kernel must be self-adjoint (U = U*)")
        if self.beta <= 0:
            raise ValueError("strong-monotonicity constant beta must be > 0")
        lo = float(np.linalg.eigvalsh(M)[0])
        if lo < self.beta - 1e-9:
            raise ValueError(
                f"kernel smallest eigenvalue {lo:.6g} is below the claimed beta {self.beta:.6g}"
            )

    @property
    def dim(self) -> int:
        return self.U.matrix.shape[0]

    def apply(self, x) -> np.ndarray:
        return self.U.apply(x)

    def quad(self, x) -> float:
        """<Ux, x>."""
        x = as_array(x)
        return float(x @ self.U.matrix @ x)


class Subspace:
    """Linear subspace of R^n stored as an orthonormal basis + cached projector."""

    def __init__(self, basis):
        gen = np.atleast_2d(np.asarray(basis, dtype=float))  # rows generate V
        if gen.shape[1] == 0:
            raise ValueError("ambient dimension must be positive")
        self.dim_ambient = gen.shape[1]
        if np.linalg.norm(gen) == 0:
            self.onb = np.zeros((self.dim_ambient, 0))
        else:
            q, r = np.linalg.qr(gen.T)  # (n, k)
            keep = np.abs(np.diag(r)) > 1e-12
            self.onb = q[:, keep]
        self.projector = self.onb @ self.onb.T

    @staticmethod
    def from_basis(rows) -> "Subspace":
        return Subspace(rows)

    @staticmethod
    def trivial(n: int) -> "Subspace":
        """The zero subspace {0} of R^n."""
        return Subspace(np.zeros((1, n)))

    @staticmethod
    def whole(n: int) -> "Subspace":
        return Subspace(np.eye(n))

    @staticmethod
    def from_equations(A) -> "Subspace":
        """Null space {x : Ax = 0}."""
        A = np.atleast_2d(np.asarray(A, dtype=float))
        _, s, vt = np.linalg.svd(A)
        rank = int(np.sum(s > 1e-12 * max(1.0, s[0] if len(s) else 1.0)))
        return Subspace(vt[rank:]) if rank < A.shape[1] else Subspace.trivial(A.shape[1])

    @staticmethod
    def coordinates(n: int, idx) -> "Subspace":
        """Span of the given coordinate axes."""
        rows = np.zeros((len(idx), n))
        for r, i in enumerate(idx):
            rows[r, i] = 1.0
        return Subspace(rows)

    @staticmethod
    def consensus(p: int, d: int) -> "Subspace":
        """Diagonal subspace {(x, ..., x)} of (R^d)^p."""
        rows = np.zeros((d, p * d))
        for j in range(d):
            rows[j, j::d] = 1.0
        return Subspace(rows)

    @property
    def dim(self) -> int:
        return self.onb.shape[1]

    def proj(self, x) -> np.ndarray:
        return self.projector @ as_array(x)

    def proj_perp(self, x) -> np.ndarray:
        x = as_array(x)
        return x - self.projector @ x

    def contains(self, x, tol: float = 1e-10) -> bool:
        x = as_array(x)
        return float(np.linalg.norm(self.proj_perp(x))) <= tol * (1.0 + np.linalg.norm(x))


def estimate_operator_norm(L: LinOp, iters: int = 200, seed: int = 0) -> float:
    """Safe overestimate of ||L|| by power iteration on L*L.

    Runs ``iters`` power steps from a seeded random start and returns the
    Rayleigh-quotient estimate of the top singular value times a 1.05 safety
    factor, so step-size bounds of the form gamma <= c/||L|| are never
    violated by an underestimate.  Returns 0 for the zero operator.
    """
    A = L.adjoint_matrix @ L.matrix  # L*L, symmetric PSD
    n = A.shape[0]
    if np.linalg.norm(L.matrix) == 0.0:
        return 0.0
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(n)
    v /= np.linalg.norm(v)
    for _ in range(int(iters)):
        w = A @ v
        nw = np.linalg.norm(w)
        if nw == 0.0:  # start landed in the kernel; re-draw
            v = rng.standard_normal(n)
            v /= np.linalg.norm(v)
            continue
        v = w / nw
    sigma_sq = float(v @ A @ v)
    return 1.05 * float(np.sqrt(max(sigma_sq, 0.0)))


def adjoint_consistency_check(L: LinOp, trials: int = 100, seed: int = 0) -> float:
    """Max normalized residual |<Lx,y> - <x,L*y>| / (1 + |x||y|) over random probes."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(int(trials)):
        x = rng.standard_normal(L.cols)
        y = rng.standard_normal(L.rows)
        lhs = float(np.dot(L.apply(x), y))
        rhs = float(np.dot(x, L.adjoint_apply(y)))
        res = abs(lhs - rhs) / (1.0 + np.linalg.norm(x) * np.linalg.norm(y))
        worst = max(worst, res)
    return worst
