"""Monotone operators as declarative specs with exact resolvent/forward oracles.

Two layers:

* ``ProxAtom`` subclasses: closed convex functions whose prox has a closed
  form (indicators, l1, quadratics, support functions, linear terms).
* ``OperatorSpec`` subclasses: maximally monotone operators built from atoms,
  affine maps, and the calculus rules (inverse, scaling, product, partial
  inverse, Yosida regularization).

Every spec answers ``resolvent(gamma, x)`` where the identity applies and
``forward(x)`` where the operator is single-valued.  Resolvents of affine
operators solve ``(Id + gamma*S) p = x - gamma*b`` with an LU factorization
cached per gamma; atoms with a linear-algebra setup (affine-equality
projections, quadratic prox) do that setup at construction.
"""

from __future__ import annotations

import threading

import numpy as np
import scipy.linalg

from .errors import ParameterError
from .space import LinOp, SpaceLayout, Subspace, Vec, as_array

GAMMA_MIN = 1e-12

__all__ = [
    "GAMMA_MIN",
    "ProxAtom",
    "IndicatorHalfspace",
    "IndicatorBox",
    "IndicatorAffine",
    "IndicatorBall",
    "IndicatorSubspace",
    "L1Norm",
    "QuadraticAtom",
    "SupportOfBox",
    "ZeroAtom",
    "LinearAtom",
    "OperatorSpec",
    "Prox",
    "AffineMonotone",
    "Skew",
    "Cocoercive",
    "LipMonotone",
    "ProductOperator",
    "Inverse",
    "Scaled",
    "PartialInverse",
    "YosidaOperator",
    "NormalConeSubspace",
    "ZeroOperator",
    "GraphPoint",
    "check_gamma",
    "resolvent_eval",
    "inverse_resolvent_eval",
    "yosida_eval",
    "moreau_conjugate_prox",
    "partial_inverse_resolvent",
    "product_resolvent",
    "graph_point_from_resolvent",
    "warped_fb_resolvent",
    "forward_eval",
    "as_affine",
]


def check_gamma(gamma):
    """Validate a resolvent step size and return it as a float."""
    g = float(gamma)
    if not np.isfinite(g) or g < GAMMA_MIN:
        raise ParameterError(f"step size must satisfy gamma >= {GAMMA_MIN:g}, got {gamma!r}")
    return g


# ---------------------------------------------------------------------------
# prox atoms
# ---------------------------------------------------------------------------

class ProxAtom:
    """A closed convex function with a closed-form prox."""

    def prox(self, gamma, x):
        raise NotImplementedError

    def value(self, x):  # pragma: no cover - optional, used by a few oracles
        raise NotImplementedError


class ZeroAtom(ProxAtom):
    """f = 0; prox is the identity."""

    def prox(self, gamma, x):
        return np.array(as_array(x), copy=True)

    def value(self, x):
        return 0.0

    def gradient(self, x):
        return np.zeros_like(as_array(x))


class LinearAtom(ProxAtom):
    """f(x) = <c, x>; prox is a constant shift."""

    def __init__(self, c):
        self.c = as_array(c)

    def prox(self, gamma, x):
        return as_array(x) - float(gamma) * self.c

    def value(self, x):
        return float(self.c @ as_array(x))

    def gradient(self, x):
        return self.c.copy()


class IndicatorHalfspace(ProxAtom):
    """Indicator of {x : <u, x> <= eta}; prox is the projection."""

    def __init__(self, u, eta):
        self.u = as_array(u)
        self.eta = float(eta)
        nrm2 = float(self.u @ self.u)
        if nrm2 <= 0.0:
            raise ParameterError("half-space normal must be nonzero")
        self._nrm2 = nrm2

    def prox(self, gamma, x):
        x = as_array(x)
        slack = float(self.u @ x) - self.eta
        if slack <= 0.0:
            return np.array(x, copy=True)
        return x - (slack / self._nrm2) * self.u

    def value(self, x):
        return 0.0 if float(self.u @ as_array(x)) <= self.eta + 1e-12 else np.inf


class IndicatorBox(ProxAtom):
    """Indicator of the box [lo, hi] (entrywise, infinities allowed)."""

    def __init__(self, lo, hi):
        self.lo = as_array(lo)
        self.hi = as_array(hi)
        if self.lo.shape != self.hi.shape or np.any(self.lo > self.hi):
            raise ParameterError("box bounds must satisfy lo <= hi entrywise")

    def prox(self, gamma, x):
        return np.clip(as_array(x), self.lo, self.hi)

    def value(self, x):
        x = as_array(x)
        inside = np.all(x >= self.lo - 1e-12) and np.all(x <= self.hi + 1e-12)
        return 0.0 if inside else np.inf


class IndicatorBall(ProxAtom):
    """Indicator of the Euclidean ball of given center and radius."""

    def __init__(self, center, radius):
        self.center = as_array(center)
        self.radius = float(radius)
        if self.radius < 0:
            raise ParameterError("ball radius must be nonnegative")

    def prox(self, gamma, x):
        d = as_array(x) - self.center
        nrm = float(np.linalg.norm(d))
        if nrm <= self.radius:
            return np.array(as_array(x), copy=True)
        return self.center + (self.radius / nrm) * d


class IndicatorAffine(ProxAtom):
    """Indicator of the affine set {x : A x = b}.

    The minimum-norm correction map ``pinv(A)`` is computed once at
    construction; infeasible (inconsistent) systems are rejected there.
    """

    def __init__(self, A, b):
        self.A = np.atleast_2d(np.asarray(A, dtype=float))
        self.b = as_array(b)
        if self.A.shape[0] != self.b.shape[0]:
            raise ParameterError("row count of A must match length of b")
        self._pinv = np.linalg.pinv(self.A)
        # consistency: A pinv(A) b == b iff {Ax=b} is nonempty
        if np.linalg.norm(self.A @ (self._pinv @ self.b) - self.b) > 1e-9 * (1.0 + np.linalg.norm(self.b)):
            raise ParameterError("affine system A x = b has no solution; the set is empty")

    def prox(self, gamma, x):
        x = as_array(x)
        return x - self._pinv @ (self.A @ x - self.b)


class IndicatorSubspace(ProxAtom):
    """Indicator of a linear subspace; prox is the orthogonal projector."""

    def __init__(self, subspace: Subspace):
        self.subspace = subspace

    def prox(self, gamma, x):
        return self.subspace.proj(as_array(x))


class L1Norm(ProxAtom):
    """f(x) = weight * ||x||_1; prox is soft thresholding."""

    def __init__(self, weight=1.0):
        self.weight = float(weight)
        if self.weight < 0:
            raise ParameterError("l1 weight must be nonnegative")

    def prox(self, gamma, x):
        x = as_array(x)
        t = float(gamma) * self.weight
        return np.sign(x) * np.maximum(np.abs(x) - t, 0.0)

    def value(self, x):
        return self.weight * float(np.abs(as_array(x)).sum())


class QuadraticAtom(ProxAtom):
    """f(x) = (1/2) x^T Q x + <b, x> with Q symmetric positive semidefinite.

    ``prox`` solves ``(Id + gamma*Q) p = x - gamma*b``; the Cholesky factor of
    ``Id + gamma*Q`` is cached per step size.
    """

    def __init__(self, Q, b=None):
        self.Q = np.atleast_2d(np.asarray(Q, dtype=float))
        n = self.Q.shape[0]
        if self.Q.shape != (n, n):
            raise ParameterError("Q must be square")
        if np.linalg.norm(self.Q - self.Q.T) > 1e-10 * (1.0 + np.linalg.norm(self.Q)):
            raise ParameterError("Q must be symmetric")
        if float(np.linalg.eigvalsh(self.Q)[0]) < -1e-10:
            raise ParameterError("Q must be positive semidefinite")
        self.b = np.zeros(n) if b is None else as_array(b)
        self._chol = {}
        self._lock = threading.Lock()

    def _factor(self, gamma):
        key = float(gamma)
        with self._lock:
            fac = self._chol.get(key)
            if fac is None:
                fac = scipy.linalg.cho_factor(np.eye(self.Q.shape[0]) + key * self.Q)
                self._chol[key] = fac
        return fac

    def prox(self, gamma, x):
        g = float(gamma)
        return scipy.linalg.cho_solve(self._factor(g), as_array(x) - g * self.b)

    def value(self, x):
        x = as_array(x)
        return 0.5 * float(x @ self.Q @ x) + float(self.b @ x)

    def gradient(self, x):
        return self.Q @ as_array(x) + self.b


class SupportOfBox(ProxAtom):
    """Support function of the box [lo, hi]; prox via the conjugate identity.

    prox_{gamma f}(x) = x - gamma * proj_box(x / gamma) since f* is the box
    indicator.
    """

    def __init__(self, lo, hi):
        self._box = IndicatorBox(lo, hi)

    def prox(self, gamma, x):
        g = float(gamma)
        x = as_array(x)
        return x - g * self._box.prox(1.0, x / g)

    def value(self, x):
        x = as_array(x)
        return float(np.sum(np.where(x >= 0, self._box.hi * x, self._box.lo * x)))


# ---------------------------------------------------------------------------
# operator specs
# ---------------------------------------------------------------------------

class OperatorSpec:
    """A maximally monotone operator with whatever oracles it supports."""

    #: set on instances that carry a fixed ambient dimension
    dim = None

    def resolvent(self, gamma, x):
        """Return J_{gamma M} x for an ndarray x.  gamma is assumed validated."""
        raise ParameterError(f"{type(self).__name__} does not support resolvent evaluation")

    def forward(self, x):
        """Return M x for single-valued M (ndarray in, ndarray out)."""
        raise ParameterError(f"{type(self).__name__} is not forward-evaluable")

    @property
    def forward_evaluable(self):
        return type(self).forward is not OperatorSpec.forward


class Prox(OperatorSpec):
    """The subdifferential of a ProxAtom; resolvent is the atom's prox."""

    def __init__(self, atom: ProxAtom, dim=None):
        self.atom = atom
        self.dim = dim

    def resolvent(self, gamma, x):
        return self.atom.prox(gamma, x)

    def forward(self, x):
        grad = getattr(self.atom, "gradient", None)
        if grad is None:
            raise ParameterError(f"{type(self.atom).__name__} has no single-valued forward map")
        return grad(x)


class ZeroOperator(OperatorSpec):
    """The zero operator: J = Id, forward = 0."""

    def __init__(self, dim=None):
        self.dim = dim

    def resolvent(self, gamma, x):
        return np.array(as_array(x), copy=True)

    def forward(self, x):
        return np.zeros_like(as_array(x))


class AffineMonotone(OperatorSpec):
    """M x = S x + b with S + S^T positive semidefinite.

    Monotonicity is checked at construction (smallest eigenvalue of the
    symmetric part must exceed -1e-10).  The LU factorization of
    ``Id + gamma*S`` is cached per gamma.
    """

    def __init__(self, S, b=None):
        if isinstance(S, LinOp):
            S = S.matrix
        self.S = np.atleast_2d(np.asarray(S, dtype=float))
        n = self.S.shape[0]
        if self.S.shape != (n, n):
            raise ParameterError("S must be square")
        sym_min = float(np.linalg.eigvalsh(0.5 * (self.S + self.S.T))[0])
        if sym_min < -1e-10:
            raise ParameterError(
                f"S + S^T must be positive semidefinite; smallest eigenvalue {sym_min:.3e}")
        self.b = np.zeros(n) if b is None else as_array(b)
        if self.b.shape[0] != n:
            raise ParameterError("b must match the dimension of S")
        self.dim = n
        self._lu = {}
        self._lock = threading.Lock()

    def _factor(self, gamma):
        key = float(gamma)
        with self._lock:
            fac = self._lu.get(key)
            if fac is None:
                fac = scipy.linalg.lu_factor(np.eye(self.dim) + key * self.S)
                self._lu[key] = fac
        return fac

    def resolvent(self, gamma, x):
        g = float(gamma)
        return scipy.linalg.lu_solve(self._factor(g), as_array(x) - g * self.b)

    def forward(self, x):
        return self.S @ as_array(x) + self.b

    @property
    def beta(self):
        """Lipschitz constant of the map: the spectral norm of S."""
        if not hasattr(self, "_beta"):
            self._beta = float(np.linalg.norm(self.S, 2))
        return self._beta

    @property
    def alpha(self):
        """Cocoercivity constant 1/||S|| for symmetric S; None otherwise."""
        if not hasattr(self, "_alpha"):
            asym = float(np.linalg.norm(self.S - self.S.T))
            if asym > 1e-12 * (1.0 + float(np.linalg.norm(self.S))):
                self._alpha = None
            else:
                top = float(np.linalg.eigvalsh(self.S)[-1])
                self._alpha = 1.0 / top if top > 0.0 else None
        return self._alpha


class Skew(AffineMonotone):
    """M x = S x with S^T = -S (checked at construction)."""

    def __init__(self, S):
        Smat = S.matrix if isinstance(S, LinOp) else np.atleast_2d(np.asarray(S, dtype=float))
        if np.linalg.norm(Smat + Smat.T) > 1e-10 * (1.0 + np.linalg.norm(Smat)):
            raise ParameterError("skew spec requires S^T = -S")
        super().__init__(Smat, None)


class _ForwardOnly(OperatorSpec):
    """Shared plumbing for forward-only specs defined by a callable."""

    def __init__(self, func, dim):
        self._func = func
        self.dim = int(dim)

    def forward(self, x):
        return as_array(self._func(as_array(x)))


class Cocoercive(_ForwardOnly):
    """A single-valued map declared alpha-cocoercive.

    ``alpha`` is the caller's claim; ``audit`` draws random probe pairs and
    rejects the claim if the cocoercivity inequality fails.  The audit never
    tightens the constant.
    """

    def __init__(self, func, alpha, dim):
        super().__init__(func, dim)
        self.alpha = float(alpha)
        if self.alpha <= 0:
            raise ParameterError("cocoercivity constant must satisfy alpha > 0")

    def audit(self, trials=200, seed=0, scale=1.0):
        rng = np.random.default_rng(seed)
        worst = np.inf
        for _ in range(trials):
            x = scale * rng.standard_normal(self.dim)
            y = scale * rng.standard_normal(self.dim)
            dB = self.forward(x) - self.forward(y)
            margin = float((x - y) @ dB) - self.alpha * float(dB @ dB)
            worst = min(worst, margin)
        if worst < -1e-8:
            raise ParameterError(
                f"claimed cocoercivity constant alpha={self.alpha:g} rejected: "
                f"probe margin {worst:.3e}")
        return worst


class LipMonotone(_ForwardOnly):
    """A single-valued monotone map declared beta-Lipschitz.

    ``audit`` probes both monotonicity and the Lipschitz bound; it can only
    reject the claim, never improve it.
    """

    def __init__(self, func, beta, dim):
        super().__init__(func, dim)
        self.beta = float(beta)
        if self.beta <= 0:
            raise ParameterError("Lipschitz constant must satisfy beta > 0")

    def audit(self, trials=200, seed=0, scale=1.0):
        rng = np.random.default_rng(seed)
        worst = np.inf
        for _ in range(trials):
            x = scale * rng.standard_normal(self.dim)
            y = scale * rng.standard_normal(self.dim)
            dB = self.forward(x) - self.forward(y)
            mono = float((x - y) @ dB)
            lip = self.beta * float(np.linalg.norm(x - y)) - float(np.linalg.norm(dB))
            worst = min(worst, mono, lip)
        if worst < -1e-8:
            raise ParameterError(
                f"claimed Lipschitz-monotone constants rejected: probe margin {worst:.3e}")
        return worst


class ProductOperator(OperatorSpec):
    """Factor-wise product M = M_1 x ... x M_m on a product layout."""

    def __init__(self, layout: SpaceLayout, ops):
        self.layout = layout
        self.ops = tuple(ops)
        if len(self.ops) != len(layout.factors):
            raise ParameterError("one factor operator per layout factor required")
        self.dim = layout.total_dim

    def resolvent(self, gamma, x):
        parts = self.layout.split(as_array(x))
        return self.layout.concat([op.resolvent(gamma, p) for op, p in zip(self.ops, parts)])

    def forward(self, x):
        parts = self.layout.split(as_array(x))
        return self.layout.concat([op.forward(p) for op, p in zip(self.ops, parts)])

    @property
    def forward_evaluable(self):
        return all(op.forward_evaluable for op in self.ops)


class Inverse(OperatorSpec):
    """The inverse operator M^{-1}, graph {(u, x) : (x, u) in gra M}."""

    def __init__(self, inner: OperatorSpec):
        self.inner = inner
        self.dim = inner.dim

    def resolvent(self, gamma, x):
        g = float(gamma)
        x = as_array(x)
        # J_{gamma M^{-1}} x = x - gamma J_{M/gamma}(x/gamma)
        return x - g * self.inner.resolvent(1.0 / g, x / g)


class Scaled(OperatorSpec):
    """The operator c*M for c > 0."""

    def __init__(self, c, inner: OperatorSpec):
        self.c = float(c)
        if self.c <= 0:
            raise ParameterError("scaling requires c > 0")
        self.inner = inner
        self.dim = inner.dim

    def resolvent(self, gamma, x):
        return self.inner.resolvent(float(gamma) * self.c, x)

    def forward(self, x):
        return self.c * self.inner.forward(x)

    @property
    def forward_evaluable(self):
        return self.inner.forward_evaluable


class PartialInverse(OperatorSpec):
    """The partial inverse of M with respect to a closed subspace V.

    Its graph swaps the V-perp components of points and covectors.  Only the
    unit-step resolvent has the simple projection formula, so ``resolvent``
    rejects gamma != 1.
    """

    def __init__(self, inner: OperatorSpec, V: Subspace):
        self.inner = inner
        self.V = V
        self.dim = V.dim_ambient

    def resolvent(self, gamma, x):
        if abs(float(gamma) - 1.0) > 1e-14:
            raise ParameterError("partial inverse resolvent requires gamma == 1")
        x = as_array(x)
        p = self.inner.resolvent(1.0, x)
        return self.V.proj(p) + self.V.proj_perp(x - p)


class YosidaOperator(OperatorSpec):
    """The Yosida regularization (Id - J_{rho M}) / rho of an inner operator.

    Single-valued, rho-cocoercive, and with the same zeros as M.  Its own
    resolvent reduces to a resolvent of M at step gamma + rho.
    """

    def __init__(self, inner: OperatorSpec, rho):
        self.inner = inner
        self.rho = check_gamma(rho)
        self.dim = inner.dim

    def forward(self, x):
        x = as_array(x)
        return (x - self.inner.resolvent(self.rho, x)) / self.rho

    def resolvent(self, gamma, x):
        g = float(gamma)
        x = as_array(x)
        shrink = g / (g + self.rho)
        return x - shrink * (x - self.inner.resolvent(g + self.rho, x))


class NormalConeSubspace(OperatorSpec):
    """Normal cone of a closed subspace V; the resolvent is proj_V for any gamma."""

    def __init__(self, V: Subspace):
        self.V = V
        self.dim = V.dim_ambient

    def resolvent(self, gamma, x):
        return self.V.proj(as_array(x))


# ---------------------------------------------------------------------------
# operations
# ---------------------------------------------------------------------------

def _unwrap(x):
    if isinstance(x, Vec):
        return x.data, x.layout
    return as_array(x), None


def _rewrap(arr, layout):
    return Vec(layout, arr) if layout is not None else arr


def resolvent_eval(M: OperatorSpec, gamma, x):
    """Evaluate J_{gamma M} x = (Id + gamma M)^{-1} x.

    Parameters
    ----------
    M : OperatorSpec
    gamma : float, must be >= 1e-12
    x : Vec or array_like

    Returns
    -------
    Same container kind as ``x`` (Vec in, Vec out).
    """
    g = check_gamma(gamma)
    arr, layout = _unwrap(x)
    return _rewrap(M.resolvent(g, arr), layout)


def inverse_resolvent_eval(M: OperatorSpec, gamma, x):
    """Evaluate J_{gamma M^{-1}} x via x - gamma * J_{M/gamma}(x/gamma)."""
    g = check_gamma(gamma)
    arr, layout = _unwrap(x)
    return _rewrap(arr - g * M.resolvent(1.0 / g, arr / g), layout)


def yosida_eval(M: OperatorSpec, gamma, x):
    """Evaluate the Yosida regularization (x - J_{gamma M} x) / gamma."""
    g = check_gamma(gamma)
    arr, layout = _unwrap(x)
    return _rewrap((arr - M.resolvent(g, arr)) / g, layout)


def moreau_conjugate_prox(atom: ProxAtom, gamma, x):
    """Evaluate prox_{f*/gamma}(x/gamma) through the Moreau decomposition.

    Uses x = prox_{gamma f} x + gamma * prox_{f*/gamma}(x/gamma), so only the
    primal prox of ``atom`` is ever called.
    """
    g = check_gamma(gamma)
    arr, layout = _unwrap(x)
    return _rewrap((arr - as_array(atom.prox(g, arr))) / g, layout)


def partial_inverse_resolvent(M: OperatorSpec, V: Subspace, x):
    """Unit resolvent of the partial inverse of M with respect to V.

    Computes p = J_M x once and recombines: proj_V p + proj_{V-perp}(x - p).
    """
    arr, layout = _unwrap(x)
    p = M.resolvent(1.0, arr)
    return _rewrap(V.proj(p) + V.proj_perp(arr - p), layout)


def product_resolvent(ops, gamma, x: Vec):
    """Factor-wise resolvent on a product space; x must be a Vec."""
    g = check_gamma(gamma)
    if not isinstance(x, Vec):
        raise ParameterError("product resolvent needs a Vec to know the factor layout")
    if len(ops) != len(x.layout.factors):
        raise ParameterError("one operator per factor required")
    parts = [op.resolvent(g, p) for op, p in zip(ops, x.parts())]
    return Vec.from_parts(x.layout, parts)


class GraphPoint:
    """A pair (point, covector) lying on the graph of an operator."""

    __slots__ = ("point", "covector")

    def __init__(self, point, covector):
        self.point = point
        self.covector = covector

    def __iter__(self):
        return iter((self.point, self.covector))

    def __repr__(self):
        return f"GraphPoint(point={self.point!r}, covector={self.covector!r})"


def graph_point_from_resolvent(M: OperatorSpec, gamma, x):
    """One resolvent call turned into a graph point: (p, (x-p)/gamma) in gra M."""
    g = check_gamma(gamma)
    arr, layout = _unwrap(x)
    p = M.resolvent(g, arr)
    return GraphPoint(_rewrap(p, layout), _rewrap((arr - p) / g, layout))


def warped_fb_resolvent(A: OperatorSpec, B: OperatorSpec, gamma, x):
    """Forward-backward map J_{gamma A}(x - gamma B x); B may be None for B = 0."""
    g = check_gamma(gamma)
    arr, layout = _unwrap(x)
    shifted = arr if B is None else arr - g * as_array(B.forward(arr))
    return _rewrap(A.resolvent(g, shifted), layout)


def forward_eval(M: OperatorSpec, x):
    """Evaluate a single-valued operator; raises if M has no forward oracle."""
    arr, layout = _unwrap(x)
    return _rewrap(as_array(M.forward(arr)), layout)


def as_affine(M: OperatorSpec, dim=None):
    """Return (S, b) with M x = S x + b if M is affine in a recognizable way.

    Understands AffineMonotone/Skew directly, Zero, scaled, inverse (when the
    matrix part is invertible) and product combinations, and prox specs of
    quadratic or linear atoms.  Returns None when no affine form is available.
    """
    if isinstance(M, AffineMonotone):
        return M.S.copy(), M.b.copy()
    if isinstance(M, ZeroOperator):
        n = M.dim if M.dim is not None else dim
        if n is None:
            return None
        return np.zeros((n, n)), np.zeros(n)
    if isinstance(M, Scaled):
        inner = as_affine(M.inner, dim)
        if inner is None:
            return None
        return M.c * inner[0], M.c * inner[1]
    if isinstance(M, Inverse):
        inner = as_affine(M.inner, dim)
        if inner is None:
            return None
        S, b = inner
        if S.size == 0 or np.linalg.cond(S) > 1e12:
            return None
        Sinv = np.linalg.inv(S)
        return Sinv, -Sinv @ b
    if isinstance(M, Prox):
        if isinstance(M.atom, QuadraticAtom):
            return M.atom.Q.copy(), M.atom.b.copy()
        if isinstance(M.atom, LinearAtom):
            n = M.atom.c.shape[0]
            return np.zeros((n, n)), M.atom.c.copy()
        if isinstance(M.atom, ZeroAtom):
            n = M.dim if M.dim is not None else dim
            if n is None:
                return None
            return np.zeros((n, n)), np.zeros(n)
        return None
    if isinstance(M, ProductOperator):
        blocks = []
        for op, d in zip(M.ops, M.layout.factors):
            part = as_affine(op, d)
            if part is None:
                return None
            blocks.append(part)
        S = scipy.linalg.block_diag(*[p[0] for p in blocks])
        b = np.concatenate([p[1] for p in blocks])
        return S, b
    return None
