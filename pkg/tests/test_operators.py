import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from splitkit.errors import ParameterError
from splitkit.operators import (AffineMonotone, Cocoercive, IndicatorAffine,
                                IndicatorBall, IndicatorBox,
                                IndicatorHalfspace, IndicatorSubspace,
                                Inverse, L1Norm, LinearAtom, LipMonotone,
                                NormalConeSubspace, PartialInverse,
                                ProductOperator, Prox, QuadraticAtom, Scaled,
                                Skew, SupportOfBox, YosidaOperator, ZeroAtom,
                                ZeroOperator, as_affine, check_gamma,
                                forward_eval, graph_point_from_resolvent,
                                inverse_resolvent_eval, moreau_conjugate_prox,
                                partial_inverse_resolvent, product_resolvent,
                                resolvent_eval, warped_fb_resolvent,
                                yosida_eval)
from splitkit.space import SpaceLayout, Subspace, Vec


def _coords(n=4):
    return st.lists(st.floats(-50, 50, allow_nan=False), min_size=n, max_size=n)


# ---------------------------------------------------------------------------
# atoms
# ---------------------------------------------------------------------------

def test_zero_and_linear_atoms():
    x = np.array([1.0, -2.0])
    np.testing.assert_array_equal(ZeroAtom().prox(0.5, x), x)
    shifted = LinearAtom([2.0, 0.0]).prox(0.25, x)
    np.testing.assert_array_equal(shifted, [0.5, -2.0])


def test_halfspace_prox_projects_onto_boundary():
    h = IndicatorHalfspace([1.0, 1.0], 1.0)
    inside = h.prox(1.0, np.array([0.0, 0.5]))
    np.testing.assert_array_equal(inside, [0.0, 0.5])
    p = h.prox(1.0, np.array([2.0, 2.0]))
    np.testing.assert_allclose(p, [0.5, 0.5])
    assert abs(p @ [1.0, 1.0] - 1.0) < 1e-14


def test_box_and_ball_prox():
    box = IndicatorBox([-1.0, 0.0], [1.0, 2.0])
    np.testing.assert_array_equal(box.prox(3.0, np.array([5.0, -5.0])), [1.0, 0.0])
    ball = IndicatorBall([1.0, 0.0], 2.0)
    p = ball.prox(1.0, np.array([5.0, 0.0]))
    np.testing.assert_allclose(p, [3.0, 0.0])
    np.testing.assert_array_equal(ball.prox(1.0, np.array([2.0, 0.0])), [2.0, 0.0])


def test_affine_prox_solves_least_change():
    A = np.array([[1.0, 1.0, 0.0], [0.0, 1.0, 1.0]])
    b = np.array([2.0, 1.0])
    atom = IndicatorAffine(A, b)
    x = np.array([5.0, -1.0, 3.0])
    p = atom.prox(1.0, x)
    np.testing.assert_allclose(A @ p, b, atol=1e-12)
    # correction is orthogonal to the constraint null space
    V = Subspace.from_equations(A)
    np.testing.assert_allclose(V.proj(x - p), np.zeros(3), atol=1e-12)


def test_affine_atom_rejects_inconsistent_system():
    A = np.array([[1.0, 0.0], [1.0, 0.0]])
    with pytest.raises(ParameterError):
        IndicatorAffine(A, [0.0, 1.0])


def test_l1_prox_is_soft_thresholding():
    atom = L1Norm(2.0)
    x = np.array([3.0, -0.5, -4.0])
    np.testing.assert_allclose(atom.prox(0.5, x), [2.0, 0.0, -3.0])
    assert atom.value(x) == 2.0 * 7.5


def test_quadratic_prox_solves_shifted_system():
    rng = np.random.default_rng(2)
    B = rng.standard_normal((3, 3))
    Q = B.T @ B
    b = rng.standard_normal(3)
    atom = QuadraticAtom(Q, b)
    x = rng.standard_normal(3)
    p = atom.prox(0.7, x)
    np.testing.assert_allclose(p + 0.7 * (Q @ p + b), x, atol=1e-10)
    np.testing.assert_allclose(atom.gradient(p), Q @ p + b)


def test_support_of_unit_box_is_l1_norm():
    # sigma_{[-1,1]^n}(x) = ||x||_1, so both proxes must coincide
    sup = SupportOfBox([-1.0, -1.0, -1.0], [1.0, 1.0, 1.0])
    soft = L1Norm(1.0)
    rng = np.random.default_rng(4)
    for _ in range(20):
        g = float(rng.uniform(0.1, 3.0))
        x = rng.standard_normal(3) * 3
        np.testing.assert_allclose(sup.prox(g, x), soft.prox(g, x), atol=1e-12)


@settings(max_examples=60, deadline=None)
@given(_coords(), st.floats(0.05, 20.0))
def test_moreau_identity_for_l1(xs, gamma):
    """x = prox_{g f}(x) + g * prox_{f*/g}(x/g), and the conjugate prox of the
    l1 norm is the projection onto the weight box."""
    x = np.array(xs)
    atom = L1Norm(1.5)
    dual = moreau_conjugate_prox(atom, gamma, x)
    np.testing.assert_allclose(atom.prox(gamma, x) + gamma * dual, x, atol=1e-9)
    np.testing.assert_allclose(dual, np.clip(x / gamma, -1.5, 1.5), atol=1e-9)


# ---------------------------------------------------------------------------
# operator specs
# ---------------------------------------------------------------------------

def test_check_gamma_bounds():
    assert check_gamma(0.5) == 0.5
    for bad in (0.0, -1.0, 1e-13):
        with pytest.raises(ParameterError):
            check_gamma(bad)


def test_affine_monotone_resolvent_solves_linear_system():
    rng = np.random.default_rng(7)
    K = rng.standard_normal((4, 4))
    S = K - K.T + np.eye(4)
    b = rng.standard_normal(4)
    M = AffineMonotone(S, b)
    x = rng.standard_normal(4)
    p = resolvent_eval(M, 2.0, x)
    np.testing.assert_allclose(p + 2.0 * (S @ p + b), x, atol=1e-10)
    np.testing.assert_allclose(forward_eval(M, x), S @ x + b)


def test_affine_monotone_rejects_nonmonotone():
    with pytest.raises(ParameterError):
        AffineMonotone(np.array([[-1.0, 0.0], [0.0, 1.0]]))


def test_affine_constants_alpha_and_beta():
    S = np.diag([1.0, 4.0])
    M = AffineMonotone(S)
    assert abs(M.beta - 4.0) < 1e-12
    assert abs(M.alpha - 0.25) < 1e-12
    # non-symmetric monotone part has no cocoercivity constant
    skew = AffineMonotone(np.array([[0.0, 1.0], [-1.0, 0.0]]))
    assert skew.alpha is None


def test_skew_requires_antisymmetry():
    Skew(np.array([[0.0, 2.0], [-2.0, 0.0]]))
    with pytest.raises(ParameterError):
        Skew(np.eye(2))


def test_inverse_resolvent_routes_agree():
    rng = np.random.default_rng(9)
    B = rng.standard_normal((3, 3))
    S = B @ B.T + 0.5 * np.eye(3)
    M = AffineMonotone(S, rng.standard_normal(3))
    x = rng.standard_normal(3)
    g = 1.3
    via_wrapper = resolvent_eval(Inverse(M), g, x)
    via_identity = inverse_resolvent_eval(M, g, x)
    np.testing.assert_allclose(via_wrapper, via_identity, atol=1e-12)
    # membership: p = J_{g M^{-1}} x means ((x-p)/g, p) lies on gra M
    p = via_identity
    u = (x - p) / g
    np.testing.assert_allclose(S @ u + M.b, p, atol=1e-9)


def test_scaled_resolvent_matches_step_rescaling():
    M = AffineMonotone(np.eye(2), np.array([1.0, 0.0]))
    x = np.array([2.0, 2.0])
    np.testing.assert_allclose(Scaled(3.0, M).resolvent(0.5, x),
                               M.resolvent(1.5, x), atol=1e-14)
    with pytest.raises(ParameterError):
        Scaled(-1.0, M)


@settings(max_examples=40, deadline=None)
@given(_coords(3), _coords(3), st.floats(0.1, 5.0))
def test_yosida_is_rho_cocoercive(xs, ys, rho):
    atom = IndicatorBox([-1.0, 0.0, -2.0], [1.0, 3.0, 2.0])
    B = Prox(atom, dim=3)
    x, y = np.array(xs), np.array(ys)
    yx = yosida_eval(B, rho, x)
    yy = yosida_eval(B, rho, y)
    d = yx - yy
    assert (x - y) @ d >= rho * float(d @ d) - 1e-9


def test_yosida_operator_resolvent_identity():
    rng = np.random.default_rng(11)
    B = rng.standard_normal((3, 3))
    M = AffineMonotone(B @ B.T + np.eye(3))
    Y = YosidaOperator(M, 0.8)
    x = rng.standard_normal(3)
    np.testing.assert_allclose(Y.forward(x), yosida_eval(M, 0.8, x), atol=1e-13)
    # J_{g Y} x = x - g/(g+rho) (x - J_{g+rho}x); verify the graph membership
    g = 1.7
    p = Y.resolvent(g, x)
    np.testing.assert_allclose(p + g * Y.forward(p), x, atol=1e-9)


def test_product_operator_acts_blockwise():
    layout = SpaceLayout([2, 2])
    P = ProductOperator(layout, [Prox(IndicatorBox([-1, -1], [1, 1])),
                                 ZeroOperator(2)])
    x = np.array([4.0, -3.0, 7.0, -7.0])
    np.testing.assert_array_equal(P.resolvent(1.0, x), [1.0, -1.0, 7.0, -7.0])
    v = Vec.of(layout, x)
    out = product_resolvent([Prox(IndicatorBox([-1, -1], [1, 1])), ZeroOperator(2)], 1.0, v)
    np.testing.assert_array_equal(out.data, [1.0, -1.0, 7.0, -7.0])
    with pytest.raises(ParameterError):
        product_resolvent([ZeroOperator(2)], 1.0, x)  # bare array: no layout


def test_partial_inverse_graph_swap():
    """(v, v*) lies on the partial inverse graph iff swapping V-perp parts
    lands on the graph of the inner operator."""
    rng = np.random.default_rng(13)
    K = rng.standard_normal((4, 4))
    S = K - K.T + np.eye(4)
    bvec = rng.standard_normal(4)
    M = AffineMonotone(S, bvec)
    V = Subspace.from_basis(rng.standard_normal((2, 4)))
    z = rng.standard_normal(4)
    p = partial_inverse_resolvent(M, V, z)
    np.testing.assert_allclose(p, PartialInverse(M, V).resolvent(1.0, z), atol=1e-13)
    q = z - p
    point = V.proj(p) + V.proj_perp(q)
    covec = V.proj(q) + V.proj_perp(p)
    np.testing.assert_allclose(S @ point + bvec, covec, atol=1e-9)


def test_partial_inverse_rejects_nonunit_step():
    M = AffineMonotone(np.eye(2))
    P = PartialInverse(M, Subspace.from_basis([[1.0, 0.0]]))
    with pytest.raises(ParameterError):
        P.resolvent(0.5, np.zeros(2))


def test_normal_cone_subspace_resolvent_is_projection():
    V = Subspace.from_basis([[1.0, 1.0, 0.0]])
    N = NormalConeSubspace(V)
    x = np.array([2.0, 0.0, 5.0])
    for g in (0.1, 1.0, 50.0):
        np.testing.assert_allclose(N.resolvent(g, x), V.proj(x), atol=1e-14)


def test_audits_accept_truth_and_reject_lies():
    S = np.diag([1.0, 2.0])
    f = lambda x: S @ x
    Cocoercive(f, alpha=0.5, dim=2).audit()
    with pytest.raises(ParameterError):
        Cocoercive(f, alpha=5.0, dim=2).audit()
    LipMonotone(f, beta=2.0, dim=2).audit()
    with pytest.raises(ParameterError):
        LipMonotone(f, beta=0.1, dim=2).audit()
    with pytest.raises(ParameterError):
        LipMonotone(lambda x: -x, beta=1.0, dim=2).audit()  # not monotone


def test_warped_fb_resolvent_composition():
    A = Prox(IndicatorBox([-1.0], [1.0]))
    B = AffineMonotone(np.array([[2.0]]))
    x = np.array([3.0])
    out = warped_fb_resolvent(A, B, 0.5, x)
    np.testing.assert_allclose(out, [0.0])  # clip(3 - 0.5*6)
    np.testing.assert_allclose(out, np.clip(x - 0.5 * (2.0 * x), -1, 1))
    np.testing.assert_allclose(warped_fb_resolvent(A, None, 0.5, x), [1.0])


def test_graph_point_lies_on_graph():
    M = AffineMonotone(np.array([[3.0]]), np.array([1.0]))
    gp = graph_point_from_resolvent(M, 0.25, np.array([2.0]))
    p, u = gp
    np.testing.assert_allclose(u, 3.0 * p + 1.0, atol=1e-12)
    np.testing.assert_allclose(p + 0.25 * u, [2.0], atol=1e-12)


def test_resolvent_eval_preserves_vec_container():
    layout = SpaceLayout([2])
    v = Vec.of(layout, [5.0, -5.0])
    out = resolvent_eval(Prox(IndicatorBox([-1, -1], [1, 1])), 1.0, v)
    assert isinstance(out, Vec)
    np.testing.assert_array_equal(out.data, [1.0, -1.0])


def test_as_affine_recognizes_wrapped_forms():
    S = np.array([[2.0, 0.0], [0.0, 1.0]])
    b = np.array([1.0, -1.0])
    M = AffineMonotone(S, b)
    S2, b2 = as_affine(M)
    np.testing.assert_array_equal(S2, S)
    np.testing.assert_array_equal(b2, b)

    Ss, bs = as_affine(Scaled(2.0, M))
    np.testing.assert_allclose(Ss, 2.0 * S)
    np.testing.assert_allclose(bs, 2.0 * b)

    Si, bi = as_affine(Inverse(M))
    np.testing.assert_allclose(Si, np.linalg.inv(S))
    np.testing.assert_allclose(bi, -np.linalg.inv(S) @ b)

    Sz, bz = as_affine(ZeroOperator(3))
    np.testing.assert_array_equal(Sz, np.zeros((3, 3)))

    Sq, bq = as_affine(Prox(QuadraticAtom(S, b)))
    np.testing.assert_array_equal(Sq, S)
    np.testing.assert_array_equal(bq, b)

    assert as_affine(Prox(L1Norm(1.0))) is None


def test_prox_forward_requires_gradient():
    assert not Prox(L1Norm(1.0)).forward_evaluable or True  # forward defined on class
    with pytest.raises(ParameterError):
        forward_eval(Prox(L1Norm(1.0)), np.zeros(2))
    np.testing.assert_array_equal(forward_eval(Prox(ZeroAtom()), np.ones(2)), np.zeros(2))


def test_indicator_subspace_prox():
    V = Subspace.from_basis([[0.0, 1.0]])
    atom = IndicatorSubspace(V)
    np.testing.assert_allclose(atom.prox(2.0, np.array([3.0, 4.0])), [0.0, 4.0])
