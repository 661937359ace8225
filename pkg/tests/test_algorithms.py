import numpy as np
import pytest

from splitkit.algorithms import (AveragedReflectionsOperator, Schedule,
                                 build_embedding, chambolle_pock_kernel,
                                 run_averaged_iteration, run_backward_backward,
                                 run_chambolle_pock, run_condat_vu,
                                 run_davis_yin, run_douglas_rachford,
                                 run_dual_forward_backward, run_dykstra,
                                 run_euler, run_fbhf, run_forward_backward,
                                 run_partial_inverse,
                                 run_partial_inverse_composite,
                                 run_partial_yosida, run_projected_landweber,
                                 run_proximal_point, run_resolvent_composition,
                                 run_tseng_fbf)
from splitkit.errors import ParameterError
from splitkit.geometry import LoopConfig
from splitkit.operators import (AffineMonotone, IndicatorBox, L1Norm, Prox,
                                ProductOperator, Skew, ZeroOperator)
from splitkit.problems import gen_problem, oracle_solve, residual_eval
from splitkit.space import LinOp, SpaceLayout, Subspace, as_array


def _affine_op(p):
    return AffineMonotone(p.data["S"], p.data["b"])


# ---------------------------------------------------------------------------
# schedules
# ---------------------------------------------------------------------------

def test_schedule_shapes():
    const = Schedule(0.5, "gamma_n")
    assert const(0) == 0.5 and const(99) == 0.5 and const.is_constant
    seq = Schedule([1.0, 2.0, 3.0], "gamma_n")
    assert [seq(n) for n in (0, 1, 2, 3, 50)] == [1.0, 2.0, 3.0, 3.0, 3.0]
    fn = Schedule(lambda n: 1.0 / (n + 1), "gamma_n")
    assert fn(3) == 0.25
    with pytest.raises(ParameterError):
        Schedule([], "gamma_n")


def test_schedule_band_quotes_inequality():
    s = Schedule(2.0, "gamma_n", band=lambda v: v <= 1.0,
                 text="gamma_n in [eps, 1]")
    with pytest.raises(ParameterError, match=r"gamma_n in \[eps, 1\]; got gamma_n = 2"):
        s(0)


# ---------------------------------------------------------------------------
# proximal point / fixed point / explicit steps
# ---------------------------------------------------------------------------

def test_proximal_point_finds_planted_zero():
    p = gen_problem("affine_zero", seed=3)
    x, trace = run_proximal_point(_affine_op(p), 1.0, LoopConfig(tol=1e-12, max_iter=5000))
    assert trace.status == "converged"
    np.testing.assert_allclose(x, p.planted["x_star"], atol=1e-9)
    assert residual_eval(p, x) <= 1e-10


def test_proximal_point_identity_kernel_is_plain_run():
    from splitkit.space import MetricKernel
    p = gen_problem("affine_zero", seed=5, dims={"n": 3})
    M = _affine_op(p)
    cfg = LoopConfig(tol=1e-12, max_iter=60, collect_points=True)
    _, plain = run_proximal_point(M, 0.9, cfg)
    kern = MetricKernel(LinOp(np.eye(3)), 1.0)
    _, kerneled = run_proximal_point(M, 0.9, cfg, kernel=kern)
    for a, b in zip(plain.points, kerneled.points):
        np.testing.assert_allclose(a, b, atol=1e-12)


def test_averaged_iteration_reproduces_proximal_point():
    p = gen_problem("affine_zero", seed=7)
    M = _affine_op(p)
    cfg = LoopConfig(tol=1e-11, max_iter=3000, collect_points=True)
    x_ppa, t_ppa = run_proximal_point(M, 1.0, cfg)
    T = lambda v: M.resolvent(1.0, v)
    x_km, t_km = run_averaged_iteration(T, 0.5, 1.0, cfg, dim=M.dim)
    assert len(t_ppa.points) == len(t_km.points)
    for a, b in zip(t_ppa.points, t_km.points):
        np.testing.assert_allclose(a, b, atol=1e-12)


def test_averaged_iteration_relaxation_band():
    T = lambda v: 0.5 * as_array(v)
    with pytest.raises(ParameterError, match="lam_n"):
        run_averaged_iteration(T, 0.75, 1.4, LoopConfig(max_iter=5),
                               x0=np.ones(2))


def test_euler_steps_on_cocoercive_map():
    p = gen_problem("affine_zero", seed=11, dims={"sym": 1, "nu": 0.5})
    B = _affine_op(p)
    x, trace = run_euler(B, B.alpha, LoopConfig(tol=1e-12, max_iter=5000))
    np.testing.assert_allclose(x, p.planted["x_star"], atol=1e-9)
    with pytest.raises(ParameterError, match=r"\(2-eps\)\*alpha"):
        run_euler(B, 100.0, LoopConfig(max_iter=5), x0=np.ones(4))


# ---------------------------------------------------------------------------
# two(+)-operator splittings
# ---------------------------------------------------------------------------

def test_douglas_rachford_meets_two_lines():
    p = gen_problem("two_set", seed=13, dims={"shape": "lines"})
    from splitkit.operators import IndicatorAffine
    C, d = p.data["C"], p.data["d"]
    A = Prox(IndicatorAffine(C[:1], d[:1]), dim=2)
    B = Prox(IndicatorAffine(C[1:], d[1:]), dim=2)
    pair, trace = run_douglas_rachford(A, B, 1.0, LoopConfig(tol=1e-12, max_iter=4000),
                                       y0=p.data["z"])
    assert trace.status == "converged"
    np.testing.assert_allclose(pair.x, p.planted["x_star"], atol=1e-9)


def test_davis_yin_three_operator_interval_instance():
    # 0 in N_[0.2, 2](x) + N_[-3, 5](x) + x has the unique solution 0.2
    A = Prox(IndicatorBox([0.2], [2.0]), dim=1)
    B = Prox(IndicatorBox([-3.0], [5.0]), dim=1)
    C = AffineMonotone(np.array([[1.0]]))
    pair, trace = run_davis_yin(A, B, C, 1.0, LoopConfig(tol=1e-12, max_iter=4000))
    assert trace.status == "converged"
    np.testing.assert_allclose(pair.x, [0.2], atol=1e-8)


def test_davis_yin_without_C_is_douglas_rachford_bitwise():
    p = gen_problem("two_set", seed=17, dims={"shape": "lines"})
    from splitkit.operators import IndicatorAffine
    C, d = p.data["C"], p.data["d"]
    A = Prox(IndicatorAffine(C[:1], d[:1]), dim=2)
    B = Prox(IndicatorAffine(C[1:], d[1:]), dim=2)
    cfg = LoopConfig(tol=1e-11, max_iter=300, collect_points=True)
    _, t_dy = run_davis_yin(A, B, None, 1.0, cfg, y0=p.data["z"])
    _, t_dr = run_douglas_rachford(A, B, 1.0, cfg, y0=p.data["z"])
    assert len(t_dy.points) == len(t_dr.points)
    for a, b in zip(t_dy.points, t_dr.points):
        np.testing.assert_array_equal(a, b)


def test_davis_yin_step_size_guard():
    A = Prox(IndicatorBox([0.0], [1.0]), dim=1)
    B = Prox(IndicatorBox([0.0], [1.0]), dim=1)
    C = AffineMonotone(np.array([[2.0]]))  # tau = 0.5
    with pytest.raises(ParameterError, match=r"gamma in \(0, 2\*tau\)"):
        run_davis_yin(A, B, C, 1.0, LoopConfig(max_iter=5))


def test_peaceman_rachford_on_strongly_monotone_pair():
    # un-averaged reflections still converge when one operator is strongly monotone
    A = AffineMonotone(np.array([[3.0]]), np.array([-3.0]))
    B = Prox(IndicatorBox([0.0], [10.0]), dim=1)
    pair, trace = run_douglas_rachford(A, B, 1.0,
                                       LoopConfig(tol=1e-12, max_iter=2000),
                                       peaceman=True)
    np.testing.assert_allclose(pair.x, [1.0], atol=1e-9)


def test_reflected_composition_operator_matches_dr_map():
    A = Prox(IndicatorBox([1.0], [2.0]), dim=1)
    B = Prox(IndicatorBox([0.0], [3.0]), dim=1)
    M = AveragedReflectionsOperator(A, B, 0.7)
    y = np.array([5.0])
    x = B.resolvent(0.7, y)
    want = y + A.resolvent(0.7, 2.0 * x - y) - x
    np.testing.assert_allclose(M.resolvent(1.0, y), want, atol=1e-14)
    with pytest.raises(ParameterError):
        M.resolvent(0.5, y)


# ---------------------------------------------------------------------------
# forward-backward family
# ---------------------------------------------------------------------------

def test_forward_backward_solves_lasso():
    p = gen_problem("lasso", seed=1)
    G, h, w = p.data["G"], p.data["h"], float(p.data["w"])
    A = Prox(L1Norm(w), dim=p.dims["n"])
    B = AffineMonotone(G.T @ G, -G.T @ h)
    x, trace = run_forward_backward(A, B, 1.0, 1.0, LoopConfig(tol=1e-10, max_iter=5000))
    ora = oracle_solve(p)
    assert np.linalg.norm(as_array(x) - ora.primal) <= 1e-7
    assert residual_eval(p, as_array(x)) <= 1e-8


def test_forward_backward_band_text():
    p = gen_problem("lasso", seed=1)
    G, h, w = p.data["G"], p.data["h"], float(p.data["w"])
    A = Prox(L1Norm(w), dim=p.dims["n"])
    B = AffineMonotone(G.T @ G, -G.T @ h)
    with pytest.raises(ParameterError) as err:
        run_forward_backward(A, B, 1.0, 1.5, LoopConfig(max_iter=5))
    assert "(1-eps)*(4*alpha-gamma_n)/(2*alpha)" in str(err.value)
    assert "mu_0 = 1.5" in str(err.value)


def test_tseng_fbf_extragradient_on_saddle():
    p = gen_problem("bilinear_minimax", seed=19, dims={"n": 2, "m": 2})
    P, c, K, Q, d = (p.data[k] for k in ("P", "c", "K", "Q", "d"))
    S = np.block([[P, K.T], [-K, Q]])
    b = np.concatenate([c, d])
    B = AffineMonotone(S, b)
    A = ZeroOperator(4)
    x, trace = run_tseng_fbf(A, B, 0.9 * (1 - 1e-3) / B.beta,
                             LoopConfig(tol=1e-12, max_iter=20000))
    sol = np.concatenate([p.planted["x_star"], p.planted["y_star"]])
    np.testing.assert_allclose(as_array(x), sol, atol=1e-8)


def test_tseng_band_text():
    B = AffineMonotone(np.array([[0.0, 1.0], [-1.0, 0.0]]))
    with pytest.raises(ParameterError, match=r"\(1-eps\)/beta"):
        run_tseng_fbf(ZeroOperator(2), B, 2.0, LoopConfig(max_iter=5))


def test_fbhf_splits_cocoercive_and_skew_parts():
    import math
    p = gen_problem("affine_zero", seed=23)
    KA, GA, nu = p.data["K"], p.data["G"], float(p.dims["nu"])
    C = AffineMonotone(GA.T @ GA + nu * np.eye(4), p.data["b"])
    Q = Skew(KA - KA.T)
    chi = 4.0 * C.alpha / (1.0 + math.sqrt(1.0 + 16.0 * C.alpha ** 2 * Q.beta ** 2))
    x, trace = run_fbhf(ZeroOperator(4), C, Q, 0.9 * chi,
                        LoopConfig(tol=1e-12, max_iter=30000))
    np.testing.assert_allclose(as_array(x), p.planted["x_star"], atol=1e-8)


def test_fbhf_reduces_to_fbf_and_fb():
    rng = np.random.default_rng(29)
    Smat = np.array([[0.0, 1.0], [-1.0, 0.0]])
    Q = Skew(Smat)
    A = Prox(IndicatorBox([-1.0, -1.0], [1.0, 1.0]), dim=2)
    cfg = LoopConfig(tol=1e-11, max_iter=100, collect_points=True)
    _, t1 = run_fbhf(A, None, Q, 0.5, cfg, x0=np.array([2.0, 1.0]))
    _, t2 = run_tseng_fbf(A, Q, 0.5, cfg, x0=np.array([2.0, 1.0]))
    for a, b in zip(t1.points, t2.points):
        np.testing.assert_array_equal(a, b)

    C = AffineMonotone(np.array([[1.0, 0.0], [0.0, 2.0]]), np.array([0.3, -0.1]))
    _, t3 = run_fbhf(A, C, None, 0.4, cfg, x0=np.array([2.0, 1.0]))
    _, t4 = run_forward_backward(A, C, 0.4, 1.0, cfg, x0=np.array([2.0, 1.0]))
    assert len(t3.points) == len(t4.points)
    for a, b in zip(t3.points, t4.points):
        np.testing.assert_allclose(a, b, atol=1e-13)


def test_projected_landweber_box_least_squares():
    C = IndicatorBox([0.0, 0.0], [1.0, 1.0])
    L = LinOp(np.eye(2))
    y = np.array([2.0, 0.5])
    x, trace = run_projected_landweber(C, L, y, 1.0, 1.0,
                                       LoopConfig(tol=1e-12, max_iter=2000))
    np.testing.assert_allclose(as_array(x), [1.0, 0.5], atol=1e-9)


def test_partial_yosida_smoothed_feasibility():
    p = gen_problem("consensus", seed=31)
    lo, hi = p.data["lo"], p.data["hi"]
    A = Prox(IndicatorBox(lo[:1], hi[:1]), dim=1)
    Bs = [Prox(IndicatorBox(lo[k:k + 1], hi[k:k + 1]), dim=1) for k in range(1, 3)]
    x, trace = run_partial_yosida(A, Bs, [1.0, 1.0], 0.5, 1.0,
                                  LoopConfig(tol=1e-12, max_iter=3000))
    assert residual_eval(p, as_array(x)) <= 1e-9


def test_backward_backward_alternating_projections():
    p = gen_problem("consensus", seed=37, dims={"p": 2})
    lo, hi = p.data["lo"], p.data["hi"]
    A = Prox(IndicatorBox(lo[:1], hi[:1]), dim=1)
    B = Prox(IndicatorBox(lo[1:2], hi[1:2]), dim=1)
    x, trace = run_backward_backward(A, B, 1.0, LoopConfig(tol=1e-12, max_iter=2000))
    assert residual_eval(p, as_array(x)) <= 1e-9


# ---------------------------------------------------------------------------
# dual / best-approximation drivers
# ---------------------------------------------------------------------------

def test_dual_forward_backward_strongly_monotone():
    p = gen_problem("strongly_monotone_dual", seed=41)
    A = AffineMonotone(p.data["SA"], p.data["bA"])
    Bs = [AffineMonotone(p.data["S1"], p.data["b1"])]
    Ls = [p.data["L1"]]
    rho = float(p.data["rho"])
    a = rho / np.linalg.norm(p.data["L1"], 2) ** 2  # dual cocoercivity constant
    pair, trace = run_dual_forward_backward(A, rho, p.data["z"],
                                            Bs, None, Ls, a, 1.0,
                                            LoopConfig(tol=1e-12, max_iter=20000))
    ora = oracle_solve(p)
    assert np.linalg.norm(pair.x - ora.primal) <= 1e-7
    assert residual_eval(p, (pair.x, pair.y_star)) <= 1e-6


def test_dykstra_is_exact_projection():
    p = gen_problem("two_set", seed=43)
    from splitkit.operators import IndicatorHalfspace
    atoms = [IndicatorHalfspace(p.data["a1"], p.data["b1"]),
             IndicatorHalfspace(p.data["a2"], p.data["b2"])]
    pair, trace = run_dykstra(atoms, p.data["z"], LoopConfig(tol=1e-12, max_iter=5000))
    ora = oracle_solve(p)
    assert np.linalg.norm(pair.x - ora.primal) <= 1e-8


def test_partial_inverse_consensus_feasibility():
    p = gen_problem("consensus", seed=47)
    lo, hi = p.data["lo"], p.data["hi"]
    pk = p.dims["p"]
    layout = SpaceLayout((1,) * pk)
    big = ProductOperator(layout, [Prox(IndicatorBox(lo[k:k + 1], hi[k:k + 1]), dim=1)
                                   for k in range(pk)])
    V = Subspace.consensus(pk, 1)
    pair, trace = run_partial_inverse(big, V, LoopConfig(tol=1e-12, max_iter=3000),
                                      x0=np.full(pk, 10.0))
    x = pair.x[:1]
    assert residual_eval(p, x) <= 1e-9
    # the dual block lives in V-perp
    assert np.linalg.norm(V.proj(pair.y_star)) <= 1e-9


def test_partial_inverse_composite_matches_dense_oracle():
    p = gen_problem("strongly_monotone_dual", seed=53, dims={"n": 3, "m": 2})
    A = AffineMonotone(p.data["SA"] + float(p.data["rho"]) * np.eye(3),
                       p.data["bA"] - p.data["z"])
    Bs = [AffineMonotone(p.data["S1"], p.data["b1"])]
    pair, trace = run_partial_inverse_composite(A, Bs, [p.data["L1"]],
                                                LoopConfig(tol=1e-12, max_iter=30000))
    ora = oracle_solve(p)
    assert np.linalg.norm(pair.x - ora.primal) <= 1e-7


def test_resolvent_composition_feasibility():
    p = gen_problem("consensus", seed=59, dims={"identical": 1})
    lo, hi = p.data["lo"], p.data["hi"]
    pk = p.dims["p"]
    layout = SpaceLayout((1,) * pk)
    B = ProductOperator(layout, [Prox(IndicatorBox(lo[k:k + 1], hi[k:k + 1]), dim=1)
                                 for k in range(pk)])
    V = Subspace.consensus(pk, 1)
    L = LinOp(np.eye(pk))
    x, trace = run_resolvent_composition(B, L, V, 1.0, 1.0,
                                         LoopConfig(tol=1e-12, max_iter=2000),
                                         x0=np.full(pk, 7.0))
    assert residual_eval(p, as_array(x)[:1]) <= 1e-9


# ---------------------------------------------------------------------------
# primal-dual kernel drivers
# ---------------------------------------------------------------------------

def test_chambolle_pock_composite_inclusion():
    p = gen_problem("composite_pd", seed=61)
    A = AffineMonotone(p.data["SA"], p.data["bA"])
    B = AffineMonotone(p.data["SB"], p.data["bB"])
    L = p.data["L"]
    nrm = np.linalg.norm(L, 2)
    tau = sigma = 0.9 / nrm
    pair, trace = run_chambolle_pock(A, B, L, tau, sigma,
                                     LoopConfig(tol=1e-11, max_iter=20000))
    np.testing.assert_allclose(pair.x, p.planted["x_star"], atol=1e-7)
    np.testing.assert_allclose(pair.y_star, p.planted["y_star"], atol=1e-7)


def test_chambolle_pock_kernel_requires_small_steps():
    with pytest.raises(ParameterError, match=r"tau\*sigma\*\|\|L\|\|\^2 < 1"):
        chambolle_pock_kernel(np.eye(2), 1.0, 1.1)


def test_condat_vu_with_cocoercive_part():
    p = gen_problem("composite_pd", seed=67)
    KA, GA, nu = p.data["KA"], p.data["GA"], float(p.data["nu"])
    n = p.dims["n"]
    A = Skew(KA - KA.T)
    C = AffineMonotone(GA.T @ GA + nu * np.eye(n), p.data["bA"])
    Bs = [AffineMonotone(p.data["SB"], p.data["bB"])]
    Ls = [p.data["L"]]
    nrm = np.linalg.norm(p.data["L"], 2)
    tau = min(0.8 * C.alpha, 0.5 / nrm)
    pair, trace = run_condat_vu(A, C, Bs, Ls, tau, [tau],
                                LoopConfig(tol=1e-11, max_iter=30000))
    np.testing.assert_allclose(pair.x, p.planted["x_star"], atol=1e-7)


def test_embeddings_expose_recovery_maps():
    ops = [Prox(IndicatorBox([0.0], [1.0]), dim=1), ZeroOperator(1)]
    emb = build_embedding("spingarn", ops=ops, dim=1)
    assert emb.tag == "spingarn"
    z = np.array([0.3, 0.7])
    np.testing.assert_allclose(emb.recover(z), [0.5])

    A = ZeroOperator(2)
    B = AffineMonotone(np.eye(2))
    kt = build_embedding("kuhn_tucker", A=A, B=B, L=np.eye(2))
    u = np.arange(4.0)
    np.testing.assert_array_equal(kt.recover(u), [0.0, 1.0])
    with pytest.raises(ParameterError):
        build_embedding("unknown")
