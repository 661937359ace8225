import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from splitkit.errors import EmptyIntersectionError, OracleError, ParameterError
from splitkit.geometry import (TRACE_HEADER, CutReport, HalfSpace, LoopConfig,
                               RunTrace, graph_cut_halfspace,
                               haugazeau_combine, outer_loop_run,
                               project_onto_halfspace)
from splitkit.operators import AffineMonotone, GraphPoint
from splitkit.problems import project_polyhedron


def test_halfspace_membership():
    H = HalfSpace([1.0, 0.0], 2.0)
    assert H.contains([2.0, 5.0])
    assert not H.contains([2.1, 0.0])
    # zero normal with eta >= 0 is the whole space; negative eta is empty
    assert HalfSpace([0.0, 0.0], 0.0).contains([9.0, 9.0])
    with pytest.raises(EmptyIntersectionError):
        HalfSpace([0.0, 0.0], -1.0)


@settings(max_examples=60, deadline=None)
@given(st.lists(st.floats(-10, 10), min_size=3, max_size=3),
       st.lists(st.floats(-10, 10), min_size=3, max_size=3),
       st.floats(-5, 5))
def test_halfspace_projection_characterization(xs, us, eta):
    u = np.array(us)
    if np.linalg.norm(u) < 1e-6:
        return
    H = HalfSpace(u, eta)
    x = np.array(xs)
    p = project_onto_halfspace(x, H)
    assert H.contains(p, tol=1e-9)
    # optimality: correction is along the normal and vanishes when feasible
    if H.contains(x, tol=0.0):
        np.testing.assert_array_equal(p, x)
    else:
        r = x - p
        assert np.linalg.norm(r - (r @ u) / (u @ u) * u) < 1e-9


def _anchored_rows(a, b):
    # H(a, b) = {u : <u - b, a - b> <= 0} as one row of A u <= beta
    n = a - b
    return n, float(b @ n)


def _combine_oracle(x, y, z):
    r1, b1 = _anchored_rows(x, y)
    r2, b2 = _anchored_rows(y, z)
    return project_polyhedron(x, np.vstack([r1, r2]), np.array([b1, b2]))[0]


def test_haugazeau_combine_matches_projection_oracle():
    rng = np.random.default_rng(21)
    for dim in (2, 5):
        for _ in range(60):
            x, y, z = (rng.standard_normal(dim) for _ in range(3))
            got = haugazeau_combine(x, y, z)
            want = _combine_oracle(x, y, z)
            np.testing.assert_allclose(got, want, atol=1e-9)


def test_haugazeau_combine_degenerate_branches():
    x = np.array([0.0, 0.0])
    y = np.array([1.0, 0.0])
    # x == y collapses the first half-space; the answer is z itself
    np.testing.assert_array_equal(haugazeau_combine(x, x, y), y)
    # collinear, moving away from the anchor: both constraints point the same way
    z_fwd = np.array([2.0, 0.0])
    np.testing.assert_array_equal(haugazeau_combine(x, y, z_fwd), z_fwd)
    # collinear, turning back toward the anchor: certified empty
    with pytest.raises(EmptyIntersectionError):
        haugazeau_combine(np.array([0.0, 0.0]), np.array([-1.0, 0.0]),
                          np.array([0.0, 0.0]))


def test_graph_cut_halfspace_delta():
    w = GraphPoint(np.array([1.0, 0.0]), np.array([2.0, 0.0]))
    x = np.array([3.0, 1.0])
    rep = graph_cut_halfspace(x, w)
    assert rep.delta == pytest.approx((x - w.point) @ w.covector)
    # with a cocoercive part the quadratic slack is subtracted
    q = np.array([0.0, 0.0])
    rep2 = graph_cut_halfspace(x, w, q=q, alpha=0.5)
    assert rep2.delta == pytest.approx(rep.delta - np.sum((w.point - q) ** 2) / 2.0)
    with pytest.raises(ParameterError):
        graph_cut_halfspace(x, w, q=q, alpha=0.0)
    with pytest.raises(ParameterError):
        graph_cut_halfspace(x, w, q=None, alpha=1.0)


def test_loop_config_validation():
    with pytest.raises(ParameterError):
        LoopConfig(mode="fast")
    with pytest.raises(ParameterError):
        LoopConfig(max_iter=0)
    with pytest.raises(ParameterError):
        LoopConfig(eps=0.7)
    with pytest.raises(ParameterError):
        LoopConfig(tol=-1.0)
    with pytest.raises(ParameterError):
        LoopConfig(stall_patience=0)
    with pytest.raises(ParameterError):
        LoopConfig(perturbation=("nesterov", 0.5))
    LoopConfig(perturbation=("inertial", 0.3))
    LoopConfig(perturbation="identity")


def test_relaxation_bands_per_mode():
    fej = LoopConfig(mode="fejer", lam=1.9, eps=0.05)
    assert fej.lam_at(0, None) == pytest.approx(1.9)
    with pytest.raises(ParameterError):
        LoopConfig(mode="fejer", lam=1.99, eps=0.05).lam_at(0, None)
    with pytest.raises(ParameterError):
        LoopConfig(mode="haugazeau", lam=1.2).lam_at(0, None)
    # callables are evaluated per iteration and checked the same way
    sched = LoopConfig(lam=lambda n, rep: 1.0 / (n + 1))
    assert sched.lam_at(0, None) == 1.0
    with pytest.raises(ParameterError):
        sched.lam_at(10 ** 9, None)  # falls below eps


def _ppa_oracle(M, gamma):
    def oracle(n, x_tilde, x):
        p = M.resolvent(gamma, x_tilde)
        t = (np.asarray(x_tilde) - p) / gamma
        rep = graph_cut_halfspace(x, GraphPoint(p, t))
        rep.aux["residual"] = float(np.linalg.norm(t))
        return rep
    return oracle


def test_outer_loop_converges_on_affine_inclusion():
    M = AffineMonotone(np.array([[2.0, 0.0], [0.0, 0.5]]), np.array([-2.0, 1.0]))
    sol = np.array([1.0, -2.0])
    x, trace = outer_loop_run(_ppa_oracle(M, 1.0), np.array([5.0, 5.0]),
                              LoopConfig(tol=1e-12, max_iter=2000))
    assert trace.status == "converged"
    np.testing.assert_allclose(x, sol, atol=1e-10)
    # iter column counts completed steps from zero
    assert [r.iter for r in trace.rows[:3]] == [0, 1, 2]
    assert trace.n_iter == len(trace.rows)
    assert trace.final_residual <= 1e-12


def test_residual_is_recorded_before_stepping():
    M = AffineMonotone(np.array([[1.0]]), np.array([0.0]))
    x0 = np.array([8.0])
    _, trace = outer_loop_run(_ppa_oracle(M, 1.0), x0, LoopConfig(tol=0.0, max_iter=3))
    # first row must describe x0, not the updated point
    assert trace.rows[0].residual == pytest.approx(8.0 / 1.0 / 2.0 * 1.0, rel=1e-12) or \
        trace.rows[0].residual == pytest.approx(4.0)


def test_fejer_gap_column_with_reference():
    M = AffineMonotone(np.eye(2), np.zeros(2))
    cfg = LoopConfig(tol=1e-14, max_iter=200, reference=np.zeros(2))
    _, trace = outer_loop_run(_ppa_oracle(M, 1.0), np.array([3.0, -4.0]), cfg)
    gaps = [r.fejer_gap for r in trace.rows]
    assert all(g <= 1e-12 for g in gaps)  # strictly contractive here
    assert trace.status == "converged"


def test_haugazeau_mode_returns_projection_of_anchor():
    # zeros of M form the x2-axis; the anchored variant must hit proj(anchor)
    M = AffineMonotone(np.diag([1.0, 0.0]))
    x0 = np.array([3.0, 4.0])
    x, trace = outer_loop_run(_ppa_oracle(M, 1.0), x0,
                              LoopConfig(mode="haugazeau", lam=1.0, tol=1e-12,
                                         max_iter=5000))
    assert trace.status == "converged"
    np.testing.assert_allclose(x, [0.0, 4.0], atol=1e-8)


def test_stall_detection():
    def lazy(n, x_tilde, x):
        return CutReport(w=np.asarray(x).copy(), t_star=np.zeros(2), delta=0.0,
                         aux={"residual": 1.0})
    _, trace = outer_loop_run(lazy, np.zeros(2), LoopConfig(stall_patience=4,
                                                            max_iter=100))
    assert trace.status == "stalled"
    assert len(trace.rows) == 4


def test_failed_status_on_certified_empty_intersection():
    def oscillate(n, x_tilde, x):
        d = np.array([1.0]) if n == 0 else np.array([-1.0])
        return CutReport(w=np.asarray(x).copy(), t_star=np.ones(1), delta=1.0,
                         aux={"residual": 1.0, "d": d})
    x, trace = outer_loop_run(oscillate, np.zeros(1),
                              LoopConfig(mode="haugazeau", lam=1.0, max_iter=10))
    assert trace.status == "failed"


def test_max_iter_status_and_point_collection():
    M = AffineMonotone(np.array([[0.05]]))
    cfg = LoopConfig(tol=1e-16, max_iter=7, collect_points=True)
    _, trace = outer_loop_run(_ppa_oracle(M, 1.0), np.array([1.0]), cfg)
    assert trace.status == "max_iter"
    assert len(trace.rows) == 7
    assert len(trace.points) == 8  # initial point plus one per step


def test_zero_t_star_with_positive_delta_is_rejected():
    def bad(n, x_tilde, x):
        return CutReport(w=np.zeros(2), t_star=np.zeros(2), delta=1.0,
                         aux={"residual": 1.0})
    with pytest.raises(ParameterError):
        outer_loop_run(bad, np.zeros(2), LoopConfig())


def test_inertial_perturbation_caps_and_vanishes():
    M = AffineMonotone(np.array([[1.0]]))
    cfg = LoopConfig(perturbation=("inertial", 0.9), tol=1e-13, max_iter=500)
    x, trace = outer_loop_run(_ppa_oracle(M, 1.0), np.array([4.0]), cfg)
    assert trace.status == "converged"
    np.testing.assert_allclose(x, [0.0], atol=1e-10)
    tg = [r.tilde_gap for r in trace.rows]
    assert tg[0] == 0.0  # no history to extrapolate at n = 0
    assert all(tg[n] <= min(0.9, 1.0 / (n + 1.0)) + 1e-15 for n in range(len(tg)))
    assert tg[-1] < 1e-10


def test_trace_csv_roundtrip_and_frozen_elapsed():
    M = AffineMonotone(np.eye(2))
    _, trace = outer_loop_run(_ppa_oracle(M, 1.0), np.array([1.0, 2.0]),
                              LoopConfig(tol=1e-16, max_iter=3))
    text = trace.to_csv()
    lines = text.strip().split("\n")
    assert lines[0] == TRACE_HEADER == "iter,residual,disp_norm,theta,fejer_gap,elapsed_ms"
    assert len(lines) == 4
    assert all(ln.rsplit(",", 1)[1] == "0" for ln in lines[1:])
    rows = RunTrace.parse_csv(text)
    assert len(rows) == 3
    for got, want in zip(rows, trace.rows):
        assert got.iter == want.iter
        assert got.residual == want.residual  # 17 digits survive the roundtrip
        assert got.disp_norm == want.disp_norm


def test_parse_csv_rejects_malformed_input():
    with pytest.raises(ParameterError):
        RunTrace.parse_csv("nope\n1,2,3,4,5,6\n")
    with pytest.raises(ParameterError):
        RunTrace.parse_csv(TRACE_HEADER + "\n1,2,3\n")


def test_theta_column_combines_relaxation_and_projection_scale():
    M = AffineMonotone(np.eye(1))
    cfg = LoopConfig(lam=1.5, tol=1e-16, max_iter=2)
    _, trace = outer_loop_run(_ppa_oracle(M, 1.0), np.array([2.0]), cfg)
    # with an explicit projection step theta = lam * delta / ||t*||^2 > 0
    assert trace.rows[0].theta > 0.0


def test_empty_polyhedron_oracle_reports():
    with pytest.raises(OracleError):
        project_polyhedron(np.zeros(1), np.array([[1.0], [-1.0]]),
                           np.array([-1.0, -1.0]))  # x <= -1 and x >= 1
