import numpy as np
import pytest

from splitkit.space import (LinOp, MetricKernel, SpaceLayout, Subspace, Vec,
                            as_array, estimate_operator_norm)


def test_layout_split_concat_roundtrip():
    layout = SpaceLayout([3, 1, 4])
    assert layout.total_dim == 8
    assert layout.offsets == (0, 3, 4)
    x = np.arange(8.0)
    parts = layout.split(x)
    assert [p.shape for p in parts] == [(3,), (1,), (4,)]
    np.testing.assert_array_equal(layout.concat(parts), x)


def test_layout_slices_cover_everything():
    layout = SpaceLayout([2, 5])
    sl = layout.slices()
    x = np.arange(7.0)
    np.testing.assert_array_equal(x[sl[0]], [0.0, 1.0])
    np.testing.assert_array_equal(x[sl[1]], [2.0, 3.0, 4.0, 5.0, 6.0])


def test_layout_rejects_bad_factors():
    with pytest.raises(ValueError):
        SpaceLayout([2, 0])
    with pytest.raises(ValueError):
        SpaceLayout([])
    with pytest.raises(ValueError):
        SpaceLayout([2, 2]).split(np.zeros(5))


def test_vec_parts_roundtrip():
    layout = SpaceLayout([2, 3])
    v = Vec.from_parts(layout, [np.array([1.0, 2.0]), np.array([3.0, 4.0, 5.0])])
    a, b = v.parts()
    np.testing.assert_array_equal(a, [1.0, 2.0])
    np.testing.assert_array_equal(b, [3.0, 4.0, 5.0])
    np.testing.assert_array_equal(as_array(v), [1.0, 2.0, 3.0, 4.0, 5.0])
    np.testing.assert_array_equal(v.part(1), [3.0, 4.0, 5.0])


def test_vec_arithmetic():
    layout = SpaceLayout([2])
    u = Vec.of(layout, [1.0, 2.0])
    w = Vec.of(layout, [3.0, -1.0])
    np.testing.assert_array_equal((u + w).data, [4.0, 1.0])
    np.testing.assert_array_equal((u - w).data, [-2.0, 3.0])
    np.testing.assert_array_equal((u * 2.0).data, [2.0, 4.0])
    np.testing.assert_array_equal((-u).data, [-1.0, -2.0])
    assert u.inner(w) == 1.0
    assert abs(u.norm() - np.sqrt(5.0)) < 1e-15
    assert len(Vec.zeros(layout)) == 2


def test_as_array_handles_scalars_and_vecs():
    assert as_array(2.5).shape == (1,)
    arr = as_array([1, 2, 3])
    assert arr.dtype == float and arr.shape == (3,)


def test_linop_apply_and_adjoint_agree_with_matrix():
    rng = np.random.default_rng(0)
    A = rng.standard_normal((3, 5))
    L = LinOp(A)
    x = rng.standard_normal(5)
    y = rng.standard_normal(3)
    np.testing.assert_allclose(L.apply(x), A @ x)
    np.testing.assert_allclose(L.adjoint_apply(y), A.T @ y)
    # adjoint identity <Lx, y> = <x, L*y>
    assert abs(L.apply(x) @ y - x @ L.adjoint_apply(y)) < 1e-12


def test_linop_identity_and_zero():
    I = LinOp.identity(4)
    x = np.arange(4.0)
    np.testing.assert_array_equal(I.apply(x), x)
    Z = LinOp.zero(2, 4)
    assert Z.rows == 2 and Z.cols == 4
    np.testing.assert_array_equal(Z.apply(x), np.zeros(2))


def test_estimate_operator_norm_is_a_tight_overestimate():
    # deliberate 1.05 safety factor: never below the true norm, never far above
    rng = np.random.default_rng(3)
    for _ in range(5):
        A = rng.standard_normal((4, 6))
        true = np.linalg.norm(A, 2)
        est = estimate_operator_norm(LinOp(A), seed=7)
        assert true - 1e-9 <= est <= 1.06 * true
    assert estimate_operator_norm(LinOp.zero(3, 3)) == 0.0


def test_subspace_projection_identities():
    rng = np.random.default_rng(1)
    basis = rng.standard_normal((2, 5))
    V = Subspace.from_basis(basis)
    x = rng.standard_normal(5)
    p = V.proj(x)
    # idempotent, complementary, orthogonal split
    np.testing.assert_allclose(V.proj(p), p, atol=1e-12)
    np.testing.assert_allclose(p + V.proj_perp(x), x, atol=1e-12)
    assert abs(p @ V.proj_perp(x)) < 1e-10
    assert V.contains(p)
    assert not V.contains(x + 10.0)


def test_subspace_from_equations_is_null_space():
    A = np.array([[1.0, 1.0, 0.0]])
    V = Subspace.from_equations(A)
    assert V.dim == 2
    z = V.proj(np.array([3.0, 1.0, 2.0]))
    assert np.linalg.norm(A @ z) < 1e-12


def test_subspace_trivial_whole_coordinates_consensus():
    t = Subspace.trivial(3)
    w = Subspace.whole(3)
    x = np.array([1.0, -2.0, 0.5])
    np.testing.assert_array_equal(t.proj(x), np.zeros(3))
    np.testing.assert_array_equal(w.proj(x), x)
    assert t.dim == 0 and w.dim == 3

    c = Subspace.coordinates(4, [0, 2])
    np.testing.assert_array_equal(c.proj(np.arange(4.0)), [0.0, 0.0, 2.0, 0.0])

    # consensus diagonal: projection averages the copies
    d = Subspace.consensus(3, 2)
    y = np.array([1.0, 0.0, 2.0, 3.0, 6.0, 0.0])
    np.testing.assert_allclose(d.proj(y), [3.0, 1.0, 3.0, 1.0, 3.0, 1.0])


def test_metric_kernel_checks_and_quad():
    rng = np.random.default_rng(5)
    B = rng.standard_normal((4, 4))
    U = B @ B.T + 4.0 * np.eye(4)
    K = MetricKernel(LinOp(U), beta=1.0)
    x = rng.standard_normal(4)
    np.testing.assert_allclose(K.apply(x), U @ x)
    assert abs(K.quad(x) - x @ U @ x) < 1e-10
    assert K.dim == 4

    with pytest.raises(ValueError):
        MetricKernel(LinOp(np.array([[1.0, 2.0], [0.0, 1.0]])), beta=0.5)  # not symmetric
    with pytest.raises(ValueError):
        MetricKernel(LinOp(np.eye(2)), beta=5.0)  # eigenvalues below claimed beta
