import numpy as np
import pytest

from slnp import SimilarityBlocks, TrainConfig, fit, make_dataset, synth_two_feature_toy
from slnp.alternating import _graph_matrix, build_laplacian, heat_row, objective, w_step
from slnp.eigensolve import total_scatter
from slnp.errors import KTooLarge, ShapeMismatch
from slnp.similarity import s_step
from slnp.types import RegularizationMatrix


def random_blocks(rng, sizes):
    out = []
    for n in sizes:
        S = rng.uniform(size=(n, n))
        out.append(S / S.sum(axis=1, keepdims=True))
    return SimilarityBlocks(tuple(out))


def small_dataset(seed, C=3, n=6, D=4):
    rng = np.random.default_rng(seed)
    return make_dataset(rng.normal(size=(D, C * n)), np.repeat(np.arange(C), n))


# ---------------------------------------------------------------- Laplacian


def test_laplacian_two_nodes():
    lap = build_laplacian(SimilarityBlocks((np.array([[0.0, 1.0], [1.0, 0.0]]),)))
    np.testing.assert_array_equal(lap.laplacian[0], [[1, -1], [-1, 1]])


def test_laplacian_uniform():
    n = 4
    L = build_laplacian(SimilarityBlocks.uniform([n])).laplacian[0]
    np.testing.assert_allclose(L, np.eye(n) - np.full((n, n), 1 / n))
    np.testing.assert_allclose(L.sum(axis=1), 0, atol=1e-15)


def test_laplacian_quadratic_form():
    rng = np.random.default_rng(0)
    S = random_blocks(rng, [5])
    lap = build_laplacian(S)
    A, L = lap.sym_blocks[0], lap.laplacian[0]
    x = rng.normal(size=5)
    ref = 0.5 * sum(A[j, k] * (x[j] - x[k]) ** 2 for j in range(5) for k in range(5))
    assert x @ L @ x == pytest.approx(ref, abs=1e-10)
    assert np.linalg.eigvalsh(L).min() > -1e-12


def test_global_laplacian_is_block_diagonal():
    L = build_laplacian(SimilarityBlocks.uniform([2, 3])).global_laplacian()
    assert L.shape == (5, 5)
    assert np.all(L[:2, 2:] == 0)


# ---------------------------------------------------------------- objective


def test_objective_loop_oracle():
    rng = np.random.default_rng(1)
    ds = small_dataset(1)
    S = random_blocks(rng, ds.class_sizes)
    R = RegularizationMatrix(tuple(rng.uniform(size=n) for n in ds.class_sizes))
    W = rng.normal(size=(4, 2))
    embed = penalty = 0.0
    for c in range(3):
        Y = W.T @ ds.class_features(c)
        for j in range(6):
            for k in range(6):
                embed += S[c][j, k] * np.sum((Y[:, j] - Y[:, k]) ** 2)
                penalty += R[c][j] * S[c][j, k] ** 2
    J, e, p = objective(S, W, R, ds)
    assert (J, e, p) == pytest.approx((embed + penalty, embed, penalty), rel=1e-9)


def test_objective_penalty_off():
    ds = small_dataset(2)
    S = SimilarityBlocks.uniform(ds.class_sizes)
    R = RegularizationMatrix(tuple(np.zeros(n) for n in ds.class_sizes))
    J, e, p = objective(S, np.eye(4)[:, :2], R, ds)
    assert p == 0 and J == e


def test_objective_duplicates():
    ds = make_dataset(np.ones((3, 4)), [0, 0, 0, 0])
    S = SimilarityBlocks.uniform([4])
    R = RegularizationMatrix((np.full(4, 2.0),))
    J, e, p = objective(S, np.random.default_rng(0).normal(size=(3, 2)), R, ds)
    assert e == 0
    assert J == pytest.approx(4 * 4 * 2.0 / 16)


def test_objective_shape_checks():
    ds = small_dataset(3)
    S = SimilarityBlocks.uniform(ds.class_sizes)
    R = RegularizationMatrix(tuple(np.zeros(n) for n in ds.class_sizes))
    with pytest.raises(ShapeMismatch):
        objective(S, np.ones((3, 2)), R, ds)
    with pytest.raises(ShapeMismatch):
        objective(SimilarityBlocks.uniform([6, 6]), np.ones((4, 2)), R, ds)


# ---------------------------------------------------------------- W-step


def test_w_step_beats_random_feasible_projections():
    rng = np.random.default_rng(4)
    ds = small_dataset(4, D=5)
    S = random_blocks(rng, ds.class_sizes)
    St = total_scatter(ds, 1e-8).matrix
    A = _graph_matrix(ds, build_laplacian(S))
    W = w_step(ds, S, 2)
    best = np.trace(W.T @ A @ W)
    Lc = np.linalg.cholesky(St)
    for _ in range(1000):
        Q, _ = np.linalg.qr(rng.normal(size=(5, 2)))
        V = np.linalg.solve(Lc.T, Q)  # V^T St V = I
        assert best <= np.trace(V.T @ A @ V) + 1e-10


def test_w_step_degenerate_class():
    ds = make_dataset(np.hstack([np.ones((3, 4)), np.random.default_rng(5).normal(size=(3, 4))]),
                      [0] * 4 + [1] * 4)
    W = w_step(ds, SimilarityBlocks.uniform([4, 4]), 2)
    St = total_scatter(ds, 1e-8).matrix
    np.testing.assert_allclose(W.T @ St @ W, np.eye(2), atol=1e-10)


def test_toy_projection_picks_separating_feature():
    ds = synth_two_feature_toy(20, seed=3)
    cfg = TrainConfig(K=2, d=1)
    res = fit(ds, cfg)
    w = res.model.w[:, 0]
    # independent 1-D search of the ratio w'Aw / w'St w over unit directions
    A = _graph_matrix(ds, build_laplacian(res.similarity))
    St = total_scatter(ds, cfg.ridge).matrix
    theta = np.linspace(0, np.pi, 20001)
    U = np.vstack([np.cos(theta), np.sin(theta)])
    ratio = np.einsum("ij,ik,kj->j", U, A, U) / np.einsum("ij,ik,kj->j", U, St, U)
    u = U[:, np.argmin(ratio)]
    unit = w / np.linalg.norm(w)
    assert abs(unit @ u) > 0.9999
    assert abs(unit[1]) > 0.9


# ---------------------------------------------------------------- fit


def test_fit_duplicates_stop_at_once():
    ds = make_dataset(np.hstack([np.zeros((2, 3)), np.ones((2, 3))]),
                      [0, 0, 0, 1, 1, 1])
    res = fit(ds, TrainConfig(K=2, d=1))
    assert len(res.trace) == 1
    assert res.trace.converged
    assert res.trace.objective[0] == pytest.approx(0.0)


def test_fit_trace_and_snapshots():
    ds = synth_two_feature_toy(10, seed=1)
    res = fit(ds, TrainConfig(K=2, d=1, watch=(0, 0), max_iters=5, rel_tol=0.0))
    tr = res.trace
    assert len(tr) == 5
    assert len(tr.snapshots) == 6
    np.testing.assert_allclose(tr.snapshots[0], 0.1)
    for snap in tr.snapshots[1:]:
        assert snap.sum() == pytest.approx(1.0)
        assert (snap > 0).sum() <= 2
    assert tr.watch_heat.shape == (10,) and tr.watch_heat[0] == 1.0
    res.similarity.check(K=2)
    assert res.model.info["n_iter"] == 5


def test_fit_final_state_consistent():
    ds = small_dataset(6)
    cfg = TrainConfig(K=3, d=2)
    res = fit(ds, cfg)
    Y = [res.model.w.T @ ds.class_features(c) for c in range(3)]
    S, R = s_step(Y, 3)
    for c in range(3):
        np.testing.assert_allclose(res.similarity[c], S[c])
        np.testing.assert_allclose(res.gammas[c], R[c])
    J = objective(res.similarity, res.model.w, res.gammas, ds)[0]
    assert J == pytest.approx(res.trace.objective[-1])


def test_fit_with_pca():
    rng = np.random.default_rng(7)
    ds = make_dataset(rng.normal(size=(12, 20)), np.repeat([0, 1], 10))
    res = fit(ds, TrainConfig(K=3, d=2, d_pca=5))
    m = res.model
    assert m.w.shape == (5, 2) and m.w_pca.shape == (12, 5)
    assert m.transform(ds.features).shape == (2, 20)


def test_fit_is_deterministic():
    ds = small_dataset(8)
    a = fit(ds, TrainConfig(K=2, d=2)).model.w
    b = fit(ds, TrainConfig(K=2, d=2)).model.w
    np.testing.assert_array_equal(a, b)


def test_fit_rejects_large_k():
    with pytest.raises(KTooLarge):
        fit(small_dataset(9), TrainConfig(K=6, d=2))


def test_heat_row():
    X = np.array([[0.0, 1.0, 0.0]])
    np.testing.assert_allclose(heat_row(X, 0, t=1.0), [1, np.exp(-1), 1])
