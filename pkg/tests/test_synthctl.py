import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from causalwmmse.latentnet import LatentPolicy, apply_policy
from causalwmmse.synthctl import (
    PanelData, PanelDataError, ScEstimator, Variant, collect_panel, fit_conv, fit_free, infer,
    project_simplex, residual_norm, train,
)
from conftest import random_net
from oracles import grid_best_residual, simplex_grid, simplex_projection_by_supports


def random_panel(rng, L, K):
    return PanelData(rng.random((L, K)) + 0.1 * rng.random())


def test_panel_without_latent_is_known_interference(rng):
    net = random_net(rng, 4)
    panel, P, _ = collect_panel(net, None, 30, 5, return_log=True)
    expected = P @ net.gain_known + net.noise_known
    assert np.allclose(panel.observations, expected, rtol=1e-14, atol=0)


@pytest.mark.oracle
def test_panel_rows_recomputed_from_log(rng):
    net = random_net(rng, 4, 3)
    policy = LatentPolicy.random(3, 4, rng, q_max=0.5)
    panel, P, Q = collect_panel(net, policy, 40, 8, return_log=True)
    G = net.gain
    for row, p, q in zip(panel.observations, P, Q):
        assert np.all(q >= 0) and np.all(q <= 0.5)
        for k in range(4):
            ref = sum(G[j, k] * p[j] for j in range(4)) + sum(G[4 + i, k] * q[i] for i in range(3))
            assert row[k] == pytest.approx(ref + net.noise_power[k], rel=1e-13)
    assert np.all(P <= net.max_power) and np.all(P >= 0)


def test_panel_is_seed_deterministic(rng):
    net = random_net(rng, 3, 2)
    policy = LatentPolicy.random(2, 3, rng)
    a = collect_panel(net, policy, 10, 3)
    b = collect_panel(net, policy, 10, 3)
    assert a.observations.tobytes() == b.observations.tobytes()


def test_single_row_panel_trains(rng):
    panel = random_panel(rng, 1, 4)
    est = train(panel, Variant.CONV)
    assert np.all(np.isfinite(est.coefficients))
    # distance from x_k to the hull of the donor values in one dimension
    for k in range(4):
        x, d = panel.split(k)
        gap = max(0.0, d.min() - x[0], x[0] - d.max())
        assert residual_norm(panel, k, est.coefficients[k]) == pytest.approx(gap, abs=1e-9)


@pytest.mark.parametrize("bad", [np.nan, np.inf])
def test_nonfinite_panel_rejected(bad):
    X = np.ones((3, 3))
    X[1, 2] = bad
    with pytest.raises(PanelDataError):
        PanelData(X)


def test_panel_shape_rejected():
    with pytest.raises(PanelDataError):
        PanelData(np.ones((3, 1)))
    with pytest.raises(PanelDataError):
        PanelData(np.ones((0, 3)))


def test_duplicate_column_gives_zero_residual(rng):
    X = rng.random((50, 5))
    X[:, 3] = X[:, 1]
    panel = PanelData(X)
    beta = fit_conv(panel, 3)
    assert residual_norm(panel, 3, beta) <= 1e-8


def test_one_donor_is_forced(rng):
    panel = random_panel(rng, 20, 2)
    beta = fit_conv(panel, 0)
    assert np.array_equal(beta, [1.0])
    x, d = panel.split(0)
    assert residual_norm(panel, 0, beta) == pytest.approx(np.linalg.norm(x - d[:, 0]))


@pytest.mark.oracle
def test_recovers_two_donor_mixture(rng):
    c = rng.random((40, 2))
    x = 0.3 * c[:, 0] + 0.7 * c[:, 1]
    panel = PanelData(np.column_stack([x, c]))
    beta = fit_conv(panel, 0)
    assert residual_norm(panel, 0, beta) <= 1e-8
    assert np.allclose(beta, [0.3, 0.7], atol=1e-4)
    ref, arg = grid_best_residual(x, c, 1e-3)
    assert np.allclose(arg, [0.3, 0.7], atol=1e-3)
    assert residual_norm(panel, 0, beta) <= ref + 1e-12


def test_conv_output_is_feasible(rng):
    for _ in range(20):
        panel = random_panel(rng, 15, 6)
        for k in range(6):
            beta = fit_conv(panel, k)
            assert np.all(beta >= 0)
            assert abs(beta.sum() - 1.0) <= 1e-12


@pytest.mark.oracle
def test_conv_beats_simplex_grid(rng):
    for _ in range(30):
        m = int(rng.integers(2, 4))
        panel = random_panel(rng, int(rng.integers(3, 30)), m + 1)
        x, d = panel.split(0)
        ref, _ = grid_best_residual(x, d, 0.01)
        assert residual_norm(panel, 0, fit_conv(panel, 0)) <= ref + 1e-6


def test_free_fits_column_span(rng):
    c = rng.random((30, 3))
    x = 2.0 * c[:, 0] + 0.5 * c[:, 2]  # outside the simplex, inside the span
    panel = PanelData(np.column_stack([x, c]))
    beta = fit_free(panel, 0)
    assert residual_norm(panel, 0, beta) <= 1e-8


def test_free_single_donor_is_scalar_projection(rng):
    panel = random_panel(rng, 25, 2)
    x, d = panel.split(0)
    c = d[:, 0]
    assert fit_free(panel, 0)[0] == pytest.approx(x @ c / (c @ c), rel=1e-8)


@pytest.mark.oracle
@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**31), st.integers(1, 20), st.integers(2, 7))
def test_free_never_worse_than_conv(seed, L, K):
    rng = np.random.default_rng(seed)
    panel = random_panel(rng, L, K)
    for k in range(K):
        free = residual_norm(panel, k, fit_free(panel, k))
        conv = residual_norm(panel, k, fit_conv(panel, k))
        assert free <= conv + 1e-8


def test_infer_examples():
    est = ScEstimator(np.array([[0.5, 0.5], [1.0, 0.0], [0.0, 1.0]]), np.zeros(3))
    assert infer(est, 0, [2.0, 4.0]) == 3.0
    assert infer(est, 1, [7.0, 9.0]) == 7.0
    assert infer(est, 2, [7.0, 9.0]) == 9.0


@pytest.mark.oracle
def test_conv_inference_stays_in_range(rng):
    for _ in range(10_000):
        m = int(rng.integers(1, 8))
        nu = project_simplex(rng.normal(size=m))
        mu = rng.random(m) * 10 ** rng.uniform(-12, 0)
        est = ScEstimator(np.tile(nu, (m + 1, 1)), np.zeros(m + 1))
        out = infer(est, 0, mu)
        slack = 1e-12 * mu.max()
        assert mu.min() - slack <= out <= mu.max() + slack


def test_projection_fixed_points():
    y = np.array([0.2, 0.5, 0.3])
    assert np.allclose(project_simplex(y), y, atol=1e-15)
    assert np.array_equal(project_simplex([2.0, 0.0]), [1.0, 0.0])


@pytest.mark.oracle
@settings(max_examples=200, deadline=None)
@given(st.lists(st.floats(-5, 5), min_size=3, max_size=3))
def test_projection_matches_support_enumeration(y):
    assert np.allclose(project_simplex(y), simplex_projection_by_supports(y), atol=1e-6)


@pytest.mark.oracle
def test_projection_matches_dense_grid(rng):
    for _ in range(20):
        y = rng.normal(size=3)
        best = min(((np.sum((b - y) ** 2), tuple(b)) for b in
                    simplex_grid(3, 0.005)), key=lambda t: t[0])
        proj = project_simplex(y)
        assert np.sum((proj - y) ** 2) <= best[0] + 1e-12
        assert np.allclose(proj, best[1], atol=0.01)


def test_center_and_dirich_variants(rng):
    panel = random_panel(rng, 10, 5)
    center = train(panel, Variant.CENTER)
    assert np.allclose(center.coefficients, 0.25)
    dirich = train(panel, Variant.DIRICH)
    stream = np.random.default_rng(4)
    draws = np.array([dirich.weights_for(2, stream) for _ in range(4000)])
    assert np.all(draws >= 0)
    assert np.allclose(draws.sum(axis=1), 1.0, atol=1e-12)
    # uniform on the simplex: mean 1/m, neighbouring draws uncorrelated
    assert np.allclose(draws.mean(axis=0), 0.25, atol=0.02)
    corr = np.corrcoef(draws[:-1, 0], draws[1:, 0])[0, 1]
    assert abs(corr) < 0.05
    with pytest.raises(ValueError):
        dirich.weights_for(0)


def test_dirich_stream_is_reproducible(rng):
    est = train(random_panel(rng, 5, 3), Variant.DIRICH)
    a = [est.weights_for(0, g) for g in [np.random.default_rng(1)] * 3]
    b = [est.weights_for(0, g) for g in [np.random.default_rng(1)] * 3]
    assert np.array_equal(np.array(a), np.array(b))


def test_panel_csv_round_trip(rng, tmp_path):
    panel = PanelData(rng.random((7, 4)), ("a", "b", "c", "d"))
    panel.to_csv(tmp_path / "p.csv")
    back = PanelData.from_csv(tmp_path / "p.csv")
    assert back.observations.tobytes() == panel.observations.tobytes()
    assert back.link_ids == panel.link_ids


def test_panel_csv_errors(tmp_path):
    (tmp_path / "bad.csv").write_text("0,1\n1.0,x\n")
    with pytest.raises(PanelDataError):
        PanelData.from_csv(tmp_path / "bad.csv")
    (tmp_path / "short.csv").write_text("0,1\n")
    with pytest.raises(PanelDataError):
        PanelData.from_csv(tmp_path / "short.csv")


def test_estimator_csv(rng, tmp_path):
    est = train(random_panel(rng, 12, 3), Variant.CONV)
    est.to_csv(tmp_path / "e.csv")
    lines = (tmp_path / "e.csv").read_text().splitlines()
    assert lines[0] == "link,0,1,2,residual"
    assert lines[2].split(",")[2] == ""
    assert float(lines[2].split(",")[1]) == est.coefficients[1][0]


def test_policy_csv_round_trip(rng, tmp_path):
    policy = LatentPolicy.random(3, 5, rng)
    policy.to_csv(tmp_path / "z.csv")
    back = LatentPolicy.from_csv(tmp_path / "z.csv")
    assert back.mixing.tobytes() == policy.mixing.tobytes()
    p = rng.random(5)
    assert np.array_equal(apply_policy(back, p, np.zeros(3)), apply_policy(policy, p, np.zeros(3)))


def test_momentum_overshoot_past_vertex_does_not_stop_early():
    # accelerated steps land outside the simplex twice in a row and project to
    # the same vertex, although the optimum sits just inside the edge
    X = np.array([[0.66679219, 0.01654009, 0.13117508],
                  [0.14690496, 0.47111871, 0.04373001],
                  [0.08109851, 0.24833254, 0.18917093],
                  [0.90340198, 0.11380388, 0.93752714]])
    panel = PanelData(X)
    beta = fit_conv(panel, 0)
    x, d = panel.split(0)
    t = np.linspace(0.0, 1.0, 100_001)
    seg = np.linalg.norm(x[:, None] - np.outer(d[:, 0], t) - np.outer(d[:, 1], 1 - t), axis=0)
    assert beta[0] == pytest.approx(t[np.argmin(seg)], abs=2e-5)
    assert residual_norm(panel, 0, beta) <= seg.min() + 1e-12
