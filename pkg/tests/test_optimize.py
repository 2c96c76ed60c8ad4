import numpy as np
import pytest

from maserbat import (
    MaserbatError,
    OptimizationError,
    OptOptions,
    ValidationError,
    minimize,
    multi_restart,
    numerical_gradient,
)


def bowl(v):
    return float(np.sum((np.asarray(v) - 0.3) ** 2))


def test_options_validation():
    OptOptions()
    with pytest.raises(ValidationError):
        OptOptions(fd_step=0.0)
    with pytest.raises(ValidationError):
        OptOptions(fd_step=0.1)
    with pytest.raises(ValidationError):
        OptOptions(restarts=0)
    with pytest.raises(ValidationError):
        OptOptions(max_iterations=0)


def test_gradient_quadratic():
    grad = numerical_gradient(lambda v: (v[0] - 0.3) ** 2, np.array([0.5]), 1e-3)
    assert grad[0] == pytest.approx(0.4, abs=1e-6)


def test_gradient_constant():
    grad = numerical_gradient(lambda v: 7.0, np.array([0.2, 0.8, 0.5]), 1e-3)
    assert np.abs(grad).max() < 1e-12 / 1e-3


def test_gradient_bilinear():
    grad = numerical_gradient(lambda v: v[0] * v[1], np.array([0.2, 0.7]), 1e-3)
    assert grad == pytest.approx([0.7, 0.2], abs=1e-8)


def test_gradient_analytic_tolerance():
    """Closed forms within 10 h^2 + 1e-9 on three smooth objectives."""
    h = 1e-3
    tol = 10 * h * h + 1e-9
    p = np.array([0.4, 0.6])

    cases = [
        (lambda v: (v[0] - 0.3) ** 2 + 2 * (v[1] - 0.7) ** 2,
         np.array([2 * (p[0] - 0.3), 4 * (p[1] - 0.7)])),
        (lambda v: float(np.sin(v[0]) * np.exp(v[1])),
         np.array([np.cos(p[0]) * np.exp(p[1]), np.sin(p[0]) * np.exp(p[1])])),
        (lambda v: float(v[0] ** 3 + v[0] * v[1]),
         np.array([3 * p[0] ** 2 + p[1], p[0]])),
    ]
    for f, expected in cases:
        grad = numerical_gradient(f, p, h)
        assert np.abs(grad - expected).max() < tol


def test_gradient_one_sided_at_bounds():
    # probes collapse onto the box; the difference still sees the slope
    grad = numerical_gradient(lambda v: 2.0 * v[0], np.array([0.0]), 1e-3)
    assert grad[0] == pytest.approx(2.0, abs=1e-9)
    grad = numerical_gradient(lambda v: 2.0 * v[0], np.array([1.0]), 1e-3)
    assert grad[0] == pytest.approx(2.0, abs=1e-9)


def test_gradient_failure_names_coordinate():
    def bad(v):
        if v[1] != 0.5:
            raise ValueError("boom")
        return 0.0

    with pytest.raises(OptimizationError, match="coordinate 1"):
        numerical_gradient(bad, np.array([0.5, 0.5]), 1e-3)


def test_minimize_convex_bowl():
    result = minimize(bowl, np.array([0.9, 0.9]), OptOptions())
    assert result.best_params == pytest.approx([0.3, 0.3], abs=1e-4)
    assert result.best_loss < 1e-8
    assert result.reason in ("tolerance", "max_iterations")


def test_minimize_bound_active():
    result = minimize(lambda v: -v[0], np.array([0.2]), OptOptions())
    assert result.best_params[0] == pytest.approx(1.0, abs=1e-4)
    assert result.best_loss == pytest.approx(-1.0, abs=1e-4)


def test_minimize_never_leaves_box():
    calls = []

    def watched(v):
        calls.append(np.asarray(v).copy())
        return bowl(v) - 5 * v[0]  # pushes toward the c=1 face

    result = minimize(watched, np.array([0.5, 0.5]), OptOptions())
    probes = np.array(calls)
    assert probes.min() >= 0.0 and probes.max() <= 1.0
    assert result.best_params.min() >= 0.0 and result.best_params.max() <= 1.0


def test_minimize_history_and_evaluations():
    calls = {"n": 0}

    def counted(v):
        calls["n"] += 1
        return bowl(v)

    result = minimize(counted, np.array([0.9, 0.1]), OptOptions())
    assert result.evaluations == calls["n"]
    assert np.all(np.diff(result.loss_history) <= 0.0)
    assert result.loss_history[0] == pytest.approx(bowl([0.9, 0.1]))
    assert result.best_loss <= result.loss_history[0] + 1e-12


def test_minimize_clips_out_of_box_init():
    result = minimize(bowl, np.array([1.7, -0.4]), OptOptions())
    assert result.best_params == pytest.approx([0.3, 0.3], abs=1e-4)


def test_multi_restart_determinism():
    opts = OptOptions(restarts=4, seed=11)
    a = multi_restart(bowl, 2, opts)
    b = multi_restart(bowl, 2, opts)
    assert np.array_equal(a.best_params, b.best_params)
    assert a.best_loss == b.best_loss
    assert np.array_equal(a.restart_losses, b.restart_losses)
    assert a.evaluations == b.evaluations
    c = multi_restart(bowl, 2, OptOptions(restarts=4, seed=12))
    assert not np.array_equal(a.restart_losses, c.restart_losses) or not np.array_equal(
        a.best_params, c.best_params
    )


def test_multi_restart_invariants():
    opts = OptOptions(restarts=5, seed=7)
    result = multi_restart(bowl, 3, opts)
    assert len(result.restart_losses) == 5
    assert result.best_loss == result.restart_losses.min()
    assert result.best_params == pytest.approx([0.3, 0.3, 0.3], abs=1e-4)


def test_multi_restart_single_equals_minimize():
    opts = OptOptions(restarts=1, seed=3)
    via_multi = multi_restart(bowl, 2, opts)
    init = np.random.default_rng(3).uniform(0.0, 1.0, size=(1, 2))[0]
    direct = minimize(bowl, init, opts)
    assert np.array_equal(via_multi.best_params, direct.best_params)
    assert via_multi.best_loss == direct.best_loss


def test_multi_restart_pool_matches_sequential():
    opts = OptOptions(restarts=3, seed=9)
    seq = multi_restart(bowl, 2, opts, jobs=1)
    par = multi_restart(bowl, 2, opts, jobs=2)
    assert np.array_equal(seq.best_params, par.best_params)
    assert np.array_equal(seq.restart_losses, par.restart_losses)


class _FailsHighQ:
    """Raises like a truncation overflow whenever the second coordinate is high.

    The failing region sits above 0.9 while the bowl minimum pulls toward 0.3,
    so restarts drawn inside it die on their first evaluation and the rest
    never wander back in.
    """

    def __call__(self, v):
        if v[1] > 0.9:
            raise MaserbatError("synthetic overflow")
        return bowl(v)


def test_multi_restart_tolerates_failed_restarts():
    # seed 8 draws exactly one start with v[1] > 0.9 out of eight
    opts = OptOptions(restarts=8, seed=8)
    result = multi_restart(_FailsHighQ(), 2, opts)
    assert np.isinf(result.restart_losses).sum() == 1
    assert np.isfinite(result.best_loss)
    assert result.best_params == pytest.approx([0.3, 0.3], abs=1e-4)


def test_multi_restart_all_failed_raises():
    def always_fails(v):
        raise MaserbatError("synthetic overflow")

    with pytest.raises(OptimizationError, match="restarts failed"):
        multi_restart(always_fails, 2, OptOptions(restarts=3, seed=1))


def test_matches_scipy_reference():
    scipy_opt = pytest.importorskip("scipy.optimize")

    def rosen_like(v):
        return float((v[0] - 0.55) ** 2 + 10 * (v[1] - v[0] ** 2) ** 2)

    ours = minimize(rosen_like, np.array([0.1, 0.9]), OptOptions(max_iterations=500))
    ref = scipy_opt.minimize(
        rosen_like, [0.1, 0.9], method="L-BFGS-B", bounds=[(0, 1), (0, 1)]
    )
    assert ours.best_params == pytest.approx(ref.x, abs=1e-3)
    assert ours.best_loss <= ref.fun + 1e-6
