"""Parity between the numba kernels and the pure-numpy fallback."""

import numpy as np
import pytest

from helpers import random_problem
from rbkit import _kernels_numpy
from rbkit.kernels import default_backend_name, get_backend
from rbkit.solver import SolverConfig, _pack, init_bottleneck, solve_lagrangian

BACKENDS = ("numpy", "numba")


def _packed_and_channel(seed):
    rng = np.random.default_rng(seed)
    problem = random_problem(rng)
    packed = _pack(problem)
    channel = init_bottleneck(SolverConfig(seed=seed), problem)
    return problem, packed, channel.matrix


@pytest.mark.parametrize("seed", [0, 1, 2, 3, 4])
def test_evaluate_parity(seed):
    _, packed, r = _packed_and_channel(seed)
    out = {}
    for name in BACKENDS:
        kern = get_backend(name)
        T, M, Tq, pred, comp, pred_s, comp_s = kern.evaluate(
            packed.P, packed.src_ptr, packed.py, packed.nu, r
        )
        out[name] = (T, pred, comp, pred_s, comp_s)
    np.testing.assert_allclose(out["numpy"][0], out["numba"][0], atol=1e-14)
    assert out["numpy"][1] == pytest.approx(out["numba"][1], abs=1e-12)
    assert out["numpy"][2] == pytest.approx(out["numba"][2], abs=1e-12)
    np.testing.assert_allclose(out["numpy"][3], out["numba"][3], atol=1e-12)
    np.testing.assert_allclose(out["numpy"][4], out["numba"][4], atol=1e-12)


@pytest.mark.parametrize("seed", [0, 1, 2])
@pytest.mark.parametrize("beta_eff", [0.1, 1.0, 25.0])
def test_update_parity(seed, beta_eff):
    _, packed, r = _packed_and_channel(seed)
    out = {}
    for name in BACKENDS:
        kern = get_backend(name)
        T, M, Tq = kern.evaluate(packed.P, packed.src_ptr, packed.py, packed.nu, r)[:3]
        r_new, resets = kern.update(
            packed.P, packed.A, packed.src_ptr, packed.py, packed.nu,
            r, T, M, Tq, beta_eff,
        )
        out[name] = (r_new, resets)
    np.testing.assert_allclose(out["numpy"][0], out["numba"][0], atol=5e-13)
    assert out["numpy"][1] == out["numba"][1] == 0


@pytest.mark.parametrize("exp_mode", [False, True])
def test_solve_parity(exp_mode):
    _, packed, r = _packed_and_channel(7)
    results = {}
    for name in BACKENDS:
        kern = get_backend(name)
        results[name] = kern.solve(
            packed.P, packed.A, packed.src_ptr, packed.py, packed.nu,
            r, 5.0, exp_mode, 1e-10, 2000,
        )
    for i in (1, 2, 5):  # pred, comp, objective
        assert results["numpy"][i] == pytest.approx(results["numba"][i], abs=1e-8)


@pytest.mark.parametrize("name", BACKENDS)
def test_dead_row_resets_to_uniform(name):
    _, packed, r = _packed_and_channel(9)
    r = r.copy()
    r[2, :] = 0.0  # malformed row: every candidate weight becomes -inf
    kern = get_backend(name)
    T, M, Tq = kern.evaluate(packed.P, packed.src_ptr, packed.py, packed.nu, r)[:3]
    r_new, resets = kern.update(
        packed.P, packed.A, packed.src_ptr, packed.py, packed.nu,
        r, T, M, Tq, 1.0,
    )
    assert resets == 1
    np.testing.assert_allclose(r_new[2], np.full(r.shape[1], 1.0 / r.shape[1]))
    np.testing.assert_allclose(r_new.sum(axis=1), 1.0, atol=1e-12)


def test_env_flag_selects_backend(monkeypatch):
    monkeypatch.setenv("RBKIT_BACKEND", "numpy")
    assert default_backend_name() == "numpy"
    assert get_backend() is _kernels_numpy
    monkeypatch.setenv("RBKIT_BACKEND", "nope")
    with pytest.raises(ValueError):
        default_backend_name()
    monkeypatch.delenv("RBKIT_BACKEND")
    assert default_backend_name() in BACKENDS


def test_unknown_backend_rejected():
    with pytest.raises(ValueError):
        get_backend("cython")


def test_solver_results_agree_across_backends():
    rng = np.random.default_rng(31)
    problem = random_problem(rng)
    points = {
        name: solve_lagrangian(problem, SolverConfig(beta=3.0, seed=5, backend=name))
        for name in BACKENDS
    }
    assert points["numpy"].prediction == pytest.approx(
        points["numba"].prediction, abs=1e-8
    )
    assert points["numpy"].compression == pytest.approx(
        points["numba"].compression, abs=1e-8
    )


@pytest.mark.parametrize("name", BACKENDS)
def test_objective_stays_finite_under_extreme_decay(name):
    # at very large beta dead bottleneck states decay into subnormals; the
    # information terms must stay finite (no log of an underflowed product)
    import warnings

    from rbkit.gates import gate_threespin
    from rbkit.problem import problem_from_json

    problem = problem_from_json(gate_threespin())
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        pt = solve_lagrangian(
            problem,
            SolverConfig(beta=1000.0, seed=0, restarts=1, max_iters=800,
                         backend=name),
        )
    assert np.isfinite(pt.objective)
    assert np.isfinite(pt.prediction) and np.isfinite(pt.compression)
