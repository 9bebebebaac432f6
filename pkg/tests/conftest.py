import time

import pytest

from rbkit.gates import gate_and, gate_bsc4, gate_copy, gate_threespin, gate_unique
from rbkit.problem import problem_from_json
from rbkit.solver import SolverConfig, default_beta_grid, solve_lagrangian, sweep


@pytest.fixture(scope="session")
def warm_kernels():
    """Compile the jitted kernels once so timed runs measure the solver."""
    prob = problem_from_json(gate_unique())
    solve_lagrangian(prob, SolverConfig(beta=1.0, restarts=1, max_iters=4, tol=1e-6))
    return True


@pytest.fixture(scope="session")
def unique_problem():
    return problem_from_json(gate_unique())


@pytest.fixture(scope="session")
def and_problem():
    return problem_from_json(gate_and())


@pytest.fixture(scope="session")
def bsc4_problem():
    return problem_from_json(gate_bsc4())


@pytest.fixture(scope="session")
def threespin_problem():
    return problem_from_json(gate_threespin())


@pytest.fixture(scope="session")
def copy25_problem():
    return problem_from_json(gate_copy(0.25))


def _timed_sweep(problem, warm):
    assert warm
    start = time.monotonic()
    curve = sweep(problem, default_beta_grid(), SolverConfig(seed=0))
    return curve, time.monotonic() - start


@pytest.fixture(scope="session")
def unique_sweep(unique_problem, warm_kernels):
    return _timed_sweep(unique_problem, warm_kernels)


@pytest.fixture(scope="session")
def and_sweep(and_problem, warm_kernels):
    return _timed_sweep(and_problem, warm_kernels)


@pytest.fixture(scope="session")
def bsc4_sweep(bsc4_problem, warm_kernels):
    return _timed_sweep(bsc4_problem, warm_kernels)


@pytest.fixture(scope="session")
def threespin_sweep(threespin_problem, warm_kernels):
    return _timed_sweep(threespin_problem, warm_kernels)


@pytest.fixture(scope="session")
def copy25_sweep(copy25_problem, warm_kernels):
    return _timed_sweep(copy25_problem, warm_kernels)


@pytest.fixture(scope="session")
def gate_sweeps(unique_sweep, and_sweep, bsc4_sweep, threespin_sweep, copy25_sweep,
                unique_problem, and_problem, bsc4_problem, threespin_problem,
                copy25_problem):
    return {
        "unique": (unique_problem, unique_sweep[0]),
        "and": (and_problem, and_sweep[0]),
        "bsc4": (bsc4_problem, bsc4_sweep[0]),
        "threespin": (threespin_problem, threespin_sweep[0]),
        "copy25": (copy25_problem, copy25_sweep[0]),
    }
