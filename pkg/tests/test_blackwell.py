import math

import numpy as np
import pytest

from helpers import random_problem, random_two_source_binary
from rbkit.blackwell import (
    FeasiblePolytope,
    SizeError,
    build_polytope,
    deficiency,
    deficiency_bound_check,
    enumerate_vertices,
    exact_blackwell_redundancy,
)
from rbkit.gates import gate_copy
from rbkit.probability import Dist
from rbkit.problem import SourceChannel, build_problem, problem_from_json
from rbkit.solver import SolverConfig, induced_joint, solve_lagrangian

LN2 = math.log(2.0)


def _bsc(eps):
    return np.array([[1 - eps, eps], [eps, 1 - eps]])


class TestPolytope:
    def test_single_source_reduces_to_stochasticity(self):
        problem = build_problem(
            Dist(["0", "1"], [0.5, 0.5]),
            [SourceChannel("X1", ["0", "1"], _bsc(0.1))],
        )
        pol = build_polytope(problem)
        # one row per (source, outcome), nothing else
        assert pol.A.shape[0] == 2
        np.testing.assert_array_equal(pol.b, [1.0, 1.0])

    def test_unique_gate_feasible_points_have_constant_columns(self, unique_problem):
        pol = build_polytope(unique_problem)
        verts = enumerate_vertices(pol)
        rng = np.random.default_rng(0)
        p2 = unique_problem.sources[1].matrix
        nq = pol.q_cardinality
        for _ in range(20):
            w = rng.dirichlet(np.ones(verts.shape[0]))
            x = w @ verts  # convex combinations stay feasible
            k2 = x[pol.offsets[1] : pol.offsets[1] + 2 * nq].reshape(2, nq)
            cond = np.einsum("xq,yx->yq", k2, p2)
            np.testing.assert_allclose(cond[0], cond[1], atol=1e-9)

    def test_and_gate_identity_garbling_feasible(self, and_problem):
        pol = build_polytope(and_problem)
        nq = pol.q_cardinality
        x = np.zeros(pol.A.shape[1])
        for off in pol.offsets:
            for xi in range(2):
                x[off + xi * nq + xi] = 1.0
        assert np.max(np.abs(pol.A @ x - pol.b)) <= 1e-12


class TestEnumerateVertices:
    def test_simplex(self):
        pol = FeasiblePolytope(
            A=np.ones((1, 3)), b=np.array([1.0]), q_cardinality=1,
            alphabet_sizes=(3,), offsets=(0,),
        )
        verts = enumerate_vertices(pol)
        rows = sorted(tuple(np.round(v, 9)) for v in verts)
        assert rows == [(0, 0, 1), (0, 1, 0), (1, 0, 0)]

    def test_unit_box_slack_form(self):
        # x in [0,1]^2 with slacks: x_i + s_i = 1
        A = np.array([[1.0, 0.0, 1.0, 0.0], [0.0, 1.0, 0.0, 1.0]])
        pol = FeasiblePolytope(
            A=A, b=np.ones(2), q_cardinality=1, alphabet_sizes=(4,), offsets=(0,),
        )
        verts = enumerate_vertices(pol)
        corners = sorted(tuple(np.round(v[:2], 9)) for v in verts)
        assert corners == [(0.0, 0.0), (0.0, 1.0), (1.0, 0.0), (1.0, 1.0)]

    def test_random_polytopes_feasible_and_extreme(self):
        rng = np.random.default_rng(12)
        for _ in range(10):
            m, d = 3, 6
            A = rng.normal(size=(m, d))
            x0 = rng.random(d)  # feasible by construction
            b = A @ x0
            pol = FeasiblePolytope(
                A=A, b=b, q_cardinality=1, alphabet_sizes=(d,), offsets=(0,),
            )
            verts = enumerate_vertices(pol)
            assert verts.shape[0] >= 1
            for v in verts:
                assert np.max(np.abs(A @ v - b)) <= 1e-8
                assert np.all(v >= -1e-9)
            # no vertex is a strict convex combination of two others
            for i in range(verts.shape[0]):
                for j in range(verts.shape[0]):
                    for k in range(j + 1, verts.shape[0]):
                        if i == j or i == k:
                            continue
                        diff = verts[j] - verts[k]
                        denom = diff @ diff
                        if denom < 1e-18:
                            continue
                        lam = (verts[i] - verts[k]) @ diff / denom
                        if 1e-7 < lam < 1 - 1e-7:
                            recon = lam * verts[j] + (1 - lam) * verts[k]
                            assert np.max(np.abs(recon - verts[i])) > 1e-7

    def test_budget_exceeded(self, unique_problem):
        pol = build_polytope(unique_problem)
        with pytest.raises(SizeError):
            enumerate_vertices(pol, budget=10)


class TestExactRedundancy:
    def test_and_gate(self, and_problem):
        res = exact_blackwell_redundancy(and_problem)
        assert res.bits == pytest.approx(0.311278124459133, abs=1e-6)
        assert res.composition_gap <= 1e-8

    def test_unique_gate(self, unique_problem):
        res = exact_blackwell_redundancy(unique_problem)
        assert res.bits == pytest.approx(0.0, abs=1e-6)

    def test_copy_gate_discontinuity(self):
        at0 = exact_blackwell_redundancy(problem_from_json(gate_copy(0.0)))
        assert at0.bits == pytest.approx(1.0, abs=1e-6)
        for eps in (0.25, 0.5):
            res = exact_blackwell_redundancy(problem_from_json(gate_copy(eps)))
            assert res.bits == pytest.approx(0.0, abs=1e-6)

    def test_witness_is_valid(self):
        rng = np.random.default_rng(4)
        for _ in range(5):
            problem = random_two_source_binary(rng)
            res = exact_blackwell_redundancy(problem)
            comps = []
            for s, g in enumerate(res.garblings):
                np.testing.assert_allclose(g.sum(axis=1), 1.0, atol=1e-8)
                assert np.all(g >= -1e-9)
                comps.append(
                    np.einsum("xq,yx->yq", g, problem.sources[s].matrix)
                )
            np.testing.assert_allclose(comps[0], comps[1], atol=1e-8)
            np.testing.assert_allclose(comps[0], res.p_q_given_y, atol=1e-8)

    def test_single_source_equals_source_information(self):
        from rbkit.problem import source_mutual_informations

        problem = build_problem(
            Dist(["0", "1"], [0.4, 0.6]),
            [SourceChannel("X1", ["0", "1"], _bsc(0.15))],
        )
        res = exact_blackwell_redundancy(problem)
        assert res.value == pytest.approx(
            source_mutual_informations(problem)[0], abs=1e-9
        )

    def test_budget_error_on_large_gate(self, bsc4_problem):
        with pytest.raises(SizeError):
            exact_blackwell_redundancy(bsc4_problem)


class TestDeficiency:
    def test_identical_channels(self):
        py = Dist(["0", "1"], [0.5, 0.5])
        res = deficiency(_bsc(0.1), _bsc(0.1), py)
        assert res.value <= 1e-9
        assert res.converged

    def test_garbling_exists(self):
        # BSC(0.1) composed with BSC(0.125) gives BSC(0.2)
        py = Dist(["0", "1"], [0.5, 0.5])
        res = deficiency(_bsc(0.1), _bsc(0.2), py)
        assert res.value <= 1e-9

    def test_reverse_direction_positive_matches_grid(self):
        py = np.array([0.5, 0.5])
        pc, pb = _bsc(0.2), _bsc(0.1)
        res = deficiency(pc, pb, py)
        assert res.value > 1e-3

        # dense grid over 2x2 stochastic kappa at resolution 1e-3
        a = np.linspace(0.0, 1.0, 1001)
        k00, k10 = np.meshgrid(a, a, indexing="ij")  # kappa(b=0|c)
        m0 = pc[:, 0][:, None, None] * k00[None] + pc[:, 1][:, None, None] * k10[None]
        m1 = 1.0 - m0
        with np.errstate(divide="ignore", invalid="ignore"):
            t0 = np.where(m0 > 0, m0 * (np.log(m0) - np.log(pb[:, 0][:, None, None])), 0.0)
            t1 = np.where(m1 > 0, m1 * (np.log(m1) - np.log(pb[:, 1][:, None, None])), 0.0)
        grid_min = float(np.min(np.sum(py[:, None, None] * (t0 + t1), axis=0)))
        assert res.value <= grid_min + 1e-9
        assert grid_min - res.value <= 5e-4

    def test_objective_trace_monotone(self):
        py = Dist(["0", "1"], [0.5, 0.5])
        res = deficiency(_bsc(0.3), _bsc(0.05), py, trace=True)
        diffs = np.diff(res.objective_trace)
        assert np.all(diffs <= 1e-12)

    def test_infinite_sentinel(self):
        # constant source channel cannot garble onto the identity's zeros
        py = Dist(["0", "1"], [0.5, 0.5])
        const = np.array([[1.0, 0.0], [1.0, 0.0]])
        res = deficiency(const, np.eye(2), py)
        assert res.value == math.inf
        assert res.kappa is None

    def test_kappa_is_row_stochastic(self):
        py = Dist(["0", "1"], [0.3, 0.7])
        res = deficiency(_bsc(0.25), _bsc(0.1), py)
        np.testing.assert_allclose(res.kappa.sum(axis=1), 1.0, atol=1e-12)


class TestDeficiencyBound:
    def test_zero_compression_case(self, unique_problem):
        # constant bottleneck: no compression and zero deficiencies
        from rbkit.solver import BottleneckChannel

        nq = 3
        channel = BottleneckChannel(
            np.full((4, nq), 1.0 / nq), unique_problem.support
        )
        joint = induced_joint(unique_problem, channel)
        assert all(deficiency_bound_check(joint, unique_problem))

    def test_unique_max_beta_optimum(self, unique_problem):
        pt = solve_lagrangian(unique_problem, SolverConfig(beta=200.0, seed=0))
        joint = induced_joint(unique_problem, pt.channel)
        assert all(deficiency_bound_check(joint, unique_problem))

    def test_random_solved_points(self):
        rng = np.random.default_rng(19)
        for _ in range(3):
            problem = random_problem(rng, n_sources=2)
            pt = solve_lagrangian(problem, SolverConfig(beta=10.0, seed=7))
            joint = induced_joint(problem, pt.channel)
            assert all(deficiency_bound_check(joint, problem))
