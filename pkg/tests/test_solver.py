"""Solver tests against analytic optima and an independent backend."""

import numpy as np
import pytest

from mdiqrng.detector import ConditionalStats, IntervalStats, enumerate_patterns
from mdiqrng.fock import BlockDiagonalState, PureSectorState, TruncatedFockSpace
from mdiqrng.sdp import (
    SolverConfig,
    available_backends,
    block_reduce,
    build_guessing_sdp,
    facial_reduce,
    solve,
)
from mdiqrng.sdp.problem import (
    LinearConstraint,
    PsdVariable,
    SdpProblem,
)

from test_sdp_build import (
    ideal_qutrit_instance,
    noisy_qubit_instance,
    single_photon,
    uniform_photon,
)


def eigenvalue_problem(C):
    """max <C, X> with tr X = 1, X >= 0; optimum is the largest eigenvalue."""
    d = C.shape[0]
    return SdpProblem(
        psd_vars=(PsdVariable(label="X", dims=(d,)),),
        scalar_vars=(),
        objective_matrix=(("X", (C,)),),
        objective_scalar=(),
        eq_constraints=(LinearConstraint(
            matrix_terms=(("X", (np.eye(d, dtype=complex),)),),
            rhs=1.0, name="trace"),),
        ineq_constraints=(),
        meta={},
    )


class TestAnalyticOracles:
    @pytest.mark.parametrize("dim,seed", [(2, 0), (4, 1), (7, 2)])
    def test_largest_eigenvalue(self, dim, seed):
        rng = np.random.default_rng(seed)
        A = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
        C = (A + A.conj().T) / 2
        sol = solve(eigenvalue_problem(C))
        assert sol.optimal
        ref = float(np.linalg.eigvalsh(C)[-1])
        assert sol.dual_value == pytest.approx(ref, abs=1e-7)
        X = sol.psd_values["X"][0].matrix
        assert np.trace(X).real == pytest.approx(1.0, abs=1e-7)

    def test_ideal_qutrit_third(self):
        states, stats = ideal_qutrit_instance()
        prob = build_guessing_sdp(states, "G", stats=stats)
        fr = facial_reduce(block_reduce(prob))
        sol = solve(fr.problem)
        assert sol.optimal
        assert sol.dual_value == pytest.approx(1.0 / 3.0, abs=1e-7)

    def test_ideal_qubit_half(self):
        space = TruncatedFockSpace(modes=2, cutoff=1)
        states = {
            "T1": single_photon(space, 0, "T1"),
            "T2": single_photon(space, 1, "T2"),
            "G": uniform_photon(space, "G"),
        }
        patterns = enumerate_patterns(2)
        table = np.zeros((3, 4))
        for i in range(2):
            pat = tuple(1 if d == i else 0 for d in range(2))
            table[i, patterns.index(pat)] = 1.0
            table[2, patterns.index(pat)] = 0.5
        stats = ConditionalStats(settings=("T1", "T2", "G"), patterns=patterns,
                                 table=table, kind="probability")
        prob = build_guessing_sdp(states, "G", stats=stats)
        fr = facial_reduce(block_reduce(prob))
        sol = solve(fr.problem)
        assert sol.optimal
        assert sol.dual_value == pytest.approx(0.5, abs=1e-7)

    def test_deterministic_generation_gives_no_entropy(self):
        # if the generation outcome is a fixed pattern the guesser is right
        # every round, regardless of what the test rows look like
        space = TruncatedFockSpace(modes=2, cutoff=1)
        states = {
            "T1": single_photon(space, 0, "T1"),
            "G": single_photon(space, 0, "G"),
        }
        patterns = enumerate_patterns(2)
        table = np.zeros((2, 4))
        i10 = patterns.index((1, 0))
        table[0, i10] = 1.0
        table[1, i10] = 1.0
        stats = ConditionalStats(settings=("T1", "G"), patterns=patterns,
                                 table=table, kind="probability")
        prob = build_guessing_sdp(states, "G", stats=stats)
        fr = facial_reduce(block_reduce(prob))
        sol = solve(fr.problem)
        assert sol.optimal
        assert sol.dual_value == pytest.approx(1.0, abs=1e-7)

    def test_guess_best_outcome_lower_bound(self):
        # always-guess-the-mode is a valid adversary strategy, so the SDP
        # value can never fall below the largest generation probability
        states, stats = noisy_qubit_instance(mu=0.7, visibility=0.95)
        prob = build_guessing_sdp(states, "G", stats=stats)
        sol = solve(block_reduce(prob))
        assert sol.optimal
        gi = stats.settings.index("G")
        assert sol.dual_value >= float(np.max(stats.table[gi])) - 1e-7


class TestInfeasibility:
    def test_farkas_certificate_on_impossible_trace(self):
        prob = SdpProblem(
            psd_vars=(PsdVariable(label="X", dims=(3,)),),
            scalar_vars=(),
            objective_matrix=(("X", (np.eye(3, dtype=complex),)),),
            objective_scalar=(),
            eq_constraints=(LinearConstraint(
                matrix_terms=(("X", (np.eye(3, dtype=complex),)),),
                rhs=-1.0, name="trace"),),
            ineq_constraints=(),
            meta={},
        )
        sol = solve(prob)
        assert sol.status == "infeasible"
        assert sol.certificate is not None

    def test_contradictory_statistics_detected(self):
        # same preparation, incompatible claimed distributions; reductions
        # are bypassed so the solver itself must refuse
        space = TruncatedFockSpace(modes=2, cutoff=1)
        states = {
            "T1": single_photon(space, 0, "T1"),
            "T2": single_photon(space, 0, "T2"),
            "G": uniform_photon(space, "G"),
        }
        patterns = enumerate_patterns(2)
        table = np.zeros((3, 4))
        i01 = patterns.index((0, 1))
        i10 = patterns.index((1, 0))
        table[0, i10] = 0.9
        table[0, i01] = 0.1
        table[1, i01] = 0.4
        table[1, i10] = 0.6
        table[2, i01] = 0.5
        table[2, i10] = 0.5
        stats = ConditionalStats(settings=("T1", "T2", "G"), patterns=patterns,
                                 table=table, kind="probability")
        prob = build_guessing_sdp(states, "G", stats=stats)
        sol = solve(block_reduce(prob))
        assert sol.status == "infeasible"


class TestIntervalMode:
    def build(self, delta):
        states, stats = noisy_qubit_instance(mu=0.6, visibility=0.9)
        lo = np.clip(stats.table - delta, 0.0, 1.0)
        hi = np.clip(stats.table + delta, 0.0, 1.0)
        iv = IntervalStats(settings=stats.settings, patterns=stats.patterns,
                           lower=lo, upper=hi)
        return build_guessing_sdp(states, "G", intervals=iv)

    def test_tight_intervals_match_equalities(self):
        states, stats = noisy_qubit_instance(mu=0.6, visibility=0.9)
        eq = solve(block_reduce(build_guessing_sdp(states, "G", stats=stats)))
        iv = solve(block_reduce(self.build(1e-9)))
        assert eq.optimal and iv.optimal
        assert iv.dual_value == pytest.approx(eq.dual_value, abs=1e-5)

    def test_wider_intervals_never_decrease_the_optimum(self):
        vals = []
        for delta in (1e-6, 1e-3, 3e-2):
            sol = solve(block_reduce(self.build(delta)))
            assert sol.optimal
            vals.append(sol.dual_value)
        assert vals[0] <= vals[1] + 1e-7
        assert vals[1] <= vals[2] + 1e-7

    def test_q_weights_form_a_distribution(self):
        sol = solve(block_reduce(self.build(1e-3)))
        q = np.array([v for k, v in sorted(sol.scalar_values.items())])
        assert np.all(q > -1e-8)
        assert q.sum() == pytest.approx(1.0, abs=1e-6)


@pytest.mark.skipif("cvxpy" not in available_backends(),
                    reason="cvxpy backend not installed")
class TestCrossCheck:
    def test_noisy_qubit_matches_cvxpy(self):
        states, stats = noisy_qubit_instance(mu=0.5, visibility=0.92)
        prob = block_reduce(build_guessing_sdp(states, "G", stats=stats))
        ours = solve(prob)
        ref = solve(prob, SolverConfig(backend="cvxpy"))
        assert ours.optimal and ref.optimal
        assert ours.dual_value == pytest.approx(ref.dual_value, abs=5e-6)

    def test_eigenvalue_matches_cvxpy(self):
        rng = np.random.default_rng(7)
        A = rng.normal(size=(5, 5)) + 1j * rng.normal(size=(5, 5))
        C = (A + A.conj().T) / 2
        prob = eigenvalue_problem(C)
        ours = solve(prob)
        ref = solve(prob, SolverConfig(backend="cvxpy"))
        assert ours.dual_value == pytest.approx(ref.dual_value, abs=1e-6)


class TestSolutionQuality:
    def test_residuals_reported_small(self):
        states, stats = ideal_qutrit_instance()
        fr = facial_reduce(block_reduce(build_guessing_sdp(states, "G", stats=stats)))
        sol = solve(fr.problem)
        assert sol.optimal
        assert sol.residuals["primal"] < 1e-6
        assert sol.residuals["dual"] < 1e-6
        assert sol.residuals["min_eigenvalue"] > -1e-8
        assert sol.duality_gap < 1e-6

    def test_iteration_budget_failure_is_flagged(self):
        states, stats = noisy_qubit_instance()
        prob = block_reduce(build_guessing_sdp(states, "G", stats=stats))
        sol = solve(prob, SolverConfig(max_iter=3))
        assert sol.status == "numerical-failure"
        assert not sol.optimal
        assert sol.message
