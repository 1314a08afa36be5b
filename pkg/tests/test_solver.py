import numpy as np
import pytest

from nucs.allocation import sample_urs
from nucs.projection import IndexSet, ProjectionOperator, extend, measure, suppress_outside
from nucs.solver import (BasisPursuitProblem, SolverConfig, soft_threshold, solve_l0_bruteforce,
                         solve_l1, support_of)
from nucs.spectral import SpectrumProfile, dft_matrix, generate_spectrum, idft

cp = pytest.importorskip("cvxpy")


def sparse_time_problem(N, M, K, seed):
    rng = np.random.default_rng(seed)
    s = np.zeros(N, dtype=complex)
    supp = rng.choice(N, K, replace=False)
    s[supp] = rng.standard_normal(K) + 1j * rng.standard_normal(K)
    op = ProjectionOperator(sample_urs(N, M, rng))
    return BasisPursuitProblem(op, measure(op, s)), s


def cvxpy_l1(problem):
    # independent interior-point reference for the same program
    N = problem.N
    A = dft_matrix(N)[problem.operator.rows]
    x = cp.Variable(N, complex=True)
    obj = cp.norm1(x) if problem.sparsity_domain == "time" else cp.norm1(dft_matrix(N) @ x)
    prob = cp.Problem(cp.Minimize(obj), [A @ x == problem.measurements])
    prob.solve(solver=cp.CLARABEL)
    return prob.value, x.value


def test_soft_threshold():
    v = np.array([3 + 4j, 0.5, -2.0, 0])
    out = soft_threshold(v, 1.0)
    assert np.allclose(out, [(3 + 4j) * 0.8, 0, -1.0, 0])


def test_problem_validation():
    op = extend(ProjectionOperator.from_indices([0], 4))
    with pytest.raises(ValueError):
        BasisPursuitProblem(op, np.ones(3))
    with pytest.raises(ValueError):
        BasisPursuitProblem(op, np.ones(4))  # nonzero suppressed block
    with pytest.raises(ValueError):
        BasisPursuitProblem(op, np.zeros(4), "wavelet")


@pytest.mark.parametrize("kw", [dict(tolerance=0), dict(max_iterations=0), dict(penalty=-1),
                                dict(relaxation=2.0)])
def test_config_validation(kw):
    with pytest.raises(ValueError):
        SolverConfig(**kw)


def test_impulse_recovered_from_few_rows():
    N = 32
    s = np.zeros(N, dtype=complex)
    s[5] = 2 - 1j
    op = ProjectionOperator(IndexSet.of([0, 3, 9, 17, 30], N))
    rep = solve_l1(BasisPursuitProblem(op, measure(op, s)))
    assert rep.converged
    assert np.abs(rep.solution.values - s).max() < 1e-6
    assert support_of(rep.solution.values) == (5,)


def test_zero_measurements():
    op = ProjectionOperator.from_indices([1, 2], 8)
    rep = solve_l1(BasisPursuitProblem(op, np.zeros(2)))
    assert rep.converged and rep.iterations_used == 0
    assert not rep.solution.values.any()


@pytest.mark.parametrize("seed", range(6))
def test_objective_matches_cvxpy(seed):
    N = 24
    prob, _ = sparse_time_problem(N, 9, 4, seed)
    rep = solve_l1(prob, SolverConfig(tolerance=1e-9, max_iterations=20000))
    ref_obj, ref_x = cvxpy_l1(prob)
    assert rep.objective == pytest.approx(ref_obj, rel=1e-5)
    assert np.abs(rep.solution.values - ref_x).max() < 1e-3 * np.abs(ref_x).max()


def test_band_problem_matches_cvxpy():
    N = 48
    prof = SpectrumProfile.flat_band(6, 15, phase="random", phase_seed=3)
    s = idft(generate_spectrum(prof, N))
    sup = IndexSet(prof.support(), N)
    sel = IndexSet.of([6, 9, 12, 14, 20], N)
    prob = BasisPursuitProblem(suppress_outside(sel, sup), measure(suppress_outside(sel, sup), s))
    rep = solve_l1(prob, SolverConfig(tolerance=1e-9, max_iterations=20000))
    ref_obj, _ = cvxpy_l1(prob)
    assert rep.objective == pytest.approx(ref_obj, rel=1e-5)
    spec = np.fft.fft(rep.solution.values, norm="ortho")
    assert np.abs(spec[~sup.mask()]).max() < 1e-6


def test_frequency_domain_objective():
    N = 32
    S = np.zeros(N, dtype=complex)
    S[[4, 11]] = [1.0, 0.5j]
    s = np.fft.ifft(S, norm="ortho")
    # measure three bins including the two tones, force nothing
    op = ProjectionOperator.from_indices([4, 11, 20], N)
    rep = solve_l1(BasisPursuitProblem(op, measure(op, s), "frequency"))
    assert rep.converged
    assert np.abs(rep.solution.values - s).max() < 1e-6


@pytest.mark.parametrize("seed", range(5))
def test_invariants(seed):
    tol = 1e-7
    prob, _ = sparse_time_problem(32, 12, 3, 100 + seed)
    # two tones on a grid of every third bin, everything else forced to zero
    rng = np.random.default_rng(seed)
    op = extend(ProjectionOperator(IndexSet.of(range(0, 32, 3), 32)))
    S = np.zeros(32, dtype=complex)
    S[rng.choice(op.selected.indices, 2, replace=False)] = [1.0, -0.3j]
    tones = BasisPursuitProblem(op, measure(op, np.fft.ifft(S, norm="ortho")), "frequency")
    for p in (prob, tones):
        rep = solve_l1(p, SolverConfig(tolerance=tol))
        assert rep.converged
        got = measure(p.operator, rep.solution).values[:len(p.operator.selected)]
        assert np.abs(got - p.measurements[:len(got)]).max() <= 10 * tol
        spec = np.fft.fft(rep.solution.values, norm="ortho")
        if len(p.operator.suppressed):
            assert np.abs(spec[p.operator.suppressed.indices]).max() <= 10 * tol
        h = rep.history
        assert np.all(np.diff(h[10:]) <= 1e-12 * h[0])


@pytest.mark.parametrize("c", [3.0, -0.5, 2j, 1e-3 * (1 + 1j), 1e4])
def test_scaling_equivariance(c):
    prob, _ = sparse_time_problem(40, 14, 3, 7)
    a = solve_l1(prob, SolverConfig(tolerance=1e-10))
    b = solve_l1(prob.scaled(c), SolverConfig(tolerance=1e-10))
    assert np.abs(b.solution.values - c * a.solution.values).max() <= 1e-7 * abs(c)


def test_reports_non_convergence():
    prob, _ = sparse_time_problem(64, 20, 6, 1)
    rep = solve_l1(prob, SolverConfig(max_iterations=3))
    assert not rep.converged and rep.status == "max_iterations"
    assert rep.iterations_used == 3
    # the incumbent is still feasible
    got = measure(prob.operator, rep.solution).values
    assert np.abs(got - prob.measurements).max() < 1e-12


def test_support_of():
    assert support_of(np.array([1.0, 1e-6, -0.5, 0])) == (0, 2)
    assert support_of(np.zeros(3)) == ()


def test_l0_recovers_impulse():
    N = 8
    s = np.zeros(N, dtype=complex)
    s[6] = -1.5
    op = ProjectionOperator.from_indices([0, 1, 3, 6], N)
    rep = solve_l0_bruteforce(BasisPursuitProblem(op, measure(op, s)), k_max=2)
    assert rep.support == (6,)
    assert np.abs(rep.solution.values - s).max() < 1e-12


def test_l0_zero_measurements():
    op = ProjectionOperator.from_indices([0, 1], 8)
    rep = solve_l0_bruteforce(BasisPursuitProblem(op, np.zeros(2)), 2)
    assert rep.support == () and rep.converged


def test_l0_guard_and_infeasible():
    op = ProjectionOperator.from_indices([0, 1], 32)
    with pytest.raises(ValueError):
        solve_l0_bruteforce(BasisPursuitProblem(op, np.ones(2)), 1)
    op = ProjectionOperator.from_indices(range(6), 8)
    rng = np.random.default_rng(0)
    s = rng.standard_normal(8)
    rep = solve_l0_bruteforce(BasisPursuitProblem(op, measure(op, s)), 2)
    assert not rep.converged and "infeasible" in rep.status


def test_l0_tie_keeps_lexicographic_support():
    # one row measuring bin 0 sees every time sample equally: all 1-sparse
    # supports fit with the same L1 norm, so the first one wins
    op = ProjectionOperator.from_indices([0], 6)
    rep = solve_l0_bruteforce(BasisPursuitProblem(op, np.array([1.0])), 1)
    assert rep.support == (0,)


def test_l0_l1_agree_n12():
    agree = 0
    for seed in range(100):
        prob, _ = sparse_time_problem(12, 7, 2, 500 + seed)
        a = solve_l1(prob)
        b = solve_l0_bruteforce(prob, 2)
        agree += support_of(a.solution.values) == b.support
    assert agree >= 95
