#!/usr/bin/env python3
"""
Minimizer and stationarity tests
"""

import sys
sys.path.append('.')

from dataclasses import replace

import numpy as np
from numpy.testing import assert_allclose

from src.core.config_parser import parse_config
from src.core.errors import ConfigError
from src.core.field_grid import Grid2D
from src.core.limit_energy import energy_Ig
from src.core.models import Displacement, PlateProblem, ThicknessPair
from src.core.solver import SolveConfig, minimize, quadratic_hessian, random_cubic, stationarity_report
from src.data.sample_loader import SampleLoader


def _sample(name: str):
    return parse_config(SampleLoader().get_sample(name))


def _assert_nonincreasing(trace):
    energies = [e for _, e, _, _ in trace]
    for before, after in zip(energies, energies[1:]):
        assert after <= before + 1e-14 * abs(before)


def test_zero_problem_converges_from_random_start():
    p = PlateProblem(grid=Grid2D(nx=33, ny=33))
    report = minimize(p, SolveConfig(init='random', seed=4, n_tests=5))
    assert report.converged
    assert report.iterations <= 500
    assert report.energy <= 1e-8
    assert report.grad_norm <= 1e-6
    _assert_nonincreasing(report.energy_trace)


def test_zero_problem_converges_immediately():
    pc = _sample('zero')
    report = minimize(pc.problem, SolveConfig(init='zero', n_tests=3))
    assert report.converged
    assert report.reason == 'grad_tol'
    assert report.iterations == 0
    assert report.energy == 0.0
    assert report.stationarity['weak_max'] == 0.0
    assert report.residuals['el_r1_l2'] == 0.0


def test_compatible_prestrain_reaches_zero_energy():
    pc = _sample('compatible-prestrain')
    report = minimize(pc.problem, pc.solver)
    assert report.converged
    assert report.energy <= 1e-8
    assert report.grad_norm <= pc.solver.grad_tol
    _assert_nonincreasing(report.energy_trace)
    assert report.stationarity['weak_max'] <= 10.0 * pc.solver.grad_tol
    assert report.stationarity['n_tests'] == pc.solver.n_tests


def test_variable_thickness_minimizer_is_stationary():
    pc = _sample('variable-thickness')
    report = minimize(pc.problem, pc.solver)
    assert report.converged
    _assert_nonincreasing(report.energy_trace)
    assert report.energy < report.energy_trace[0][1]
    assert report.stationarity['weak_max'] <= 10.0 * pc.solver.grad_tol
    assert set(report.residuals) >= {'el_r1_l2', 'el_r2_l2', 'bdry_b1', 'bdry_b2', 'bdry_b3', 'airy_ls_residual'}
    assert report.residual_fields['r1'].shape == pc.problem.grid.shape


def test_stationarity_tracks_gradient_tolerance():
    pc = _sample('variable-thickness')
    weak = []
    for tol in (1e-4, 1e-5, 1e-6):
        report = minimize(pc.problem, replace(pc.solver, grad_tol=tol, max_iters=2000))
        assert report.converged
        assert report.stationarity['weak_max'] <= 10.0 * tol
        weak.append(report.stationarity['weak_max'])
    assert weak[0] > weak[1] > weak[2]


def test_strong_residuals_converge_under_refinement():
    growth = _sample('curved-growth').problem.growth
    cfg = SolveConfig(init='zero', grad_tol=1e-7, max_iters=4000, n_tests=0)
    norms = []
    for n in (33, 65):
        p = PlateProblem(grid=Grid2D(nx=n, ny=n), thickness=ThicknessPair(0.5, 0.5), growth=growth)
        report = minimize(p, cfg)
        assert report.converged
        norms.append((report.residuals['el_r1_l2'], report.residuals['el_r2_l2']))
    for coarse, fine in zip(*norms):
        assert np.log2(coarse / fine) >= 0.75


def test_iteration_limit_is_reported():
    pc = _sample('variable-thickness')
    report = minimize(pc.problem, SolveConfig(max_iters=1, seed=3), diagnostics=False)
    assert report.reason == 'max_iters'
    assert not report.converged
    assert report.iterations == 1
    assert len(report.energy_trace) == 2
    assert report.stationarity == {} and report.residuals == {}
    assert report.to_dict()['termination'] == 'max_iters'


def test_seed_reproducibility():
    pc = _sample('variable-thickness')
    cfg = SolveConfig(max_iters=5, seed=7)
    first = minimize(pc.problem, cfg, diagnostics=False)
    second = minimize(pc.problem, cfg, diagnostics=False)
    assert first.energy_trace == second.energy_trace


def test_initial_displacement_is_used():
    pc = _sample('compatible-prestrain')
    start = pc.displacement.sample(pc.problem.grid)
    report = minimize(pc.problem, SolveConfig(n_tests=0), init=start, diagnostics=False)
    # already a minimizer up to discretization
    assert report.energy_trace[0][1] <= 1e-20
    assert_allclose(report.energy, energy_Ig(pc.problem, report.displacement), rtol=1e-12, atol=1e-20)


def test_random_displacement_is_not_stationary():
    pc = _sample('compatible-prestrain')
    rng = np.random.default_rng(11)
    d = Displacement.from_vector(rng.standard_normal(3 * pc.problem.grid.size), pc.problem.grid)
    summary = stationarity_report(pc.problem, d, 5, seed=0)
    assert summary['weak_max'] >= 1e-2
    assert summary['weak_max'] == max(summary['weak_max_r1'], summary['weak_max_r2'])
    assert stationarity_report(pc.problem, d, 0) == {}


def test_random_cubic_is_reproducible():
    a = random_cubic(np.random.default_rng(5))
    b = random_cubic(np.random.default_rng(5))
    assert a.expr == b.expr
    assert not a.is_constant


def test_preconditioner_is_positive_definite():
    pc = _sample('variable-thickness')
    H = quadratic_hessian(pc.problem)
    assert abs(H - H.T).max() <= 1e-10 * abs(H).max()
    rng = np.random.default_rng(0)
    for _ in range(5):
        x = rng.standard_normal(H.shape[0])
        assert x @ (H @ x) > 0.0


def test_solve_config_validation():
    for kwargs in ({'max_iters': 0}, {'grad_tol': 0.0}, {'backtrack': 1.0}, {'armijo': 0.0},
                   {'memory': 0}, {'n_tests': -1}, {'init': 'guess'}, {'max_backtracks': 0}):
        try:
            SolveConfig(**kwargs)
        except ConfigError:
            continue
        raise AssertionError(f"SolveConfig({kwargs}) was accepted")


if __name__ == "__main__":
    print("🧪 Solver tests")
    print("=" * 60)
    tests = [obj for name, obj in list(globals().items()) if name.startswith('test_') and callable(obj)]
    failed = 0
    for test in tests:
        try:
            test()
            print(f"✅ {test.__name__}")
        except Exception as e:
            failed += 1
            print(f"❌ {test.__name__}: {e}")
    print(f"\n{len(tests) - failed}/{len(tests)} passed")
    sys.exit(1 if failed else 0)
