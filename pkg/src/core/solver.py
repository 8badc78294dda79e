#!/usr/bin/env python3
"""
Minimization of the discrete limiting energy

Limited-memory BFGS with backtracking (Armijo) line search on the stacked
nodal unknowns (w1, w2, v). The initial inverse Hessian is the factorized
Hessian of the quadratic part of I_g at zero, shifted by a small multiple of
the quadrature weights to remove the rigid and affine null spaces.
"""

from collections import deque
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np
import scipy.sparse as sps
import scipy.sparse.linalg as spla
import sympy as sp

from ..utils.logger import logger
from .airy_el import residual_report
from .errors import ConfigError, FieldError, FvKError, SolverError
from .expr_field import X1, X2, ExprField
from .field_grid import gradient_values, hessian_values
from .limit_energy import energy_and_gradient, energy_Ig, gradient_norm, weak_residual
from .models import Displacement, PlateProblem


@dataclass
class SolveConfig:
    """Quasi-Newton and line-search parameters"""

    max_iters: int = 500
    grad_tol: float = 1e-6
    memory: int = 10
    armijo: float = 1e-4
    backtrack: float = 0.5
    max_backtracks: int = 40
    init_amplitude: float = 1e-2
    init: str = 'random'
    seed: int = 0
    n_tests: int = 20

    def __post_init__(self):
        errors = []
        if int(self.max_iters) < 1:
            errors.append((0, f"solver.max_iters must be >= 1, got {self.max_iters}"))
        if not self.grad_tol > 0.0:
            errors.append((0, f"solver.grad_tol must be > 0, got {self.grad_tol}"))
        if not 0.0 < self.backtrack < 1.0:
            errors.append((0, f"solver.backtrack must be in (0, 1), got {self.backtrack}"))
        if not 0.0 < self.armijo < 1.0:
            errors.append((0, f"solver.armijo must be in (0, 1), got {self.armijo}"))
        if int(self.memory) < 1:
            errors.append((0, f"solver.memory must be >= 1, got {self.memory}"))
        if int(self.max_backtracks) < 1:
            errors.append((0, f"solver.max_backtracks must be >= 1, got {self.max_backtracks}"))
        if int(self.n_tests) < 0:
            errors.append((0, f"solver.n_tests must be >= 0, got {self.n_tests}"))
        if self.init not in ('zero', 'random', 'displacement'):
            errors.append((0, f"solver.init must be zero, random or displacement, got '{self.init}'"))
        if errors:
            raise ConfigError(errors)


@dataclass
class SolveReport:
    """Outcome of a minimization with its stationarity diagnostics"""

    displacement: Displacement
    energy_trace: List[Tuple[int, float, float, float]]
    grad_norm: float
    iterations: int
    converged: bool
    reason: str
    stationarity: Dict[str, float] = field(default_factory=dict)
    residuals: Dict[str, float] = field(default_factory=dict)
    residual_fields: Dict[str, np.ndarray] = field(default_factory=dict)
    diagnostics_error: Optional[str] = None

    @property
    def energy(self) -> float:
        return self.energy_trace[-1][1]

    def to_dict(self) -> dict:
        return {
            'energy': self.energy,
            'grad_norm': self.grad_norm,
            'iterations': self.iterations,
            'converged': self.converged,
            'termination': self.reason,
            'stationarity': dict(self.stationarity),
            'residuals': dict(self.residuals),
            'diagnostics_error': self.diagnostics_error,
        }


def _stiffness_matrix(mu: float, lam_2d: float) -> np.ndarray:
    """Q2(E) = eᵀ C e on e = (E11, E22, E12) for symmetric E"""
    return np.array([
        [2.0 * mu + lam_2d, lam_2d, 0.0],
        [lam_2d, 2.0 * mu + lam_2d, 0.0],
        [0.0, 0.0, 4.0 * mu],
    ])


def quadratic_hessian(p: PlateProblem, shift: float = 1e-2) -> sps.csc_matrix:
    """Hessian of I_g at zero displacement with zero prestrain, plus a weight shift"""
    grid, mat = p.grid, p.material
    n = grid.size
    omega = grid.weights.ravel()
    C = _stiffness_matrix(mat.mu, mat.lam_2d)
    Z = sps.csr_matrix((n, n))

    B_w = sps.bmat([
        [grid.Dx, Z],
        [Z, grid.Dy],
        [0.5 * grid.Dy, 0.5 * grid.Dx],
    ])
    W_w = sps.kron(sps.csr_matrix(C), sps.diags(omega * p.s.ravel()))
    H_w = B_w.T @ W_w @ B_w

    B_v = sps.vstack([grid.Dxx, grid.Dyy, grid.Dxy])
    W_v = sps.kron(sps.csr_matrix(C), sps.diags(omega * p.s3.ravel() / 12.0))
    H_v = B_v.T @ W_v @ B_v

    s_mean = float(np.mean(p.s))
    delta_w = shift * 2.0 * mat.mu * s_mean
    delta_v = shift * 2.0 * mat.mu * s_mean ** 3 / 12.0
    H_w = H_w + delta_w * sps.diags(np.concatenate([omega, omega]))
    H_v = H_v + delta_v * sps.diags(omega)
    return sps.block_diag([H_w, H_v], format='csc')


def _gauge_fix(x: np.ndarray, n: int) -> np.ndarray:
    """Subtract the mean of w1, w2 and v"""
    x = x.copy()
    for k in range(3):
        block = slice(k * n, (k + 1) * n)
        x[block] -= np.mean(x[block])
    return x


def initial_displacement(p: PlateProblem, cfg: SolveConfig,
                         init: Optional[Displacement] = None) -> Displacement:
    if init is not None:
        return init
    if cfg.init == 'zero':
        return Displacement.zeros(p.grid)
    if cfg.init == 'displacement':
        raise ConfigError([(0, "solver.init = displacement needs a [displacement] section")])
    rng = np.random.default_rng(cfg.seed)
    x = cfg.init_amplitude * rng.standard_normal(3 * p.grid.size)
    return Displacement.from_vector(x, p.grid)


def minimize(p: PlateProblem, cfg: SolveConfig, init: Optional[Displacement] = None,
             diagnostics: bool = True) -> SolveReport:
    """Limited-memory quasi-Newton descent on I_g

    Raises:
        SolverError: If the energy is not finite or no descent step is found
    """
    grid = p.grid
    n = grid.size
    d0 = initial_displacement(p, cfg, init)
    x = _gauge_fix(d0.to_vector(), n)

    def evaluate(vec: np.ndarray) -> Tuple[float, np.ndarray]:
        return energy_and_gradient(p, Displacement.from_vector(vec, grid))

    def energy_at(vec: np.ndarray) -> float:
        return energy_Ig(p, Displacement.from_vector(vec, grid))

    energy, g = evaluate(x)
    if not np.isfinite(energy):
        raise SolverError("initial energy is not finite")

    solve_P = spla.factorized(quadratic_hessian(p))
    history = deque(maxlen=int(cfg.memory))
    gnorm = gradient_norm(p, g)
    trace = [(0, energy, gnorm, 0.0)]
    logger.info(f"Minimizing I_g on a {grid.nx}x{grid.ny} grid: E0 = {energy:.6e}, |g| = {gnorm:.3e}")

    converged = gnorm <= cfg.grad_tol
    iteration = 0
    while not converged and iteration < cfg.max_iters:
        iteration += 1
        direction = -_two_loop(g, history, solve_P)
        slope = float(g @ direction)
        if slope >= 0.0:
            history.clear()
            direction = -solve_P(g)
            slope = float(g @ direction)

        step, x_new = _backtracking(energy_at, x, energy, direction, slope, cfg)
        if x_new is None and history:
            logger.debug(f"iteration {iteration}: line search failed, restarting from preconditioned gradient")
            history.clear()
            direction = -solve_P(g)
            slope = float(g @ direction)
            step, x_new = _backtracking(energy_at, x, energy, direction, slope, cfg)
        if x_new is None:
            logger.error(f"Line search failed at iteration {iteration} (energy {energy:.6e}, |g| {gnorm:.3e})")
            raise SolverError(
                f"line search found no descent step after {cfg.max_backtracks} backtracks "
                f"at iteration {iteration}"
            )

        x_new = _gauge_fix(x_new, n)
        e_new, g_new = evaluate(x_new)
        if not np.isfinite(e_new):
            raise SolverError(f"non-finite energy at iteration {iteration}")

        s_vec = x_new - x
        y_vec = g_new - g
        sy = float(s_vec @ y_vec)
        if sy > 0.0:
            history.append((s_vec, y_vec, 1.0 / sy))

        x, g, energy = x_new, g_new, e_new
        gnorm = gradient_norm(p, g)
        trace.append((iteration, energy, gnorm, step))
        logger.debug(f"iteration {iteration}: E = {energy:.12e}, |g| = {gnorm:.3e}, step = {step:.3e}")
        converged = gnorm <= cfg.grad_tol

    reason = 'grad_tol' if converged else 'max_iters'
    d = Displacement.from_vector(x, grid)
    logger.info(f"Solver stopped by {reason} after {iteration} iterations: "
                f"E = {energy:.10e}, |g| = {gnorm:.3e}")

    report = SolveReport(d, trace, gnorm, iteration, converged, reason)
    if diagnostics:
        _attach_diagnostics(p, cfg, report)
    return report


def _two_loop(g: np.ndarray, history, solve_P) -> np.ndarray:
    """Two-loop recursion with initial inverse Hessian γ P⁻¹"""
    q = g.copy()
    alphas = []
    for s_vec, y_vec, rho in reversed(history):
        a = rho * float(s_vec @ q)
        alphas.append(a)
        q -= a * y_vec
    r = solve_P(q)
    if history:
        s_vec, y_vec, rho = history[-1]
        gamma = float(s_vec @ y_vec) / float(y_vec @ solve_P(y_vec))
        r *= gamma
    for (s_vec, y_vec, rho), a in zip(history, reversed(alphas)):
        b = rho * float(y_vec @ r)
        r += (a - b) * s_vec
    return r


def _backtracking(energy_at, x, energy, direction, slope, cfg: SolveConfig):
    """Armijo backtracking; returns (step, x_new) or (0, None)"""
    if slope >= 0.0:
        return 0.0, None
    step = 1.0
    # rounding slack near convergence
    slack = 1e-15 * abs(energy)
    for _ in range(int(cfg.max_backtracks)):
        x_new = x + step * direction
        e_new = energy_at(x_new)
        if np.isfinite(e_new) and e_new <= energy + cfg.armijo * step * slope + slack:
            return step, x_new
        step *= cfg.backtrack
    return 0.0, None


def _attach_diagnostics(p: PlateProblem, cfg: SolveConfig, report: SolveReport):
    report.stationarity = stationarity_report(p, report.displacement, cfg.n_tests, cfg.seed)
    try:
        summary, fields = residual_report(p, report.displacement)
    except FvKError as e:
        logger.warning(f"Residual diagnostics unavailable: {e}")
        report.diagnostics_error = str(e)
        return
    report.residuals = summary
    report.residual_fields = fields


# Stationarity

def random_cubic(rng: np.random.Generator) -> ExprField:
    """Polynomial of degree <= 3 in (x1, x2) with standard normal coefficients"""
    expr = sum(float(rng.standard_normal()) * X1 ** a * X2 ** b
               for a in range(4) for b in range(4 - a))
    return ExprField(sp.sympify(expr))


def _h1_norm(p: PlateProblem, f: np.ndarray) -> float:
    grad = gradient_values(p.grid, f)
    return float(np.sqrt(np.sum(p.grid.weights * (f * f + np.sum(grad * grad, axis=-1)))))


def _h2_norm(p: PlateProblem, f: np.ndarray) -> float:
    hess = hessian_values(p.grid, f)
    return float(np.sqrt(_h1_norm(p, f) ** 2 + np.sum(p.grid.weights * np.sum(hess * hess, axis=(-2, -1)))))


def stationarity_report(p: PlateProblem, d: Displacement, n_tests: int, seed: int = 0) -> Dict[str, float]:
    """Weak residuals against random cubic test pairs, normalized by H1 / H2 norms

    Returns an empty dict when n_tests is 0.
    """
    if n_tests <= 0:
        return {}
    rng = np.random.default_rng(seed)
    grid = p.grid
    max_r1 = max_r2 = 0.0
    for _ in range(int(n_tests)):
        psi = (random_cubic(rng), random_cubic(rng))
        phi = random_cubic(rng)
        r1, r2 = weak_residual(p, d, psi, phi)

        X, Y = grid.mesh
        psi_norm = np.hypot(_h1_norm(p, psi[0](X, Y)), _h1_norm(p, psi[1](X, Y)))
        phi_norm = _h2_norm(p, phi(X, Y))
        if psi_norm == 0.0 or phi_norm == 0.0:
            raise FieldError("degenerate random test field")
        max_r1 = max(max_r1, abs(r1) / psi_norm)
        max_r2 = max(max_r2, abs(r2) / phi_norm)

    summary = {
        'n_tests': int(n_tests),
        'weak_max': max(max_r1, max_r2),
        'weak_max_r1': max_r1,
        'weak_max_r2': max_r2,
    }
    logger.debug(f"Stationarity over {n_tests} test pairs: max normalized residual {summary['weak_max']:.3e}")
    return summary
