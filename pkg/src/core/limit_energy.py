#!/usr/bin/env python3
"""
Limiting plate energy I_g(w, v), its exact discrete gradient and weak residuals

I_g = ½ Σ ω s Q2(S) + (1/24) Σ ω s³ Q2(K) with s = g1 + g2,
S = sym ∇w + ½ ∇v⊗∇v + ½ sym(∇v⊗∇Δg) − (sym ε_g)₂ − ½ Δg (sym κ_g)₂,
K = ∇²v + (sym κ_g)₂ and Δg = g2 − g1. The gradient differentiates the
quadrature sum itself, so it is the exact derivative of the discrete energy.
"""

from typing import NamedTuple, Tuple, Union

import numpy as np

from .field_grid import GridField, gradient_values, hessian_values, sample
from .material_law import q2_closed, stress_2d
from .models import Displacement, DisplacementExpr, PlateProblem
from .expr_field import ExprField


class Kinematics(NamedTuple):
    """Strain fields of a displacement on the grid"""
    stretching: np.ndarray   # S, (ny, nx, 2, 2)
    bending: np.ndarray      # K, (ny, nx, 2, 2)
    grad_v: np.ndarray       # ∇v, (ny, nx, 2)
    lever: np.ndarray        # ∇v + ½∇Δg, (ny, nx, 2)


def _outer(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return a[..., :, None] * b[..., None, :]


def _assemble(p: PlateProblem, grad_w: np.ndarray, grad_v: np.ndarray, hess_v: np.ndarray) -> Kinematics:
    """Strains from ∇w (…, 2, 2) with rows w1, w2, ∇v and ∇²v"""
    sym_grad_w = 0.5 * (grad_w + np.swapaxes(grad_w, -1, -2))
    gv_dg = _outer(grad_v, p.grad_dg)
    S = (sym_grad_w
         + 0.5 * _outer(grad_v, grad_v)
         + 0.25 * (gv_dg + np.swapaxes(gv_dg, -1, -2))
         - p.prestrain)
    K = hess_v + p.kappa_sym2
    return Kinematics(S, K, grad_v, grad_v + 0.5 * p.grad_dg)


def kinematics(p: PlateProblem, d: Displacement) -> Kinematics:
    grid = p.grid
    gw1 = gradient_values(grid, d.w[..., 0])
    gw2 = gradient_values(grid, d.w[..., 1])
    grad_w = np.stack([gw1, gw2], axis=-2)
    return _assemble(p, grad_w, gradient_values(grid, d.v), hessian_values(grid, d.v))


def kinematics_exact(p: PlateProblem, d: DisplacementExpr) -> Kinematics:
    """Strains with the displacement derivatives taken symbolically"""
    grid = p.grid

    def grad(e: ExprField) -> np.ndarray:
        return np.stack([sample(g, grid).values for g in e.grad()], axis=-1)

    grad_w = np.stack([grad(d.w1), grad(d.w2)], axis=-2)
    hess = np.array([[sample(h, grid).values for h in row] for row in d.v.hessian()])
    hess_v = np.moveaxis(hess, (0, 1), (-2, -1))
    return _assemble(p, grad_w, grad(d.v), hess_v)


def stretching_strain(p: PlateProblem, d: Displacement) -> GridField:
    return p.field(kinematics(p, d).stretching)


def bending_strain(p: PlateProblem, d: Displacement) -> GridField:
    return p.field(kinematics(p, d).bending)


def energy_density(p: PlateProblem, kin: Kinematics) -> Tuple[np.ndarray, np.ndarray]:
    """Stretching and bending integrands at the nodes"""
    mat = p.material
    return 0.5 * p.s * q2_closed(kin.stretching, mat), p.s3 * q2_closed(kin.bending, mat) / 24.0


def _quadrature(p: PlateProblem, kin: Kinematics) -> float:
    stretch, bend = energy_density(p, kin)
    return float(np.sum(p.grid.weights * (stretch + bend)))


def energy_Ig(p: PlateProblem, d: Displacement) -> float:
    return _quadrature(p, kinematics(p, d))


def energy_Ig_exact(p: PlateProblem, d: DisplacementExpr) -> float:
    """I_g of a closed-form displacement on the problem's quadrature grid"""
    return _quadrature(p, kinematics_exact(p, d))


def energy_and_gradient(p: PlateProblem, d: Displacement) -> Tuple[float, np.ndarray]:
    """Energy and its gradient with respect to the stacked unknowns (w1, w2, v)"""
    grid = p.grid
    mat = p.material
    omega = grid.weights
    kin = kinematics(p, d)

    sigma_S = stress_2d(kin.stretching, mat) * (omega * p.s)[..., None, None]
    sigma_K = stress_2d(kin.bending, mat) * (omega * p.s3 / 12.0)[..., None, None]
    flux = np.einsum('...ij,...j->...i', sigma_S, kin.lever)

    def T(op, f):
        return op.T @ f.ravel()

    g_w1 = T(grid.Dx, sigma_S[..., 0, 0]) + T(grid.Dy, sigma_S[..., 0, 1])
    g_w2 = T(grid.Dy, sigma_S[..., 1, 1]) + T(grid.Dx, sigma_S[..., 0, 1])
    g_v = (T(grid.Dx, flux[..., 0]) + T(grid.Dy, flux[..., 1])
           + T(grid.Dxx, sigma_K[..., 0, 0]) + T(grid.Dyy, sigma_K[..., 1, 1])
           + 2.0 * T(grid.Dxy, sigma_K[..., 0, 1]))

    return _quadrature(p, kin), np.concatenate([g_w1, g_w2, g_v])


def grad_Ig(p: PlateProblem, d: Displacement) -> Tuple[GridField, GridField]:
    """Nodal gradient split into (dw, dv)"""
    _, g = energy_and_gradient(p, d)
    split = Displacement.from_vector(g, p.grid)
    return p.field(split.w), p.field(split.v)


def gradient_norm(p: PlateProblem, g: np.ndarray) -> float:
    """Dual norm (Σ g_k² / ω_k)^½ of a stacked nodal gradient"""
    omega = np.tile(p.grid.weights.ravel(), 3)
    return float(np.sqrt(np.sum(g * g / omega)))


TestField = Union[ExprField, str, float, np.ndarray]


def _nodal(p: PlateProblem, f: TestField) -> np.ndarray:
    if isinstance(f, np.ndarray):
        return np.asarray(f, dtype=float).reshape(p.grid.shape)
    return sample(f, p.grid).values


def weak_residual(p: PlateProblem, d: Displacement, psi, phi: TestField) -> Tuple[float, float]:
    """Weak Euler–Lagrange forms tested against (psi, phi)

    r1 = Σ ω s L2(S, sym ∇psi)
    r2 = Σ ω s L2(S, sym(∇phi ⊗ (∇v + ½∇Δg))) + (1/12) Σ ω s³ L2(K, ∇²phi)

    Test-field derivatives use the same stencils as the energy, so the
    residuals equal the nodal gradient applied to the sampled test fields.
    """
    grid = p.grid
    mat = p.material
    kin = kinematics(p, d)

    psi1, psi2 = _nodal(p, psi[0]), _nodal(p, psi[1])
    phi = _nodal(p, phi)

    grad_psi = np.stack([gradient_values(grid, psi1), gradient_values(grid, psi2)], axis=-2)
    sym_grad_psi = 0.5 * (grad_psi + np.swapaxes(grad_psi, -1, -2))
    grad_phi = gradient_values(grid, phi)
    hess_phi = hessian_values(grid, phi)

    sigma_S = stress_2d(kin.stretching, mat)
    sigma_K = stress_2d(kin.bending, mat)

    r1 = np.sum(grid.weights * p.s * np.einsum('...ij,...ij->...', sigma_S, sym_grad_psi))
    stretch = p.s * np.einsum('...i,...ij,...j->...', grad_phi, sigma_S, kin.lever)
    bend = p.s3 / 12.0 * np.einsum('...ij,...ij->...', sigma_K, hess_phi)
    r2 = np.sum(grid.weights * (stretch + bend))
    return float(r1), float(r2)
