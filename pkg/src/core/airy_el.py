#!/usr/bin/env python3
"""
Airy stress potential recovery and Euler–Lagrange diagnostics

The potential Φ solves cof ∇²Φ = (g1 + g2) σ(S) in the least-squares sense
with Φ = ∂ₙΦ = 0 on the boundary. From Φ and v the strong residuals of the
Euler–Lagrange system and the natural boundary conditions are evaluated.
"""

from dataclasses import dataclass
from typing import Dict, Optional, Tuple

import numpy as np
import scipy.sparse as sps
import scipy.sparse.linalg as spla

from ..utils.logger import logger
from .errors import AiryRecoveryError
from .expr_field import ExprField
from .field_grid import (
    Grid2D,
    GridField,
    cof2_values,
    contract,
    curl_t_curl_values,
    divergence_rows,
    gradient_values,
    hessian_values,
    l2_norm,
    sample,
)
from .limit_energy import kinematics
from .material_law import compliance_2d, stress_2d, sym
from .models import Displacement, PlateProblem, sample_vector


AIRY_RTOL = 1e-10
# fraction of each side excluded from the residual norms
RESIDUAL_BOX = 0.1


@dataclass(frozen=True, eq=False)
class AiryField:
    """Recovered potential with the Hessian it was fitted to"""

    phi: np.ndarray          # (ny, nx)
    target_M: np.ndarray     # (ny, nx, 2, 2)
    ls_residual: float
    iterations: int = 0


def _clamped_extension_1d(n: int) -> sps.csr_matrix:
    """Map free values at nodes 2..n-3 to all n nodes with f0 = 0, f1 = f2/4

    The mirrored rule holds at the far end, so both the value and the
    one-sided derivative (−3f0 + 4f1 − f2)/2h vanish on the boundary.
    """
    m = n - 4
    E = sps.lil_matrix((n, m))
    for k in range(m):
        E[k + 2, k] = 1.0
    E[1, 0] = 0.25
    E[n - 2, m - 1] = 0.25
    return E.tocsr()


def _clamped_extension(grid: Grid2D) -> sps.csr_matrix:
    return sps.kron(_clamped_extension_1d(grid.ny), _clamped_extension_1d(grid.nx), format='csr')


def _preconditioner(N: sps.csr_matrix) -> spla.LinearOperator:
    try:
        ilu = spla.spilu(N.tocsc(), drop_tol=1e-6, fill_factor=20)
        return spla.LinearOperator(N.shape, ilu.solve)
    except RuntimeError as e:
        logger.debug(f"Incomplete LU failed ({e}); using Jacobi preconditioner")
        inv_diag = 1.0 / N.diagonal()
        return spla.LinearOperator(N.shape, lambda x: inv_diag * x)


def airy_from_target(grid: Grid2D, M: np.ndarray, rtol: float = AIRY_RTOL,
                     maxiter: Optional[int] = None) -> AiryField:
    """Weighted least-squares fit of ∇²Φ to M with clamped boundary values

    Raises:
        AiryRecoveryError: If conjugate gradients does not reach rtol
    """
    M = np.asarray(M, dtype=float)
    E = _clamped_extension(grid)
    sw = np.sqrt(grid.weights.ravel())
    W = sps.diags(sw)

    A = sps.vstack([
        W @ grid.Dxx @ E,
        W @ grid.Dyy @ E,
        np.sqrt(2.0) * (W @ grid.Dxy @ E),
    ]).tocsr()
    m12 = 0.5 * (M[..., 0, 1] + M[..., 1, 0])
    rhs_vec = np.concatenate([
        sw * M[..., 0, 0].ravel(),
        sw * M[..., 1, 1].ravel(),
        np.sqrt(2.0) * sw * m12.ravel(),
    ])

    N = (A.T @ A).tocsr()
    rhs = A.T @ rhs_vec

    iterations = 0
    if np.any(rhs):
        counter = {'n': 0}

        def _count(_):
            counter['n'] += 1

        maxiter = maxiter or 10 * N.shape[0]
        z, info = spla.cg(N, rhs, rtol=rtol, atol=0.0, maxiter=maxiter,
                          M=_preconditioner(N), callback=_count)
        iterations = counter['n']
        if info != 0:
            rel = float(np.linalg.norm(N @ z - rhs) / np.linalg.norm(rhs))
            logger.error(f"Airy CG stopped after {iterations} iterations, relative residual {rel:.3e}")
            raise AiryRecoveryError(
                f"Airy least-squares solve did not converge: info={info}, "
                f"iterations={iterations}, relative residual={rel:.3e}, tolerance={rtol:.1e}"
            )
        phi = (E @ z).reshape(grid.shape)
    else:
        phi = np.zeros(grid.shape)

    misfit = hessian_values(grid, phi) - M
    ls = l2_norm(grid, misfit)
    logger.debug(f"Airy recovery: {iterations} CG iterations, ls residual {ls:.3e}")
    return AiryField(phi, M, ls, iterations)


def airy_stress(p: PlateProblem, d: Displacement) -> np.ndarray:
    """T = (g1 + g2) σ(S), the right-hand side of cof ∇²Φ = T"""
    kin = kinematics(p, d)
    return p.s[..., None, None] * stress_2d(kin.stretching, p.material)


def airy_from_displacement(p: PlateProblem, d: Displacement) -> AiryField:
    T = airy_stress(p, d)
    return airy_from_target(p.grid, cof2_values(sym(T)))


# Auxiliary quantities

def _hess_expr(e: ExprField, grid: Grid2D) -> np.ndarray:
    rows = [[sample(h, grid).values for h in row] for row in e.hessian()]
    return np.moveaxis(np.array(rows), (0, 1), (-2, -1))


def _grad_expr(e: ExprField, grid: Grid2D) -> np.ndarray:
    return sample_vector(e.grad(), grid)


def gauss_curvature(v: GridField) -> GridField:
    """K_G = det ∇²v"""
    H = hessian_values(v.grid, v.values)
    return GridField(v.grid, H[..., 0, 0] * H[..., 1, 1] - H[..., 0, 1] * H[..., 1, 0])


def lambda_g(p: PlateProblem, v: GridField) -> GridField:
    """curlᵀcurl((sym ε_g)₂ + ½Δg (sym κ_g)₂ − ½ ∇v ⊗ ∇Δg)

    Oriented so that r1 vanishes at minimizers of I_g; do not flip the sign of the ∇v ⊗ ∇Δg term.
    """
    grid = p.grid
    gv = gradient_values(grid, v.values)
    M = p.prestrain - 0.5 * gv[..., :, None] * p.grad_dg[..., None, :]
    return GridField(grid, curl_t_curl_values(grid, M))


def zeta(p: PlateProblem, phi: GridField) -> GridField:
    """2∇f·∇ΔΦ + (S/2μ) ∇²f : ∇²Φ − ν Δf ΔΦ with f = 1/(g1 + g2)"""
    grid, mat = p.grid, p.material
    f = p.inv_s
    lap_phi = grid.apply(grid.laplacian_op, phi.values)
    value = (2.0 * np.einsum('...i,...i->...', _grad_expr(f, grid), gradient_values(grid, lap_phi))
             + mat.young_S / (2.0 * mat.mu) * contract(_hess_expr(f, grid), hessian_values(grid, phi.values))
             - mat.poisson_nu * sample(f.laplacian(), grid).values * lap_phi)
    return GridField(grid, value)


def eta(p: PlateProblem, v: GridField) -> GridField:
    """∇(s³) · div ∇²v + ∇²(s³) : (∇²v + ν cof ∇²v)"""
    grid, nu = p.grid, p.material.poisson_nu
    s3 = p.thickness.total ** 3
    H = hessian_values(grid, v.values)
    value = (np.einsum('...i,...i->...', _grad_expr(s3, grid), divergence_rows(grid, H))
             + contract(_hess_expr(s3, grid), H + nu * cof2_values(H)))
    return GridField(grid, value)


def xi(p: PlateProblem, phi: GridField) -> GridField:
    """s [Φ, Δg] + ∇sᵀ (cof ∇²Φ) ∇Δg"""
    grid = p.grid
    cof_H = cof2_values(hessian_values(grid, phi.values))
    hess_dg = _hess_expr(p.thickness.offset, grid)
    bracket = contract(hess_dg, cof_H)
    value = (p.s * bracket
             + np.einsum('...i,...ij,...j->...', _grad_expr(p.thickness.total, grid), cof_H, p.grad_dg))
    return GridField(grid, value)


def omega_g(p: PlateProblem) -> GridField:
    """∇²(s³) : (κ + ν cof κ) + ∇(s³) · div κ with κ = (sym κ_g)₂"""
    grid, nu = p.grid, p.material.poisson_nu
    s3 = p.thickness.total ** 3
    kappa = p.growth.sym_tangential('kappa')
    div_kappa = np.stack([
        sample(kappa[a][0].diff(0) + kappa[a][1].diff(1), grid).values for a in range(2)
    ], axis=-1)
    K = p.kappa_sym2
    value = (contract(_hess_expr(s3, grid), K + nu * cof2_values(K))
             + np.einsum('...i,...i->...', _grad_expr(s3, grid), div_kappa))
    return GridField(grid, value)


# Residuals

def _interior(grid: Grid2D, f: np.ndarray) -> np.ndarray:
    return np.where(grid.interior_mask(2), f, 0.0)


def el_residuals(p: PlateProblem, d: Displacement,
                 airy: Optional[AiryField] = None) -> Tuple[GridField, GridField]:
    """Strong residuals of the Euler–Lagrange system on interior nodes

    r1 = (1/s) Δ²Φ + ζ(Φ) + S (K_G + λ_g)
    r2 = B s³ Δ²v − s [Φ, v] − ∇sᵀ cof ∇²Φ ∇v + B Ω_g + B η(v) − ½ ξ(Φ)
    """
    grid, mat = p.grid, p.material
    airy = airy or airy_from_displacement(p, d)
    phi = GridField(grid, airy.phi)
    v = GridField(grid, d.v)

    H_phi = hessian_values(grid, airy.phi)
    H_v = hessian_values(grid, d.v)
    K_G = gauss_curvature(v).values

    r1 = (grid.apply(grid.biharmonic_op, airy.phi) / p.s
          + zeta(p, phi).values
          + mat.young_S * (K_G + lambda_g(p, v).values))

    grad_s = _grad_expr(p.thickness.total, grid)
    r2 = (mat.bending_B * p.s3 * grid.apply(grid.biharmonic_op, d.v)
          - p.s * contract(H_v, cof2_values(H_phi))
          - np.einsum('...i,...ij,...j->...', grad_s, cof2_values(H_phi), gradient_values(grid, d.v))
          + mat.bending_B * omega_g(p).values
          + mat.bending_B * eta(p, v).values
          - 0.5 * xi(p, phi).values)

    return GridField(grid, _interior(grid, r1)), GridField(grid, _interior(grid, r2))


def _div_div(grid: Grid2D, M: np.ndarray) -> np.ndarray:
    """∇² : M for a symmetric matrix field"""
    return (grid.apply(grid.Dxx, M[..., 0, 0]) + grid.apply(grid.Dyy, M[..., 1, 1])
            + grid.apply(grid.Dxy, M[..., 0, 1] + M[..., 1, 0]))


def el_residuals_divergence_form(p: PlateProblem, d: Displacement,
                                 airy: Optional[AiryField] = None) -> Tuple[GridField, GridField]:
    """Strong residuals obtained by integrating the weak forms by parts

    r1 = curlᵀcurl(σ⁻¹(cof ∇²Φ / s)) + K_G + λ_g
    r2 = B ∇² : (s³ (K + ν cof K)) − div(cof ∇²Φ (∇v + ½∇Δg))
    """
    grid, mat = p.grid, p.material
    airy = airy or airy_from_displacement(p, d)
    v = GridField(grid, d.v)
    cof_H = cof2_values(hessian_values(grid, airy.phi))

    strain = compliance_2d(cof_H / p.s[..., None, None], mat)
    r1 = curl_t_curl_values(grid, strain) + gauss_curvature(v).values + lambda_g(p, v).values

    K = kinematics(p, d).bending
    moment = p.s3[..., None, None] * (K + mat.poisson_nu * cof2_values(K))
    lever = gradient_values(grid, d.v) + 0.5 * p.grad_dg
    flux = np.einsum('...ij,...j->...i', cof_H, lever)
    div_flux = grid.apply(grid.Dx, flux[..., 0]) + grid.apply(grid.Dy, flux[..., 1])
    r2 = mat.bending_B * _div_div(grid, moment) - div_flux

    return GridField(grid, _interior(grid, r1)), GridField(grid, _interior(grid, r2))


def _edge_slices(grid: Grid2D):
    """(label, index) of the four edges without corners; axis 1 edges have constant x1"""
    inner_y = slice(1, grid.ny - 1)
    inner_x = slice(1, grid.nx - 1)
    return {
        'x_min': (inner_y, 0),
        'x_max': (inner_y, grid.nx - 1),
        'y_min': (0, inner_x),
        'y_max': (grid.ny - 1, inner_x),
    }


def boundary_residuals(p: PlateProblem, d: Displacement,
                       airy: Optional[AiryField] = None) -> Tuple[float, float, float]:
    """Sup norms of the three natural boundary lines over edge nodes (corners excluded)

    b1: |Φ| and |∂ₙΦ|
    b2: K:(n⊗n) + ν K:(τ⊗τ)
    b3: (1−ν) ∂τ(s³ K:(n⊗τ)) + div(s³(K + ν cof K))·n
    """
    grid, nu = p.grid, p.material.poisson_nu
    airy = airy or airy_from_displacement(p, d)
    edges = _edge_slices(grid)

    grad_phi = gradient_values(grid, airy.phi)
    K = kinematics(p, d).bending
    moment = p.s3[..., None, None] * (K + nu * cof2_values(K))
    div_moment = divergence_rows(grid, moment)
    twist = p.s3 * K[..., 0, 1]
    twist_dx = grid.apply(grid.Dx, twist)
    twist_dy = grid.apply(grid.Dy, twist)

    b1 = b2 = b3 = 0.0
    for name, idx in edges.items():
        normal_axis = 0 if name.startswith('x') else 1
        tangent_axis = 1 - normal_axis
        b1 = max(b1, np.max(np.abs(airy.phi[idx])), np.max(np.abs(grad_phi[idx][..., normal_axis])))
        line2 = K[idx][..., normal_axis, normal_axis] + nu * K[idx][..., tangent_axis, tangent_axis]
        b2 = max(b2, np.max(np.abs(line2)))
        # sign flips of n and τ cancel in |line3|
        d_tau = twist_dy if normal_axis == 0 else twist_dx
        line3 = (1.0 - nu) * d_tau[idx] + div_moment[idx][..., normal_axis]
        b3 = max(b3, np.max(np.abs(line3)))
    return float(b1), float(b2), float(b3)


def residual_report(p: PlateProblem, d: Displacement) -> Tuple[Dict[str, float], Dict[str, np.ndarray]]:
    """Flat residual summary plus the residual fields used to build it

    The L² norms of r1 and r2 cover the box shrunk by RESIDUAL_BOX of each side.
    """
    airy = airy_from_displacement(p, d)
    r1, r2 = el_residuals(p, d, airy)
    b1, b2, b3 = boundary_residuals(p, d, airy)
    mask = p.grid.subdomain_mask(RESIDUAL_BOX)
    summary = {
        'el_r1_l2': l2_norm(p.grid, r1.values, mask),
        'el_r2_l2': l2_norm(p.grid, r2.values, mask),
        'bdry_b1': b1,
        'bdry_b2': b2,
        'bdry_b3': b3,
        'airy_ls_residual': airy.ls_residual,
    }
    fields = {'r1': r1.values, 'r2': r2.values, 'phi': airy.phi}
    return summary, fields
