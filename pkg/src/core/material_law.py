#!/usr/bin/env python3
"""
Isotropic material law for prestrained plates

Quadratic forms Q3 / Q2, the completion maps c(F) and l(F), the bilinear
form L2 and the 3d stored energy density W. Every function accepts a single
matrix or a stack of matrices in the trailing two axes.
"""

from dataclasses import dataclass, field
from typing import Tuple

import numpy as np

from .errors import MaterialError


@dataclass(frozen=True)
class LameMaterial:
    """Isotropic Lamé constants with the derived plate moduli"""

    mu: float = 1.0
    lam: float = 1.0
    young_S: float = field(init=False)
    poisson_nu: float = field(init=False)
    bending_B: float = field(init=False)

    def __post_init__(self):
        if not np.isfinite(self.mu) or self.mu <= 0.0:
            raise MaterialError(f"shear modulus mu must be > 0, got {self.mu}")
        if not np.isfinite(self.lam) or self.lam < 0.0:
            raise MaterialError(f"Lamé constant lambda must be >= 0, got {self.lam}")

        mu, lam = float(self.mu), float(self.lam)
        young = mu * (2.0 * mu + 3.0 * lam) / (mu + lam)
        nu = lam / (2.0 * (lam + mu))
        object.__setattr__(self, 'young_S', young)
        object.__setattr__(self, 'poisson_nu', nu)
        object.__setattr__(self, 'bending_B', young / (12.0 * (1.0 - nu * nu)))

    @property
    def lam_2d(self) -> float:
        """Plane-stress Lamé constant 2μλ/(2μ+λ)"""
        return 2.0 * self.mu * self.lam / (2.0 * self.mu + self.lam)

    def to_dict(self) -> dict:
        return {
            'mu': self.mu,
            'lambda': self.lam,
            'young_S': self.young_S,
            'poisson_nu': self.poisson_nu,
            'bending_B': self.bending_B,
        }


def sym(M: np.ndarray) -> np.ndarray:
    """Symmetric part over the trailing two axes"""
    M = np.asarray(M, dtype=float)
    return 0.5 * (M + np.swapaxes(M, -1, -2))


def trace(M: np.ndarray) -> np.ndarray:
    return np.trace(np.asarray(M, dtype=float), axis1=-2, axis2=-1)


def frob2(M: np.ndarray) -> np.ndarray:
    """Squared Frobenius norm over the trailing two axes"""
    M = np.asarray(M, dtype=float)
    return np.sum(M * M, axis=(-2, -1))


def pad3(F: np.ndarray) -> np.ndarray:
    """(F)*: embed a 2x2 matrix in the upper-left block of a zero 3x3 matrix"""
    F = np.asarray(F, dtype=float)
    out = np.zeros(F.shape[:-2] + (3, 3))
    out[..., :2, :2] = F
    return out


def q3(M: np.ndarray, mat: LameMaterial) -> np.ndarray:
    """Q3(M) = 2μ|sym M|² + λ(Tr M)²"""
    S = sym(M)
    return 2.0 * mat.mu * frob2(S) + mat.lam * trace(S) ** 2


def q2_closed(F: np.ndarray, mat: LameMaterial) -> np.ndarray:
    """Closed-form isotropic Q2(F) = 2μ|sym F|² + 2μλ/(2μ+λ) (Tr F)²"""
    S = sym(F)
    # one final division keeps rational values correctly rounded
    denom = 2.0 * mat.mu + mat.lam
    return (2.0 * mat.mu * denom * frob2(S) + 2.0 * mat.mu * mat.lam * trace(S) ** 2) / denom


def stress_2d(E: np.ndarray, mat: LameMaterial) -> np.ndarray:
    """σ(E) = 2μ sym E + λ₂ Tr E Id₂, so that L2(E, F) = ⟨σ(E) : F⟩"""
    S = sym(E)
    out = 2.0 * mat.mu * S
    tr = trace(S)
    out[..., 0, 0] += mat.lam_2d * tr
    out[..., 1, 1] += mat.lam_2d * tr
    return out


def compliance_2d(T: np.ndarray, mat: LameMaterial) -> np.ndarray:
    """Inverse of stress_2d on symmetric matrices: ((1+ν) sym T − ν Tr T Id₂) / S"""
    S = sym(T)
    nu = mat.poisson_nu
    out = (1.0 + nu) * S
    tr = trace(S)
    out[..., 0, 0] -= nu * tr
    out[..., 1, 1] -= nu * tr
    return out / mat.young_S


def _l3(A: np.ndarray, B: np.ndarray, mat: LameMaterial) -> np.ndarray:
    """Bilinear form of Q3 by polarization"""
    return 0.5 * (q3(A + B, mat) - q3(A, mat) - q3(B, mat))


def _completion_basis() -> np.ndarray:
    """sym(e_i ⊗ e3) for i = 1, 2, 3"""
    basis = np.zeros((3, 3, 3))
    for i in range(3):
        e = np.zeros((3, 3))
        e[i, 2] = 1.0
        basis[i] = sym(e)
    return basis


def _stationarity_matrix(mat: LameMaterial) -> np.ndarray:
    basis = _completion_basis()
    A = np.empty((3, 3))
    for i in range(3):
        for j in range(3):
            A[i, j] = _l3(basis[i], basis[j], mat)
    return A


def q2_minimized(F: np.ndarray, mat: LameMaterial) -> Tuple[np.ndarray, np.ndarray]:
    """Q2(F) = min Q3(F̃) over completions F̃ with F̃_{2x2} = F

    Q3 only sees sym F̃, so the completions are (F)* + sym(c ⊗ e3) and the
    quadratic in c is minimized by solving its 3x3 stationarity system
    A c = -b, A_ij = L3(B_i, B_j), b_i = L3((F)*, B_i).

    Returns:
        (value, c) with value of shape F.shape[:-2] and c of shape (..., 3)
    """
    F = np.asarray(F, dtype=float)
    A = _stationarity_matrix(mat)
    if np.linalg.cond(A) > 1e12:
        raise MaterialError("singular stationarity system for Q2 minimization")

    Fs = pad3(F)
    basis = _completion_basis()
    b = np.stack([_l3(Fs, basis[i], mat) for i in range(3)], axis=-1)
    c = np.linalg.solve(A, -b[..., None])[..., 0] if b.ndim > 1 else np.linalg.solve(A, -b)

    completion = Fs + np.einsum('...i,ijk->...jk', c, basis)
    return q3(completion, mat), c


def c_map(F: np.ndarray, mat: LameMaterial) -> np.ndarray:
    """c(F): the minimizing completion vector of Q2(F) (linear in F)"""
    _, c = q2_minimized(sym(F), mat)
    return c


def c_map_operator(mat: LameMaterial) -> np.ndarray:
    """Matrix K with c(F) = K @ (F11, F22, F12) for symmetric F"""
    units = np.array([
        [[1.0, 0.0], [0.0, 0.0]],
        [[0.0, 0.0], [0.0, 1.0]],
        [[0.0, 1.0], [1.0, 0.0]],
    ])
    return c_map(units, mat).T


def l_map(F: np.ndarray) -> np.ndarray:
    """l(F) with sym(F - (F_{2x2})*) = sym(l(F) ⊗ e3)"""
    F = np.asarray(F, dtype=float)
    return np.stack([
        F[..., 0, 2] + F[..., 2, 0],
        F[..., 1, 2] + F[..., 2, 1],
        F[..., 2, 2],
    ], axis=-1)


def l2_bilinear(E: np.ndarray, F: np.ndarray, mat: LameMaterial) -> np.ndarray:
    """L2(E, F) = ½(Q2(E+F) - Q2(E) - Q2(F))"""
    E = np.asarray(E, dtype=float)
    F = np.asarray(F, dtype=float)
    return 0.5 * (q2_closed(E + F, mat) - q2_closed(E, mat) - q2_closed(F, mat))


def density_W(F: np.ndarray, mat: LameMaterial) -> np.ndarray:
    """St. Venant–Kirchhoff type density (μ/4)|FᵀF - Id|² + (λ/8)(Tr(FᵀF - Id))²"""
    F = np.asarray(F, dtype=float)
    C = np.swapaxes(F, -1, -2) @ F
    C[..., 0, 0] -= 1.0
    C[..., 1, 1] -= 1.0
    C[..., 2, 2] -= 1.0
    return 0.25 * mat.mu * frob2(C) + 0.125 * mat.lam * trace(C) ** 2


def material_table(mat: LameMaterial) -> list:
    """Q2/Q3/c/l values on a fixed set of reference matrices"""
    matrices = {
        'identity': np.eye(2),
        'uniaxial_half': np.diag([0.5, 0.0]),
        'shear': np.array([[0.0, 1.0], [1.0, 0.0]]),
        'skew': np.array([[0.0, 1.0], [-1.0, 0.0]]),
    }
    rows = []
    for name, F in matrices.items():
        q2_min, c = q2_minimized(F, mat)
        # l of the optimal completion recovers c
        l = l_map(pad3(F) + np.einsum('i,ijk->jk', c, _completion_basis()))
        rows.append({
            'matrix': name,
            'q3': float(q3(pad3(F), mat)),
            'q2_closed': float(q2_closed(F, mat)),
            'q2_min': float(q2_min),
            'c1': float(c[0]), 'c2': float(c[1]), 'c3': float(c[2]),
            'l1': float(l[0]), 'l2': float(l[1]), 'l3': float(l[2]),
            'l2_with_id': float(l2_bilinear(F, np.eye(2), mat)),
        })
    return rows
