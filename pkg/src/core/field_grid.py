#!/usr/bin/env python3
"""
Uniform tensor grids, sampled fields and finite-difference operators

Arrays are laid out as (ny, nx, ...) with x1 along axis 1; flattened node
index is j * nx + i. Differential operators are sparse matrices acting on
flattened scalar fields: second order central stencils in the interior and
second order one-sided stencils on boundary rows.
"""

from dataclasses import dataclass
from functools import cached_property
from typing import Sequence, Union

import numpy as np
import scipy.sparse as sps

from .errors import FieldError, GridError
from .expr_field import ExprField


def _first_derivative_1d(n: int, h: float) -> sps.csr_matrix:
    D = sps.lil_matrix((n, n))
    D[0, 0:3] = [-3.0, 4.0, -1.0]
    D[n - 1, n - 3:n] = [1.0, -4.0, 3.0]
    for i in range(1, n - 1):
        D[i, i - 1] = -1.0
        D[i, i + 1] = 1.0
    return D.tocsr() / (2.0 * h)


def _second_derivative_1d(n: int, h: float, one_sided: bool = True) -> sps.csr_matrix:
    D = sps.lil_matrix((n, n))
    for i in range(1, n - 1):
        D[i, i - 1:i + 2] = [1.0, -2.0, 1.0]
    if one_sided:
        D[0, 0:4] = [2.0, -5.0, 4.0, -1.0]
        D[n - 1, n - 4:n] = [-1.0, 4.0, -5.0, 2.0]
    return D.tocsr() / (h * h)


def _fourth_derivative_1d(n: int, h: float) -> sps.csr_matrix:
    """Central five-point stencil; rows closer than 2 to the boundary are zero"""
    D = sps.lil_matrix((n, n))
    for i in range(2, n - 2):
        D[i, i - 2:i + 3] = [1.0, -4.0, 6.0, -4.0, 1.0]
    return D.tocsr() / h ** 4


@dataclass(frozen=True)
class Grid2D:
    """Node-centred uniform grid on [x_min, x_max] x [y_min, y_max]"""

    x_min: float = 0.0
    x_max: float = 1.0
    y_min: float = 0.0
    y_max: float = 1.0
    nx: int = 33
    ny: int = 33

    def __post_init__(self):
        if not self.x_min < self.x_max:
            raise GridError(f"x_min ({self.x_min}) must be smaller than x_max ({self.x_max})")
        if not self.y_min < self.y_max:
            raise GridError(f"y_min ({self.y_min}) must be smaller than y_max ({self.y_max})")
        if int(self.nx) != self.nx or int(self.ny) != self.ny:
            raise GridError("nx and ny must be integers")
        if self.nx < 5 or self.ny < 5:
            raise GridError(f"grid needs at least 5 nodes per direction (one-sided second differences span 4 nodes, "
                            f"so 3-node grids are not supported), got {self.nx}x{self.ny}")

    @property
    def hx(self) -> float:
        return (self.x_max - self.x_min) / (self.nx - 1)

    @property
    def hy(self) -> float:
        return (self.y_max - self.y_min) / (self.ny - 1)

    @property
    def shape(self) -> tuple:
        return (self.ny, self.nx)

    @property
    def size(self) -> int:
        return self.nx * self.ny

    @cached_property
    def x(self) -> np.ndarray:
        return np.linspace(self.x_min, self.x_max, self.nx)

    @cached_property
    def y(self) -> np.ndarray:
        return np.linspace(self.y_min, self.y_max, self.ny)

    @cached_property
    def mesh(self) -> tuple:
        """(X1, X2) node coordinates, each of shape (ny, nx)"""
        return tuple(np.meshgrid(self.x, self.y, indexing='xy'))

    @cached_property
    def weights(self) -> np.ndarray:
        """Composite trapezoid weights, shape (ny, nx)"""
        wx = np.full(self.nx, self.hx)
        wx[[0, -1]] *= 0.5
        wy = np.full(self.ny, self.hy)
        wy[[0, -1]] *= 0.5
        return np.outer(wy, wx)

    # Sparse operators on flattened scalar fields

    @cached_property
    def Dx(self) -> sps.csr_matrix:
        return sps.kron(sps.identity(self.ny), _first_derivative_1d(self.nx, self.hx), format='csr')

    @cached_property
    def Dy(self) -> sps.csr_matrix:
        return sps.kron(_first_derivative_1d(self.ny, self.hy), sps.identity(self.nx), format='csr')

    @cached_property
    def Dxx(self) -> sps.csr_matrix:
        return sps.kron(sps.identity(self.ny), _second_derivative_1d(self.nx, self.hx), format='csr')

    @cached_property
    def Dyy(self) -> sps.csr_matrix:
        return sps.kron(_second_derivative_1d(self.ny, self.hy), sps.identity(self.nx), format='csr')

    @cached_property
    def Dxy(self) -> sps.csr_matrix:
        return (self.Dy @ self.Dx).tocsr()

    @cached_property
    def laplacian_op(self) -> sps.csr_matrix:
        return (self.Dxx + self.Dyy).tocsr()

    @cached_property
    def biharmonic_op(self) -> sps.csr_matrix:
        """13-point stencil on nodes at least 2 away from the boundary, Δ(Δ) elsewhere"""
        if self.nx < 7 or self.ny < 7:
            raise GridError(f"biharmonic stencil needs at least 7 nodes per direction, got {self.nx}x{self.ny}")
        d4x = _fourth_derivative_1d(self.nx, self.hx)
        d4y = _fourth_derivative_1d(self.ny, self.hy)
        d2x = _second_derivative_1d(self.nx, self.hx, one_sided=False)
        d2y = _second_derivative_1d(self.ny, self.hy, one_sided=False)
        direct = (sps.kron(sps.identity(self.ny), d4x)
                  + 2.0 * sps.kron(d2y, d2x)
                  + sps.kron(d4y, sps.identity(self.nx)))
        inner = self.interior_mask(2).ravel().astype(float)
        composed = self.laplacian_op @ self.laplacian_op
        return (sps.diags(inner) @ direct + sps.diags(1.0 - inner) @ composed).tocsr()

    def interior_mask(self, margin: int = 2) -> np.ndarray:
        """Boolean mask of nodes at least `margin` nodes away from the boundary"""
        mask = np.zeros(self.shape, dtype=bool)
        mask[margin:self.ny - margin, margin:self.nx - margin] = True
        return mask

    def subdomain_mask(self, fraction: float = 0.1, margin: int = 2) -> np.ndarray:
        """Nodes of the box shrunk by `fraction` of each side, at least `margin` nodes from the boundary"""
        X, Y = self.mesh
        dx = fraction * (self.x_max - self.x_min)
        dy = fraction * (self.y_max - self.y_min)
        tol = 1e-12 * max(self.x_max - self.x_min, self.y_max - self.y_min)
        inside = ((X >= self.x_min + dx - tol) & (X <= self.x_max - dx + tol)
                  & (Y >= self.y_min + dy - tol) & (Y <= self.y_max - dy + tol))
        return inside & self.interior_mask(margin)

    def apply(self, op: sps.spmatrix, f: np.ndarray) -> np.ndarray:
        return (op @ np.asarray(f, dtype=float).ravel()).reshape(self.shape)

    def to_dict(self) -> dict:
        return {
            'x_min': self.x_min, 'x_max': self.x_max,
            'y_min': self.y_min, 'y_max': self.y_max,
            'nx': self.nx, 'ny': self.ny,
        }


@dataclass(frozen=True, eq=False)
class GridField:
    """Read-only per-node data of shape (ny, nx, *component_shape)"""

    grid: Grid2D
    values: np.ndarray

    def __post_init__(self):
        arr = np.array(self.values, dtype=float)
        if arr.shape[:2] != self.grid.shape:
            raise FieldError(f"field shape {arr.shape} does not match grid {self.grid.shape}")
        bad = ~np.isfinite(arr.reshape(arr.shape[0], arr.shape[1], -1)).all(axis=2)
        if bad.any():
            j, i = np.argwhere(bad)[0]
            raise FieldError(
                f"non-finite value at node (i={i}, j={j}), "
                f"x1={self.grid.x[i]:.6g}, x2={self.grid.y[j]:.6g}"
            )
        arr.setflags(write=False)
        object.__setattr__(self, 'values', arr)

    @property
    def component_shape(self) -> tuple:
        return self.values.shape[2:]

    @property
    def is_scalar(self) -> bool:
        return self.values.ndim == 2


FieldLike = Union[GridField, np.ndarray]


def sample(expr: Union[ExprField, str, float], grid: Grid2D) -> GridField:
    """Pointwise evaluation of an expression at the grid nodes"""
    expr = ExprField.coerce(expr)
    X1, X2 = grid.mesh
    with np.errstate(all='ignore'):
        values = expr(X1, X2)
    return GridField(grid, values)


def sample_matrix(entries: Sequence[Sequence[ExprField]], grid: Grid2D) -> np.ndarray:
    """Sample a square matrix of expressions into an array (ny, nx, n, n)"""
    n = len(entries)
    out = np.empty(grid.shape + (n, n))
    for a in range(n):
        for b in range(n):
            out[..., a, b] = sample(entries[a][b], grid).values
    return out


# Array-level operators

def gradient_values(grid: Grid2D, f: np.ndarray) -> np.ndarray:
    return np.stack([grid.apply(grid.Dx, f), grid.apply(grid.Dy, f)], axis=-1)


def hessian_values(grid: Grid2D, f: np.ndarray) -> np.ndarray:
    fxx = grid.apply(grid.Dxx, f)
    fyy = grid.apply(grid.Dyy, f)
    fxy = grid.apply(grid.Dxy, f)
    return np.stack([np.stack([fxx, fxy], axis=-1), np.stack([fxy, fyy], axis=-1)], axis=-2)


def divergence_rows(grid: Grid2D, M: np.ndarray) -> np.ndarray:
    """Row-wise divergence of a 2x2 matrix field"""
    return np.stack([
        grid.apply(grid.Dx, M[..., 0, 0]) + grid.apply(grid.Dy, M[..., 0, 1]),
        grid.apply(grid.Dx, M[..., 1, 0]) + grid.apply(grid.Dy, M[..., 1, 1]),
    ], axis=-1)


def cof2_values(M: np.ndarray) -> np.ndarray:
    M = np.asarray(M, dtype=float)
    out = np.empty_like(M)
    out[..., 0, 0] = M[..., 1, 1]
    out[..., 0, 1] = -M[..., 1, 0]
    out[..., 1, 0] = -M[..., 0, 1]
    out[..., 1, 1] = M[..., 0, 0]
    return out


def contract(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    """Pointwise ⟨A : B⟩ over the trailing two axes"""
    return np.einsum('...ij,...ij->...', A, B)


def curl_t_curl_values(grid: Grid2D, M: np.ndarray) -> np.ndarray:
    M = np.asarray(M, dtype=float)
    return (grid.apply(grid.Dxx, M[..., 1, 1])
            + grid.apply(grid.Dyy, M[..., 0, 0])
            - grid.apply(grid.Dxy, M[..., 0, 1] + M[..., 1, 0]))


def integrate_values(grid: Grid2D, f: np.ndarray) -> float:
    return float(np.sum(grid.weights * np.asarray(f, dtype=float)))


def l2_norm(grid: Grid2D, f: np.ndarray, mask: np.ndarray = None) -> float:
    """Discrete L² norm (trapezoid weights), optionally restricted to a node mask"""
    f = np.asarray(f, dtype=float)
    sq = f * f if f.ndim == 2 else np.sum(f.reshape(grid.shape + (-1,)) ** 2, axis=-1)
    if mask is not None:
        sq = np.where(mask, sq, 0.0)
    return float(np.sqrt(np.sum(grid.weights * sq)))


# Field-level operations

def diff(field: GridField, kind: str) -> GridField:
    """Finite-difference derivative of a scalar field

    Args:
        field: Scalar GridField
        kind: One of 'grad', 'hessian', 'laplacian', 'biharmonic'

    Raises:
        GridError: If the grid is too small for the stencil
        FieldError: If the field is not scalar or the kind is unknown
    """
    if not field.is_scalar:
        raise FieldError("diff expects a scalar field")
    grid, f = field.grid, field.values
    if kind == 'grad':
        return GridField(grid, gradient_values(grid, f))
    if kind == 'hessian':
        return GridField(grid, hessian_values(grid, f))
    if kind == 'laplacian':
        return GridField(grid, grid.apply(grid.laplacian_op, f))
    if kind == 'biharmonic':
        return GridField(grid, grid.apply(grid.biharmonic_op, f))
    raise FieldError(f"unknown derivative kind '{kind}'")


def cof2(M: FieldLike) -> FieldLike:
    """Pointwise cofactor [[a, b], [c, d]] -> [[d, -c], [-b, a]]"""
    if isinstance(M, GridField):
        return GridField(M.grid, cof2_values(M.values))
    return cof2_values(M)


def airy_bracket(u: GridField, p: GridField) -> GridField:
    """[u, p] = ⟨∇²u : cof ∇²p⟩"""
    if u.grid != p.grid:
        raise FieldError("airy_bracket arguments live on different grids")
    grid = u.grid
    value = contract(hessian_values(grid, u.values), cof2_values(hessian_values(grid, p.values)))
    return GridField(grid, value)


def curl_t_curl(M: GridField) -> GridField:
    """∂11 M22 + ∂22 M11 − ∂12 (M12 + M21)"""
    return GridField(M.grid, curl_t_curl_values(M.grid, M.values))


def integrate(f: GridField) -> float:
    """Composite trapezoid rule over the rectangle"""
    return integrate_values(f.grid, f.values)
