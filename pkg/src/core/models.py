#!/usr/bin/env python3
"""
Problem data models: thickness pair, growth tensor, displacement and plate problem
"""

from dataclasses import dataclass, field
from functools import cached_property
from typing import List, Sequence, Union

import numpy as np

from .errors import FieldError, ThicknessError
from .expr_field import ExprField, matrix_field, zero_matrix
from .field_grid import Grid2D, GridField, sample, sample_matrix
from .material_law import LameMaterial, sym


ExprLike = Union[ExprField, str, float, int]


@dataclass(frozen=True)
class ThicknessPair:
    """Lower and upper thickness profiles g1, g2 (plate occupies -g1 < x3 < g2)"""

    g1: ExprField = field(default_factory=lambda: ExprField.constant(0.5))
    g2: ExprField = field(default_factory=lambda: ExprField.constant(0.5))

    def __post_init__(self):
        object.__setattr__(self, 'g1', ExprField.coerce(self.g1))
        object.__setattr__(self, 'g2', ExprField.coerce(self.g2))

    @property
    def total(self) -> ExprField:
        """s = g1 + g2"""
        return self.g1 + self.g2

    @property
    def offset(self) -> ExprField:
        """Δg = g2 - g1"""
        return self.g2 - self.g1

    @property
    def is_uniform(self) -> bool:
        return self.g1.is_constant and self.g2.is_constant

    def check_positive(self, grid: Grid2D):
        for name, g in (('g1', self.g1), ('g2', self.g2)):
            values = sample(g, grid).values
            if values.min() <= 0.0:
                j, i = np.unravel_index(np.argmin(values), values.shape)
                raise ThicknessError(
                    f"thickness must be positive: {name} = {values[j, i]:.6g} "
                    f"at x1={grid.x[i]:.6g}, x2={grid.y[j]:.6g}"
                )


@dataclass(frozen=True)
class GrowthTensor:
    """3x3 expression matrices eps_g and kappa_g of a^h = Id + h² eps_g + h x3 kappa_g"""

    eps: List[List[ExprField]] = field(default_factory=zero_matrix)
    kappa: List[List[ExprField]] = field(default_factory=zero_matrix)

    def __post_init__(self):
        for name in ('eps', 'kappa'):
            entries = getattr(self, name)
            if len(entries) != 3 or any(len(row) != 3 for row in entries):
                raise FieldError(f"growth tensor {name} must be 3x3")
            object.__setattr__(self, name, matrix_field(entries))

    @property
    def is_zero(self) -> bool:
        return all(e.is_zero for m in (self.eps, self.kappa) for row in m for e in row)

    def sym_tangential(self, name: str) -> List[List[ExprField]]:
        """(sym M)_{2x2} as expressions"""
        M = getattr(self, name)
        return [[(M[a][b] + M[b][a]) * 0.5 if a != b else M[a][a] for b in range(2)] for a in range(2)]


@dataclass(frozen=True, eq=False)
class Displacement:
    """Nodal FvK displacement: in-plane w (ny, nx, 2) and out-of-plane v (ny, nx)"""

    w: np.ndarray
    v: np.ndarray

    def __post_init__(self):
        w = np.array(self.w, dtype=float)
        v = np.array(self.v, dtype=float)
        if w.shape != v.shape + (2,):
            raise FieldError(f"displacement shapes do not match: w {w.shape}, v {v.shape}")
        if not (np.isfinite(w).all() and np.isfinite(v).all()):
            raise FieldError("displacement contains non-finite values")
        object.__setattr__(self, 'w', w)
        object.__setattr__(self, 'v', v)

    @classmethod
    def zeros(cls, grid: Grid2D) -> 'Displacement':
        return cls(np.zeros(grid.shape + (2,)), np.zeros(grid.shape))

    @classmethod
    def from_vector(cls, x: np.ndarray, grid: Grid2D) -> 'Displacement':
        n = grid.size
        return cls(np.stack([x[:n], x[n:2 * n]], axis=-1).reshape(grid.shape + (2,)),
                   x[2 * n:].reshape(grid.shape))

    def to_vector(self) -> np.ndarray:
        """Stacked unknowns (w1, w2, v), each flattened row-major"""
        return np.concatenate([self.w[..., 0].ravel(), self.w[..., 1].ravel(), self.v.ravel()])


@dataclass(frozen=True)
class DisplacementExpr:
    """Closed-form displacement used by the recovery sequence and the exact energy"""

    w1: ExprField = field(default_factory=lambda: ExprField.constant(0))
    w2: ExprField = field(default_factory=lambda: ExprField.constant(0))
    v: ExprField = field(default_factory=lambda: ExprField.constant(0))

    def __post_init__(self):
        for name in ('w1', 'w2', 'v'):
            object.__setattr__(self, name, ExprField.coerce(getattr(self, name)))

    @property
    def is_zero(self) -> bool:
        return self.w1.is_zero and self.w2.is_zero and self.v.is_zero

    def sample(self, grid: Grid2D) -> Displacement:
        w = np.stack([sample(self.w1, grid).values, sample(self.w2, grid).values], axis=-1)
        return Displacement(w, sample(self.v, grid).values)


@dataclass(frozen=True, eq=False)
class PlateProblem:
    """Grid, material, thickness and growth data with cached nodal samples"""

    grid: Grid2D = field(default_factory=Grid2D)
    material: LameMaterial = field(default_factory=LameMaterial)
    thickness: ThicknessPair = field(default_factory=ThicknessPair)
    growth: GrowthTensor = field(default_factory=GrowthTensor)

    def __post_init__(self):
        self.thickness.check_positive(self.grid)

    # Thickness samples

    @cached_property
    def s(self) -> np.ndarray:
        """g1 + g2 at the nodes"""
        return sample(self.thickness.total, self.grid).values

    @cached_property
    def s3(self) -> np.ndarray:
        return self.s ** 3

    @cached_property
    def inv_s(self) -> ExprField:
        """1 / (g1 + g2) as an expression"""
        return 1 / self.thickness.total

    @cached_property
    def dg(self) -> np.ndarray:
        """g2 - g1 at the nodes"""
        return sample(self.thickness.offset, self.grid).values

    @cached_property
    def grad_dg(self) -> np.ndarray:
        return sample_vector(self.thickness.offset.grad(), self.grid)

    # Growth samples

    @cached_property
    def eps(self) -> np.ndarray:
        return sample_matrix(self.growth.eps, self.grid)

    @cached_property
    def kappa(self) -> np.ndarray:
        return sample_matrix(self.growth.kappa, self.grid)

    @cached_property
    def eps_sym2(self) -> np.ndarray:
        return sym(self.eps)[..., :2, :2]

    @cached_property
    def kappa_sym2(self) -> np.ndarray:
        return sym(self.kappa)[..., :2, :2]

    @cached_property
    def prestrain(self) -> np.ndarray:
        """(sym eps_g)_{2x2} + ½(g2 - g1)(sym kappa_g)_{2x2}"""
        return self.eps_sym2 + 0.5 * self.dg[..., None, None] * self.kappa_sym2

    @property
    def is_uniform_thickness(self) -> bool:
        return self.thickness.is_uniform

    def field(self, values: np.ndarray) -> GridField:
        return GridField(self.grid, values)

    def to_dict(self) -> dict:
        return {
            'grid': self.grid.to_dict(),
            'material': self.material.to_dict(),
            'thickness': {'g1': str(self.thickness.g1), 'g2': str(self.thickness.g2)},
            'growth': {
                'eps': [[str(e) for e in row] for row in self.growth.eps],
                'kappa': [[str(e) for e in row] for row in self.growth.kappa],
            },
        }


def sample_vector(entries: Sequence[ExprLike], grid: Grid2D) -> np.ndarray:
    return np.stack([sample(e, grid).values for e in entries], axis=-1)
