#!/usr/bin/env python3
"""
Bridge from the 3d prestrained energy to the limiting plate energy

Builds the explicit recovery deformation u^h symbolically, evaluates the
3d energy I^h by tensor quadrature on the rescaled domain, runs
h-refinement studies of h⁻⁴ I^h and checks the change of the mid-surface
fundamental forms. Thickness profiles are realized as g_i^h = h g_i.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
import sympy as sp

from ..utils.logger import logger
from .errors import ConfigError, GrowthTensorError
from .expr_field import X1, X2, ExprField
from .field_grid import Grid2D
from .limit_energy import energy_Ig_exact
from .material_law import c_map_operator, density_W
from .models import DisplacementExpr, PlateProblem


X3, H = sp.symbols('x3 h', real=True)
_ARGS = (X1, X2, X3, H)


def _vectorize(exprs: Sequence[sp.Expr], args=_ARGS) -> Callable:
    """Lambdify a list of expressions into one evaluator with broadcasting"""
    funcs = [sp.lambdify(args, e, 'numpy') for e in exprs]

    def evaluate(*values) -> np.ndarray:
        arrays = [np.asarray(v, dtype=float) for v in values]
        shape = np.broadcast(*arrays).shape
        return np.stack([np.broadcast_to(np.asarray(f(*arrays), dtype=float), shape) for f in funcs],
                        axis=-1)

    return evaluate


def _matrix(entries) -> sp.Matrix:
    return sp.Matrix([[e.expr for e in row] for row in entries])


def _sym2(M: sp.Matrix) -> sp.Matrix:
    return (M[:2, :2] + M[:2, :2].T) / 2


def _l(M: sp.Matrix) -> sp.Matrix:
    return sp.Matrix([M[0, 2] + M[2, 0], M[1, 2] + M[2, 1], M[2, 2]])


def _c(F: sp.Matrix, K: np.ndarray) -> sp.Matrix:
    """c(F) for a symmetric 2x2 sympy matrix through the linear operator K"""
    return sp.Matrix(K.tolist()) * sp.Matrix([F[0, 0], F[1, 1], F[0, 1]])


def _grad(e: sp.Expr) -> sp.Matrix:
    return sp.Matrix([sp.diff(e, X1), sp.diff(e, X2)])


def _hess(e: sp.Expr) -> sp.Matrix:
    return sp.hessian(e, (X1, X2))


@dataclass(frozen=True)
class RecoveryCoefficients:
    """Correction vectors d⁰ and d¹ of the recovery deformation"""

    d0: Tuple[ExprField, ExprField, ExprField]
    d1: Tuple[ExprField, ExprField, ExprField]


def _strains_symbolic(p: PlateProblem, d: DisplacementExpr) -> Tuple[sp.Matrix, sp.Matrix]:
    """(S, K) of the limiting energy as exact 2x2 sympy matrices"""
    dg = p.thickness.offset.expr
    eps = _matrix(p.growth.eps)
    kappa = _matrix(p.growth.kappa)
    grad_w = sp.Matrix([[sp.diff(d.w1.expr, X1), sp.diff(d.w1.expr, X2)],
                        [sp.diff(d.w2.expr, X1), sp.diff(d.w2.expr, X2)]])
    gv = _grad(d.v.expr)
    gv_dg = gv * _grad(dg).T
    S = ((grad_w + grad_w.T) / 2 + gv * gv.T / 2 + (gv_dg + gv_dg.T) / 4
         - _sym2(eps) - dg * _sym2(kappa) / 2)
    K = _hess(d.v.expr) + _sym2(kappa)
    return S, K


def recovery_coefficients(p: PlateProblem, d: DisplacementExpr) -> RecoveryCoefficients:
    """d⁰ = l(ε_g) + c(S) − ½Δg c(−K) − ½|∇v|² e3, d¹ = l(κ_g) + c(−K)

    The e3 term cancels the 33 entry ½|∇v|² that the order-h rotation of ∇u^h leaves in (∇u^h)ᵀ∇u^h.
    """
    K_op = c_map_operator(p.material)
    dg = p.thickness.offset.expr
    S, K = _strains_symbolic(p, d)
    c_bend = _c(-K, K_op)
    gv = _grad(d.v.expr)
    d0 = _l(_matrix(p.growth.eps)) + _c(S, K_op) - dg * c_bend / 2
    d0[2] -= (gv.T * gv)[0, 0] / 2
    d1 = _l(_matrix(p.growth.kappa)) + c_bend
    return RecoveryCoefficients(tuple(ExprField(sp.expand(e)) for e in d0),
                                tuple(ExprField(sp.expand(e)) for e in d1))


class RecoverySequence:
    """Closed-form u^h(x′, x3) and its exact Jacobian, for any h

    u^h = (x′, x3) + (h²w, hv) + (x3 − ½hΔg)(−h∇v, 0) + h² x3 d⁰ + ½ h x3² d¹
    with x3 the physical thickness coordinate.
    """

    def __init__(self, p: PlateProblem, d: DisplacementExpr,
                 rotation: Optional[np.ndarray] = None, translation: Optional[np.ndarray] = None):
        self.problem = p
        self.displacement = d
        self.coefficients = recovery_coefficients(p, d)

        dg = p.thickness.offset.expr
        gv = _grad(d.v.expr)
        d0 = sp.Matrix([e.expr for e in self.coefficients.d0])
        d1 = sp.Matrix([e.expr for e in self.coefficients.d1])

        u = (sp.Matrix([X1, X2, X3])
             + sp.Matrix([H ** 2 * d.w1.expr, H ** 2 * d.w2.expr, H * d.v.expr])
             + (X3 - H * dg / 2) * sp.Matrix([-H * gv[0], -H * gv[1], 0])
             + H ** 2 * X3 * d0
             + H * X3 ** 2 * d1 / 2)
        J = u.jacobian([X1, X2, X3])

        self.u_expr = u
        self.jacobian_expr = J
        self._u = _vectorize(list(u))
        self._J = _vectorize(list(J))

        self.rotation = None if rotation is None else np.asarray(rotation, dtype=float)
        self.translation = None if translation is None else np.asarray(translation, dtype=float)

    def rotated(self, rotation: np.ndarray, translation: Optional[np.ndarray] = None) -> 'RecoverySequence':
        """The same sequence composed with a rigid motion x ↦ R x + c"""
        other = RecoverySequence.__new__(RecoverySequence)
        other.__dict__.update(self.__dict__)
        other.rotation = np.asarray(rotation, dtype=float)
        other.translation = None if translation is None else np.asarray(translation, dtype=float)
        return other

    def deformation(self, x1, x2, x3, h: float) -> np.ndarray:
        u = self._u(x1, x2, x3, h)
        if self.rotation is not None:
            u = u @ self.rotation.T
        if self.translation is not None:
            u = u + self.translation
        return u

    def jacobian(self, x1, x2, x3, h: float) -> np.ndarray:
        J = self._J(x1, x2, x3, h)
        J = J.reshape(J.shape[:-1] + (3, 3))
        if self.rotation is not None:
            J = self.rotation @ J
        return J


def recovery_deformation(p: PlateProblem, d: DisplacementExpr, h: float) -> Tuple[Callable, Callable]:
    """Evaluators (x1, x2, x3) -> u^h and (x1, x2, x3) -> ∇u^h at a fixed h"""
    rec = RecoverySequence(p, d)
    return (lambda x1, x2, x3: rec.deformation(x1, x2, x3, h),
            lambda x1, x2, x3: rec.jacobian(x1, x2, x3, h))


# Growth tensor and change of variables

def growth_tensor_at(p: PlateProblem, h: float, x1, x2, x3) -> np.ndarray:
    """a^h = Id + h² ε_g(x′) + h x3 κ_g(x′), shape broadcast(x1, x2, x3) + (3, 3)

    Raises:
        GrowthTensorError: If det a^h ≤ 0 at any point
    """
    x1, x2, x3 = np.broadcast_arrays(*(np.asarray(v, dtype=float) for v in (x1, x2, x3)))
    eps = np.empty(x1.shape + (3, 3))
    kappa = np.empty(x1.shape + (3, 3))
    for a in range(3):
        for b in range(3):
            eps[..., a, b] = p.growth.eps[a][b](x1, x2)
            kappa[..., a, b] = p.growth.kappa[a][b](x1, x2)
    A = np.eye(3) + h * h * eps + h * x3[..., None, None] * kappa
    det = np.linalg.det(A)
    if np.any(det <= 0.0):
        raise GrowthTensorError(
            f"growth tensor is not invertible at h={h}: min det = {det.min():.3e}; "
            f"reduce h or the prestrain magnitude"
        )
    return A


def s_map(p: PlateProblem, h: float, x1, x2, t) -> np.ndarray:
    """s^h = (g1^h + g2^h) t + ½(g2^h − g1^h) with g_i^h = h g_i"""
    g1 = p.thickness.g1(x1, x2)
    g2 = p.thickness.g2(x1, x2)
    return h * ((g1 + g2) * np.asarray(t, dtype=float) + 0.5 * (g2 - g1))


def _quadrature_grid(p: PlateProblem, n_inplane: int) -> Grid2D:
    g = p.grid
    n = n_inplane or g.nx
    m = n_inplane or g.ny
    return Grid2D(g.x_min, g.x_max, g.y_min, g.y_max, n, m)


def energy_3d(p: PlateProblem, rec: RecoverySequence, h: float,
              n_inplane: int = 0, n_thickness: int = 4) -> float:
    """I^h = ∫_Ω (g1 + g2) ∫_{−½}^{½} W(∇u^h (a^h)⁻¹)(x′, s^h(x′, t)) dt dx′

    Gauss–Legendre in t, composite trapezoid on an n_inplane grid in x′
    (n_inplane = 0 uses the problem grid).
    """
    if n_thickness < 2 or (n_inplane and n_inplane < 5):
        raise ConfigError([(0, "quadrature needs n_thickness >= 2 and n_inplane >= 5")])
    grid = _quadrature_grid(p, n_inplane)
    X, Y = grid.mesh
    s = p.thickness.total(X, Y)
    nodes, weights = np.polynomial.legendre.leggauss(n_thickness)

    through = np.zeros(grid.shape)
    for t, wt in zip(0.5 * nodes, 0.5 * weights):
        x3 = s_map(p, h, X, Y, t)
        A = growth_tensor_at(p, h, X, Y, x3)
        J = rec.jacobian(X, Y, x3, h)
        # F = J A⁻¹  <=>  Aᵀ Fᵀ = Jᵀ
        F = np.swapaxes(np.linalg.solve(np.swapaxes(A, -1, -2), np.swapaxes(J, -1, -2)), -1, -2)
        through += wt * density_W(F, p.material)

    return float(np.sum(grid.weights * s * through))


def normalization_gap(p: PlateProblem, rec: RecoverySequence, h: float,
                      n_inplane: int = 0, n_thickness: int = 4) -> float:
    """sup over Ω* of |u^h(x′, s^h(x′, t)) − (x′, 0)| on the quadrature nodes"""
    grid = _quadrature_grid(p, n_inplane)
    X, Y = grid.mesh
    nodes, _ = np.polynomial.legendre.leggauss(n_thickness)
    gap = 0.0
    for t in np.concatenate([[-0.5], 0.5 * nodes, [0.5]]):
        u = rec.deformation(X, Y, s_map(p, h, X, Y, t), h)
        ref = np.stack([X, Y, np.zeros_like(X)], axis=-1)
        gap = max(gap, float(np.max(np.linalg.norm(u - ref, axis=-1))))
    return gap


# Refinement study

def check_h_list(h_list: Sequence[float]) -> List[Tuple[int, str]]:
    """Problems with a refinement list (positive, strictly decreasing)"""
    if not h_list or any(not h > 0.0 for h in h_list):
        return [(0, f"gamma.h_list must contain positive values, got {list(h_list)}")]
    if any(b >= a for a, b in zip(h_list, h_list[1:])):
        return [(0, f"gamma.h_list must be strictly decreasing, got {list(h_list)}")]
    return []


@dataclass
class GammaConfig:
    """Refinement list and quadrature orders of a gamma study"""

    h_list: List[float] = field(default_factory=lambda: [0.08, 0.04, 0.02, 0.01])
    n_inplane: int = 0
    n_thickness: int = 4
    threads: int = 1

    def __post_init__(self):
        self.h_list = [float(h) for h in self.h_list]
        errors = check_h_list(self.h_list)
        if self.n_inplane != 0 and self.n_inplane < 5:
            errors.append((0, f"gamma.n_inplane must be 0 or >= 5, got {self.n_inplane}"))
        if self.n_thickness < 2:
            errors.append((0, f"gamma.n_thickness must be >= 2, got {self.n_thickness}"))
        if self.threads < 1:
            errors.append((0, f"gamma.threads must be >= 1, got {self.threads}"))
        if errors:
            raise ConfigError(errors)


@dataclass
class GammaStudy:
    """h⁻⁴ I^h along a decreasing h list, compared with I_g"""

    h_list: List[float]
    scaled_energies: List[float]
    normalization_gaps: List[float]
    I_g: float
    extrapolated: float
    rel_gaps: List[float] = field(default_factory=list)
    extrapolated_gap: float = 0.0
    order: int = 1

    def __post_init__(self):
        self.rel_gaps = [relative_gap(e, self.I_g) for e in self.scaled_energies]
        self.extrapolated_gap = relative_gap(self.extrapolated, self.I_g)

    def to_rows(self) -> List[Dict[str, float]]:
        return [
            {'h': h, 'scaled_energy': e, 'rel_gap_to_Ig': g, 'normalization_gap': n}
            for h, e, g, n in zip(self.h_list, self.scaled_energies, self.rel_gaps, self.normalization_gaps)
        ]

    def to_dict(self) -> dict:
        return {
            'h_list': list(self.h_list),
            'scaled_energies': list(self.scaled_energies),
            'rel_gaps': list(self.rel_gaps),
            'normalization_gaps': list(self.normalization_gaps),
            'I_g': self.I_g,
            'extrapolated': self.extrapolated,
            'extrapolated_gap': self.extrapolated_gap,
            'order': self.order,
        }


def relative_gap(value: float, reference: float) -> float:
    """|value − reference| / |reference|, absolute when the reference vanishes"""
    diff = abs(value - reference)
    return diff / abs(reference) if reference != 0.0 else diff


def richardson(h_list: Sequence[float], values: Sequence[float]) -> float:
    """Extrapolate to h = 0 from the last two entries assuming an O(h) error"""
    if len(values) < 2:
        return float(values[-1])
    h0, h1 = h_list[-2], h_list[-1]
    e0, e1 = values[-2], values[-1]
    return float((h0 * e1 - h1 * e0) / (h0 - h1))


def gamma_study(p: PlateProblem, d: DisplacementExpr, h_list: Sequence[float],
                n_inplane: int = 0, n_thickness: int = 4, threads: int = 1) -> GammaStudy:
    """Per-h scaled energies of the recovery sequence and their limit"""
    h_list = [float(h) for h in h_list]
    errors = check_h_list(h_list)
    if errors:
        raise ConfigError(errors)

    rec = RecoverySequence(p, d)

    def run(h: float) -> Tuple[float, float]:
        scaled = energy_3d(p, rec, h, n_inplane, n_thickness) / h ** 4
        gap = normalization_gap(p, rec, h, n_inplane, n_thickness)
        logger.debug(f"gamma study h={h:g}: h^-4 I^h = {scaled:.10g}, normalization gap {gap:.3e}")
        return scaled, gap

    with ThreadPoolExecutor(max_workers=max(1, int(threads))) as pool:
        results = list(pool.map(run, h_list))

    quad_problem = PlateProblem(_quadrature_grid(p, n_inplane), p.material, p.thickness, p.growth)
    reference = energy_Ig_exact(quad_problem, d)
    scaled = [r[0] for r in results]
    study = GammaStudy(h_list, scaled, [r[1] for r in results], reference, richardson(h_list, scaled))
    logger.info(f"Gamma study: I_g = {reference:.10g}, extrapolated = {study.extrapolated:.10g}, "
                f"relative gap {study.extrapolated_gap:.3e}")
    return study


# Mid-surface fundamental forms

@lru_cache(maxsize=32)
def _forms_evaluator(p: PlateProblem, d: DisplacementExpr, tau: Tuple[float, float],
                     eta: Tuple[float, float]) -> Callable:
    dg = p.thickness.offset.expr
    eps = _matrix(p.growth.eps)
    kappa = _matrix(p.growth.kappa)
    S, K = _strains_symbolic(p, d)
    t = sp.Matrix(tau)
    e = sp.Matrix(eta)

    phi_mid = sp.Matrix([X1, X2, H * dg / 2])
    phi_def = phi_mid + sp.Matrix([H ** 2 * d.w1.expr, H ** 2 * d.w2.expr, H * d.v.expr])

    def along(F: sp.Matrix, direction: sp.Matrix) -> sp.Matrix:
        return sp.diff(F, X1) * direction[0] + sp.diff(F, X2) * direction[1]

    def unit_normal(F: sp.Matrix) -> sp.Matrix:
        n = sp.diff(F, X1).cross(sp.diff(F, X2))
        return n / sp.sqrt(n.dot(n))

    a = sp.eye(3) + H ** 2 * eps + H * X3 * kappa
    on_mid = {X3: H * dg / 2}
    A_mid = a.subs(on_mid)
    half_dG = (sp.diff(a.T * a, X3) / 2).subs(on_mid)

    d_tau_def = along(phi_def, t)
    d_tau_mid = along(phi_mid, t)
    d_eta_def = along(phi_def, e)
    d_eta_mid = along(phi_mid, e)

    first = (d_tau_def.dot(d_tau_def) - (A_mid * d_tau_mid).dot(A_mid * d_tau_mid)
             - 2 * H ** 2 * (t.T * S * t)[0, 0])
    second = (along(unit_normal(phi_def), t).dot(d_eta_def)
              - ((half_dG * d_tau_mid).dot(d_eta_mid) + along(unit_normal(phi_mid), t).dot(d_eta_mid))
              + H * (e.T * K * t)[0, 0])

    return _vectorize([first, second], (X1, X2, H))


def midsurface_forms(p: PlateProblem, d: DisplacementExpr, h: float, x,
                     tau: Sequence[float], eta: Sequence[float]) -> Tuple[float, float]:
    """Remainders of the fundamental-form expansions of the geometric mid-surface

    first:  |∂τφ₁|² − |a^h ∂τφ̃|² − 2h² τᵀSτ       = O(h³)
    second: ⟨∂τN₁, ∂ηφ₁⟩ − ⟨(½∂₃G + Π̃)∂τφ̃, ∂ηφ̃⟩ + h ηᵀKτ = O(h²)
    """
    tau = tuple(float(c) for c in tau)
    eta = tuple(float(c) for c in eta)
    for name, vec in (('tau', tau), ('eta', eta)):
        if abs(np.hypot(*vec) - 1.0) > 1e-12:
            raise ValueError(f"{name} must be a unit vector, got {vec}")
    values = _forms_evaluator(p, d, tau, eta)(x[0], x[1], h)
    return float(values[0]), float(values[1])
