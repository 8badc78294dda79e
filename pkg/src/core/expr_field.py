#!/usr/bin/env python3
"""
Closed-form scalar fields over (x1, x2)

Expressions are restricted to a small grammar (x1, x2, numbers, pi,
+ - * / ^ with integer exponents, sin, cos, exp) so that every derivative
stays in the grammar and can be taken exactly.
"""

import re
from dataclasses import dataclass
from functools import cached_property
from typing import Callable, List, Union

import numpy as np
import sympy as sp
from sympy.parsing.sympy_parser import (
    convert_xor,
    parse_expr,
    standard_transformations,
)

from .errors import ExpressionError


X1, X2 = sp.symbols('x1 x2', real=True)
COORDS = (X1, X2)

_LOCALS = {
    'x1': X1,
    'x2': X2,
    'sin': sp.sin,
    'cos': sp.cos,
    'exp': sp.exp,
    'pi': sp.pi,
}

_TOKEN = re.compile(
    r'\s*(?:'
    r'(?P<number>\d+\.?\d*(?:[eE][+-]?\d+)?|\.\d+(?:[eE][+-]?\d+)?)'
    r'|(?P<name>[A-Za-z_][A-Za-z_0-9]*)'
    r'|(?P<op>[-+*/^()])'
    r')'
)

# Typographic forms accepted in config files
_NORMALIZE = {'·': '*', '×': '*', '−': '-', '**': '^'}


def _normalize(text: str) -> str:
    for src, dst in _NORMALIZE.items():
        text = text.replace(src, dst)
    return text.strip()


def _tokenize(text: str) -> List[tuple]:
    tokens = []
    pos = 0
    text = text.rstrip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise ExpressionError(f"unexpected character {text[pos]!r} at position {pos} in '{text}'")
        kind = m.lastgroup
        tokens.append((kind, m.group(kind)))
        pos = m.end()
    return tokens


def _check_grammar(text: str, tokens: List[tuple]):
    for idx, (kind, value) in enumerate(tokens):
        if kind == 'name' and value not in _LOCALS:
            raise ExpressionError(f"unknown identifier '{value}' in '{text}'")
        if kind == 'name' and value in ('sin', 'cos', 'exp'):
            nxt = tokens[idx + 1] if idx + 1 < len(tokens) else None
            if nxt != ('op', '('):
                raise ExpressionError(f"function '{value}' must be followed by '(' in '{text}'")
        if kind == 'op' and value == '^':
            rest = tokens[idx + 1:]
            # integer exponent, optionally signed and parenthesized
            if rest[:1] == [('op', '(')]:
                rest = rest[1:]
                if rest[:1] in ([('op', '-')], [('op', '+')]):
                    rest = rest[1:]
                ok = len(rest) >= 2 and rest[0][0] == 'number' and rest[1] == ('op', ')')
            else:
                if rest[:1] in ([('op', '-')], [('op', '+')]):
                    rest = rest[1:]
                ok = len(rest) >= 1 and rest[0][0] == 'number'
            if not ok or not re.fullmatch(r'\d+', rest[0][1]):
                raise ExpressionError(f"only integer exponents are supported in '{text}'")


@dataclass(frozen=True)
class ExprField:
    """Scalar field given by a sympy expression in x1, x2"""

    expr: sp.Expr

    @classmethod
    def parse(cls, text: Union[str, float, int]) -> 'ExprField':
        """Parse an expression string of the supported grammar

        Raises:
            ExpressionError: If the text is empty or outside the grammar
        """
        if isinstance(text, (int, float)):
            return cls.constant(text)

        source = _normalize(str(text))
        if not source:
            raise ExpressionError("empty expression")

        tokens = _tokenize(source)
        _check_grammar(source, tokens)

        try:
            expr = parse_expr(
                source,
                local_dict=dict(_LOCALS),
                transformations=standard_transformations + (convert_xor,),
                evaluate=True,
            )
        except (SyntaxError, TypeError, ValueError, sp.SympifyError) as e:
            raise ExpressionError(f"cannot parse '{source}': {e}") from e

        if not isinstance(expr, sp.Expr) or expr.free_symbols - set(COORDS):
            raise ExpressionError(f"'{source}' is not a scalar expression in x1, x2")
        return cls(expr)

    @classmethod
    def constant(cls, value: float) -> 'ExprField':
        return cls(sp.sympify(value))

    @classmethod
    def coerce(cls, value) -> 'ExprField':
        if isinstance(value, ExprField):
            return value
        if isinstance(value, sp.Expr):
            return cls(value)
        return cls.parse(value)

    # Derivatives

    def diff(self, var: Union[int, str], order: int = 1) -> 'ExprField':
        """Exact partial derivative along x1 (0, 'x1') or x2 (1, 'x2')"""
        symbol = _LOCALS[var] if isinstance(var, str) else COORDS[var]
        return ExprField(sp.diff(self.expr, symbol, order))

    def grad(self) -> List['ExprField']:
        return [self.diff(0), self.diff(1)]

    def hessian(self) -> List[List['ExprField']]:
        d1, d2 = self.grad()
        d12 = d1.diff(1)
        return [[d1.diff(0), d12], [d12, d2.diff(1)]]

    def laplacian(self) -> 'ExprField':
        return ExprField(sp.diff(self.expr, X1, 2) + sp.diff(self.expr, X2, 2))

    # Evaluation

    @cached_property
    def _func(self) -> Callable:
        return sp.lambdify(COORDS, self.expr, 'numpy')

    @property
    def is_constant(self) -> bool:
        return not (self.expr.free_symbols & set(COORDS))

    @property
    def is_zero(self) -> bool:
        return self.expr == 0

    def __call__(self, x1, x2) -> np.ndarray:
        x1 = np.asarray(x1, dtype=float)
        x2 = np.asarray(x2, dtype=float)
        shape = np.broadcast(x1, x2).shape
        values = np.asarray(self._func(x1, x2), dtype=float)
        return np.broadcast_to(values, shape).copy()

    # Arithmetic

    @staticmethod
    def _other(value) -> sp.Expr:
        if isinstance(value, ExprField):
            return value.expr
        return sp.sympify(value)

    def __add__(self, other):
        return ExprField(self.expr + self._other(other))

    __radd__ = __add__

    def __sub__(self, other):
        return ExprField(self.expr - self._other(other))

    def __rsub__(self, other):
        return ExprField(self._other(other) - self.expr)

    def __mul__(self, other):
        return ExprField(self.expr * self._other(other))

    __rmul__ = __mul__

    def __truediv__(self, other):
        return ExprField(self.expr / self._other(other))

    def __rtruediv__(self, other):
        return ExprField(self._other(other) / self.expr)

    def __neg__(self):
        return ExprField(-self.expr)

    def __pow__(self, power: int):
        if int(power) != power:
            raise ExpressionError(f"only integer exponents are supported, got {power}")
        return ExprField(self.expr ** int(power))

    def __str__(self) -> str:
        return str(self.expr)


def matrix_field(entries) -> List[List[ExprField]]:
    """Coerce a nested list of strings / numbers / ExprFields into ExprFields"""
    return [[ExprField.coerce(e) for e in row] for row in entries]


def zero_matrix(n: int = 3) -> List[List[ExprField]]:
    return [[ExprField.constant(0) for _ in range(n)] for _ in range(n)]
