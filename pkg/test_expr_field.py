#!/usr/bin/env python3
"""
Expression field tests: grammar, exact derivatives and evaluation
"""

import sys
sys.path.append('.')

import numpy as np
import sympy as sp
from numpy.testing import assert_allclose

from src.core.errors import ExpressionError
from src.core.expr_field import X1, X2, ExprField, matrix_field, zero_matrix


def test_parse_and_differentiate():
    f = ExprField.parse("x1^2 + sin(x2)")
    assert f.diff('x1').expr == 2 * X1
    assert f.diff(1).expr == sp.cos(X2)
    assert f.diff(0, 2).expr == 2
    assert_allclose(f(1.5, 0.0), 2.25)


def test_hessian_and_laplacian():
    f = ExprField.parse("x1*x2^2")
    H = f.hessian()
    assert H[0][0].is_zero
    assert H[0][1].expr == 2 * X2
    assert H[1][0].expr == 2 * X2
    assert H[1][1].expr == 2 * X1
    assert ExprField.parse("x1^2 + x2^2").laplacian().expr == 4


def test_grammar_rejections():
    for text in ("", "x3", "x1^0.5", "x1^x2", "sqrt(x1)", "sin x1", "2 +", "x1 @ x2", "y"):
        try:
            ExprField.parse(text)
        except ExpressionError:
            continue
        raise AssertionError(f"'{text}' was accepted")


def test_integer_exponents_and_constants():
    assert ExprField.parse("x1^(-2)").expr == X1 ** -2
    assert ExprField.parse("x1**3").expr == X1 ** 3
    assert_allclose(ExprField.parse("pi*x1")(1.0, 0.0), np.pi)
    assert_allclose(ExprField.parse("exp(x1) + cos(x2)")(0.0, 0.0), 2.0)
    assert ExprField.parse(3.5).is_constant
    assert ExprField.parse("0").is_zero
    assert not ExprField.parse("x2").is_constant


def test_typographic_normalization():
    assert ExprField.parse("2·x1 − x2").expr == 2 * X1 - X2
    assert ExprField.parse("3×x2").expr == 3 * X2


def test_evaluation_broadcasts():
    X = np.zeros((3, 4))
    assert ExprField.parse("1")(X, X).shape == (3, 4)
    assert_allclose(ExprField.parse("x1 + 2*x2")(np.array([0.0, 1.0]), 1.0), [2.0, 3.0])


def test_arithmetic():
    f = ExprField.parse("x1")
    g = 2 * f + 1 - ExprField.parse("x2")
    assert g.expr == 2 * X1 + 1 - X2
    assert (-f).expr == -X1
    assert (f ** 2).expr == X1 ** 2
    try:
        f ** 0.5
    except ExpressionError:
        pass
    else:
        raise AssertionError("fractional power was accepted")


def test_matrix_helpers():
    M = matrix_field([["x1", 0], [1.5, "x2"]])
    assert M[0][0].expr == X1
    assert M[0][1].is_zero
    assert M[1][0].is_constant
    Z = zero_matrix()
    assert len(Z) == 3 and all(e.is_zero for row in Z for e in row)


if __name__ == "__main__":
    print("🧪 Expression field tests")
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
