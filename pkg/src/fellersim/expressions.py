"""Closed-form coefficient expressions.

Coefficient functions (drift, dispersion, scale factors, stability index,
tempering mass, ...) are declared in config documents as small closed-form
expressions over the scalar state.  Supported pieces: numeric literals, the
names ``x`` (state coordinate) and ``r`` (= abs(x)), the operators
``+ - * / **`` (``^`` is accepted as a synonym for ``**``), and the functions
``exp``, ``abs`` and ``clamp(value, lo, hi)``.

Expressions evaluate vectorized over numpy arrays and are pure.
"""
from __future__ import annotations

import ast
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import ConfigurationError

_FUNCTIONS: dict[str, Callable] = {
    "exp": np.exp,
    "abs": np.abs,
    "clamp": lambda v, lo, hi: np.clip(v, lo, hi),
}

_BINOPS = {
    ast.Add: np.add,
    ast.Sub: np.subtract,
    ast.Mult: np.multiply,
    ast.Div: np.true_divide,
    ast.Pow: np.power,
}

_UNARYOPS = {ast.UAdd: lambda v: v, ast.USub: np.negative}


def _compile_node(node: ast.AST, text: str) -> Callable:
    if isinstance(node, ast.Expression):
        return _compile_node(node.body, text)
    if isinstance(node, ast.Constant):
        if not isinstance(node.value, (int, float)):
            raise ConfigurationError(f"non-numeric literal {node.value!r} in {text!r}")
        value = float(node.value)
        return lambda env: value
    if isinstance(node, ast.Name):
        if node.id == "x":
            return lambda env: env
        if node.id == "r":
            return lambda env: np.abs(env)
        raise ConfigurationError(f"unknown name {node.id!r} in {text!r} (allowed: x, r)")
    if isinstance(node, ast.BinOp):
        op = _BINOPS.get(type(node.op))
        if op is None:
            raise ConfigurationError(f"operator {type(node.op).__name__} not allowed in {text!r}")
        left = _compile_node(node.left, text)
        right = _compile_node(node.right, text)
        return lambda env: op(left(env), right(env))
    if isinstance(node, ast.UnaryOp):
        op = _UNARYOPS.get(type(node.op))
        if op is None:
            raise ConfigurationError(f"operator {type(node.op).__name__} not allowed in {text!r}")
        operand = _compile_node(node.operand, text)
        return lambda env: op(operand(env))
    if isinstance(node, ast.Call):
        if not isinstance(node.func, ast.Name) or node.func.id not in _FUNCTIONS:
            raise ConfigurationError(f"function call not allowed in {text!r}")
        if node.keywords:
            raise ConfigurationError(f"keyword arguments not allowed in {text!r}")
        fn = _FUNCTIONS[node.func.id]
        args = [_compile_node(a, text) for a in node.args]
        return lambda env: fn(*(a(env) for a in args))
    raise ConfigurationError(f"syntax {type(node).__name__} not allowed in {text!r}")


@dataclass(frozen=True)
class Expression:
    """A compiled coefficient expression; call it with scalars or arrays."""

    text: str
    _fn: Callable = field(repr=False, compare=False)

    def __call__(self, x):
        return self._fn(np.asarray(x, dtype=float))


def parse_expression(text: str) -> Expression:
    """Compile an expression string; raises ConfigurationError on bad input."""
    source = text.replace("^", "**")
    try:
        tree = ast.parse(source, mode="eval")
    except SyntaxError as exc:
        raise ConfigurationError(f"cannot parse expression {text!r}: {exc.msg}") from exc
    fn = _compile_node(tree, text)
    return Expression(text=text, _fn=fn)


def as_coefficient(obj) -> Callable:
    """Coerce a coefficient declaration into a vectorized callable.

    Accepts an Expression, an expression string, a plain number (constant
    function), or any callable (used as-is).
    """
    if isinstance(obj, Expression):
        return obj
    if isinstance(obj, str):
        return parse_expression(obj)
    if isinstance(obj, (int, float)):
        value = float(obj)
        return lambda x: np.full_like(np.asarray(x, dtype=float), value)
    if callable(obj):
        return obj
    raise ConfigurationError(f"cannot interpret coefficient {obj!r}")
