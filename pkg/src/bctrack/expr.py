"""Tiny expression grammar for inline plant terms.

Accepted: numeric literals, ``x1``..``xn``, ``+``, ``-`` (binary and unary),
``*`` and ``sin(...)``.  Anything else is rejected at parse time.
"""

from __future__ import annotations

import ast
import math

from .errors import ParseError

_BIN = {ast.Add: lambda a, b: a + b, ast.Sub: lambda a, b: a - b, ast.Mult: lambda a, b: a * b}


def _compile(node, nvars, text):
    if isinstance(node, ast.Expression):
        return _compile(node.body, nvars, text)
    if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)) \
            and not isinstance(node.value, bool):
        v = float(node.value)
        return lambda x: v
    if isinstance(node, ast.Name):
        name = node.id
        if name.startswith("x") and name[1:].isdigit() and 1 <= int(name[1:]) <= nvars:
            k = int(name[1:]) - 1
            return lambda x: x[k]
        raise ParseError(f"unknown variable {name!r} in {text!r} (allowed x1..x{nvars})")
    if isinstance(node, ast.BinOp) and type(node.op) in _BIN:
        op = _BIN[type(node.op)]
        lhs = _compile(node.left, nvars, text)
        rhs = _compile(node.right, nvars, text)
        return lambda x: op(lhs(x), rhs(x))
    if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
        inner = _compile(node.operand, nvars, text)
        if isinstance(node.op, ast.USub):
            return lambda x: -inner(x)
        return inner
    if isinstance(node, ast.Call) and isinstance(node.func, ast.Name) and node.func.id == "sin" \
            and len(node.args) == 1 and not node.keywords:
        inner = _compile(node.args[0], nvars, text)
        return lambda x: math.sin(inner(x))
    raise ParseError(f"unsupported construct in expression {text!r}")


def compile_expression(text: str, nvars: int):
    """Return a callable ``f(x)`` for ``text`` over state variables ``x1..x{nvars}``."""
    try:
        tree = ast.parse(str(text).strip(), mode="eval")
    except SyntaxError as exc:
        raise ParseError(f"cannot parse expression {text!r}: {exc.msg}") from None
    return _compile(tree, nvars, text)
