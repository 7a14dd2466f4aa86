"""Expression evaluation over match/join rows.

Null handling is uniform: an unbound reference yields None, comparisons
against None are false, arithmetic on None (or division by zero) is None.
Nulls only arise in pattern rows; window rows are fully typed.
"""

from __future__ import annotations

from ..model import (
    AggCall,
    AggFn,
    Arith,
    ArithExpr,
    ArithOp,
    AttrRef,
    Compare,
    CompareOp,
    Expression,
    Literal,
    Logical,
    LogicalOp,
    Operand,
    ScalarFn,
    ScalarFnName,
)


class RowContext:
    """What an expression needs from its surroundings."""

    def value_of(self, ref: AttrRef):
        raise NotImplementedError

    def aggregate(self, call: AggCall):
        raise NotImplementedError


def evaluate_operand(op: Operand, ctx: RowContext):
    if isinstance(op, AttrRef):
        return ctx.value_of(op)
    if isinstance(op, Literal):
        return op.value
    if isinstance(op, AggCall):
        return ctx.aggregate(op)
    if isinstance(op, ScalarFn):
        a = evaluate_operand(op.args[0], ctx)
        b = evaluate_operand(op.args[1], ctx)
        if a is None or b is None:
            return None
        return max(a, b) if op.fn is ScalarFnName.MAX2 else min(a, b)
    if isinstance(op, ArithExpr):
        return _arith(op.expr, ctx)
    raise TypeError(f"unexpected operand: {op!r}")


def _arith(expr: Arith, ctx: RowContext):
    lhs = evaluate_operand(expr.lhs, ctx)
    rhs = evaluate_operand(expr.rhs, ctx)
    if lhs is None or rhs is None:
        return None
    if expr.op is ArithOp.ADD:
        return lhs + rhs
    if expr.op is ArithOp.SUB:
        return lhs - rhs
    if expr.op is ArithOp.MUL:
        return lhs * rhs
    if rhs == 0:
        return None
    return lhs / rhs


_COMPARES = {
    CompareOp.EQ: lambda a, b: a == b,
    CompareOp.NE: lambda a, b: a != b,
    CompareOp.LT: lambda a, b: a < b,
    CompareOp.LE: lambda a, b: a <= b,
    CompareOp.GT: lambda a, b: a > b,
    CompareOp.GE: lambda a, b: a >= b,
}


def evaluate_predicate(expr: Expression, ctx: RowContext) -> bool:
    """Condition truth for one row; None collapses to false."""
    if isinstance(expr, Compare):
        lhs = evaluate_operand(expr.lhs, ctx)
        rhs = evaluate_operand(expr.rhs, ctx)
        if lhs is None or rhs is None:
            return False
        return _COMPARES[expr.op](lhs, rhs)
    if isinstance(expr, Logical):
        if expr.op is LogicalOp.NOT:
            return not evaluate_predicate(expr.children[0], ctx)
        if expr.op is LogicalOp.AND:
            return all(evaluate_predicate(c, ctx) for c in expr.children)
        return any(evaluate_predicate(c, ctx) for c in expr.children)
    if isinstance(expr, Arith):
        raise TypeError("arithmetic is not a predicate")
    raise TypeError(f"unexpected expression: {expr!r}")


def aggregate_values(fn: AggFn, values: list):
    """Fold for one aggregate; empty input is None (count: 0)."""
    values = [v for v in values if v is not None]
    if fn is AggFn.COUNT:
        return len(values)
    if not values:
        return None
    if fn is AggFn.SUM:
        return sum(values)
    if fn is AggFn.AVG:
        return sum(values) / len(values)
    if fn is AggFn.MAX:
        return max(values)
    return min(values)
