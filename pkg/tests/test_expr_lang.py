import math
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from jungck.expr_lang import (
    ArityError,
    BinOp,
    Call,
    ExprEvalError,
    ExprSyntaxError,
    Neg,
    Num,
    UnknownIdentifierError,
    Var,
    evaluate,
    parse,
    to_text,
)


def test_basic_examples():
    assert evaluate(parse("t/(1+t)"), 1) == 0.5
    assert evaluate(parse("x/2"), 3) == 1.5
    assert evaluate(parse("pow(t,2)"), 3) == 9


def test_hand_evaluated_nested_call():
    # |1.1 - 1| is about 0.1, below 0.25
    assert evaluate(parse("max(abs(x-1), 0.25)"), 1.1) == 0.25


def test_syntax_error_offset():
    with pytest.raises(ExprSyntaxError) as info:
        parse("min(x,)")
    assert info.value.offset == 6


@pytest.mark.parametrize(
    "text, offset",
    [("1 +", 3), ("(x", 2), ("x $ 2", 2), ("2 3", 2), ("abs x", 4)],
)
def test_other_syntax_errors(text, offset):
    with pytest.raises(ExprSyntaxError) as info:
        parse(text)
    assert info.value.offset == offset


def test_unknown_identifier_and_arity():
    with pytest.raises(UnknownIdentifierError):
        parse("y + 1")
    with pytest.raises(UnknownIdentifierError):
        parse("x + t")
    with pytest.raises(UnknownIdentifierError):
        parse("t + 1", var="x")
    with pytest.raises(ArityError):
        parse("pow(x)")
    with pytest.raises(ArityError):
        parse("abs(x, 1)")


def test_precedence():
    assert evaluate("1 + 2 * 3", 0) == 7
    assert evaluate("-x * 2", 3) == -6
    assert evaluate("8 / 4 / 2", 0) == 1
    assert evaluate("1 - 2 - 3", 0) == -4
    assert evaluate("--x", 2) == 2
    assert evaluate("2.5e-1 + .5", 0) == 0.75


@pytest.mark.parametrize(
    "text, value, message",
    [
        ("1/x", 0, "division by zero"),
        ("sqrt(x)", -1, "square root"),
        ("pow(x, 0.5)", -4, "negative base"),
        ("pow(x, -1)", 0, "division by zero"),
        ("x*x*x*x", 1e200, "non-finite"),
    ],
)
def test_eval_errors_identify_node(text, value, message):
    with pytest.raises(ExprEvalError) as info:
        evaluate(parse(text), value)
    assert message in str(info.value)
    assert info.value.node is not None


def test_pow_integer_exponent_negative_base():
    assert evaluate("pow(x, 3)", -2) == -8


def test_eval_is_pure():
    e = parse("max(x/3, 1 - x) + sqrt(abs(x))")
    assert [e(0.3) for _ in range(5)] == [e(0.3)] * 5


def test_canonical_printer_roundtrip_tree():
    e = parse("-(x + 1) * 2 - -x / (3 - x)")
    assert parse(to_text(e)).root == e.root
    assert to_text(parse(to_text(e))) == to_text(e)


# random trees for the round-trip property
def trees(depth):
    leaf = st.one_of(st.floats(0, 100, allow_nan=False).map(Num), st.just(Var("x")))
    if depth == 0:
        return leaf
    sub = trees(depth - 1)
    return st.one_of(
        leaf,
        sub.map(Neg),
        st.tuples(st.sampled_from("+-*/"), sub, sub).map(lambda t: BinOp(*t)),
        st.tuples(st.sampled_from(["min", "max", "pow"]), sub, sub).map(lambda t: Call(t[0], (t[1], t[2]))),
        st.tuples(st.sampled_from(["abs", "sqrt"]), sub).map(lambda t: Call(t[0], (t[1],))),
    )


def _safe(e, v):
    try:
        return ("ok", e(v))
    except ExprEvalError:
        return ("err", None)


@settings(max_examples=100, deadline=None)
@given(trees(3))
def test_reparse_is_eval_equivalent(root):
    from jungck.expr_lang import Expr

    e = Expr(root, "x")
    again = parse(to_text(e))
    rng = random.Random(0)
    for _ in range(20):
        v = rng.uniform(-5, 5)
        a, b = _safe(e, v), _safe(again, v)
        assert a[0] == b[0]
        if a[0] == "ok":
            assert a[1] == b[1] or (math.isnan(a[1]) and math.isnan(b[1]))
