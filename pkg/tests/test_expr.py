import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from thermoform.expr import (
    Bin,
    BindError,
    Call,
    DomainError,
    Neg,
    Num,
    ParseError,
    ScalarField,
    Var,
    differentiate,
    evaluate,
    grad,
    hessian,
    parse,
    serialize,
)
from conftest import fd_grad, fd_hessian, random_polynomial_text

VDW_TEXT = "(V-0.1)^(2/3)*exp(S/1.5) - 1/V"


class TestParse:
    def test_literal_arithmetic(self):
        assert evaluate(parse("2*x + 3"), {"x": 1.0}) == 5.0

    def test_vdw_parses_and_evaluates(self):
        e = parse(VDW_TEXT)
        # oracle: direct evaluation of the constitutive law with a=1, b=0.1, R=1, c_V=1.5
        expected = 0.9 ** (2.0 / 3.0) * math.exp(0.0) - 1.0
        assert evaluate(e, {"S": 0.0, "V": 1.0}) == pytest.approx(expected, abs=1e-15)

    def test_syntax_error_offset(self):
        with pytest.raises(ParseError) as err:
            parse("x + * y")
        assert err.value.offset == 4

    def test_unknown_function(self):
        with pytest.raises(ParseError, match="unknown function"):
            parse("sin(x)")

    def test_precedence(self):
        assert evaluate(parse("2+3*4"), {}) == 14.0
        assert evaluate(parse("-2^2"), {}) == -4.0  # unary minus binds looser than power
        assert evaluate(parse("2^3^2"), {}) == 512.0  # right-associative
        assert evaluate(parse("2^-1"), {}) == 0.5

    def test_whitespace_insensitive(self):
        assert parse(" 2 * x + 3 ") == parse("2*x+3")


class TestEval:
    def test_division_by_zero_is_domain_error(self):
        with pytest.raises(DomainError):
            evaluate(parse("1/V"), {"V": 0.0})

    def test_ln_of_nonpositive(self):
        with pytest.raises(DomainError):
            evaluate(parse("ln(x)"), {"x": -1.0})

    def test_noninteger_power_of_negative_base(self):
        with pytest.raises(DomainError):
            evaluate(parse("x^(1/3)"), {"x": -8.0})

    def test_integer_power_of_negative_base(self):
        assert evaluate(parse("x^3"), {"x": -2.0}) == -8.0

    def test_unbound_coordinate(self):
        with pytest.raises(BindError, match="unbound"):
            evaluate(parse("x+y"), {"x": 1.0})

    def test_domain_error_names_subexpression(self):
        with pytest.raises(DomainError, match="1/V"):
            evaluate(parse("2 + 1/V"), {"V": 0.0})


class TestGrad:
    def test_square(self):
        assert grad(parse("x^2"), {"x": 3.0}, ["x"]) == pytest.approx([6.0])

    def test_product(self):
        g = grad(parse("x*y"), {"x": 2.0, "y": 5.0}, ["x", "y"])
        assert g == pytest.approx([5.0, 2.0])

    def test_vdw_matches_central_differences(self):
        e = parse(VDW_TEXT)
        b = {"S": 0.0, "V": 1.0}
        g = grad(e, b, ["S", "V"])
        ref = fd_grad(lambda x: evaluate(e, x), b, ["S", "V"])
        assert np.max(np.abs(g - ref) / np.maximum(1.0, np.abs(ref))) <= 1e-6


class TestHessian:
    def test_diagonal(self):
        h = hessian(parse("x^2+y^2"), {"x": 0.3, "y": -2.0}, ["x", "y"])
        assert h == pytest.approx(np.diag([2.0, 2.0]))

    def test_cross(self):
        h = hessian(parse("x*y"), {"x": 1.0, "y": 1.0}, ["x", "y"])
        assert h == pytest.approx(np.array([[0.0, 1.0], [1.0, 0.0]]))

    def test_vdw_matches_central_differences(self):
        e = parse(VDW_TEXT)
        b = {"S": 0.0, "V": 1.0}
        h = hessian(e, b, ["S", "V"])
        ref = fd_hessian(lambda x: evaluate(e, x), b, ["S", "V"])
        assert np.max(np.abs(h - ref) / np.maximum(1.0, np.abs(ref))) <= 1e-4


COMPOSITE_CORPUS = [
    "exp(x*y) - sqrt(x+2)",
    "ln(1+x^2) * y",
    "x^3 - 2*x*y + y^2/(1+x^2)",
    "pow(x+2, 3) + abs(y+5)",
    "(x+1)^(y+2)",
    "1/(1+x^2+y^2)",
]


@pytest.mark.parametrize("text", COMPOSITE_CORPUS)
@given(x=st.floats(0.1, 2.0), y=st.floats(0.1, 2.0))
@settings(max_examples=25, deadline=None)
def test_grad_matches_fd_on_composites(text, x, y):
    e = parse(text)
    b = {"x": x, "y": y}
    g = grad(e, b, ["x", "y"])
    ref = fd_grad(lambda p: evaluate(e, p), b, ["x", "y"])
    scale = np.maximum(1.0, np.abs(ref))
    assert np.max(np.abs(g - ref) / scale) <= 1e-6


@pytest.mark.parametrize("text", COMPOSITE_CORPUS)
@given(x=st.floats(0.1, 2.0), y=st.floats(0.1, 2.0))
@settings(max_examples=25, deadline=None)
def test_hessian_bitwise_symmetric(text, x, y):
    h = hessian(parse(text), {"x": x, "y": y}, ["x", "y"])
    # symmetric to exactly zero: computed once per unordered pair
    assert np.array_equal(h, h.T)


# --- round-trip stability ---------------------------------------------------

_names = st.sampled_from(["x", "y", "z", "V", "S"])
_nums = st.floats(min_value=0.0, max_value=1e6, allow_nan=False, allow_infinity=False)


def _expr_strategy():
    leaf = st.one_of(_nums.map(Num), _names.map(Var))

    def extend(children):
        return st.one_of(
            children.map(Neg),
            st.tuples(st.sampled_from("+-*/^"), children, children).map(lambda t: Bin(*t)),
            st.tuples(st.sampled_from(["exp", "ln", "sqrt", "abs"]), children).map(
                lambda t: Call(t[0], (t[1],))
            ),
            st.tuples(children, children).map(lambda t: Call("pow", t)),
        )

    return st.recursive(leaf, extend, max_leaves=20)


@given(e=_expr_strategy())
@settings(max_examples=200, deadline=None)
def test_parse_serialize_roundtrip(e):
    assert parse(serialize(e)) == e


@pytest.mark.parametrize("text", COMPOSITE_CORPUS + [VDW_TEXT, "2*x + 3"])
def test_roundtrip_on_corpus(text):
    e = parse(text)
    assert parse(serialize(e)) == e


class TestDifferentiate:
    @pytest.mark.parametrize("text", COMPOSITE_CORPUS)
    def test_symbolic_matches_ad(self, text):
        e = parse(text)
        for b in ({"x": 0.7, "y": 1.3}, {"x": 1.9, "y": 0.2}):
            for name in ("x", "y"):
                symbolic = evaluate(differentiate(e, name), b)
                ad = grad(e, b, [name])[0]
                assert symbolic == pytest.approx(ad, rel=1e-12, abs=1e-12)

    def test_random_polynomials(self, rng):
        names = ["a", "b", "c"]
        for _ in range(10):
            e = parse(random_polynomial_text(names, rng))
            b = {n: float(rng.uniform(-1, 1)) for n in names}
            for name in names:
                assert evaluate(differentiate(e, name), b) == pytest.approx(
                    grad(e, b, [name])[0], rel=1e-12, abs=1e-12)


class TestScalarField:
    def test_unresolved_name_is_bind_error(self):
        with pytest.raises(BindError, match="unresolved"):
            ScalarField.from_text("x + y", ["x"])

    def test_duplicate_names_rejected(self):
        with pytest.raises(BindError):
            ScalarField.from_text("x", ["x", "x"])

    def test_grad_order_follows_wrt(self):
        f = ScalarField.from_text("x*y^2", ["x", "y"])
        b = {"x": 2.0, "y": 3.0}
        assert f.grad(b, ("y", "x")) == pytest.approx([12.0, 9.0])
