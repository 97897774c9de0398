from fractions import Fraction

import pytest

from src.core.errors import ExpressionSyntaxError
from src.core.expression import Const, evaluate_complex, parse_expression, point_env, singular_margin


class TestParse:
    def test_variables_and_index(self):
        parsed = parse_expression("t1^3 + 2*t2^3 - z4", 4)
        assert parsed.variables() == frozenset({"t1", "t2", "z4"})
        assert parsed.max_index() == 4

    def test_exact_constant_folding(self):
        assert parse_expression("2^3 - 1").tree == Const(Fraction(7))
        assert parse_expression("1/3 + 1/6").tree == Const(Fraction(1, 2))

    def test_double_star_is_power(self):
        a = parse_expression("z1**2", 1)
        b = parse_expression("z1^2", 1)
        assert a.tree == b.tree

    def test_power_is_right_associative(self):
        env = point_env((2.0,), (0.0,))
        value = evaluate_complex(parse_expression("z1^3^2", 1).tree, env)
        assert value == pytest.approx(2.0 ** 9)

    def test_comments_and_flags(self):
        parsed = parse_expression("# cubic\n@flags odd, periodic\nt1^3  # trailing\n", 1)
        assert parsed.flags == frozenset({"odd", "periodic"})
        assert parsed.variables() == frozenset({"t1"})

    def test_constants_i_and_pi(self):
        value = evaluate_complex(parse_expression("exp(i*pi)").tree, {})
        assert value == pytest.approx(-1.0)


class TestSyntaxErrors:
    def test_misplaced_operator_position(self):
        """
        Tests that a parse failure reports the 1-based line and column of the offending token.
        """
        with pytest.raises(ExpressionSyntaxError) as excinfo:
            parse_expression("z1 + * t1", 1)

        assert excinfo.value.line == 1
        assert excinfo.value.column == 6
        assert "line 1, column 6" in str(excinfo.value)

    def test_unclosed_parenthesis_on_second_line(self):
        with pytest.raises(ExpressionSyntaxError) as excinfo:
            parse_expression("z1 +\n  (t1", 1)

        assert excinfo.value.line == 2
        assert excinfo.value.column == 6
        assert "expected ')'" in str(excinfo.value)

    def test_unexpected_character(self):
        with pytest.raises(ExpressionSyntaxError) as excinfo:
            parse_expression("z1 $ 2", 1)
        assert excinfo.value.column == 4

    def test_unknown_name(self):
        with pytest.raises(ExpressionSyntaxError) as excinfo:
            parse_expression("q1 + 1", 1)
        assert "unknown name" in str(excinfo.value)

    def test_index_beyond_n(self):
        with pytest.raises(ExpressionSyntaxError) as excinfo:
            parse_expression("t3", 2)
        assert "exceeds n = 2" in str(excinfo.value)

    def test_eps_only_in_observables(self):
        with pytest.raises(ExpressionSyntaxError):
            parse_expression("t1 - z1/eps", 1)
        assert parse_expression("t1 - z1/eps", 1, allow_eps=True).variables() == frozenset({"t1", "z1", "eps"})

    def test_unknown_flag(self):
        with pytest.raises(ExpressionSyntaxError) as excinfo:
            parse_expression("@flags smooth\nt1", 1)
        assert excinfo.value.line == 1

    def test_empty_expression(self):
        with pytest.raises(ExpressionSyntaxError):
            parse_expression("   # nothing here")


class TestSingularMargin:
    def test_denominator_margin(self):
        tree = parse_expression("1/(z1 - 1)", 1).tree
        assert singular_margin(tree, point_env((1.25,), (0.0,))) == pytest.approx(0.25)

    def test_zero_denominator(self):
        tree = parse_expression("t1/z1", 1).tree
        assert singular_margin(tree, point_env((0.0,), (1.0,))) == 0.0

    def test_polynomial_has_no_margin_limit(self):
        tree = parse_expression("z1*t1^2", 1).tree
        assert singular_margin(tree, point_env((0.0,), (0.0,))) == float("inf")
