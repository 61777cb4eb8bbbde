from __future__ import annotations

import numpy as np
import pytest

from orderscope import (
    MeasureDefinition,
    MeasureError,
    MeasureKind,
    MeasureRuntimeError,
    MeasureSyntaxError,
    MeasureTypeError,
    Window,
    compile_measure,
    compile_source,
    eval_aggregate,
    eval_per_step,
    list_builtins,
    parse,
    to_source,
)
from orderscope.dsl.parser import BinOp, Call, Index, Let, Neg, Num, Var

from conftest import deterministic_features, make_run


class TestParser:
    def test_call_tree(self):
        tree = parse("norm(X)")
        assert isinstance(tree, Call)
        assert tree.name == "norm"
        assert tree.line == 1 and tree.col == 1
        (arg,) = tree.args
        assert isinstance(arg, Var) and arg.name == "X"
        assert arg.col == 6

    def test_precedence(self):
        tree = parse("1 + 2 * 3")
        assert isinstance(tree, BinOp) and tree.op == "+"
        assert isinstance(tree.right, BinOp) and tree.right.op == "*"

    def test_left_associativity(self):
        tree = parse("8.0 - 4.0 - 2.0")
        assert isinstance(tree.left, BinOp) and tree.left.op == "-"
        assert isinstance(tree.right, Num) and tree.right.value == 2.0

    def test_pow_right_associative_over_unary(self):
        tree = parse("-2 ^ 2 ^ 3")
        assert isinstance(tree, Neg)
        inner = tree.operand
        assert isinstance(inner, BinOp) and inner.op == "^"
        assert isinstance(inner.right, BinOp) and inner.right.op == "^"

    def test_index_holds_full_expression(self):
        tree = parse("X[i + 1]")
        assert isinstance(tree, Index)
        assert tree.name == "X"
        assert isinstance(tree.index, BinOp)

    def test_let_tree(self):
        tree = parse("let a = 1 in a + a")
        assert isinstance(tree, Let)
        assert tree.name == "a"
        assert isinstance(tree.bound, Num)
        assert isinstance(tree.body, BinOp)

    def test_number_forms(self):
        assert parse("2").value == 2.0
        assert parse("2.5").value == 2.5
        assert parse(".5").value == 0.5
        assert parse("1e3").value == 1000.0
        assert parse("1.5E-2").value == 0.015
        assert parse("2e+1").value == 20.0

    def test_positions_across_lines(self):
        with pytest.raises(MeasureSyntaxError) as exc_info:
            parse("1 +\n  * 2")
        assert exc_info.value.line == 2
        assert exc_info.value.col == 3

    def test_unterminated_call_reports_eof_column(self):
        with pytest.raises(MeasureSyntaxError) as exc_info:
            parse("norm(")
        assert (exc_info.value.line, exc_info.value.col) == (1, 6)

    def test_unexpected_character(self):
        with pytest.raises(MeasureSyntaxError) as exc_info:
            parse("1 ? 2")
        assert exc_info.value.col == 3

    def test_trailing_garbage_rejected(self):
        with pytest.raises(MeasureSyntaxError, match="end of input"):
            parse("1 2")

    def test_empty_source_rejected(self):
        with pytest.raises(MeasureSyntaxError):
            parse("")
        with pytest.raises(MeasureSyntaxError):
            parse("   ")

    def test_keywords_not_usable_as_names(self):
        with pytest.raises(MeasureSyntaxError):
            parse("let in = 1 in in")

    def test_position_equality_excluded(self):
        assert parse("1 + 2") == parse("1+2")
        assert parse("norm( X )") == parse("norm(X)")

    @pytest.mark.parametrize(
        "source",
        [
            "a * -b",
            "--x",
            "(a ^ b) ^ c",
            "a ^ b ^ c",
            "(-a) ^ b",
            "a ^ -b",
            "-(a + b)",
            "a - (b - c)",
            "a / b / c",
            "let x = let y = 1 in y in x",
            "f(a, b + 1, g(c))",
            "X[3 * 2 + 1]",
            "1e-3 + .5",
        ],
    )
    def test_print_parse_round_trip(self, source):
        tree = parse(source)
        assert parse(to_source(tree)) == tree


class TestTypecheck:
    def test_shadowing_binding(self):
        # A let name may shadow a context binding with a new type.
        compile_source("m", "per_step", "let t = norm(X) in t * t")

    def test_let_binds_vector(self):
        compile_source("m", "per_step", "let v = at(0) in dot(X, v)")

    def test_let_scope_does_not_leak(self):
        with pytest.raises(MeasureTypeError, match="unbound"):
            compile_source("m", "per_step", "let a = 1 in a + 0 * nothing")
        with pytest.raises(MeasureTypeError, match="unbound"):
            compile_source("m", "per_step", "(let a = 1 in a) + a")

    def test_series_arithmetic_in_aggregate(self):
        compile_source("m", "aggregate", "mean(S * S) - mean(S) ^ 2.0")
        compile_source("m", "aggregate", "mean(S - T_axis)")
        compile_source("m", "aggregate", "mean(2.0 * S)")

    def test_vector_scalar_broadcast(self):
        compile_source("m", "per_step", "norm(X / 2.0)")
        compile_source("m", "per_step", "norm(X * 0.5 + at(0))")

    def test_vector_series_mix_rejected(self):
        with pytest.raises(MeasureTypeError):
            compile_source("m", "aggregate", "mean(S) + quantile(S, 0.5) * len(X)")

    def test_pow_requires_scalars(self):
        with pytest.raises(MeasureTypeError):
            compile_source("m", "per_step", "2.0 ^ X")

    def test_nonfinite_literal_rejected(self):
        with pytest.raises(MeasureTypeError):
            compile_source("m", "per_step", "1e999")

    def test_arity_messages(self):
        with pytest.raises(MeasureTypeError, match="argument"):
            compile_source("m", "per_step", "dot(X)")
        with pytest.raises(MeasureTypeError, match="argument"):
            compile_source("m", "per_step", "norm(X, X)")
        with pytest.raises(MeasureTypeError, match="argument"):
            compile_source("m", "per_step", "recurrence(1, 2)")

    def test_recurrence_zero_arity_allowed(self):
        compile_source("m", "per_step", "recurrence()")
        compile_source("m", "per_step", "recurrence(5)")

    def test_kind_availability_messages(self):
        with pytest.raises(MeasureTypeError, match="not available in aggregate"):
            compile_source("m", "aggregate", "recurrence(10) + mean(S)")
        with pytest.raises(MeasureTypeError, match="not available in per"):
            compile_source("m", "per_step", "mean(X)")

    def test_at_is_not_catalogued_but_usable(self):
        names = {b.name for b in list_builtins()}
        assert "at" not in names
        compile_source("m", "per_step", "norm(at(0))")
        with pytest.raises(MeasureTypeError):
            compile_source("m", "aggregate", "norm(at(0))")


class TestCatalog:
    def test_catalog_contents(self):
        catalog = list_builtins()
        assert len(catalog) == 25
        by_name = {b.name: b for b in catalog}
        per_step_only = {
            "norm", "dot", "dist", "particle", "vmean", "vmin", "vmax",
            "vstd", "recurrence",
        }
        shared = {"abs", "sqrt", "sin", "cos", "exp", "log"}
        aggregate_only = {
            "mean", "twmean", "median", "std", "min", "max", "quantile",
            "first", "last", "len",
        }
        assert set(by_name) == per_step_only | shared | aggregate_only
        for name in per_step_only:
            assert by_name[name].kinds == (MeasureKind.PER_STEP,)
        for name in shared:
            assert set(by_name[name].kinds) == {
                MeasureKind.PER_STEP,
                MeasureKind.AGGREGATE,
            }
        for name in aggregate_only:
            assert by_name[name].kinds == (MeasureKind.AGGREGATE,)
        assert by_name["recurrence"].arity_text() == "0..1"
        for builtin in catalog:
            assert builtin.doc


class TestEvaluation:
    def test_window_restricts_bindings(self, small_run):
        measure = compile_source("m", "per_step", "i / N")
        times, values = eval_per_step(measure, small_run, Window(10.0, 20.0))
        assert times[0] >= 10.0 and times[-1] <= 20.0
        n = len(times)
        np.testing.assert_allclose(values, np.arange(n) / n)

    def test_at_is_window_relative(self, small_run):
        measure = compile_source("m", "per_step", "dist(X, at(0))")
        window = Window(5.0, 30.0)
        _, values = eval_per_step(measure, small_run, window)
        assert values[0] == 0.0

    def test_recurrence_uses_default_width(self, small_run):
        explicit = compile_source("m", "per_step", "recurrence(7)")
        implicit = compile_source("m", "per_step", "recurrence()")
        _, want = eval_per_step(explicit, small_run)
        _, got = eval_per_step(implicit, small_run, default_width=7)
        assert got.tobytes() == want.tobytes()

    def test_recurrence_width_must_be_positive_integer(self, small_run):
        bad = compile_source("m", "per_step", "recurrence(2.5)")
        with pytest.raises(MeasureRuntimeError):
            eval_per_step(bad, small_run)
        zero = compile_source("m", "per_step", "recurrence(0)")
        with pytest.raises(MeasureRuntimeError):
            eval_per_step(zero, small_run)

    def test_runtime_error_carries_time_index(self, small_run):
        measure = compile_source("m", "per_step", "1.0 / (i - 3.0)")
        with pytest.raises(MeasureRuntimeError) as exc_info:
            eval_per_step(measure, small_run)
        assert exc_info.value.time_index == 3

    def test_index_must_be_integral(self, small_run):
        measure = compile_source("m", "per_step", "X[0.5]")
        with pytest.raises(MeasureRuntimeError, match="integer"):
            eval_per_step(measure, small_run)

    def test_kind_guards(self, small_run):
        agg = compile_source("m", "aggregate", "mean(S)")
        with pytest.raises(MeasureError):
            eval_per_step(agg, small_run)
        step = compile_source("m", "per_step", "t")
        with pytest.raises(MeasureError):
            eval_aggregate(step, np.arange(4.0), np.arange(4.0))

    def test_aggregate_validates_lengths(self):
        measure = compile_source("m", "aggregate", "mean(S)")
        with pytest.raises(MeasureError):
            eval_aggregate(measure, np.arange(3.0), np.arange(4.0))
        with pytest.raises(MeasureError):
            eval_aggregate(measure, np.array([]), np.array([]))

    def test_evaluation_is_pure(self, small_run):
        measure = compile_source("m", "per_step", "recurrence() + norm(X) * t")
        _, first = eval_per_step(measure, small_run)
        _, second = eval_per_step(measure, small_run)
        assert first.tobytes() == second.tobytes()

    def test_name_does_not_affect_values(self, small_run):
        a = compile_source("alpha", "per_step", "norm(X)")
        b = compile_source("beta_name", "per_step", "norm(X)")
        assert eval_per_step(a, small_run)[1].tobytes() == \
            eval_per_step(b, small_run)[1].tobytes()

    def test_overflow_is_runtime_error(self, small_run):
        measure = compile_source("m", "per_step", "exp(t * t * t * t)")
        with pytest.raises(MeasureRuntimeError):
            eval_per_step(measure, small_run)

    def test_huge_pow_is_runtime_error(self, small_run):
        measure = compile_source("m", "per_step", "(t + 10.0) ^ 10000.0")
        with pytest.raises(MeasureRuntimeError):
            eval_per_step(measure, small_run)


class TestDefinitions:
    def test_definition_requires_name(self):
        with pytest.raises(MeasureError):
            MeasureDefinition("", MeasureKind.PER_STEP, "norm(X)")
        with pytest.raises(MeasureError):
            MeasureDefinition("   ", MeasureKind.PER_STEP, "norm(X)")

    def test_compile_measure_round_trip(self):
        definition = MeasureDefinition("m", MeasureKind.AGGREGATE, "mean(S)")
        compiled = compile_measure(definition)
        assert compiled.name == "m"
        assert compiled.kind is MeasureKind.AGGREGATE

    def test_compile_source_accepts_strings(self):
        compiled = compile_source("m", "per_step", "norm(X)")
        assert compiled.kind is MeasureKind.PER_STEP
        with pytest.raises(ValueError):
            compile_source("m", "sideways", "norm(X)")


def test_printed_form_evaluates_identically(small_run):
    sources = [
        "recurrence(5) + norm(X) * 2.0",
        "let a = dist(X, at(0)) in a ^ 2.0 - a",
        "-vmean(X) / (1.0 + i)",
    ]
    for source in sources:
        original = compile_source("m", "per_step", source)
        printed = compile_source("m", "per_step", to_source(parse(source)))
        _, want = eval_per_step(original, small_run)
        _, got = eval_per_step(printed, small_run)
        assert got.tobytes() == want.tobytes()
