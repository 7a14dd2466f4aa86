from __future__ import annotations

from dataclasses import replace

from cepkit.model import (
    AggCall,
    AggFn,
    And,
    Arith,
    ArithOp,
    Attribute,
    AttributeKind,
    AttrRef,
    Compare,
    CompareOp,
    EventRef,
    EventType,
    EVERY,
    FollowedBy,
    GroupBySpec,
    GuardKind,
    Literal,
    Logical,
    LogicalOp,
    OutputSpec,
    PatternGuard,
    RepetitionKind,
    RepetitionSpec,
    RuleModel,
    SelectItem,
    STAR,
    TargetBinding,
    Window,
    WindowKind,
)
from cepkit.validation import Diagnostic, ExprKind, typecheck, validate

from conftest import GOLDEN_MODELS


def codes(model) -> list[str]:
    return [d.code for d in validate(model)]


def one_event_model(**overrides) -> RuleModel:
    base = RuleModel(
        name="R",
        events=(
            EventType(
                "Trade",
                (
                    Attribute("price", AttributeKind.FLOAT),
                    Attribute("symbol", AttributeKind.STRING),
                    Attribute("ok", AttributeKind.BOOLEAN),
                    Attribute("at", AttributeKind.TIMESTAMP),
                ),
            ),
        ),
        targets=(TargetBinding("Trade", alias="t", window=Window.timer(10)),),
        bring=(SelectItem(STAR),),
    )
    return replace(base, **overrides)


def pattern_model(**overrides) -> RuleModel:
    base = RuleModel(
        name="P",
        events=(
            EventType("A", (Attribute("x", AttributeKind.INTEGER),)),
            EventType("B", (Attribute("y", AttributeKind.INTEGER),)),
        ),
        targets=(TargetBinding("A", alias="a"), TargetBinding("B", alias="b")),
        pattern=FollowedBy((EventRef("a"), EventRef("b")), repetition=EVERY),
        bring=(SelectItem(STAR),),
    )
    return replace(base, **overrides)


def test_golden_models_validate_clean():
    for build in GOLDEN_MODELS.values():
        assert validate(build()) == []


def test_pattern_baseline_clean():
    assert validate(pattern_model()) == []


# --- V001 ------------------------------------------------------------------


def test_v001_no_targets():
    assert codes(one_event_model(targets=())) == ["V001"]


# --- V002 ------------------------------------------------------------------


def test_v002_duplicate_event_names():
    m = one_event_model()
    m = replace(m, events=m.events + (EventType("Trade", ()),))
    assert "V002" in codes(m)


def test_v002_duplicate_attribute_names():
    m = one_event_model(
        events=(
            EventType(
                "Trade",
                (
                    Attribute("price", AttributeKind.FLOAT),
                    Attribute("price", AttributeKind.FLOAT),
                ),
            ),
        )
    )
    assert codes(m) == ["V002"]


def test_v002_duplicate_target_alias():
    m = one_event_model()
    m = replace(m, targets=m.targets + (TargetBinding("Trade", alias="t"),))
    assert codes(m) == ["V002"]


def test_v002_default_alias_collides_with_explicit():
    m = one_event_model()
    m = replace(m, targets=m.targets + (TargetBinding("Trade", alias="trade"),
                                        TargetBinding("Trade")))
    assert codes(m) == ["V002"]


def test_v002_duplicate_pattern_tag():
    m = pattern_model(
        pattern=FollowedBy((EventRef("a"), EventRef("b", tag="a")), repetition=EVERY)
    )
    assert codes(m) == ["V002"]


def test_v002_output_name_collides_with_event():
    m = one_event_model(output=OutputSpec("Trade"))
    assert codes(m) == ["V002"]


# --- V003 ------------------------------------------------------------------


def test_v003_undeclared_target_event():
    m = one_event_model(targets=(TargetBinding("Ghost", alias="g"),))
    assert codes(m) == ["V003"]


# --- V004 ------------------------------------------------------------------


def test_v004_unknown_alias_in_condition():
    m = one_event_model(
        condition=Compare(CompareOp.GT, AttrRef("zz", "price"), Literal(1))
    )
    d = validate(m)
    assert [x.code for x in d] == ["V004"]
    assert d[0].path == "condition.lhs"


def test_v004_unknown_attribute():
    m = one_event_model(
        condition=Compare(CompareOp.GT, AttrRef("t", "nope"), Literal(1))
    )
    assert codes(m) == ["V004"]


def test_v004_ambiguous_unqualified():
    m = one_event_model()
    m = replace(
        m,
        events=m.events + (EventType("Quote", (Attribute("price", AttributeKind.FLOAT),)),),
        targets=m.targets + (TargetBinding("Quote", alias="q"),),
        condition=Compare(CompareOp.GT, AttrRef(None, "price"), Literal(1)),
    )
    assert codes(m) == ["V004"]


def test_v004_group_win_unknown_attribute():
    m = one_event_model(
        targets=(TargetBinding("Trade", alias="t", window=Window.timer(10),
                               group_win=("nope",)),),
    )
    d = validate(m)
    assert [x.code for x in d] == ["V004"]
    assert d[0].path == "targets[0].group_win[0]"


def test_v004_pattern_unknown_target_alias():
    m = pattern_model(
        pattern=FollowedBy((EventRef("a"), EventRef("zz")), repetition=EVERY)
    )
    d = validate(m)
    assert [x.code for x in d] == ["V004"]
    assert d[0].path == "pattern.children[1]"


def test_v004_group_by_unknown_key():
    m = one_event_model(
        bring=(SelectItem(AggCall(AggFn.COUNT)),),
        group_by=GroupBySpec((AttrRef("t", "nope"),)),
    )
    assert codes(m) == ["V004"]


# --- V005 ------------------------------------------------------------------


def test_v005_avg_on_string():
    m = one_event_model(bring=(SelectItem(AggCall(AggFn.AVG, AttrRef("t", "symbol"))),))
    d = validate(m)
    assert [x.code for x in d] == ["V005"]
    assert d[0].path == "bring[0]"


def test_v005_count_takes_anything():
    m = one_event_model(bring=(SelectItem(AggCall(AggFn.COUNT, AttrRef("t", "symbol"))),))
    assert validate(m) == []


def test_v005_max_on_timestamp_ok():
    m = one_event_model(bring=(SelectItem(AggCall(AggFn.MAX, AttrRef("t", "at"))),))
    assert validate(m) == []


# --- V006 ------------------------------------------------------------------


def test_v006_timer_needs_positive_seconds():
    m = one_event_model(
        targets=(TargetBinding("Trade", alias="t",
                               window=Window(WindowKind.TIMER, seconds=0)),)
    )
    assert codes(m) == ["V006"]


def test_v006_counter_needs_positive_count():
    m = one_event_model(
        targets=(TargetBinding("Trade", alias="t",
                               window=Window(WindowKind.COUNTER, count=0)),)
    )
    assert codes(m) == ["V006"]


def test_v006_keepall_carries_no_parameter():
    m = one_event_model(
        targets=(TargetBinding("Trade", alias="t",
                               window=Window(WindowKind.KEEP_ALL, seconds=5)),)
    )
    assert codes(m) == ["V006"]


# --- V007 ------------------------------------------------------------------


def test_v007_combinator_arity():
    m = pattern_model(pattern=And((EventRef("a"),), repetition=EVERY))
    assert codes(m) == ["V007"]


# --- V008 ------------------------------------------------------------------


def test_v008_guard_needs_positive_seconds():
    m = pattern_model(
        pattern=FollowedBy(
            (EventRef("a"), EventRef("b")),
            guard=PatternGuard(GuardKind.WITH_IN, seconds=0),
            repetition=EVERY,
        )
    )
    assert codes(m) == ["V008"]


def test_v008_withinmax_needs_instances():
    m = pattern_model(
        pattern=FollowedBy(
            (EventRef("a"), EventRef("b")),
            guard=PatternGuard(GuardKind.WITH_IN_MAX, seconds=5, max_instances=0),
            repetition=EVERY,
        )
    )
    assert codes(m) == ["V008"]


# --- V009 ------------------------------------------------------------------


def test_v009_star_with_group_by():
    m = one_event_model(group_by=GroupBySpec((AttrRef("t", "symbol"),)))
    assert codes(m) == ["V009"]


def test_v009_non_key_reference():
    m = one_event_model(
        bring=(
            SelectItem(AttrRef("t", "price")),
            SelectItem(AggCall(AggFn.COUNT)),
        ),
        group_by=GroupBySpec((AttrRef("t", "symbol"),)),
    )
    d = validate(m)
    assert [x.code for x in d] == ["V009"]
    assert d[0].path == "bring[0]"


def test_v009_keys_and_aggregates_are_fine():
    m = one_event_model(
        bring=(
            SelectItem(AttrRef("t", "symbol")),
            SelectItem(AggCall(AggFn.AVG, AttrRef("t", "price"))),
            SelectItem(Literal("tag")),
        ),
        group_by=GroupBySpec((AttrRef("t", "symbol"),)),
    )
    assert validate(m) == []


def test_v009_unqualified_ref_matches_qualified_key():
    m = one_event_model(
        bring=(SelectItem(AttrRef(None, "symbol")),),
        group_by=GroupBySpec((AttrRef("t", "symbol"),)),
    )
    assert validate(m) == []


# --- V010 ------------------------------------------------------------------


def test_v010_compare_string_with_number():
    m = one_event_model(
        condition=Compare(CompareOp.EQ, AttrRef("t", "symbol"), Literal(1))
    )
    d = validate(m)
    assert [x.code for x in d] == ["V010"]
    assert d[0].path == "condition"


def test_v010_arith_on_boolean():
    m = one_event_model(
        condition=Arith(ArithOp.ADD, Literal(200), Literal(True))
    )
    d = validate(m)
    assert [x.code for x in d] == ["V010"]


def test_v010_logical_needs_boolean_children():
    m = one_event_model(
        condition=Logical(
            LogicalOp.AND,
            (
                Compare(CompareOp.GT, AttrRef("t", "price"), Literal(1)),
                Compare(CompareOp.GT, AttrRef("t", "price"), Literal(2)),
            ),
        )
    )
    assert validate(m) == []
    bad = one_event_model(
        condition=Logical(
            LogicalOp.AND,
            (
                Compare(CompareOp.GT, AttrRef("t", "price"), Literal(1)),
                Arith(ArithOp.ADD, Literal(1), Literal(2)),
            ),
        )
    )
    d = validate(bad)
    assert [x.code for x in d] == ["V010"]
    assert d[0].path == "condition.children[1]"


def test_v010_timestamp_compares_with_numeric():
    m = one_event_model(
        condition=Compare(CompareOp.GT, AttrRef("t", "at"), Literal(1000))
    )
    assert validate(m) == []


def test_v010_non_boolean_condition_root():
    m = one_event_model(condition=Arith(ArithOp.ADD, Literal(1), Literal(2)))
    d = validate(m)
    assert [x.code for x in d] == ["V010"]
    assert "boolean" in d[0].message


def test_v010_operand_as_condition_is_flagged_not_crashed():
    # parsed documents can put any operand in a boolean slot
    m = one_event_model(condition=AttrRef("t", "ok"))
    d = validate(m)
    assert [x.code for x in d] == ["V010"]
    assert d[0].path == "condition"

    nested = one_event_model(
        condition=Logical(
            LogicalOp.AND,
            (AttrRef("t", "ok"), Compare(CompareOp.GT, AttrRef("t", "price"), Literal(1))),
        )
    )
    d = validate(nested)
    assert [x.code for x in d] == ["V010"]
    assert d[0].path == "condition.children[0]"


# --- V011 ------------------------------------------------------------------


def test_v011_range_low_above_high():
    m = pattern_model(
        pattern=FollowedBy(
            (EventRef("a"), EventRef("b")),
            repetition=RepetitionSpec(RepetitionKind.RANGE, low=5, high=2),
        )
    )
    assert codes(m) == ["V011"]


def test_v011_every_distinct_needs_keys():
    m = pattern_model(
        pattern=FollowedBy(
            (EventRef("a"), EventRef("b")),
            repetition=RepetitionSpec(RepetitionKind.EVERY_DISTINCT),
        )
    )
    assert codes(m) == ["V011"]


# --- V012 ------------------------------------------------------------------


def test_v012_duplicate_select_alias():
    m = one_event_model(
        bring=(
            SelectItem(AttrRef("t", "price"), output_alias="p"),
            SelectItem(AttrRef("t", "symbol"), output_alias="p"),
        )
    )
    d = validate(m)
    assert [x.code for x in d] == ["V012"]
    assert d[0].path == "bring[1]"


# --- ordering, determinism, typecheck --------------------------------------


def test_findings_sorted_by_path_then_code():
    m = one_event_model(
        targets=(),
        condition=Compare(CompareOp.GT, AttrRef("t", "price"), Literal(1)),
    )
    d = validate(m)
    assert [(x.code, x.path) for x in d] == sorted((x.code, x.path) for x in d) or [
        x.path for x in d
    ] == sorted(x.path for x in d)
    assert validate(m) == d  # deterministic


def test_diagnostics_carry_severity_and_message():
    (d,) = validate(one_event_model(targets=()))
    assert d == Diagnostic("V001", "error", "targets", d.message)
    assert d.message


def test_typecheck_returns_kind():
    m = one_event_model()
    expr = Compare(CompareOp.GT, AttrRef("t", "price"), Literal(1))
    assert typecheck(expr, m) is ExprKind.BOOLEAN


def test_typecheck_returns_findings():
    m = one_event_model()
    expr = Compare(CompareOp.GT, AttrRef("t", "nope"), Literal(1))
    result = typecheck(expr, m)
    assert isinstance(result, list)
    assert result[0].code == "V004"
