from __future__ import annotations

from dataclasses import replace

import pytest

from cepkit.errors import (
    AliasCollisionError,
    InvalidIdentifierError,
    UnknownAliasError,
    UnknownAttributeError,
)
from cepkit.model import (
    And,
    Attribute,
    AttributeKind,
    AttrRef,
    Compare,
    CompareOp,
    EventRef,
    EventType,
    EVERY,
    FollowedBy,
    Literal,
    Not,
    PatternGuard,
    GuardKind,
    RuleModel,
    Scope,
    SelectItem,
    STAR,
    Star,
    TargetBinding,
    Window,
    WindowKind,
    canonicalize,
    effective_alias,
    is_identifier,
    new_model,
    normal_number,
    pattern_refs,
    resolve,
)


def test_is_identifier():
    assert is_identifier("MyEvent")
    assert is_identifier("_x9")
    assert not is_identifier("9x")
    assert not is_identifier("my-event")
    assert not is_identifier("")


def test_new_model_rejects_bad_name():
    with pytest.raises(InvalidIdentifierError):
        new_model("not a name")


def test_new_model_defaults():
    m = new_model("Empty")
    assert m.events == ()
    assert m.targets == ()
    assert m.pattern is None
    assert m.bring == ()


def test_literal_kind_bool_before_int():
    # bool is an int subclass; True must not classify as integer
    assert Literal(True).kind is AttributeKind.BOOLEAN
    assert Literal(1).kind is AttributeKind.INTEGER
    assert Literal(1.5).kind is AttributeKind.FLOAT
    assert Literal("x").kind is AttributeKind.STRING


def test_sequences_become_tuples():
    e = EventType("E", [Attribute("a", AttributeKind.INTEGER)])
    assert isinstance(e.attributes, tuple)
    m = RuleModel(
        name="R",
        events=[e],
        targets=[TargetBinding("E")],
        bring=[SelectItem(STAR)],
    )
    assert isinstance(m.events, tuple)
    assert isinstance(m.targets, tuple)
    assert isinstance(m.bring, tuple)


def test_window_constructors():
    assert Window.timer(10) == Window(WindowKind.TIMER, seconds=10)
    assert Window.counter(5) == Window(WindowKind.COUNTER, count=5)
    assert Window.keep_all() == Window(WindowKind.KEEP_ALL)


def test_effective_alias():
    assert effective_alias(TargetBinding("MyEvent")) == "myevent"
    assert effective_alias(TargetBinding("MyEvent", alias="m")) == "m"


# ---------------------------------------------------------------------------
# Scope
# ---------------------------------------------------------------------------


def _two_target_model() -> RuleModel:
    return RuleModel(
        name="Join",
        events=(
            EventType("A", (Attribute("x", AttributeKind.INTEGER),
                            Attribute("shared", AttributeKind.INTEGER))),
            EventType("B", (Attribute("y", AttributeKind.INTEGER),
                            Attribute("shared", AttributeKind.INTEGER))),
        ),
        targets=(TargetBinding("A", alias="a"), TargetBinding("B", alias="b")),
        bring=(SelectItem(STAR),),
    )


def test_scope_qualified():
    m = _two_target_model()
    assert resolve(m, "a", "x").kind is AttributeKind.INTEGER
    with pytest.raises(UnknownAliasError):
        resolve(m, "zz", "x")
    with pytest.raises(UnknownAttributeError):
        resolve(m, "a", "y")


def test_scope_unqualified_unique_owner():
    m = _two_target_model()
    binding, attribute = Scope(m).resolve(AttrRef(None, "y"))
    assert binding.alias == "b"
    assert attribute.name == "y"


def test_scope_unqualified_ambiguous():
    m = _two_target_model()
    with pytest.raises(UnknownAttributeError):
        Scope(m).resolve(AttrRef(None, "shared"))


def test_scope_skips_undeclared_target_events():
    m = replace(_two_target_model(), targets=(TargetBinding("Ghost", alias="g"),))
    assert Scope(m).bindings == {}


# ---------------------------------------------------------------------------
# pattern_refs
# ---------------------------------------------------------------------------


def test_pattern_refs_preorder():
    a, b, c = EventRef("a"), EventRef("b", tag="bb"), EventRef("c")
    tree = FollowedBy((a, And((b, Not(c)))))
    assert [r.capture for r in pattern_refs(tree)] == ["a", "bb", "c"]


# ---------------------------------------------------------------------------
# Canonicalization
# ---------------------------------------------------------------------------


def test_normal_number():
    assert normal_number(10.0) == 10
    assert isinstance(normal_number(10.0), int)
    assert normal_number(1.5) == 1.5
    assert normal_number(3) == 3
    assert normal_number(None) is None


def test_canonicalize_fills_aliases_and_normalizes_numbers():
    m = RuleModel(
        name="R",
        events=(EventType("MyEvent", (Attribute("v", AttributeKind.FLOAT),)),),
        targets=(TargetBinding("MyEvent", window=Window(WindowKind.TIMER, seconds=10.0)),),
        bring=(SelectItem(Literal(200.0)),),
    )
    c = canonicalize(m)
    assert c.targets[0].alias == "myevent"
    assert c.targets[0].window.seconds == 10
    assert isinstance(c.targets[0].window.seconds, int)
    assert c.bring[0].expr == Literal(200)


def test_canonicalize_idempotent(fraud_join):
    once = canonicalize(fraud_join)
    assert canonicalize(once) == once


def test_canonicalize_guard_seconds():
    m = RuleModel(
        name="R",
        events=(EventType("A", ()), EventType("B", ())),
        targets=(TargetBinding("A", alias="a"), TargetBinding("B", alias="b")),
        pattern=FollowedBy(
            (EventRef("a"), EventRef("b")),
            guard=PatternGuard(GuardKind.WITH_IN, seconds=5.0),
            repetition=EVERY,
        ),
        bring=(SelectItem(STAR),),
    )
    c = canonicalize(m)
    assert c.pattern.guard.seconds == 5
    assert isinstance(c.pattern.guard.seconds, int)


def test_canonicalize_rejects_alias_collision():
    m = RuleModel(
        name="R",
        events=(EventType("MyEvent", ()),),
        targets=(TargetBinding("MyEvent"), TargetBinding("MyEvent")),
        bring=(SelectItem(STAR),),
    )
    with pytest.raises(AliasCollisionError, match="targets\\[0\\] and targets\\[1\\]"):
        canonicalize(m)


def test_canonicalize_preserves_golden_models(keepall, withdrawal_filter):
    # explicit aliases absent on purpose; canonicalization must not be a
    # prerequisite for generation, and must leave the rest untouched
    c = canonicalize(withdrawal_filter)
    assert c.condition == withdrawal_filter.condition
    assert c.targets[0].alias == "withdrawal"
    assert canonicalize(keepall).bring == keepall.bring


def test_star_is_singleton_marker():
    assert isinstance(STAR, Star)
    assert SelectItem(STAR).output_alias is None
