"""The release gate: one test per top-level guarantee, each printing a
single PASS line with its measured runtime.

Budgets are asserted, not advisory; a slow pass is a fail.
"""

from __future__ import annotations

import pathlib
import time

from cepkit.cli import cli_main
from cepkit.codegen import epl_tokens, generate_epl
from cepkit.engine import oracle, run_stream
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
    GroupBySpec,
    GuardKind,
    Literal,
    PatternGuard,
    RepetitionKind,
    RepetitionSpec,
    RuleModel,
    SelectItem,
    STAR,
    TargetBinding,
    Window,
)
from cepkit.serialization import parse_model, serialize_model
from cepkit.model import canonicalize
from cepkit.validation import validate

from conftest import GOLDEN_EPL, GOLDEN_MODELS
from genmodels import random_case
from test_engine_patterns import ABSENCE_STREAMS, GUARD_STREAMS, pattern_model, ABSENCE, SEQ_GUARD
from test_oracle import rows_equivalent

FIXTURES = pathlib.Path(__file__).parent / "fixtures"


class _Clock:
    def __init__(self, budget_s: float):
        self.budget = budget_s
        self.started = time.perf_counter()

    def done(self, label: str) -> None:
        elapsed = time.perf_counter() - self.started
        assert elapsed < self.budget, f"{label}: {elapsed:.2f}s over {self.budget}s budget"
        print(f"PASS {label} ({elapsed:.2f}s)")


def test_primary_golden_codegen():
    clock = _Clock(1.0)
    for name, build in GOLDEN_MODELS.items():
        generated = generate_epl(build())
        assert epl_tokens(generated.canonical_text) == epl_tokens(GOLDEN_EPL[name]), name
    clock.done("golden codegen: four reference queries token-exact")


def _single_code_fixtures() -> dict[str, RuleModel]:
    trade = EventType(
        "Trade",
        (
            Attribute("price", AttributeKind.FLOAT),
            Attribute("symbol", AttributeKind.STRING),
        ),
    )

    def base(**overrides) -> RuleModel:
        fields = dict(
            name="F",
            events=(trade,),
            targets=(TargetBinding("Trade", alias="t", window=Window.timer(10)),),
            bring=(SelectItem(AttrRef("t", "price"), output_alias="p"),),
        )
        fields.update(overrides)
        return RuleModel(**fields)

    pair = (EventType("A", ()), EventType("B", ()))
    ab = (TargetBinding("A", alias="a"), TargetBinding("B", alias="b"))

    def pattern(p) -> RuleModel:
        return RuleModel(name="F", events=pair, targets=ab, pattern=p,
                         bring=(SelectItem(STAR),))

    return {
        "V001": base(targets=(), bring=(SelectItem(AggCall(AggFn.COUNT),
                                                   output_alias="n"),)),
        "V002": base(events=(trade, trade),
                     bring=(SelectItem(AggCall(AggFn.COUNT), output_alias="n"),)),
        "V003": base(targets=(TargetBinding("Ghost", alias="t"),),
                     bring=(SelectItem(AggCall(AggFn.COUNT), output_alias="n"),)),
        "V004": base(condition=Compare(CompareOp.GT, AttrRef("t", "nope"), Literal(1))),
        "V005": base(bring=(SelectItem(AggCall(AggFn.AVG, AttrRef("t", "symbol")),
                                       output_alias="m"),)),
        "V006": base(targets=(TargetBinding("Trade", alias="t",
                                            window=Window.timer(0)),)),
        "V007": pattern(And((EventRef("a"),), repetition=EVERY)),
        "V008": pattern(And((EventRef("a"), EventRef("b")),
                            guard=PatternGuard(GuardKind.WITH_IN, -1),
                            repetition=EVERY)),
        "V009": base(bring=(SelectItem(STAR),),
                     group_by=GroupBySpec((AttrRef("t", "symbol"),))),
        "V010": base(condition=Compare(CompareOp.EQ, AttrRef("t", "symbol"),
                                       Literal(1))),
        "V011": pattern(And((EventRef("a"), EventRef("b")),
                            repetition=RepetitionSpec(RepetitionKind.RANGE,
                                                      low=3, high=1))),
        "V012": base(bring=(SelectItem(AttrRef("t", "price"), output_alias="x"),
                            SelectItem(AttrRef("t", "symbol"), output_alias="x"))),
    }


def test_primary_validator_defect_corpus():
    clock = _Clock(1.0)
    fixtures = _single_code_fixtures()
    assert len(fixtures) == 12
    for code, model in fixtures.items():
        found = validate(model)
        assert [d.code for d in found] == [code], (code, found)
    for name, build in GOLDEN_MODELS.items():
        assert validate(build()) == [], name
    clock.done("validator: 12 single-code fixtures, golden models clean")


def test_primary_oracle_equivalence():
    clock = _Clock(10.0)
    for seed in range(100):
        model, events = random_case(seed)
        assert len(events) <= 200
        assert len(model.events) <= 4
        got = run_stream(model, events)
        want = oracle(model, events)
        assert rows_equivalent(got, want, rel=1e-9), seed
    clock.done("engine vs reference: 100 random cases equal")


def test_primary_pattern_semantics():
    clock = _Clock(2.0)
    assert len(GUARD_STREAMS) >= 10
    for name, (events, expected) in GUARD_STREAMS.items():
        model = pattern_model(SEQ_GUARD)
        got = run_stream(model, events)
        assert got == oracle(model, events), name
        assert [r.emitted_at for r in got] == [t for t, _, _ in expected], name
    for name, (events, expected) in ABSENCE_STREAMS.items():
        model = pattern_model(ABSENCE)
        got = run_stream(model, events)
        assert got == oracle(model, events), name
        assert [r.emitted_at for r in got] == [t for t, _, _ in expected], name
    clock.done("pattern semantics: guarded-sequence and absence suites match reference")


def test_primary_determinism_and_roundtrip():
    clock = _Clock(10.0)
    for build in GOLDEN_MODELS.values():
        model = build()
        assert len({generate_epl(model).text for _ in range(5)}) == 1
    for seed in range(40):
        model, _ = random_case(seed)
        canonical = canonicalize(model)
        back, _ = parse_model(serialize_model(canonical))
        assert back == canonical, seed
        assert len({serialize_model(canonical) for _ in range(5)}) == 1, seed
        assert len({generate_epl(model).text for _ in range(5)}) == 1, seed
    clock.done("determinism: canonical roundtrip identity, generation byte-stable")


def test_primary_cli_exit_codes(tmp_path):
    clock = _Clock(10.0)
    fx = lambda name: str(FIXTURES / name)
    scenarios = [
        (0, ["validate", fx("withdrawal.ceprule.json")]),
        (1, ["validate", fx("broken.ceprule.json")]),
        (2, ["validate", str(tmp_path / "absent.ceprule.json")]),
        (3, ["gen", "--target", "drl", fx("sequence.ceprule.json")]),
        (4, ["run", fx("avg.ceprule.json"),
             "--events", fx("ticks_out_of_order.ndjson"),
             "--out", str(tmp_path / "rows.ndjson")]),
    ]
    for expected, argv in scenarios:
        assert cli_main(argv) == expected, argv
    clock.done("cli: exit codes 0/1/2/3/4 each observed")
