"""Shared fixtures: the four reference rules exercised across suites.

These mirror well-known textbook CEP queries (keep-all dump, two-stream
fraud join, filtered sliding window, rolling average) and double as the
acceptance targets, so their shape is frozen; edit with care.
"""

from __future__ import annotations

import pytest

from cepkit.model import (
    AggCall,
    AggFn,
    Attribute,
    AttributeKind,
    AttrRef,
    Compare,
    CompareOp,
    EventType,
    Literal,
    RuleModel,
    ScalarFn,
    ScalarFnName,
    SelectItem,
    STAR,
    TargetBinding,
    Window,
)

# Expected single-line queries, compared token-wise (keyword case and
# whitespace insensitive) by the codegen and acceptance suites.
GOLDEN_EPL = {
    "keepall": "select * from MyEvent.win:keepall()",
    "fraud_join": (
        "select fraud.accountNumber as accntNum, fraud.warning as warn, "
        "withdraw.amount as amount, "
        "MAX(fraud.timestamp, withdraw.timestamp) as timestamp, "
        "'withdrawlFraud' as desc "
        "from FraudWarningEvent. win:keepall() as fraud, "
        "WithdrawalEvent. win:keepall() as withdraw "
        "where fraud.accountNumber = withdraw.accountNumber"
    ),
    "withdrawal_filter": "select * from Withdrawal.win:time(10 sec ) where amount >= 200",
    "avg_price": "select avg(price) from stockTickEvent.win:time(30 sec)",
}


def keepall_model() -> RuleModel:
    return RuleModel(
        name="KeepAllMyEvents",
        events=(EventType("MyEvent", (Attribute("value", AttributeKind.INTEGER),)),),
        targets=(TargetBinding("MyEvent", window=Window.keep_all()),),
        bring=(SelectItem(STAR),),
    )


def fraud_join_model() -> RuleModel:
    ts = Attribute("timestamp", AttributeKind.TIMESTAMP)
    return RuleModel(
        name="WithdrawalFraud",
        events=(
            EventType(
                "FraudWarningEvent",
                (
                    Attribute("accountNumber", AttributeKind.STRING),
                    Attribute("warning", AttributeKind.STRING),
                    ts,
                ),
            ),
            EventType(
                "WithdrawalEvent",
                (
                    Attribute("accountNumber", AttributeKind.STRING),
                    Attribute("amount", AttributeKind.FLOAT),
                    ts,
                ),
            ),
        ),
        targets=(
            TargetBinding("FraudWarningEvent", alias="fraud", window=Window.keep_all()),
            TargetBinding("WithdrawalEvent", alias="withdraw", window=Window.keep_all()),
        ),
        bring=(
            SelectItem(AttrRef("fraud", "accountNumber"), output_alias="accntNum"),
            SelectItem(AttrRef("fraud", "warning"), output_alias="warn"),
            SelectItem(AttrRef("withdraw", "amount"), output_alias="amount"),
            SelectItem(
                ScalarFn(
                    ScalarFnName.MAX2,
                    (AttrRef("fraud", "timestamp"), AttrRef("withdraw", "timestamp")),
                ),
                output_alias="timestamp",
            ),
            SelectItem(Literal("withdrawlFraud"), output_alias="desc"),
        ),
        condition=Compare(
            CompareOp.EQ,
            AttrRef("fraud", "accountNumber"),
            AttrRef("withdraw", "accountNumber"),
        ),
    )


def withdrawal_filter_model() -> RuleModel:
    return RuleModel(
        name="LargeWithdrawals",
        events=(EventType("Withdrawal", (Attribute("amount", AttributeKind.FLOAT),)),),
        targets=(TargetBinding("Withdrawal", window=Window.timer(10)),),
        bring=(SelectItem(STAR),),
        condition=Compare(CompareOp.GE, AttrRef(None, "amount"), Literal(200)),
    )


def avg_price_model() -> RuleModel:
    return RuleModel(
        name="RollingAvgPrice",
        events=(EventType("stockTickEvent", (Attribute("price", AttributeKind.FLOAT),)),),
        targets=(TargetBinding("stockTickEvent", window=Window.timer(30)),),
        bring=(SelectItem(AggCall(AggFn.AVG, AttrRef(None, "price"))),),
    )


GOLDEN_MODELS = {
    "keepall": keepall_model,
    "fraud_join": fraud_join_model,
    "withdrawal_filter": withdrawal_filter_model,
    "avg_price": avg_price_model,
}


@pytest.fixture
def keepall():
    return keepall_model()


@pytest.fixture
def fraud_join():
    return fraud_join_model()


@pytest.fixture
def withdrawal_filter():
    return withdrawal_filter_model()


@pytest.fixture
def avg_price():
    return avg_price_model()
