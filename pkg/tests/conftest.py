import json
from pathlib import Path

import pytest

from flowsteps.pnml import parse_pnml

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"


def fixture_text(name):
    return (FIXTURES / name).read_text(encoding="utf-8")


@pytest.fixture(scope="session")
def payment_net():
    return parse_pnml(fixture_text("payment.pnml"))


@pytest.fixture(scope="session")
def linear_fixture_net():
    return parse_pnml(fixture_text("linear.pnml"))


@pytest.fixture()
def payment_manifest():
    return json.loads(fixture_text("payment.bindings.json"))


@pytest.fixture()
def payment_sut():
    return json.loads(fixture_text("payment.sut.json"))


@pytest.fixture()
def broken_sut():
    return json.loads(fixture_text("payment-broken.sut.json"))


@pytest.fixture()
def budget_feature_text():
    return fixture_text("budget.feature")


@pytest.fixture()
def budget_sut():
    return json.loads(fixture_text("budget.sut.json"))
