"""Acceptance suite: one test per release criterion, each printing a verdict.

Run with `pytest tests/test_acceptance.py -v -s` to see the PASS lines.
"""

import itertools
import json
import random
import shutil
import time

import pytest

from flowsteps.cli import main
from flowsteps.gwt import generate_step_skeletons, parse_feature, render_feature
from flowsteps.mapping import (
    feature_to_pn,
    pn_to_scenarios,
    scenarios_to_feature,
)
from flowsteps.petri import enabled_transitions, fire, reachable_markings, Marking
from flowsteps.pnml import parse_pnml
from flowsteps.runtime import StepStatus
from flowsteps.session import run_all_scenarios

from conftest import FIXTURES, fixture_text
from netgen import label_isomorphic, random_roundtrip_net
from reference_tokengame import (
    all_complete_sequences,
    build_relations,
    canonical_order,
    ref_enabled,
    ref_fire,
)

EXPECTED_IDENTIFIERS = [
    "given_i_go_to_the_new_bid_page",
    "given_i_fill_in_client_with_my_client_name",
    "given_i_fill_in_product_with_xxxxxxx",
    "given_i_fill_in_quantity_with_1",
    "when_i_press_add",
    "then_i_should_be_on_the_budget_list_page",
    "then_i_should_see_test_product_xxxxxx",
]


def verdict(name):
    print(f"\nACCEPTANCE PASS: {name}")


class TestAcceptance:
    def test_code1_reproduction(self, capsys):
        started = time.monotonic()
        ast = parse_feature(fixture_text("budget.feature"))
        skeletons = generate_step_skeletons(ast)
        assert len(skeletons) == 7
        assert [s.identifier for s in skeletons] == EXPECTED_IDENTIFIERS

        assert main(["gen-steps", str(FIXTURES / "budget.feature")]) == 0
        first = capsys.readouterr().out
        assert main(["gen-steps", str(FIXTURES / "budget.feature")]) == 0
        second = capsys.readouterr().out
        assert first.encode() == second.encode()
        for identifier in EXPECTED_IDENTIFIERS:
            assert f"def {identifier}(step):" in first
        elapsed = time.monotonic() - started
        assert elapsed < 1.0, f"took {elapsed:.3f}s"
        verdict(f"Code 1 reproduction ({elapsed * 1000:.0f} ms)")

    def test_mapping_fidelity(self, payment_net):
        started = time.monotonic()
        traces = pn_to_scenarios(payment_net)
        assert len(traces) == 2
        credit_card = traces[0]
        assert credit_card.transitions_fired[0] == "t_choose_cc"
        assert len(credit_card.parallel_groups) == 1
        assert traces[1].parallel_groups == ()

        ast = scenarios_to_feature(traces, payment_net, name="Process a payment")
        assert parse_feature(render_feature(ast)) == ast

        # oracle: exhaustive interleavings, collapsed by commuting
        # independent adjacent firings into canonical order
        sequences = all_complete_sequences(payment_net, "p_start", "p_end")
        complete = [seq for seq, ok in sequences if ok]
        collapsed = {canonical_order(payment_net, "p_start", s) for s in complete}
        ours = {
            canonical_order(payment_net, "p_start", t.transitions_fired)
            for t in traces
        }
        assert ours == collapsed
        assert len(traces) == len(collapsed)
        elapsed = time.monotonic() - started
        assert elapsed < 1.0, f"took {elapsed:.3f}s"
        verdict(f"Mapping fidelity ({elapsed * 1000:.0f} ms)")

    def test_round_trip_100_random_nets(self):
        started = time.monotonic()
        rng = random.Random(20260809)
        for i in range(100):
            net = random_roundtrip_net(rng, max_places=8)
            assert len(net.places) <= 8
            rebuilt = feature_to_pn(
                scenarios_to_feature(pn_to_scenarios(net), net, name="generated")
            )
            assert label_isomorphic(net, rebuilt), f"net {i} not isomorphic"
        elapsed = time.monotonic() - started
        assert elapsed < 10.0, f"took {elapsed:.3f}s"
        verdict(f"Round trip, 100 random nets ({elapsed:.2f} s)")

    def test_token_game_oracle(self):
        discrepancies = 0
        checked = 0
        for pnml_path in sorted(FIXTURES.glob("*.pnml")):
            net = parse_pnml(pnml_path.read_text(encoding="utf-8"))
            result = reachable_markings(net, net.initial_marking, 512)
            assert not result.bound_exceeded
            pre, post = build_relations(net)
            for marking in result.markings:
                tokens = marking.to_dict()
                ref = sorted(
                    t.id for t in net.transitions if ref_enabled(pre, tokens, t.id)
                )
                ours = enabled_transitions(net, marking)
                if ours != ref:
                    discrepancies += 1
                for tid in ours:
                    if fire(net, marking, tid).to_dict() != ref_fire(pre, post, tokens, tid):
                        discrepancies += 1
                checked += 1
        assert checked > 0
        assert discrepancies == 0
        verdict(f"Token-game oracle ({checked} markings, 0 discrepancies)")

    def test_figure_10_reproduction(self, payment_net, payment_manifest, capsys):
        broken = json.loads(fixture_text("payment-broken.sut.json"))
        report = run_all_scenarios(payment_net, payment_manifest, broken)
        assert report.summary["failed"] == 1
        assert report.summary["passed"] == 1
        (failed_run,) = [
            r for r in report.scenarios if r.status is StepStatus.FAILED
        ]
        failing_results = [
            result
            for firing in failed_run.reports
            for result in firing.step_results
            if result.status is StepStatus.FAILED
        ]
        assert len(failing_results) == 1
        assert failing_results[0].step_text == 'I should see "9 sales awaiting to be sent"'
        assert "9 sales awaiting to be sent" in failing_results[0].message

        good = json.loads(fixture_text("payment.sut.json"))
        assert run_all_scenarios(payment_net, payment_manifest, good).summary == {
            "passed": 2, "failed": 0, "pending": 0, "ambiguous": 0,
        }

        args = ["run", str(FIXTURES / "payment.pnml"),
                "--bindings", str(FIXTURES / "payment.bindings.json")]
        broken_code = main(args + ["--sut", str(FIXTURES / "payment-broken.sut.json")])
        good_code = main(args + ["--sut", str(FIXTURES / "payment.sut.json")])
        capsys.readouterr()
        assert (broken_code, good_code) == (1, 0)
        verdict("Figure 10 reproduction (broken sut: exit 1, restored: exit 0)")

    def test_pending_semantics(self, payment_net, payment_manifest, payment_sut,
                               tmp_path, capsys):
        stripped = dict(payment_manifest)
        stripped["bindings"] = []  # remove the one custom binding
        report = run_all_scenarios(payment_net, stripped, payment_sut)
        assert report.summary["failed"] == 0
        assert report.summary["pending"] == 1
        for run in report.scenarios:
            for firing in run.reports:
                expected = (
                    StepStatus.PENDING
                    if firing.transition == "t_send_email"
                    else StepStatus.PASSED
                )
                assert firing.status is expected, firing.transition

        manifest_file = tmp_path / "stripped.bindings.json"
        manifest_file.write_text(json.dumps(stripped))
        code = main([
            "run", str(FIXTURES / "payment.pnml"),
            "--bindings", str(manifest_file),
            "--sut", str(FIXTURES / "payment.sut.json"),
        ])
        capsys.readouterr()
        assert code == 2
        verdict("Pending semantics (unbound firings pending, exit 2)")

    def test_interactive_blocking_over_http(self, tmp_path):
        import asyncio

        import httpx

        from flowsteps.server import ServerConfig, create_app

        for name in ("payment.pnml", "payment.bindings.json",
                     "payment.sut.json", "payment-broken.sut.json"):
            shutil.copy(FIXTURES / name, tmp_path / name)
        app = create_app(ServerConfig(fixtures_dir=str(tmp_path)))
        prefix = ["t_choose_cc", "t_fill_cc", "t_confirm"]

        async def go():
            transport = httpx.ASGITransport(app=app)
            async with httpx.AsyncClient(
                transport=transport, base_url="http://test"
            ) as client:
                created = await client.post("/sessions", json={
                    "model": "payment.pnml",
                    "bindings": "payment.bindings.json",
                    "sut": "payment-broken.sut.json",
                })
                sid = created.json()["session_id"]
                for tid in prefix:
                    response = await client.post(
                        f"/sessions/{sid}/fire", json={"transition": tid}
                    )
                    assert response.json()["advanced"] is True

                before = (await client.get(f"/sessions/{sid}/state")).json()
                blocked = await client.post(
                    f"/sessions/{sid}/fire", json={"transition": "t_check_inventory"}
                )
                assert blocked.json()["advanced"] is False
                after = (await client.get(f"/sessions/{sid}/state")).json()
                assert after["marking"] == before["marking"]

                # swap in the corrected fixture on disk, reset, replay
                shutil.copy(tmp_path / "payment.sut.json",
                            tmp_path / "payment-broken.sut.json")
                await client.post(f"/sessions/{sid}/reset")
                for tid in prefix:
                    await client.post(f"/sessions/{sid}/fire", json={"transition": tid})
                retried = await client.post(
                    f"/sessions/{sid}/fire", json={"transition": "t_check_inventory"}
                )
                assert retried.json()["advanced"] is True

        asyncio.run(asyncio.wait_for(go(), timeout=30))
        verdict("Interactive blocking over HTTP (blocked, fixed, advanced)")

    def test_diamond_property(self, payment_net, payment_manifest, payment_sut):
        from flowsteps.session import create_session, fire_interactive

        prefix = ["t_choose_cc", "t_fill_cc", "t_confirm"]
        branches = ["t_check_inventory", "t_send_email"]
        outcomes = []
        for order in itertools.permutations(branches):
            session = create_session(payment_net, payment_manifest, payment_sut)
            for tid in prefix + list(order):
                report = fire_interactive(session, tid)
                assert report.advanced, tid
            statuses = sorted(
                result.status.value
                for firing in session.log
                for result in firing.step_results
            )
            outcomes.append((session.marking, statuses))
        assert outcomes[0][0] == outcomes[1][0], "final markings differ"
        assert outcomes[0][1] == outcomes[1][1], "step-status multisets differ"
        assert outcomes[0][0] == Marking({"p_email_done": 1, "p_inventory_done": 1})
        verdict("Diamond property (both branch orders agree)")
