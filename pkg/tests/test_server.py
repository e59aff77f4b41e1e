import asyncio
import json
import shutil

import httpx
import pytest

from flowsteps.server import ServerConfig, create_app

from conftest import FIXTURES


@pytest.fixture()
def fixtures_dir(tmp_path):
    for name in (
        "payment.pnml",
        "payment.bindings.json",
        "payment.sut.json",
        "payment-broken.sut.json",
        "linear.pnml",
    ):
        shutil.copy(FIXTURES / name, tmp_path / name)
    return tmp_path


@pytest.fixture()
def app(fixtures_dir):
    return create_app(ServerConfig(fixtures_dir=str(fixtures_dir)))


def run(coro):
    return asyncio.run(asyncio.wait_for(coro, timeout=30))


def client_for(app):
    transport = httpx.ASGITransport(app=app)
    return httpx.AsyncClient(transport=transport, base_url="http://test")


CREATE_BODY = {
    "model": "payment.pnml",
    "bindings": "payment.bindings.json",
    "sut": "payment.sut.json",
}


async def create_session(client, body=None):
    response = await client.post("/sessions", json=body or CREATE_BODY)
    assert response.status_code == 201, response.text
    return response.json()


class TestModels:
    def test_listing(self, app):
        async def go():
            async with client_for(app) as client:
                response = await client.get("/models")
                assert response.status_code == 200
                body = response.json()
                assert "payment.pnml" in body["models"]
                assert "payment.bindings.json" in body["bindings"]
                assert "payment.sut.json" in body["suts"]
                assert "payment-broken.sut.json" in body["suts"]

        run(go())

    def test_gwt_endpoint(self, app):
        async def go():
            async with client_for(app) as client:
                response = await client.get("/models/payment.pnml/gwt")
                assert response.status_code == 200
                feature = response.json()["feature"]
                assert "Path 1: Choose Credit Card" in feature
                assert "in parallel: Inventory check pending" in feature

        run(go())

    def test_net_structure_endpoint(self, app):
        async def go():
            async with client_for(app) as client:
                response = await client.get("/models/payment.pnml/net")
                assert response.status_code == 200
                net = response.json()
                assert len(net["places"]) == 10
                assert len(net["transitions"]) == 9
                assert len(net["arcs"]) == 20
                assert net["initial_marking"] == {"p_start": 1}
                kinds = {c["kind"] for c in net["constructs"]}
                assert {"OrSplit", "AndSplit", "AndJoin", "OrJoin"} <= kinds

        run(go())

    def test_unknown_model_404(self, app):
        async def go():
            async with client_for(app) as client:
                response = await client.get("/models/ghost.pnml/gwt")
                assert response.status_code == 404
                assert response.json()["error"]["code"] == "not_found"

        run(go())

    def test_path_traversal_rejected(self, app):
        async def go():
            async with client_for(app) as client:
                response = await client.post(
                    "/sessions", json=dict(CREATE_BODY, sut="../secrets.sut.json")
                )
                assert response.status_code == 400

        run(go())


class TestSessions:
    def test_create_returns_handle_and_state(self, app):
        async def go():
            async with client_for(app) as client:
                created = await create_session(client)
                assert created["session_id"]
                state = created["state"]
                assert state["marking"] == {"p_start": 1}
                enabled = state["enabled"]
                assert [e["id"] for e in enabled] == ["t_choose_cc", "t_choose_delivery"]
                assert all(e["or_alternative"] for e in enabled)
                assert state["log_length"] == 0

        run(go())

    def test_state_is_stable_between_reads(self, app):
        async def go():
            async with client_for(app) as client:
                created = await create_session(client)
                sid = created["session_id"]
                first = (await client.get(f"/sessions/{sid}/state")).json()
                second = (await client.get(f"/sessions/{sid}/state")).json()
                assert first == second

        run(go())

    def test_fire_advances_and_reports(self, app):
        async def go():
            async with client_for(app) as client:
                sid = (await create_session(client))["session_id"]
                response = await client.post(
                    f"/sessions/{sid}/fire", json={"transition": "t_choose_cc"}
                )
                assert response.status_code == 200
                report = response.json()
                assert report["advanced"] is True
                assert report["gwt"]["when"] == "Choose Credit Card"
                assert report["marking_after"] == {"p_cc_form": 1}
                state = (await client.get(f"/sessions/{sid}/state")).json()
                assert state["marking"] == {"p_cc_form": 1}
                assert state["log_length"] == 1

        run(go())

    def test_fire_disabled_conflicts_and_keeps_state(self, app):
        async def go():
            async with client_for(app) as client:
                sid = (await create_session(client))["session_id"]
                response = await client.post(
                    f"/sessions/{sid}/fire", json={"transition": "t_close"}
                )
                assert response.status_code == 409
                assert response.json()["error"]["code"] == "transition_not_enabled"
                state = (await client.get(f"/sessions/{sid}/state")).json()
                assert state["marking"] == {"p_start": 1}
                assert state["log_length"] == 0

        run(go())

    def test_unknown_session_404(self, app):
        async def go():
            async with client_for(app) as client:
                response = await client.get("/sessions/ghost/state")
                assert response.status_code == 404

        run(go())

    def test_session_limit_429(self, fixtures_dir):
        app = create_app(ServerConfig(fixtures_dir=str(fixtures_dir), max_sessions=2))

        async def go():
            async with client_for(app) as client:
                await create_session(client)
                await create_session(client)
                response = await client.post("/sessions", json=CREATE_BODY)
                assert response.status_code == 429
                assert response.json()["error"]["code"] == "session_limit"

        run(go())

    def test_delete_frees_slot(self, fixtures_dir):
        app = create_app(ServerConfig(fixtures_dir=str(fixtures_dir), max_sessions=1))

        async def go():
            async with client_for(app) as client:
                sid = (await create_session(client))["session_id"]
                response = await client.delete(f"/sessions/{sid}")
                assert response.status_code == 200
                assert response.json() == {"deleted": True}
                assert (await client.get(f"/sessions/{sid}/state")).status_code == 404
                await create_session(client)

        run(go())

    def test_reset_restores_initial_state(self, app):
        async def go():
            async with client_for(app) as client:
                sid = (await create_session(client))["session_id"]
                await client.post(f"/sessions/{sid}/fire",
                                  json={"transition": "t_choose_cc"})
                response = await client.post(f"/sessions/{sid}/reset")
                assert response.status_code == 200
                state = response.json()["state"]
                assert state["marking"] == {"p_start": 1}
                assert state["log_length"] == 0

        run(go())


class TestInteractiveBlocking:
    def test_failure_blocks_until_fixture_fixed(self, fixtures_dir):
        app = create_app(ServerConfig(fixtures_dir=str(fixtures_dir)))
        prefix = ["t_choose_cc", "t_fill_cc", "t_confirm"]

        async def go():
            async with client_for(app) as client:
                body = dict(CREATE_BODY, sut="payment-broken.sut.json")
                sid = (await create_session(client, body))["session_id"]
                for tid in prefix:
                    report = (
                        await client.post(f"/sessions/{sid}/fire",
                                          json={"transition": tid})
                    ).json()
                    assert report["advanced"], tid
                state_before = (await client.get(f"/sessions/{sid}/state")).json()

                report = (
                    await client.post(f"/sessions/{sid}/fire",
                                      json={"transition": "t_check_inventory"})
                ).json()
                assert report["advanced"] is False
                state_after = (await client.get(f"/sessions/{sid}/state")).json()
                assert state_after["marking"] == state_before["marking"]

                # correct the system under test on disk, then reset and replay
                shutil.copy(fixtures_dir / "payment.sut.json",
                            fixtures_dir / "payment-broken.sut.json")
                await client.post(f"/sessions/{sid}/reset")
                for tid in prefix:
                    await client.post(f"/sessions/{sid}/fire", json={"transition": tid})
                report = (
                    await client.post(f"/sessions/{sid}/fire",
                                      json={"transition": "t_check_inventory"})
                ).json()
                assert report["advanced"] is True

        run(go())


def parse_sse(chunk_text):
    events = []
    for block in chunk_text.split("\n\n"):
        lines = [l for l in block.splitlines() if l]
        if not lines:
            continue
        event = {}
        for line in lines:
            key, _, value = line.partition(": ")
            event[key] = value
        if "data" in event:
            event["data"] = json.loads(event["data"])
        events.append(event)
    return events


class TestEventStream:
    def test_backlog_replayed_in_order(self, app):
        async def go():
            async with client_for(app) as client:
                sid = (await create_session(client))["session_id"]
                fired = ["t_choose_delivery", "t_register"]
                for tid in fired:
                    await client.post(f"/sessions/{sid}/fire", json={"transition": tid})
                log_length = (await client.get(f"/sessions/{sid}/state")).json()[
                    "log_length"
                ]
                received = []

                async def listen():
                    async with client.stream("GET", f"/sessions/{sid}/events") as stream:
                        buffer = ""
                        async for chunk in stream.aiter_text():
                            buffer += chunk
                            received[:] = [e for e in parse_sse(buffer) if "data" in e]

                listener = asyncio.create_task(listen())
                await asyncio.sleep(0.05)
                await client.delete(f"/sessions/{sid}")
                await asyncio.wait_for(listener, timeout=5)
                assert [e["data"]["transition"] for e in received] == fired
                assert all(e["event"] == "firing" for e in received)
                assert log_length == len(received)

        run(go())

    def test_live_events_arrive_and_close_on_delete(self, app):
        async def go():
            async with client_for(app) as client:
                sid = (await create_session(client))["session_id"]
                received = []

                async def listen():
                    async with client.stream("GET", f"/sessions/{sid}/events") as stream:
                        buffer = ""
                        async for chunk in stream.aiter_text():
                            buffer += chunk
                            received[:] = [
                                e for e in parse_sse(buffer) if "data" in e
                            ]

                listener = asyncio.create_task(listen())
                await asyncio.sleep(0.05)
                await client.post(f"/sessions/{sid}/fire",
                                  json={"transition": "t_choose_cc"})
                await asyncio.sleep(0.05)
                await client.delete(f"/sessions/{sid}")
                await asyncio.wait_for(listener, timeout=5)
                assert [e["data"]["transition"] for e in received] == ["t_choose_cc"]

        run(go())


class TestRealSocketStreaming:
    def test_events_stream_incrementally_over_http(self, fixtures_dir):
        # true streaming needs a real server; ASGITransport buffers bodies
        import socket
        import threading

        import uvicorn

        app = create_app(ServerConfig(fixtures_dir=str(fixtures_dir)))
        with socket.socket() as probe:
            probe.bind(("127.0.0.1", 0))
            port = probe.getsockname()[1]
        server = uvicorn.Server(
            uvicorn.Config(app, host="127.0.0.1", port=port, log_level="error")
        )
        thread = threading.Thread(target=server.run, daemon=True)
        thread.start()
        try:
            deadline = 50
            while not server.started and deadline:
                thread.join(0.1)
                deadline -= 1
            assert server.started, "server did not start"
            base = f"http://127.0.0.1:{port}"
            with httpx.Client(base_url=base, timeout=10) as client:
                sid = client.post("/sessions", json=CREATE_BODY).json()["session_id"]
                received = []
                with client.stream("GET", f"/sessions/{sid}/events") as stream:
                    lines = stream.iter_lines()
                    client.post(f"/sessions/{sid}/fire",
                                json={"transition": "t_choose_cc"})
                    buffer = ""
                    for line in lines:
                        buffer += line + "\n"
                        received = [e for e in parse_sse(buffer + "\n") if "data" in e]
                        if received:
                            break
                assert received[0]["data"]["transition"] == "t_choose_cc"
        finally:
            server.should_exit = True
            thread.join(timeout=5)


class TestConfig:
    def test_invalid_port(self, fixtures_dir):
        with pytest.raises(ValueError, match="port"):
            ServerConfig(fixtures_dir=str(fixtures_dir), port=0)

    def test_missing_fixtures_dir(self):
        with pytest.raises(ValueError, match="fixtures"):
            ServerConfig(fixtures_dir="/nonexistent/nowhere")

    def test_from_file(self, fixtures_dir, tmp_path):
        config_file = tmp_path / "server.json"
        config_file.write_text(json.dumps({
            "fixtures_dir": str(fixtures_dir), "port": 8123, "cors": True,
        }))
        config = ServerConfig.from_file(str(config_file))
        assert config.port == 8123
        assert config.cors

    def test_from_file_rejects_unknown_keys(self, fixtures_dir, tmp_path):
        config_file = tmp_path / "server.json"
        config_file.write_text(json.dumps({
            "fixtures_dir": str(fixtures_dir), "tls": True,
        }))
        with pytest.raises(ValueError, match="tls"):
            ServerConfig.from_file(str(config_file))
