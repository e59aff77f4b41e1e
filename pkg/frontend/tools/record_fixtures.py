#!/usr/bin/env python3
"""Refresh tests/fixtures/payment-recording.json from the real API.

Drives the in-process server through the good walkthrough and the broken
variant, capturing every response body the UI tests replay. Run from the
repository root after changing fixtures or wire schemas:

    python3 frontend/tools/record_fixtures.py
"""

import asyncio
import json
import shutil
import tempfile
from pathlib import Path

import httpx

from flowsteps.server import ServerConfig, create_app

ROOT = Path(__file__).resolve().parents[2]
FIXTURES = ROOT / "fixtures"
OUT = ROOT / "frontend" / "tests" / "fixtures" / "payment-recording.json"

GOOD_PATH = [
    "t_choose_cc", "t_fill_cc", "t_confirm",
    "t_send_email", "t_check_inventory", "t_sync", "t_close",
]
BROKEN_PATH = ["t_choose_cc", "t_fill_cc", "t_confirm", "t_check_inventory"]


async def record(sut_name, path, stop_at_block=False):
    tmp = Path(tempfile.mkdtemp())
    for name in ("payment.pnml", "payment.bindings.json",
                 "payment.sut.json", "payment-broken.sut.json"):
        shutil.copy(FIXTURES / name, tmp / name)
    app = create_app(ServerConfig(fixtures_dir=str(tmp)))
    transport = httpx.ASGITransport(app=app)
    async with httpx.AsyncClient(transport=transport, base_url="http://r") as client:
        models = (await client.get("/models")).json()
        net = (await client.get("/models/payment.pnml/net")).json()
        created = (await client.post("/sessions", json={
            "model": "payment.pnml",
            "bindings": "payment.bindings.json",
            "sut": sut_name,
        })).json()
        sid = created["session_id"]
        firings = []
        for tid in path:
            report = (await client.post(
                f"/sessions/{sid}/fire", json={"transition": tid}
            )).json()
            state = (await client.get(f"/sessions/{sid}/state")).json()
            firings.append(
                {"transition": tid, "report": report, "state_after": state}
            )
            if stop_at_block and not report["advanced"]:
                break
        return models, net, created["state"], firings


async def main():
    models, net, initial, good = await record("payment.sut.json", GOOD_PATH)
    _, _, _, broken = await record(
        "payment-broken.sut.json", BROKEN_PATH, stop_at_block=True
    )
    # durations vary run to run; zero them so playback is exactly reproducible
    for firing in good + broken:
        for result in firing["report"]["step_results"]:
            result["duration_ms"] = 0.0
    OUT.write_text(json.dumps({
        "models": models,
        "net": net,
        "initial_state": initial,
        "good": good,
        "broken": broken,
    }, indent=2) + "\n")
    print(f"wrote {OUT}")


if __name__ == "__main__":
    asyncio.run(main())
