"""Drives `hierdx serve` over HTTP and checks every body against schemas/."""

import json
import os
import socket
import subprocess
import time
from pathlib import Path

import pytest
import requests
from jsonschema import Draft202012Validator
from referencing import Registry, Resource

ROOT = Path(__file__).resolve().parents[2]
FIXTURE = str(ROOT / "fixtures" / "paper_y1.json")
BIN = os.environ.get("HIERDX_BIN", str(ROOT / "build" / "tools" / "hierdx"))


def _load(name):
    return json.loads((ROOT / "schemas" / name).read_text())


_schemas = {n: _load(n) for n in ("session_state.schema.json", "error.schema.json",
                                  "transcript_event.schema.json")}
_registry = Registry().with_resources(
    [(n, Resource.from_contents(s)) for n, s in _schemas.items()])
STATE = Draft202012Validator(_schemas["session_state.schema.json"], registry=_registry)
ERROR = Draft202012Validator(_schemas["error.schema.json"], registry=_registry)


def _free_port():
    with socket.socket() as s:
        s.bind(("127.0.0.1", 0))
        return s.getsockname()[1]


@pytest.fixture(scope="module")
def base():
    port = _free_port()
    proc = subprocess.Popen([BIN, "serve", "--host", "127.0.0.1", "--port", str(port)],
                            stdout=subprocess.DEVNULL, stderr=subprocess.DEVNULL)
    url = f"http://127.0.0.1:{port}/api/sessions"
    for _ in range(100):
        try:
            requests.get(url + "/none", timeout=0.2)
            break
        except requests.ConnectionError:
            time.sleep(0.05)
    yield url
    proc.terminate()
    proc.wait(timeout=5)


def ok(resp, status=200):
    assert resp.status_code == status, resp.text
    body = resp.json()
    STATE.validate(body)
    return body


def err(resp, status):
    assert resp.status_code == status, resp.text
    body = resp.json()
    ERROR.validate(body)
    return body["error"]["code"]


def create(base, **fields):
    return ok(requests.post(base, json={"kb": FIXTURE, **fields}), 201)


@pytest.mark.parametrize("fault", ["functional:G1:sa1", "functional:OR1:sa1",
                                   "functional:G5:sa0", "bridge:CHIP1:2-3:and",
                                   "bridge:CHIP1:1-2:or"])
def test_simulated_sessions(base, fault):
    s = create(base, mode="simulated", fault=fault)
    assert s["phase"] == "running"
    done = ok(requests.post(f"{base}/{s['session_id']}/advance"))
    assert done["phase"] == "done"
    assert done["outcome"] in ("device_ok", "assumption_violation")
    assert done["ledger"] == done["sim_ledger"]


def test_inline_kb(base):
    kb = json.loads(Path(FIXTURE).read_text())
    s = ok(requests.post(base, json={"kb": kb, "mode": "simulated", "fault": "functional:G3:sa1"}),
           201)
    assert ok(requests.post(f"{base}/{s['session_id']}/advance"))["outcome"] == "device_ok"


def test_interactive_flow(base):
    s = create(base, mode="interactive", inputs="0,1,1,1,1", observations={"Y1": 1, "Y2": 1})
    sid = s["session_id"]
    st = ok(requests.post(f"{base}/{sid}/advance"))
    assert st["phase"] == "awaiting_probe"
    assert st["pending"] == {"kind": "probe", "testpoint": "P1"}
    first = requests.get(f"{base}/{sid}")
    second = requests.get(f"{base}/{sid}")
    ok(first)
    assert first.content == second.content
    ok(requests.post(f"{base}/{sid}/probe-result", json={"testpoint": "P1", "ok": False}))
    st = ok(requests.post(f"{base}/{sid}/advance"))
    assert st["recommendation"]["treatment"] == "repair:P1-sub"
    ok(requests.post(f"{base}/{sid}/probe-result", json={"testpoint": "TN1", "ok": False}))
    st = ok(requests.post(f"{base}/{sid}/advance"))
    assert st["phase"] == "awaiting_action_result"
    assert st["recommendation"] == {"action": "apply_treatment", "treatment": "replace:G1"}
    ok(requests.post(f"{base}/{sid}/action-result", json={"device_ok": True}))
    st = ok(requests.post(f"{base}/{sid}/advance"))
    assert st["phase"] == "done" and st["outcome"] == "device_ok"


def test_chip_questions(base):
    s = create(base, mode="interactive", fault="bridge:CHIP1:2-3:and")
    sid = s["session_id"]
    answers = {"P1": False, "TN1": False}
    for _ in range(20):
        st = ok(requests.post(f"{base}/{sid}/advance"))
        if st["phase"] == "done":
            break
        pending = st["pending"]
        if pending["kind"] == "probe":
            body = {"testpoint": pending["testpoint"], "ok": answers.get(pending["testpoint"], True)}
            ok(requests.post(f"{base}/{sid}/probe-result", json=body))
        elif pending["kind"] == "chip":
            assert st["recommendation"] == {"action": "inspect_chip", "chip": pending["chip"]}
            found = pending["chip"] == "CHIP1"
            body = {"chip": pending["chip"], "found": found}
            if found:
                body["pins"] = [3, 2]
            ok(requests.post(f"{base}/{sid}/probe-result", json=body))
        else:
            fixed = "remove_bridge" in st["recommendation"]["treatment"]
            ok(requests.post(f"{base}/{sid}/action-result", json={"device_ok": fixed}))
    assert st["outcome"] == "device_ok"
    kinds = [e["kind"] for e in st["transcript"] if e["event"] == "Treatment"]
    assert kinds[-1] == "remove_bridge"


def test_errors(base):
    assert err(requests.get(f"{base}/nope"), 404) == "NotFound"
    assert err(requests.post(f"{base}/nope/advance"), 404) == "NotFound"
    assert err(requests.post(base, data="{", headers={"Content-Type": "application/json"}),
               422) == "SyntaxError"
    assert err(requests.post(base, json={"kb": FIXTURE, "mode": "sideways"}), 422)
    assert err(requests.post(base, json={"kb": "/no/such.json"}), 422) == "FileNotFound"
    assert err(requests.post(base, json={"kb": FIXTURE, "fault": "functional:Q:sa0"}),
               422) == "UnknownElement"
    s = create(base, mode="interactive", inputs="0,1,1,1,1", observations={"Y1": 1, "Y2": 1})
    sid = s["session_id"]
    assert err(requests.post(f"{base}/{sid}/probe-result", json={"testpoint": "P1", "ok": False}),
               409) == "WrongPhase"
    assert err(requests.post(f"{base}/{sid}/action-result", json={"device_ok": True}),
               409) == "WrongPhase"
    ok(requests.post(f"{base}/{sid}/advance"))
    assert err(requests.post(f"{base}/{sid}/probe-result", json={"ok": False}), 422)
    assert err(requests.post(f"{base}/{sid}/advance"), 409) == "WrongPhase"
    gone = requests.delete(f"{base}/{sid}")
    assert gone.status_code == 204 and gone.content == b""
    assert err(requests.get(f"{base}/{sid}"), 404) == "NotFound"
