"""Record console fixtures by driving the restoration service in process.

Walks the six-bus system through two scripted sessions against the real
HTTP app and freezes every response under frontend/fixtures/.  The console
tests replay these files instead of talking to a live backend.  Rerun after
changing the service payload shape, then review the diff.
"""

import json
import sys
import time
from pathlib import Path

from fastapi.testclient import TestClient

from gridrestore.service import create_app

FRONTEND = Path(__file__).resolve().parent.parent
FIXTURES = FRONTEND / "fixtures"
PROBLEM = FRONTEND.parent / "problems" / "six_bus.json"


def wait_for_job(client, pid, job_id):
    for _ in range(1200):
        body = client.get(f"/problems/{pid}/jobs/{job_id}").json()
        if body["status"] == "done":
            return body["result"]
        if body["status"] == "error":
            sys.exit(f"solve failed: {body}")
        time.sleep(0.05)
    sys.exit("solve did not finish in time")


def record_walk(client, pid, reports, whatif_at=None):
    """Open a session, apply the reports in order, capture every payload.

    whatif_at names a step index; every alternative visible in that step's
    payload gets its what-if response recorded as well.
    """
    response = client.post("/sessions", json={"problem": pid})
    assert response.status_code == 201, response.text
    payload = response.json()
    sid = payload["session"]
    steps = [{"payload": payload}]
    whatifs = []
    for step, outcomes in enumerate(reports):
        if whatif_at == step:
            for alt in payload["alternatives"]:
                r = client.get(f"/sessions/{sid}/whatif", params={"action": alt["action"]})
                assert r.status_code == 200, r.text
                whatifs.append({"step": step, **r.json()})
        r = client.post(f"/sessions/{sid}/report", json={"outcomes": outcomes})
        assert r.status_code == 200, r.text
        payload = r.json()
        steps.append({"report": outcomes, "payload": payload})
    return {"steps": steps, "whatifs": whatifs}


def main():
    doc = json.loads(PROBLEM.read_text())
    client = TestClient(create_app())

    up = client.post("/problems", json=doc)
    assert up.status_code == 201, up.text
    pid = up.json()["id"]
    job = client.post(f"/problems/{pid}/solve", json={"flags": "SPOW"}).json()["job"]
    solve = wait_for_job(client, pid, job)

    # shortest complete run: cascade, both frontier attempts fail, terminal
    short = record_walk(client, pid, [
        {"1": "energized", "4": "energized"},
        {"2": "damaged", "5": "damaged"},
    ])
    assert short["steps"][-1]["payload"]["terminal"], "short walk must end terminal"

    # longer run that leaves team 2 en route when the middle window closes
    route = record_walk(client, pid, [
        {"1": "energized", "4": "energized"},
        {"2": "energized", "5": "damaged"},
        {"3": "energized"},
    ], whatif_at=1)
    last = route["steps"][-1]["payload"]
    moving = [t for t in last["teams"] if "remaining" in t]
    assert moving == [{"team": 2, "to": 3, "remaining": 1, "from": 5}], moving
    assert last["terminal"], "route walk must end terminal"

    FIXTURES.mkdir(exist_ok=True)
    for name, walk in (("session_short", short), ("session_route", route)):
        out = {"problem": doc, "solve": solve, **walk}
        path = FIXTURES / f"{name}.json"
        path.write_text(json.dumps(out, indent=2) + "\n")
        print(f"wrote {path.relative_to(FRONTEND)}: {len(walk['steps'])} steps, "
              f"{len(walk['whatifs'])} whatif queries")


if __name__ == "__main__":
    main()
