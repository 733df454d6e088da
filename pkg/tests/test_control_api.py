"""HTTP control surface: status, attempt browsing, verdict flow, report."""

from __future__ import annotations

import socket
import threading
import time
from pathlib import Path

import pytest
import requests

from support import FakeModel

from hilbench.campaign import CampaignRuntime, run_campaign
from hilbench.control_api import serve_control_api
from hilbench.errors import PortInUse
from hilbench.journal import InstanceKey, JournalWriter, attempt_record
from hilbench.providers import RecordingProvider
from hilbench.toolchain import BuildResult, FlashResult
from hilbench.verdicts import ApiVerdicts

from test_campaign import make_plan, stub_toolchains

ARDUINO = "atmega2560+arduino"
KEY = InstanceKey(task="sos-morse", mode="none", platform=ARDUINO)


def _seed_awaiting(journal_path, attempts=(1,)) -> None:
    """Journal with attempts parked at awaiting-verdict."""
    writer = JournalWriter(journal_path)
    run = {
        "run_id": "r",
        "task": KEY.task,
        "platform": KEY.platform,
        "mode": KEY.mode,
        "manager": None,
        "coder": {"system": "s", "messages": ["m"], "response": "code", "usage": {"input": 5, "output": 7}},
    }
    bundle = {"platform": KEY.platform, "entry": "e.ino", "files": {"e.ino": "int main;"}}
    ok_build = BuildResult("ok", "", 0.1, 0).as_dict()
    ok_flash = FlashResult("ok", "", 0.1, 0).as_dict()
    for attempt in attempts:
        writer.append(attempt_record(KEY, attempt, 1, "generated", run=run, bundle=bundle))
        writer.append(attempt_record(KEY, attempt, 1, "built", build=ok_build, flash=ok_flash))
        writer.append(
            attempt_record(KEY, attempt, 1, "awaiting-verdict", task_info={"title": "SOS", "check": {}})
        )
    writer.close()


@pytest.fixture()
def server(tmp_path):
    journal = tmp_path / "journal.jsonl"
    _seed_awaiting(journal, attempts=(1, 2))
    runtime = CampaignRuntime(journal)
    handle = serve_control_api(runtime, port=0)
    base = f"http://127.0.0.1:{handle.port}"
    yield base, runtime
    handle.close()
    runtime.close()


class TestEndpoints:
    def test_status(self, server):
        base, _ = server
        status = requests.get(f"{base}/api/status").json()
        assert status["states"]["awaiting-verdict"] == 2
        assert status["instances"] == 1
        assert status["seq"] > 0

    def test_attempts_filter(self, server):
        base, _ = server
        pending = requests.get(f"{base}/api/attempts", params={"state": "awaiting-verdict"}).json()
        assert [a["attempt"] for a in pending] == [1, 2]

    def test_attempt_detail(self, server):
        base, _ = server
        detail = requests.get(f"{base}/api/attempts/{KEY.slug()}~a1").json()
        assert detail["code"] == "int main;"
        assert detail["build"]["status"] == "ok"
        assert detail["task_info"]["title"] == "SOS"

    def test_unknown_attempt_404(self, server):
        base, _ = server
        response = requests.get(f"{base}/api/attempts/{KEY.slug()}~a9")
        assert response.status_code == 404

    def test_instances_filtering(self, server):
        base, _ = server
        rows = requests.get(f"{base}/api/instances", params={"platform": ARDUINO}).json()
        assert len(rows) == 1
        assert rows[0]["attempts"]["1"]["state"] == "awaiting-verdict"
        assert requests.get(f"{base}/api/instances", params={"mode": "human-expert"}).json() == []


class TestVerdictFlow:
    def test_pass_verdict_completes_attempt(self, server):
        base, runtime = server
        response = requests.post(
            f"{base}/api/attempts/{KEY.slug()}~a1/verdict",
            json={"verdict": "pass", "notes": "works"},
        )
        assert response.status_code == 200
        assert response.json()["outcome"] == "BC"
        assert runtime.state.view(KEY, 1).state == "complete"
        report = requests.get(f"{base}/api/report", params={"k": 1}).json()
        assert report["modes"]["none"][ARDUINO]["total"]["bc"] == 1

    def test_double_submit_conflict(self, server):
        base, _ = server
        url = f"{base}/api/attempts/{KEY.slug()}~a1/verdict"
        assert requests.post(url, json={"verdict": "fail", "notes": "hang"}).status_code == 200
        second = requests.post(url, json={"verdict": "pass"})
        assert second.status_code == 409

    def test_verdict_on_unknown_attempt_404(self, server):
        base, _ = server
        response = requests.post(f"{base}/api/attempts/nope~x~y~a1/verdict", json={"verdict": "pass"})
        assert response.status_code == 404

    def test_verdict_on_cf_attempt_409(self, tmp_path):
        journal = tmp_path / "journal.jsonl"
        writer = JournalWriter(journal)
        writer.append(
            attempt_record(
                KEY,
                1,
                1,
                "complete",
                outcome="CF",
                verdict=None,
                usage={"manager": None, "coder": {"input": 1, "output": 1}},
            )
        )
        writer.close()
        runtime = CampaignRuntime(journal)
        handle = serve_control_api(runtime, port=0)
        try:
            response = requests.post(
                f"http://127.0.0.1:{handle.port}/api/attempts/{KEY.slug()}~a1/verdict",
                json={"verdict": "pass"},
            )
            assert response.status_code == 409
        finally:
            handle.close()
            runtime.close()

    def test_bad_body_400(self, server):
        base, _ = server
        response = requests.post(f"{base}/api/attempts/{KEY.slug()}~a1/verdict", json={"verdict": "maybe"})
        assert response.status_code == 400


class TestReportEndpoint:
    def test_fixture_journal_report(self, reference_journal):
        runtime = CampaignRuntime(reference_journal)
        handle = serve_control_api(runtime, port=0)
        try:
            base = f"http://127.0.0.1:{handle.port}"
            report = requests.get(base + "/api/report", params={"k": 1}).json()
            cell = report["modes"]["none"][ARDUINO]["total"]
            assert (cell["cf"], cell["bf"], cell["bc"]) == (3, 2, 37)
            assert report["seq"] == 1890
            md = requests.get(base + "/api/report", params={"k": 5, "format": "md"}).text
            assert "| No-Skills | Arduino | 0/0/12 | 0/0/16 | 0/0/14 | 0/0/42 |" in md
        finally:
            handle.close()
            runtime.close()


class TestLiveView:
    def test_fresh_campaign_all_pending(self, tmp_path):
        """A journal holding only the campaign header reports every planned
        instance as pending and an empty (headers-only) report."""
        writer = JournalWriter(tmp_path / "j.jsonl")
        writer.append(
            {
                "type": "campaign",
                "platforms": [ARDUINO],
                "modes": ["none"],
                "attempts": 2,
                "instances": 2,
                "grid": [
                    {"task": "sos-morse", "mode": "none", "platform": ARDUINO, "level": 1},
                    {"task": "tmp36-read", "mode": "none", "platform": ARDUINO, "level": 1},
                ],
            }
        )
        writer.close()
        runtime = CampaignRuntime(tmp_path / "j.jsonl")
        handle = serve_control_api(runtime, port=0)
        try:
            base = f"http://127.0.0.1:{handle.port}"
            status = requests.get(f"{base}/api/status").json()
            assert status["instances"] == 2
            assert status["pending_instances"] == 2
            rows = requests.get(f"{base}/api/instances").json()
            assert len(rows) == 2
            assert all(row["attempts"] == {} for row in rows)
            report = requests.get(f"{base}/api/report", params={"k": 1}).json()
            assert report["modes"] == {}
        finally:
            handle.close()
            runtime.close()

    def test_partial_instances_render_as_pending_not_error(self, tmp_path):
        """An instance whose attempt 1 is still unjudged must not break the
        k=1 report; it is simply not counted yet."""
        journal = tmp_path / "j.jsonl"
        _seed_awaiting(journal, attempts=(1,))
        writer = JournalWriter(journal, start_seq=replay_seq(journal))
        other = InstanceKey(task="tmp36-read", mode="none", platform=ARDUINO)
        writer.append(
            attempt_record(
                other,
                1,
                1,
                "complete",
                outcome="BC",
                verdict={"verdict": "pass"},
                usage={"manager": None, "coder": {"input": 1, "output": 2}},
            )
        )
        writer.close()
        runtime = CampaignRuntime(journal)
        handle = serve_control_api(runtime, port=0)
        try:
            base = f"http://127.0.0.1:{handle.port}"
            report = requests.get(f"{base}/api/report", params={"k": 1}).json()
            cell = report["modes"]["none"][ARDUINO]["total"]
            assert (cell["cf"], cell["bf"], cell["bc"]) == (0, 0, 1)
        finally:
            handle.close()
            runtime.close()


def replay_seq(path) -> int:
    from hilbench.journal import replay as _replay

    return _replay(path).last_seq


class TestServerLifecycle:
    def test_port_in_use(self, tmp_path):
        journal = tmp_path / "j.jsonl"
        JournalWriter(journal).close()
        runtime = CampaignRuntime(journal)
        blocker = socket.socket()
        blocker.bind(("127.0.0.1", 0))
        port = blocker.getsockname()[1]
        try:
            with pytest.raises(PortInUse):
                serve_control_api(runtime, port=port)
        finally:
            blocker.close()
            runtime.close()


class TestStaticDashboard:
    def test_dashboard_assets_served_with_fixture_report(self, reference_journal):
        """The built dashboard is served at / next to the API it polls."""
        frontend = Path(__file__).resolve().parent.parent / "frontend"
        if not (frontend / "dist" / "app.js").exists():
            pytest.skip("dashboard not built (run npm run build under frontend/)")
        runtime = CampaignRuntime(reference_journal)
        handle = serve_control_api(runtime, port=0, static_dir=frontend)
        try:
            base = f"http://127.0.0.1:{handle.port}"
            index = requests.get(base + "/")
            assert index.status_code == 200
            assert "hilbench campaign dashboard" in index.text
            app = requests.get(base + "/dist/app.js")
            assert app.status_code == 200
            report = requests.get(base + "/api/report", params={"k": 1}).json()
            cell = report["modes"]["none"][ARDUINO]["total"]
            assert (cell["cf"], cell["bf"], cell["bc"]) == (3, 2, 37)
            assert requests.get(base + "/../etc/passwd").status_code in (400, 404)
        finally:
            handle.close()
            runtime.close()


class TestCampaignIntegration:
    def test_api_verdicts_unblock_campaign(self, tmp_path):
        """A live campaign waits on the API; POSTing the verdict completes it."""
        plan = make_plan(tmp_path, tasks=("sos-morse",), attempts=1)
        runtime = CampaignRuntime(plan.journal_path)
        handle = serve_control_api(runtime, port=0)
        base = f"http://127.0.0.1:{handle.port}"
        provider = RecordingProvider(FakeModel(), tmp_path / "cassettes")
        source = ApiVerdicts(runtime)
        result: dict = {}

        def drive():
            result["summary"] = run_campaign(
                plan, provider, stub_toolchains(tmp_path), source, runtime=runtime
            )

        worker = threading.Thread(target=drive)
        worker.start()
        try:
            attempt_id = f"{KEY.slug()}~a1"
            pending = []
            for _ in range(100):
                pending = requests.get(f"{base}/api/attempts", params={"state": "awaiting-verdict"}).json()
                if pending:
                    break
                time.sleep(0.05)
            assert pending and pending[0]["id"] == attempt_id
            response = requests.post(
                f"{base}/api/attempts/{attempt_id}/verdict", json={"verdict": "pass", "notes": "ok"}
            )
            assert response.status_code == 200
            worker.join(timeout=10)
            assert not worker.is_alive()
            assert result["summary"].state_counts["complete"] == 1
            assert runtime.state.view(KEY, 1).verdict.source == "api"
        finally:
            handle.close()
            runtime.close()
