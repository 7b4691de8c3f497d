from __future__ import annotations

import pytest

from tidns import oracles


@pytest.mark.parametrize("name", sorted(oracles.SUITES))
def test_quick_suite(name: str) -> None:
    (result,) = oracles.run_suites([name])

    assert result.passed, result.detail
    assert result.usage is not None
    assert result.usage.wall >= 0


@pytest.mark.slow
@pytest.mark.parametrize("name", sorted(oracles.SUITES))
def test_full_suite(name: str) -> None:
    (result,) = oracles.run_suites([name], full=True)

    assert result.passed, result.detail


@pytest.mark.parametrize("seed", range(20))
def test_query_vote_schedule(seed: int) -> None:
    assert oracles.QueryVoteSchedule(seed).run() == []


def test_crashing_suite_is_reported(monkeypatch: pytest.MonkeyPatch) -> None:
    def explode(full: bool) -> oracles.SuiteResult:
        raise RuntimeError("boom")

    monkeypatch.setitem(oracles.SUITES, "explode", explode)

    (result,) = oracles.run_suites(["explode"])

    assert not result.passed
    assert result.detail == "boom"
    assert result.usage is not None


def test_run_everything_by_default(monkeypatch: pytest.MonkeyPatch) -> None:
    calls = []

    def fake(name: str) -> oracles.Suite:
        def run(full: bool) -> oracles.SuiteResult:
            calls.append((name, full))
            return oracles.SuiteResult(name=name, passed=True, detail="ok")

        return run

    monkeypatch.setattr(
        oracles, "SUITES", {name: fake(name) for name in ("a", "b")}
    )

    results = oracles.run_suites(full=True)

    assert [result.name for result in results] == ["a", "b"]
    assert calls == [("a", True), ("b", True)]
