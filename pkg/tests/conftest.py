import pytest

ACCEPTANCE_IDS = range(1, 12)
_KEY = pytest.StashKey[dict]()


def pytest_configure(config):
    config.stash[_KEY] = {}


@pytest.fixture
def record_criterion(request):
    """``record_criterion(n, ok, detail)`` logs one acceptance verdict.

    A criterion checked by several tests passes only if every part passed.
    """
    results = request.config.stash[_KEY]

    def record(n: int, ok: bool, detail: str = "") -> None:
        prev = results.get(n)
        if prev is not None:
            ok, detail = ok and prev[0], f"{prev[1]}; {detail}"
        results[n] = (bool(ok), detail)

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    results = config.stash[_KEY]
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for n in ACCEPTANCE_IDS:
        if n in results:
            ok, detail = results[n]
            terminalreporter.write_line(f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
        else:
            terminalreporter.write_line(f"criterion {n:2d}: FAIL  (not run, or errored before a verdict)")
