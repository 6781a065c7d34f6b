import pytest

from hord.forms import build_delta_table, build_eigenform_table


@pytest.fixture(scope="session")
def delta_big():
    """tau(1..10^6 + 3): enough for k = 3 scans up to 10^6."""
    return build_delta_table(10**6 + 3)


@pytest.fixture(scope="session")
def delta_1e5(delta_big):
    return delta_big.truncate(10**5)


@pytest.fixture(scope="session")
def delta_small(delta_big):
    return delta_big.truncate(2000)


@pytest.fixture(scope="session")
def weight_tables():
    return {w: build_eigenform_table(w, 3000) for w in (16, 18, 20, 22, 26)}


@pytest.fixture(autouse=True)
def _isolated_cache(tmp_path, monkeypatch):
    monkeypatch.setenv("HORD_CACHE", str(tmp_path / "cache"))


def pytest_terminal_summary(terminalreporter):
    from . import test_acceptance

    if test_acceptance.REPORT:
        terminalreporter.section("acceptance criteria")
        for line in test_acceptance.REPORT:
            terminalreporter.write_line(line)
