import pytest

from emopanel.pipeline import build_panel, run_ingest
from emopanel.replicate.synthetic import SyntheticConfig, generate_synthetic

# Small enough for every test run, with enough heavily discussed firms for the 100-message subsamples.
SMALL = SyntheticConfig(n_firms=24, n_dates=70, n_users=400, popular_share=0.1, popular_mean=120)


@pytest.fixture(scope="session")
def small_data():
    return generate_synthetic(SMALL, 3)


@pytest.fixture(scope="session")
def small_ingest(small_data):
    d = small_data
    return run_ingest(d.messages, d.security_master, d.calendar)


@pytest.fixture(scope="session")
def small_panel(small_data, small_ingest):
    d = small_data
    return build_panel(small_ingest.kept, d.prices, d.calendar, d.low_frequency, d.index_members)


# one line per acceptance criterion, printed after the run
ACCEPTANCE: dict[int, str] = {}


@pytest.fixture
def criterion(request):
    """Record and print a criterion verdict: criterion(n, ok, detail)."""

    def record(number: int, ok: bool, detail: str) -> bool:
        line = f"criterion {number:>2} {'PASS' if ok else 'FAIL'}: {detail}"
        ACCEPTANCE[number] = line
        print(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for number in sorted(ACCEPTANCE):
            terminalreporter.write_line(ACCEPTANCE[number])
