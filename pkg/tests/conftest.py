import pytest

from uclrating.pipeline import build_samples, load_synthetic
from uclrating.synthetic import generate

# criterion id -> (name, "PASS" | "FAIL" | "SKIP", detail)
ACCEPTANCE: dict[str, tuple[str, str, str]] = {}


@pytest.fixture(scope="session")
def world():
    return generate()


@pytest.fixture(scope="session")
def synthetic_dataset():
    return load_synthetic()


@pytest.fixture(scope="session")
def synthetic_samples(synthetic_dataset):
    return build_samples(synthetic_dataset)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE):
        name, status, detail = ACCEPTANCE[key]
        terminalreporter.write_line(f"[{status}] {key} {name}: {detail}")
