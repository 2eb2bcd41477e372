import numpy as np
import pytest

from masc.benchmark import BenchmarkSpec, default_schema, generate
from masc.data_model import Dataset, Schema


@pytest.fixture
def schema3():
    return default_schema(2)


def make_dataset(groups, targets=None, features=None, id="t", schema=None, d=2, seed=0):
    groups = np.asarray(groups)
    n = len(groups)
    schema = schema or default_schema(d)
    if targets is None:
        targets = np.zeros(n, dtype=int)
    if features is None:
        features = np.random.default_rng(seed).standard_normal((n, len(schema.feature_names)))
    return Dataset(id, features, groups, targets, schema)


def counts_dataset(counts, id="t", d=2, seed=0):
    """Dataset with ``counts[g]`` rows of group g."""
    groups = np.repeat(np.arange(len(counts)), counts)
    return make_dataset(groups, id=id, d=d, seed=seed)


@pytest.fixture(scope="session")
def planted_benchmark():
    return generate(BenchmarkSpec())


@pytest.fixture
def csv_schema():
    return Schema(
        feature_names=["age", "job", "hours"],
        protected_attribute="race",
        protected_groups=["White", "Black", "Other"],
        aggregation_map={"1": "White", "2": "Black", "3": "Other", "6": "Other", "8": "Other"},
        target="income",
        positive_label=">50K",
    )


_ACCEPTANCE: dict[int, tuple[str, str]] = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("acceptance")
    if marker is None:
        return
    number, title = marker.args
    if rep.when == "call" or (rep.when == "setup" and rep.outcome != "passed"):
        status = {"passed": "PASS", "failed": "FAIL", "skipped": "SKIP"}[rep.outcome]
        _ACCEPTANCE[number] = (status, title)


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_ACCEPTANCE):
        status, title = _ACCEPTANCE[number]
        terminalreporter.write_line(f"criterion {number}: {status}  {title}")
