"""Shared fixtures: the synthetic corpora and their built index stores.

Tests marked @pytest.mark.acceptance("<name>") get a one-line verdict in the
terminal summary so the suite-level checks are visible at a glance.
"""

import pytest

from cbir.index import build_index
from cbir.synth import generate_corpus

_acceptance_verdicts: dict[str, str] = {}


def pytest_configure(config):
    config.addinivalue_line(
        "markers", "acceptance(name): suite-level acceptance criterion, reported by name"
    )


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("acceptance")
    if marker is None:
        return
    name = marker.args[0]
    if report.when == "call":
        _acceptance_verdicts[name] = "PASS" if report.passed else "FAIL"
    elif report.when == "setup" and not report.passed:
        _acceptance_verdicts[name] = "FAIL"


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _acceptance_verdicts:
        return
    terminalreporter.section("acceptance criteria")
    for name, verdict in _acceptance_verdicts.items():
        terminalreporter.write_line(f"[acceptance] {name}: {verdict}")


@pytest.fixture(scope="session")
def corpus_dir(tmp_path_factory):
    """Full three-class corpus, 20 images per class."""
    root = tmp_path_factory.mktemp("corpus")
    generate_corpus(root)
    return root


@pytest.fixture(scope="session")
def corpus_store(corpus_dir):
    result = build_index(corpus_dir)
    assert not result.failures
    return result.store


@pytest.fixture(scope="session")
def small_corpus_dir(tmp_path_factory):
    """Reduced corpus, 4 images per class, for exhaustive pairwise checks."""
    root = tmp_path_factory.mktemp("corpus-small")
    generate_corpus(root, per_class=4)
    return root


@pytest.fixture(scope="session")
def small_store(small_corpus_dir):
    result = build_index(small_corpus_dir)
    assert not result.failures
    return result.store
