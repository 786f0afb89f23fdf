import os

import pytest
from hypothesis import HealthCheck, settings

from xlstr.corpus import load_corpus, train_sets
from xlstr.synthetic import SHARED_TASK_COUNTS, minicorpus_root, write_corpus

settings.register_profile("default", deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

# Lines printed by the acceptance tests, repeated in the terminal summary.
ACCEPTANCE_LINES: list[str] = []


@pytest.fixture(scope="session")
def mini_root():
    return minicorpus_root()


@pytest.fixture(scope="session")
def mini_corpus(mini_root):
    return load_corpus(mini_root)


@pytest.fixture(scope="session")
def fullscale_root(tmp_path_factory):
    """Synthetic corpus with the split sizes of the public shared-task release."""
    root = tmp_path_factory.mktemp("fullscale")
    write_corpus(root, SHARED_TASK_COUNTS, seed=11)
    return root


@pytest.fixture(scope="session")
def fullscale_train(fullscale_root):
    return train_sets(load_corpus(fullscale_root))


@pytest.fixture
def real_root(request):
    root = os.environ.get("XLSTR_REAL_DATA")
    if not root:
        ACCEPTANCE_LINES.append(f"[SKIP] {request.node.name}: needs XLSTR_REAL_DATA (shared-task corpus)")
        pytest.skip("set XLSTR_REAL_DATA to the shared-task corpus directory")
    return root



def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
