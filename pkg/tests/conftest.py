import pytest
from hypothesis import HealthCheck, settings

from annular_dyn.annuli import align_partition, build_Bn_sequence
from annular_dyn.covering import DESK_RELAXED
from annular_dyn.functions import get_function

settings.register_profile(
    "repo", derandomize=True, deadline=None, max_examples=60,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("repo")


@pytest.fixture(scope="session")
def exp_fn():
    return get_function("exp")


@pytest.fixture(scope="session")
def flagship(exp_fn):
    """The exp chain from t0 = 2 with the desk-relaxed profile, five entries."""
    chain = build_Bn_sequence(exp_fn, 2, 5, DESK_RELAXED)
    return chain, align_partition(chain, exp_fn)


_ACCEPTANCE_KEY = pytest.StashKey[dict]()


@pytest.fixture
def criterion(request):
    """Record one acceptance line: call with (number, passed, detail)."""
    store = request.config.stash.setdefault(_ACCEPTANCE_KEY, {})

    def record(num, passed, detail=""):
        store[num] = (bool(passed), detail)
        line = f"criterion {num:2d}: {'PASS' if passed else 'FAIL'}  {detail}"
        request.node.user_properties.append(("acceptance", line))
        print(line)

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    store = config.stash.get(_ACCEPTANCE_KEY, {})
    if not store:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(store):
        passed, detail = store[num]
        terminalreporter.write_line(f"criterion {num:2d}: {'PASS' if passed else 'FAIL'}  {detail}")
