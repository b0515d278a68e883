import numpy as np
import pytest

from yieldseq.models.network import init_network
from yieldseq.numcore import SeededRng


def random_net(kind, input_size, hidden, seed, hidden_layers=2, bias_scale=0.5):
    rng = SeededRng(seed)
    net = init_network(kind, input_size, hidden, rng, hidden_layers)
    for name, p in net.params.items():
        if name.startswith("b_"):
            p[...] = rng.uniform(-bias_scale, bias_scale, p.shape)
    return net


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


# Acceptance tests carry @pytest.mark.acceptance(number, title); outcomes are
# collected here and printed as one PASS/FAIL line per criterion.
_ACCEPTANCE = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance(number, title): numbered acceptance criterion")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("acceptance")
    if mark is None or rep.when == "teardown":
        return
    number, title = mark.args
    ok, _ = _ACCEPTANCE.get(number, (True, title))
    if rep.failed or rep.skipped:
        ok = False
    if rep.when == "call" or not ok:
        _ACCEPTANCE[number] = (ok, title)


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_ACCEPTANCE):
        ok, title = _ACCEPTANCE[number]
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  criterion {number:2d}: {title}")
