import os

from hypothesis import HealthCheck, settings

settings.register_profile("default", deadline=None, max_examples=40,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

import pytest

ALPHA_STAR = {0: 1.0, 2: 0.43198780774045936, 4: 0.15026959143158788}


@pytest.fixture(scope="session")
def path2():
    import time

    from twistcert.certify import certify_path
    t = time.perf_counter()
    rep = certify_path(2)
    rep.elapsed = time.perf_counter() - t
    return rep

ACCEPTANCE = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE:
            terminalreporter.write_line(line)
