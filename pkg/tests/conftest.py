import os

from hypothesis import HealthCheck, settings

settings.register_profile("default", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.register_profile("ci", deadline=None, max_examples=20,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import ROWS
    except ImportError:
        return
    if ROWS:
        terminalreporter.section("acceptance criteria")
        for cid in sorted(ROWS):
            terminalreporter.write_line(ROWS[cid].line())
