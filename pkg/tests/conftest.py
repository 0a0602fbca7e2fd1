import os
from contextlib import contextmanager

import hypothesis
import numpy as np
import pytest

hypothesis.settings.register_profile("default", max_examples=60, deadline=None,
                                     suppress_health_check=[hypothesis.HealthCheck.too_slow])
hypothesis.settings.register_profile("fast", max_examples=10, deadline=None)
hypothesis.settings.register_profile("thorough", max_examples=500, deadline=None)
hypothesis.settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

_ACCEPTANCE: dict[str, tuple[str, str, str]] = {}


class AcceptanceLog:
    @contextmanager
    def check(self, key: str, label: str):
        try:
            yield
        except BaseException as exc:
            detail = " ".join(str(exc).split())[:160]
            _ACCEPTANCE[key] = ("FAIL", label, detail)
            raise
        _ACCEPTANCE[key] = ("PASS", label, "")


@pytest.fixture
def acceptance():
    return AcceptanceLog()


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(_ACCEPTANCE, key=lambda k: (int(k.rstrip("abcdefgh")), k)):
        status, label, detail = _ACCEPTANCE[key]
        line = f"criterion {key:<3} {status}  {label}"
        if detail:
            line += f"  [{detail}]"
        terminalreporter.write_line(line)
