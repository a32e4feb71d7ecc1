import numpy as np
import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

settings.register_profile(
    "default", max_examples=40, deadline=None,
    suppress_health_check=[HealthCheck.too_slow, HealthCheck.data_too_large],
)
settings.load_profile("default")

finite = st.floats(-2.0, 2.0, allow_nan=False, allow_infinity=False)


@st.composite
def complex_matrices(draw, max_n: int = 6, square: bool = True, n: int | None = None):
    n = n or draw(st.integers(1, max_n))
    m = n if square else draw(st.integers(1, max_n))
    re = draw(arrays(np.float64, (n, m), elements=finite))
    im = draw(arrays(np.float64, (n, m), elements=finite))
    return re + 1j * im


@st.composite
def contractions(draw, max_n: int = 6, n: int | None = None):
    M = draw(complex_matrices(max_n=max_n, n=n))
    s = np.linalg.norm(M, 2)
    scale = draw(st.floats(0.0, 1.0))
    return M * (scale / s) if s > 0 else M


seeds = st.integers(0, 2**31 - 1)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


ACCEPTANCE_LINES: dict[int, str] = {}


@pytest.fixture
def criterion():
    """Record one acceptance line; the assertion itself stays in the test."""

    def record(number: int, ok: bool, detail: str) -> bool:
        ACCEPTANCE_LINES[number] = f"criterion {number}: {'PASS' if ok else 'FAIL'}  {detail}"
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[k])
