import numpy as np
import pytest

from antisym.sim import DensityMatrix, StateVector


def random_orbitals(rng: np.random.Generator, n: int, eta: int) -> list[np.ndarray]:
    d = 2**eta
    z = rng.normal(size=(d, n)) + 1j * rng.normal(size=(d, n))
    q, _ = np.linalg.qr(z)
    return [q[:, i] for i in range(n)]


def random_state(rng: np.random.Generator, n: int) -> StateVector:
    v = rng.normal(size=2**n) + 1j * rng.normal(size=2**n)
    return StateVector(n, v / np.linalg.norm(v))


def random_density(rng: np.random.Generator, n: int, rank: int = 3) -> DensityMatrix:
    a = rng.normal(size=(2**n, rank)) + 1j * rng.normal(size=(2**n, rank))
    m = a @ a.conj().T
    return DensityMatrix(n, m / np.trace(m))


def equal_up_to_phase(a: np.ndarray, b: np.ndarray, tol: float = 1e-12) -> bool:
    """Matrices equal up to one global phase."""
    k = np.unravel_index(np.argmax(np.abs(b)), b.shape)
    if abs(b[k]) < tol:
        return np.allclose(a, b, atol=tol)
    phase = a[k] / b[k]
    return abs(abs(phase) - 1) < tol and np.allclose(a, phase * b, atol=tol)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


# -- acceptance reporting --------------------------------------------------------------------
# Tests marked ``criterion(k)`` roll up into one PASS/FAIL line per criterion.
# An expected failure counts as FAIL.

_CRITERIA: dict[int, list[tuple[str, bool]]] = {}


def pytest_runtest_logreport(report):
    mark = getattr(report, "_criterion", None)
    if mark is None:
        return
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        ok = report.outcome == "passed" and not hasattr(report, "wasxfail")
        _CRITERIA.setdefault(mark, []).append((report.nodeid.split("::")[-1], ok))


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    m = item.get_closest_marker("criterion")
    if m is not None:
        outcome.get_result()._criterion = m.args[0]


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(_CRITERIA):
        parts = _CRITERIA[k]
        failed = [name for name, ok in parts if not ok]
        line = f"criterion {k}: {'FAIL' if failed else 'PASS'}"
        if failed:
            line += "  (failing: " + ", ".join(failed) + ")"
        terminalreporter.write_line(line)
