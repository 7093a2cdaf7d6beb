from __future__ import annotations

import numpy as np
import pytest

from blockreg.data import GenotypeMatrix, MarkerMap, validate_dataset

# one line per acceptance criterion, printed at the end of the run
AC_LINES: dict = {}


def report(name: str, ok: bool, detail: str) -> None:
    AC_LINES[name] = f"{name} {'PASS' if ok else 'FAIL'}: {detail}"


def pytest_terminal_summary(terminalreporter):
    if AC_LINES:
        terminalreporter.section("acceptance criteria")
        for name in sorted(AC_LINES, key=lambda s: int(s.split("-")[1])):
            terminalreporter.write_line(AC_LINES[name])


def make_dataset(N=30, J=6, seed=0, causal=(), beta=2.0, spacing=1.0, rho=0.1):
    rng = np.random.default_rng(seed)
    while True:
        G = rng.integers(0, 3, size=(N, J))
        if np.all(G.std(axis=0) > 0):
            break
    b = np.zeros(J)
    b[list(causal)] = beta
    y = G @ b + rng.normal(size=N)
    ids = tuple(f"m{j}" for j in range(J))
    return validate_dataset(
        GenotypeMatrix(G, ids, tuple(f"i{i}" for i in range(N))),
        MarkerMap(np.arange(J) * spacing, np.full(J, rho)),
        y,
    )


@pytest.fixture
def small_dataset():
    return make_dataset()
