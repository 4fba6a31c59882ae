"""Shared fixtures and generators for the test suite."""

from __future__ import annotations

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "suite",
    derandomize=True,
    deadline=None,
    max_examples=60,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("suite")


_ACCEPTANCE_LINES: list[str] = []


def record_acceptance(line: str) -> None:
    """Queue a criterion verdict for the end-of-run summary block."""
    _ACCEPTANCE_LINES.append(line)


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for line in _ACCEPTANCE_LINES:
        terminalreporter.write_line(line)


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20260822)


def random_bloch_vector(rng: np.random.Generator, radius: float = 1.0) -> np.ndarray:
    """Uniform direction, radius scaled toward the surface (cube-root law)."""
    direction = rng.standard_normal(3)
    direction /= np.linalg.norm(direction)
    return direction * radius * rng.random() ** (1.0 / 3.0)


def random_density_matrix(rng: np.random.Generator) -> np.ndarray:
    """Full-rank 2x2 state from a normalized Wishart draw."""
    g = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
    w = g @ g.conj().T
    return w / w.trace()


def random_kraus_set(rng: np.random.Generator, count: int = 3) -> list[np.ndarray]:
    """Random CPTP Kraus set: Gaussian operators renormalized to completeness."""
    ops = [
        rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
        for _ in range(count)
    ]
    total = sum(k.conj().T @ k for k in ops)
    values, vectors = np.linalg.eigh(total)
    inv_root = (vectors / np.sqrt(values)) @ vectors.conj().T
    return [k @ inv_root for k in ops]


def random_cptp_chi(rng: np.random.Generator, count: int = 3) -> np.ndarray:
    from qpt.channels import chi_from_kraus

    return chi_from_kraus(random_kraus_set(rng, count))
