import numpy as np
import pytest

from coep.linalg_core import DEFAULT_TOLERANCES

SQRT_HALF = 1 / np.sqrt(2)


@pytest.fixture
def cfg():
    return DEFAULT_TOLERANCES


@pytest.fixture
def nilpotent():
    """E = [[0, 1], [0, 0]] and its Moore-Penrose inverse."""
    return np.array([[0, 1], [0, 0]], dtype=complex), np.array([[0, 0], [1, 0]], dtype=complex)


@pytest.fixture
def oblique():
    """a = u v* with u = (1, 0), v = (1, 1)/sqrt(2), and a† = v u*."""
    u = np.array([1, 0], dtype=complex)
    v = np.array([1, 1], dtype=complex) * SQRT_HALF
    return np.outer(u, v.conj()), np.outer(v, u.conj())


@pytest.fixture
def projection():
    """diag(1, 0), its own Moore-Penrose inverse."""
    a = np.diag([1, 0]).astype(complex)
    return a, a.copy()


@pytest.fixture
def write_json(tmp_path):
    def write(name, text):
        path = tmp_path / name
        path.write_text(text, encoding="utf-8")
        return str(path)

    return write
