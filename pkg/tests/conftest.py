import numpy as np
import pytest


def random_rotation(rng: np.random.Generator, d: int) -> np.ndarray:
    """Haar-ish random rotation via QR of a Gaussian matrix."""
    m = rng.normal(size=(d, d))
    q, r = np.linalg.qr(m)
    q *= np.sign(np.diag(r))
    if np.linalg.det(q) < 0:
        q[:, 0] = -q[:, 0]
    return q


def random_cloud(rng: np.random.Generator, n: int, d: int, scale: float = 1.0) -> np.ndarray:
    return rng.normal(size=(n, d)) * scale


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
