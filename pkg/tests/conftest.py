import numpy as np
import pytest

from covcat.channels import Channel


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)


def random_channel(d: int, kraus_rank: int, rng: np.random.Generator) -> Channel:
    """Random channel from a Haar isometry split into Kraus blocks."""
    g = rng.standard_normal((kraus_rank * d, d)) + 1j * rng.standard_normal((kraus_rank * d, d))
    q, _ = np.linalg.qr(g)
    return Channel([q[k * d:(k + 1) * d, :] for k in range(kraus_rank)])


def s3_standard_images():
    """S3 as permutation matrices restricted to the plane orthogonal to (1,1,1)."""
    import itertools
    perms = list(itertools.permutations(range(3)))
    ones = np.ones((3, 1)) / np.sqrt(3)
    q, _ = np.linalg.qr(np.concatenate([ones, np.eye(3)[:, :2]], axis=1))
    plane = q[:, 1:3]
    images = []
    for p in perms:
        pm = np.zeros((3, 3))
        for j in range(3):
            pm[p[j], j] = 1.0
        images.append((plane.T @ pm @ plane).astype(complex))
    return images
