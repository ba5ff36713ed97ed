import math

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from conefronts import shapes
from conefronts.evolution import Scenario, run

settings.register_profile(
    "default",
    deadline=None,
    max_examples=30,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("default")


@pytest.fixture(scope="session")
def disk256():
    return shapes.disk(1.0, 256)


@pytest.fixture(scope="session")
def disk512():
    return shapes.disk(1.0, 512)


@pytest.fixture(scope="session")
def rsquare():
    return shapes.rounded_square_uniform(2.0, 0.1, 256)


@pytest.fixture(scope="session")
def sandpile_disk_traj():
    return run(Scenario("sandpile_1", (shapes.disk(1.0, 256),), 1.0, 2.0))


@pytest.fixture(scope="session")
def molding_disk_traj():
    return run(Scenario("molding", (shapes.disk(1.0, 256),), 0.0, 1.0))


@pytest.fixture(scope="session")
def sandpile_square_traj():
    return run(Scenario("sandpile_1", (shapes.rounded_square_uniform(2.0, 0.1, 256),), 1.0, 1.5))


@pytest.fixture(scope="session")
def molding_square_traj():
    return run(Scenario("molding", (shapes.rounded_square_uniform(2.0, 0.05, 256),), 0.0, 0.5))


def lens_area(r: float, d: float) -> float:
    return 2.0 * r * r * math.acos(d / (2.0 * r)) - 0.5 * d * math.sqrt(4.0 * r * r - d * d)


def random_convex(rng: np.random.Generator, n_points: int = 40):
    """Convex hull of random points, resampled so it has enough markers."""
    from scipy.spatial import ConvexHull

    from conefronts.geometry import ConvexFront

    pts = rng.normal(size=(n_points, 2)) * rng.uniform(0.5, 2.0, size=2)
    hull = pts[ConvexHull(pts).vertices]
    # subdivide every edge so the polyline has >= 64 markers
    out = []
    for i in range(len(hull)):
        a, b = hull[i], hull[(i + 1) % len(hull)]
        k = max(1, 64 // len(hull))
        out.extend(a + (b - a) * j / k for j in range(k))
    return ConvexFront(np.array(out))


def polygon_integral(front, phi) -> float:
    """Exact integral of a polynomial TestFunction over the polygon by Green's theorem.

    int x^i y^j dA = oint x^(i+1) y^j / (i+1) dy, and Gauss-Legendre with
    5 nodes is exact for the degree <= 4 integrand along each edge.
    """
    c = phi.params["coeffs"]
    m = front.markers
    nxt = np.roll(m, -1, axis=0)
    x, w = np.polynomial.legendre.leggauss(5)
    x, w = 0.5 * (x + 1.0), 0.5 * w
    p = m[:, None, :] + (nxt - m)[:, None, :] * x[None, :, None]
    dy = (nxt - m)[:, 1]
    total = 0.0
    for i in range(4):
        for j in range(4 - i):
            if c[i, j]:
                total += c[i, j] * float(np.sum((p[..., 0] ** (i + 1) * p[..., 1] ** j / (i + 1)) @ w * dy))
    return total
