import numpy as np
import pytest

from safebandit.geometry import Polytope


def random_polytope(rng, m, extra_rows=4, center=None):
    """Bounded polytope with guaranteed interior: box rows plus random cuts.

    The box rows bound the set; every extra halfspace keeps a ball of
    radius >= 0.3 around the center inside, so the interior is nonempty.
    """
    center = rng.uniform(-0.3, 0.3, m) if center is None else np.asarray(center)
    halfw = rng.uniform(0.6, 1.8, m)
    A = [np.eye(m), -np.eye(m)]
    b = [center + halfw, -(center - halfw)]
    rows = []
    offs = []
    for _ in range(extra_rows):
        a = rng.standard_normal(m)
        a /= np.linalg.norm(a)
        rows.append(a)
        offs.append(a @ center + rng.uniform(0.4, 1.5))
    A = np.vstack(A + [np.array(rows)]) if rows else np.vstack(A)
    b = np.concatenate(b + [np.array(offs)]) if offs else np.concatenate(b)
    return Polytope(A, b)


def unit_square():
    return Polytope(np.array([[1.0, 0.0], [-1.0, 0.0],
                              [0.0, 1.0], [0.0, -1.0]]), np.ones(4))


def simplex_2d():
    # x >= 0, y >= 0, x + y <= 1
    return Polytope(np.array([[-1.0, 0.0], [0.0, -1.0], [1.0, 1.0]]),
                    np.array([0.0, 0.0, 1.0]))


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
