import numpy as np
import pytest

from msnt.constitutive import MixtureParams


def make_params(n=2, m=None, b=None, c_w=1.5, kappa0=1.0, kappa2=1.0,
                lam=0.0, theta0=1.0, epsilon=0.0):
    if m is None:
        m = np.linspace(1.0, 2.0, n)
    if b is None:
        b = np.full((n, n), 1.0)
        np.fill_diagonal(b, 0.0)
    return MixtureParams(n=n, m=np.asarray(m, dtype=float),
                         b=np.asarray(b, dtype=float), c_w=c_w,
                         kappa0=kappa0, kappa2=kappa2, lam=lam,
                         theta0=theta0, epsilon=epsilon)


def random_params(rng, n=None, b_range=(0.1, 10.0), m_range=(0.5, 3.0), **kw):
    if n is None:
        n = int(rng.integers(2, 7))
    b = rng.uniform(*b_range, (n, n))
    b = 0.5 * (b + b.T)
    np.fill_diagonal(b, 0.0)
    m = rng.uniform(*m_range, n)
    return make_params(n=n, m=m, b=b, **kw)


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
