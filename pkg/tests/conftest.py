import numpy as np
import pytest

from hyperball.params import Params
from hyperball import radial


@pytest.fixture(scope="session")
def ground_n4():
    """Critical ground state at (N, p, lam) = (4, 3, 2.1); near-bubble."""
    params = Params(4, 3.0, 2.1)
    return params, radial.find_nodal_solution(0, params)


@pytest.fixture(scope="session")
def solutions_n3():
    """Subcritical nodal family at (3, 3, 0), k = 0..3."""
    params = Params(3, 3.0, 0.0)
    return params, {k: radial.find_nodal_solution(k, params) for k in range(4)}


@pytest.fixture(scope="session")
def ground_n4_sub():
    """Subcritical ground state at (4, 1.5, 2); the HSM image of
    (n, k, eta, t) = (6, 3, 0, 1)."""
    params = Params(4, 1.5, 2.0)
    return params, radial.find_nodal_solution(0, params)


@pytest.fixture(scope="session")
def nodal_n4_sub():
    params = Params(4, 1.5, 2.0)
    return params, radial.find_nodal_solution(1, params)


@pytest.fixture(scope="session")
def ground_grushin():
    """Ground state at the Grushin image of (alpha, k, h) = (1, 1, 3)."""
    params = Params(4, 1.8, 35.0 / 16.0)
    return params, radial.find_nodal_solution(0, params)


@pytest.fixture(scope="session")
def pair_n7():
    """Positive and 1-nodal solutions in the critical window (7, 9/5, 8.8)."""
    params = Params(7, 1.8, 8.8)
    pos = radial.find_nodal_solution(0, params)
    nod = radial.find_nodal_solution(1, params)
    return params, pos, nod


def synthetic_bump(T=8.0, amp=1.0, freq=0.0):
    """Smooth compactly supported radial profile with C^2 contact at T."""
    def f(t):
        s = np.clip(1.0 - (t / T) ** 2, 0.0, None)
        base = amp * s ** 4
        if freq:
            base = base * np.cos(freq * t)
        return base

    def df(t):
        s = np.clip(1.0 - (t / T) ** 2, 0.0, None)
        d = amp * 4.0 * s ** 3 * (-2.0 * t / T ** 2)
        if freq:
            d = d * np.cos(freq * t) - amp * s ** 4 * freq * np.sin(freq * t)
        return d

    return radial.RadialProfile.from_callable(f, df, T, n=4001)
