import mpmath as mp
import numpy as np
import pytest


@pytest.fixture(scope="session")
def mp_tau_moment():
    """Independent high-precision evaluation of E[tau^s] from the sine/Gamma formula."""

    def f(alpha, rho, s, dps=30):
        with mp.workdps(dps):
            a, r, s = mp.mpf(alpha), mp.mpf(rho), mp.mpf(s)
            num = mp.sin(mp.pi / a) * mp.sin(mp.pi * r * a * (s + 1 / a))
            den = mp.sin(mp.pi * r) * mp.sin(mp.pi * (s + 1 / a))
            return float(num / den * mp.gamma(1 - a * s) / mp.gamma(1 - s))

    return f


@pytest.fixture(scope="session")
def mp_kanter_moment():
    """E[K_c^t] by mpmath quadrature of (b_c(u)/kappa_c)^t over (0, 1)."""

    def f(c, t, dps=25):
        with mp.workdps(dps):
            c = mp.mpf(c)
            kap = c ** (-c) * (1 - c) ** (c - 1)

            def b(u):
                return mp.sin(mp.pi * u) / (mp.sin(mp.pi * c * u) ** c * mp.sin(mp.pi * (1 - c) * u) ** (1 - c))

            return float(mp.quad(lambda u: (b(u) / kap) ** t, [0, 0.5, 1]))

    return f


def standard_error_z(x, target):
    x = np.asarray(x, dtype=float)
    return (x.mean() - target) / (x.std(ddof=1) / np.sqrt(x.size))
