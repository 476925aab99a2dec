"""Brute-force oracles for the one-dimensional Zener quantities.

The Lorentzian pulse h(i tau) = r / (1 - tau**2/theta**2)**3 is integrated by
the midpoint rule on 10**6 panels; the tunneling time comes from mpmath at
30 digits, and the exit-point integral uses ``tau = tau0 - s**2`` on 10**6
midpoint panels.  The printed constants are frozen in the unit tests.
"""

import math

import mpmath
import numpy as np

N = 10**6
R, THETA = 0.01, 0.5


def h(tau):
    return R / (1.0 - (tau / THETA) ** 2) ** 3


def running_integral(tau):
    x = (np.arange(N) + 0.5) * tau / N
    return float(np.sum(h(x)) * tau / N)


def main():
    print(f"I(0.4) = {running_integral(0.4):.15g}")
    mpmath.mp.dps = 30
    hm = lambda s: R / (1 - (s / THETA) ** 2) ** 3  # noqa: E731
    Im = lambda t: mpmath.quad(hm, [0, t])  # noqa: E731
    tau0 = mpmath.findroot(lambda t: t + Im(t) - 1, 0.49)
    t0 = float(tau0)
    # x_exit = 1 - 2 int_0^tau0 P h / sqrt(1 - P**2), tau = tau0 - s**2
    smax = math.sqrt(t0)
    s = (np.arange(N) + 0.5) * smax / N
    tau = t0 - s * s
    # 1 - P = (tau0 - tau) + int_tau^tau0 h; the tail is accumulated panel by
    # panel in sigma (tau' = tau0 - sigma**2) with 4-point Gauss on each panel
    xg, wg = np.polynomial.legendre.leggauss(4)
    edges = np.arange(N + 1) * smax / N

    def panel(a, b):
        m, w = 0.5 * (a + b), 0.5 * (b - a)
        sig = m[:, None] + w[:, None] * xg[None, :]
        return np.sum(wg[None, :] * h(t0 - sig * sig) * 2.0 * sig, axis=1) * w

    cum = np.concatenate([[0.0], np.cumsum(panel(edges[:-1], edges[1:]))])
    tail = cum[:-1] + panel(edges[:-1], s)
    D = (t0 - tau) + tail
    P = 1.0 - D
    integrand = P * h(tau) * 2.0 * s / np.sqrt(D * (2.0 - D))
    x_exit = 1.0 - 2.0 * float(np.sum(integrand) * smax / N)
    print(f"tau0 = {t0:.15g}")
    print(f"x_exit = {x_exit:.15g}")


if __name__ == "__main__":
    main()
