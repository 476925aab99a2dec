"""Brute-force oracle for the enhanced exponent of the reference barrier.

Independent of the package: the potential and its gradient are written out
by hand, trajectories of the imaginary-time Newton equation are shot
backwards from rest on the boundary of B until they hit the wall, and the
Jacobi length and the wall phase are summed on 10**6-node grids.

Run with ``python3 tests/oracles/enhanced_reference_oracle.py``; the printed
constants are frozen in ``tests/test_enhanced_2d.py``.
"""

import numpy as np
from scipy import integrate, optimize

LAM, EPS, E = 3.0, 0.5, 1.0
E0 = E + EPS
N = 10**6


def V(x, y):
    return 4.0 - (x - 1.5) ** 2 + 0.125 * y * y + LAM * np.exp(-2 * x * x - 2 * y * y)


def gradV(x, y):
    b = LAM * np.exp(-2 * x * x - 2 * y * y)
    return -2.0 * (x - 1.5) - 4.0 * x * b, 0.25 * y - 4.0 * y * b


def wall(y):
    return 0.125 * y * y + LAM * np.exp(-2 * y * y) - EPS


def x_B(y):
    return optimize.brentq(lambda x: V(x, y) - E0, 2.0, 5.0, xtol=1e-15)


def shoot(y_end):
    """Brake orbit from (x_B(y_end), y_end) back to the wall x = 0."""

    def rhs(t, s):
        gx, gy = gradV(s[0], s[1])
        return [s[2], s[3], gx, gy]

    hit = lambda t, s: s[0]  # noqa: E731
    hit.terminal, hit.direction = True, -1
    sol = integrate.solve_ivp(rhs, (0, 50), [x_B(y_end), y_end, 0.0, 0.0], method="DOP853", rtol=1e-13, atol=1e-14, events=hit, dense_output=True)
    return sol


def jacobi_length(sol):
    """(2) * sum of sqrt(2 (V - E0)) |dr| on N segments of the trajectory."""
    tau = np.linspace(0.0, sol.t_events[0][0], N + 1)
    x, y = sol.sol(tau)[:2]
    xm, ym = 0.5 * (x[1:] + x[:-1]), 0.5 * (y[1:] + y[:-1])
    dl = np.hypot(np.diff(x), np.diff(y))
    return 2.0 * np.sum(np.sqrt(2.0 * np.maximum(V(xm, ym) - E0, 0.0)) * dl)


def wall_roots():
    y = np.linspace(-4, 4, 80001)
    f = wall(y)
    idx = np.flatnonzero(f[:-1] * f[1:] < 0)
    return [optimize.brentq(wall, y[i], y[i + 1], xtol=1e-15) for i in idx]


def main():
    r = wall_roots()
    # roots: -b, -a, a, b; region A is the band [a, b]
    y0, y1 = r[1], r[2]
    theta = (np.arange(N) + 0.5) * np.pi / N
    yy = 0.5 * (y0 + y1) - 0.5 * (y1 - y0) * np.cos(theta)
    X = np.sum(np.sqrt(2.0 * np.maximum(wall(yy), 0.0)) * 0.5 * (y1 - y0) * np.sin(theta)) * np.pi / N

    def miss_f(ye):
        return shoot(ye).y_events[0][0][1] - y0

    ye = optimize.brentq(miss_f, -1.2, -0.4, xtol=1e-13)
    A_fB = jacobi_length(shoot(ye))

    def miss_normal(ye):
        # perpendicular to the wall: no y velocity on arrival
        return shoot(ye).y_events[0][0][3]

    ye_n = optimize.brentq(miss_normal, 0.4, 1.2, xtol=1e-13)
    A0 = jacobi_length(shoot(ye_n))
    print(f"y0 = {y0:.15g}  y1 = {y1:.15g}")
    print(f"X = {X:.15g}")
    print(f"A0(f->B) = {A_fB:.15g}  (end y = {ye:.12g})")
    print(f"A0(A->B) = {A0:.15g}  (end y = {ye_n:.12g})")
    print(f"A1 = {A_fB - 2 * X:.15g}")


if __name__ == "__main__":
    main()
