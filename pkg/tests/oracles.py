"""Independent reference computations used by the tests.

Nothing here calls into the FFT code paths of the library.
"""

import math

import numpy as np


def direct_dft(values, hbar):
    """O(N^2) per-axis sum u_hat(p) = hbar^{n/2} sum_m u(m) exp(-2 pi i m p / N)."""
    values = np.asarray(values, dtype=complex)
    n = values.ndim
    N = values.shape[0]
    m = np.arange(-N // 2, N // 2)
    W = np.exp(-2j * np.pi * np.outer(m, m) / N)
    out = values
    for axis in range(n):
        out = np.moveaxis(np.tensordot(W, np.moveaxis(out, axis, 0), axes=(1, 0)), 0, axis)
    return out * hbar ** (n / 2)


def fractional_coefficients_1d(alpha, R):
    """Exact a_j, |j| <= R, of (2 sin(pi xi))^{2 alpha} by the Gamma-ratio recurrence."""
    a = np.empty(R + 1)
    a[0] = math.gamma(2 * alpha + 1) / math.gamma(alpha + 1) ** 2
    for j in range(R):
        a[j + 1] = a[j] * (j - alpha) / (j + alpha + 1)
    return np.concatenate([a[:0:-1], a])


def laplacian_kernel(n):
    """Nearest-neighbour stencil 2n at the centre, -1 on the axes, radius 1."""
    k = np.zeros((3,) * n)
    k[(1,) * n] = 2 * n
    for axis in range(n):
        for side in (0, 2):
            idx = [1] * n
            idx[axis] = side
            k[tuple(idx)] = -1.0
    return k


def lattice_symbol_1d(alpha, hbar, xi):
    return hbar ** (-2 * alpha) * (4 * np.sin(np.pi * hbar * xi) ** 2) ** alpha


def brute_force_ode(rate, forcing, u0, T, steps):
    """Classical RK4 for u' = -rate(t) u + forcing(t) on one mode."""
    h = T / steps
    u = complex(u0)
    t = 0.0
    f = lambda t, u: -rate(t) * u + forcing(t)  # noqa: E731
    for _ in range(steps):
        k1 = f(t, u)
        k2 = f(t + h / 2, u + h / 2 * k1)
        k3 = f(t + h / 2, u + h / 2 * k2)
        k4 = f(t + h, u + h * k3)
        u += h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        t += h
    return u
