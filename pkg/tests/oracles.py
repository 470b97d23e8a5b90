"""Independent reference computations the tests check the package against.

Everything here deliberately avoids the code paths under test: trajectories
come from adaptive Runge-Kutta integration, eigenvalues from the companion
matrix, roots from bisection, and the generator blocks from a
finite-difference discretization of the underlying PDE on one eigenfunction.
"""

from __future__ import annotations

import numpy as np
from scipy.integrate import solve_ivp


def rk_mode_evolution(m: np.ndarray, x0: np.ndarray, t: float) -> np.ndarray:
    """High-order adaptive integration of x' = M x up to time t."""
    sol = solve_ivp(
        lambda _, y: m @ y,
        (0.0, t),
        np.asarray(x0, dtype=float),
        method="DOP853",
        rtol=1e-12,
        atol=1e-14,
        dense_output=False,
        t_eval=[t],
    )
    assert sol.success, sol.message
    return sol.y[:, -1]


def rk_scalar_decay(rate: float, y0: float, t: float) -> float:
    """Adaptive integration of y' = -rate * y."""
    sol = solve_ivp(
        lambda _, y: -rate * y,
        (0.0, t),
        [y0],
        method="DOP853",
        rtol=1e-12,
        atol=1e-300,
        t_eval=[t],
    )
    assert sol.success, sol.message
    return float(sol.y[0, -1])


def companion_roots(a2: float, a1: float, a0: float) -> np.ndarray:
    """Cubic roots via the companion-matrix eigenvalue route."""
    return np.roots([1.0, a2, a1, a0])


def bisect_real_root(f, lo: float, hi: float, iterations: int = 200) -> float:
    """Bisection on a bracketing interval; the poor man's root oracle."""
    flo = f(lo)
    assert flo * f(hi) < 0, "interval must bracket a sign change"
    for _ in range(iterations):
        mid = 0.5 * (lo + hi)
        fm = f(mid)
        if fm == 0.0:
            return mid
        if flo * fm < 0:
            hi = mid
        else:
            lo, flo = mid, fm
    return 0.5 * (lo + hi)


def fd_generator_column(
    rho: float,
    a: float,
    b: float,
    c: float,
    d: float,
    eta: float,
    length: float,
    n: int,
    column: int,
    grid_points: int = 4000,
) -> np.ndarray:
    """Column of the per-mode generator from a PDE finite-difference oracle.

    Restricts the coupled system to the n-th sine eigenfunction: puts a unit
    coefficient into component `column` of (u, v, theta), evaluates the PDE
    right-hand side with second-difference Laplacians on a fine interior
    grid, and projects back onto the eigenfunction.  Hinged ends make the
    plain Dirichlet second-difference stencil exact to O(h^2) for both the
    Laplacian and the squared Laplacian of a sine mode.
    """
    h = length / grid_points
    x = np.linspace(0.0, length, grid_points + 1)[1:-1]
    phi = np.sqrt(2.0 / length) * np.sin(n * np.pi * x / length)

    def lap(f: np.ndarray) -> np.ndarray:
        padded = np.concatenate(([0.0], f, [0.0]))
        return (padded[:-2] - 2.0 * padded[1:-1] + padded[2:]) / h**2

    coeffs = np.zeros(3)
    coeffs[column] = 1.0
    u = coeffs[0] * phi
    v = coeffs[1] * phi
    theta = coeffs[2] * phi

    du = v
    dv = (-c * lap(lap(u)) + eta * lap(theta)) / rho
    dtheta = (b * lap(theta) - d * lap(lap(theta)) - eta * lap(v)) / a

    def project(f: np.ndarray) -> float:
        return float(np.trapezoid(f * phi, dx=h))

    return np.array([project(du), project(dv), project(dtheta)])
