"""Lagrange-identity functionals and the convexity functional.

Two families of diagnostics live here.

Backward uniqueness.  Along the time-reversed system the quadratic forms

    L1 = 1/2 sum_n (rho |v_n|^2 + c lam_n^2 |u_n|^2 + a |theta_n|^2)
    L2 = 1/2 sum_n (rho |v_n|^2 + c lam_n^2 |u_n|^2 - a |theta_n|^2)

satisfy dL1/dt = + sum_n w_n theta_n^2 and
dL2/dt = - sum_n w_n theta_n^2 - 2 eta sum_n lam_n v_n theta_n with
w_n = b lam_n + d lam_n^2, and the mixture L = L2 + eps*L1 obeys a
Gronwall bound L(t) <= L(0) e^{k* t}.  Zero initial data therefore forces
the zero solution, which is the uniqueness witness.

Convexity / instability (negative elasticity).  With Phi solving

    b Lap Phi - d Lap^2 Phi = a theta(0) + eta Lap u(0)
    (per mode: Phi_n = -(a theta_n(0) - eta lam_n u_n(0)) / w_n)

and Psi = Phi + int_0^t theta ds, the functional

    F(t) = sum_n rho u_n^2 + int_0^t sum_n w_n Psi_n^2 ds + omega (t+t0)^2

has the closed derivatives

    F'(t)  = 2 rho sum u_n v_n + sum w_n Psi_n^2 + 2 omega (t+t0)
    F''(t) = 4 sum rho v_n^2 + 4 int_0^t D ds - 4 E(0) + 2 omega

(the second uses the energy identity), and the Schwarz inequality yields

    F'' F - (F' - nu)^2 >= -2 (omega + E(0)) F,   nu = sum w_n Phi_n^2,

for E(0) <= 0.  Choosing omega = -E(0) and a weight shift t0 large enough
that F'(0) > 2 nu gives the pointwise exponential lower bound

    F(t) >= (F'(0) F(0) / (F'(0) - 2 nu)) exp(((F'(0) - 2 nu)/F(0)) t)
            - 2 nu F(0) / (F'(0) - 2 nu).

Conventions worth noting: the time weight is implemented as
omega*(t+t0)^2, the form consistent with the derivatives 2*omega*(t+t0)
and 2*omega used throughout, and E(0) enters F'' with coefficient 4 - the
value the derivatives of F actually have (verified by finite differences
in the test suite); see FDDOT_E0_COEFFICIENT.  Because Psi(0) = Phi, the
shift condition F'(0) > 2 nu reduces to a closed form and t0 never needs a
numerical search (choose_weight_shift).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ._quadrature import cumulative_integral
from .errors import EpsilonOutOfRange, InsufficientSamples, PreconditionUnmet
from .model import Direction, ModelParams
from .propagator import SpectralState, TrajectorySample

# coefficient of E(0) in the closed form of F''; the Schwarz argument needs
# only F'' >= 4K + 4*int(D) - 4E(0) + 2*omega, which holds with equality
FDDOT_E0_COEFFICIENT = 4.0

WEIGHT_CONVENTION = "omega*(t+t0)^2"

CONVEXITY_TOLERANCE_FACTOR = 1e-8


def _arrays(state: SpectralState) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    lams, x = state.coefficient_arrays()
    if np.iscomplexobj(x):
        raise ValueError("functional diagnostics expect real states")
    return lams, x[0], x[1], x[2]


@dataclass(frozen=True)
class LyapunovSample:
    """L1, L2 and the mixture L = L2 + epsilon*L1 at one time."""

    t: float
    l1: float
    l2: float
    l: float
    epsilon: float


def lagrange_functionals(
    params: ModelParams, state: SpectralState, epsilon: float, t: float = 0.0
) -> LyapunovSample:
    if not 0.0 < epsilon < 1.0:
        raise EpsilonOutOfRange(f"epsilon must be in (0, 1), got {epsilon}")
    lams, u, v, th = _arrays(state)
    mech = params.rho * np.sum(v**2) + params.c * np.sum(lams**2 * u**2)
    thermal = params.a * np.sum(th**2)
    l1 = 0.5 * float(mech + thermal)
    l2 = 0.5 * float(mech - thermal)
    return LyapunovSample(t=t, l1=l1, l2=l2, l=l2 + epsilon * l1, epsilon=epsilon)


def lyapunov_series(
    params: ModelParams, trajectory: Sequence[TrajectorySample], epsilon: float
) -> list[LyapunovSample]:
    return [
        lagrange_functionals(params, s.state, epsilon, t=s.t) for s in trajectory
    ]


@dataclass(frozen=True)
class BackwardIdentityReport:
    """Centered-difference check of the L1/L2 evolution identities.

    Residuals are normalized by the larger of the two analytic right-hand
    side scales; they shrink like dt^2 under grid refinement.
    """

    t: np.ndarray
    dl1_fd: np.ndarray
    dl1_analytic: np.ndarray
    dl2_fd: np.ndarray
    dl2_analytic: np.ndarray
    max_rel_residual: float


def _analytic_rhs(
    params: ModelParams, sample: TrajectorySample, direction: Direction
) -> tuple[float, float]:
    lams, u, v, th = _arrays(sample.state)
    w = params.b * lams + params.d * lams**2
    diss = float(np.sum(w * th**2))
    cross = float(2.0 * params.eta * np.sum(lams * v * th))
    if direction is Direction.BACKWARD:
        return diss, -diss - cross
    return -diss, diss - cross


def verify_backward_identities(
    params: ModelParams,
    trajectory: Sequence[TrajectorySample],
    direction: Direction = Direction.BACKWARD,
) -> BackwardIdentityReport:
    """Compare d(L1)/dt, d(L2)/dt finite differences with the closed forms.

    Works for either orientation; the forward identities carry the
    opposite dissipation sign.
    """
    if len(trajectory) < 3:
        raise InsufficientSamples("identity check needs at least 3 samples")
    series = lyapunov_series(params, trajectory, epsilon=0.5)
    t = np.array([s.t for s in series])
    l1 = np.array([s.l1 for s in series])
    l2 = np.array([s.l2 for s in series])

    # centered three-point derivative, valid on non-uniform grids
    h1 = t[1:-1] - t[:-2]
    h2 = t[2:] - t[1:-1]
    def center(y):
        return (
            -h2 / (h1 * (h1 + h2)) * y[:-2]
            + (h2 - h1) / (h1 * h2) * y[1:-1]
            + h1 / (h2 * (h1 + h2)) * y[2:]
        )

    dl1_fd = center(l1)
    dl2_fd = center(l2)
    rhs = [_analytic_rhs(params, s, direction) for s in trajectory[1:-1]]
    dl1_an = np.array([r[0] for r in rhs])
    dl2_an = np.array([r[1] for r in rhs])
    scale = max(np.max(np.abs(dl1_an), initial=0.0), np.max(np.abs(dl2_an), initial=0.0), 1e-300)
    resid = max(
        np.max(np.abs(dl1_fd - dl1_an), initial=0.0),
        np.max(np.abs(dl2_fd - dl2_an), initial=0.0),
    )
    return BackwardIdentityReport(
        t=t[1:-1],
        dl1_fd=dl1_fd,
        dl1_analytic=dl1_an,
        dl2_fd=dl2_fd,
        dl2_analytic=dl2_an,
        max_rel_residual=float(resid / scale),
    )


@dataclass(frozen=True)
class GronwallReport:
    """Smallest empirical k* with L(t) <= L(0) e^{k* t} along the samples.

    For zero initial data the report instead certifies L == 0.  k_star is
    None when L(0) < 0, where the bound carries no information.
    """

    k_star: float | None
    l0: float
    zero_data: bool
    max_abs_l: float
    epsilon: float


def gronwall_check(
    params: ModelParams, trajectory: Sequence[TrajectorySample], epsilon: float
) -> GronwallReport:
    series = lyapunov_series(params, trajectory, epsilon)
    l = np.array([s.l for s in series])
    t = np.array([s.t for s in series])
    l0 = float(l[0])
    max_abs = float(np.max(np.abs(l)))
    if l0 == 0.0:
        return GronwallReport(None, l0, True, max_abs, epsilon)
    if l0 < 0.0:
        return GronwallReport(None, l0, False, max_abs, epsilon)
    mask = (t > 0) & (l > 0)
    if not np.any(mask):
        return GronwallReport(0.0, l0, False, max_abs, epsilon)
    k = np.max(np.log(l[mask] / l0) / t[mask])
    return GronwallReport(float(max(k, 0.0)), l0, False, max_abs, epsilon)


@dataclass(frozen=True)
class PhiSolution:
    """Per-mode solution of b Lap Phi - d Lap^2 Phi = a theta(0) + eta Lap u(0)."""

    phi: np.ndarray
    nu: float
    residual_max: float


def phi_coefficients(params: ModelParams, initial_state: SpectralState) -> PhiSolution:
    lams, u, _, th = _arrays(initial_state)
    w = params.b * lams + params.d * lams**2
    rhs = params.a * th - params.eta * lams * u
    phi = -rhs / w if lams.size else np.zeros(0)
    residual = np.abs(-w * phi - rhs)
    scale = np.maximum(np.abs(rhs), 1.0)
    return PhiSolution(
        phi=phi,
        nu=float(np.sum(w * phi**2)),
        residual_max=float(np.max(residual / scale, initial=0.0)),
    )


@dataclass(frozen=True)
class ConvexityState:
    """F and its analytic derivatives at one sample time."""

    t: float
    f: float
    fdot: float
    fddot: float
    nu: float
    omega_const: float
    t0: float
    phi: np.ndarray


def convexity_trajectory(
    params: ModelParams,
    trajectory: Sequence[TrajectorySample],
    omega_const: float,
    t0: float,
) -> list[ConvexityState]:
    """Evaluate F, F', F'' along a forward trajectory.

    The running integrals (alpha_n = int theta_n and the Psi and
    dissipation time integrals) are accumulated by Richardson-refined
    Simpson quadrature on the sample grid, keeping the per-mode evolution
    itself exact.  F' and F'' come from the closed forms, not finite
    differences.  Intended for the negative-elasticity regime but runs in
    any regime as a diagnostic.
    """
    if omega_const < 0 or t0 < 0:
        raise ValueError("omega_const and t0 must be nonnegative")
    if len(trajectory) < 3:
        raise InsufficientSamples("convexity functional needs at least 3 samples")

    t = np.array([s.t for s in trajectory])
    lam_list, u0, _, _ = _arrays(trajectory[0].state)
    n_modes = lam_list.size
    u = np.empty((n_modes, t.size))
    v = np.empty((n_modes, t.size))
    th = np.empty((n_modes, t.size))
    for k, sample in enumerate(trajectory):
        _, uk, vk, tk = _arrays(sample.state)
        u[:, k], v[:, k], th[:, k] = uk, vk, tk

    w = params.b * lam_list + params.d * lam_list**2
    sol = phi_coefficients(params, trajectory[0].state)

    alpha = np.stack([cumulative_integral(th[i], t) for i in range(n_modes)]) if n_modes else np.zeros((0, t.size))
    psi = alpha + sol.phi[:, None]
    s_now = np.sum(w[:, None] * psi**2, axis=0)
    q_int = cumulative_integral(s_now, t)
    d_now = np.sum(w[:, None] * th**2, axis=0)
    d_int = cumulative_integral(d_now, t)

    e0 = trajectory[0].energy.total
    shifted = t + t0
    f = params.rho * np.sum(u**2, axis=0) + q_int + omega_const * shifted**2
    fdot = (
        2.0 * params.rho * np.sum(u * v, axis=0)
        + s_now
        + 2.0 * omega_const * shifted
    )
    kinetic2 = params.rho * np.sum(v**2, axis=0)
    fddot = (
        4.0 * kinetic2
        + 4.0 * d_int
        - FDDOT_E0_COEFFICIENT * e0
        + 2.0 * omega_const
    )
    return [
        ConvexityState(
            t=float(t[k]),
            f=float(f[k]),
            fdot=float(fdot[k]),
            fddot=float(fddot[k]),
            nu=sol.nu,
            omega_const=omega_const,
            t0=t0,
            phi=sol.phi,
        )
        for k in range(t.size)
    ]


@dataclass(frozen=True)
class ConvexityReport:
    """Pointwise convexity inequality F'' F - (F'-nu)^2 >= -2(omega+E0) F."""

    min_residual: float
    scale: float
    tolerance: float
    passed: bool
    residuals: np.ndarray


def convexity_residual_check(
    states: Sequence[ConvexityState], e0: float
) -> ConvexityReport:
    f = np.array([s.f for s in states])
    fdot = np.array([s.fdot for s in states])
    fddot = np.array([s.fddot for s in states])
    nu = states[0].nu
    omega = states[0].omega_const
    residuals = fddot * f - (fdot - nu) ** 2 + 2.0 * (omega + e0) * f
    scale = max(
        float(np.max(np.abs(fddot * f) + (fdot - nu) ** 2 + 2.0 * abs(omega + e0) * f)),
        1.0,
    )
    tol = CONVEXITY_TOLERANCE_FACTOR * scale
    min_res = float(np.min(residuals))
    return ConvexityReport(
        min_residual=min_res,
        scale=scale,
        tolerance=tol,
        passed=min_res >= -tol,
        residuals=residuals,
    )


@dataclass(frozen=True)
class InstabilityReport:
    """Pointwise check of the exponential lower bound on F."""

    holds: bool
    min_margin: float
    bound_exponent: float
    bound_coefficient: float
    bound_offset: float
    growth_rate: float
    growth_window: tuple[float, float]


def instability_lower_bound(
    states: Sequence[ConvexityState],
    e0: float,
    growth_window: tuple[float, float] | None = None,
) -> InstabilityReport:
    """Verify F(t) >= C exp(m t) - B pointwise and measure the growth rate.

    Requires E(0) < 0, or E(0) = 0 with F'(0) > 0; and F'(0) > 2 nu (pick
    t0 with choose_weight_shift).  The reported growth rate is half the
    late-window slope of log F, the amplitude-equivalent convention, fitted
    on `growth_window` (default: the last quarter of the samples).
    """
    f0 = states[0].f
    fdot0 = states[0].fdot
    nu = states[0].nu
    zero_tol = 1e-12 * max(1.0, abs(f0))
    if not (e0 < 0 or (abs(e0) <= zero_tol and fdot0 > 0)):
        raise PreconditionUnmet("E(0) < 0 or (E(0) = 0 and Fdot(0) > 0)")
    if not fdot0 > 2.0 * nu:
        raise PreconditionUnmet("Fdot(0) > 2*nu (increase t0 or omega_const)")
    if not f0 > 0:
        raise PreconditionUnmet("F(0) > 0")

    m = (fdot0 - 2.0 * nu) / f0
    coeff = fdot0 * f0 / (fdot0 - 2.0 * nu)
    offset = 2.0 * nu * f0 / (fdot0 - 2.0 * nu)
    t = np.array([s.t for s in states])
    f = np.array([s.f for s in states])
    bound = coeff * np.exp(m * t) - offset
    margin = f - bound
    min_margin = float(np.min(margin / np.maximum(np.abs(bound), 1.0)))
    holds = bool(np.min(margin) >= -1e-12 * np.max(np.abs(bound)))

    if growth_window is None:
        growth_window = (float(t[0] + 0.75 * (t[-1] - t[0])), float(t[-1]))
    lo, hi = growth_window
    mask = (t >= lo) & (t <= hi) & (f > 0)
    if np.count_nonzero(mask) < 2:
        raise InsufficientSamples("growth window contains fewer than 2 samples")
    slope = np.polyfit(t[mask], np.log(f[mask]), 1)[0]
    return InstabilityReport(
        holds=holds,
        min_margin=min_margin,
        bound_exponent=float(m),
        bound_coefficient=float(coeff),
        bound_offset=float(offset),
        growth_rate=float(slope / 2.0),
        growth_window=(lo, hi),
    )


def choose_weight_shift(
    params: ModelParams,
    initial_state: SpectralState,
    omega_const: float,
    pad: float = 1.0,
    t0_max: float | None = None,
) -> float:
    """Smallest comfortable t0 making F'(0) > 2 nu.

    Psi(0) = Phi gives F'(0) = 2 rho <u0, v0> + nu + 2 omega t0 in closed
    form, so the shift is solved for directly instead of searched.  Raises
    PreconditionUnmet when no shift can work (omega_const = 0 with
    insufficient initial cross term) or when the needed shift exceeds
    t0_max.
    """
    if omega_const < 0:
        raise ValueError("omega_const must be nonnegative")
    _, u0, v0, _ = _arrays(initial_state)
    cross = 2.0 * params.rho * float(np.sum(u0 * v0))
    sol = phi_coefficients(params, initial_state)
    needed = sol.nu - cross  # require 2*omega*t0 > needed
    if omega_const == 0.0:
        if needed < 0:
            return 0.0
        raise PreconditionUnmet(
            "Fdot(0) > 2*nu is unreachable with omega_const = 0"
        )
    t0 = max(0.0, needed / (2.0 * omega_const)) + pad
    if t0_max is not None and t0 > t0_max:
        raise PreconditionUnmet(f"required t0 {t0} exceeds t0_max {t0_max}")
    return t0
