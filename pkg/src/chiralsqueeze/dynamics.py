"""Time-domain propagation of the 6x6 quadrature covariance matrix.

The effective model uses the constant drift of the sideband-engineered
Hamiltonian. The full model keeps the exact rotating-frame phase factors of
the two-tone drive (no Bessel truncation, no rotating-wave approximation),
so comparing the two checks the effective description directly.

For commensurate drive tones the full-model steady state is obtained from
the one-period monodromy map: with Phi = V(T) response to V(0) and Q the
noise accumulated over a period, the periodic orbit solves
V = Phi V Phi^T + Q. This avoids integrating through the transient.
"""

from __future__ import annotations

import io
import math
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from functools import reduce
from pathlib import Path
from typing import Callable

import numpy as np
from scipy.integrate import solve_ivp
from scipy.optimize import brentq

from .errors import (
    ChiralSqueezeError,
    DegenerateDrive,
    DetunedSideband,
    IncommensurateDrive,
    NonPhysicalInitialState,
    StepSizeUnderflow,
    UnstableDrift,
)
from .floquet import bessel_j, effective_couplings, rwa_margin, sideband_conditions
from .gaussian import mode_matrix, physicality_margin, to_quadrature, upper_triangle_labels
from .model import EffectiveParams, PhysicalParams
from .spectra import build_linear_model, lyapunov_steady_state

EFFECTIVE_HORIZON = 40.0
TRANSIENT_CUTOFF = 10.0
WINDOW_PERIODS = 50


@dataclass(frozen=True)
class DtPolicy:
    """Step control for the embedded RK4(5) integrator.

    ``max_step=None`` lets the propagator pick its default (unbounded for the
    effective model, 1/20 of the fastest phase period for the full model).
    """

    rtol: float = 1e-9
    atol: float = 1e-12
    max_step: float | None = None
    samples: int = 201


@dataclass
class CovarianceTrajectory:
    times: np.ndarray
    covariances: np.ndarray
    model_kind: str
    rtol: float = 1e-9

    @property
    def final(self) -> np.ndarray:
        return self.covariances[-1]

    def physicality_margins(self) -> np.ndarray:
        return np.array([physicality_margin(V) for V in self.covariances])

    def symmetry_error(self) -> float:
        return float(np.max(np.abs(self.covariances - np.swapaxes(self.covariances, 1, 2))))

    def to_csv(self, path=None) -> str:
        iu = np.triu_indices(6)
        buf = io.StringIO()
        buf.write(",".join(["t"] + upper_triangle_labels()) + "\n")
        for t, V in zip(self.times, self.covariances):
            buf.write(",".join(f"{x:.12g}" for x in (t, *V[iu])) + "\n")
        text = buf.getvalue()
        if path is not None:
            Path(path).write_text(text)
        return text


def _check_initial(V0) -> np.ndarray:
    V0 = np.eye(6) if V0 is None else np.array(V0, dtype=float)
    if V0.shape != (6, 6) or not np.all(np.isfinite(V0)):
        raise NonPhysicalInitialState("initial covariance must be a finite 6x6 matrix")
    if np.max(np.abs(V0 - V0.T)) > 1e-12 * max(1.0, np.max(np.abs(V0))):
        raise NonPhysicalInitialState("initial covariance is not symmetric")
    if physicality_margin(V0) < -1e-10:
        raise NonPhysicalInitialState("initial covariance violates V + i Omega >= 0")
    return 0.5 * (V0 + V0.T)


def _covariance_rhs(drift: Callable[[float], np.ndarray], D: np.ndarray):
    def rhs(t, y):
        V = y.reshape(6, 6)
        AV = drift(t) @ V
        # AV + (AV)^T keeps V exactly symmetric through every RK stage
        return (AV + AV.T + D).reshape(-1)

    return rhs


def _integrate(rhs, y0, t_span, policy: DtPolicy, max_step: float, t_eval=None, dense=False):
    sol = solve_ivp(
        rhs,
        t_span,
        y0,
        method="RK45",
        rtol=policy.rtol,
        atol=policy.atol,
        max_step=max_step,
        t_eval=t_eval,
        dense_output=dense,
    )
    if sol.status != 0:
        raise StepSizeUnderflow(sol.message)
    return sol


def _trajectory(sol, kind: str, policy: DtPolicy) -> CovarianceTrajectory:
    covs = sol.y.T.reshape(-1, 6, 6)
    covs = 0.5 * (covs + np.swapaxes(covs, 1, 2))
    return CovarianceTrajectory(sol.t, covs, kind, policy.rtol)


def slowest_decay_rate(eff: EffectiveParams) -> float:
    eig = np.linalg.eigvals(build_linear_model(eff).drift)
    top = eig.real.max()
    if top >= 0:
        raise UnstableDrift(f"effective drift has max Re lambda = {top:.4g} >= 0")
    return float(-top)


def propagate_effective(
    eff: EffectiveParams,
    V0=None,
    t_end: float | None = None,
    dt_policy: DtPolicy | None = None,
) -> CovarianceTrajectory:
    """Integrate dV/dt = A V + V A^T + D with the constant effective drift.

    ``t_end`` defaults to 40 / min|Re lambda(A)|, long enough for the result
    to agree with the Lyapunov steady state.
    """
    policy = dt_policy or DtPolicy()
    V0 = _check_initial(V0)
    rate = slowest_decay_rate(eff)
    if t_end is None:
        t_end = EFFECTIVE_HORIZON / rate
    model = build_linear_model(eff)
    A = model.drift
    rhs = _covariance_rhs(lambda t: A, model.diffusion)
    max_step = policy.max_step if policy.max_step is not None else np.inf
    t_eval = np.linspace(0.0, t_end, policy.samples)
    sol = _integrate(rhs, V0.reshape(-1), (0.0, t_end), policy, max_step, t_eval)
    return _trajectory(sol, "effective", policy)


# ---------------------------------------------------------------------------
# full Floquet model


@dataclass(frozen=True)
class FullDriveWaveform:
    """Phase factors of the exact rotating-frame coupling.

    ``phase(t) = omega_m t + xi_1 sin(omega_d1 t) + xi_2 sin(omega_d2 t + theta)``;
    the cavity operators carry exp(-/+ i omega_0 t).
    """

    params: PhysicalParams
    xi_1: float = field(init=False)
    xi_2: float = field(init=False)

    def __post_init__(self):
        p = self.params
        object.__setattr__(self, "xi_1", _index(p.Omega_1, p.omega_d1))
        object.__setattr__(self, "xi_2", _index(p.Omega_2, p.omega_d2))

    def phase(self, t):
        p = self.params
        return p.omega_m * t + self.xi_1 * np.sin(p.omega_d1 * t) + self.xi_2 * np.sin(p.omega_d2 * t + p.theta)

    def frequencies(self) -> list[float]:
        """Angular frequencies present in the drift."""
        p = self.params
        out = [abs(p.omega_m - p.omega_0), p.omega_m + p.omega_0]
        if self.xi_1:
            out.append(abs(p.omega_d1))
        if self.xi_2:
            out.append(abs(p.omega_d2))
        return [f for f in out if f > 0]


def _index(amplitude: float, frequency: float) -> float:
    if frequency == 0:
        if amplitude == 0:
            return 0.0
        raise DegenerateDrive("nonzero drive amplitude at zero drive frequency")
    return amplitude / frequency


def full_drift(params: PhysicalParams) -> Callable[[float], np.ndarray]:
    """A(t) for the exact rotating-frame interaction with cavity and magnon damping.

    Coupling coefficients are u = g exp(i psi_1) on m^dag alpha and
    v = g exp(i psi_2) on m^dag alpha^dag with psi_1,2 = phase(t) -/+ omega_0 t;
    A(t) is real-linear in them, so it is assembled from four fixed matrices.
    """
    wave = FullDriveWaveform(params)
    g = (params.g_a, params.g_b)
    ig = (1j * params.g_a, 1j * params.g_b)
    zero = (0.0, 0.0)
    damping = to_quadrature(mode_matrix(zero, zero, params.kappa, params.gamma_m))
    u_re = to_quadrature(mode_matrix(g, zero, 0.0, 0.0))
    u_im = to_quadrature(mode_matrix(ig, zero, 0.0, 0.0))
    v_re = to_quadrature(mode_matrix(zero, g, 0.0, 0.0))
    v_im = to_quadrature(mode_matrix(zero, ig, 0.0, 0.0))
    w0 = params.omega_0

    def drift(t: float) -> np.ndarray:
        phi = wave.phase(t)
        p1 = phi - w0 * t
        p2 = phi + w0 * t
        return damping + math.cos(p1) * u_re + math.sin(p1) * u_im + math.cos(p2) * v_re + math.sin(p2) * v_im

    return drift


def _diffusion(params: PhysicalParams) -> np.ndarray:
    n = 2 * params.n_th + 1
    k, gm = params.kappa, params.gamma_m
    return n * np.diag([k, k, k, k, gm, gm])


def default_max_step(params: PhysicalParams) -> float:
    return 2 * math.pi / (20 * (abs(params.omega_m) + abs(params.omega_0)))


def propagate_full(
    params: PhysicalParams,
    V0=None,
    t_end: float = 10.0,
    dt_policy: DtPolicy | None = None,
    t_eval=None,
) -> CovarianceTrajectory:
    """Integrate the covariance under the full time-dependent drift.

    Returns ``dt_policy.samples`` evenly spaced samples (or ``t_eval``),
    micromotion included.
    """
    policy = dt_policy or DtPolicy()
    V0 = _check_initial(V0)
    rhs = _covariance_rhs(full_drift(params), _diffusion(params))
    max_step = policy.max_step if policy.max_step is not None else default_max_step(params)
    if t_eval is None:
        t_eval = np.linspace(0.0, t_end, policy.samples)
    sol = _integrate(rhs, V0.reshape(-1), (0.0, t_end), policy, max_step, t_eval)
    return _trajectory(sol, "full_floquet", policy)


def common_period(frequencies, max_denominator: int = 1000, rtol: float = 1e-9) -> float | None:
    """Shortest T with every frequency * T a multiple of 2 pi, or None."""
    freqs = [f for f in frequencies if f > 0]
    if not freqs:
        return None
    ref = min(freqs)
    fracs = []
    for f in freqs:
        ratio = f / ref
        frac = Fraction(ratio).limit_denominator(max_denominator)
        if abs(float(frac) - ratio) > rtol * ratio:
            return None
        fracs.append(frac)
    lcm_den = reduce(lambda a, b: a * b // math.gcd(a, b), (fr.denominator for fr in fracs))
    numerators = [fr.numerator * (lcm_den // fr.denominator) for fr in fracs]
    base = ref * reduce(math.gcd, numerators) / lcm_den
    return 2 * math.pi / base


@dataclass
class FloquetSteadyState:
    """Periodic steady state of the full model.

    ``average`` is the covariance averaged over one period ``period``;
    ``micromotion`` is the largest entrywise excursion from it.
    """

    average: np.ndarray
    start: np.ndarray
    period: float
    micromotion: float
    trajectory: CovarianceTrajectory
    commensurate: bool = True


def floquet_steady_state(
    params: PhysicalParams,
    dt_policy: DtPolicy | None = None,
    window_periods: int = WINDOW_PERIODS,
) -> FloquetSteadyState:
    policy = dt_policy or DtPolicy()
    wave = FullDriveWaveform(params)
    drift = full_drift(params)
    D = _diffusion(params)
    max_step = policy.max_step if policy.max_step is not None else default_max_step(params)
    period = common_period(wave.frequencies())

    if period is None:
        return _windowed_steady_state(params, policy, wave, window_periods)

    def monodromy_rhs(t, y):
        A = drift(t)
        Phi = y[:36].reshape(6, 6)
        AQ = A @ y[36:].reshape(6, 6)
        return np.concatenate([(A @ Phi).reshape(-1), (AQ + AQ.T + D).reshape(-1)])

    y0 = np.concatenate([np.eye(6).reshape(-1), np.zeros(36)])
    sol = _integrate(monodromy_rhs, y0, (0.0, period), policy, max_step)
    Phi = sol.y[:36, -1].reshape(6, 6)
    Q = sol.y[36:, -1].reshape(6, 6)
    if np.max(np.abs(np.linalg.eigvals(Phi))) >= 1.0:
        raise UnstableDrift("one-period monodromy has a multiplier outside the unit circle")
    # periodic orbit: V = Phi V Phi^T + Q
    V_start = np.linalg.solve(np.eye(36) - np.kron(Phi, Phi), Q.reshape(-1)).reshape(6, 6)
    V_start = 0.5 * (V_start + V_start.T)

    cov_rhs = _covariance_rhs(drift, D)

    def averaged_rhs(t, y):
        return np.concatenate([cov_rhs(t, y[:36]), y[:36]])

    t_eval = np.linspace(0.0, period, policy.samples)
    y0 = np.concatenate([V_start.reshape(-1), np.zeros(36)])
    sol = _integrate(averaged_rhs, y0, (0.0, period), policy, max_step, t_eval)
    average = sol.y[36:, -1].reshape(6, 6) / period
    average = 0.5 * (average + average.T)
    covs = sol.y[:36].T.reshape(-1, 6, 6)
    covs = 0.5 * (covs + np.swapaxes(covs, 1, 2))
    traj = CovarianceTrajectory(sol.t, covs, "full_floquet", policy.rtol)
    micromotion = float(np.max(np.abs(covs - average)))
    return FloquetSteadyState(average, V_start, period, micromotion, traj, True)


def _windowed_steady_state(params, policy, wave, window_periods) -> FloquetSteadyState:
    slowest = min(wave.frequencies())
    window = window_periods * 2 * math.pi / slowest
    warnings.warn(
        f"drive tones not commensurate; averaging over {window_periods} periods of the slowest tone",
        IncommensurateDrive,
        stacklevel=3,
    )
    rate = 0.5 * min(params.kappa, params.gamma_m)
    try:
        rate = slowest_decay_rate(effective_couplings(params))
    except (ChiralSqueezeError, ValueError):
        pass
    t_start = TRANSIENT_CUTOFF / rate
    n = max(policy.samples, 50 * window_periods)
    t_eval = np.linspace(t_start, t_start + window, n)
    traj = propagate_full(params, None, t_start + window, policy, t_eval=t_eval)
    average = np.trapezoid(traj.covariances, traj.times, axis=0) / window
    average = 0.5 * (average + average.T)
    micromotion = float(np.max(np.abs(traj.covariances - average)))
    return FloquetSteadyState(average, traj.covariances[0], window, micromotion, traj, False)


@dataclass
class RwaReport:
    max_abs_diff: float
    relative_diff: float
    frobenius_diff: float
    micromotion: float
    rwa_ratio: float
    detuned: bool
    full_average: np.ndarray = field(repr=False)
    effective: np.ndarray = field(repr=False)


def compare_rwa(params: PhysicalParams, dt_policy: DtPolicy | None = None) -> RwaReport:
    """Full-model period-averaged steady state against the effective Lyapunov state.

    ``relative_diff`` is max|Delta V_ij| / max|V_eff,ij|.
    """
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        detuned = not sideband_conditions(params, warn=False).matched
        eff = effective_couplings(params)
    if detuned:
        warnings.warn("comparing against an effective model with detuned sidebands", DetunedSideband, stacklevel=2)
    V_eff = lyapunov_steady_state(build_linear_model(eff))
    full = floquet_steady_state(params, dt_policy)
    diff = full.average - V_eff
    max_abs = float(np.max(np.abs(diff)))
    return RwaReport(
        max_abs_diff=max_abs,
        relative_diff=max_abs / float(np.max(np.abs(V_eff))),
        frobenius_diff=float(np.linalg.norm(diff)),
        micromotion=full.micromotion,
        rwa_ratio=rwa_margin(params).ratio,
        detuned=detuned,
        full_average=full.average,
        effective=V_eff,
    )


def validation_set(scale: float = 1.0, epsilon: float = 0.95, G_a: float = 0.5) -> PhysicalParams:
    """Scaled-down parameter point for checking the effective model in time domain.

    Frequencies in units of gamma_m: omega_0 = 200, omega_m = 300 and tones on
    the red/blue sidebands, xi_1 = 0.4, xi_2 tuned so the ratio equals
    ``epsilon`` and g_a tuned so |G_a| equals ``G_a``; ``scale`` multiplies
    every frequency.
    """
    xi_1 = 0.4
    target = epsilon * bessel_j(1, xi_1) / bessel_j(0, xi_1)
    xi_2 = brentq(lambda x: bessel_j(1, x) / bessel_j(0, x) - target, 1e-6, 2.0, xtol=1e-15, rtol=1e-15)
    g_a = G_a / abs(bessel_j(-1, xi_1) * bessel_j(0, xi_2))
    base = PhysicalParams(
        omega_m=300.0,
        omega_0=200.0,
        g_a=g_a,
        g_b=0.0,
        Omega_1=xi_1 * 100.0,
        Omega_2=xi_2 * 500.0,
        omega_d1=100.0,
        omega_d2=500.0,
        theta=0.0,
        kappa_0=0.05,
        kappa_ex=2.5,
        gamma_m=1.0,
    )
    return base.scaled_frequencies(scale) if scale != 1.0 else base


def rwa_scaling_study(params: PhysicalParams, factors=(1, 2, 4, 8), dt_policy=None) -> list[tuple[float, RwaReport]]:
    return [(f, compare_rwa(params.scaled_frequencies(f), dt_policy)) for f in factors]

