"""Output squeezing spectra of the chiral cavity-magnon emitter.

Two independent routes are provided:

* closed-form rational expressions for the general (two cavity modes
  coupled) and ideal-chirality cases, and
* a numeric oracle that solves the Langevin equations in the doubled
  frequency space (operators at omega paired with daggers at -omega) and
  contracts the resulting input-output coefficients with the vacuum or
  thermal correlators.

Spectra are normalized so that vacuum gives S = 1, and F = -10 log10 S.
"""

from __future__ import annotations

import io
from dataclasses import dataclass, field
from pathlib import Path
from typing import NamedTuple

import numpy as np

from .errors import NonIdealChirality, NonPositiveSpectrum, SingularSystem, UnstableDrift, UnstableRegime
from .floquet import hybridized_coupling
from .gaussian import (
    T_MODES,
    _mode_to_quadrature,
    mode_matrix,
    single_mode_squeeze,
    to_quadrature,
)
from .model import EffectiveParams, NoiseChannel, noise_channels

DEFAULT_GRID = (-15.0, 15.0, 2001)
CSV_HEADER = "omega_over_gamma_m,S_a,S_b,F_a_db,F_b_db,provenance"

PROVENANCES = ("closed_form_general", "closed_form_ideal", "numeric_oracle")


def default_grid() -> np.ndarray:
    start, stop, count = DEFAULT_GRID
    return np.linspace(start, stop, count)


# ---------------------------------------------------------------------------
# linear model


@dataclass(frozen=True)
class LinearModel:
    """Gaussian Langevin system dx/dt = A x + B xi in quadrature coordinates.

    ``mode_drift`` and ``mode_input`` are the same system in the
    (a, b, m, a^dag, b^dag, m^dag) basis, used by the frequency-domain oracle.
    """

    drift: np.ndarray
    diffusion: np.ndarray
    input_matrix: np.ndarray
    channels: tuple
    mode_drift: np.ndarray = field(repr=False)
    mode_input: np.ndarray = field(repr=False)


def _effective_uv(eff: EffectiveParams):
    phase = eff.epsilon * np.exp(-1j * eff.theta)
    u = (eff.G_a, eff.G_b)
    v = (eff.G_a * phase, eff.G_b * phase)
    return u, v


def _mode_input(channels: list[NoiseChannel]) -> np.ndarray:
    rows = {"a": 0, "b": 1, "m": 2}
    n_ch = len(channels)
    B = np.zeros((6, 2 * n_ch), dtype=complex)
    for j, ch in enumerate(channels):
        B[rows[ch.mode], j] = np.sqrt(ch.rate)
        B[rows[ch.mode] + 3, j + n_ch] = np.sqrt(ch.rate)
    return B


def build_linear_model(eff: EffectiveParams) -> LinearModel:
    u, v = _effective_uv(eff)
    M = mode_matrix(u, v, eff.kappa, eff.gamma_m)
    channels = noise_channels(eff)
    Bc = _mode_input(channels)
    B = to_quadrature(Bc, T_MODES, _mode_to_quadrature(len(channels)))
    # each input quadrature carries symmetrized noise (2n + 1)
    occupations = np.repeat([2 * ch.occupation + 1 for ch in channels], 2)
    D = B @ np.diag(occupations) @ B.T
    return LinearModel(
        drift=to_quadrature(M),
        diffusion=0.5 * (D + D.T),
        input_matrix=B,
        channels=tuple(channels),
        mode_drift=M,
        mode_input=Bc,
    )


class StabilityReport(NamedTuple):
    epsilon_condition: bool
    max_real_eigenvalue: float
    numeric_stable: bool

    @property
    def stable(self) -> bool:
        return self.epsilon_condition and self.numeric_stable

    @property
    def consistent(self) -> bool:
        return self.epsilon_condition == self.numeric_stable


def stability(eff: EffectiveParams) -> StabilityReport:
    """Stability from both |epsilon| < 1 and the drift spectrum."""
    eig = np.linalg.eigvals(build_linear_model(eff).drift)
    top = float(eig.real.max())
    return StabilityReport(eff.stable_condition, top, top < 0)


def _require_stable(eff: EffectiveParams) -> None:
    report = stability(eff)
    if not report.stable:
        raise UnstableRegime(
            f"requires |epsilon| < 1 and a decaying drift "
            f"(epsilon = {eff.epsilon}, max Re lambda = {report.max_real_eigenvalue:.4g})"
        )


# ---------------------------------------------------------------------------
# closed forms


def kappa_minus(eff: EffectiveParams, omega):
    return eff.kappa - 2j * np.asarray(omega, dtype=float)


def gamma_minus(eff: EffectiveParams, omega):
    return eff.gamma_m - 2j * np.asarray(omega, dtype=float)


def N_alpha(eff: EffectiveParams, G_alpha: float, omega):
    return 8 * G_alpha**2 * (eff.epsilon**2 - 1) - 2 * kappa_minus(eff, omega) * gamma_minus(eff, omega)


def D_denom(eff: EffectiveParams, omega):
    km = kappa_minus(eff, omega)
    return 4 * km * (eff.epsilon**2 - 1) * (eff.G_a**2 + eff.G_b**2) - km**2 * gamma_minus(eff, omega)


def _general_terms(eff: EffectiveParams, G_self: float, G_other: float, omega) -> list[np.ndarray]:
    """The five |.|^2 contributions to S of the mode coupled with G_self."""
    kex, k0 = eff.kappa_ex, eff.kappa_0
    D = D_denom(eff, omega)
    N = N_alpha(eff, G_other, omega)
    cross = 8 * G_self * G_other * (1 - eff.epsilon**2)
    magnon = 4 * G_self * kappa_minus(eff, omega) * (1 - eff.epsilon) * np.sqrt(kex * eff.gamma_m)
    return [
        np.abs(N * kex / D - 1) ** 2,
        np.abs(N * np.sqrt(kex * k0) / D) ** 2,
        np.abs(cross * kex / D) ** 2,
        np.abs(cross * np.sqrt(kex * k0) / D) ** 2,
        np.abs(magnon / D) ** 2,
    ]


def closed_form_general(eff: EffectiveParams, omega) -> tuple[np.ndarray, np.ndarray]:
    """(S_a, S_b) from the five-term expressions; no stability gate."""
    thermal = 2 * eff.n_th + 1
    S_a = sum(_general_terms(eff, eff.G_a, eff.G_b, omega))
    S_b = sum(_general_terms(eff, eff.G_b, eff.G_a, omega))
    return thermal * S_a, thermal * S_b


def _ideal_terms(eff: EffectiveParams, G: float, omega) -> list[np.ndarray]:
    km = kappa_minus(eff, omega)
    gm = gamma_minus(eff, omega)
    kex, k0 = eff.kappa_ex, eff.kappa_0
    squeeze = 4 * km * (1 - eff.epsilon**2) * G**2
    den = km**2 * gm + squeeze
    return [
        np.abs((km * gm * (2 * kex - km) - squeeze) / den) ** 2,
        np.abs(2 * km * gm * np.sqrt(kex * k0) / den) ** 2,
        np.abs(4 * G * km * (eff.epsilon - 1) * np.sqrt(kex * eff.gamma_m) / den) ** 2,
    ]


def closed_form_ideal(eff: EffectiveParams, omega) -> tuple[np.ndarray, np.ndarray]:
    """(S_a, S_b) for perfect chirality; the uncoupled mode emits vacuum."""
    if eff.G_a != 0 and eff.G_b != 0:
        raise NonIdealChirality(f"G_a = {eff.G_a} and G_b = {eff.G_b} are both nonzero")
    thermal = 2 * eff.n_th + 1
    omega = np.asarray(omega, dtype=float)
    ones = np.ones_like(omega)
    if eff.G_b == 0:
        return thermal * sum(_ideal_terms(eff, eff.G_a, omega)), thermal * ones
    return thermal * ones, thermal * sum(_ideal_terms(eff, eff.G_b, omega))


def noise_reduction_db(S):
    """Noise reduction below vacuum in dB, -10 log10 S."""
    S_arr = np.asarray(S, dtype=float)
    if np.any(~(S_arr > 0)):
        raise NonPositiveSpectrum("spectrum must be strictly positive")
    F = -10.0 * np.log10(S_arr) + 0.0  # no negative zero
    return float(F) if F.ndim == 0 else F


# ---------------------------------------------------------------------------
# numeric oracle


def transfer_coefficients(model: LinearModel, eff: EffectiveParams, omega, theta_lo: float, mode: str):
    """Coefficients (u, v) of the output quadrature on inputs xi_j(omega), xi_j^dag(omega).

    Solves (-i omega - M) z(omega) = B xi(omega) for every grid point and
    applies alpha_out = sqrt(kappa_ex) alpha - alpha_in,ex.
    """
    omega = np.atleast_1d(np.asarray(omega, dtype=float))
    n_ch = len(model.channels)
    M = model.mode_drift
    lhs = -1j * omega[:, None, None] * np.eye(6) - M
    cond = np.linalg.cond(lhs)
    if not np.all(np.isfinite(cond)) or np.any(cond > 1e14):
        raise SingularSystem("frequency-domain Langevin system is singular")
    R = np.linalg.solve(lhs, np.broadcast_to(model.mode_input, (omega.size, 6, 2 * n_ch)))

    row = {"a": 0, "b": 1}[mode]
    port = [ch.kind for ch in model.channels].index(f"{mode}_in_ex")
    sq = np.sqrt(eff.kappa_ex)
    out = sq * R[:, row, :]
    out_dag = sq * R[:, row + 3, :]
    out[:, port] -= 1.0
    out_dag[:, port + n_ch] -= 1.0
    h = np.exp(0.5j * theta_lo) * out + np.exp(-0.5j * theta_lo) * out_dag
    return h[:, :n_ch], h[:, n_ch:]


def oracle_spectrum(eff: EffectiveParams, omega, theta_lo: float | None = None, mode: str = "a") -> np.ndarray:
    """Symmetrized homodyne spectrum of one output port from the linear solve."""
    theta_lo = eff.theta if theta_lo is None else theta_lo
    model = build_linear_model(eff)
    omega = np.atleast_1d(np.asarray(omega, dtype=float))
    u_p, v_p = transfer_coefficients(model, eff, omega, theta_lo, mode)
    u_m, v_m = transfer_coefficients(model, eff, -omega, theta_lo, mode)
    weight = np.array([2 * ch.occupation + 1 for ch in model.channels])
    C = (u_p * v_m + u_m * v_p) @ weight
    S = 0.5 * C
    if np.max(np.abs(S.imag)) > 1e-9 * np.max(np.abs(S.real)):
        raise SingularSystem("oracle spectrum has a non-negligible imaginary part")
    return S.real


# ---------------------------------------------------------------------------
# results


@dataclass
class SpectrumResult:
    omega: np.ndarray
    S_a: np.ndarray
    S_b: np.ndarray
    provenance: str
    gamma_m: float = 1.0
    F_a_db: np.ndarray = field(init=False)
    F_b_db: np.ndarray = field(init=False)

    def __post_init__(self):
        self.omega = np.asarray(self.omega, dtype=float)
        self.S_a = np.asarray(self.S_a, dtype=float)
        self.S_b = np.asarray(self.S_b, dtype=float)
        self.F_a_db = noise_reduction_db(self.S_a)
        self.F_b_db = noise_reduction_db(self.S_b)

    def to_csv(self, path=None) -> str:
        """CSV text (12 significant digits); also written to ``path`` if given."""
        buf = io.StringIO()
        buf.write(CSV_HEADER + "\n")
        for row in zip(self.omega / self.gamma_m, self.S_a, self.S_b, self.F_a_db, self.F_b_db):
            buf.write(",".join(f"{v:.12g}" for v in row) + f",{self.provenance}\n")
        text = buf.getvalue()
        if path is not None:
            Path(path).write_text(text)
        return text


def spectrum_closed_form(eff: EffectiveParams, omega_grid=None) -> SpectrumResult:
    omega = default_grid() if omega_grid is None else np.asarray(omega_grid, dtype=float)
    _require_stable(eff)
    S_a, S_b = closed_form_general(eff, omega)
    return SpectrumResult(omega, S_a, S_b, "closed_form_general", eff.gamma_m)


def spectrum_ideal(eff: EffectiveParams, omega_grid=None) -> SpectrumResult:
    omega = default_grid() if omega_grid is None else np.asarray(omega_grid, dtype=float)
    if eff.G_a != 0 and eff.G_b != 0:
        raise NonIdealChirality(f"G_a = {eff.G_a} and G_b = {eff.G_b} are both nonzero")
    _require_stable(eff)
    S_a, S_b = closed_form_ideal(eff, omega)
    return SpectrumResult(omega, S_a, S_b, "closed_form_ideal", eff.gamma_m)


def spectrum_numeric_oracle(eff: EffectiveParams, omega_grid=None, theta_lo: float | None = None) -> SpectrumResult:
    omega = default_grid() if omega_grid is None else np.asarray(omega_grid, dtype=float)
    _require_stable(eff)
    S_a = oracle_spectrum(eff, omega, theta_lo, "a")
    S_b = oracle_spectrum(eff, omega, theta_lo, "b")
    return SpectrumResult(omega, S_a, S_b, "numeric_oracle", eff.gamma_m)


SPECTRUM_FORMS = {
    "general": spectrum_closed_form,
    "ideal": spectrum_ideal,
    "oracle": spectrum_numeric_oracle,
}


# ---------------------------------------------------------------------------
# steady state and frame checks


def lyapunov_steady_state(model: LinearModel) -> np.ndarray:
    """Solve A V + V A^T + D = 0 by dense vectorization (36 unknowns)."""
    A = model.drift
    top = np.linalg.eigvals(A).real.max()
    if top >= 0:
        raise UnstableDrift(f"drift has max Re lambda = {top:.4g} >= 0")
    n = A.shape[0]
    eye = np.eye(n)
    # row-major vec: vec(A V) = (A kron I) vec V, vec(V A^T) = (I kron A) vec V
    L = np.kron(A, eye) + np.kron(eye, A)
    V = np.linalg.solve(L, -model.diffusion.reshape(-1)).reshape(n, n)
    return 0.5 * (V + V.T)


def lyapunov_residual(model: LinearModel, V: np.ndarray) -> float:
    A = model.drift
    return float(np.linalg.norm(A @ V + V @ A.T + model.diffusion))


def hybrid_rotation(G_a: float, G_b: float) -> np.ndarray:
    """Orthogonal quadrature map (a, b, m) -> (A, B, m) with A = (G_a a + G_b b)/G."""
    G = np.hypot(G_a, G_b)
    c, s = G_a / G, G_b / G
    R = np.eye(6)
    R[0:2, 0:2] = c * np.eye(2)
    R[0:2, 2:4] = s * np.eye(2)
    R[2:4, 0:2] = -s * np.eye(2)
    R[2:4, 2:4] = c * np.eye(2)
    return R


def squeezed_frame_check(eff: EffectiveParams) -> float:
    """Residual between the squeezed-frame coherent drift and the beam-splitter drift.

    The coherent (Hamiltonian) part of the drift is rotated onto the hybrid
    mode, conjugated with the single-mode squeeze S_A(r e^{i theta}) and
    compared with a pure beam splitter of rate ``hybridized_coupling(eff)``.
    """
    rate = hybridized_coupling(eff)
    if eff.G_a == 0 and eff.G_b == 0:
        return 0.0
    u, v = _effective_uv(eff)
    coherent = to_quadrature(mode_matrix(u, v, 0.0, 0.0))
    R = hybrid_rotation(eff.G_a, eff.G_b)
    rotated = R @ coherent @ R.T
    K = np.eye(6)
    K[0:2, 0:2] = single_mode_squeeze(eff.r, eff.theta)
    transformed = np.linalg.solve(K, rotated @ K)
    target = to_quadrature(mode_matrix((rate, 0.0), (0.0, 0.0), 0.0, 0.0))
    return float(np.linalg.norm(transformed - target))
