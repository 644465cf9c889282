"""Mode/quadrature conversions for the three-mode (a, b, m) Gaussian system.

Mode vector ``z = (a, b, m, a^dag, b^dag, m^dag)``; quadrature vector
``x = (X_a, P_a, X_b, P_b, X_m, P_m)`` with ``X = c + c^dag`` and
``P = -i (c - c^dag)``, so the vacuum covariance is the identity.
"""

from __future__ import annotations

import numpy as np

N_MODES = 3


def _mode_to_quadrature(n_modes: int) -> np.ndarray:
    T = np.zeros((2 * n_modes, 2 * n_modes), dtype=complex)
    for j in range(n_modes):
        T[2 * j, j] = 1.0
        T[2 * j, j + n_modes] = 1.0
        T[2 * j + 1, j] = -1j
        T[2 * j + 1, j + n_modes] = 1j
    return T


T_MODES = _mode_to_quadrature(N_MODES)
T_MODES_INV = np.linalg.inv(T_MODES)


def to_quadrature(M: np.ndarray, T_out: np.ndarray = T_MODES, T_in: np.ndarray = T_MODES) -> np.ndarray:
    """Express a linear map on mode operators in quadrature coordinates.

    The map must preserve Hermiticity (dagger rows conjugate to the
    annihilation rows), in which case the result is real.
    """
    A = T_out @ M @ np.linalg.inv(T_in)
    if np.max(np.abs(A.imag), initial=0.0) > 1e-9 * max(1.0, np.max(np.abs(A.real), initial=0.0)):
        raise ValueError("mode matrix does not preserve Hermiticity")
    return A.real


def hermitian_completion(upper: np.ndarray, cross: np.ndarray) -> np.ndarray:
    """Assemble [[upper, cross], [conj(cross), conj(upper)]]."""
    return np.block([[upper, cross], [cross.conj(), upper.conj()]])


def mode_matrix(u, v, kappa: float, gamma_m: float) -> np.ndarray:
    """Heisenberg-Langevin drift in the mode basis.

    For H = sum_alpha m^dag (u_alpha alpha + v_alpha alpha^dag) + H.c. with
    cavity decay ``kappa`` and magnon decay ``gamma_m``::

        d alpha/dt = -kappa/2 alpha - i (conj(u_alpha) m + v_alpha m^dag)
        d m/dt     = -gamma_m/2 m - i sum_alpha (u_alpha alpha + v_alpha alpha^dag)
    """
    upper = np.diag([-kappa / 2, -kappa / 2, -gamma_m / 2]).astype(complex)
    cross = np.zeros((3, 3), dtype=complex)
    for i in range(2):
        upper[i, 2] = -1j * np.conj(u[i])
        cross[i, 2] = -1j * v[i]
        upper[2, i] = -1j * u[i]
        cross[2, i] = -1j * v[i]
    return hermitian_completion(upper, cross)


def symplectic_form(n_modes: int = N_MODES) -> np.ndarray:
    """Block-diagonal form with [x_i, x_j] = 2i * Omega_ij."""
    return np.kron(np.eye(n_modes), np.array([[0.0, 1.0], [-1.0, 0.0]]))


def physicality_margin(V: np.ndarray) -> float:
    """Smallest eigenvalue of V + i*Omega; negative means an unphysical state."""
    n = V.shape[0] // 2
    return float(np.linalg.eigvalsh(V + 1j * symplectic_form(n)).min())


def single_mode_squeeze(r: float, theta: float) -> np.ndarray:
    """Quadrature matrix of A -> cosh(r) A - exp(-i theta) sinh(r) A^dag."""
    mu = np.cosh(r)
    nu = -np.exp(-1j * theta) * np.sinh(r)
    M = np.array([[mu, nu], [np.conj(nu), mu]], dtype=complex)
    T = _mode_to_quadrature(1)
    return to_quadrature(M, T, T)


def upper_triangle_labels(n: int = 2 * N_MODES) -> list[str]:
    return [f"V{i + 1}{j + 1}" for i in range(n) for j in range(i, n)]
