"""Two-tone Floquet sideband decomposition of the magnon-photon coupling.

Expanding the drive phase with the Jacobi-Anger identity turns each coupling
into a sum of Bessel-weighted sidebands. With the tones on the red
(omega_m - omega_0) and blue (omega_m + omega_0) sidebands, one beam-splitter
and one parametric term become resonant; their weights define the effective
couplings.
"""

from __future__ import annotations

import math
import operator
import warnings
from typing import NamedTuple

from .errors import (
    ArgumentOutOfRange,
    DegenerateDrive,
    DetunedSideband,
    NegativeDriveFrequency,
    OrderOutOfRange,
    UnstableRegime,
    UnstableRegimeWarning,
)
from .model import EffectiveParams, PhysicalParams, rwa_ratio

MAX_ORDER = 50
MAX_ARGUMENT = 50.0
SIDEBAND_CUTOFF = 8

# series below this |x|, Miller recurrence above (series cancellation grows like e^{|x|})
_SERIES_LIMIT = 8.0
_RESCALE = 1e250


def _series(n: int, x: float) -> float:
    half = 0.5 * x
    term = half**n / math.factorial(n)
    total = term
    q = -half * half
    k = 0
    while True:
        k += 1
        term *= q / (k * (k + n))
        total += term
        if abs(term) <= 1e-17 * abs(total) and k > half:
            return total


def _miller(n: int, x: float) -> float:
    top = max(n, int(x))
    start = 2 * ((top + 20 + int(math.sqrt(40 * top))) // 2 + 1)
    j_next, j = 0.0, 1e-300
    norm = 0.0
    wanted = 0.0
    for k in range(start, 0, -1):
        j_next, j = j, (2.0 * k / x) * j - j_next
        if k - 1 == n:
            wanted = j
        if k - 1 > 0 and (k - 1) % 2 == 0:
            norm += 2.0 * j
        if abs(j) > _RESCALE:
            j /= _RESCALE
            j_next /= _RESCALE
            norm /= _RESCALE
            wanted /= _RESCALE
    # 1 = J_0 + 2 * sum_k J_2k
    return wanted / (norm + j)


def bessel_j(n: int, x: float) -> float:
    """Bessel function of the first kind J_n(x) for integer order.

    Valid for |n| <= 50 and |x| <= 50 with absolute error below 1e-12.
    """
    try:
        n = operator.index(n)
    except TypeError:
        raise OrderOutOfRange(f"order must be an integer, got {n!r}") from None
    if abs(n) > MAX_ORDER:
        raise OrderOutOfRange(f"|n| = {abs(n)} exceeds {MAX_ORDER}")
    if not math.isfinite(x) or abs(x) > MAX_ARGUMENT:
        raise ArgumentOutOfRange(f"|x| = {abs(x)} exceeds {MAX_ARGUMENT}")
    sign = 1.0
    if n < 0:
        n = -n
        sign = -1.0 if n % 2 else 1.0
    if x < 0:
        x = -x
        if n % 2:
            sign = -sign
    if x == 0.0:
        return sign * (1.0 if n == 0 else 0.0)
    value = _series(n, x) if x <= _SERIES_LIMIT else _miller(n, x)
    return sign * value


class ModulationIndices(NamedTuple):
    xi_1: float
    xi_2: float


def modulation_indices(params: PhysicalParams) -> ModulationIndices:
    if params.omega_d1 == 0 or params.omega_d2 == 0:
        raise DegenerateDrive("drive frequencies must be nonzero")
    return ModulationIndices(params.Omega_1 / params.omega_d1, params.Omega_2 / params.omega_d2)


class SidebandTerm(NamedTuple):
    """One term of the double Jacobi-Anger sum.

    ``kind`` is ``"beam_splitter"`` for m^dag alpha and ``"parametric"`` for
    m^dag alpha^dag; ``detuning`` is the net oscillation frequency.
    """

    n: int
    k: int
    weight: float
    detuning: float
    kind: str


class SidebandReport(NamedTuple):
    red_residual: float
    blue_residual: float
    matched: bool


def sideband_conditions(params: PhysicalParams, warn: bool = True) -> SidebandReport:
    """Residuals of the drive tones from the red and blue sidebands."""
    if not (params.omega_m > params.omega_0 > 0):
        raise NegativeDriveFrequency(
            f"need omega_m > omega_0 > 0, got omega_m={params.omega_m}, omega_0={params.omega_0}"
        )
    red = params.omega_d1 - (params.omega_m - params.omega_0)
    blue = params.omega_d2 - (params.omega_m + params.omega_0)
    scale = 1e-12 * (params.omega_m + params.omega_0)
    matched = abs(red) <= scale and abs(blue) <= scale
    if warn and not matched:
        warnings.warn(
            f"drive tones off the sidebands by ({red:.6g}, {blue:.6g})", DetunedSideband, stacklevel=2
        )
    return SidebandReport(red, blue, matched)


def effective_couplings(params: PhysicalParams) -> EffectiveParams:
    """Effective couplings G_alpha, ratio epsilon and angle theta.

    epsilon is kept non-negative; a negative Bessel ratio is absorbed into
    theta as a shift by pi.
    """
    sideband_conditions(params)
    xi_1, xi_2 = modulation_indices(params)
    beam_splitter = bessel_j(-1, xi_1) * bessel_j(0, xi_2)
    if beam_splitter == 0.0:
        raise DegenerateDrive(f"J_-1(xi_1) J_0(xi_2) vanishes for xi = ({xi_1}, {xi_2})")
    parametric = bessel_j(0, xi_1) * bessel_j(-1, xi_2)
    epsilon = parametric / beam_splitter
    theta = params.theta
    if epsilon < 0:
        epsilon = -epsilon
        theta = theta + math.pi
    if epsilon >= 1.0:
        warnings.warn(f"epsilon = {epsilon:.6g} >= 1", UnstableRegimeWarning, stacklevel=2)
    return EffectiveParams(
        G_a=params.g_a * beam_splitter,
        G_b=params.g_b * beam_splitter,
        epsilon=epsilon,
        theta=theta,
        kappa_0=params.kappa_0,
        kappa_ex=params.kappa_ex,
        gamma_m=params.gamma_m,
        n_th=params.n_th,
    )


def hybridized_coupling(eff: EffectiveParams) -> float:
    """Beam-splitter rate between the magnon and the hybrid mode in the squeezed frame."""
    if not eff.stable_condition:
        raise UnstableRegime(f"|epsilon| = {abs(eff.epsilon)} >= 1")
    return math.sqrt((eff.G_a**2 + eff.G_b**2) * (1.0 - eff.epsilon**2))


def enumerate_sidebands(params: PhysicalParams, n_max: int = SIDEBAND_CUTOFF) -> list[SidebandTerm]:
    xi_1, xi_2 = modulation_indices(params)
    w1 = [bessel_j(n, xi_1) for n in range(-n_max, n_max + 1)]
    w2 = [bessel_j(k, xi_2) for k in range(-n_max, n_max + 1)]
    terms = []
    for kind, base in (
        ("beam_splitter", params.omega_m - params.omega_0),
        ("parametric", params.omega_m + params.omega_0),
    ):
        for i, n in enumerate(range(-n_max, n_max + 1)):
            for j, k in enumerate(range(-n_max, n_max + 1)):
                detuning = base + n * params.omega_d1 + k * params.omega_d2
                terms.append(SidebandTerm(n, k, w1[i] * w2[j], detuning, kind))
    return terms


class RwaMargin(NamedTuple):
    ratio: float
    discarded: list


def rwa_margin(params: PhysicalParams, n_max: int = SIDEBAND_CUTOFF) -> RwaMargin:
    """Coupling-to-frequency ratio plus the discarded sidebands.

    Discarded terms are sorted by |weight / detuning|, the size of the
    leading off-resonant correction.
    """
    ratio = rwa_ratio(params)
    if params.omega_d1 == 0 or params.omega_d2 == 0:
        return RwaMargin(ratio, [])
    tol = 1e-12 * max(abs(params.omega_m) + abs(params.omega_0), 1.0)
    discarded = [t for t in enumerate_sidebands(params, n_max) if abs(t.detuning) > tol and t.weight != 0]
    discarded.sort(key=lambda t: abs(t.weight / t.detuning), reverse=True)
    return RwaMargin(ratio, discarded)
