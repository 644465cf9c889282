"""Cross-oracle checks shared by the ``validate`` command and the test suite."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import dynamics, spectra
from .model import EffectiveParams

REFERENCE_POINT = EffectiveParams(G_a=2.5, G_b=0.0, epsilon=0.95, theta=0.0, kappa_0=0.05, kappa_ex=2.5, gamma_m=1.0)

TOLERANCES = {
    "oracle_equivalence": 1e-10,
    "ideal_reduction": 1e-12,
    "vacuum_unitarity": 1e-12,
    "passivity": 1e-12,
    "squeezed_frame": 1e-12,
    "lyapunov_vs_time_domain": 1e-6,
    "rwa_full_vs_effective": 0.05,
}

SEED = 20240611


def random_stable_params(rng: np.random.Generator, n: int, ideal: bool = False) -> list[EffectiveParams]:
    """Random parameter sets that pass both stability gates."""
    out = []
    while len(out) < n:
        eff = EffectiveParams(
            G_a=float(rng.uniform(-4, 4)),
            G_b=0.0 if ideal else float(rng.uniform(-2, 2)),
            epsilon=float(rng.uniform(0, 0.99)),
            theta=float(rng.uniform(0, 2 * np.pi)),
            kappa_0=float(rng.uniform(0.01, 1.0)),
            kappa_ex=float(rng.uniform(0.1, 5.0)),
            gamma_m=1.0,
            n_th=0.0,
        )
        if spectra.stability(eff).stable:
            out.append(eff)
    return out


def max_relative(a, b) -> float:
    a = np.asarray(a)
    b = np.asarray(b)
    return float(np.max(np.abs(a - b) / np.abs(b)))


@dataclass
class CheckResult:
    name: str
    value: float
    tolerance: float
    detail: str = ""

    @property
    def passed(self) -> bool:
        return bool(self.value <= self.tolerance)

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"{status} {self.name}: {self.value:.3e} (tolerance {self.tolerance:.1e}) {self.detail}".rstrip()


def oracle_equivalence(n_sets: int = 20, grid=None, seed: int = SEED) -> float:
    omega = np.linspace(-15, 15, 201) if grid is None else grid
    worst = 0.0
    for eff in random_stable_params(np.random.default_rng(seed), n_sets):
        closed = spectra.spectrum_closed_form(eff, omega)
        oracle = spectra.spectrum_numeric_oracle(eff, omega)
        worst = max(worst, max_relative(oracle.S_a, closed.S_a), max_relative(oracle.S_b, closed.S_b))
    return worst


def ideal_reduction(n_sets: int = 10, seed: int = SEED) -> float:
    omega = spectra.default_grid()
    worst = 0.0
    for eff in [REFERENCE_POINT] + random_stable_params(np.random.default_rng(seed + 1), n_sets, ideal=True):
        general = spectra.spectrum_closed_form(eff, omega)
        ideal = spectra.spectrum_ideal(eff, omega)
        worst = max(worst, max_relative(general.S_a, ideal.S_a), max_relative(general.S_b, ideal.S_b))
    return worst


def vacuum_deviation(zero_coupling: bool, n_sets: int = 10, seed: int = SEED) -> float:
    """max |S - 1| with G_a = G_b = 0 (``zero_coupling``) or epsilon = 0."""
    rng = np.random.default_rng(seed + (2 if zero_coupling else 3))
    omega = spectra.default_grid()
    worst = 0.0
    for eff in random_stable_params(rng, n_sets):
        eff = eff.replace(G_a=0.0, G_b=0.0) if zero_coupling else eff.replace(epsilon=0.0)
        for result in (spectra.spectrum_closed_form(eff, omega), spectra.spectrum_numeric_oracle(eff, omega)):
            worst = max(worst, float(np.max(np.abs(result.S_a - 1))), float(np.max(np.abs(result.S_b - 1))))
    return worst


def squeezed_frame(n_sets: int = 20, seed: int = SEED) -> float:
    return max(spectra.squeezed_frame_check(e) for e in random_stable_params(np.random.default_rng(seed + 4), n_sets))


def lyapunov_vs_time_domain(eff: EffectiveParams = REFERENCE_POINT) -> float:
    V_lyap = spectra.lyapunov_steady_state(spectra.build_linear_model(eff))
    traj = dynamics.propagate_effective(eff)
    return float(np.max(np.abs(traj.final - V_lyap)))


def run_checks(
    eff: EffectiveParams = REFERENCE_POINT,
    with_floquet: bool = False,
    tolerances: dict | None = None,
) -> list[CheckResult]:
    tol = dict(TOLERANCES)
    tol.update(tolerances or {})
    results = [
        CheckResult("oracle_equivalence", oracle_equivalence(), tol["oracle_equivalence"], "20 random sets, 201 points"),
        CheckResult("ideal_reduction", ideal_reduction(), tol["ideal_reduction"]),
        CheckResult("vacuum_unitarity", vacuum_deviation(True), tol["vacuum_unitarity"]),
        CheckResult("passivity", vacuum_deviation(False), tol["passivity"]),
        CheckResult("squeezed_frame", squeezed_frame(), tol["squeezed_frame"]),
        CheckResult("lyapunov_vs_time_domain", lyapunov_vs_time_domain(eff), tol["lyapunov_vs_time_domain"]),
    ]
    if with_floquet:
        study = dynamics.rwa_scaling_study(dynamics.validation_set())
        errors = [report.relative_diff for _, report in study]
        monotone = all(b < a for a, b in zip(errors, errors[1:]))
        detail = "scalings " + ", ".join(f"x{f:g}: {r.relative_diff:.3e}" for f, r in study)
        results.append(CheckResult("rwa_full_vs_effective", errors[0], tol["rwa_full_vs_effective"], detail))
        results.append(CheckResult("rwa_monotone_convergence", 0.0 if monotone else 1.0, 0.5, detail))
    return results
