"""Command-line front end.

Exit codes: 0 success, 1 validation failure, 2 config error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import sys
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

import numpy as np
from scipy.optimize import minimize_scalar

from . import __version__, spectra, validation
from .errors import ChiralSqueezeError, ConfigError, NonIdealChirality, UnstableRegime
from .floquet import effective_couplings
from .model import EffectiveParams, PhysicalParams, RunConfig, config_hash, load_config

EXIT_OK, EXIT_VALIDATION, EXIT_CONFIG, EXIT_NUMERICAL = 0, 1, 2, 3

EQUATION_SETS = {
    "closed_form_general": "general five-term closed form (both modes coupled)",
    "closed_form_ideal": "ideal-chirality three-term closed form",
    "numeric_oracle": "frequency-domain linear solve of the Langevin equations",
}

SWEEP_VARIABLES = ("epsilon", "chirality_ratio", "omega", "theta_LO", "kappa_ex")


def parse_range(text: str) -> tuple[float, float, int]:
    try:
        start, stop, count = text.split(":")
        return float(start), float(stop), int(count)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected start:stop:count, got {text!r}") from None


def to_effective(params) -> EffectiveParams:
    if isinstance(params, PhysicalParams):
        return effective_couplings(params)
    return params


def _ratio_tag(ratio) -> str:
    return "" if ratio is None else f"_ratio{ratio:g}"


# ---------------------------------------------------------------------------
# manifests


@dataclass
class RunManifest:
    config_hash: str
    tool_version: str = __version__
    timestamp: str = field(default_factory=lambda: datetime.now(timezone.utc).isoformat(timespec="seconds"))
    outputs: list = field(default_factory=list)

    def add(self, path: Path, provenance: str, **extra) -> None:
        entry = {"file": path.name, "provenance": provenance, "equation_set": EQUATION_SETS.get(provenance, provenance)}
        entry.update(extra)
        self.outputs.append(entry)
        sidecar = {k: v for k, v in self.__dict__.items() if k != "outputs"}
        sidecar.update(entry)
        path.with_name(path.name + ".json").write_text(json.dumps(sidecar, indent=2, sort_keys=True) + "\n")

    def write(self, out_dir: Path) -> Path:
        path = out_dir / "manifest.json"
        path.write_text(json.dumps(self.__dict__, indent=2, sort_keys=True) + "\n")
        return path


# ---------------------------------------------------------------------------
# spectrum


def cmd_spectrum(config: RunConfig, grid, forms, out_dir: Path, theta_lo=None) -> list[Path]:
    omega = np.linspace(*grid)
    manifest = RunManifest(config.config_hash)
    written = []
    for ratio, params in zip(config.ratios, config.params):
        eff = to_effective(params)
        for form in forms:
            if form == "oracle":
                result = spectra.spectrum_numeric_oracle(eff, omega, theta_lo)
            else:
                result = spectra.SPECTRUM_FORMS[form](eff, omega)
            path = out_dir / f"spectrum_{form}{_ratio_tag(ratio)}.csv"
            result.to_csv(path)
            manifest.add(path, result.provenance, chirality_ratio=ratio)
            written.append(path)
            peak = int(np.argmax(result.F_a_db))
            print(
                f"{path.name}: max F_a = {result.F_a_db[peak]:.2f} dB at omega/gamma_m = {omega[peak]:.3f}, "
                f"max F_b = {np.max(result.F_b_db):.2f} dB"
            )
    manifest.write(out_dir)
    return written


# ---------------------------------------------------------------------------
# sweeps


@dataclass(frozen=True)
class SweepSpec:
    variable: str
    start: float
    stop: float
    count: int
    fixed: EffectiveParams
    ratios: tuple = (None,)
    omega: float = 0.0
    theta_lo: float | None = None

    def __post_init__(self):
        if self.variable not in SWEEP_VARIABLES:
            raise ConfigError(f"sweep variable must be one of {SWEEP_VARIABLES}, got {self.variable!r}")
        if self.count < 2:
            raise ConfigError("sweep count must be >= 2")
        if not self.start < self.stop:
            raise ConfigError("sweep range needs start < stop")
        if self.variable == "chirality_ratio" and any(r is not None for r in self.ratios):
            raise ConfigError("chirality_ratio is swept; do not also fix it")
        if self.variable == "omega" and self.omega != 0.0:
            raise ConfigError("omega is swept; do not also fix it")

    @property
    def values(self) -> np.ndarray:
        return np.linspace(self.start, self.stop, self.count)


def _with_ratio(eff: EffectiveParams, ratio) -> EffectiveParams:
    return eff if ratio is None else eff.replace(G_b=ratio * eff.G_a)


def _cell(spec: SweepSpec, eff: EffectiveParams, value: float):
    """(S_a, S_b) for one sweep value, or None when the point is unstable."""
    omega = spec.omega
    theta_lo = spec.theta_lo
    if spec.variable == "epsilon":
        eff = eff.replace(epsilon=value)
    elif spec.variable == "chirality_ratio":
        eff = eff.replace(G_b=value * eff.G_a)
    elif spec.variable == "kappa_ex":
        eff = eff.replace(kappa_ex=value)
    elif spec.variable == "omega":
        omega = value
    elif spec.variable == "theta_LO":
        theta_lo = value
    if not spectra.stability(eff).stable:
        return None
    if theta_lo is not None:
        return (
            float(spectra.oracle_spectrum(eff, [omega], theta_lo, "a")[0]),
            float(spectra.oracle_spectrum(eff, [omega], theta_lo, "b")[0]),
        )
    S_a, S_b = spectra.closed_form_general(eff, np.array([omega]))
    return float(S_a[0]), float(S_b[0])


def _block(spec: SweepSpec, ratio) -> list:
    eff = _with_ratio(spec.fixed, ratio)
    return [(ratio, v, _cell(spec, eff, v)) for v in spec.values]


def refine_epsilon_maximum(eff: EffectiveParams, omega: float, bracket, xtol: float = 1e-6):
    """Golden-section search for the epsilon maximizing F_a at ``omega``."""

    def negative_F(eps):
        S_a, _ = spectra.closed_form_general(eff.replace(epsilon=eps), np.array([omega]))
        return 10 * np.log10(S_a[0])

    scale = max(abs(bracket[1]), 1e-3)
    res = minimize_scalar(negative_F, bracket=bracket, method="golden", options={"xtol": xtol / (2 * scale)})
    return float(res.x), float(-res.fun)


def run_sweep(spec: SweepSpec, threads: int = 1):
    ratios = spec.ratios if spec.variable != "chirality_ratio" else (None,)
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            blocks = list(pool.map(lambda r: _block(spec, r), ratios))
    else:
        blocks = [_block(spec, r) for r in ratios]

    rows = [row for block in blocks for row in block]
    summary = []
    if spec.variable == "epsilon":
        for ratio, block in zip(ratios, blocks):
            F = np.array([np.nan if c is None else -10 * np.log10(c[0]) for _, _, c in block])
            eps = np.array([v for _, v, _ in block])
            ok = np.isfinite(F)
            idx = int(np.nanargmax(F))
            interior = [
                i for i in range(1, len(F) - 1)
                if ok[i - 1] and ok[i] and ok[i + 1] and F[i] > F[i - 1] and F[i] >= F[i + 1]
            ]
            entry = {"chirality_ratio": ratio, "grid_argmax": float(eps[idx]), "interior_maxima": len(interior)}
            if 0 < idx < len(F) - 1 and ok[idx - 1] and ok[idx + 1]:
                eps_opt, F_opt = refine_epsilon_maximum(
                    _with_ratio(spec.fixed, ratio), spec.omega, (eps[idx - 1], eps[idx], eps[idx + 1])
                )
                entry.update(epsilon_opt=eps_opt, F_a_opt_db=F_opt)
            summary.append(entry)
    return rows, summary


def sweep_csv(spec: SweepSpec, rows) -> str:
    lines = [f"chirality_ratio,{spec.variable},S_a,S_b,F_a_db,F_b_db,status"]
    for ratio, value, cell in rows:
        r = "" if ratio is None else f"{ratio:.12g}"
        if cell is None:
            lines.append(f"{r},{value:.12g},,,,,unstable")
        else:
            S_a, S_b = cell
            F_a, F_b = spectra.noise_reduction_db(S_a), spectra.noise_reduction_db(S_b)
            lines.append(f"{r},{value:.12g},{S_a:.12g},{S_b:.12g},{F_a:.12g},{F_b:.12g},ok")
    return "\n".join(lines) + "\n"


def cmd_sweep(spec: SweepSpec, out_dir: Path, source_hash: str, threads: int = 1) -> Path:
    rows, summary = run_sweep(spec, threads)
    path = out_dir / f"sweep_{spec.variable}.csv"
    path.write_text(sweep_csv(spec, rows))
    provenance = "numeric_oracle" if spec.theta_lo is not None or spec.variable == "theta_LO" else "closed_form_general"
    manifest = RunManifest(source_hash)
    manifest.add(path, provenance)
    if summary:
        summary_path = out_dir / f"sweep_{spec.variable}_summary.json"
        summary_path.write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n")
        manifest.add(summary_path, "derived_optimum")
        for entry in summary:
            tag = "" if entry["chirality_ratio"] is None else f"ratio {entry['chirality_ratio']:g}: "
            if "epsilon_opt" in entry:
                print(f"{tag}optimum epsilon = {entry['epsilon_opt']:.6f}, F_a = {entry['F_a_opt_db']:.2f} dB")
            else:
                print(f"{tag}maximum at sweep edge epsilon = {entry['grid_argmax']:.6f}")
    n_bad = sum(1 for *_, c in rows if c is None)
    if n_bad:
        print(f"{n_bad} rows marked unstable", file=sys.stderr)
    manifest.write(out_dir)
    print(f"wrote {path}")
    return path


# ---------------------------------------------------------------------------
# argument handling


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="chiralsqueeze", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("spectrum", help="output squeezing spectra")
    p.add_argument("--config", required=True)
    p.add_argument("--grid", type=parse_range, default=spectra.DEFAULT_GRID, help="start:stop:count in omega/gamma_m")
    p.add_argument("--form", action="append", choices=("general", "ideal", "oracle"))
    p.add_argument("--theta-lo", type=float, default=None, help="local-oscillator phase for the oracle form")
    p.add_argument("--out", default=".")

    p = sub.add_parser("sweep", help="parameter sweep of F at fixed omega")
    p.add_argument("--config", required=True)
    p.add_argument("--var", required=True, choices=SWEEP_VARIABLES)
    p.add_argument("--range", required=True, type=parse_range)
    p.add_argument("--ratios", default=None, help="comma-separated chirality ratios g_b/g_a")
    p.add_argument("--omega", type=float, default=0.0)
    p.add_argument("--theta-lo", type=float, default=None)
    p.add_argument("--out", default=".")
    p.add_argument("--threads", type=int, default=1)

    p = sub.add_parser("validate", help="cross-oracle validation suite")
    p.add_argument("--config", default=None)
    p.add_argument("--with-floquet", action="store_true")
    p.add_argument("--tol", type=float, default=None, help="override every tolerance (testing aid)")
    p.add_argument("--out", default=None)

    p = sub.add_parser("stability", help="stability report")
    p.add_argument("--config", required=True)
    return parser


def _sweep_spec(args, config: RunConfig) -> SweepSpec:
    start, stop, count = args.range
    ratios = config.ratios
    if args.ratios is not None:
        ratios = tuple(float(r) for r in args.ratios.split(","))
    fixed = to_effective(config.params[0])
    if ratios != (None,):
        fixed = fixed.replace(G_b=0.0)
    return SweepSpec(args.var, start, stop, count, fixed, ratios, args.omega, args.theta_lo)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    warnings.simplefilter("default")
    try:
        if args.command == "validate":
            eff = validation.REFERENCE_POINT
            if args.config:
                eff = to_effective(load_config(args.config).params[0])
            tolerances = None if args.tol is None else {k: args.tol for k in validation.TOLERANCES}
            results = validation.run_checks(eff, args.with_floquet, tolerances)
            for r in results:
                print(r.line())
            if args.out:
                out = Path(args.out)
                out.mkdir(parents=True, exist_ok=True)
                report = [dict(name=r.name, value=r.value, tolerance=r.tolerance, passed=r.passed) for r in results]
                (out / "validation.json").write_text(json.dumps(report, indent=2) + "\n")
            return EXIT_OK if all(r.passed for r in results) else EXIT_VALIDATION

        config = load_config(args.config)

        if args.command == "stability":
            for ratio, params in zip(config.ratios, config.params):
                eff = to_effective(params)
                rep = spectra.stability(eff)
                label = "" if ratio is None else f"ratio {ratio:g}: "
                print(
                    f"{label}|epsilon| < 1: {rep.epsilon_condition}; max Re lambda = {rep.max_real_eigenvalue:.6g}; "
                    f"stable: {rep.stable}" + ("" if rep.consistent else " (criteria disagree)")
                )
            return EXIT_OK

        out_dir = Path(args.out)
        out_dir.mkdir(parents=True, exist_ok=True)
        if args.command == "spectrum":
            cmd_spectrum(config, args.grid, args.form or ["general"], out_dir, args.theta_lo)
        elif args.command == "sweep":
            cmd_sweep(_sweep_spec(args, config), out_dir, config_hash(config.source), args.threads)
        return EXIT_OK
    except (ConfigError, NonIdealChirality) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except UnstableRegime as exc:
        print(f"unstable regime: stationary spectra need |epsilon| < 1; {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except ChiralSqueezeError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
