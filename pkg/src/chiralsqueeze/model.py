"""System parameters, unit handling, validation and the JSON config format.

All frequencies and rates are stored in units of the magnon linewidth
``gamma_m``; the config loader converts from Hz-family or rad/s input.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, NamedTuple, Union

from .errors import ConfigError, InvalidParameters

#: Gyromagnetic ratio of YIG in rad s^-1 T^-1.
GYROMAGNETIC_RATIO = 2.0 * math.pi * 28e9

DEFAULT_RWA_THRESHOLD = 0.05

_HZ_SCALE = {"Hz": 1.0, "kHz": 1e3, "MHz": 1e6, "GHz": 1e9}


class KittelMode(NamedTuple):
    omega: float
    direction: int


def kittel_frequency(B0: float) -> KittelMode:
    """Kittel-mode angular frequency (rad/s) for a bias field ``B0`` in tesla.

    The sign of ``B0`` does not change the frequency; it is returned as
    ``direction`` (+1, -1, or 0 for zero field) and decides which cavity
    mode the magnon couples to.
    """
    direction = 0 if B0 == 0 else int(math.copysign(1, B0))
    return KittelMode(GYROMAGNETIC_RATIO * abs(B0), direction)


class Issue(NamedTuple):
    code: str
    field: str
    message: str


@dataclass(frozen=True)
class PhysicalParams:
    """Lab-frame description: mode frequencies, chiral couplings, two-tone drive."""

    omega_m: float
    omega_0: float
    g_a: float
    g_b: float
    Omega_1: float
    Omega_2: float
    omega_d1: float
    omega_d2: float
    theta: float = 0.0
    kappa_0: float = 0.05
    kappa_ex: float = 2.5
    gamma_m: float = 1.0
    n_th: float = 0.0
    direction: int = 1

    @property
    def kappa(self) -> float:
        return self.kappa_0 + self.kappa_ex

    def reversed_bias(self) -> "PhysicalParams":
        """Same system with the bias field flipped: the coupled cavity mode swaps."""
        return dataclasses.replace(self, g_a=self.g_b, g_b=self.g_a, direction=-self.direction)

    def scaled_frequencies(self, factor: float) -> "PhysicalParams":
        """Scale mode and drive frequencies (and drive amplitudes) by ``factor``.

        Modulation indices Omega_j/omega_dj and all couplings/rates stay fixed,
        so only the size of the counter-rotating detunings changes.
        """
        return dataclasses.replace(
            self,
            omega_m=self.omega_m * factor,
            omega_0=self.omega_0 * factor,
            omega_d1=self.omega_d1 * factor,
            omega_d2=self.omega_d2 * factor,
            Omega_1=self.Omega_1 * factor,
            Omega_2=self.Omega_2 * factor,
        )

    def to_dict(self) -> dict:
        return {"mode": "physical", **dataclasses.asdict(self)}


@dataclass(frozen=True)
class EffectiveParams:
    """Sideband-engineered couplings of the squeezing-type Hamiltonian.

    ``G_a``/``G_b`` are signed; ``epsilon`` is the parametric to beam-splitter
    ratio and ``theta`` the squeezing angle.
    """

    G_a: float
    G_b: float
    epsilon: float
    theta: float = 0.0
    kappa_0: float = 0.05
    kappa_ex: float = 2.5
    gamma_m: float = 1.0
    n_th: float = 0.0

    @property
    def kappa(self) -> float:
        return self.kappa_0 + self.kappa_ex

    @property
    def stable_condition(self) -> bool:
        return abs(self.epsilon) < 1.0

    @property
    def r(self) -> float | None:
        """Squeezing parameter with tanh r = epsilon, None outside |epsilon| < 1."""
        if not self.stable_condition:
            return None
        return math.atanh(self.epsilon)

    @property
    def G_total(self) -> float:
        return math.hypot(self.G_a, self.G_b)

    def swapped(self) -> "EffectiveParams":
        return dataclasses.replace(self, G_a=self.G_b, G_b=self.G_a)

    def replace(self, **changes: Any) -> "EffectiveParams":
        return dataclasses.replace(self, **changes)

    def to_dict(self) -> dict:
        return {"mode": "effective", **dataclasses.asdict(self)}


Params = Union[PhysicalParams, EffectiveParams]


class NoiseChannel(NamedTuple):
    kind: str
    mode: str
    rate: float
    occupation: float


CHANNEL_KINDS = ("a_in_ex", "a_in_0", "b_in_ex", "b_in_0", "m_in")


def noise_channels(params: Params) -> list[NoiseChannel]:
    """The five input noise channels, in a fixed order."""
    n = params.n_th
    return [
        NoiseChannel("a_in_ex", "a", params.kappa_ex, n),
        NoiseChannel("a_in_0", "a", params.kappa_0, n),
        NoiseChannel("b_in_ex", "b", params.kappa_ex, n),
        NoiseChannel("b_in_0", "b", params.kappa_0, n),
        NoiseChannel("m_in", "m", params.gamma_m, n),
    ]


_RATE_FIELDS = ("kappa_0", "kappa_ex", "gamma_m", "n_th")
_PHYSICAL_NONNEG = ("omega_m", "omega_0", "g_a", "g_b", "Omega_1", "Omega_2", "omega_d1", "omega_d2")


def rwa_ratio(params: PhysicalParams) -> float:
    g = max(abs(params.g_a), abs(params.g_b))
    if g == 0:
        return 0.0
    lowest = min(params.omega_d1, params.omega_d2, params.omega_m, params.omega_0)
    return math.inf if lowest <= 0 else g / lowest


def validate(params: Params, rwa_threshold: float = DEFAULT_RWA_THRESHOLD) -> list[Issue]:
    """Check parameter invariants.

    Returns the list of warnings (possibly empty). Hard violations are
    collected and raised together as :class:`InvalidParameters`.
    """
    errors: list[Issue] = []
    warnings: list[Issue] = []
    for f in dataclasses.fields(params):
        value = getattr(params, f.name)
        if isinstance(value, (int, float)) and not math.isfinite(value):
            errors.append(Issue("NonFiniteValue", f.name, f"{f.name} = {value!r}"))

    nonneg = _RATE_FIELDS + (_PHYSICAL_NONNEG if isinstance(params, PhysicalParams) else ())
    for name in nonneg:
        value = getattr(params, name)
        if math.isfinite(value) and value < 0:
            errors.append(Issue("NegativeRate", name, f"{name} = {value} must be >= 0"))
    if math.isfinite(params.gamma_m) and params.gamma_m == 0:
        errors.append(Issue("NegativeRate", "gamma_m", "gamma_m must be > 0"))
    if params.kappa_0 + params.kappa_ex == 0:
        errors.append(Issue("ZeroTotalCavityDecay", "kappa", "kappa_0 + kappa_ex must be > 0"))
    if errors:
        raise InvalidParameters(errors)

    if isinstance(params, PhysicalParams):
        ratio = rwa_ratio(params)
        if ratio > rwa_threshold:
            warnings.append(
                Issue(
                    "RwaMarginal",
                    "g_a" if abs(params.g_a) >= abs(params.g_b) else "g_b",
                    f"max(g)/min(omega) = {ratio:.4g} exceeds {rwa_threshold}",
                )
            )
        if params.omega_m == 0:
            warnings.append(Issue("DegenerateKittel", "omega_m", "zero magnon frequency"))
    return warnings


# ---------------------------------------------------------------------------
# config files


@dataclass(frozen=True)
class RunConfig:
    """A parsed config: one parameter set per requested chirality ratio."""

    mode: str
    params: tuple
    ratios: tuple
    source: dict = field(repr=False)

    @property
    def config_hash(self) -> str:
        return config_hash(self.source)


def config_hash(source: dict) -> str:
    canon = json.dumps(source, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canon.encode()).hexdigest()


_EFFECTIVE_KEYS = {"G_a", "G_b", "epsilon", "theta", "kappa_0", "kappa_ex", "gamma_m", "n_th"}
_PHYSICAL_KEYS = {f.name for f in dataclasses.fields(PhysicalParams)} - {"direction"}
_FREQ_KEYS = {
    "G_a", "G_b", "kappa_0", "kappa_ex", "gamma_m",
    "omega_m", "omega_0", "g_a", "g_b", "Omega_1", "Omega_2", "omega_d1", "omega_d2",
}


def load_config(path: str | Path) -> RunConfig:
    text = Path(path).read_text()
    try:
        source = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    try:
        return parse_config(source)
    except ConfigError as exc:
        raise ConfigError(f"{path}: {exc}") from None


def _number(source: dict, key: str) -> float:
    value = source[key]
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"field '{key}': expected a number, got {value!r}")
    return float(value)


def parse_config(source: dict) -> RunConfig:
    """Build parameter sets from a config mapping (see README for the schema)."""
    if not isinstance(source, dict):
        raise ConfigError("top level must be an object")
    mode = source.get("mode")
    if mode not in ("effective", "physical"):
        raise ConfigError(f"field 'mode': expected 'effective' or 'physical', got {mode!r}")

    unit = source.get("units", {}).get("frequency", "gamma_m")
    if unit not in ("gamma_m", "rad/s", *_HZ_SCALE):
        raise ConfigError(f"field 'units.frequency': unknown unit {unit!r}")

    allowed = (_EFFECTIVE_KEYS if mode == "effective" else _PHYSICAL_KEYS | {"B0"})
    allowed = allowed | {"mode", "units", "chirality_ratio"}
    for key in source:
        if key not in allowed:
            raise ConfigError(f"field '{key}': not valid in {mode} mode")

    values = {k: _number(source, k) for k in source if k not in ("mode", "units", "chirality_ratio")}

    gamma_m = values.get("gamma_m", 1.0)
    if unit == "gamma_m" and gamma_m != 1.0:
        raise ConfigError("field 'gamma_m': must be 1 (or omitted) when units.frequency is gamma_m")
    if gamma_m <= 0:
        raise ConfigError("field 'gamma_m': must be > 0")

    if "B0" in values:
        if "omega_m" in values:
            raise ConfigError("fields 'B0' and 'omega_m' are mutually exclusive")
        if unit == "gamma_m":
            raise ConfigError("field 'B0': needs absolute frequency units")
        kittel = kittel_frequency(values.pop("B0"))
        omega = kittel.omega
        values["omega_m"] = omega if unit == "rad/s" else omega / (2 * math.pi * _HZ_SCALE[unit])
        values["direction"] = kittel.direction or 1

    for key in list(values):
        if key in _FREQ_KEYS:
            values[key] = values[key] / gamma_m
    values["gamma_m"] = 1.0

    ratios = source.get("chirality_ratio")
    if ratios is None:
        ratio_list = [None]
    else:
        ratio_list = ratios if isinstance(ratios, list) else [ratios]
        for r in ratio_list:
            if isinstance(r, bool) or not isinstance(r, (int, float)) or not math.isfinite(r):
                raise ConfigError(f"field 'chirality_ratio': bad value {r!r}")

    sets = []
    for ratio in ratio_list:
        vals = dict(values)
        if mode == "effective":
            major = "G_a"
            cls = EffectiveParams
            required = ("G_a", "epsilon")
        else:
            major = "g_a"
            cls = PhysicalParams
            required = ("omega_m", "omega_0", "g_a", "Omega_1", "Omega_2", "omega_d1", "omega_d2")
        minor = major[0] + "_b"
        for key in required:
            if key not in vals:
                raise ConfigError(f"field '{key}': required in {mode} mode")
        if ratio is not None:
            if minor in source:
                raise ConfigError(f"fields 'chirality_ratio' and '{minor}' are mutually exclusive")
            vals[minor] = float(ratio) * vals[major]
        vals.setdefault(minor, 0.0)
        params = cls(**vals)
        if isinstance(params, PhysicalParams) and params.direction == -1:
            # bias reversed: swap which cavity mode the magnon addresses
            params = dataclasses.replace(params, g_a=params.g_b, g_b=params.g_a)
        try:
            validate(params)
        except InvalidParameters as exc:
            raise ConfigError(str(exc)) from None
        sets.append(params)

    return RunConfig(
        mode=mode,
        params=tuple(sets),
        ratios=tuple(ratio_list),
        source=source,
    )


def params_to_json(params: Params) -> str:
    return json.dumps(params.to_dict(), sort_keys=True)


def params_from_json(text: str) -> Params:
    data = json.loads(text)
    mode = data.pop("mode")
    cls = EffectiveParams if mode == "effective" else PhysicalParams
    return cls(**data)
