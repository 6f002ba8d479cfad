"""Market instances: spectrum block, WSP roster and per-user radio gains.

Bandwidths are carried in Hz everywhere inside the library. The radio models
are the ITU / COST-231 style attenuation factors (inverse path losses) used to
turn a user's distance and placement into an SNR-related gain factor.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, fields, replace
from pathlib import Path
from typing import Any, Literal

import numpy as np

MHZ = 1e6

Placement = Literal["indoor", "outdoor"]


class DomainError(ValueError):
    """An argument lies outside the domain of a formula."""


class ConfigError(ValueError):
    """A configuration is internally inconsistent."""


@dataclass(frozen=True)
class SpectrumBlock:
    total_bandwidth_hz: float = 50 * MHZ
    guard_band_hz: float = 0.0

    def __post_init__(self) -> None:
        if not self.total_bandwidth_hz > 0:
            raise ConfigError("total_bandwidth_hz must be positive")
        if self.guard_band_hz < 0:
            raise ConfigError("guard_band_hz must be non-negative")
        if self.guard_band_hz > 0 and self.guard_band_hz >= self.total_bandwidth_hz:
            raise ConfigError("guard_band_hz must be smaller than total_bandwidth_hz")


@dataclass(frozen=True)
class RadioConfig:
    tx_power_w: float = 1.0
    noise_density_db_hz: float = -204.0
    carrier_mhz: float = 2000.0
    floors: int = 20
    shadowing_sigma_db: float = 8.0
    range_m_min: float = 500.0
    range_m_max: float = 1000.0
    indoor_fraction: float = 0.75

    def __post_init__(self) -> None:
        if not self.tx_power_w > 0 or not self.carrier_mhz > 0:
            raise ConfigError("tx_power_w and carrier_mhz must be positive")
        if self.floors < 1:
            raise ConfigError("floors must be >= 1")
        if self.shadowing_sigma_db < 0:
            raise ConfigError("shadowing_sigma_db must be non-negative")
        if not 0 < self.range_m_min <= self.range_m_max:
            raise ConfigError("need 0 < range_m_min <= range_m_max")
        if not 0.0 <= self.indoor_fraction <= 1.0:
            raise ConfigError("indoor_fraction must lie in [0, 1]")


@dataclass(frozen=True)
class EndUser:
    gain_factor_hz: float
    placement: Placement
    range_m: float

    def __post_init__(self) -> None:
        if not self.gain_factor_hz > 0 or not self.range_m > 0:
            raise DomainError("gain_factor_hz and range_m must be positive")


def _frozen(a: Any, dtype: Any) -> np.ndarray:
    arr = np.array(a, dtype=dtype)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class Wsp:
    """One wireless service provider and its subscribers.

    Users are stored column-wise (one array per attribute) because scenarios
    routinely hold thousands of users per WSP; :attr:`users` materialises
    :class:`EndUser` records on demand.
    """

    id: int
    alpha: float
    gain_factor_hz: np.ndarray
    indoor: np.ndarray
    range_m: np.ndarray
    aggregate_gain_hz: float = field(default=float("nan"))

    def __post_init__(self) -> None:
        object.__setattr__(self, "gain_factor_hz", _frozen(self.gain_factor_hz, np.float64))
        object.__setattr__(self, "indoor", _frozen(self.indoor, bool))
        object.__setattr__(self, "range_m", _frozen(self.range_m, np.float64))
        if not self.alpha > 0:
            raise DomainError("alpha must be positive")
        n = self.gain_factor_hz.shape[0]
        if n == 0:
            raise DomainError(f"WSP {self.id} has no users")
        if self.indoor.shape != (n,) or self.range_m.shape != (n,):
            raise DomainError("user attribute arrays must share one length")
        if np.any(self.gain_factor_hz <= 0) or np.any(self.range_m <= 0):
            raise DomainError("user gains and ranges must be positive")
        total = math.fsum(self.gain_factor_hz.tolist())
        if math.isnan(self.aggregate_gain_hz):
            object.__setattr__(self, "aggregate_gain_hz", total)
        elif not math.isclose(self.aggregate_gain_hz, total, rel_tol=1e-12):
            raise DomainError("aggregate_gain_hz disagrees with the member gains")

    @property
    def n_users(self) -> int:
        return int(self.gain_factor_hz.shape[0])

    @property
    def users(self) -> tuple[EndUser, ...]:
        return tuple(
            EndUser(float(g), "indoor" if ind else "outdoor", float(r))
            for g, ind, r in zip(self.gain_factor_hz, self.indoor, self.range_m)
        )

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Wsp):
            return NotImplemented
        return (
            self.id == other.id
            and self.alpha == other.alpha
            and self.aggregate_gain_hz == other.aggregate_gain_hz
            and np.array_equal(self.gain_factor_hz, other.gain_factor_hz)
            and np.array_equal(self.indoor, other.indoor)
            and np.array_equal(self.range_m, other.range_m)
        )

    __hash__ = None  # type: ignore[assignment]


@dataclass(frozen=True)
class Scenario:
    block: SpectrumBlock
    wsps: tuple[Wsp, ...]
    radio: RadioConfig
    seed: int

    def __post_init__(self) -> None:
        object.__setattr__(self, "wsps", tuple(self.wsps))
        if not self.wsps:
            raise ConfigError("a scenario needs at least one WSP")
        if [w.id for w in self.wsps] != list(range(1, len(self.wsps) + 1)):
            raise ConfigError("WSP ids must be 1..N in order")

    @property
    def n_wsps(self) -> int:
        return len(self.wsps)

    @property
    def alphas(self) -> np.ndarray:
        return np.array([w.alpha for w in self.wsps])

    @property
    def gains_hz(self) -> np.ndarray:
        return np.array([w.aggregate_gain_hz for w in self.wsps])


@dataclass(frozen=True)
class GenerationConfig:
    n_wsps: int = 10
    users_min: int = 500
    users_max: int = 1000
    alpha_min: float = 0.2
    alpha_max: float = 0.4
    alpha_mode: Literal["spaced", "uniform"] = "spaced"
    block: SpectrumBlock = field(default_factory=SpectrumBlock)
    radio: RadioConfig = field(default_factory=RadioConfig)

    def __post_init__(self) -> None:
        if self.n_wsps < 1:
            raise ConfigError("n_wsps must be >= 1")
        if not 1 <= self.users_min <= self.users_max:
            raise ConfigError("need 1 <= users_min <= users_max")
        if not 0 < self.alpha_min <= self.alpha_max:
            raise ConfigError("need 0 < alpha_min <= alpha_max")
        if self.alpha_mode not in ("spaced", "uniform"):
            raise ConfigError(f"unknown alpha_mode {self.alpha_mode!r}")

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> GenerationConfig:
        """Build from a flat-ish dict; ``block``/``radio`` may be nested dicts.

        ``total_bandwidth_mhz``/``guard_band_mhz`` are accepted in ``block`` as
        MHz conveniences for hand-written config files.
        """
        d = dict(d)
        block = dict(d.pop("block", {}))
        if "total_bandwidth_mhz" in block:
            block["total_bandwidth_hz"] = block.pop("total_bandwidth_mhz") * MHZ
        if "guard_band_mhz" in block:
            block["guard_band_hz"] = block.pop("guard_band_mhz") * MHZ
        radio = d.pop("radio", {})
        known = {f.name for f in fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise ConfigError(f"unknown generation keys: {sorted(unknown)}")
        return cls(block=SpectrumBlock(**block), radio=RadioConfig(**radio), **d)

    def with_guard_band(self, guard_band_hz: float) -> GenerationConfig:
        return replace(self, block=replace(self.block, guard_band_hz=guard_band_hz))


# -- radio models -----------------------------------------------------------


def outdoor_attenuation(range_m: float, carrier_mhz: float, shadow_db: float = 0.0) -> float:
    """Base station to outdoor user: 10^-4.9 (r/1km)^-4 f^-3 10^(-shadow/10)."""
    if not range_m > 0 or not carrier_mhz > 0:
        raise DomainError("range_m and carrier_mhz must be positive")
    return 10 ** (-4.9) * (range_m / 1000.0) ** -4 * carrier_mhz ** -3 * 10 ** (-shadow_db / 10)


def floor_loss_db(floors: int) -> float:
    n = floors
    return 18.3 * n ** ((n + 2) / (n + 1) - 0.46)


def indoor_attenuation(range_m: float, floors: int, shadow_db: float = 0.0) -> float:
    """Base station to indoor user, with the multi-floor penetration loss."""
    if not range_m > 0:
        raise DomainError("range_m must be positive")
    if floors < 1:
        raise DomainError("floors must be >= 1")
    return (
        10 ** (-3.7)
        * (range_m / 1000.0) ** -3
        * 10 ** (-shadow_db / 10)
        * 10 ** (-floor_loss_db(floors) / 10)
    )


def gain_factor(tx_power_w: float, attenuation: float, noise_density_db_hz: float) -> float:
    """P * H / n0 with n0 given in dB/Hz; the result is in Hz."""
    if not tx_power_w > 0 or not attenuation > 0:
        raise DomainError("tx_power_w and attenuation must be positive")
    return tx_power_w * attenuation / 10 ** (noise_density_db_hz / 10)


def _user_gains(radio: RadioConfig, range_m: np.ndarray, indoor: np.ndarray,
                shadow_db: np.ndarray) -> np.ndarray:
    # vectorised twin of the scalar models above
    km = range_m / 1000.0
    shadow = 10.0 ** (-shadow_db / 10)
    h_out = 10 ** (-4.9) * km ** -4 * radio.carrier_mhz ** -3 * shadow
    h_in = 10 ** (-3.7) * km ** -3 * shadow * 10 ** (-floor_loss_db(radio.floors) / 10)
    h = np.where(indoor, h_in, h_out)
    return radio.tx_power_w * h / 10 ** (radio.noise_density_db_hz / 10)


# -- generation -------------------------------------------------------------


def _alphas(config: GenerationConfig, root: np.random.SeedSequence) -> list[float]:
    n = config.n_wsps
    if config.alpha_mode == "uniform":
        rng = np.random.Generator(np.random.PCG64(root.spawn(1)[0]))
        return rng.uniform(config.alpha_min, config.alpha_max, size=n).tolist()
    if n == 1:
        return [config.alpha_min]
    step = (config.alpha_max - config.alpha_min) / (n - 1)
    return [config.alpha_min + i * step for i in range(n)]


def generate_scenario(config: GenerationConfig, seed: int) -> Scenario:
    """Draw a random market instance, deterministically in ``seed``.

    Stream layout: the master seed spawns one child per WSP (child ``i`` does
    not depend on how many WSPs follow it). Each WSP child spawns four
    substreams: subscriber count, user ranges, placements and shadowing. User
    ``j``'s draws therefore do not depend on the subscriber count.
    """
    if config.n_wsps < 1:
        raise ConfigError("n_wsps must be >= 1")
    seed = int(seed)
    if not 0 <= seed < 2**64:
        raise ConfigError("seed must be an unsigned 64-bit integer")
    radio = config.radio
    wsp_root, alpha_root = np.random.SeedSequence(seed).spawn(2)
    alphas = _alphas(config, alpha_root)
    wsps = []
    for i, ss in enumerate(wsp_root.spawn(config.n_wsps)):
        count_ss, range_ss, place_ss, shadow_ss = ss.spawn(4)
        n_users = int(np.random.Generator(np.random.PCG64(count_ss)).integers(
            config.users_min, config.users_max, endpoint=True))
        range_m = np.random.Generator(np.random.PCG64(range_ss)).uniform(
            radio.range_m_min, radio.range_m_max, size=n_users)
        indoor = np.random.Generator(np.random.PCG64(place_ss)).random(n_users) < radio.indoor_fraction
        shadow_db = radio.shadowing_sigma_db * np.random.Generator(
            np.random.PCG64(shadow_ss)).standard_normal(n_users)
        gains = _user_gains(radio, range_m, indoor, shadow_db)
        wsps.append(Wsp(id=i + 1, alpha=alphas[i], gain_factor_hz=gains, indoor=indoor, range_m=range_m))
    return Scenario(block=config.block, wsps=tuple(wsps), radio=radio, seed=seed)


# -- persistence ------------------------------------------------------------


def scenario_to_dict(scenario: Scenario) -> dict[str, Any]:
    return {
        "block": {
            "total_bandwidth_hz": scenario.block.total_bandwidth_hz,
            "guard_band_hz": scenario.block.guard_band_hz,
        },
        "radio": {f.name: getattr(scenario.radio, f.name) for f in fields(RadioConfig)},
        "wsps": [
            {
                "id": w.id,
                "alpha": w.alpha,
                "aggregate_gain_hz": w.aggregate_gain_hz,
                "users": [
                    {"gain_factor_hz": u.gain_factor_hz, "placement": u.placement, "range_m": u.range_m}
                    for u in w.users
                ],
            }
            for w in scenario.wsps
        ],
        "seed": scenario.seed,
    }


def scenario_from_dict(d: dict[str, Any]) -> Scenario:
    wsps = []
    for w in d["wsps"]:
        users = w["users"]
        wsps.append(Wsp(
            id=int(w["id"]),
            alpha=float(w["alpha"]),
            gain_factor_hz=[u["gain_factor_hz"] for u in users],
            indoor=[u["placement"] == "indoor" for u in users],
            range_m=[u["range_m"] for u in users],
            aggregate_gain_hz=float(w.get("aggregate_gain_hz", float("nan"))),
        ))
    return Scenario(
        block=SpectrumBlock(**d["block"]),
        wsps=tuple(wsps),
        radio=RadioConfig(**d["radio"]),
        seed=int(d["seed"]),
    )


def write_scenario(scenario: Scenario, path: str | Path) -> None:
    Path(path).write_text(json.dumps(scenario_to_dict(scenario), indent=1) + "\n")


def read_scenario(path: str | Path) -> Scenario:
    return scenario_from_dict(json.loads(Path(path).read_text()))
