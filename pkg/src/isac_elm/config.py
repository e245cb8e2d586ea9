"""System configuration for the IRS-assisted multi-user ISAC link simulator."""

from __future__ import annotations

import dataclasses
import json
import math
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Any, Mapping

from .errors import ConfigError

SPEED_OF_LIGHT = 3e8

LINKS = ("sensing", "irs_bs", "ue_bs", "bs_ue", "ue_irs", "irs_ue")
COMM_LINKS = LINKS[1:]


def dbm_to_watts(dbm: float) -> float:
    return 10.0 ** (dbm / 10.0) / 1000.0


@dataclass(frozen=True)
class LinkValues:
    """One scalar per propagation link (distances, exponents, ...)."""

    sensing: float
    irs_bs: float
    ue_bs: float
    bs_ue: float
    ue_irs: float
    irs_ue: float


@dataclass(frozen=True)
class RicianFactors:
    irs_bs: float = 10.0
    ue_bs: float = 10.0
    bs_ue: float = 10.0
    ue_irs: float = 10.0
    irs_ue: float = 10.0


def _default_distances() -> LinkValues:
    return LinkValues(sensing=150.0, irs_bs=50.0, ue_bs=50.0, bs_ue=50.0, ue_irs=2.0, irs_ue=2.0)


def _default_exponents() -> LinkValues:
    return LinkValues(sensing=3.0, irs_bs=2.3, ue_bs=3.5, bs_ue=3.5, ue_irs=2.0, irs_ue=2.0)


@dataclass(frozen=True)
class SystemConfig:
    """All scalars of the system model and simulation setup.

    ``p_s1``, ``p_s2`` and ``c_s2`` default to their minimum admissible
    values (``M + K``, ``max(M, K)`` and ``c_s1 + L``) when left as ``None``.
    Powers are linear watts, distances meters, times seconds.
    """

    M: int = 6
    L: int = 30
    K: int = 6
    J: int = 6
    c_s1: int = 1
    c_s2: int | None = None
    p_s1: int | None = None
    p_s2: int | None = None
    carrier_freq: float = 3.5e9
    slot_duration: float = 0.52e-6
    coherence_time: float = 1e-3
    tx_power_bs: float = dbm_to_watts(20.0)
    tx_power_ue: float = dbm_to_watts(15.0)
    ref_pathloss: float = 1e-3
    ref_distance: float = 1.0
    distances: LinkValues = field(default_factory=_default_distances)
    pathloss_exps: LinkValues = field(default_factory=_default_exponents)
    rician_factors: RicianFactors = field(default_factory=RicianFactors)
    target_angle: float = -math.pi
    irs_bs_aoa: float = -math.pi / 2
    irs_bs_aod: float = -math.pi / 2
    master_seed: int = 0

    def __post_init__(self):
        for name in ("M", "L", "K", "J", "c_s1"):
            value = getattr(self, name)
            if not isinstance(value, int) or isinstance(value, bool) or value < 1:
                raise ConfigError(f"{name} must be a positive integer, got {value!r}")

        p1_min = self.M + self.K
        p2_min = max(self.M, self.K)
        if self.p_s1 is None:
            object.__setattr__(self, "p_s1", p1_min)
        if self.p_s2 is None:
            object.__setattr__(self, "p_s2", p2_min)
        if self.c_s2 is None:
            object.__setattr__(self, "c_s2", self.c_s1 + self.L)

        if self.p_s1 < p1_min:
            raise ConfigError(f"p_s1 must be >= M + K = {p1_min}, got {self.p_s1}")
        if self.p_s2 < p2_min:
            raise ConfigError(f"p_s2 must be >= max(M, K) = {p2_min}, got {self.p_s2}")
        if self.c_s2 - self.c_s1 < self.L:
            raise ConfigError(
                f"stage 2 needs at least L = {self.L} sub-frames, got c_s2 - c_s1 = {self.c_s2 - self.c_s1}"
            )

        scalars = ("carrier_freq", "slot_duration", "coherence_time", "tx_power_bs",
                   "tx_power_ue", "ref_pathloss", "ref_distance")
        for name in scalars:
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise ConfigError(f"{name} must be strictly positive, got {value!r}")
        for group in ("distances", "pathloss_exps", "rician_factors"):
            for f in fields(getattr(self, group)):
                value = getattr(getattr(self, group), f.name)
                if not (math.isfinite(value) and value > 0):
                    raise ConfigError(f"{group}.{f.name} must be strictly positive, got {value!r}")
        for name in ("target_angle", "irs_bs_aoa", "irs_bs_aod"):
            if not math.isfinite(getattr(self, name)):
                raise ConfigError(f"{name} must be finite")

        if self.estimation_time >= self.coherence_time:
            raise ConfigError(
                f"estimation time {self.estimation_time:.3e} s does not fit in the "
                f"coherence time {self.coherence_time:.3e} s"
            )

    @property
    def n_subframes_s2(self) -> int:
        return self.c_s2 - self.c_s1

    @property
    def wavelength(self) -> float:
        return SPEED_OF_LIGHT / self.carrier_freq

    @property
    def element_spacing(self) -> float:
        """Half-wavelength spacing used for both the BS array and the IRS."""
        return self.wavelength / 2.0

    @property
    def subframe_durations(self) -> tuple[float, float]:
        return self.slot_duration * self.p_s1, self.slot_duration * self.p_s2

    @property
    def estimation_time(self) -> float:
        t1, t2 = self.subframe_durations
        return self.c_s1 * t1 + self.n_subframes_s2 * t2

    def rederive(self, **changes: Any) -> "SystemConfig":
        """Copy with ``changes`` applied and derived frame sizes recomputed.

        Used by dimension sweeps: ``p_s1``, ``p_s2`` and ``c_s2`` are reset to
        their minimums unless passed explicitly.
        """
        base = {f.name: getattr(self, f.name) for f in fields(self)}
        for name in ("p_s1", "p_s2", "c_s2"):
            base[name] = None
        base.update(changes)
        return SystemConfig(**base)

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "SystemConfig":
        """Build a config from a JSON-style mapping; unknown keys are errors."""
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        kwargs = dict(data)
        nested = {"distances": (LinkValues, _default_distances()),
                  "pathloss_exps": (LinkValues, _default_exponents()),
                  "rician_factors": (RicianFactors, RicianFactors())}
        for key, (kind, default) in nested.items():
            if key not in kwargs or isinstance(kwargs[key], kind):
                continue
            sub = kwargs[key]
            if not isinstance(sub, Mapping):
                raise ConfigError(f"{key} must be an object")
            sub_known = {f.name for f in fields(kind)}
            bad = set(sub) - sub_known
            if bad:
                raise ConfigError(f"unknown keys in {key}: {sorted(bad)}")
            kwargs[key] = dataclasses.replace(default, **{k: float(v) for k, v in sub.items()})
        try:
            return cls(**kwargs)
        except TypeError as exc:
            raise ConfigError(str(exc)) from exc

    @classmethod
    def from_json(cls, path: str | Path) -> "SystemConfig":
        try:
            data = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        if not isinstance(data, dict):
            raise ConfigError("config document must be a JSON object")
        return cls.from_dict(data)


PROFILES = {
    "paper": {},
    "desk": {"M": 4, "L": 8, "K": 2, "J": 2},
}


def profile_config(name: str, overrides: Mapping[str, Any] | None = None) -> SystemConfig:
    """Config for a named profile, with optional overrides applied on top."""
    if name not in PROFILES:
        raise ConfigError(f"unknown profile {name!r}; choose from {sorted(PROFILES)}")
    data = dict(PROFILES[name])
    if overrides:
        data.update(overrides)
    return SystemConfig.from_dict(data)
