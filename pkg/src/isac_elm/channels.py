"""Stochastic channel generation: steering vectors, path loss, Rician links."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .config import SystemConfig
from .errors import InvalidArgumentError
from .rng import complex_normal

# Stand-in for an infinite Rician factor.
RICIAN_K_INF = 1e12


def steering_vector(angle: float, spacing: float, wavelength: float, n_elems: int) -> np.ndarray:
    """Uniform linear array response ``exp(j 2 pi spacing/wavelength * m * sin(angle))``."""
    if not math.isfinite(angle):
        raise InvalidArgumentError(f"angle must be finite, got {angle!r}")
    if n_elems < 1:
        raise InvalidArgumentError("n_elems must be >= 1")
    if not wavelength > 0:
        raise InvalidArgumentError("wavelength must be positive")
    m = np.arange(n_elems)
    return np.exp(1j * 2.0 * np.pi * spacing / wavelength * m * np.sin(angle))


def path_loss(distance: float, exponent: float, cfg: SystemConfig) -> float:
    """Distance-dependent linear path gain ``xi_0 * (d / d_0) ** -exponent``."""
    if distance < cfg.ref_distance:
        raise InvalidArgumentError(
            f"distance {distance} is below the reference distance {cfg.ref_distance}"
        )
    return cfg.ref_pathloss * (distance / cfg.ref_distance) ** (-exponent)


def link_gain(cfg: SystemConfig, link: str) -> float:
    return path_loss(getattr(cfg.distances, link), getattr(cfg.pathloss_exps, link), cfg)


def _safe_arcsin(x: float) -> float:
    # The geometry formulas can exceed 1 (e.g. d_IB / (2 d_UkI) = 12.5 with
    # the default distances); saturate to the endfire direction.
    return math.asin(max(-1.0, min(1.0, x)))


def link_angles(cfg: SystemConfig) -> dict[str, float]:
    """LoS angles (radians) for every link, from the deployment geometry."""
    d = cfg.distances
    return {
        "sensing": cfg.target_angle,
        "irs_bs_aoa": cfg.irs_bs_aoa,
        "irs_bs_aod": cfg.irs_bs_aod,
        "ue_bs": _safe_arcsin(d.irs_bs / (2.0 * d.ue_bs)) - math.pi,
        "ue_irs": math.pi - _safe_arcsin(d.irs_bs / (2.0 * d.ue_irs)),
        "bs_ue": _safe_arcsin(d.irs_bs / (2.0 * d.bs_ue)),
        "irs_ue": -_safe_arcsin(d.irs_bs / (2.0 * d.irs_ue)),
    }


def gen_sensing_channel(cfg: SystemConfig, rng: np.random.Generator | None = None,
                        phase: float | None = None) -> np.ndarray:
    """Rank-one target response ``sqrt(xi_S) * alpha * a a^T`` with ``|alpha| = 1``.

    The phase of ``alpha`` is drawn uniformly from ``rng`` unless ``phase`` is
    given.
    """
    if phase is None:
        if rng is None:
            raise InvalidArgumentError("either rng or phase is required")
        phase = rng.uniform(0.0, 2.0 * np.pi)
    a = steering_vector(cfg.target_angle, cfg.element_spacing, cfg.wavelength, cfg.M)
    alpha = np.exp(1j * phase)
    return math.sqrt(link_gain(cfg, "sensing")) * alpha * np.outer(a, a)


def gen_rician_channel(los_component: np.ndarray, rician_k: float, path_gain: float,
                       rng: np.random.Generator) -> np.ndarray:
    if rician_k < 0:
        raise InvalidArgumentError("rician_k must be non-negative")
    los = np.asarray(los_component, dtype=complex)
    nlos = complex_normal(rng, los.shape)
    return math.sqrt(path_gain) * (
        math.sqrt(rician_k / (rician_k + 1.0)) * los + math.sqrt(1.0 / (rician_k + 1.0)) * nlos
    )


@dataclass
class ChannelSet:
    """One realization of every sensing and communication channel.

    Per-user channels are stacked on the leading axis: ``b[k]`` is the
    U_k-BS vector, ``B[k] = H diag(g[k])`` the U_k-IRS-BS cascade, and so on.
    """

    A: np.ndarray  # (M, M)
    b: np.ndarray  # (K, M)
    g: np.ndarray  # (K, L)
    H: np.ndarray  # (M, L)
    d: np.ndarray  # (J, M)
    f: np.ndarray  # (J, L)
    B: np.ndarray | None = None  # (K, M, L)
    D: np.ndarray | None = None  # (J, M, L)

    def __post_init__(self):
        if self.B is None or self.D is None:
            self.B, self.D = cascades(self.H, self.g, self.f)

    @property
    def base_blocks(self) -> dict[str, np.ndarray]:
        return {"A": self.A, "b": self.b, "g": self.g, "H": self.H, "d": self.d, "f": self.f}

    def tobytes(self) -> bytes:
        parts = [self.A, self.b, self.g, self.H, self.d, self.f, self.B, self.D]
        return b"".join(np.ascontiguousarray(p).tobytes() for p in parts)


def cascades(H: np.ndarray, g: np.ndarray, f: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Reflected channels ``H diag(g_k)`` and ``H diag(f_j)`` for every user."""
    return H[None, :, :] * g[:, None, :], H[None, :, :] * f[:, None, :]


def gen_channel_set(cfg: SystemConfig, rng: np.random.Generator) -> ChannelSet:
    """Draw one ChannelSet. Draw order is fixed so a seeded rng is reproducible."""
    spacing, lam = cfg.element_spacing, cfg.wavelength
    ang = link_angles(cfg)
    kf = cfg.rician_factors

    def sv(angle, n):
        return steering_vector(angle, spacing, lam, n)

    A = gen_sensing_channel(cfg, rng)
    h_los = np.outer(sv(ang["irs_bs_aoa"], cfg.M), sv(ang["irs_bs_aod"], cfg.L).conj())
    H = gen_rician_channel(h_los, kf.irs_bs, link_gain(cfg, "irs_bs"), rng)

    b_los, g_los = sv(ang["ue_bs"], cfg.M), sv(ang["ue_irs"], cfg.L)
    b = np.stack([gen_rician_channel(b_los, kf.ue_bs, link_gain(cfg, "ue_bs"), rng)
                  for _ in range(cfg.K)])
    g = np.stack([gen_rician_channel(g_los, kf.ue_irs, link_gain(cfg, "ue_irs"), rng)
                  for _ in range(cfg.K)])

    d_los, f_los = sv(ang["bs_ue"], cfg.M), sv(ang["irs_ue"], cfg.L)
    d = np.stack([gen_rician_channel(d_los, kf.bs_ue, link_gain(cfg, "bs_ue"), rng)
                  for _ in range(cfg.J)])
    f = np.stack([gen_rician_channel(f_los, kf.irs_ue, link_gain(cfg, "irs_ue"), rng)
                  for _ in range(cfg.J)])
    return ChannelSet(A=A, b=b, g=g, H=H, d=d, f=f)
