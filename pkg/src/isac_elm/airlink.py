"""Received pilot signals at the ISAC BS and the downlink UEs."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

from .channels import ChannelSet, link_gain
from .config import SystemConfig
from .errors import InvalidArgumentError
from .pilots import PilotPlan
from .rng import complex_normal

NoiseVar = Union[float, Sequence[float]]


@dataclass
class RxRecord:
    """Noisy sub-frames of both stages.

    ``y_s1[c]`` is the BS matrix of the c-th stage-1 sub-frame and
    ``r_s1[j, c]`` the matching row received by downlink UE ``j``.  Noise
    variances are stored per stage as ``(stage1, stage2)``.
    """

    y_s1: np.ndarray  # (C1, M, P1)
    y_s2: np.ndarray  # (C2 - C1, M, P2)
    r_s1: np.ndarray  # (J, C1, P1)
    r_s2: np.ndarray  # (J, C2 - C1, P2)
    noise_var_bs: tuple[float, float]
    noise_var_ue: tuple[float, float]


def _is_bs(receiver: str) -> bool:
    if receiver == "BS":
        return True
    if receiver == "UE" or (receiver.startswith("D") and receiver[1:].isdigit()):
        return False
    raise InvalidArgumentError(f"unknown receiver {receiver!r}")


def received_power(cfg: SystemConfig, stage: int, receiver: str) -> float:
    """Received signal power used to define the per-receiver SNR.

    ``receiver`` is ``"BS"`` or a downlink UE (``"UE"`` or ``"D<j>"``; all
    downlink UEs share one geometry).
    """
    if stage not in (1, 2):
        raise InvalidArgumentError(f"stage must be 1 or 2, got {stage}")
    p_b, p_u = cfg.tx_power_bs, cfg.tx_power_ue
    if _is_bs(receiver):
        power = p_b * link_gain(cfg, "sensing") + p_u * link_gain(cfg, "ue_bs")
        if stage == 2:
            power += p_u * link_gain(cfg, "ue_irs") * link_gain(cfg, "irs_bs")
        return power
    power = p_b * link_gain(cfg, "bs_ue")
    if stage == 2:
        power += p_b * link_gain(cfg, "irs_ue") * link_gain(cfg, "irs_bs")
    return power


def noise_var_for_snr(cfg: SystemConfig, stage: int, receiver: str, snr_db: float) -> float:
    """Noise variance giving ``snr_db`` at the receiver; +inf dB maps to 0."""
    if math.isinf(snr_db) and snr_db > 0:
        return 0.0
    return received_power(cfg, stage, receiver) / 10.0 ** (snr_db / 10.0)


def noise_levels(cfg: SystemConfig, snr_db: float) -> tuple[tuple[float, float], tuple[float, float]]:
    """``((bs_s1, bs_s2), (ue_s1, ue_s2))`` noise variances for one SNR."""
    bs = tuple(noise_var_for_snr(cfg, s, "BS", snr_db) for s in (1, 2))
    ue = tuple(noise_var_for_snr(cfg, s, "UE", snr_db) for s in (1, 2))
    return bs, ue


def _pair(value: NoiseVar) -> tuple[float, float]:
    if np.ndim(value) == 0:
        return float(value), float(value)
    a, b = value
    return float(a), float(b)


def transmit(cfg: SystemConfig, plan: PilotPlan, ch: ChannelSet, noise_var_bs: NoiseVar,
             noise_var_ue: NoiseVar, rng: np.random.Generator) -> RxRecord:
    """Synthesize one reception of both stages.

    Stage 1 runs with the IRS off, stage 2 with every element on and the
    phase vector of sub-frame ``c`` taken from column ``c`` of ``plan.V_s2``.
    Residual self-interference is assumed compensated and not modeled.
    """
    M, K, J, L = cfg.M, cfg.K, cfg.J, cfg.L
    c1, c2 = cfg.c_s1, cfg.n_subframes_s2
    if plan.X_s1.shape != (M, cfg.p_s1) or plan.X_s2.shape != (M, cfg.p_s2):
        raise InvalidArgumentError("pilot plan does not match the configuration")
    if plan.z_s1.shape[0] != K or plan.V_s2.shape != (L, c2):
        raise InvalidArgumentError("pilot plan does not match the configuration")
    if ch.A.shape != (M, M) or ch.B.shape != (K, M, L) or ch.D.shape != (J, M, L):
        raise InvalidArgumentError("channel set does not match the configuration")

    nb1, nb2 = _pair(noise_var_bs)
    nu1, nu2 = _pair(noise_var_ue)
    x1, x2 = plan.tx_bs(1), plan.tx_bs(2)
    z1, z2 = plan.tx_ue(1), plan.tx_ue(2)

    clean_y1 = ch.A.conj().T @ x1 + ch.b.T @ z1
    y_s1 = clean_y1[None] + complex_normal(rng, (c1, M, cfg.p_s1), nb1)
    clean_r1 = ch.d.conj() @ x1
    r_s1 = clean_r1[:, None, :] + complex_normal(rng, (J, c1, cfg.p_s1), nu1)

    # Uplink effective channel per sub-frame: b_k + B_k v_c, shape (C2-C1, M, K).
    up = ch.b.T[None] + np.einsum("kml,lc->cmk", ch.B, plan.V_s2)
    clean_y2 = up @ z2 + (ch.A.conj().T @ x2)[None]
    y_s2 = clean_y2 + complex_normal(rng, (c2, M, cfg.p_s2), nb2)
    # Downlink: (d_j + D_j v_c)^H X.
    down = ch.d[:, None, :] + np.einsum("jml,lc->jcm", ch.D, plan.V_s2)
    clean_r2 = down.conj() @ x2
    r_s2 = clean_r2 + complex_normal(rng, (J, c2, cfg.p_s2), nu2)

    return RxRecord(y_s1=y_s1, y_s2=y_s2, r_s1=r_s1, r_s2=r_s2,
                    noise_var_bs=(nb1, nb2), noise_var_ue=(nu1, nu2))
