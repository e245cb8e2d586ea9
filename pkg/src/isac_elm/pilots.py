"""Two-stage pilot frame: DFT pilots for the BS and uplink UEs, IRS schedule."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path

import numpy as np

from .config import SystemConfig
from .errors import InvalidArgumentError


def dft_matrix(rows: int, cols: int) -> np.ndarray:
    """First ``rows`` rows of the ``cols``-point DFT matrix, entry ``exp(j 2pi n u / cols)``."""
    if rows < 1 or cols < 1:
        raise InvalidArgumentError("rows and cols must be positive")
    if rows > cols:
        raise InvalidArgumentError(f"rows ({rows}) > cols ({cols}): rows would not be orthogonal")
    n = np.arange(rows)[:, None]
    u = np.arange(cols)[None, :]
    return np.exp(1j * 2.0 * np.pi * n * u / cols)


@dataclass(frozen=True)
class PilotPlan:
    """Pilot matrices for both stages and the stage-2 IRS phase schedule.

    ``X_s1``/``X_s2`` and ``z_s1``/``z_s2`` are the unit-normalized designs
    (BS rows scaled by 1/sqrt(M), UE rows unit modulus).  The transmit
    amplitudes ``amp_bs``/``amp_ue`` (sqrt of the transmit powers) are applied
    on air; use :meth:`tx_bs` / :meth:`tx_ue` for the effective pilots.
    """

    X_s1: np.ndarray  # (M, P1)
    X_s2: np.ndarray  # (M, P2)
    z_s1: np.ndarray  # (K, P1)
    z_s2: np.ndarray  # (K, P2)
    V_s2: np.ndarray  # (L, C2 - C1)
    amp_bs: float = 1.0
    amp_ue: float = 1.0
    irs_on_s1: bool = False

    def tx_bs(self, stage: int) -> np.ndarray:
        return self.amp_bs * (self.X_s1 if stage == 1 else self.X_s2)

    def tx_ue(self, stage: int) -> np.ndarray:
        return self.amp_ue * (self.z_s1 if stage == 1 else self.z_s2)

    def pinv_bs(self, stage: int) -> np.ndarray:
        """Pseudoinverse of the effective BS pilots, shape (P, M); cached."""
        return self._pinvs["bs"][stage - 1]

    def pinv_ue(self, stage: int) -> np.ndarray:
        """Row-wise pseudoinverses of the effective UE pilots stacked as (P, K); cached."""
        return self._pinvs["ue"][stage - 1]

    def pinv_v(self) -> np.ndarray:
        return self._pinvs["v"]

    @cached_property
    def _pinvs(self) -> dict:
        from .ls import pinv, row_pinv  # ls imports this module

        def rows(z):
            return np.stack([row_pinv(zk) for zk in z], axis=1)

        return {"bs": (pinv(self.tx_bs(1)), pinv(self.tx_bs(2))),
                "ue": (rows(self.tx_ue(1)), rows(self.tx_ue(2))),
                "v": pinv(self.V_s2)}

    def dump_csv(self, path: str | Path) -> None:
        """Write every pilot entry as ``name,row,col,re,im`` for inspection."""
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["name", "row", "col", "re", "im"])
            for name in ("X_s1", "X_s2", "z_s1", "z_s2", "V_s2"):
                mat = getattr(self, name)
                for (r, c), val in np.ndenumerate(mat):
                    writer.writerow([name, r, c, repr(val.real), repr(val.imag)])


def build_pilot_plan(cfg: SystemConfig, amp_bs: float | None = None,
                     amp_ue: float | None = None) -> PilotPlan:
    """Build the pilot plan; amplitudes default to sqrt of the configured powers."""
    M, K = cfg.M, cfg.K
    q1 = dft_matrix(M + K, cfg.p_s1)
    q2 = dft_matrix(max(M, K), cfg.p_s2)
    return PilotPlan(
        X_s1=q1[:M] / math.sqrt(M),
        z_s1=q1[M:M + K].copy(),
        X_s2=q2[:M] / math.sqrt(M),
        z_s2=q2[:K].copy(),
        V_s2=dft_matrix(cfg.L, cfg.n_subframes_s2),
        amp_bs=math.sqrt(cfg.tx_power_bs) if amp_bs is None else amp_bs,
        amp_ue=math.sqrt(cfg.tx_power_ue) if amp_ue is None else amp_ue,
    )
