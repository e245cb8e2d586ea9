"""Least-squares estimators for the direct and reflected channels.

These are both the benchmark scheme and the feature generator for the
LS-based (type-2) network inputs.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .airlink import RxRecord
from .errors import DegenerateInputError, RankDeficiencyError
from .pilots import PilotPlan


def _svd_inverse(mat: np.ndarray, ridge: float):
    u, s, vh = np.linalg.svd(mat, full_matrices=False)
    if s.size == 0 or s[0] == 0.0:
        raise DegenerateInputError("pseudoinverse of an all-zero matrix")
    tol = max(mat.shape) * np.finfo(float).eps * s[0]
    keep = s > tol
    inv_s = np.zeros_like(s)
    if ridge > 0:
        inv_s[keep] = s[keep] / (s[keep] ** 2 + ridge)
    else:
        inv_s[keep] = 1.0 / s[keep]
    return u, inv_s, vh


def pinv(mat: np.ndarray, ridge: float = 0.0) -> np.ndarray:
    """Moore-Penrose pseudoinverse via SVD.

    Singular values below ``max(a, b) * eps * s_max`` are treated as zero.
    ``ridge`` > 0 replaces ``1/s`` with ``s / (s**2 + ridge)``.
    """
    mat = np.asarray(mat)
    if mat.ndim == 1:
        mat = mat[None, :]
    u, inv_s, vh = _svd_inverse(mat, ridge)
    return (vh.conj().T * inv_s) @ u.conj().T


def lstsq_svd(mat: np.ndarray, rhs: np.ndarray, ridge: float = 0.0) -> np.ndarray:
    """``pinv(mat) @ rhs`` without forming the pseudoinverse."""
    u, inv_s, vh = _svd_inverse(np.asarray(mat), ridge)
    return vh.conj().T @ (inv_s[:, None] * (u.conj().T @ rhs))


def row_pinv(z: np.ndarray) -> np.ndarray:
    """Pseudoinverse of a single row vector as a 1-D array (``z^H / (z z^H)``)."""
    return pinv(z[None, :])[:, 0]


@dataclass
class LsEstimates:
    A_bar: np.ndarray  # (M, M)
    b_bar: np.ndarray  # (K, M)
    d_bar: np.ndarray  # (J, M)
    B_bar: np.ndarray  # (K, M, L)
    D_bar: np.ndarray  # (J, M, L)


def ls_stage1_bs(rx: RxRecord, plan: PilotPlan) -> tuple[np.ndarray, np.ndarray]:
    """Sensing and U_k-BS estimates, averaged over the stage-1 sub-frames."""
    x_pinv = plan.pinv_bs(1)
    z_pinv = plan.pinv_ue(1)  # (P1, K)
    A_bar = np.mean(rx.y_s1 @ x_pinv, axis=0).conj().T
    b_bar = np.mean(rx.y_s1 @ z_pinv, axis=0).T
    return A_bar, b_bar


def ls_stage1_ue(rx: RxRecord, plan: PilotPlan, j: int) -> np.ndarray:
    """BS-D_j estimate. The pilot pseudoinverse is that of the BS pilots."""
    x_pinv = plan.pinv_bs(1)
    return np.mean(rx.r_s1[j] @ x_pinv, axis=0).conj()


def cancel_and_separate_bs(rx: RxRecord, plan: PilotPlan, A_hat: np.ndarray,
                           b_hat: np.ndarray) -> np.ndarray:
    """Remove the direct signals from stage-2 sub-frames and split per uplink UE.

    Returns ``y_bar`` with shape (K, C2 - C1, M); ``y_bar[k, c]`` is the
    reflected signal of U_k in sub-frame c (plus residual interference).
    """
    x2, z2 = plan.tx_bs(2), plan.tx_ue(2)
    direct = A_hat.conj().T @ x2 + b_hat.T @ z2
    y_tilde = rx.y_s2 - direct[None]
    z_pinv = plan.pinv_ue(2)  # (P2, K)
    return np.transpose(y_tilde @ z_pinv, (2, 0, 1))


def _v_pinv(plan: PilotPlan) -> np.ndarray:
    L, n_sub = plan.V_s2.shape
    if n_sub < L:
        raise RankDeficiencyError(f"need at least L = {L} stage-2 sub-frames, got {n_sub}")
    return plan.pinv_v()


def ls_stage2_bs(y_bar: np.ndarray, plan: PilotPlan) -> np.ndarray:
    """U_k-IRS-BS estimates ``Y_bar_k V^+`` for every k, shape (K, M, L)."""
    v_pinv = _v_pinv(plan)
    # y_bar[k] is (C, M); its transpose stacks the separated columns.
    return np.transpose(y_bar, (0, 2, 1)) @ v_pinv


def ls_stage2_ue(rx: RxRecord, plan: PilotPlan, d_hat: np.ndarray, j: int) -> np.ndarray:
    """BS-IRS-D_j estimate from the stage-2 rows of UE ``j``."""
    v_pinv = _v_pinv(plan)
    x2 = plan.tx_bs(2)
    r_tilde = rx.r_s2[j] - (d_hat.conj() @ x2)[None, :]
    r_bar = r_tilde @ plan.pinv_bs(2)  # (C, M)
    return r_bar.conj().T @ v_pinv


def ls_stage1(rx: RxRecord, plan: PilotPlan) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    A_bar, b_bar = ls_stage1_bs(rx, plan)
    d_bar = np.stack([ls_stage1_ue(rx, plan, j) for j in range(rx.r_s1.shape[0])])
    return A_bar, b_bar, d_bar


def ls_stage2(rx: RxRecord, plan: PilotPlan, A_hat, b_hat, d_hat) -> tuple[np.ndarray, np.ndarray]:
    """Reflected-channel LS estimates given stage-1 estimates (any estimator)."""
    y_bar = cancel_and_separate_bs(rx, plan, A_hat, b_hat)
    B_bar = ls_stage2_bs(y_bar, plan)
    D_bar = np.stack([ls_stage2_ue(rx, plan, d_hat[j], j) for j in range(rx.r_s2.shape[0])])
    return B_bar, D_bar


def ls_estimate(rx: RxRecord, plan: PilotPlan) -> LsEstimates:
    """Full LS chain: stage 1, then stage 2 using the stage-1 LS results."""
    A_bar, b_bar, d_bar = ls_stage1(rx, plan)
    B_bar, D_bar = ls_stage2(rx, plan, A_bar, b_bar, d_bar)
    return LsEstimates(A_bar=A_bar, b_bar=b_bar, d_bar=d_bar, B_bar=B_bar, D_bar=D_bar)
