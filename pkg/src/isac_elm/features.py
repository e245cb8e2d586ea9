"""Network input/output design, data augmentation and training datasets.

A *family* selects one network: estimation stage (1 = direct channels,
2 = reflected channels), input type (1 = raw received sub-frames,
2 = LS estimates) and receiver (the BS or downlink UE ``D<j>``).
"""

from __future__ import annotations

import re
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from . import binio
from .airlink import RxRecord, noise_levels, transmit
from .channels import ChannelSet, cascades, gen_channel_set
from .config import SystemConfig
from .errors import DependencyError, InvalidArgumentError
from .ls import ls_stage1_bs, ls_stage1_ue, ls_stage1, ls_stage2
from .pilots import PilotPlan
from .rng import complex_normal, stream

_FAMILY_RE = re.compile(r"^S([12])I([12])-(BS|D(\d+))$")


@dataclass(frozen=True, order=True)
class Family:
    stage: int
    input_type: int
    receiver: str  # "BS" or "D<j>" with 1-based j

    def __post_init__(self):
        if self.stage not in (1, 2) or self.input_type not in (1, 2):
            raise InvalidArgumentError(f"bad family {self}")
        if self.receiver != "BS" and not re.fullmatch(r"D[1-9]\d*", self.receiver):
            raise InvalidArgumentError(f"bad receiver {self.receiver!r}")

    @property
    def name(self) -> str:
        return f"S{self.stage}I{self.input_type}-{self.receiver}"

    @property
    def at_bs(self) -> bool:
        return self.receiver == "BS"

    @property
    def ue_index(self) -> int:
        """0-based downlink UE index."""
        if self.at_bs:
            raise InvalidArgumentError("BS family has no UE index")
        return int(self.receiver[1:]) - 1

    @property
    def channels(self) -> tuple[str, ...]:
        """Channel groups estimated by this family's network, in output order."""
        if self.at_bs:
            return ("A", "b") if self.stage == 1 else ("B",)
        return ("d",) if self.stage == 1 else ("D",)

    def __str__(self) -> str:
        return self.name


def parse_family(text: str) -> Family:
    m = _FAMILY_RE.match(text.strip())
    if not m:
        raise InvalidArgumentError(f"cannot parse family {text!r} (expected e.g. S1I2-BS or S2I1-D1)")
    return Family(int(m.group(1)), int(m.group(2)), m.group(3))


def all_families(cfg: SystemConfig, input_types: Iterable[int] = (1, 2)) -> list[Family]:
    receivers = ["BS"] + [f"D{j + 1}" for j in range(cfg.J)]
    return [Family(s, t, r) for s in (1, 2) for t in input_types for r in receivers]


def input_length(family: Family, cfg: SystemConfig) -> int:
    M, K, L = cfg.M, cfg.K, cfg.L
    frames2 = cfg.p_s2 * cfg.n_subframes_s2
    table = {
        (1, 1, True): 2 * M * cfg.p_s1 * cfg.c_s1,
        (1, 2, True): 2 * M * (M + K),
        (1, 1, False): 2 * cfg.p_s1 * cfg.c_s1,
        (1, 2, False): 2 * M,
        (2, 1, True): 2 * M * (frames2 + M + K),
        (2, 2, True): 2 * M * L * K,
        (2, 1, False): 2 * (frames2 + M),
        (2, 2, False): 2 * M * L,
    }
    return table[(family.stage, family.input_type, family.at_bs)]


def target_length(family: Family, cfg: SystemConfig) -> int:
    M, K, L = cfg.M, cfg.K, cfg.L
    if family.at_bs:
        return 2 * M * (M + K) if family.stage == 1 else 2 * M * L * K
    return 2 * M if family.stage == 1 else 2 * M * L


def realify(blocks: Sequence[np.ndarray] | np.ndarray) -> np.ndarray:
    """Column-major vectorize each block, concatenate, then stack [Re; Im]."""
    if isinstance(blocks, np.ndarray) or np.isscalar(blocks):
        blocks = [blocks]
    flat = np.concatenate([np.ravel(np.asarray(b, dtype=complex), order="F") for b in blocks])
    return np.concatenate([flat.real, flat.imag])


def complexify(vec: np.ndarray) -> np.ndarray:
    vec = np.asarray(vec, dtype=float)
    n = vec.shape[-1]
    if n % 2:
        raise InvalidArgumentError(f"length must be even, got {n}")
    return vec[..., : n // 2] + 1j * vec[..., n // 2:]


def _row_blocks(rows: np.ndarray) -> list[np.ndarray]:
    return [r[None, :] for r in rows]


def build_input(family: Family, rx: RxRecord, plan: PilotPlan,
                direct: tuple[np.ndarray, np.ndarray, np.ndarray] | None = None,
                reflected: tuple[np.ndarray, np.ndarray] | None = None) -> np.ndarray:
    """Real input vector for ``family`` from one reception.

    Stage-2 families need the stage-1 estimates ``direct = (A_hat, b_hat,
    d_hat)``.  ``reflected = (B_bar, D_bar)`` may be passed to reuse already
    computed stage-2 LS estimates for type-2 inputs.
    """
    if family.stage == 1:
        if family.at_bs:
            if family.input_type == 1:
                return realify(list(rx.y_s1))
            A_bar, b_bar = ls_stage1_bs(rx, plan)
            return realify([A_bar] + _row_blocks(b_bar))
        j = family.ue_index
        if family.input_type == 1:
            return realify(list(rx.r_s1[j]))
        return realify(ls_stage1_ue(rx, plan, j))

    if direct is None:
        raise DependencyError(f"{family.name} needs stage-1 channel estimates")
    A_hat, b_hat, d_hat = direct
    if family.input_type == 1:
        if family.at_bs:
            return realify(list(rx.y_s2) + [A_hat] + _row_blocks(b_hat))
        j = family.ue_index
        return realify(list(rx.r_s2[j]) + [d_hat[j][None, :]])
    if reflected is None:
        reflected = ls_stage2(rx, plan, A_hat, b_hat, d_hat)
    B_bar, D_bar = reflected
    if family.at_bs:
        return realify(list(B_bar))
    return realify(D_bar[family.ue_index])


def build_target(ch: ChannelSet, family: Family) -> np.ndarray:
    if family.at_bs:
        if family.stage == 1:
            return realify([ch.A] + _row_blocks(ch.b))
        return realify(list(ch.B))
    j = family.ue_index
    return realify(ch.d[j]) if family.stage == 1 else realify(ch.D[j])


def unpack_output(family: Family, vec: np.ndarray, cfg: SystemConfig) -> dict[str, np.ndarray]:
    """Inverse of :func:`build_target`: split a real output into channel blocks."""
    c = complexify(vec)
    M, K, L = cfg.M, cfg.K, cfg.L
    if family.at_bs and family.stage == 1:
        A = c[: M * M].reshape((M, M), order="F")
        b = c[M * M:].reshape((K, M))
        return {"A": A, "b": b}
    if family.at_bs:
        return {"B": c.reshape((K, L, M)).transpose(0, 2, 1)}
    if family.stage == 1:
        return {"d": c}
    return {"D": c.reshape((M, L), order="F")}


def augment(ch: ChannelSet, aug_snr_db: float, rng: np.random.Generator) -> ChannelSet:
    """Synthetic copy of ``ch``: per-block complex noise at ``aug_snr_db``.

    Each block (A, H and every per-user vector) is perturbed with variance
    ``P_ch / 10**(aug_snr_db/10)`` where ``P_ch`` is that block's mean entry
    power; reflected cascades are rebuilt from the perturbed H, g, f.
    """
    if not np.isfinite(aug_snr_db):
        raise InvalidArgumentError("aug_snr_db must be finite")
    scale = 10.0 ** (-aug_snr_db / 10.0)

    def perturb(x):
        p_ch = np.mean(np.abs(x) ** 2)
        return x + complex_normal(rng, x.shape, p_ch * scale)

    A = perturb(ch.A)
    H = perturb(ch.H)
    b = np.stack([perturb(v) for v in ch.b])
    g = np.stack([perturb(v) for v in ch.g])
    d = np.stack([perturb(v) for v in ch.d])
    f = np.stack([perturb(v) for v in ch.f])
    B, D = cascades(H, g, f)
    return ChannelSet(A=A, b=b, g=g, H=H, d=d, f=f, B=B, D=D)


@dataclass
class Sample:
    input: np.ndarray
    target: np.ndarray
    meta: dict


@dataclass
class Dataset:
    family: Family
    inputs: np.ndarray   # (N, n_input)
    targets: np.ndarray  # (N, n_output)
    meta: np.ndarray     # (N, 3): snr_db, v, q
    v_count: int
    q_count: int
    snr_grid: list[float]
    aug_snr_db: float
    seed: int = 0
    extra: dict = field(default_factory=dict)

    def __len__(self) -> int:
        return self.inputs.shape[0]

    @property
    def samples(self) -> list[Sample]:
        f = self.family
        return [
            Sample(self.inputs[i], self.targets[i],
                   {"stage": f.stage, "input_type": f.input_type, "receiver": f.receiver,
                    "snr_db": float(m[0]), "realization_index": int(m[1]), "copy_index": int(m[2])})
            for i, m in enumerate(self.meta)
        ]

    def save(self, path: str | Path) -> None:
        header = {
            "kind": "dataset", "family": self.family.name,
            "input_length": self.inputs.shape[1], "target_length": self.targets.shape[1],
            "count": len(self), "v_count": self.v_count, "q_count": self.q_count,
            "snr_grid": list(self.snr_grid), "aug_snr_db": self.aug_snr_db, "seed": self.seed,
            **self.extra,
        }
        binio.write_blob(path, header, {"inputs": self.inputs, "targets": self.targets,
                                         "meta": self.meta})

    @classmethod
    def load(cls, path: str | Path) -> "Dataset":
        header, arrays = binio.read_blob(path)
        if header.get("kind") != "dataset":
            raise InvalidArgumentError(f"{path} is not a dataset file")
        known = {"kind", "family", "input_length", "target_length", "count", "v_count",
                 "q_count", "snr_grid", "aug_snr_db", "seed"}
        return cls(family=parse_family(header["family"]), inputs=arrays["inputs"],
                   targets=arrays["targets"], meta=arrays["meta"], v_count=header["v_count"],
                   q_count=header["q_count"], snr_grid=header["snr_grid"],
                   aug_snr_db=header["aug_snr_db"], seed=header["seed"],
                   extra={k: v for k, v in header.items() if k not in known})


def _simulate_realization(cfg, plan, families, snr_db, si, v, q_count, aug_snr_db, seed):
    """All (input, target) pairs of one channel realization, for every family."""
    ch = gen_channel_set(cfg, stream(seed, "train-channel", si, v))
    noise_bs, noise_ue = noise_levels(cfg, snr_db)
    need_s2 = any(f.stage == 2 for f in families)
    out = {f: ([], []) for f in families}
    targets = {f: build_target(ch, f) for f in families}
    for q in range(q_count):
        seen = ch if q == 0 else augment(ch, aug_snr_db, stream(seed, "train-aug", si, v, q))
        rx = transmit(cfg, plan, seen, noise_bs, noise_ue, stream(seed, "train-rx", si, v, q))
        direct = reflected = None
        if need_s2:
            # Training inputs chain on LS stage-1 estimates.
            direct = ls_stage1(rx, plan)
            if any(f.stage == 2 and f.input_type == 2 for f in families):
                reflected = ls_stage2(rx, plan, *direct)
        for f in families:
            out[f][0].append(build_input(f, rx, plan, direct, reflected))
            out[f][1].append(targets[f])
    return out


def build_datasets(cfg: SystemConfig, plan: PilotPlan, families: Sequence[Family],
                   snr_grid: Sequence[float], v_count: int, q_count: int,
                   aug_snr_db: float, seed: int, workers: int = 1) -> dict[Family, Dataset]:
    """Training sets for several families from shared channel realizations.

    Copy ``q = 0`` of realization ``v`` uses the drawn channels; copies
    ``q >= 1`` use augmented channels with fresh receiver noise.  Every
    sample's target is the original (unperturbed) channel.  Samples are
    ordered by (snr, v, q) regardless of ``workers``.
    """
    families = list(families)
    jobs = [(si, snr, v) for si, snr in enumerate(snr_grid) for v in range(v_count)]

    def run(job):
        si, snr, v = job
        return _simulate_realization(cfg, plan, families, snr, si, v, q_count, aug_snr_db, seed)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(run, jobs))
    else:
        results = [run(job) for job in jobs]

    meta = np.array([(snr, v, q) for _, snr, v in jobs for q in range(q_count)], dtype=float)
    datasets = {}
    for f in families:
        inputs = np.array([x for res in results for x in res[f][0]])
        targets = np.array([y for res in results for y in res[f][1]])
        datasets[f] = Dataset(family=f, inputs=inputs, targets=targets, meta=meta.copy(),
                              v_count=v_count, q_count=q_count, snr_grid=list(snr_grid),
                              aug_snr_db=aug_snr_db, seed=seed)
    return datasets


def build_dataset(cfg: SystemConfig, plan: PilotPlan, family: Family, snr_grid: Sequence[float],
                  v_count: int, q_count: int, aug_snr_db: float, seed: int,
                  workers: int = 1) -> Dataset:
    return build_datasets(cfg, plan, [family], snr_grid, v_count, q_count, aug_snr_db,
                          seed, workers)[family]
