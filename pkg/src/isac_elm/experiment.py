"""Experiment runner: offline training, online testing, NMSE sweeps."""

from __future__ import annotations

import csv
import io
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from . import elm
from .airlink import noise_levels, transmit
from .channels import gen_channel_set
from .config import SystemConfig, profile_config
from .errors import DegenerateInputError, DependencyError, InvalidArgumentError
from .features import (Family, all_families, build_datasets, build_input, input_length,
                       target_length, unpack_output)
from .ls import ls_estimate, ls_stage2
from .pilots import build_pilot_plan
from .rng import stream, tag_code

log = logging.getLogger(__name__)

CSV_HEADER = ["estimator", "stage", "input_type", "receiver", "channel", "snr_db", "nmse",
              "n_test", "seed"]

# channel group -> (row label, stage, receiver)
CHANNEL_ROWS = {
    "A": ("A", 1, "BS"),
    "b": ("b_k", 1, "BS"),
    "d": ("d_j", 1, "UE"),
    "B": ("B_k", 2, "BS"),
    "D": ("D_j", 2, "UE"),
}
CHANNEL_ORDER = ("A", "b", "d", "B", "D")


def nmse(estimated: np.ndarray, actual: np.ndarray, axis: int | None = None) -> float:
    """Normalized squared error ``||est - act||_F^2 / ||act||_F^2``.

    With ``axis`` set, that axis indexes realizations and the per-realization
    ratios are averaged.
    """
    est = np.asarray(estimated)
    act = np.asarray(actual)
    if est.shape != act.shape:
        raise InvalidArgumentError(f"shape mismatch {est.shape} vs {act.shape}")
    if axis is None:
        denom = np.sum(np.abs(act) ** 2)
        if denom == 0:
            raise DegenerateInputError("actual channel is all zeros")
        return float(np.sum(np.abs(est - act) ** 2) / denom)
    est = np.moveaxis(est, axis, 0).reshape(est.shape[axis], -1)
    act = np.moveaxis(act, axis, 0).reshape(act.shape[axis], -1)
    denom = np.sum(np.abs(act) ** 2, axis=1)
    if np.any(denom == 0):
        raise DegenerateInputError("actual channel is all zeros")
    return float(np.mean(np.sum(np.abs(est - act) ** 2, axis=1) / denom))


@dataclass
class ExperimentSpec:
    cfg: SystemConfig
    families: list[Family]
    train_snr_grid_db: list[float] = field(default_factory=lambda: [15.0, 20.0])
    test_snr_grid_db: list[float] = field(
        default_factory=lambda: [float(x) for x in np.arange(-10.0, 20.0 + 1e-9, 2.5)])
    v_count: int = 200
    q_count: int = 5
    aug_snr_db: float = 30.0
    n_test: int = 200
    estimators: tuple[str, ...] = ("LS", "ELM")
    hidden: tuple[int, int] = (200, 400)
    seed: int = 0
    workers: int = 1
    output_path: str | None = None

    def __post_init__(self):
        if not self.train_snr_grid_db or not self.test_snr_grid_db:
            raise InvalidArgumentError("SNR grids must be non-empty")
        if self.n_test < 1:
            raise InvalidArgumentError("n_test must be >= 1")
        if not self.families:
            raise InvalidArgumentError("at least one family is required")
        bad = set(self.estimators) - {"LS", "ELM"}
        if bad or not self.estimators:
            raise InvalidArgumentError(f"estimators must be a subset of LS, ELM; got {self.estimators}")
        fams = set(self.families)
        for f in self.families:
            if f.stage == 2 and "ELM" in self.estimators:
                needed = Family(1, f.input_type, f.receiver)
                if needed not in fams:
                    raise DependencyError(f"{f.name} is chained on {needed.name}, which is not selected")
            if not f.at_bs and f.ue_index >= self.cfg.J:
                raise InvalidArgumentError(f"{f.name}: config has only J = {self.cfg.J} downlink UEs")

    @property
    def input_types(self) -> list[int]:
        return sorted({f.input_type for f in self.families})

    @property
    def channel_groups(self) -> list[str]:
        groups = {g for f in self.families for g in f.channels}
        return [g for g in CHANNEL_ORDER if g in groups]


PROFILE_SCALES = {
    "desk": {"v_count": 200, "q_count": 5, "n_test": 200, "hidden": (200, 400)},
    "paper": {"v_count": 1000, "q_count": 10, "n_test": 1000, "hidden": (700, 1300)},
}


def profile_spec(profile: str, cfg: SystemConfig | None = None, **overrides) -> ExperimentSpec:
    """Experiment defaults for ``profile`` ("desk" or "paper")."""
    if cfg is None:
        cfg = profile_config(profile)
    scale = dict(PROFILE_SCALES[profile])
    scale.update(overrides)
    families = scale.pop("families", None) or all_families(cfg)
    return ExperimentSpec(cfg=cfg, families=list(families), **scale)


@dataclass(frozen=True)
class ResultRow:
    estimator: str
    stage: int
    input_type: str
    receiver: str
    channel: str
    snr_db: float
    nmse: float
    n_test: int
    seed: int

    def as_csv(self) -> list[str]:
        return [self.estimator, str(self.stage), self.input_type, self.receiver, self.channel,
                _fmt(self.snr_db), repr(float(self.nmse)), str(self.n_test), str(self.seed)]


def _fmt(x: float) -> str:
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return repr(float(x))


def elm_spec_for(family: Family, cfg: SystemConfig, hidden: tuple[int, int], seed: int) -> elm.ElmSpec:
    n_in, n_out = input_length(family, cfg), target_length(family, cfg)
    init_seed = (int(seed) * 1_000_003 + tag_code(family.name)) & ((1 << 63) - 1)
    if family.stage == 1:
        return elm.de_elm(n_in, n_out, hidden[0], init_seed)
    return elm.re_elm(n_in, n_out, hidden[1], init_seed)


def train_models(spec: ExperimentSpec, datasets=None) -> dict[Family, elm.ElmModel]:
    """Offline phase: generate the training sets and fit one network per family."""
    cfg = spec.cfg
    plan = build_pilot_plan(cfg)
    if datasets is None:
        datasets = build_datasets(cfg, plan, spec.families, spec.train_snr_grid_db, spec.v_count,
                                  spec.q_count, spec.aug_snr_db, spec.seed, spec.workers)
    models = {}
    for fam in spec.families:
        ds = datasets[fam]
        models[fam] = elm.fit(elm_spec_for(fam, cfg, spec.hidden, spec.seed), ds.inputs, ds.targets)
        log.info("trained %s on %d samples", fam.name, len(ds))
    return models


def _simulate_test(cfg, plan, snr_db, ti, n, seed):
    ch = gen_channel_set(cfg, stream(seed, "test-channel", ti, n))
    noise_bs, noise_ue = noise_levels(cfg, snr_db)
    rx = transmit(cfg, plan, ch, noise_bs, noise_ue, stream(seed, "test-rx", ti, n))
    return ch, rx


def _true_blocks(channels) -> dict[str, np.ndarray]:
    return {"A": np.stack([c.A for c in channels]), "b": np.stack([c.b for c in channels]),
            "d": np.stack([c.d for c in channels]), "B": np.stack([c.B for c in channels]),
            "D": np.stack([c.D for c in channels])}


def _per_user_nmse(est: np.ndarray, act: np.ndarray) -> float:
    """Average NMSE over realizations and users (axes 0 and 1)."""
    n, users = act.shape[:2]
    return nmse(est.reshape((n * users,) + act.shape[2:]),
                act.reshape((n * users,) + act.shape[2:]), axis=0)


def _block_nmse(group: str, est: np.ndarray, act: np.ndarray) -> float:
    return nmse(est, act, axis=0) if group == "A" else _per_user_nmse(est, act)


def _elm_estimates(spec, models, plan, rxs, input_type):
    """Online phase for one input type: stage-1 networks, then chained stage 2."""
    cfg = spec.cfg
    n = len(rxs)
    fams = [f for f in spec.families if f.input_type == input_type]
    est: dict[str, np.ndarray] = {}
    A_hat = np.zeros((n, cfg.M, cfg.M), complex)
    b_hat = np.zeros((n, cfg.K, cfg.M), complex)
    d_hat = np.zeros((n, cfg.J, cfg.M), complex)
    ue_seen = []
    for f in (f for f in fams if f.stage == 1):
        X = np.array([build_input(f, rx, plan) for rx in rxs])
        outs = elm.predict(models[f], X)
        for i, vec in enumerate(outs):
            blocks = unpack_output(f, vec, cfg)
            if f.at_bs:
                A_hat[i], b_hat[i] = blocks["A"], blocks["b"]
            else:
                d_hat[i, f.ue_index] = blocks["d"]
        if f.at_bs:
            est["A"], est["b"] = A_hat, b_hat
        else:
            ue_seen.append(f.ue_index)
    if ue_seen:
        est["d"] = d_hat[:, sorted(ue_seen)]

    stage2 = [f for f in fams if f.stage == 2]
    if not stage2:
        return est
    B_hat = np.zeros((n, cfg.K, cfg.M, cfg.L), complex)
    D_hat = np.zeros((n, cfg.J, cfg.M, cfg.L), complex)
    reflected = [None] * n
    if input_type == 2:
        reflected = [ls_stage2(rx, plan, A_hat[i], b_hat[i], d_hat[i]) for i, rx in enumerate(rxs)]
    ue2 = []
    for f in stage2:
        X = np.array([build_input(f, rx, plan, (A_hat[i], b_hat[i], d_hat[i]), reflected[i])
                      for i, rx in enumerate(rxs)])
        outs = elm.predict(models[f], X)
        for i, vec in enumerate(outs):
            blocks = unpack_output(f, vec, cfg)
            if f.at_bs:
                B_hat[i] = blocks["B"]
            else:
                D_hat[i, f.ue_index] = blocks["D"]
        if f.at_bs:
            est["B"] = B_hat
        else:
            ue2.append(f.ue_index)
    if ue2:
        est["D"] = D_hat[:, sorted(ue2)]
    return est


def _ue_subset(spec: ExperimentSpec, stage: int) -> list[int]:
    return sorted({f.ue_index for f in spec.families if not f.at_bs and f.stage == stage})


def evaluate(spec: ExperimentSpec, models: dict[Family, elm.ElmModel] | None = None) -> list[ResultRow]:
    """Online phase over the test grid; returns one row per (estimator, channel, SNR)."""
    cfg = spec.cfg
    plan = build_pilot_plan(cfg)
    if "ELM" in spec.estimators and models is None:
        raise DependencyError("ELM evaluation needs trained models")
    groups = spec.channel_groups
    ue_idx = {"d": _ue_subset(spec, 1), "D": _ue_subset(spec, 2)}
    rows: list[ResultRow] = []
    for ti, snr in enumerate(spec.test_snr_grid_db):
        def run(n, ti=ti, snr=snr):
            return _simulate_test(cfg, plan, snr, ti, n, spec.seed)

        if spec.workers > 1:
            with ThreadPoolExecutor(max_workers=spec.workers) as pool:
                sims = list(pool.map(run, range(spec.n_test)))
        else:
            sims = [run(n) for n in range(spec.n_test)]
        truth = _true_blocks([ch for ch, _ in sims])
        for g in ("d", "D"):
            truth[g] = truth[g][:, ue_idx[g]]
        rxs = [rx for _, rx in sims]

        if "LS" in spec.estimators:
            ls = [ls_estimate(rx, plan) for rx in rxs]
            ls_blocks = {"A": np.stack([e.A_bar for e in ls]), "b": np.stack([e.b_bar for e in ls]),
                         "d": np.stack([e.d_bar for e in ls])[:, ue_idx["d"]],
                         "B": np.stack([e.B_bar for e in ls]),
                         "D": np.stack([e.D_bar for e in ls])[:, ue_idx["D"]]}
            for g in groups:
                label, stage, receiver = CHANNEL_ROWS[g]
                rows.append(ResultRow("LS", stage, "-", receiver, label, snr,
                                      _block_nmse(g, ls_blocks[g], truth[g]), spec.n_test, spec.seed))
        if "ELM" in spec.estimators:
            for t in spec.input_types:
                est = _elm_estimates(spec, models, plan, rxs, t)
                for g in groups:
                    if g not in est:
                        continue
                    label, stage, receiver = CHANNEL_ROWS[g]
                    rows.append(ResultRow("ELM", stage, f"I{t}", receiver, label, snr,
                                          _block_nmse(g, est[g], truth[g]), spec.n_test, spec.seed))
    return rows


def run_pipeline(spec: ExperimentSpec, models: dict[Family, elm.ElmModel] | None = None) -> list[ResultRow]:
    """Train (unless ``models`` is given) and evaluate; rows are deterministic in ``spec.seed``."""
    if "ELM" in spec.estimators and models is None:
        models = train_models(spec)
    rows = evaluate(spec, models)
    if spec.output_path:
        Path(spec.output_path).write_text(rows_to_csv(rows))
    return rows


def rows_to_csv(rows: Iterable[ResultRow], extra: Sequence[tuple[str, Sequence]] = ()) -> str:
    """CSV text; ``extra`` prepends named columns (one value per row)."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow([name for name, _ in extra] + CSV_HEADER)
    for i, row in enumerate(rows):
        writer.writerow([str(values[i]) for _, values in extra] + row.as_csv())
    return buf.getvalue()


SWEEP_AXES = ("snr", "L", "M")


def sweep(spec: ExperimentSpec, axis: str, values: Sequence[float]) -> str:
    """Run the pipeline per axis value and return CSV text.

    ``axis="snr"`` evaluates ``values`` as the test grid.  ``L`` and ``M``
    rebuild the configuration per value (frame sizes re-derived) and prepend
    the swept value as a leading column.
    """
    if axis not in SWEEP_AXES:
        raise InvalidArgumentError(f"axis must be one of {SWEEP_AXES}, got {axis!r}")
    if not values:
        raise InvalidArgumentError("sweep values must be non-empty")
    if axis == "snr":
        return rows_to_csv(run_pipeline(replace(spec, test_snr_grid_db=[float(v) for v in values],
                                                output_path=None)))
    all_rows, labels = [], []
    for value in values:
        if int(value) != value or value < 1:
            raise InvalidArgumentError(f"{axis} values must be positive integers, got {value}")
        cfg = spec.cfg.rederive(**{axis: int(value)})
        fams = [f for f in spec.families if f.at_bs or f.ue_index < cfg.J]
        rows = run_pipeline(replace(spec, cfg=cfg, families=fams, output_path=None))
        all_rows += rows
        labels += [int(value)] * len(rows)
    return rows_to_csv(all_rows, extra=[(axis, labels)])
