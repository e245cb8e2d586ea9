"""Request handlers, callable in-process (CLI) or behind the HTTP app."""

from __future__ import annotations

from .. import cost
from ..config import SystemConfig, profile_config
from ..errors import InvalidArgumentError
from ..experiment import profile_spec, rows_to_csv, run_pipeline, sweep
from ..features import all_families, parse_family
from .schemas import (ComplexityRequest, ConfigRequest, ConfigResponse, CsvResponse, EvalRequest,
                      SweepRequest)


def build_config(req: ConfigRequest) -> SystemConfig:
    return profile_config(req.profile, req.config)


def validate_config(req: ConfigRequest) -> ConfigResponse:
    cfg = build_config(req)
    return ConfigResponse(valid=True, config=cfg.to_dict(), derived={
        "p_s1": cfg.p_s1, "p_s2": cfg.p_s2, "c_s2": cfg.c_s2,
        "estimation_time": cfg.estimation_time, "wavelength": cfg.wavelength,
    })


def _families(names, cfg):
    if not names:
        return all_families(cfg)
    return [parse_family(n) for n in names]


def build_spec(req: EvalRequest):
    cfg = build_config(req)
    overrides = {"seed": req.seed, "workers": req.workers,
                 "estimators": tuple(req.estimators),
                 "families": _families(req.families, cfg)}
    for name, key in (("train_snr_db", "train_snr_grid_db"), ("test_snr_db", "test_snr_grid_db"),
                      ("v_count", "v_count"), ("q_count", "q_count"),
                      ("aug_snr_db", "aug_snr_db"), ("n_test", "n_test"), ("hidden", "hidden")):
        value = getattr(req, name)
        if value is not None:
            overrides[key] = tuple(value) if name == "hidden" else value
    return profile_spec(req.profile, cfg, **overrides)


def _csv_response(text: str) -> CsvResponse:
    return CsvResponse(csv=text, rows=text.count("\n") - 1)


def run_eval(req: EvalRequest, models=None) -> CsvResponse:
    return _csv_response(rows_to_csv(run_pipeline(build_spec(req), models)))


def run_sweep(req: SweepRequest) -> CsvResponse:
    return _csv_response(sweep(build_spec(req), req.axis, req.values))


def run_complexity(req: ComplexityRequest) -> CsvResponse:
    base = build_config(req)
    if (req.axis is None) != (req.values is None):
        raise InvalidArgumentError("axis and values must be given together")
    if req.axis is None:
        cfgs = [base]
    else:
        if not req.values or min(req.values) < 1:
            raise InvalidArgumentError("values must be positive integers")
        cfgs = [base.rederive(**{req.axis: v}) for v in req.values]
    fams = _families(req.families, base)
    rows = []
    for c in cfgs:
        usable = [f for f in fams if f.at_bs or f.ue_index < c.J]
        rows += cost.cost_rows([c], usable, req.hidden, req.include_ls)
    return _csv_response(cost.cost_csv(rows))
