"""Command-line front end.

Evaluation, sweeps and complexity reports run in-process, or against a
running service with ``--remote URL``.  ``gen-data`` and ``train`` write
binary dataset/model files so the offline and online phases can run as
separate invocations.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from pydantic import ValidationError

from . import __version__
from .config import SystemConfig
from .elm import ElmModel
from .errors import (ConfigError, DegenerateInputError, DependencyError, InvalidArgumentError,
                     NumericError, RankDeficiencyError)
from .experiment import train_models
from .features import Dataset, build_datasets
from .pilots import build_pilot_plan
from .service import ops
from .service.schemas import ComplexityRequest, EvalRequest, SweepRequest, parse_snr

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 2, 3
log = logging.getLogger("isac_elm")


class RemoteError(Exception):
    def __init__(self, status: int, detail: str):
        super().__init__(detail)
        self.status = status


def _snr_list(text: str) -> list[float]:
    try:
        return [parse_snr(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from exc


def _int_list(text: str) -> list[int]:
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from exc


def _seed(text: str) -> int:
    value = int(text)
    if not 0 <= value < 2 ** 64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return value


def _load_overrides(path: str | None) -> dict:
    if path is None:
        return {}
    try:
        data = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError("config document must be a JSON object")
    return data


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="JSON file of system-config overrides")
    p.add_argument("--seed", type=_seed, default=0)
    p.add_argument("--profile", choices=("desk", "paper"), default="desk")
    p.add_argument("--out", help="output path (stdout for CSV when omitted)")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--remote", metavar="URL", help="send the request to a running service")
    p.add_argument("-v", "--verbose", action="store_true")


def _experiment_opts(p: argparse.ArgumentParser, test: bool = True) -> None:
    p.add_argument("--families", type=lambda s: [x for x in s.split(",") if x],
                   help="comma-separated families, e.g. S1I2-BS,S2I2-BS (default: all)")
    p.add_argument("--train-snr", type=_snr_list, help="training SNR grid in dB, comma-separated")
    p.add_argument("--v-count", type=int)
    p.add_argument("--q-count", type=int)
    p.add_argument("--aug-snr", type=float)
    p.add_argument("--hidden", type=_int_list, help="DE-ELM,RE-ELM hidden sizes")
    if test:
        p.add_argument("--test-snr", type=_snr_list, help="test SNR grid in dB ('inf' allowed)")
        p.add_argument("--n-test", type=int)
        p.add_argument("--estimators", type=lambda s: [x for x in s.split(",") if x],
                       default=["LS", "ELM"])


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="isac-elm", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-data", help="generate training datasets (one file per family)")
    _common(p)
    _experiment_opts(p, test=False)

    p = sub.add_parser("train", help="train one ELM per family")
    _common(p)
    _experiment_opts(p, test=False)
    p.add_argument("--data", help="directory of datasets from gen-data (generated when omitted)")

    p = sub.add_parser("eval", help="train (or load) networks and write the NMSE CSV")
    _common(p)
    _experiment_opts(p)
    p.add_argument("--models", help="directory of models from train (trained when omitted)")

    p = sub.add_parser("sweep", help="NMSE versus SNR, L or M")
    _common(p)
    _experiment_opts(p)
    p.add_argument("--axis", choices=("snr", "L", "M"), required=True)
    p.add_argument("--values", type=_snr_list, required=True)

    p = sub.add_parser("complexity", help="operation counts per family")
    _common(p)
    p.add_argument("--families", type=lambda s: [x for x in s.split(",") if x])
    p.add_argument("--axis", choices=("L", "M"))
    p.add_argument("--values", type=_int_list)
    p.add_argument("--hidden", type=_int_list, default=[700, 1300])

    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    return parser


def _eval_request(args, cls=EvalRequest, **extra):
    fields = {
        "profile": args.profile, "config": _load_overrides(args.config), "seed": args.seed,
        "families": args.families, "workers": args.workers,
        "train_snr_db": args.train_snr, "v_count": args.v_count, "q_count": args.q_count,
        "aug_snr_db": args.aug_snr,
        "hidden": tuple(args.hidden) if args.hidden else None,
    }
    if hasattr(args, "test_snr"):
        fields.update(test_snr_db=args.test_snr, n_test=args.n_test, estimators=args.estimators)
    fields.update(extra)
    return cls(**{k: v for k, v in fields.items() if v is not None})


def _post(url: str, path: str, req) -> str:
    import httpx

    try:
        resp = httpx.post(url.rstrip("/") + path, json=req.model_dump(mode="json"), timeout=None)
    except httpx.HTTPError as exc:
        raise RemoteError(0, f"cannot reach {url}: {exc}") from exc
    if resp.status_code != 200:
        raise RemoteError(resp.status_code, resp.text)
    return resp.json()["csv"]


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _offline_spec(args):
    if args.remote:
        raise InvalidArgumentError(f"{args.command} writes local files; --remote is not supported")
    return ops.build_spec(_eval_request(args, estimators=["ELM"]))


def cmd_gen_data(args) -> None:
    spec = _offline_spec(args)
    out = Path(args.out or "datasets")
    out.mkdir(parents=True, exist_ok=True)
    datasets = build_datasets(spec.cfg, build_pilot_plan(spec.cfg), spec.families,
                              spec.train_snr_grid_db, spec.v_count, spec.q_count,
                              spec.aug_snr_db, spec.seed, spec.workers)
    for fam, ds in datasets.items():
        ds.extra["config"] = spec.cfg.to_dict()
        ds.save(out / f"{fam.name}.bin")
        log.info("wrote %s (%d samples)", out / f"{fam.name}.bin", len(ds))


def cmd_train(args) -> None:
    spec = _offline_spec(args)
    datasets = None
    if args.data:
        datasets = {f: Dataset.load(Path(args.data) / f"{f.name}.bin") for f in spec.families}
        for fam, ds in datasets.items():
            stored = ds.extra.get("config")
            if stored is not None and SystemConfig.from_dict(stored) != spec.cfg:
                raise ConfigError(f"dataset {fam.name} was generated with a different config")
    models = train_models(spec, datasets)
    out = Path(args.out or "models")
    out.mkdir(parents=True, exist_ok=True)
    for fam, model in models.items():
        model.save(out / f"{fam.name}.elm")


def _load_models(directory: str, req: EvalRequest):
    spec = ops.build_spec(req)
    return {f: ElmModel.load(Path(directory) / f"{f.name}.elm")
            for f in spec.families if "ELM" in spec.estimators}


def cmd_eval(args) -> None:
    req = _eval_request(args)
    if args.remote:
        if args.models:
            raise InvalidArgumentError("--models cannot be combined with --remote")
        text = _post(args.remote, "/eval", req)
    else:
        models = _load_models(args.models, req) if args.models else None
        text = ops.run_eval(req, models).csv
    _emit(text, args.out)


def cmd_sweep(args) -> None:
    req = _eval_request(args, SweepRequest, axis=args.axis, values=args.values)
    text = _post(args.remote, "/sweep", req) if args.remote else ops.run_sweep(req).csv
    _emit(text, args.out)


def cmd_complexity(args) -> None:
    fields = {"profile": args.profile, "config": _load_overrides(args.config),
              "families": args.families, "axis": args.axis, "values": args.values,
              "hidden": tuple(args.hidden)}
    req = ComplexityRequest(**{k: v for k, v in fields.items() if v is not None})
    text = _post(args.remote, "/complexity", req) if args.remote else ops.run_complexity(req).csv
    _emit(text, args.out)


def cmd_serve(args) -> None:
    import uvicorn

    uvicorn.run("isac_elm.service.app:app", host=args.host, port=args.port)


COMMANDS = {"gen-data": cmd_gen_data, "train": cmd_train, "eval": cmd_eval, "sweep": cmd_sweep,
            "complexity": cmd_complexity, "serve": cmd_serve}


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if getattr(args, "verbose", False) else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        COMMANDS[args.command](args)
    except (ConfigError, ValidationError, DependencyError, InvalidArgumentError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (NumericError, DegenerateInputError, RankDeficiencyError, FloatingPointError) as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except RemoteError as exc:
        print(f"service error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC if exc.status >= 500 else EXIT_CONFIG
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
