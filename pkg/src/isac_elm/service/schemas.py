"""Request and response models shared by the HTTP service and the CLI."""

from __future__ import annotations

import math
from typing import Any, Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, field_serializer, field_validator

Snr = float


def parse_snr(value: Any) -> float:
    """Accept numbers and the strings "inf"/"-inf"; NaN is rejected."""
    if isinstance(value, str):
        text = value.strip().lower()
        if text in ("inf", "+inf"):
            return math.inf
        if text == "-inf":
            return -math.inf
        value = float(text)
    value = float(value)
    if math.isnan(value):
        raise ValueError("SNR must not be NaN")
    return value


def encode_snr(value: float) -> float | str:
    return ("inf" if value > 0 else "-inf") if math.isinf(value) else value


class _Base(BaseModel):
    model_config = ConfigDict(extra="forbid")


class ConfigRequest(_Base):
    profile: Literal["desk", "paper"] = "desk"
    config: dict[str, Any] = Field(default_factory=dict)


class EvalRequest(ConfigRequest):
    seed: int = Field(0, ge=0, lt=2 ** 64)
    families: Optional[list[str]] = None
    estimators: list[Literal["LS", "ELM"]] = Field(default_factory=lambda: ["LS", "ELM"])
    train_snr_db: Optional[list[float]] = None
    test_snr_db: Optional[list[float]] = None
    v_count: Optional[int] = Field(None, ge=1)
    q_count: Optional[int] = Field(None, ge=1)
    aug_snr_db: Optional[float] = None
    n_test: Optional[int] = Field(None, ge=1)
    hidden: Optional[tuple[int, int]] = None
    workers: int = Field(1, ge=1)

    @field_validator("train_snr_db", "test_snr_db", mode="before")
    @classmethod
    def _snrs(cls, value):
        if value is None:
            return None
        if not isinstance(value, (list, tuple)) or not value:
            raise ValueError("SNR grid must be a non-empty list")
        return [parse_snr(v) for v in value]

    @field_serializer("train_snr_db", "test_snr_db")
    def _dump_snrs(self, value):
        return None if value is None else [encode_snr(v) for v in value]

    @field_validator("hidden")
    @classmethod
    def _hidden(cls, value):
        if value is not None and min(value) < 1:
            raise ValueError("hidden sizes must be >= 1")
        return value


class SweepRequest(EvalRequest):
    axis: Literal["snr", "L", "M"]
    values: list[float] = Field(min_length=1)

    @field_validator("values", mode="before")
    @classmethod
    def _values(cls, value):
        if not isinstance(value, (list, tuple)):
            raise ValueError("values must be a list")
        return [parse_snr(v) for v in value]

    @field_serializer("values")
    def _dump_values(self, value):
        return [encode_snr(v) for v in value]


class ComplexityRequest(ConfigRequest):
    axis: Optional[Literal["L", "M"]] = None
    values: Optional[list[int]] = None
    families: Optional[list[str]] = None
    hidden: tuple[int, int] = (700, 1300)
    include_ls: bool = True


class CsvResponse(_Base):
    csv: str
    rows: int


class ConfigResponse(_Base):
    valid: bool
    config: dict[str, Any]
    derived: dict[str, Any]


class HealthResponse(_Base):
    status: Literal["ok"] = "ok"
    version: str


class ErrorResponse(_Base):
    kind: Literal["config", "invalid", "numeric", "dependency"]
    detail: str
