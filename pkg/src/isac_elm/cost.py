"""Closed-form real addition/multiplication counts for input generation and ELM testing.

All counts are evaluated in exact rational arithmetic: several of the
formulas are not integer-valued for small dimensions.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable

from .config import SystemConfig
from .errors import InvalidArgumentError
from .features import Family, input_length, target_length

F = Fraction


@dataclass(frozen=True)
class OpCount:
    adds: Fraction
    mults: Fraction

    def __post_init__(self):
        object.__setattr__(self, "adds", Fraction(self.adds))
        object.__setattr__(self, "mults", Fraction(self.mults))
        if self.adds < 0 or self.mults < 0:
            raise InvalidArgumentError("operation counts must be non-negative")

    def __add__(self, other: "OpCount") -> "OpCount":
        return OpCount(self.adds + other.adds, self.mults + other.mults)

    def __mul__(self, n) -> "OpCount":
        return OpCount(self.adds * n, self.mults * n)

    __rmul__ = __mul__

    @property
    def is_integral(self) -> bool:
        return self.adds.denominator == 1 and self.mults.denominator == 1

    def rounded(self) -> tuple[int, int]:
        return round(self.adds), round(self.mults)

    @property
    def total(self) -> Fraction:
        return self.adds + self.mults


ZERO = OpCount(0, 0)


def inv_cost(m: int) -> OpCount:
    """Inverse of an m x m complex matrix."""
    if m < 1:
        raise InvalidArgumentError("m must be >= 1")
    return OpCount(F(2, 3) * m * (3 * m * m + 3 * m - 1), F(1, 3) * m * (4 * m * m + 15 * m - 1))


def pinv_cost(a: int, b: int) -> OpCount:
    """Pseudoinverse of an a x b complex matrix."""
    if a < 1 or b < 1:
        raise InvalidArgumentError("a and b must be >= 1")
    inv = inv_cost(a)
    return OpCount(8 * a * a * b - 2 * a * (a + b) + inv.adds, 8 * a * a * b + inv.mults)


def _dims(cfg: SystemConfig):
    return cfg.M, cfg.K, cfg.L, cfg.c_s1, cfg.n_subframes_s2, cfg.p_s1, cfg.p_s2


def input_gen_cost(family: Family, cfg: SystemConfig) -> OpCount:
    """Cost of building the network input; raw-signal (type-1) inputs are free."""
    if family.input_type == 1:
        return ZERO
    M, K, L, C1, C, P1, P2 = _dims(cfg)
    if family.stage == 1 and family.at_bs:
        adds = (F(2, 3) * M * C1 * (18 * M * P1 + 3 * M * M - 3 * P1 + 3 * M - 1)
                + F(2, 3) * K * C1 * (6 * M * P1 + 9 * P1 - 3 * M + 2) - 2 * M * (K + M))
        mults = (F(1, 3) * M * C1 * (36 * M * P1 + 4 * M * M + 15 * M - 1)
                 + 2 * K * C1 * (2 * M * P1 + 4 * P1 + 3) + 2 * M * (K + M) + K + 1)
    elif family.stage == 1:
        adds = F(2, 3) * M * C1 * (12 * M * P1 + 3 * M * M + 3 * P1 - 1) - 2 * M
        mults = F(1, 3) * M * C1 * (24 * M * P1 + 4 * M * M + 12 * P1 + 15 * M - 1) + 2 * M + 1
    elif family.at_bs:
        adds = (F(2, 3) * K * C * (6 * M * L + 12 * L * L - 3 * L - 3 * M + 2)
                + 2 * P2 * C * (3 * M * K + M + 3 * K) + F(2, 3) * K * L * (3 * L * L - 3 * M - 1))
        mults = (2 * P2 * C * (2 * M * M + 4 * K * M + 8 * K)
                 + 2 * K * C * (4 * L * L + 2 * M * L + 3) + F(1, 3) * K * L * (4 * L * L + 15 * L - 1))
    else:
        adds = (F(2, 3) * M * C * (12 * M * P2 + 3 * M * M + 6 * P2 - 4)
                + 2 * L * C * (2 * M + 4 * L - 1) + F(2, 3) * L * (3 * L * L - 3 * M - 1))
        mults = (F(1, 3) * M * C * (24 * M * P2 + 24 * P2 + 4 * M * M + 15 * M - 1)
                 + 4 * L * C * (M + 2 * L) + F(1, 3) * L * (4 * L * L + 15 * L - 1))
    return OpCount(adds, mults)


def elm_test_cost(n_input: int, n_hidden: int, n_output: int) -> OpCount:
    if min(n_input, n_hidden, n_output) < 1:
        raise InvalidArgumentError("layer sizes must be >= 1")
    return OpCount(n_hidden * (n_input + n_output + 1) - n_output, n_hidden * (n_input + n_output))


def total_cost(family: Family, cfg: SystemConfig, hidden: tuple[int, int] = (700, 1300)) -> OpCount:
    """Input generation plus online ELM inference for one family."""
    n_h = hidden[0] if family.stage == 1 else hidden[1]
    return input_gen_cost(family, cfg) + elm_test_cost(
        input_length(family, cfg), n_h, target_length(family, cfg))


def ls_cost(family: Family, cfg: SystemConfig) -> OpCount:
    """LS benchmark cost: the LS estimate is exactly the type-2 input."""
    return input_gen_cost(Family(family.stage, 2, family.receiver), cfg)


CSV_HEADER = ["family", "M", "K", "L", "C1", "C2", "P1", "P2", "adds", "mults"]


def cost_rows(cfgs: Iterable[SystemConfig], families: Iterable[Family],
              hidden: tuple[int, int] = (700, 1300), include_ls: bool = True) -> list[list[str]]:
    """CSV rows (ELM totals, then LS benchmark rows) rounded to integers."""
    families = list(families)
    rows = []
    for cfg in cfgs:
        dims = [cfg.M, cfg.K, cfg.L, cfg.c_s1, cfg.c_s2, cfg.p_s1, cfg.p_s2]
        entries = [(f"ELM-{f.name}", total_cost(f, cfg, hidden)) for f in families]
        if include_ls:
            seen = []
            for f in families:
                key = (f.stage, f.receiver)
                if key not in seen:
                    seen.append(key)
                    entries.append((f"LS-S{f.stage}-{f.receiver}", ls_cost(f, cfg)))
        for name, cost in entries:
            adds, mults = cost.rounded()
            rows.append([name] + [str(d) for d in dims] + [str(adds), str(mults)])
    return rows


def cost_csv(rows: list[list[str]]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    writer.writerows(rows)
    return buf.getvalue()
