"""Analytical cost model for the blocked factorizations.

Counts are exact (rational arithmetic, one FLOP = one fused multiply-add) and
defined only when n_b divides m, where the nominal block size b = m / n_b is
uniform.  Totals are independent of n_b: m^3/3 - m^2/2 + m/6 for generic
matrices and m^3/6 - m^2/4 + m/12 for symmetric ones.

Predicted disk traffic (whole blocks moved) and scratch-slot requirements:

                      generic                     symmetric
    reads     (2 n^3 - 3 n^2 + 4 n) / 3    (2 n^3 - 3 n^2 + 7 n) / 6
    writes    (n^3 - 4 n - 3) / 3          (n^3 + 3 n^2 - 22 n + 24) / 6
    slots     n^2 - n - 1                  (n^2 + n - 8) / 2

with writes and slots both zero for n_b <= 2 (everything stays in memory).
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .errors import CostDomainError

CASES = ("generic", "symmetric")


@dataclass(frozen=True)
class OpCost:
    count: Fraction
    flops_per_op: Fraction

    @property
    def total(self) -> Fraction:
        return self.count * self.flops_per_op


@dataclass(frozen=True)
class CostBreakdown:
    m: int
    n_b: int
    case: str
    decomposition: OpCost
    lower_solve: OpCost
    upper_solve: OpCost
    full_multiply: OpCost
    gramian_multiply: OpCost
    blocks_read: int
    blocks_written: int
    scratch_slots: int

    @property
    def total_flops(self) -> Fraction:
        return (self.decomposition.total + self.lower_solve.total
                + self.upper_solve.total + self.full_multiply.total
                + self.gramian_multiply.total)

    def to_json_dict(self) -> dict:
        def num(x: Fraction):
            return int(x) if x.denominator == 1 else float(x)

        ops = {}
        for name in ("decomposition", "lower_solve", "upper_solve",
                     "full_multiply", "gramian_multiply"):
            op: OpCost = getattr(self, name)
            ops[name] = {"count": num(op.count),
                         "flops_per_op": num(op.flops_per_op),
                         "total": num(op.total)}
        return {
            "m": self.m, "n_b": self.n_b, "b": self.m // self.n_b,
            "case": self.case, "operations": ops,
            "total_flops": num(self.total_flops),
            "blocks_read": self.blocks_read,
            "blocks_written": self.blocks_written,
            "scratch_slots": self.scratch_slots,
        }


def predicted_reads(n_b: int, case: str) -> int:
    n = n_b
    if case == "generic":
        return (2 * n**3 - 3 * n**2 + 4 * n) // 3
    return (2 * n**3 - 3 * n**2 + 7 * n) // 6


def predicted_writes(n_b: int, case: str) -> int:
    n = n_b
    if n <= 2:
        return 0
    if case == "generic":
        return (n**3 - 4 * n - 3) // 3
    return (n**3 + 3 * n**2 - 22 * n + 24) // 6


def scratch_slots(n_b: int, case: str) -> int:
    n = n_b
    if n <= 2:
        return 0
    if case == "generic":
        return n * n - n - 1
    return (n * n + n - 8) // 2


def predicted_cost(m: int, n_b: int, case: str) -> CostBreakdown:
    """Full per-operation breakdown; requires n_b to divide m."""
    if case not in CASES:
        raise ValueError(f"case must be one of {CASES}, got {case!r}")
    if m < 1 or n_b < 1:
        raise ValueError(f"m and n_b must be >= 1, got m={m}, n_b={n_b}")
    if m % n_b != 0:
        raise CostDomainError(
            f"cost model requires n_b | m; {n_b} does not divide {m}")
    n = Fraction(n_b)
    b = Fraction(m, n_b)
    tri_count = (n * n - n) / 2
    tri_flops = (b**3 - b**2) / 2
    zero = OpCost(Fraction(0), Fraction(0))
    if case == "generic":
        decomp = OpCost(n, b**3 / 3 - b**2 / 2 + b / 6)
        lower = OpCost(tri_count, tri_flops)
        upper = OpCost(tri_count, tri_flops)
        full = OpCost(n**3 / 3 - n**2 / 2 + n / 6, b**3)
        gram = zero
    else:
        decomp = OpCost(n, b**3 / 6 - b**2 / 4 + b / 12)
        lower = OpCost(tri_count, tri_flops)
        upper = zero
        full = OpCost(n**3 / 6 - n**2 / 2 + n / 3, b**3)
        gram = OpCost(tri_count, b**3 / 2)
    return CostBreakdown(
        m=m, n_b=n_b, case=case,
        decomposition=decomp, lower_solve=lower, upper_solve=upper,
        full_multiply=full, gramian_multiply=gram,
        blocks_read=predicted_reads(n_b, case),
        blocks_written=predicted_writes(n_b, case),
        scratch_slots=scratch_slots(n_b, case),
    )
