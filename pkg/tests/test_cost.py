from fractions import Fraction

import pytest

from oocdet import CostDomainError, predicted_cost
from oocdet.cost import predicted_reads, predicted_writes, scratch_slots


def divisors(m):
    return [k for k in range(1, m + 1) if m % k == 0]


def test_generic_total_m12():
    got = predicted_cost(12, 3, "generic").total_flops
    assert got == Fraction(12**3, 3) - Fraction(12**2, 2) + 2 == 506


def test_symmetric_total_m12():
    got = predicted_cost(12, 4, "symmetric").total_flops
    assert got == 288 - 36 + 1 == 253


@pytest.mark.parametrize("m", [12, 24, 120])
@pytest.mark.parametrize("case", ["generic", "symmetric"])
def test_totals_independent_of_blocking(m, case):
    if case == "generic":
        expect = Fraction(m**3, 3) - Fraction(m**2, 2) + Fraction(m, 6)
    else:
        expect = Fraction(m**3, 6) - Fraction(m**2, 4) + Fraction(m, 12)
    for n_b in divisors(m):
        assert predicted_cost(m, n_b, case).total_flops == expect


def test_single_block_is_pure_decomposition():
    cost = predicted_cost(24, 1, "generic")
    assert cost.full_multiply.count == 0
    assert cost.lower_solve.count == 0
    assert cost.total_flops == cost.decomposition.total


def test_scratch_slot_formulas():
    assert scratch_slots(4, "generic") == 16 - 4 - 1 == 11
    assert scratch_slots(4, "symmetric") == 6
    assert scratch_slots(2, "generic") == 0
    assert scratch_slots(2, "symmetric") == 0
    assert scratch_slots(8, "generic") == 55
    assert scratch_slots(8, "symmetric") == 32


def test_transfer_formulas_reference_values():
    assert predicted_reads(4, "generic") == 32
    assert predicted_writes(4, "generic") == 15
    assert predicted_reads(4, "symmetric") == 18
    assert predicted_writes(4, "symmetric") == 8
    assert predicted_reads(1, "generic") == 1
    assert predicted_reads(1, "symmetric") == 1
    for case in ("generic", "symmetric"):
        assert predicted_writes(2, case) == 0


def test_breakdown_counts_are_integers():
    cost = predicted_cost(120, 8, "symmetric")
    for name in ("decomposition", "lower_solve", "full_multiply",
                 "gramian_multiply"):
        assert getattr(cost, name).count.denominator == 1


def test_json_dict_shape():
    d = predicted_cost(12, 4, "symmetric").to_json_dict()
    assert d["scratch_slots"] == 6
    assert d["total_flops"] == 253
    assert d["operations"]["decomposition"]["flops_per_op"] == 2.5


def test_domain_error_on_indivisible_m():
    with pytest.raises(CostDomainError):
        predicted_cost(10, 3, "generic")
    with pytest.raises(ValueError):
        predicted_cost(12, 3, "hermitian")
