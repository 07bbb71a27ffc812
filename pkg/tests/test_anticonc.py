import itertools
import math
import random
from fractions import Fraction

import pytest

from cubecover import (
    Params,
    ScalePartition,
    ScalePartitionError,
    atom_probability,
    check_anticoncentration,
    concentration_window_prob,
    littlewood_offord_bound,
    many_scales_bound,
    max_atom_probability,
    scale_partition,
    subset_sum_counts,
    unit_row,
    validate_scales,
)

C1 = Params().C1  # 4 * 4.706^2 as an exact rational


def brute_force_atom(v, a):
    hits = sum(
        1
        for bits in itertools.product((0, 1), repeat=len(v))
        if sum(Fraction(c) * b for c, b in zip(v, bits)) == a
    )
    return Fraction(hits, 2 ** len(v))


def test_atom_probability_examples():
    assert atom_probability([1, 1, 1, 1], 2) == Fraction(6, 16)
    assert atom_probability([1, 2, 4], 3) == Fraction(1, 8)
    assert atom_probability([1, 1], 1) == Fraction(1, 2)


def test_atom_probability_matches_brute_force():
    rng = random.Random(17)
    for _ in range(25):
        n = rng.randint(1, 8)
        v = [rng.randint(-3, 3) for _ in range(n)]
        a = rng.randint(-4, 4)
        assert atom_probability(v, a) == brute_force_atom(v, a)


def test_atom_probability_sampled_mode():
    p1 = atom_probability([1, 1], 1, mode="sampled", trials=4000, seed=2)
    p2 = atom_probability([1, 1], 1, mode="sampled", trials=4000, seed=2)
    assert p1 == p2  # deterministic given the seed
    assert abs(float(p1) - 0.5) < 0.05


def test_atom_probability_cap():
    from cubecover import CapExceededError

    with pytest.raises(CapExceededError):
        atom_probability([1] * 30, 3, params=Params(enumeration_cap=24))


def test_littlewood_offord_bound_values():
    assert littlewood_offord_bound([1, 1, 1, 1]) == 0.5
    assert littlewood_offord_bound([5, 0, 0]) == 1.0
    assert littlewood_offord_bound([1] * 100) == pytest.approx(0.1)
    with pytest.raises(ValueError):
        littlewood_offord_bound([0, 0])


def test_littlewood_offord_conformance_exhaustive():
    # Exact rational comparison via squares: p^2 * supp <= 1.
    rng = random.Random(31)
    for _ in range(60):
        n = rng.randint(1, 10)
        v = [rng.randint(-3, 3) for _ in range(n)]
        if all(c == 0 for c in v):
            v[0] = 1
        supp = sum(1 for c in v if c != 0)
        prob, _ = max_atom_probability(v)
        assert prob * prob * supp <= 1


def test_geometric_vector_sharpness():
    for n in range(1, 12):
        v = [2**i for i in range(n)]
        prob, _ = max_atom_probability(v)
        assert prob == Fraction(1, 2**n)


def test_subset_sum_counts_total_mass():
    v = [1, 1, 0, -2]
    counts = subset_sum_counts(v)
    assert sum(counts.values()) == 2 ** len(v)


def test_scale_partition_two_scales():
    part = scale_partition([100, 1])
    assert part.parts == ((0,), (1,))
    assert part.S == 2
    # 100^2 >= C1^2 * 1^2 exactly.
    assert Fraction(10000) >= C1 * C1
    assert validate_scales([100, 1], part)


def test_scale_partition_single_scale():
    part = scale_partition([1, 1])
    assert part.S == 1
    assert part.parts == ((0, 1),)
    assert validate_scales([1, 1], part)


def test_scale_partition_three_scales():
    part = scale_partition([10000, 100, 1])
    assert part.S == 3
    assert part.parts == ((0,), (1,), (2,))
    assert validate_scales([10000, 100, 1], part)


def test_scale_partition_target_merging():
    part = scale_partition([10000, 100, 1], target_S=2)
    assert part.S == 2
    assert validate_scales([10000, 100, 1], part)
    with pytest.raises(ScalePartitionError):
        scale_partition([1, 1], target_S=2)


def test_scale_partition_zero_vector():
    with pytest.raises(ValueError):
        scale_partition([0, 0])


def test_scale_partition_output_always_validates():
    rng = random.Random(8)
    for _ in range(50):
        n = rng.randint(1, 10)
        v = [Fraction(rng.randint(-10**6, 10**6), rng.randint(1, 100)) for _ in range(n)]
        if all(c == 0 for c in v):
            v[0] = Fraction(1)
        part = scale_partition(v)
        assert validate_scales(v, part)


def test_validate_scales_rejects_bad_decay():
    part = ScalePartition.build([1, 1], [[0], [1]], C1)
    assert validate_scales([1, 1], part) is False


def test_validate_scales_single_part():
    part = ScalePartition.build([3, -7], [[0, 1]], C1)
    assert validate_scales([3, -7], part) is True


def test_validate_scales_structural_errors():
    part = ScalePartition.build([1, 2, 3], [[0], [1]], C1)  # misses index 2
    with pytest.raises(ValueError):
        validate_scales([1, 2, 3], part)
    overlap = ScalePartition.build([1, 2], [[0, 1], [1]], C1)
    with pytest.raises(ValueError):
        validate_scales([1, 2], overlap)


def test_many_scales_bound_value():
    # exp(-100/(8*4.706)) + 6*exp(-100/(2*4.706)), evaluated independently.
    expected = math.exp(-100 / 37.648) + 6 * math.exp(-100 / 9.412)
    got = many_scales_bound(100, 2)
    assert got == pytest.approx(expected, rel=1e-12)
    assert got == pytest.approx(0.07036152622496274, rel=1e-9)


def test_many_scales_bound_monotone_in_S():
    values = [many_scales_bound(s, 2) for s in range(1, 400, 25)]
    assert all(a > b for a, b in zip(values, values[1:]))
    assert values[-1] < 1e-4


def test_many_scales_bound_preconditions():
    with pytest.raises(ValueError):
        many_scales_bound(0, 2)
    with pytest.raises(ValueError):
        many_scales_bound(10, 1.5)


def test_check_anticoncentration_small_instance():
    v = [100, 1]
    part = scale_partition(v)
    prob, bound, ok = check_anticoncentration(v, part, a=0, b=2)
    # delta^2 = 1; sums 0, 1, 100, 101; |s| < 2 holds for 0 and 1.
    assert prob == Fraction(1, 2)
    assert ok == (float(prob) <= bound)


def test_check_anticoncentration_geometric_blocks():
    v = [2**i for i in range(16)]
    parts = [list(range(7, 16)), list(range(7))]
    part = ScalePartition.build(v, parts, C1)
    assert validate_scales(v, part)
    prob, bound, ok = check_anticoncentration(v, part, a=5, b=2)
    # All 2^16 subset sums are distinct integers; the window has width
    # 2*b*delta, so the hit count is at most that many integers.
    delta = math.sqrt(float(part.smallest_scale_sq))
    assert float(prob) <= (4 * delta + 1) / 2**16
    assert atom_probability(v, 5) == Fraction(1, 2**16)


def test_check_anticoncentration_preconditions():
    v = [100, 1]
    part = scale_partition(v)
    with pytest.raises(ValueError):
        check_anticoncentration(v, part, a=0, b=1.5)
    bad = ScalePartition.build([1, 1], [[0], [1]], C1)
    with pytest.raises(ValueError):
        check_anticoncentration([1, 1], bad, a=0, b=2)


def test_window_unit_basis_vector():
    prob, ok = concentration_window_prob([1])
    assert prob == 1
    assert ok


def test_window_two_coordinates():
    # Effective vector (1,1)/sqrt(2): value |x1+x2-1|/sqrt(2) is 0 or 1/sqrt(2).
    prob, ok = concentration_window_prob([1, 1])
    assert prob == Fraction(1, 2)
    assert ok


def test_window_rejects_small_c0():
    with pytest.raises(ValueError):
        concentration_window_prob([1, 1], C0=4)


def test_window_sampled_mode():
    prob, ok = concentration_window_prob([1, 1], mode="sampled", trials=2000, seed=9)
    assert abs(float(prob) - 0.5) < 0.06
    assert ok


def test_window_claim_holds_for_random_unit_rows():
    rng = random.Random(123)
    for _ in range(40):
        n = rng.randint(1, 8)
        coeffs = [Fraction(rng.randint(-9, 9), rng.randint(1, 9)) for _ in range(n)]
        if all(c == 0 for c in coeffs):
            coeffs[0] = Fraction(1)
        prob, ok = concentration_window_prob(unit_row(coeffs))
        assert ok, (coeffs, prob)


def test_window_accepts_float_boundary_c0():
    # The float literal 4.706 must be read as the decimal 4706/1000, not its
    # slightly smaller binary neighbour.
    prob, ok = concentration_window_prob([1, 1], C0=4.706)
    assert prob == Fraction(1, 2) and ok


def test_sampled_modes_require_positive_trials():
    with pytest.raises(ValueError):
        atom_probability([1, 1], 1, mode="sampled", trials=0)
    part = scale_partition([100, 1])
    with pytest.raises(ValueError):
        check_anticoncentration([100, 1], part, a=0, b=2, mode="sampled", trials=0)
    with pytest.raises(ValueError):
        concentration_window_prob([1, 1], mode="sampled", trials=0)


def test_singleton_partition_of_geometric_vector_is_invalid():
    # Adjacent powers of two have norm ratio 2, far below C1 ~ 88.6.
    v = [2**i for i in range(16)]
    singletons = ScalePartition.build(v, [[j] for j in range(15, -1, -1)], C1)
    assert validate_scales(v, singletons) is False
