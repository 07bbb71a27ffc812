import math
import random
from fractions import Fraction

import numpy as np
import pytest

from cubecover import (
    Params,
    PlankPreconditionError,
    SampleCapError,
    bang_signs,
    check_small_norm_precondition,
    find_uncovered_small_norm,
    hoeffding_bound,
    unit_row,
)


def bang_holds(M, zeta, theta, signs, tol):
    M = np.asarray(M, dtype=float)
    u = np.asarray(theta, dtype=float) * np.asarray(signs, dtype=float)
    lhs = np.abs(M @ u - np.asarray(zeta, dtype=float))
    rhs = np.diag(M) * np.asarray(theta, dtype=float) - tol
    return bool(np.all(lhs >= rhs))


def exists_by_brute_force(M, zeta, theta):
    k = len(M)
    M = np.asarray(M, dtype=float)
    for mask in range(1 << k):
        signs = [1 if (mask >> t) & 1 else -1 for t in range(k)]
        if bang_holds(M, zeta, theta, signs, 1e-12):
            return True
    return False


def objective(M, zeta, theta, signs):
    M = np.asarray(M, dtype=float)
    u = np.asarray(theta, dtype=float) * np.asarray(signs, dtype=float)
    return float(u @ M @ u - 2 * u @ np.asarray(zeta, dtype=float))


def random_instance(rng, k=8):
    A = np.array([[rng.uniform(-1, 1) for _ in range(k)] for _ in range(k)])
    M = (A + A.T) / 2
    np.fill_diagonal(M, np.abs(np.diag(M)))
    zeta = [rng.uniform(-2, 2) for _ in range(k)]
    theta = [rng.uniform(0, 2) for _ in range(k)]
    return M.tolist(), zeta, theta


def test_identity_case():
    sv = bang_signs([[1, 0], [0, 1]], [0, 0], [1, 1], seed=0)
    assert bang_holds([[1, 0], [0, 1]], [0, 0], [1, 1], sv.signs, 1e-12)


def test_coupled_case_aligned_signs():
    M = [[1, 0.5], [0.5, 1]]
    sv = bang_signs(M, [0, 0], [1, 1], seed=3)
    # Brute force over the 4 sign vectors: the objective 2 + eps1*eps2 is
    # maximized at equal signs, giving |(M eps)_t| = 3/2 >= 1.
    assert sv.signs in ((1, 1), (-1, -1))
    assert bang_holds(M, [0, 0], [1, 1], sv.signs, 1e-12)


def test_far_targets():
    sv = bang_signs([[1, 0], [0, 1]], [10, 10], [1, 1], seed=1)
    assert bang_holds([[1, 0], [0, 1]], [10, 10], [1, 1], sv.signs, 1e-12)


def test_input_validation():
    with pytest.raises(ValueError, match="asymmetric"):
        bang_signs([[1, 1], [0, 1]], [0, 0], [1, 1])
    with pytest.raises(ValueError, match="negative diagonal"):
        bang_signs([[-1, 0], [0, 1]], [0, 0], [1, 1])
    with pytest.raises(ValueError, match="nonnegative"):
        bang_signs([[1, 0], [0, 1]], [0, 0], [-1, 1])


def test_bang_inequality_and_flip_optimality_random():
    rng = random.Random(42)
    for trial in range(150):
        M, zeta, theta = random_instance(rng)
        sv = bang_signs(M, zeta, theta, seed=trial)
        tol = 1e-9 * (1 + max(abs(c) for row in M for c in row))
        assert bang_holds(M, zeta, theta, sv.signs, tol)
        assert exists_by_brute_force(M, zeta, theta)
        # Single-flip optimality of the returned signs.
        base = objective(M, zeta, theta, sv.signs)
        for t in range(len(sv.signs)):
            flipped = list(sv.signs)
            flipped[t] = -flipped[t]
            assert objective(M, zeta, theta, flipped) <= base + 1e-7


def test_flip_count_reported_and_finite():
    rng = random.Random(5)
    M, zeta, theta = random_instance(rng)
    sv = bang_signs(M, zeta, theta, seed=9)
    assert 0 <= sv.flips <= 10_000


def test_small_norm_check_disjoint_supports():
    rows = []
    for i in range(4):
        coeffs = [Fraction(0)] * 64
        for j in range(16 * i, 16 * i + 16):
            coeffs[j] = Fraction(1, 4)
        rows.append(unit_row(coeffs))
    check = check_small_norm_precondition(rows)
    assert check.alpha == 1
    assert check.beta == Fraction(1, 16)
    assert check.lhs == pytest.approx(2 * (1 / 16) * math.log(16))
    assert check.ok


def test_small_norm_check_single_row():
    check = check_small_norm_precondition([unit_row([Fraction(1, 2)] * 4)])
    assert (check.alpha, check.beta) == (1, Fraction(1, 4))
    assert check.lhs == pytest.approx(0.5 * math.log(4))
    assert check.ok


def test_small_norm_check_identical_rows():
    e1 = unit_row([1, 0, 0])
    check = check_small_norm_precondition([e1, e1])
    assert (check.alpha, check.beta) == (2, Fraction(2))
    assert check.lhs == pytest.approx(8 * math.log(8))
    assert not check.ok


def test_small_norm_check_zero_row():
    with pytest.raises(ValueError):
        check_small_norm_precondition([unit_row([0, 0])])


def test_hoeffding_values():
    assert hoeffding_bound(1, [1, 1, 1, 1]) == pytest.approx(math.exp(-0.5))
    # t -> 0+ tends to 1.
    assert hoeffding_bound(1e-9, [1]) == pytest.approx(1.0)
    with pytest.raises(ValueError):
        hoeffding_bound(0, [1])
    with pytest.raises(ValueError):
        hoeffding_bound(1, [0, 0])


def test_hoeffding_matches_rounding_noise_shape():
    # Rounding noise on a unit row: each coordinate ranges over an interval
    # of length |v_j|, so the tail at t = theta/2 is exp(-theta^2/2).
    coeffs = [Fraction(1, 2)] * 4
    theta = 1.7
    widths = [abs(float(c)) for c in coeffs]  # unit row: sum of squares is 1
    assert hoeffding_bound(theta / 2, widths) == pytest.approx(math.exp(-(theta**2) / 2))


def test_find_uncovered_unreachable_target():
    row = unit_row([Fraction(1, 2)] * 4)
    vertex, attempts = find_uncovered_small_norm([row], [Fraction(10)], seed=0)
    assert attempts == 1  # no vertex can reach 10, the first sample works
    assert len(vertex) == 4


def test_find_uncovered_disjoint_instance():
    rows, targets = [], []
    for i in range(4):
        coeffs = [Fraction(0)] * 64
        for j in range(16 * i, 16 * i + 16):
            coeffs[j] = Fraction(1, 4)
        rows.append(unit_row(coeffs))
        targets.append(Fraction(2))  # the center value 8 * (1/4) / sqrt(16)... as <coeffs, x>
    vertex, attempts = find_uncovered_small_norm(rows, targets, seed=11)
    assert attempts <= 20
    for r, t in zip(rows, targets):
        dot = sum((c for c, b in zip(r.coeffs, vertex.bits) if b), Fraction(0))
        assert dot != t


def test_find_uncovered_precondition_failure():
    e1 = unit_row([1, 0, 0])
    with pytest.raises(PlankPreconditionError, match="> 1"):
        find_uncovered_small_norm([e1, e1], [Fraction(0), Fraction(0)])


def test_find_uncovered_deterministic():
    row = unit_row([1, 1, 1, 1])
    a = find_uncovered_small_norm([row], [Fraction(2)], seed=21)
    b = find_uncovered_small_norm([row], [Fraction(2)], seed=21)
    assert a == b


def test_y_prime_infinity_bound():
    # On precondition-passing inputs, ||theta V^T eps||_inf <= theta*sqrt(alpha*beta) <= 1.
    rng = random.Random(77)
    for _ in range(20):
        m = 32
        used = list(range(m))
        rng.shuffle(used)
        rows = []
        for i in range(2):
            coeffs = [Fraction(0)] * m
            for j in used[16 * i : 16 * i + 16]:
                coeffs[j] = Fraction(rng.choice([-1, 1]), 4)
            rows.append(unit_row(coeffs))
        check = check_small_norm_precondition(rows)
        assert check.ok
        theta = math.sqrt(2 * math.log(4 * len(rows)))
        assert theta * math.sqrt(check.alpha * float(check.beta)) <= 1 + 1e-9
        # The finder itself raises if the bound were violated.
        find_uncovered_small_norm(rows, [Fraction(1), Fraction(1)], seed=rng.randint(0, 9999))


def test_rounding_soundness_reverification():
    rng = random.Random(13)
    for trial in range(10):
        m = 24
        rows = []
        targets = []
        for i in range(2):
            coeffs = [Fraction(0)] * m
            for j in range(12 * i, 12 * i + 12):
                coeffs[j] = Fraction(rng.choice([-1, 1]), rng.choice([4, 5]))
            rows.append(unit_row(coeffs))
            targets.append(Fraction(rng.randint(-2, 2)))
        if not check_small_norm_precondition(rows).ok:
            continue
        vertex, _ = find_uncovered_small_norm(rows, targets, seed=trial)
        for r, t in zip(rows, targets):
            dot = sum((c for c, b in zip(r.coeffs, vertex.bits) if b), Fraction(0))
            assert dot != t
