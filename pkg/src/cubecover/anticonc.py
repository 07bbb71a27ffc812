"""Anti-concentration estimators: atom probabilities, the 1/sqrt(supp) bound,
scale partitions with geometric norm decay, and the concentration-window check.

A vector has S scales (with respect to a constant C1) when its coordinates
split into ordered parts P_1..P_S whose l2-norms decay by a factor >= C1
between consecutive parts.  All decay comparisons here are exact: they are
performed on squared norms with a rational C1.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .core import (
    CapExceededError,
    Params,
    DEFAULT_PARAMS,
    UnitRow,
    format_rational,
    parse_rational,
    unit_row,
)


class ScalePartitionError(ValueError):
    """The greedy partitioner could not reach the requested number of scales."""


def _coerce_vector(v: Sequence[Fraction | int | str]) -> tuple[Fraction, ...]:
    return tuple(parse_rational(c) if isinstance(c, str) else Fraction(c) for c in v)


def subset_sum_counts(v: Sequence[Fraction | int]) -> dict[Fraction, int]:
    """Multiset of subset sums of v as {sum: count}; 2^len(v) total mass."""
    vec = _coerce_vector(v)
    counts: dict[Fraction, int] = {Fraction(0): 1}
    for c in vec:
        if c == 0:
            counts = {s: 2 * m for s, m in counts.items()}
            continue
        nxt: dict[Fraction, int] = dict(counts)
        for s, m in counts.items():
            key = s + c
            nxt[key] = nxt.get(key, 0) + m
        counts = nxt
    return counts


def atom_probability(
    v: Sequence[Fraction | int | str],
    a: Fraction | int | str,
    mode: str = "exact",
    trials: int = 10000,
    seed: int = 0,
    params: Params = DEFAULT_PARAMS,
) -> Fraction:
    """P(<x, v> = a) for x uniform on {0,1}^dim.

    Exact mode enumerates all subsets (dim must be within the enumeration
    cap) and returns a reduced rational; sampled mode returns the empirical
    frequency over ``trials`` draws.
    """
    vec = _coerce_vector(v)
    target = _coerce_vector([a])[0]
    if mode == "exact":
        if len(vec) > params.enumeration_cap:
            raise CapExceededError(
                f"dim={len(vec)} exceeds enumeration cap {params.enumeration_cap}"
            )
        counts = subset_sum_counts(vec)
        return Fraction(counts.get(target, 0), 1 << len(vec))
    if mode != "sampled":
        raise ValueError(f"mode must be 'exact' or 'sampled', got {mode!r}")
    if trials < 1:
        raise ValueError(f"trials must be >= 1, got {trials}")
    rng = random.Random(seed)
    hits = 0
    for _ in range(trials):
        s = sum((c for c in vec if rng.getrandbits(1)), Fraction(0))
        if s == target:
            hits += 1
    return Fraction(hits, trials)


def max_atom_probability(
    v: Sequence[Fraction | int], params: Params = DEFAULT_PARAMS
) -> tuple[Fraction, Fraction]:
    """(max_a P(<x,v> = a), an argmax a), computed exactly by enumeration."""
    vec = _coerce_vector(v)
    if len(vec) > params.enumeration_cap:
        raise CapExceededError(f"dim={len(vec)} exceeds enumeration cap")
    counts = subset_sum_counts(vec)
    best_a, best_m = max(counts.items(), key=lambda kv: (kv[1], kv[0]))
    return Fraction(best_m, 1 << len(vec)), best_a


def littlewood_offord_bound(v: Sequence[Fraction | int]) -> float:
    """The atom-probability bound 1/sqrt(|supp(v)|)."""
    vec = _coerce_vector(v)
    supp = sum(1 for c in vec if c != 0)
    if supp == 0:
        raise ValueError("zero vector has no Littlewood-Offord bound")
    return 1.0 / math.sqrt(supp)


@dataclass(frozen=True)
class ScalePartition:
    """Ordered parts P_1..P_S of a vector's coordinates with geometric decay.

    Valid when ||v|P_s||^2 >= C1^2 * ||v|P_{s+1}||^2 for all s < S; the last
    part is the smallest scale and its squared norm is delta^2.
    """

    parts: tuple[tuple[int, ...], ...]
    C1: Fraction
    squared_norms: tuple[Fraction, ...]
    smallest_scale_sq: Fraction

    @property
    def S(self) -> int:
        return len(self.parts)

    @classmethod
    def build(
        cls,
        v: Sequence[Fraction | int],
        parts: Sequence[Sequence[int]],
        C1: Fraction | int | float,
    ) -> "ScalePartition":
        vec = _coerce_vector(v)
        c1 = Fraction(C1)
        tup_parts = tuple(tuple(sorted(p)) for p in parts)
        norms = tuple(
            sum((vec[j] * vec[j] for j in p), Fraction(0)) for p in tup_parts
        )
        return cls(
            parts=tup_parts,
            C1=c1,
            squared_norms=norms,
            smallest_scale_sq=norms[-1] if norms else Fraction(0),
        )

    def to_json_dict(self) -> dict:
        return {
            "parts": [list(p) for p in self.parts],
            "C1": format_rational(self.C1),
            "squared_norms": [format_rational(q) for q in self.squared_norms],
            "smallest_scale_sq": format_rational(self.smallest_scale_sq),
        }


def scale_partition(
    v: Sequence[Fraction | int | str],
    C1: Fraction | int | float | None = None,
    target_S: int | None = None,
    params: Params = DEFAULT_PARAMS,
) -> ScalePartition:
    """Greedy scale partition: a lower bound on the achievable number of scales.

    Coordinates are taken in decreasing |v_j| order and a part is closed as
    soon as its squared norm reaches C1^2 times the squared norm of the whole
    remaining suffix, which makes every later part (a subset of that suffix)
    satisfy the decay condition.  This is a heuristic, not a maximizer.  When
    target_S is given, surplus trailing parts are merged into the last one
    (still valid, since parts were closed against whole suffixes); if fewer
    scales are found, ScalePartitionError is raised.
    """
    vec = _coerce_vector(v)
    if all(c == 0 for c in vec):
        raise ValueError("zero vector has no scale partition")
    c1 = Fraction(C1) if C1 is not None else params.C1
    c1_sq = c1 * c1
    order = sorted(range(len(vec)), key=lambda j: (-(vec[j] * vec[j]), j))
    suffix_sq = [Fraction(0)] * (len(order) + 1)
    for pos in range(len(order) - 1, -1, -1):
        j = order[pos]
        suffix_sq[pos] = suffix_sq[pos + 1] + vec[j] * vec[j]
    parts: list[list[int]] = []
    current: list[int] = []
    cur_sq = Fraction(0)
    for pos, j in enumerate(order):
        current.append(j)
        cur_sq += vec[j] * vec[j]
        rem = suffix_sq[pos + 1]
        if rem > 0 and cur_sq >= c1_sq * rem:
            parts.append(current)
            current = []
            cur_sq = Fraction(0)
    if current:
        parts.append(current)
    if target_S is not None:
        if target_S < 1:
            raise ValueError("target_S must be >= 1")
        if len(parts) < target_S:
            raise ScalePartitionError(
                f"greedy heuristic reached {len(parts)} scales, target was {target_S}"
            )
        if len(parts) > target_S:
            merged = [c for p in parts[target_S - 1 :] for c in p]
            parts = parts[: target_S - 1] + [merged]
    return ScalePartition.build(vec, parts, c1)


def validate_scales(
    v: Sequence[Fraction | int],
    partition: ScalePartition,
    coords: Sequence[int] | None = None,
) -> bool:
    """Exact check of all ScalePartition invariants against the vector.

    Structural defects (parts not partitioning the coordinate set, stored
    norms disagreeing with the vector) raise; decay-condition failures return
    False.  ``coords`` restricts the coordinate set the parts must cover
    (defaults to all of v's coordinates).
    """
    vec = _coerce_vector(v)
    universe = set(range(len(vec))) if coords is None else set(coords)
    if not partition.parts:
        raise ValueError("partition has no parts")
    seen: set[int] = set()
    for p in partition.parts:
        if not p:
            raise ValueError("empty part in partition")
        for j in p:
            if j not in universe:
                raise ValueError(f"part index {j} outside the coordinate set")
            if j in seen:
                raise ValueError(f"index {j} appears in two parts")
            seen.add(j)
    if seen != universe:
        raise ValueError("parts do not cover the coordinate set")
    norms = tuple(
        sum((vec[j] * vec[j] for j in p), Fraction(0)) for p in partition.parts
    )
    if norms != partition.squared_norms or partition.smallest_scale_sq != norms[-1]:
        raise ValueError("stored squared norms disagree with the vector")
    c1_sq = partition.C1 * partition.C1
    return all(norms[s] >= c1_sq * norms[s + 1] for s in range(len(norms) - 1))


def many_scales_bound(S: int, b: float | Fraction, C0: float | Fraction = 4.706) -> float:
    """Anti-concentration bound exp(-S/(8 C0)) + 3b * exp(-S/(2 C0)) for b >= 2."""
    if S < 1:
        raise ValueError(f"S must be >= 1, got {S}")
    b = float(b)
    if b < 2:
        raise ValueError(f"b must be >= 2, got {b}")
    c0 = float(C0)
    return math.exp(-S / (8 * c0)) + 3 * b * math.exp(-S / (2 * c0))


def check_anticoncentration(
    v: Sequence[Fraction | int],
    partition: ScalePartition,
    a: Fraction | int | str,
    b: float | Fraction,
    mode: str = "exact",
    trials: int = 10000,
    seed: int = 0,
    params: Params = DEFAULT_PARAMS,
) -> tuple[Fraction, float, bool]:
    """P(|<x,v> - a| < b * delta) against the many-scales bound.

    The window test is exact: with delta^2 rational and b coerced to an exact
    rational, the event is (s - a)^2 < b^2 * delta^2.  Returns (probability,
    bound, probability <= bound); a False verdict means the bound is not
    informative at this scale, not that the inputs are wrong.
    """
    vec = _coerce_vector(v)
    if not validate_scales(vec, partition):
        raise ValueError("partition does not satisfy the scale-decay invariants")
    if partition.smallest_scale_sq <= 0:
        raise ValueError("smallest scale must be nonzero")
    b_exact = Fraction(b)
    if b_exact < 2:
        raise ValueError(f"b must be >= 2, got {b}")
    target = _coerce_vector([a])[0]
    window_sq = b_exact * b_exact * partition.smallest_scale_sq

    def in_window(s: Fraction) -> bool:
        d = s - target
        return d * d < window_sq

    if mode == "exact":
        if len(vec) > params.enumeration_cap:
            raise CapExceededError(f"dim={len(vec)} exceeds enumeration cap")
        counts = subset_sum_counts(vec)
        hits = sum(m for s, m in counts.items() if in_window(s))
        prob = Fraction(hits, 1 << len(vec))
    elif mode == "sampled":
        if trials < 1:
            raise ValueError(f"trials must be >= 1, got {trials}")
        rng = random.Random(seed)
        hits = 0
        for _ in range(trials):
            s = sum((c for c in vec if rng.getrandbits(1)), Fraction(0))
            if in_window(s):
                hits += 1
        prob = Fraction(hits, trials)
    else:
        raise ValueError(f"mode must be 'exact' or 'sampled', got {mode!r}")
    bound = many_scales_bound(partition.S, float(b_exact), float(params.C0))
    return prob, bound, float(prob) <= bound


def concentration_window_prob(
    row: UnitRow | Sequence[Fraction | int | str],
    C0: Fraction | float | None = None,
    mode: str = "exact",
    trials: int = 10000,
    seed: int = 0,
    params: Params = DEFAULT_PARAMS,
) -> tuple[Fraction, bool]:
    """P(1/C0 <= |<x,v> - (1/2) sum v| <= C0) for a unit-normalized row.

    The row is coeffs/sqrt(q); with z = <x,coeffs> - (1/2) sum coeffs the
    window membership is decided exactly via z^2 * C0^2 >= q and
    z^2 <= C0^2 * q.  ok is the claim probability >= 1/C0, also exact.
    """
    if not isinstance(row, UnitRow):
        row = unit_row(row)
    if C0 is None:
        c0 = params.C0
    elif isinstance(C0, float):
        # Read floats as their decimal literal so that C0=4.706 means exactly
        # 4706/1000 and not the slightly smaller binary neighbour.
        c0 = Fraction(str(C0))
    else:
        c0 = Fraction(C0)
    if c0 < Fraction(4706, 1000):
        raise ValueError(f"C0 must be >= 4.706, got {float(c0)}")
    vec = row.coeffs
    q = row.norm_sq
    half_sum = sum(vec, Fraction(0)) / 2
    c0_sq = c0 * c0

    def in_window(s: Fraction) -> bool:
        z = s - half_sum
        z_sq = z * z
        return z_sq * c0_sq >= q and z_sq <= c0_sq * q

    if mode == "exact":
        if len(vec) > params.enumeration_cap:
            raise CapExceededError(f"dim={len(vec)} exceeds enumeration cap")
        counts = subset_sum_counts(vec)
        hits = sum(m for s, m in counts.items() if in_window(s))
        prob = Fraction(hits, 1 << len(vec))
    elif mode == "sampled":
        if trials < 1:
            raise ValueError(f"trials must be >= 1, got {trials}")
        rng = random.Random(seed)
        hits = 0
        for _ in range(trials):
            s = sum((c for c in vec if rng.getrandbits(1)), Fraction(0))
            if in_window(s):
                hits += 1
        prob = Fraction(hits, trials)
    else:
        raise ValueError(f"mode must be 'exact' or 'sampled', got {mode!r}")
    return prob, prob * c0 >= 1
