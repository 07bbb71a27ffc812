"""End-to-end refutation: assemble an uncovered vertex block by block, or
report exactly which stage failed.

The pipeline decomposes the system, fixes the N3 coordinates from a vertex
avoiding the K1 hyperplanes, rejection-samples the N2 coordinates until the
K2/K4 acceptance certificate holds, and runs the small-norm finder on the
K3 x N1 block.  Every certificate is a per-instance exact sufficient
condition; the assembled vertex is additionally re-verified row by row, in
exact arithmetic, against the original unrescaled system before being
returned.  A returned vertex is never unverified.

Stage seeds are derived deterministically from params.seed (seed, seed+1,
seed+2 for the N3 search, the N2 sampler and the rounding stage).
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping

from .core import CoveringSystem, Params, DEFAULT_PARAMS, UnitRow, Vertex, format_rational
from .cube import enumerate_uncovered, sample_uncovered, evaluate_row
from .decompose import Decomposition2, second_decomposition
from .plank import (
    SampleCapError,
    check_small_norm_precondition,
    find_uncovered_small_norm,
)

STAGES = (
    "decomposition-hypotheses",
    "n3-assignment",
    "n2-sampling",
    "small-norm-precondition",
    "rounding-cap",
)


class StageFailure(Exception):
    """A pipeline stage could not produce its certificate."""

    def __init__(self, stage: str, detail: dict):
        assert stage in STAGES
        super().__init__(f"stage {stage} failed")
        self.stage = stage
        self.detail = detail


@dataclass(frozen=True)
class RefutationOutcome:
    """Either an exactly verified uncovered vertex, or the first failed stage."""

    status: str  # "uncovered" | "failed"
    vertex: Vertex | None
    stage: str | None
    detail: dict

    def to_json_dict(self) -> dict:
        return {
            "status": self.status,
            "vertex": self.vertex.to_json() if self.vertex is not None else None,
            "stage": self.stage,
            "detail": self.detail,
        }


def derived_scale_count(n: int, params: Params = DEFAULT_PARAMS) -> int:
    """Default S = max(1, floor(C5 * ln n))."""
    if params.S is not None:
        return params.S
    return max(1, int(float(params.C5) * math.log(n))) if n > 1 else 1


def derived_column_budget(n: int, k: int, params: Params = DEFAULT_PARAMS) -> Fraction:
    """Default W = w_multiplier * ln(n) * k^2 / n, frozen as an exact rational."""
    if params.W is not None:
        return Fraction(params.W)
    w = params.w_multiplier * Fraction(math.log(n) if n > 1 else 1.0) * k * k / n
    return w if w > 0 else Fraction(1, 100)


def choose_n3_assignment(
    system: CoveringSystem,
    d: Decomposition2,
    params: Params = DEFAULT_PARAMS,
) -> dict[int, int]:
    """Fix the N3 coordinates: a vertex avoiding every K1 hyperplane, restricted to N3.

    K1 rows are supported inside N3, so the search runs over the N3 subcube
    only.  Empty N3 gives the empty assignment; empty K1 gives all zeros.
    Raises StageFailure when no avoiding assignment is found within the caps.
    """
    if not d.N3:
        return {}
    if not d.K1:
        return {j: 0 for j in d.N3}
    cols = list(d.N3)
    sub = CoveringSystem.from_rows(
        [[system.rows[i][j] for j in cols] for i in d.K1],
        [system.mu[i] for i in d.K1],
    )
    if sub.n <= params.enumeration_cap:
        report = enumerate_uncovered(sub, params)
    else:
        report = sample_uncovered(sub, trials=params.sample_cap, seed=params.seed)
    if report.witness is None:
        raise StageFailure(
            "n3-assignment",
            {
                "k1_rows": list(d.K1),
                "n3_size": len(cols),
                "search_mode": report.mode,
                "searched": report.samples if report.mode == "sampled" else report.total_vertices,
                "note": "no vertex avoids all K1 hyperplanes",
            },
        )
    return {j: bit for j, bit in zip(cols, report.witness.bits)}


def k4_row_excluded(
    system: CoveringSystem,
    d: Decomposition2,
    i: int,
    residual_mu: Fraction,
    w_bits: Mapping[int, int],
) -> bool:
    """Exact sufficient condition that no N1 completion can satisfy row i.

    With B the smallest-scale columns outside N1, the inner product of any
    0/1 vector with v restricted to N1 u B is at most sqrt(n) times that
    block's norm (Cauchy-Schwarz), so
    (<v|_{N2-B}, w> - mu')^2 > n * ||v|_{N1 u B}||^2 rules every completion
    out.  The unit normalizer of the row cancels from both sides, so the test
    runs on the original rational row.
    """
    part = d.scale_partitions[i]
    row = system.rows[i]
    n1 = set(d.N1)
    b_cols = [j for j in part.parts[-1] if j not in n1]
    b_set = set(b_cols)
    lhs_inner = sum(
        (row[j] * w_bits[j] for j in d.N2 if j not in b_set), Fraction(0)
    ) - residual_mu
    rhs = system.n * (
        sum((row[j] * row[j] for j in d.N1), Fraction(0))
        + sum((row[j] * row[j] for j in b_cols), Fraction(0))
    )
    return lhs_inner * lhs_inner > rhs


def sample_n2_assignment(
    system: CoveringSystem,
    d: Decomposition2,
    n3_assignment: Mapping[int, int],
    params: Params = DEFAULT_PARAMS,
) -> tuple[dict[int, int], dict]:
    """Rejection-sample w on {0,1}^N2 until the K2/K4 acceptance certificate holds.

    Acceptance: every K2 row (zero on N1) misses its residual target exactly,
    and every K4 row passes the k4_row_excluded test.  Empty N2 or empty
    K2 u K4 accepts the empty assignment vacuously.  Raises StageFailure with
    the empirical rejection rate when the cap is exhausted.
    """
    relevant = list(d.K2) + list(d.K4)
    if not d.N2 or not relevant:
        return ({j: 0 for j in d.N2}, {"attempts": 0, "vacuous": True})
    residual = {
        i: system.mu[i]
        - sum((system.rows[i][j] * n3_assignment[j] for j in d.N3), Fraction(0))
        for i in relevant
    }
    rng = random.Random(params.seed + 1)
    rejections = {"k2": 0, "k4": 0}
    for attempt in range(1, params.sample_cap + 1):
        w = {j: rng.getrandbits(1) for j in d.N2}
        ok = True
        for i in d.K2:
            dot = sum((system.rows[i][j] * w[j] for j in d.N2), Fraction(0))
            if dot == residual[i]:
                ok = False
                rejections["k2"] += 1
                break
        if ok:
            for i in d.K4:
                if not k4_row_excluded(system, d, i, residual[i], w):
                    ok = False
                    rejections["k4"] += 1
                    break
        if ok:
            return (w, {"attempts": attempt, "vacuous": False})
    raise StageFailure(
        "n2-sampling",
        {
            "attempts": params.sample_cap,
            "rejections": rejections,
            "rejection_rate": (rejections["k2"] + rejections["k4"]) / params.sample_cap,
            "k2_rows": list(d.K2),
            "k4_rows": list(d.K4),
        },
    )


def attempt_refutation(system: CoveringSystem, params: Params = DEFAULT_PARAMS) -> RefutationOutcome:
    """Run the full pipeline; never returns an unverified vertex.

    All failures are structured outcomes naming the first failed stage with
    quantitative margins, never exceptions.
    """
    n, k = system.n, system.k
    S = derived_scale_count(n, params)
    W = derived_column_budget(n, k, params)
    d = second_decomposition(system, S, W, params)
    detail: dict = {
        "S": S,
        "W": format_rational(W),
        "W_float": float(W),
        "hypotheses": {
            "product_ok": d.hyp_product_ok,
            "product_lhs": float(d.hyp_product_lhs),
            "product_rhs": float(d.hyp_product_rhs),
            "rowcount_ok": d.hyp_rowcount_ok,
            "support_ok": d.hyp_support_ok,
        },
        "block_sizes": {
            "K1": len(d.K1),
            "K2": len(d.K2),
            "K3": len(d.K3),
            "K4": len(d.K4),
            "N1": len(d.N1),
            "N2": len(d.N2),
            "N3": len(d.N3),
        },
    }
    if params.require_hypotheses and not d.hypotheses_ok:
        detail["note"] = "decomposition hypotheses do not hold and strict mode is on"
        return RefutationOutcome(status="failed", vertex=None, stage="decomposition-hypotheses", detail=detail)

    try:
        u3 = choose_n3_assignment(system, d, params)
        detail["n3_assignment"] = {str(j): b for j, b in sorted(u3.items())}
        w2, n2_detail = sample_n2_assignment(system, d, u3, params)
        detail["n2_sampling"] = n2_detail
    except StageFailure as failure:
        detail[failure.stage] = failure.detail
        return RefutationOutcome(status="failed", vertex=None, stage=failure.stage, detail=detail)

    fixed = dict(u3)
    fixed.update(w2)
    n1_bits: dict[int, int] = {j: 0 for j in d.N1}
    if d.K3:
        block = [
            UnitRow(
                coeffs=tuple(system.rows[i][j] for j in d.N1),
                norm_sq=sum((system.rows[i][j] ** 2 for j in d.N1), Fraction(0)),
            )
            for i in d.K3
        ]
        targets = [
            system.mu[i]
            - sum((system.rows[i][j] * fixed[j] for j in list(d.N2) + list(d.N3)), Fraction(0))
            for i in d.K3
        ]
        precheck = check_small_norm_precondition(block)
        detail["small_norm"] = precheck.to_json_dict()
        if not precheck.ok:
            return RefutationOutcome(
                status="failed", vertex=None, stage="small-norm-precondition", detail=detail
            )
        try:
            witness, attempts = find_uncovered_small_norm(
                block, targets, params, seed=params.seed + 2
            )
        except SampleCapError as exc:
            detail["rounding"] = {"attempts": exc.attempts}
            return RefutationOutcome(status="failed", vertex=None, stage="rounding-cap", detail=detail)
        detail["rounding"] = {"attempts": attempts}
        n1_bits = {j: bit for j, bit in zip(d.N1, witness.bits)}

    fixed.update(n1_bits)
    u = Vertex(tuple(fixed[j] for j in range(n)))
    violating = [i for i in range(k) if evaluate_row(system, i, u)]
    if violating:
        # The per-block certificates make this unreachable; report honestly
        # rather than return an unverified vertex.
        detail["verification_failure_rows"] = violating
        block_of = {i: "n3-assignment" for i in d.K1}
        block_of.update({i: "n2-sampling" for i in list(d.K2) + list(d.K4)})
        block_of.update({i: "rounding-cap" for i in d.K3})
        return RefutationOutcome(
            status="failed",
            vertex=None,
            stage=block_of.get(violating[0], "rounding-cap"),
            detail=detail,
        )
    detail["verified_rows"] = k
    return RefutationOutcome(status="uncovered", vertex=u, stage=None, detail=detail)
