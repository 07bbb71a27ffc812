"""Greedy structural decompositions of rational matrices.

Three algorithms:

* greedy_support_split peels off rows whose residual support is small,
  leaving a block in which every row has support at least ell.
* first_decomposition repeatedly moves heavy columns out of the working
  block, renormalizing rows whose residual mass drops below tau; a row
  renormalized S times has acquired S scales and is moved aside.  Rows are
  tracked as (rational row, rational squared norm q) pairs, so the whole run
  is exact: the rational entries never change, only q does.
* second_decomposition iterates the first decomposition, absorbing
  zero-residual rows and their columns, until the leftover zero rows are few
  and all have large support on the final moved columns.

Row blocks are named L1/L2 (first stage) and K1..K4 (second stage); column
blocks M1/M2 and N1..N3.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Sequence

from .anticonc import ScalePartition, validate_scales
from .core import CoveringSystem, Params, DEFAULT_PARAMS, RowScaling, format_rational

Matrix = Sequence[Sequence[Fraction | int]]


def _coerce_matrix(matrix: Matrix) -> list[tuple[Fraction, ...]]:
    return [tuple(Fraction(c) for c in row) for row in matrix]


@dataclass(frozen=True)
class GreedySplit:
    """Row split L1 (removal order) / L2 and column split M1 / M2 at threshold ell.

    The block L1 x M1 is identically zero and every L2 row has at least ell
    support inside M1; each L1 row, at its removal, had residual support
    (outside the columns already moved) below ell.
    """

    L1: tuple[int, ...]
    L2: tuple[int, ...]
    M1: tuple[int, ...]
    M2: tuple[int, ...]
    ell: int


def greedy_support_split(system: CoveringSystem, ell: int) -> GreedySplit:
    """Peel rows with residual support < ell, absorbing their supports into M2."""
    if ell < 1:
        raise ValueError(f"ell must be >= 1, got {ell}")
    k = system.k
    supports = [set(system.row_support(i)) for i in range(k)]
    l1: list[int] = []
    l2 = set(range(k))
    m2: set[int] = set()
    # Sweep ascending row indices, removing every qualifying row as it is
    # met, until a full pass removes nothing.
    changed = True
    while changed:
        changed = False
        for i in sorted(l2):
            if len(supports[i] - m2) < ell:
                l1.append(i)
                l2.remove(i)
                m2 |= supports[i]
                changed = True
    m1 = sorted(set(range(system.n)) - m2)
    return GreedySplit(
        L1=tuple(l1),
        L2=tuple(sorted(l2)),
        M1=tuple(m1),
        M2=tuple(sorted(m2)),
        ell=ell,
    )


@dataclass(frozen=True)
class Decomposition1:
    """Output of first_decomposition on an l x m matrix.

    ``row_norm_sq`` holds the final normalizer q_i per row: the effective row
    is the input row divided by sqrt(q_i).  Rows in L2 carry a scale
    partition with S parts whose last part contains the final M1 columns.
    """

    L1: tuple[int, ...]
    L2: tuple[int, ...]
    M1: tuple[int, ...]
    M2: tuple[int, ...]
    row_norm_sq: tuple[Fraction, ...]
    scale_partitions: Mapping[int, ScalePartition]
    renorm_counts: tuple[int, ...]
    S: int
    W: Fraction

    @property
    def rescaling(self) -> RowScaling:
        return RowScaling(
            factors=(Fraction(1),) * len(self.row_norm_sq),
            unit_normalized=True,
            norm_sq=self.row_norm_sq,
        )


def _partition_from_snapshots(
    row: Sequence[Fraction],
    snapshots: Sequence[frozenset[int]],
    m: int,
    C1: Fraction,
) -> ScalePartition:
    """Scale parts from the M1 snapshots taken at each renormalization.

    With snapshots A_1 .. A_S (M1 at the moment of each renormalization),
    the parts are P_1 = [m] - A_2, P_s = A_s - A_{s+1}, P_S = A_S: between
    consecutive renormalizations the mass outside the next snapshot is at
    least (1 - tau) while the mass inside is at most tau, which is exactly
    the C1^2 squared-norm decay.
    """
    S = len(snapshots)
    everything = frozenset(range(m))
    if S == 1:
        parts: list[list[int]] = [sorted(everything)]
    else:
        parts = [sorted(everything - snapshots[1])]
        parts.extend(
            sorted(snapshots[s] - snapshots[s + 1]) for s in range(1, S - 1)
        )
        parts.append(sorted(snapshots[S - 1]))
    return ScalePartition.build(row, parts, C1)


def first_decomposition(
    matrix: Matrix,
    S: int,
    W: Fraction | int | float,
    params: Params = DEFAULT_PARAMS,
) -> Decomposition1:
    """Move heavy columns to M2 until all remaining column masses are below tau/W.

    Rows are unit-normalized internally (q_i starts at the full squared norm)
    and renormalized to unit residual norm whenever their M1 mass falls into
    (0, tau]; the S-th renormalization moves the row to L2 together with its
    remaining support.  Terminates in at most m iterations since every
    iteration removes one column.
    """
    if S < 1:
        raise ValueError(f"S must be >= 1, got {S}")
    w = Fraction(W)
    if w <= 0:
        raise ValueError(f"W must be positive, got {W}")
    rows = _coerce_matrix(matrix)
    ell = len(rows)
    m = len(rows[0]) if rows else 0
    tau = params.tau
    threshold = tau / w
    c1 = params.C1

    supports = [frozenset(j for j, c in enumerate(row) if c != 0) for row in rows]
    q: list[Fraction] = []
    for row in rows:
        full = sum((c * c for c in row), Fraction(0))
        q.append(full if full > 0 else Fraction(1))
    l1 = set(range(ell))
    l2: list[int] = []
    m1 = set(range(m))
    m2: list[int] = []
    renorms = [0] * ell
    snapshots: list[list[frozenset[int]]] = [[] for _ in range(ell)]
    partitions: dict[int, ScalePartition] = {}

    while True:
        pick = None
        for j in sorted(m1):
            mass = sum((rows[i][j] * rows[i][j] / q[i] for i in l1), Fraction(0))
            if mass >= threshold:
                pick = j
                break
        if pick is None:
            break
        m1.remove(pick)
        m2.append(pick)
        departures: list[int] = []
        for i in sorted(l1):
            residual = sum((rows[i][j] * rows[i][j] for j in m1), Fraction(0))
            p = residual / q[i]
            if 0 < p <= tau:
                q[i] = residual
                renorms[i] += 1
                snapshots[i].append(frozenset(m1))
                if renorms[i] == S:
                    departures.append(i)
        for i in departures:
            l1.remove(i)
            l2.append(i)
            partitions[i] = _partition_from_snapshots(rows[i], snapshots[i], m, c1)
            moved = sorted(supports[i] & m1)
            m1 -= supports[i]
            m2.extend(moved)

    # Final renormalization to unit residual norm; not a scale boundary.
    for i in sorted(l1):
        residual = sum((rows[i][j] * rows[i][j] for j in m1), Fraction(0))
        if residual > 0:
            q[i] = residual

    return Decomposition1(
        L1=tuple(sorted(l1)),
        L2=tuple(sorted(l2)),
        M1=tuple(sorted(m1)),
        M2=tuple(m2),
        row_norm_sq=tuple(q),
        scale_partitions=partitions,
        renorm_counts=tuple(renorms),
        S=S,
        W=w,
    )


def check_decomposition1(
    matrix: Matrix,
    d: Decomposition1,
    params: Params = DEFAULT_PARAMS,
) -> bool:
    """Exact verification of every Decomposition1 invariant.

    Shape mismatches raise; invariant failures return False.
    """
    rows = _coerce_matrix(matrix)
    ell = len(rows)
    m = len(rows[0]) if rows else 0
    if len(d.row_norm_sq) != ell or len(d.renorm_counts) != ell:
        raise ValueError("decomposition row metadata does not match the matrix")
    if sorted(d.L1 + d.L2) != list(range(ell)):
        raise ValueError("L1, L2 do not partition the row set")
    if sorted(d.M1 + d.M2) != list(range(m)):
        raise ValueError("M1, M2 do not partition the column set")
    if any(q <= 0 for q in d.row_norm_sq):
        return False
    # Rows of the effective block have residual norm exactly 0 or 1.
    for i in d.L1:
        residual = sum((rows[i][j] * rows[i][j] for j in d.M1), Fraction(0))
        if residual != 0 and residual != d.row_norm_sq[i]:
            return False
    # Columns of the effective block are strictly below W^{-1/2}.
    inv_w = 1 / d.W
    for j in d.M1:
        col_sq = sum(
            (rows[i][j] * rows[i][j] / d.row_norm_sq[i] for i in d.L1), Fraction(0)
        )
        if col_sq >= inv_w:
            return False
    if Fraction(len(d.M2)) > params.C3 * ell * d.S * d.W:
        return False
    m1_set = set(d.M1)
    for i in d.L2:
        part = d.scale_partitions.get(i)
        if part is None or part.S != d.S:
            return False
        if not validate_scales(rows[i], part):
            return False
        if not m1_set <= set(part.parts[-1]):
            return False
    return True


@dataclass(frozen=True)
class Decomposition2:
    """Output of second_decomposition on a k x n covering system.

    Row blocks: K1 is zero on N1 u N2, K2 is zero on N1 with large support
    on N2, K3 has unit rows and small column norms on N1, K4 rows have S
    scales on N1 u N2 with the smallest scale containing N1.  ``trace``
    records each absorption round.  The guarantee hypotheses are evaluated
    exactly and reported as flags; |N1| >= n/2 is only asserted when all of
    them held.
    """

    K1: tuple[int, ...]
    K2: tuple[int, ...]
    K3: tuple[int, ...]
    K4: tuple[int, ...]
    N1: tuple[int, ...]
    N2: tuple[int, ...]
    N3: tuple[int, ...]
    row_norm_sq: tuple[Fraction, ...]
    scale_partitions: Mapping[int, ScalePartition]
    S: int
    W: Fraction
    gamma: Fraction
    hyp_product_ok: bool
    hyp_product_lhs: Fraction
    hyp_product_rhs: Fraction
    hyp_rowcount_ok: bool
    hyp_support_ok: bool
    trace: tuple[dict, ...]

    @property
    def hypotheses_ok(self) -> bool:
        """All guarantees require an essential-shaped input: the per-row
        support bound 2k caps the dense-column absorption at n/8, which the
        two numeric hypotheses alone do not."""
        return self.hyp_product_ok and self.hyp_rowcount_ok and self.hyp_support_ok

    @property
    def rescaling(self) -> RowScaling:
        return RowScaling(
            factors=(Fraction(1),) * len(self.row_norm_sq),
            unit_normalized=True,
            norm_sq=self.row_norm_sq,
        )

    def to_json_dict(self) -> dict:
        return {
            "K1": list(self.K1),
            "K2": list(self.K2),
            "K3": list(self.K3),
            "K4": list(self.K4),
            "N1": list(self.N1),
            "N2": list(self.N2),
            "N3": list(self.N3),
            "row_norm_sq": [format_rational(q) for q in self.row_norm_sq],
            "scale_partitions": {
                str(i): p.to_json_dict() for i, p in self.scale_partitions.items()
            },
            "S": self.S,
            "W": format_rational(self.W),
            "gamma": format_rational(self.gamma),
            "hyp_product_ok": self.hyp_product_ok,
            "hyp_product_lhs": format_rational(self.hyp_product_lhs),
            "hyp_product_rhs": format_rational(self.hyp_product_rhs),
            "hyp_rowcount_ok": self.hyp_rowcount_ok,
            "hyp_support_ok": self.hyp_support_ok,
            "hypotheses_ok": self.hypotheses_ok,
            "trace": list(self.trace),
        }


def _gamma_exceeds(count: int, base: int, gamma: Fraction) -> bool:
    """Exact test of count > base**gamma for rational gamma in (0, 1]."""
    p, qq = gamma.numerator, gamma.denominator
    return count**qq > base**p


def second_decomposition(
    system: CoveringSystem,
    S: int,
    W: Fraction | int | float,
    params: Params = DEFAULT_PARAMS,
) -> Decomposition2:
    """Iterate the first decomposition, absorbing zero rows, until stable.

    Round structure: decompose the working submatrix; let Z be the working
    rows that are zero on the residual columns M1.  If Z is larger than
    |M2|^gamma, absorb Z and M2 wholesale; otherwise absorb a single Z row
    whose support on M2 is at most 4|Z|^2, if one exists; otherwise stop and
    name the blocks: K2 = Z, K3 = the unit-norm rows, K4 = the rows that
    acquired S scales in the final round, N1/N2 = the final M1/M2.

    The two hypotheses (C3*k*S*W <= n/8 and k^5 (SW)^2 <= C4^5 n^3) are
    evaluated and reported; the algorithm runs either way, but |N1| >= n/2 is
    only guaranteed when they hold.
    """
    if S < 1:
        raise ValueError(f"S must be >= 1, got {S}")
    w = Fraction(W)
    if w <= 0:
        raise ValueError(f"W must be positive, got {W}")
    k, n = system.k, system.n
    gamma = params.gamma
    if not 0 < gamma <= 1:
        raise ValueError(f"gamma must be in (0, 1], got {gamma}")
    rows = system.rows
    supports = [frozenset(system.row_support(i)) for i in range(k)]

    thresh16 = Fraction(16 * k * k, n)
    n3 = {j for j in range(n) if system.column_support_size(j) >= thresh16}
    k1 = {i for i in range(k) if supports[i] <= n3}
    work_rows = sorted(set(range(k)) - k1)
    work_cols = sorted(set(range(n)) - n3)
    q_final: dict[int, Fraction] = {
        i: (sum((c * c for c in rows[i]), Fraction(0)) or Fraction(1)) for i in range(k)
    }
    trace: list[dict] = []
    if n3 or k1:
        trace.append(
            {"round": 0, "action": "dense-column-filter", "absorbed_rows": sorted(k1), "absorbed_cols": sorted(n3)}
        )

    round_no = 0
    while True:
        round_no += 1
        if not work_rows:
            # Nothing left to decompose; the remaining columns are all N1.
            trace.append({"round": round_no, "rows": 0, "cols": len(work_cols), "action": "stop"})
            k2, k3, k4 = [], [], []
            n1, n2 = list(work_cols), []
            partitions = {}
            break
        sub = [[rows[i][j] for j in work_cols] for i in work_rows]
        d1 = first_decomposition(sub, S, w, params)
        l1g = [work_rows[i] for i in d1.L1]
        l2g = [work_rows[i] for i in d1.L2]
        m1g = [work_cols[j] for j in d1.M1]
        m2g = [work_cols[j] for j in d1.M2]
        for local, i in enumerate(work_rows):
            q_final[i] = d1.row_norm_sq[local]
        m1g_set = set(m1g)
        z = [i for i in l1g if not (supports[i] & m1g_set)]
        record = {
            "round": round_no,
            "rows": len(work_rows),
            "cols": len(work_cols),
            "L1": l1g,
            "L2": l2g,
            "M1_size": len(m1g),
            "M2": m2g,
            "Z": z,
        }
        if z and _gamma_exceeds(len(z), len(m2g), gamma):
            record["action"] = "absorb-zero-rows"
            trace.append(record)
            k1.update(z)
            n3.update(m2g)
            work_rows = [i for i in work_rows if i not in set(z)]
            work_cols = [j for j in work_cols if j not in set(m2g)]
            continue
        m2g_set = set(m2g)
        star = None
        limit = 4 * len(z) * len(z)
        for i in z:
            if len(supports[i] & m2g_set) <= limit:
                star = i
                break
        if star is not None:
            absorbed_cols = sorted(supports[star] & set(work_cols))
            record["action"] = "absorb-sparse-row"
            record["row"] = star
            record["absorbed_cols"] = absorbed_cols
            trace.append(record)
            k1.add(star)
            n3.update(absorbed_cols)
            work_rows = [i for i in work_rows if i != star]
            work_cols = [j for j in work_cols if j not in set(absorbed_cols)]
            continue
        record["action"] = "stop"
        trace.append(record)
        k2 = sorted(z)
        k3 = sorted(set(l1g) - set(z))
        k4 = sorted(l2g)
        n1 = sorted(m1g)
        n2 = sorted(m2g)
        partitions: dict[int, ScalePartition] = {}
        for local, part in d1.scale_partitions.items():
            gi = work_rows[local]
            global_parts = [tuple(work_cols[j] for j in p) for p in part.parts]
            partitions[gi] = ScalePartition(
                parts=tuple(tuple(sorted(p)) for p in global_parts),
                C1=part.C1,
                squared_norms=part.squared_norms,
                smallest_scale_sq=part.smallest_scale_sq,
            )
        break

    c3 = params.C3
    h1_lhs = c3 * k * S * w
    h1_rhs = Fraction(n, 8)
    h1 = h1_lhs <= h1_rhs
    h2 = k**5 * (S * w) ** 2 <= params.C4**5 * n**3
    h3 = max(len(s) for s in supports) <= 2 * k
    return Decomposition2(
        K1=tuple(sorted(k1)),
        K2=tuple(k2),
        K3=tuple(k3),
        K4=tuple(k4),
        N1=tuple(n1),
        N2=tuple(n2),
        N3=tuple(sorted(n3)),
        row_norm_sq=tuple(q_final[i] for i in range(k)),
        scale_partitions=partitions,
        S=S,
        W=w,
        gamma=gamma,
        hyp_product_ok=h1,
        hyp_product_lhs=h1_lhs,
        hyp_product_rhs=h1_rhs,
        hyp_rowcount_ok=h2,
        hyp_support_ok=h3,
        trace=tuple(trace),
    )


def check_decomposition2(
    system: CoveringSystem,
    d: Decomposition2,
    params: Params = DEFAULT_PARAMS,
) -> bool:
    """Exact verification of every Decomposition2 invariant.

    Shape mismatches raise; invariant failures return False.  The column
    l1-mass display sum_{i in K3} |v'_ij| < sqrt(16 k^2 / (n W)) is certified
    through its Cauchy-Schwarz majorant support_j * colnorm_j^2, keeping the
    check rational.
    """
    k, n = system.k, system.n
    if sorted(d.K1 + d.K2 + d.K3 + d.K4) != list(range(k)):
        raise ValueError("K1..K4 do not partition the row set")
    if sorted(d.N1 + d.N2 + d.N3) != list(range(n)):
        raise ValueError("N1..N3 do not partition the column set")
    if len(d.row_norm_sq) != k:
        raise ValueError("row_norm_sq length mismatch")
    rows = system.rows
    n12 = d.N1 + d.N2
    thresh16 = Fraction(16 * k * k, n)
    for j in n12:
        if system.column_support_size(j) > thresh16:
            return False
    for i in d.K1:
        if any(rows[i][j] != 0 for j in n12):
            return False
    for i in d.K2:
        if any(rows[i][j] != 0 for j in d.N1):
            return False
        if sum(1 for j in d.N2 if rows[i][j] != 0) < 4 * len(d.K2) ** 2:
            return False
    inv_w = 1 / d.W
    for i in d.K3:
        residual = sum((rows[i][j] * rows[i][j] for j in d.N1), Fraction(0))
        if residual != d.row_norm_sq[i]:
            return False
    linf_rhs = Fraction(16 * k * k, n) / d.W
    for j in d.N1:
        col_sq = sum(
            (rows[i][j] * rows[i][j] / d.row_norm_sq[i] for i in d.K3), Fraction(0)
        )
        if col_sq > inv_w:
            return False
        supp_j = sum(1 for i in d.K3 if rows[i][j] != 0)
        if col_sq > 0 and supp_j * col_sq >= linf_rhs:
            return False
    n1_set = set(d.N1)
    coords = set(n12)
    for i in d.K4:
        part = d.scale_partitions.get(i)
        if part is None or part.S != d.S:
            return False
        if not validate_scales(rows[i], part, coords=coords):
            return False
        if part.smallest_scale_sq <= 0:
            return False
        if not n1_set <= set(part.parts[-1]):
            return False
    if d.hypotheses_ok and 2 * len(d.N1) < n:
        return False
    return True
