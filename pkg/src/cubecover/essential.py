"""Decide the essential-cover axioms and the 2k support bound, with witnesses.

A system is an essential cover when (E1) every vertex lies on some hyperplane,
(E2) every variable appears in some row, and (E3) every row owns a vertex
exclusively.  E1 and E3 are decided in a single exhaustive Gray-code sweep
that tracks, per vertex, how many rows are satisfied and which one when the
count is 1.  Above the enumeration cap these operations refuse rather than
guess: their outputs feed certificates.
"""

from __future__ import annotations

from dataclasses import dataclass

from .core import CapExceededError, CoveringSystem, Params, DEFAULT_PARAMS, Vertex
from .cube import _coverage_sweep


@dataclass(frozen=True)
class EssentialReport:
    """Verdicts and witnesses for (E1)-(E3) plus the 2k support bound.

    ``is_essential`` is the conjunction of the three axioms; the support
    bound is reported alongside but is a theorem for essential systems, not
    part of the definition.
    """

    e1: bool
    e1_witness: Vertex | None  # uncovered vertex when e1 is False
    e2: bool
    unused_columns: tuple[int, ...]
    e3: bool
    e3_witnesses: tuple[Vertex | None, ...]
    support_bound_ok: bool
    support_sizes: tuple[int, ...]
    is_essential: bool

    def to_json_dict(self) -> dict:
        return {
            "e1": self.e1,
            "e1_witness": self.e1_witness.to_json() if self.e1_witness else None,
            "e2": self.e2,
            "unused_columns": list(self.unused_columns),
            "e3": self.e3,
            "e3_witnesses": [w.to_json() if w else None for w in self.e3_witnesses],
            "support_bound_ok": self.support_bound_ok,
            "support_sizes": list(self.support_sizes),
            "is_essential": self.is_essential,
        }

    @classmethod
    def from_json_dict(cls, doc: dict) -> "EssentialReport":
        return cls(
            e1=doc["e1"],
            e1_witness=Vertex(tuple(doc["e1_witness"])) if doc["e1_witness"] else None,
            e2=doc["e2"],
            unused_columns=tuple(doc["unused_columns"]),
            e3=doc["e3"],
            e3_witnesses=tuple(Vertex(tuple(w)) if w else None for w in doc["e3_witnesses"]),
            support_bound_ok=doc["support_bound_ok"],
            support_sizes=tuple(doc["support_sizes"]),
            is_essential=doc["is_essential"],
        )


def _require_cap(system: CoveringSystem, params: Params) -> None:
    if system.n > params.enumeration_cap:
        raise CapExceededError(
            f"n={system.n} exceeds enumeration cap {params.enumeration_cap}"
        )


def check_cover(
    system: CoveringSystem,
    params: Params = DEFAULT_PARAMS,
    sample_fallback: bool = False,
) -> tuple[bool, Vertex | None]:
    """(E1): True iff every vertex satisfies some row; else an uncovered witness.

    Above the enumeration cap this refuses unless ``sample_fallback`` is set,
    in which case a sampled counterexample still yields a definitive
    (False, witness); if sampling finds nothing the cap error is raised
    anyway, since a certified True needs the exhaustive sweep.
    """
    if system.n > params.enumeration_cap:
        if sample_fallback:
            from .cube import sample_uncovered

            report = sample_uncovered(system, trials=params.sample_cap, seed=params.seed)
            if report.witness is not None:
                return False, report.witness
            raise CapExceededError(
                f"no uncovered vertex among {params.sample_cap} samples and "
                f"n={system.n} exceeds enumeration cap {params.enumeration_cap}; "
                "a cover verdict needs the exhaustive sweep"
            )
        _require_cap(system, params)
    uncovered, min_code, _ = _coverage_sweep(system)
    if uncovered == 0:
        return True, None
    return False, Vertex.from_code(min_code, system.n)


def check_variable_usage(system: CoveringSystem) -> tuple[bool, tuple[int, ...]]:
    """(E2): True iff every column has a nonzero entry; lists unused columns (0-indexed)."""
    unused = tuple(j for j in range(system.n) if system.column_support_size(j) == 0)
    return (len(unused) == 0, unused)


def check_minimality(
    system: CoveringSystem, params: Params = DEFAULT_PARAMS
) -> tuple[bool, tuple[Vertex | None, ...]]:
    """(E3): per row, a vertex on that hyperplane and off all others, or None.

    One sweep harvests exclusive witnesses for all rows simultaneously; each
    reported witness is the lexicographically smallest for its row.
    """
    _require_cap(system, params)
    _, _, excl = _coverage_sweep(system, collect_exclusive=True)
    witnesses = tuple(
        Vertex.from_code(c, system.n) if c is not None else None for c in excl
    )
    return all(w is not None for w in witnesses), witnesses


def check_support_bound(system: CoveringSystem) -> tuple[bool, tuple[int, ...]]:
    """True iff max_i |supp(v_i)| <= 2k (a theorem for essential systems)."""
    sizes = tuple(len(system.row_support(i)) for i in range(system.k))
    return max(sizes) <= 2 * system.k, sizes


def verify_essential(system: CoveringSystem, params: Params = DEFAULT_PARAMS) -> EssentialReport:
    """Full (E1)-(E3) report; E1 and E3 come from a single exhaustive sweep."""
    _require_cap(system, params)
    uncovered, min_code, excl = _coverage_sweep(system, collect_exclusive=True)
    e1 = uncovered == 0
    e1_witness = None if e1 else Vertex.from_code(min_code, system.n)
    e2, unused = check_variable_usage(system)
    e3_witnesses = tuple(
        Vertex.from_code(c, system.n) if c is not None else None for c in excl
    )
    e3 = all(w is not None for w in e3_witnesses)
    support_ok, sizes = check_support_bound(system)
    return EssentialReport(
        e1=e1,
        e1_witness=e1_witness,
        e2=e2,
        unused_columns=unused,
        e3=e3,
        e3_witnesses=e3_witnesses,
        support_bound_ok=support_ok,
        support_sizes=sizes,
        is_essential=e1 and e2 and e3,
    )
