"""Exact-rational data model for hyperplane covering systems on the binary cube.

A covering system is a k x n rational matrix V together with a right-hand side
mu; row i defines the hyperplane <v_i, x> = mu_i over vertices x in {0,1}^n.
Membership is an exact predicate, so every scalar is an arbitrary-precision
rational.  Quantities that would be irrational (the 1/sqrt(q) factor of a
unit-normalized row) are never materialized; they are carried as a rational
row together with its rational squared norm, and all comparisons involving
them are performed on squares.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, Sequence

Scalar = Fraction

_RATIONAL_RE = re.compile(r"^[+-]?\d+(?:/\d+)?$")


class SystemFormatError(ValueError):
    """Malformed covering-system input (bad rational, zero row, shape mismatch)."""


class CapExceededError(ValueError):
    """An exhaustive operation was requested above the enumeration cap."""


def parse_rational(text: str, where: str = "") -> Fraction:
    """Parse "p" or "p/q" (optional sign) into a reduced Fraction.

    Rejects anything else, including float syntax; ``where`` is prepended to
    error messages for row/column attribution.
    """
    prefix = f"{where}: " if where else ""
    if not isinstance(text, str) or not _RATIONAL_RE.match(text.strip()):
        raise SystemFormatError(f"{prefix}bad rational {text!r} (expected 'p' or 'p/q')")
    body = text.strip()
    if "/" in body:
        num, den = body.split("/")
        if int(den) == 0:
            raise SystemFormatError(f"{prefix}zero denominator in {text!r}")
        return Fraction(int(num), int(den))
    return Fraction(int(body))


def format_rational(x: Fraction) -> str:
    """Canonical reduced string form, "p" or "p/q"."""
    x = Fraction(x)
    if x.denominator == 1:
        return str(x.numerator)
    return f"{x.numerator}/{x.denominator}"


@dataclass(frozen=True, order=True)
class Vertex:
    """A point of {0,1}^n stored as a bit tuple; ordering is lexicographic."""

    bits: tuple[int, ...]

    def __post_init__(self) -> None:
        if any(b not in (0, 1) for b in self.bits):
            raise ValueError(f"vertex bits must be 0/1, got {self.bits}")

    def __len__(self) -> int:
        return len(self.bits)

    def __iter__(self) -> Iterator[int]:
        return iter(self.bits)

    def __getitem__(self, j: int) -> int:
        return self.bits[j]

    @property
    def code(self) -> int:
        """Integer whose binary digits (MSB = coordinate 0) are the bits.

        Numeric order on codes equals lexicographic order on bit tuples.
        """
        c = 0
        for b in self.bits:
            c = (c << 1) | b
        return c

    @classmethod
    def from_code(cls, code: int, n: int) -> "Vertex":
        return cls(tuple((code >> (n - 1 - j)) & 1 for j in range(n)))

    def to_json(self) -> list[int]:
        return list(self.bits)


@dataclass(frozen=True)
class CoveringSystem:
    """k rational hyperplanes <v_i, x> = mu_i over {0,1}^n.

    Invariants enforced at construction: every row is nonzero (a zero row
    with mu = 0 would cover everything and void minimality), all rows have
    length n, and len(mu) = k.
    """

    n: int
    k: int
    rows: tuple[tuple[Fraction, ...], ...]
    mu: tuple[Fraction, ...]

    def __post_init__(self) -> None:
        if self.n < 1:
            raise SystemFormatError(f"dimension must be positive, got {self.n}")
        if self.k < 1 or len(self.rows) != self.k:
            raise SystemFormatError(f"expected {self.k} rows, got {len(self.rows)}")
        if len(self.mu) != self.k:
            raise SystemFormatError(f"expected {self.k} mu entries, got {len(self.mu)}")
        for i, row in enumerate(self.rows):
            if len(row) != self.n:
                raise SystemFormatError(f"row {i} has {len(row)} entries, expected {self.n}")
            if all(c == 0 for c in row):
                raise SystemFormatError(f"zero row at index {i}")

    @classmethod
    def from_rows(
        cls,
        rows: Sequence[Sequence[Fraction | int | str]],
        mu: Sequence[Fraction | int | str],
    ) -> "CoveringSystem":
        def coerce(x: Fraction | int | str) -> Fraction:
            return parse_rational(x) if isinstance(x, str) else Fraction(x)

        tup_rows = tuple(tuple(coerce(c) for c in row) for row in rows)
        tup_mu = tuple(coerce(m) for m in mu)
        n = len(tup_rows[0]) if tup_rows else 0
        return cls(n=n, k=len(tup_rows), rows=tup_rows, mu=tup_mu)

    def row_support(self, i: int) -> tuple[int, ...]:
        return tuple(j for j, c in enumerate(self.rows[i]) if c != 0)

    def column_support_size(self, j: int) -> int:
        return sum(1 for i in range(self.k) if self.rows[i][j] != 0)

    def to_json_dict(self) -> dict:
        return {
            "n": self.n,
            "rows": [[format_rational(c) for c in row] for row in self.rows],
            "mu": [format_rational(m) for m in self.mu],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict())


def parse_system(text: str) -> CoveringSystem:
    """Parse the JSON wire format {"n": int, "rows": [[ratstr]], "mu": [ratstr]}.

    Every malformation is reported with its row/column location.
    """
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SystemFormatError(f"malformed JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise SystemFormatError("top-level JSON value must be an object")
    for key in ("n", "rows", "mu"):
        if key not in doc:
            raise SystemFormatError(f"missing key {key!r}")
    n = doc["n"]
    if not isinstance(n, int) or n < 1:
        raise SystemFormatError(f"n must be a positive integer, got {n!r}")
    raw_rows, raw_mu = doc["rows"], doc["mu"]
    if not isinstance(raw_rows, list) or not raw_rows:
        raise SystemFormatError("rows must be a non-empty list")
    if not isinstance(raw_mu, list) or len(raw_mu) != len(raw_rows):
        raise SystemFormatError(
            f"mu has {len(raw_mu) if isinstance(raw_mu, list) else '??'} entries, "
            f"expected {len(raw_rows)}"
        )
    rows = []
    for i, raw in enumerate(raw_rows):
        if not isinstance(raw, list) or len(raw) != n:
            raise SystemFormatError(f"row {i} has {len(raw) if isinstance(raw, list) else '??'} entries, expected {n}")
        rows.append(tuple(parse_rational(c, where=f"row {i}, column {j}") for j, c in enumerate(raw)))
    mu = tuple(parse_rational(m, where=f"mu[{i}]") for i, m in enumerate(raw_mu))
    return CoveringSystem(n=n, k=len(rows), rows=tuple(rows), mu=mu)


@dataclass(frozen=True)
class RowScaling:
    """Positive per-row factors phi_i; hyperplane solution sets are invariant.

    When ``unit_normalized`` is set, the effective row i is
    (phi_i * v_i) / sqrt(norm_sq[i]) with norm_sq[i] the rational squared norm
    of the scaled row on its reference column set.  The square roots are never
    materialized; consumers compare squares.
    """

    factors: tuple[Fraction, ...]
    unit_normalized: bool = False
    norm_sq: tuple[Fraction, ...] | None = None

    def __post_init__(self) -> None:
        if any(f <= 0 for f in self.factors):
            raise ValueError("rescaling factors must be positive")
        if self.unit_normalized:
            if self.norm_sq is None or len(self.norm_sq) != len(self.factors):
                raise ValueError("unit_normalized scaling needs one norm_sq per row")
            if any(q <= 0 for q in self.norm_sq):
                raise ValueError("norm_sq entries must be positive")

    @classmethod
    def identity(cls, k: int) -> "RowScaling":
        return cls(factors=(Fraction(1),) * k)


def apply_rescaling(system: CoveringSystem, scaling: RowScaling | Sequence[Fraction | int]) -> CoveringSystem:
    """Return the system with row i replaced by phi_i * v_i and mu_i by phi_i * mu_i."""
    if not isinstance(scaling, RowScaling):
        scaling = RowScaling(factors=tuple(Fraction(f) for f in scaling))
    if scaling.unit_normalized:
        raise ValueError("unit-normalized factors are square-tracked metadata and cannot be materialized")
    if len(scaling.factors) != system.k:
        raise ValueError(f"expected {system.k} factors, got {len(scaling.factors)}")
    rows = tuple(
        tuple(f * c for c in row) for f, row in zip(scaling.factors, system.rows)
    )
    mu = tuple(f * m for f, m in zip(scaling.factors, system.mu))
    return CoveringSystem(n=system.n, k=system.k, rows=rows, mu=mu)


def row_squared_norms(system: CoveringSystem) -> tuple[Fraction, ...]:
    """Exact q_i = sum_j v_ij^2 per row."""
    return tuple(sum((c * c for c in row), Fraction(0)) for row in system.rows)


@dataclass(frozen=True)
class UnitRow:
    """A unit-normalized row stored exactly: the vector is coeffs / sqrt(norm_sq)."""

    coeffs: tuple[Fraction, ...]
    norm_sq: Fraction

    def __post_init__(self) -> None:
        if self.norm_sq <= 0:
            raise ValueError("norm_sq must be positive")

    def __len__(self) -> int:
        return len(self.coeffs)

    def squared_norm_on(self, cols: Sequence[int]) -> Fraction:
        """Squared norm of the effective (normalized) row restricted to cols."""
        return sum((self.coeffs[j] ** 2 for j in cols), Fraction(0)) / self.norm_sq


def unit_row(coeffs: Sequence[Fraction | int | str]) -> UnitRow:
    """Wrap a rational vector as a unit row with q = its full squared norm."""
    vec = tuple(parse_rational(c) if isinstance(c, str) else Fraction(c) for c in coeffs)
    q = sum((c * c for c in vec), Fraction(0))
    if q == 0:
        raise ValueError("cannot unit-normalize a zero row")
    return UnitRow(coeffs=vec, norm_sq=q)


@dataclass(frozen=True)
class Params:
    """Global tunables; the derived constants C1, tau, C3 follow from C0.

    S and W default to None, meaning "derive from the instance" (the
    refutation pipeline uses S = floor(C5 * ln n) and
    W = w_multiplier * ln(n) * k^2 / n).  C4 scales the row-count hypothesis
    of the second decomposition; its value is a free knob, not a claim.
    """

    C0: Fraction = Fraction(4706, 1000)
    gamma: Fraction = Fraction(1, 3)
    S: int | None = None
    W: Fraction | None = None
    C4: Fraction = Fraction(1)
    C5: Fraction = Fraction(32)
    w_multiplier: Fraction = Fraction(1)
    enumeration_cap: int = 24
    sample_cap: int = 1000
    seed: int = 0
    float_tol: float = 1e-9
    require_hypotheses: bool = False

    @property
    def C1(self) -> Fraction:
        return 4 * self.C0 * self.C0

    @property
    def tau(self) -> Fraction:
        # (1 - tau) / tau = C1^2
        return 1 / (1 + self.C1 * self.C1)

    @property
    def C3(self) -> Fraction:
        return 1 + self.C1 * self.C1


DEFAULT_PARAMS = Params()
