"""Reference essential covers."""

from __future__ import annotations

from fractions import Fraction

from .core import CoveringSystem


def lr_cover(n: int) -> CoveringSystem:
    """The n/2 + 1 hyperplane cover of {0,1}^n for even n.

    Row 0 is x_1 + ... + x_n = n/2; row i (1 <= i <= n/2) is
    x_{2i-1} - x_{2i} = 0.  Odd n is rejected: the even construction does not
    carry over verbatim and no guessed variant is shipped.
    """
    if n < 2 or n % 2 != 0:
        raise ValueError(f"n must be an even integer >= 2, got {n}")
    rows = [tuple(Fraction(1) for _ in range(n))]
    mu = [Fraction(n, 2)]
    for i in range(n // 2):
        row = [Fraction(0)] * n
        row[2 * i] = Fraction(1)
        row[2 * i + 1] = Fraction(-1)
        rows.append(tuple(row))
        mu.append(Fraction(0))
    return CoveringSystem(n=n, k=n // 2 + 1, rows=tuple(rows), mu=tuple(mu))
