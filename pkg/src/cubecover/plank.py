"""Sign-vector separation and the uncovered-vertex finder for small column norms.

For a symmetric matrix M with nonnegative diagonal, some sign vector eps makes
every |(M(theta*eps))_t - zeta_t| at least M_tt * theta_t.  A sign vector that
is merely single-flip optimal for the quadratic objective
<M(theta*eps), theta*eps> - 2<theta*eps, zeta> already satisfies the
inequality, so the search here is strict steepest-ascent coordinate flipping
from a seeded random start rather than exhaustive maximization.

The finder then turns the separated point into a randomized rounding
distribution over the cube; every candidate vertex is re-verified exactly
against the rational rows before being returned.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .core import Params, DEFAULT_PARAMS, UnitRow, Vertex, format_rational


class PlankPreconditionError(ValueError):
    """The small-column-norm precondition 2*alpha*beta*log(4l) <= 1 fails."""

    def __init__(self, message: str, check: "SmallNormCheck"):
        super().__init__(message)
        self.check = check


class SampleCapError(RuntimeError):
    """Rejection sampling exhausted its cap (signals a bug or tolerance issue)."""

    def __init__(self, message: str, attempts: int):
        super().__init__(message)
        self.attempts = attempts


@dataclass(frozen=True)
class SignVector:
    """eps in {-1,+1}^k with flip-ascent bookkeeping."""

    signs: tuple[int, ...]
    flips: int = 0
    objective: float = 0.0

    def __post_init__(self) -> None:
        if any(s not in (-1, 1) for s in self.signs):
            raise ValueError("sign entries must be +1 or -1")


@dataclass(frozen=True)
class SmallNormCheck:
    """alpha = max column support, beta = max column squared norm (exact),
    lhs = 2*alpha*beta*log(4*ell); ok iff lhs <= 1."""

    alpha: int
    beta: Fraction
    ell: int
    lhs: float
    ok: bool

    def to_json_dict(self) -> dict:
        return {
            "alpha": self.alpha,
            "beta": format_rational(self.beta),
            "ell": self.ell,
            "lhs": self.lhs,
            "ok": self.ok,
        }


def bang_signs(
    M: Sequence[Sequence[float]],
    zeta: Sequence[float],
    theta: Sequence[float],
    seed: int = 0,
    float_tol: float = 1e-9,
) -> SignVector:
    """Find eps with |(M(theta*eps))_t - zeta_t| >= M_tt*theta_t for all t.

    M must be symmetric within tolerance with nonnegative diagonal, theta
    nonnegative.  Strict ascent: a flip is accepted only if it strictly
    increases the objective, so the search terminates; the accepted-flip
    count is reported on the result.
    """
    k = len(M)
    if k < 1:
        raise ValueError("M must be at least 1x1")
    rows = [list(map(float, r)) for r in M]
    if any(len(r) != k for r in rows):
        raise ValueError("M must be square")
    scale = 1.0 + max(abs(c) for r in rows for c in r)
    for s in range(k):
        for t in range(s + 1, k):
            if abs(rows[s][t] - rows[t][s]) > float_tol * scale:
                raise ValueError(f"M is asymmetric at ({s},{t}) beyond tolerance")
        if rows[s][s] < -float_tol * scale:
            raise ValueError(f"negative diagonal entry M[{s}][{s}] = {rows[s][s]}")
    zeta = [float(z) for z in zeta]
    theta = [float(t) for t in theta]
    if len(zeta) != k or len(theta) != k:
        raise ValueError("zeta and theta must have length k")
    if any(t < 0 for t in theta):
        raise ValueError("theta entries must be nonnegative")

    rng = random.Random(seed)
    eps = [1 if rng.getrandbits(1) else -1 for _ in range(k)]
    u = [theta[t] * eps[t] for t in range(k)]
    Mu = [sum(rows[t][j] * u[j] for j in range(k)) for t in range(k)]
    flips = 0
    while True:
        best_t = -1
        best_gain = 0.0
        for t in range(k):
            ut = u[t]
            gain = -4.0 * ut * (Mu[t] - zeta[t]) + 4.0 * rows[t][t] * ut * ut
            if gain > best_gain:
                best_gain = gain
                best_t = t
        if best_t < 0:  # no strictly improving flip; zero-gain ties are rejected
            break
        delta = -2.0 * u[best_t]
        u[best_t] += delta
        eps[best_t] = -eps[best_t]
        for t in range(k):
            Mu[t] += rows[t][best_t] * delta
        flips += 1
    objective = sum(Mu[t] * u[t] for t in range(k)) - 2.0 * sum(
        u[t] * zeta[t] for t in range(k)
    )
    return SignVector(signs=tuple(eps), flips=flips, objective=objective)


def check_small_norm_precondition(rows: Sequence[UnitRow]) -> SmallNormCheck:
    """Compute alpha, beta, ell and the product 2*alpha*beta*log(4*ell).

    Column norms are those of the unit-normalized rows: column j contributes
    sum_i coeffs_ij^2 / q_i, exactly.
    """
    ell = len(rows)
    if ell == 0:
        return SmallNormCheck(alpha=0, beta=Fraction(0), ell=0, lhs=0.0, ok=True)
    m = len(rows[0])
    for r in rows:
        if len(r) != m:
            raise ValueError("rows have inconsistent lengths")
        if all(c == 0 for c in r.coeffs):
            raise ValueError("zero row")
    alpha = 0
    beta = Fraction(0)
    for j in range(m):
        supp = sum(1 for r in rows if r.coeffs[j] != 0)
        col_sq = sum((r.coeffs[j] ** 2 / r.norm_sq for r in rows), Fraction(0))
        alpha = max(alpha, supp)
        beta = max(beta, col_sq)
    lhs = 2.0 * alpha * float(beta) * math.log(4.0 * ell)
    return SmallNormCheck(alpha=alpha, beta=beta, ell=ell, lhs=lhs, ok=lhs <= 1.0)


def hoeffding_bound(t: float, range_widths: Sequence[float]) -> float:
    """Tail bound exp(-2 t^2 / sum_j w_j^2) for widths w_j = b_j - a_j."""
    if t <= 0:
        raise ValueError(f"t must be positive, got {t}")
    widths = [float(w) for w in range_widths]
    if any(w < 0 for w in widths):
        raise ValueError("range widths must be nonnegative")
    denom = sum(w * w for w in widths)
    if denom == 0:
        raise ValueError("all-zero range widths")
    return math.exp(-2.0 * t * t / denom)


def find_uncovered_small_norm(
    rows: Sequence[UnitRow],
    targets: Sequence[Fraction | int | float],
    params: Params = DEFAULT_PARAMS,
    seed: int | None = None,
) -> tuple[Vertex, int]:
    """Return a vertex off every hyperplane <coeffs_i, x> = targets_i, plus attempts.

    Requires the small-norm precondition.  Pipeline: theta = sqrt(2 log 4l),
    zeta = 2*mu - V*1, eps from the sign search on V V^T, y' = theta V^T eps
    (guaranteed ||y'||_inf <= 1), y = (y'+1)/2, then per-coordinate rounding
    P(w_j = 1) = y_j until all separations hold.  Rational targets are
    checked exactly; float targets with |.| > float_tol separation.
    """
    ell = len(rows)
    if ell == 0:
        raise ValueError("need at least one row")
    m = len(rows[0])
    check = check_small_norm_precondition(rows)
    if not check.ok:
        raise PlankPreconditionError(
            f"precondition 2*alpha*beta*log(4*ell) = {check.lhs:.6f} > 1", check
        )
    if len(targets) != ell:
        raise ValueError(f"expected {ell} targets, got {len(targets)}")

    vf = [
        [float(c) / math.sqrt(float(r.norm_sq)) for c in r.coeffs] for r in rows
    ]
    mu_f = [
        float(t) / math.sqrt(float(r.norm_sq)) if isinstance(t, (Fraction, int)) else float(t)
        for t, r in zip(targets, rows)
    ]
    theta = math.sqrt(2.0 * math.log(4.0 * ell))
    zeta = [2.0 * mu_f[i] - sum(vf[i]) for i in range(ell)]
    gram = [
        [sum(vf[i][j] * vf[i2][j] for j in range(m)) for i2 in range(ell)]
        for i in range(ell)
    ]
    seed = params.seed if seed is None else seed
    rng = random.Random(seed)
    sv = bang_signs(gram, zeta, [theta] * ell, seed=rng.getrandbits(63), float_tol=params.float_tol)
    y_prime = [
        theta * sum(vf[i][j] * sv.signs[i] for i in range(ell)) for j in range(m)
    ]
    overflow = max(abs(c) for c in y_prime)
    if overflow > 1.0 + params.float_tol:
        raise RuntimeError(
            f"||y'||_inf = {overflow} exceeds 1; the precondition should forbid this"
        )
    y = [min(1.0, max(0.0, (c + 1.0) / 2.0)) for c in y_prime]

    exact = [isinstance(t, (Fraction, int)) for t in targets]
    for attempt in range(1, params.sample_cap + 1):
        w = [1 if rng.random() < y_j else 0 for y_j in y]
        ok = True
        for i in range(ell):
            dot = sum((rows[i].coeffs[j] for j in range(m) if w[j]), Fraction(0))
            if exact[i]:
                if dot == Fraction(targets[i]):
                    ok = False
                    break
            else:
                approx = float(dot) / math.sqrt(float(rows[i].norm_sq))
                if abs(approx - float(targets[i])) <= params.float_tol:
                    ok = False
                    break
        if ok:
            return Vertex(tuple(w)), attempt
    raise SampleCapError(
        f"no separated vertex within {params.sample_cap} rounding samples", params.sample_cap
    )
