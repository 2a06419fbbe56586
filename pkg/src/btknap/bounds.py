"""Growth rate of C(beta*n, gamma*n) and its maximization over (beta, gamma).

The exponent is f(beta, gamma) = beta ln beta - gamma ln gamma
- (beta - gamma) ln(beta - gamma). With beta pushed to 1 - gamma the
restriction g(gamma) peaks at gamma = (5 - sqrt 5)/10, where exp(g) is the
golden ratio.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from scipy.optimize import bisect

Real = float | Fraction

GOLDEN_RATIO = (1 + math.sqrt(5)) / 2
ROOT_TOL = 1e-12


def _xlnx(x: float) -> float:
    return 0.0 if x == 0 else x * math.log(x)


def f(beta: Real, gamma: Real) -> float:
    beta, gamma = float(beta), float(gamma)
    if not beta >= gamma > 0:
        raise ValueError(f"need beta >= gamma > 0, got beta={beta}, gamma={gamma}")
    return _xlnx(beta) - _xlnx(gamma) - _xlnx(beta - gamma)


def df_dbeta(beta: Real, gamma: Real) -> float:
    beta, gamma = float(beta), float(gamma)
    if not beta > gamma > 0:
        raise ValueError(f"need beta > gamma > 0, got beta={beta}, gamma={gamma}")
    return math.log(beta) - math.log(beta - gamma)


def _check_half_open(gamma: float) -> None:
    if not 0 < gamma < 0.5:
        raise ValueError(f"need 0 < gamma < 1/2, got {gamma}")


def g(gamma: Real) -> float:
    gamma = float(gamma)
    _check_half_open(gamma)
    return _xlnx(1 - gamma) - _xlnx(gamma) - _xlnx(1 - 2 * gamma)


def g_prime(gamma: Real) -> float:
    gamma = float(gamma)
    _check_half_open(gamma)
    return 2 * math.log(1 - 2 * gamma) - math.log(gamma) - math.log(1 - gamma)


@dataclass(frozen=True)
class OptimalGamma:
    closed_form: float
    numeric: float


def optimal_gamma() -> OptimalGamma:
    # g'(gamma) = 0  <=>  (1 - 2 gamma)^2 = gamma (1 - gamma)  <=>  5 gamma^2 - 5 gamma + 1 = 0
    disc = math.sqrt(25 - 20)
    roots = [(5 - disc) / 10, (5 + disc) / 10]
    inside = [r for r in roots if 0 < r < 0.5]
    assert len(inside) == 1
    # g' decreases from +inf to -inf on (0, 1/2)
    numeric = bisect(g_prime, 1e-9, 0.5 - 1e-9, xtol=ROOT_TOL, maxiter=200)
    return OptimalGamma(inside[0], float(numeric))


def optimal_base() -> float:
    return math.exp(g(optimal_gamma().numeric))


def base(beta: Real, gamma: Real) -> float:
    return math.exp(f(beta, gamma))


def monotonicity_check(gamma: Real, beta_grid: Sequence[Real]) -> bool:
    gamma = float(gamma)
    grid = [float(b) for b in beta_grid]
    for b in grid:
        if not gamma < b <= 1 - gamma:
            raise ValueError(f"grid point {b} outside (gamma, 1 - gamma]")
    values = [f(b, gamma) for b in grid]
    return all(x < y for x, y in zip(values, values[1:]))


def binomial_exact(a: int, b: int) -> int:
    if a < 0 or b < 0 or b > a:
        raise ValueError(f"need 0 <= b <= a, got a={a}, b={b}")
    return math.comb(a, b)


def _log_stirling_factorial(m: float) -> float:
    return 0.5 * math.log(2 * math.pi * m) + m * (math.log(m) - 1)


def stirling_binomial(beta: Real, gamma: Real, n: int) -> float:
    """Stirling estimate of C(beta n, gamma n), each factorial replaced by sqrt(2 pi m)(m/e)^m."""
    big, small = float(beta) * n, float(gamma) * n
    rest = big - small
    if small < 1 or rest < 1:
        raise ValueError(f"need gamma*n >= 1 and (beta-gamma)*n >= 1, got {small}, {rest}")
    return math.exp(
        _log_stirling_factorial(big)
        - _log_stirling_factorial(small)
        - _log_stirling_factorial(rest)
    )


def stirling_constant(beta: Real, gamma: Real) -> float:
    """The c in C(beta n, gamma n) ~ c * base^n / sqrt(n)."""
    beta, gamma = float(beta), float(gamma)
    return math.sqrt(beta / (2 * math.pi * gamma * (beta - gamma)))


def stirling_simplified(beta: Real, gamma: Real, n: int) -> float:
    return stirling_constant(beta, gamma) * math.exp(n * f(beta, gamma)) / math.sqrt(n)


def normalized_binomial(beta: Real, gamma: Real, n: int) -> float:
    """C(beta n, gamma n) * sqrt(n) / base^n, which tends to stirling_constant."""
    a, b = Fraction(beta) * n, Fraction(gamma) * n
    if a.denominator != 1 or b.denominator != 1:
        raise ValueError(f"beta*n and gamma*n must be integers, got {a}, {b}")
    log_c = math.log(binomial_exact(int(a), int(b)))
    return math.exp(log_c + 0.5 * math.log(n) - n * f(beta, gamma))


@dataclass(frozen=True)
class AlphaInterval:
    low: Fraction | float
    high: Fraction | float

    @property
    def midpoint(self):
        return (self.low + self.high) / 2

    def __contains__(self, alpha) -> bool:
        return self.low < alpha < self.high


def alpha_interval(beta: Real, gamma: Real) -> AlphaInterval:
    """Open interval of alpha with alpha(1 - beta) > 1 and alpha*gamma < 1."""
    if beta + gamma >= 1:
        raise ValueError(f"beta + gamma = {beta + gamma} >= 1 leaves no valid alpha")
    if not 0 < gamma < beta < 1:
        raise ValueError(f"need 0 < gamma < beta < 1, got beta={beta}, gamma={gamma}")
    one = Fraction(1) if isinstance(beta, (int, Fraction)) and isinstance(gamma, (int, Fraction)) else 1.0
    return AlphaInterval(one / (1 - beta), one / gamma)


@dataclass(frozen=True)
class BoundReport:
    beta: Real
    gamma: Real
    n: int | None
    f_value: float | None = None
    base: float | None = None
    exponent_log2: float | None = None
    binomial_exact: int | None = None
    stirling_approx: float | None = None
    ratio: float | None = None
    error: str | None = None


def bound_report(beta: Real, gamma: Real, n: int | None = None) -> BoundReport:
    if not (beta > gamma > 0 and beta + gamma <= 1):
        raise ValueError(f"need beta > gamma > 0 and beta + gamma <= 1, got ({beta}, {gamma})")
    fv = f(beta, gamma)
    fields = dict(f_value=fv, base=math.exp(fv), exponent_log2=fv / math.log(2))
    if n is not None:
        a, b = Fraction(beta) * n, Fraction(gamma) * n
        if a.denominator != 1 or b.denominator != 1:
            raise ValueError(f"beta*n = {a} and gamma*n = {b} must be integers")
        exact = binomial_exact(int(a), int(b))
        approx = stirling_binomial(beta, gamma, n)
        fields.update(binomial_exact=exact, stirling_approx=approx, ratio=exact / approx)
    return BoundReport(beta, gamma, n, **fields)


def optimal_point() -> tuple[float, float]:
    gamma = optimal_gamma().numeric
    return 1 - gamma, gamma


def bound_table(configs: Iterable[tuple[Real, Real, int | None]]) -> list[BoundReport]:
    rows = []
    for beta, gamma, n in configs:
        try:
            rows.append(bound_report(beta, gamma, n))
        except (ValueError, OverflowError) as exc:
            rows.append(BoundReport(beta, gamma, n, error=str(exc)))
    return rows


CSV_HEADER = [
    "beta", "gamma", "n", "f", "base", "exponent_log2",
    "binomial_exact", "stirling_approx", "ratio", "error",
]


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, Fraction):
        return str(x) if x.denominator != 1 else str(x.numerator)
    if isinstance(x, float):
        return f"{x:.12g}"
    return str(x)


def table_csv(rows: Iterable[BoundReport]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for r in rows:
        w.writerow([
            _fmt(r.beta), _fmt(r.gamma), _fmt(r.n), _fmt(r.f_value), _fmt(r.base),
            _fmt(r.exponent_log2), _fmt(r.binomial_exact), _fmt(r.stirling_approx),
            _fmt(r.ratio), r.error or "",
        ])
    return buf.getvalue()
