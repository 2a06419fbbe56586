import math
import random
from fractions import Fraction

import pytest

from btknap import bounds

GAMMA_STAR = (5 - math.sqrt(5)) / 10


def power_form(beta, gamma):
    return beta**beta / (gamma**gamma * (beta - gamma) ** (beta - gamma))


def test_f_half_quarter_point():
    assert bounds.f(0.5, 0.25) == pytest.approx(math.log(2) / 2, abs=1e-12)
    assert bounds.base(Fraction(1, 2), Fraction(1, 4)) == pytest.approx(math.sqrt(2), abs=1e-12)


def test_f_three_quarter_point():
    # three terms by hand: 0.75 ln 0.75 - 0.25 ln 0.25 - 0.5 ln 0.5
    by_hand = 0.75 * math.log(0.75) - 0.25 * math.log(0.25) - 0.5 * math.log(0.5)
    assert by_hand == pytest.approx(0.4773856, abs=1e-7)
    assert bounds.f(0.75, 0.25) == pytest.approx(by_hand, abs=1e-15)


def test_f_limit_gamma_equals_beta():
    assert bounds.f(0.4, 0.4) == pytest.approx(0.0, abs=1e-15)


@pytest.mark.parametrize("beta, gamma", [(0.3, 0.4), (0.5, 0.0), (0.5, -0.1)])
def test_f_domain(beta, gamma):
    with pytest.raises(ValueError):
        bounds.f(beta, gamma)


def test_log_transform_is_faithful():
    rng = random.Random(0)
    for _ in range(500):
        gamma = rng.uniform(0.01, 0.49)
        beta = rng.uniform(gamma + 1e-3, 1 - gamma)
        assert math.exp(bounds.f(beta, gamma)) == pytest.approx(power_form(beta, gamma), abs=1e-12)


def test_g_is_restriction_of_f():
    for k in range(1, 50):
        gamma = k / 100
        assert bounds.g(gamma) == pytest.approx(bounds.f(1 - gamma, gamma), abs=1e-15)
    assert bounds.g(0.25) == pytest.approx(0.4773856, abs=1e-7)


def test_g_prime_examples():
    # (1 - 2 gamma)^2 / (gamma (1 - gamma)) = 0.25 / 0.1875 at gamma = 1/4
    assert bounds.g_prime(0.25) == pytest.approx(math.log(4 / 3), abs=1e-15)
    assert abs(bounds.g_prime(GAMMA_STAR)) < 1e-12


@pytest.mark.parametrize("gamma", [0.0, 0.5, 0.7, -0.1])
def test_g_domain(gamma):
    with pytest.raises(ValueError):
        bounds.g(gamma)
    with pytest.raises(ValueError):
        bounds.g_prime(gamma)


def test_g_prime_matches_central_difference():
    h = 1e-6
    for k in range(41):
        gamma = 0.05 + 0.4 * k / 40
        fd = (bounds.g(gamma + h) - bounds.g(gamma - h)) / (2 * h)
        assert bounds.g_prime(gamma) == pytest.approx(fd, abs=1e-6)


def test_optimal_gamma():
    opt = bounds.optimal_gamma()
    assert opt.closed_form == pytest.approx(0.276393202250, abs=1e-12)
    assert abs(opt.numeric - opt.closed_form) < 1e-10
    assert 5 * opt.numeric**2 - 5 * opt.numeric + 1 == pytest.approx(0, abs=1e-11)


def test_other_quadratic_root_is_outside_domain():
    other = (5 + math.sqrt(5)) / 10
    assert other == pytest.approx(0.7236, abs=1e-4)
    with pytest.raises(ValueError):
        bounds.g_prime(other)


def test_optimal_base_is_golden_ratio():
    b = bounds.optimal_base()
    assert abs(b - 1.6180339887) < 1e-9
    assert abs(b - (1 + math.sqrt(5)) / 2) < 1e-9
    assert abs(math.log2(b) - 0.6942419) < 1e-6
    assert math.exp(bounds.g(0.25)) == pytest.approx(1.6117, abs=1e-3)
    assert math.exp(bounds.g(0.25)) < b


def test_g_peaks_at_optimal_gamma():
    best = bounds.g(GAMMA_STAR)
    for k in range(1, 100):
        gamma = k / 200
        assert bounds.g(gamma) <= best + 1e-15


def test_monotonicity():
    assert bounds.monotonicity_check(0.25, [0.3, 0.5, 0.7, 0.75])
    assert all(bounds.df_dbeta(b, 0.25) > 0 for b in [0.3, 0.5, 0.7, 0.75])
    assert bounds.monotonicity_check(0.25, [0.5])
    assert not bounds.monotonicity_check(0.25, [0.7, 0.5])
    with pytest.raises(ValueError):
        bounds.monotonicity_check(0.25, [0.8])


def test_argmax_over_beta_is_the_boundary():
    for gamma in (0.1, 0.2, GAMMA_STAR, 0.4):
        grid = [gamma + (1 - 2 * gamma) * k / 200 for k in range(1, 201)]
        assert bounds.monotonicity_check(gamma, grid)
        assert max(grid, key=lambda b: bounds.f(b, gamma)) == grid[-1]


def test_binomials():
    assert bounds.binomial_exact(4, 2) == 6
    assert bounds.binomial_exact(8, 4) == 70
    with pytest.raises(ValueError):
        bounds.binomial_exact(2, 3)


def test_stirling_small_case():
    # sqrt(2 pi 4)(4/e)^4 / (sqrt(2 pi 2)(2/e)^2)^2 evaluated directly
    e = math.e
    by_hand = math.sqrt(8 * math.pi) * (4 / e) ** 4 / (math.sqrt(4 * math.pi) * (2 / e) ** 2) ** 2
    est = bounds.stirling_binomial(0.5, 0.25, 8)
    assert est == pytest.approx(by_hand, rel=1e-12)
    assert est == pytest.approx(6.38, abs=0.01)
    assert 6 / est == pytest.approx(0.94, abs=0.005)


def test_stirling_forms_agree():
    # the full and simplified forms are algebraically identical
    for n in (8, 40, 200):
        assert bounds.stirling_binomial(0.5, 0.25, n) == pytest.approx(
            bounds.stirling_simplified(0.5, 0.25, n), rel=1e-10
        )


def test_stirling_domain():
    with pytest.raises(ValueError):
        bounds.stirling_binomial(0.5, 0.25, 2)


def test_alpha_interval():
    iv = bounds.alpha_interval(Fraction(1, 2), Fraction(1, 4))
    assert (iv.low, iv.high, iv.midpoint) == (2, 4, 3)
    assert 3 in iv and 4 not in iv
    beta = 1 - GAMMA_STAR - 0.01
    iv = bounds.alpha_interval(beta, GAMMA_STAR)
    assert iv.low == pytest.approx(3.4917, abs=1e-4)
    assert iv.high == pytest.approx(3.6180, abs=1e-4)
    with pytest.raises(ValueError):
        bounds.alpha_interval(Fraction(3, 4), Fraction(1, 4))


def test_bound_table_rows():
    rows = bounds.bound_table([(Fraction(1, 2), Fraction(1, 4), 8), (*bounds.optimal_point(), None)])
    assert rows[0].binomial_exact == 6 and rows[0].error is None
    assert rows[1].base == pytest.approx(1.618, abs=1e-3)
    assert rows[1].exponent_log2 == pytest.approx(0.694, abs=1e-3)
    assert bounds.bound_table([]) == []


def test_bound_table_errors_stay_in_row():
    rows = bounds.bound_table([(Fraction(2, 3), Fraction(1, 2), 6), (Fraction(1, 2), Fraction(1, 4), 12)])
    assert rows[0].error and rows[0].f_value is None
    assert rows[1].binomial_exact == 20


def test_table_csv_format():
    text = bounds.table_csv(bounds.bound_table([(Fraction(1, 2), Fraction(1, 4), 16)]))
    header, row = text.strip().split("\n")
    assert header.split(",")[:9] == [
        "beta", "gamma", "n", "f", "base", "exponent_log2", "binomial_exact", "stirling_approx", "ratio",
    ]
    fields = row.split(",")
    assert fields[:3] == ["1/2", "1/4", "16"]
    assert fields[6] == "70"
    assert fields[4] == "1.41421356237"
    assert bounds.table_csv([]) == ",".join(bounds.CSV_HEADER) + "\n"


def test_normalized_binomial_tends_to_constant():
    c = bounds.stirling_constant(0.5, 0.25)
    assert c == pytest.approx(math.sqrt(0.5 / (2 * math.pi * 0.25 * 0.25)), rel=1e-15)
    gaps = [abs(bounds.normalized_binomial(Fraction(1, 2), Fraction(1, 4), n) - c) for n in (40, 80, 160, 320)]
    assert all(a > b for a, b in zip(gaps, gaps[1:]))
