import math

import numpy as np
import pytest

from deltanls import algebra
from deltanls.params import Params

P425 = Params(4.0, 2.5)
P43 = Params(4.0, 3.0)
P435 = Params(4.0, 3.5)
P83 = Params(8.0, 3.0)


def graded_midpoint_integral(p, t, panels=10 ** 6):
    """Independent oracle for I(t): midpoint rule after s = cosh(theta) and
    the power substitution that flattens the endpoint, on `panels` panels."""
    m = (6.0 - p) / (p - 2.0)
    theta = np.arccosh(t)
    v_hi = theta ** (m + 1.0) / (m + 1.0)
    v = (np.arange(panels) + 0.5) * (v_hi / panels)
    th = ((m + 1.0) * v) ** (1.0 / (m + 1.0))
    return float(np.sum((np.sinh(th) / th) ** m) * v_hi / panels)


def test_f_examples_exact():
    assert algebra.f_of_t(P425, math.sqrt(2.0)) == pytest.approx(math.sqrt(2.0), abs=1e-15)
    assert algebra.f_of_t(P43, 2.0) == pytest.approx(2.0 / math.sqrt(3.0), abs=1e-15)


def test_f_divergence_rate_near_one():
    # f(t) * (t-1)^((q-2)/(p-2)) -> 2^(-(q-2)/(p-2)) as t -> 1+
    for params in (P425, P83):
        expo = (params.q - 2.0) / (params.p - 2.0)
        for d in (1e-6, 1e-8, 1e-10):
            ratio = algebra.f_of_t(params, 1.0 + d, d) * d ** expo
            assert ratio == pytest.approx(2.0 ** (-expo), rel=1e-5)


def test_g_examples():
    assert algebra.g_of_lambda(P425, 1.0 / 32.0) == pytest.approx(math.sqrt(2.0), abs=1e-14)
    for lam in (0.3, 1.0, 7.0):
        assert algebra.g_of_lambda(Params(16.0, 9.0), lam) == pytest.approx(
            math.sqrt(2.0), abs=1e-15)
    assert algebra.g_of_lambda(P435, 1.0) == pytest.approx(0.5 * 2.0 ** 0.75, abs=1e-15)


def test_g_inverse_round_trip():
    for params in (P425, P435, P83):
        for lam in (1e-3, 0.7, 42.0):
            y = algebra.g_of_lambda(params, lam)
            assert algebra.g_inverse(params, y) == pytest.approx(lam, rel=1e-13)


def test_g_rejects_bad_inputs():
    with pytest.raises(ValueError):
        algebra.g_of_lambda(P425, 0.0)
    with pytest.raises(ValueError):
        algebra.g_inverse(Params(16.0, 9.0), 2.0)


def test_f_prime_critical_point_and_signs():
    assert algebra.f_prime(P425, math.sqrt(2.0)) == pytest.approx(0.0, abs=1e-14)
    assert algebra.f_prime(P425, 1.1) < 0.0
    assert algebra.f_prime(P425, 3.0) > 0.0
    # q > p/2 + 1: f is strictly decreasing
    for t in (1.01, 1.5, 4.0, 50.0):
        assert algebra.f_prime(P435, t) < 0.0


@pytest.mark.parametrize("params,t", [
    (P425, 1.3), (P425, 2.7), (P435, 1.8), (P83, 1.2), (P83, 5.0),
])
def test_f_prime_matches_finite_differences(params, t):
    step = 1e-5
    fd = (algebra.f_of_t(params, t + step) - algebra.f_of_t(params, t - step)) / (2 * step)
    assert algebra.f_prime(params, t) == pytest.approx(fd, rel=1e-6)


def test_I_p4_is_exact():
    ev = algebra.I_of_t(P425, 3.0)
    assert ev.value == 2.0
    assert ev.abs_error_estimate == 0.0


def test_I_p6_grows_like_log():
    # I(t) = arccosh(t) = log(2t) + O(1/t^2), so I/log(t) -> 1 from above
    P6 = Params(6.0, 3.0)
    ratios = [algebra.I_of_t(P6, t).value / math.log(t) for t in (1e3, 1e6, 1e9)]
    assert ratios[0] > ratios[1] > ratios[2] > 1.0
    assert ratios[2] == pytest.approx(1.0, abs=0.04)
    assert algebra.I_of_t(P6, 1e9).value - math.log(2e9) == pytest.approx(0.0, abs=1e-12)


def test_I_p8_against_graded_midpoint_oracle():
    got = algebra.I_of_t(P83, 2.0)
    want = graded_midpoint_integral(8.0, 2.0)
    assert abs(got.value - want) < 1e-10
    assert got.abs_error_estimate < 1e-9


def test_I_additivity_on_random_splits():
    rng = np.random.default_rng(42)
    from scipy.integrate import quad
    for params in (Params(3.0, 4.0), Params(5.0, 3.0), Params(9.0, 4.0)):
        e = (4.0 - params.p) / (params.p - 2.0)
        for _ in range(4):
            t1 = 1.0 + rng.random() * 2.0
            t2 = t1 + rng.random() * 5.0
            middle, _ = quad(lambda s: (s * s - 1.0) ** e, t1, t2,
                             epsabs=1e-13, epsrel=1e-12)
            lhs = algebra.I_of_t(params, t2).value
            rhs = algebra.I_of_t(params, t1).value + middle
            assert abs(lhs - rhs) < 1e-9


def test_I_infinite_endpoint():
    with pytest.raises(ValueError):
        algebra.I_of_t(Params(5.0, 3.0), math.inf)
    with pytest.raises(ValueError):
        algebra.I_of_t(Params(6.0, 3.0), math.inf)
    tail = algebra.I_of_t(P83, math.inf)
    assert tail.value > algebra.I_of_t(P83, 100.0).value
    assert math.isfinite(tail.value)


@pytest.mark.parametrize("p,t", [(3.0, 1.7), (4.5, 2.2), (8.0, 1.4), (11.0, 3.0)])
def test_integration_by_parts_identity(p, t):
    # integral_1^t s^2 (s^2-1)^((4-p)/(p-2)) ds
    #   = (p-2)/(p+2) [ t (t^2-1)^(2/(p-2)) + I(t) ]
    params = Params(p, 3.0)
    m = (6.0 - p) / (p - 2.0)
    theta = math.acosh(t)
    v_hi = theta ** (m + 1.0) / (m + 1.0)
    k = 400000
    v = (np.arange(k) + 0.5) * (v_hi / k)
    th = ((m + 1.0) * v) ** (1.0 / (m + 1.0))
    lhs = float(np.sum(np.cosh(th) ** 2 * (np.sinh(th) / th) ** m) * v_hi / k)
    rhs = (p - 2.0) / (p + 2.0) * (
        t * (t * t - 1.0) ** (2.0 / (p - 2.0)) + algebra.I_of_t(params, t).value)
    assert abs(lhs - rhs) < 1e-8


def test_h_closed_form_for_p4():
    # for p = 4 the sign factor reduces to ((q-3) t - 1) / ((q-3)(t+1))
    q = 3.5
    for t in (1.2, 1.5, 2.0, 3.0, 10.0):
        want = ((q - 3.0) * t - 1.0) / ((q - 3.0) * (t + 1.0))
        assert algebra.h_of_t(P435, t).value == pytest.approx(want, abs=1e-12)
    assert algebra.h_of_t(P435, 2.0).value == pytest.approx(0.0, abs=1e-12)
    assert algebra.h_of_t(P435, 1.5).value < 0.0
    assert algebra.h_of_t(P83, 2.0).value > 0.0


def test_h_sign_change_counts():
    ys = np.linspace(-10.0, math.log(99.0), 400)
    for q in (3.2, 3.5, 3.8):
        hs = [algebra.h_of_t(Params(4.0, q), 1.0 + math.exp(y), math.exp(y)).value
              for y in ys]
        assert int(np.sum(np.abs(np.diff(np.sign(hs))) > 0)) == 1
    for p, q in ((4.0, 2.5), (8.0, 3.0), (8.0, 4.0), (3.0, 4.5)):
        hs = [algebra.h_of_t(Params(p, q), 1.0 + math.exp(y), math.exp(y)).value
              for y in ys]
        assert min(hs) > 0.0


def test_h_p6_is_identity():
    ev = algebra.h_of_t(Params(6.0, 3.0), 2.5)
    assert ev.value == 2.5 and ev.abs_error_estimate == 0.0


def test_constants_exact_values():
    c = algebra.constants(P425)
    assert c.c_pq == pytest.approx(math.sqrt(2.0), abs=1e-15)
    assert c.c_p == pytest.approx(math.sqrt(2.0), abs=1e-15)
    assert c.mu0 == pytest.approx(math.sqrt(2.0), abs=1e-15)
    c2 = algebra.constants(P435)
    assert c2.c_pq == pytest.approx(2.0 ** 2.5, abs=1e-14)
    assert c2.mu0 == pytest.approx(2.0 ** 2.5, abs=1e-14)
    assert algebra.constants(P83).mu0 is None


def test_constants_mu0_identity():
    rng = np.random.default_rng(3)
    for _ in range(20):
        p = 2.1 + rng.random() * 3.8
        q = 2.1 + rng.random() * 9.0
        if q == p / 2.0 + 1.0:
            continue
        c = algebra.constants(Params(p, q))
        assert c.mu0 == pytest.approx(c.c_pq * (p - 2.0) / (6.0 - p), rel=1e-13)


def test_constants_reject_diagonal():
    with pytest.raises(ValueError):
        algebra.constants(Params(16.0, 9.0))
    # c_p alone is fine on the diagonal
    assert algebra.c_p(Params(16.0, 9.0)) > 0.0


def test_scalar_eval_error_bounds():
    assert algebra.I_of_t(P425, 7.0).abs_error_estimate == 0.0
    ev = algebra.I_of_t(P83, 3.0)
    assert ev.abs_error_estimate >= 0.0
