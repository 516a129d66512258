import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.stats import norm

from randpivot.acvf import bandwidth_q
from randpivot.errors import DegenerateWeights, NonpositiveStudentizer, ParameterDomainError
from randpivot.intervals import (
    FunctionalBoundRequest,
    Interval,
    Shape,
    ci_mean,
    functional_lower_bound,
    one_sided_bound,
    z_quantile,
)
from randpivot.pivots import g_n_stu
from randpivot.process import ProcessSpec, simulate
from randpivot.rng import child_stream
from randpivot.weights import draw_weights


def _data(seed, n=200, spec=ProcessSpec.ar1(0.5, mu=1.0)):
    x = simulate(spec, n, child_stream(seed, 0))
    rng = child_stream(seed, 1)
    w = draw_weights(n, rng)
    return x, w


@pytest.mark.parametrize("p,z", [(0.975, 1.959963984540054), (0.95, 1.6448536269514722), (0.5, 0.0)])
def test_z_quantile(p, z):
    assert z_quantile(p) == pytest.approx(z, abs=1e-12)


@given(st.floats(1e-10, 1 - 1e-10))
@settings(max_examples=100, deadline=None)
def test_z_quantile_inverts_cdf(p):
    assert norm.cdf(z_quantile(p)) == pytest.approx(p, rel=1e-9, abs=1e-15)


@pytest.mark.parametrize("p", [0.0, 1.0, -0.1, 2.0])
def test_z_quantile_domain(p):
    with pytest.raises(ParameterDomainError):
        z_quantile(p)


def test_ci_endpoints_invert_pivot():
    x, w = _data(1)
    q = bandwidth_q(x.size)
    iv = ci_mean(x, w, q, 0.0, 0.05)
    assert iv.method == "GStuShort" and iv.level == pytest.approx(0.95)
    assert g_n_stu(x, w, q, 0.0, iv.lower) == pytest.approx(z_quantile(0.975), rel=1e-10)
    assert g_n_stu(x, w, q, 0.0, iv.upper) == pytest.approx(-z_quantile(0.975), rel=1e-10)
    assert iv.midpoint in iv
    assert iv.halfwidth > 0


def test_ci_long_memory_label_and_nesting():
    x, w = _data(2)
    a = ci_mean(x, w, 5, 0.2, 0.10)
    b = ci_mean(x, w, 5, 0.2, 0.01)
    assert a.method == "GStuLong"
    assert b.lower < a.lower < a.upper < b.upper
    assert a.midpoint == pytest.approx(b.midpoint)


@given(st.floats(0.01, 100), st.floats(-100, 100))
@settings(max_examples=40, deadline=None)
def test_ci_affine_map(a, b):
    x, w = _data(3)
    iv = ci_mean(x, w, 6, 0.0, 0.05)
    jv = ci_mean(a * x + b, w, 6, 0.0, 0.05)
    assert jv.lower == pytest.approx(a * iv.lower + b, rel=1e-10, abs=1e-9)
    assert jv.upper == pytest.approx(a * iv.upper + b, rel=1e-10, abs=1e-9)


def test_one_sided_bounds():
    x, w = _data(4)
    lo = one_sided_bound(x, w, 6, 0.0, 0.05, "lower")
    hi = one_sided_bound(x, w, 6, 0.0, 0.05, "upper")
    iv = ci_mean(x, w, 6, 0.0, 0.10)
    assert lo == pytest.approx(iv.lower) and hi == pytest.approx(iv.upper)
    with pytest.raises(ParameterDomainError):
        one_sided_bound(x, w, 6, 0.0, 0.05, "middle")


def test_functional_bounds_follow_shape():
    x, w = _data(5)
    lo = one_sided_bound(x, w, 6, 0.0, 0.05, "lower")
    hi = one_sided_bound(x, w, 6, 0.0, 0.05, "upper")
    inc = FunctionalBoundRequest(math.exp, "increasing-convex")
    dec = FunctionalBoundRequest(lambda t: math.exp(-t), Shape.DECREASING_CONVEX)
    assert functional_lower_bound(x, w, 6, 0.0, 0.05, inc) == pytest.approx(math.exp(lo))
    assert functional_lower_bound(x, w, 6, 0.0, 0.05, dec) == pytest.approx(math.exp(-hi))


def test_functional_bound_covers_expectation():
    # G(x) = exp(x) for Gaussian AR(1): E exp(X) = exp(mu + gamma_0 / 2)
    spec = ProcessSpec.ar1(0.5, mu=1.0)
    target = math.exp(1.0 + 0.5 * 4 / 3)
    req = FunctionalBoundRequest(math.exp, Shape.INCREASING_CONVEX)
    hits = 0
    for r in range(200):
        x, w = _data(100 + r, n=300, spec=spec)
        hits += functional_lower_bound(x, w, bandwidth_q(300), 0.0, 0.05, req) <= target
    assert hits / 200 >= 0.95


def test_ci_coverage_ar1():
    spec = ProcessSpec.ar1(0.5, mu=1.0)
    n, hits, tried = 3000, 0, 0
    for r in range(300):
        x, w = _data(1000 + r, n=n, spec=spec)
        try:
            hits += 1.0 in ci_mean(x, w, bandwidth_q(n), 0.0, 0.05)
            tried += 1
        except NonpositiveStudentizer:
            pass
    assert abs(hits / tried - 0.95) < 0.04


def test_errors():
    x, _ = _data(6)
    with pytest.raises(DegenerateWeights):
        ci_mean(x, np.ones(x.size, int), 5, 0.0, 0.05)
    with pytest.raises(ParameterDomainError):
        ci_mean(x, draw_weights(x.size, np.random.default_rng(0)), 5, 0.0, 1.5)
    with pytest.raises(ValueError):
        FunctionalBoundRequest(math.exp, "concave")


def test_interval_contains():
    iv = Interval(0.0, 1.0, 0.95, "GStuShort")
    assert 0.5 in iv and 1.5 not in iv


@given(st.floats(1e-6, 0.5))
@settings(max_examples=50, deadline=None)
def test_z_quantile_symmetry(p):
    assert z_quantile(p) == pytest.approx(-z_quantile(1 - p), abs=1e-10)


def test_alpha_near_one_collapses_to_weighted_center():
    x, w = _data(7)
    a = np.abs(w - 1.0)
    iv = ci_mean(x, w, 6, 0.0, 1 - 1e-12)
    assert iv.halfwidth == pytest.approx(0.0, abs=1e-9)
    assert iv.midpoint == pytest.approx(float(a @ x) / a.sum())


def test_identity_functional_is_lower_endpoint():
    x, w = _data(8)
    req = FunctionalBoundRequest(lambda t: t, Shape.INCREASING_CONVEX)
    assert functional_lower_bound(x, w, 6, 0.0, 0.05, req) == one_sided_bound(x, w, 6, 0.0, 0.05, "lower")


def test_functional_bound_farima_exp():
    from randpivot.process import simulate_batch, theoretical_acvf

    spec = ProcessSpec.farima(0.2)
    n, reps, alpha = 300, 1000, 0.05
    target = math.exp(theoretical_acvf(spec, 0) / 2)
    X = simulate_batch(spec, n, [child_stream(77, r, 0) for r in range(reps)])
    q = bandwidth_q(n, 0.2)
    req = FunctionalBoundRequest(math.exp, Shape.INCREASING_CONVEX)
    hits = tried = 0
    for r in range(reps):
        w = draw_weights(n, child_stream(77, r, 1))
        try:
            hits += functional_lower_bound(X[r], w, q, 0.2, alpha, req) <= target
            tried += 1
        except (NonpositiveStudentizer, DegenerateWeights):
            pass
    assert hits / tried >= (1 - alpha) - 0.04
