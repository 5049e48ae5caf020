import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from torusct import FreqBox, Spectrum, covering_directions, forward, hs_norm, stability_report
from torusct.errors import NumericError, WeightError
from torusct.radon import Sinogram, adjoint
from torusct.regular import (
    TikhonovConfig,
    bias_multiplier,
    brute_force_minimize,
    c_factor,
    draw_noise,
    rate_bound,
    regime_violations,
    regstrat_experiment,
    regularized_inverse,
    reports_to_csv,
    shift_exponent,
    tikhonov_multiplier,
    tikhonov_objective,
    tikhonov_solve,
)
from torusct.spectrum import bessel_symbol, data_norm
from torusct.weights import constant_weight, good_weight, normal_multiplier, normalize

from conftest import phantom


def setup(n=2, d=1, K=1):
    box = FreqBox(n, K)
    return box, covering_directions(n, d, box)


def random_data(D, box, rng):
    shape = (len(D), *box.shape)
    return Sinogram.from_coeffs(D, box, rng.standard_normal(shape) + 1j * rng.standard_normal(shape))


def test_config_rejects_nonpositive_alpha():
    with pytest.raises(ValueError):
        TikhonovConfig(0.0, constant_weight())


def test_multiplier_examples():
    box, D = setup()
    w = normalize(constant_weight(), D, box)
    assert np.allclose(tikhonov_multiplier(w, 0, 1.0, box, D), 0.5, atol=1e-15)
    c = constant_weight()
    m = tikhonov_multiplier(c, 1.7, 0.3, box, D)
    assert m[box.index((0, 0))] == pytest.approx(1 / (len(D) + 0.3))
    W = normal_multiplier(c, D, box).values
    assert np.allclose(tikhonov_multiplier(c, 1, 1e-12, box, D), 1 / W, rtol=1e-10)


def test_solve_requires_s_ge_r():
    box, D = setup()
    g = random_data(D, box, np.random.default_rng(0))
    with pytest.raises(NumericError, match="s >= r required"):
        tikhonov_solve(g, TikhonovConfig(0.1, constant_weight(), s=0, r=1))


def test_small_alpha_consistency():
    box, D = setup(2, 1, 2)
    w = normalize(good_weight(1.0, 1, D, box), D, box)
    f = phantom(2, 2, 0)
    out = tikhonov_solve(forward(f, D), TikhonovConfig(1e-8, w, s=1, r=0))
    assert hs_norm(out - f, 1) <= 1e-6


def test_zero_data():
    box, D = setup()
    g = Sinogram.from_coeffs(D, box, np.zeros((len(D), *box.shape)))
    assert np.all(tikhonov_solve(g, TikhonovConfig(0.5, constant_weight())).coeffs == 0)


def test_objective_examples():
    box, D = setup()
    w = good_weight(1.3, 0, D, box)
    cfg = TikhonovConfig(0.2, w, s=1, r=0.5)
    zero = Sinogram.from_coeffs(D, box, np.zeros((len(D), *box.shape)))
    assert tikhonov_objective(Spectrum.zeros(box), zero, cfg) == 0.0
    g = random_data(D, box, np.random.default_rng(1))
    assert tikhonov_objective(Spectrum.zeros(box), g, cfg) == pytest.approx(data_norm(g, w, 0.5) ** 2, rel=1e-14)


@settings(max_examples=100)
@given(st.integers(0, 10**6), st.floats(1e-3, 10), st.floats(0, 2), st.floats(0, 2), st.floats(0.5, 2.5))
def test_closed_form_matches_oracle(seed, alpha, r, ds, h):
    box, D = setup()
    w = good_weight(h, 1, D, box)
    cfg = TikhonovConfig(alpha, w, s=r + ds, r=r)
    g = random_data(D, box, np.random.default_rng(seed))
    assert tikhonov_solve(g, cfg).max_abs_diff(brute_force_minimize(g, cfg, tol=1e-9)) <= 1e-6


@settings(max_examples=20)
@given(st.integers(0, 10**6), st.floats(1e-2, 5))
def test_minimality(seed, alpha):
    box, D = setup()
    rng = np.random.default_rng(seed)
    cfg = TikhonovConfig(alpha, good_weight(1.5, 0.5, D, box), s=1, r=0)
    g = random_data(D, box, rng)
    f = tikhonov_solve(g, cfg)
    best = tikhonov_objective(f, g, cfg)
    for _ in range(50):
        e = rng.standard_normal(box.shape) + 1j * rng.standard_normal(box.shape)
        e *= 1e-3 / np.linalg.norm(e)
        assert best <= tikhonov_objective(f.with_coeffs(f.coeffs + e), g, cfg)


def test_oracle_examples():
    box, D = setup()
    w = normalize(constant_weight(), D, box)
    # identical data on every direction: the adjoint returns g-hat itself
    rng = np.random.default_rng(3)
    vals = rng.standard_normal(box.shape) + 1j * rng.standard_normal(box.shape)
    g = Sinogram.from_coeffs(D, box, np.broadcast_to(vals, (len(D), *box.shape)).copy())
    out = brute_force_minimize(g, TikhonovConfig(1.0, w, s=0.5, r=0.5))
    # comparing quadratic values resolves the minimizer to about sqrt(machine eps)
    assert np.max(np.abs(out.coeffs - vals / 2)) <= 1e-7
    huge = brute_force_minimize(g, TikhonovConfig(1e12, w))
    assert np.max(np.abs(huge.coeffs)) <= 1e-8


def test_oracle_round_limit():
    box, D = setup()
    g = random_data(D, box, np.random.default_rng(0))
    with pytest.raises(NumericError):
        brute_force_minimize(g, TikhonovConfig(1.0, constant_weight()), tol=1e-30, max_rounds=3)


def test_c_factor():
    assert c_factor(0.5) == pytest.approx(0.5, abs=1e-15)
    assert c_factor(0.25) == pytest.approx(0.25 * 3 ** 0.75, abs=1e-15)
    assert c_factor(0.25) == pytest.approx(0.569877, abs=1e-6)
    with pytest.raises(ValueError):
        c_factor(1.0)


@given(st.floats(1e-4, 1.0), st.floats(1e-8, 1e-1), st.floats(0, 10), st.floats(0, 2))
def test_rate_bound_normalized_delta_equals_s(alpha, eps, norm, r):
    box, D = setup()
    w = normalize(constant_weight(), D, box)
    cfg = TikhonovConfig(alpha, w, s=1.0, r=r, delta=1.0)
    assert rate_bound(cfg, norm, eps) == pytest.approx(math.sqrt(alpha) * 0.5 * norm + eps / alpha, rel=1e-12)


def test_rate_bound_regime_errors():
    box, D = setup()
    w = normalize(constant_weight(), D, box)
    with pytest.raises(NumericError, match="delta"):
        rate_bound(TikhonovConfig(0.1, w, s=1, delta=2), 1, 0.1)
    with pytest.raises(NumericError, match="alpha"):
        rate_bound(TikhonovConfig(5.0, w, s=1, delta=1), 1, 0.1)
    with pytest.raises(WeightError):
        rate_bound(TikhonovConfig(0.1, constant_weight(), s=1, delta=1), 1, 0.1)
    assert regime_violations(TikhonovConfig(0.1, w, s=1, delta=1), 1.0) == []


def test_draw_noise_has_requested_norm():
    box, D = setup(2, 1, 2)
    w = good_weight(1.2, 1, D, box)
    e = draw_noise(D, box, w, 0.5, 1e-3, np.random.default_rng(0))
    assert data_norm(e, w, 0.5) == pytest.approx(1e-3, rel=1e-12)
    assert np.all(draw_noise(D, box, w, 0, 0.0, np.random.default_rng(0)).coeffs == 0)


def test_bias_only_two_ways():
    box, D = setup(2, 1, 2)
    w = normalize(constant_weight(), D, box)
    f = phantom(2, 2, 4)
    cfg = TikhonovConfig(1.0, w, s=1, r=0, delta=1)
    errors = []
    for alpha in (1e-1, 1e-2, 1e-3):
        rep = regstrat_experiment(f, cfg, [0.0], D, rule=lambda eps: alpha)[0]
        W = normal_multiplier(w, D, box).values
        direct = hs_norm(f.with_coeffs(bias_multiplier(W, alpha, 1, box) * f.coeffs), 0)
        assert rep.lhs_error == pytest.approx(direct, rel=1e-10)
        errors.append(rep.lhs_error)
    assert errors[0] > errors[1] > errors[2]


@given(st.floats(1e-6, 1e6), st.integers(0, 3))
def test_bias_multiplier_bounded(alpha, K):
    box, D = setup(2, 1, max(K, 1))
    W = normal_multiplier(constant_weight(), D, box).values
    assert np.max(np.abs(bias_multiplier(W, alpha, 1.0, box))) <= 1.0


def test_bias_sup_grows_with_box():
    sups = []
    for K in (1, 2, 3, 4):
        box, D = setup(2, 1, K)
        W = normal_multiplier(normalize(constant_weight(), D, box), D, box).values
        sups.append(np.max(np.abs(bias_multiplier(W, 0.01, 1.0, box))))
    assert all(a < b < 1 for a, b in zip(sups, sups[1:]))


@pytest.mark.parametrize("s", [0.5, 1.0])
def test_regstrat_bound_and_decay(s):
    box, D = setup(2, 1, 2)
    w = normalize(good_weight(1.0, 1, D, box), D, box)
    f = phantom(2, 2, 7, real=True)
    cfg = TikhonovConfig(1.0, w, s=s, r=0, t=0, delta=s)
    reps = regstrat_experiment(f, cfg, [1e-2, 1e-4, 1e-6], D, rng=np.random.default_rng(1))
    assert all(r.in_regime and r.passed for r in reps)
    errs = [r.lhs_error for r in reps]
    assert errs[0] > errs[1] > errs[2] and errs[2] < errs[0] / 10


def test_regstrat_workers_deterministic():
    box, D = setup(2, 1, 2)
    w = normalize(constant_weight(), D, box)
    f = phantom(2, 2, 2)
    cfg = TikhonovConfig(1.0, w, s=1, delta=1)
    a = regstrat_experiment(f, cfg, [1e-2, 1e-3, 1e-4], D, rng=np.random.default_rng(5))
    b = regstrat_experiment(f, cfg, [1e-2, 1e-3, 1e-4], D, rng=np.random.default_rng(5), workers=3)
    assert reports_to_csv(a, 5) == reports_to_csv(b, 5)


def test_out_of_regime_rows_are_marked():
    box, D = setup()
    w = normalize(constant_weight(), D, box)
    cfg = TikhonovConfig(1.0, w, s=1, delta=1)
    rep = regstrat_experiment(phantom(2, 1, 0), cfg, [25.0], D)[0]
    assert not rep.in_regime and rep.passed is None
    assert reports_to_csv([rep]).splitlines()[-1].endswith("false,")


def test_regularized_inverse_uses_adjoint():
    box, D = setup()
    w = good_weight(1.4, 1, D, box)
    g = random_data(D, box, np.random.default_rng(2))
    out = regularized_inverse(g, w, 0.5, 0.3)
    W = normal_multiplier(w, D, box).values
    expect = adjoint(g, w).coeffs / (W + 0.3 * bessel_symbol(box, 1.0))
    assert np.allclose(out.coeffs, expect, rtol=1e-14)


def test_shift_exponent():
    assert shift_exponent(4, 2) == 0.5
    assert shift_exponent(2, 3) == 0.0


@pytest.mark.parametrize("p", [1.5, 2.0])
@pytest.mark.parametrize("seed", range(5))
def test_stability_asserted(p, seed):
    box, D = setup(2, 1, 2)
    f = phantom(2, 2, seed, real=True)
    for w in (constant_weight(), good_weight(1.0, 1, D, box), normalize(constant_weight(), D, box)):
        rep = stability_report(f, w, D, 1.0, p)
        assert rep.asserted and rep.passed


def test_stability_p_above_two_only_reports():
    box, D = setup(2, 1, 2)
    rep = stability_report(phantom(2, 2, 0), constant_weight(), D, 0.0, 4.0)
    assert rep.shift == 0.5 and not rep.asserted and rep.passed is None and rep.ratio > 0
