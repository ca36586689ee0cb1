"""Channel-layer tests: RF expansion, interference, optical distribution."""

import math
import warnings

import numpy as np
import pytest
from scipy.integrate import quad
from scipy.special import erf, gammainc
from scipy.stats import chi2, gamma as gamma_dist

from rfso.channels import (
    DggDerived,
    FsoCdfInterpolator,
    FsoLinkParams,
    InterferenceParams,
    POINTING_PRESETS,
    RationalApproximationWarning,
    RfLinkParams,
    dgg_derive,
    fso_cdf,
    fso_pdf,
    fso_sample,
    fso_sf,
    inr_pdf,
    inr_sample,
    pointing_error_xi,
    rf_cdf_best,
    rf_cdf_expansion,
    rf_coefficients,
    rf_sample_best,
    zeta_table,
)

from conftest import XI_STRONG, XI_WEAK, fso_moderate, fso_second


# ---------------------------------------------------------------------------
# RF side
# ---------------------------------------------------------------------------


def test_zeta_table_small_cases():
    zt = zeta_table(2, 2)
    assert np.allclose(zt[0], [1.0])
    assert np.allclose(zt[1], [1.0, 1.0])
    assert np.allclose(zt[2], [1.0, 2.0, 1.0])
    # (1 + x + x^2/2)^2 = 1 + 2x + 2x^2 + x^3 + x^4/4
    zt3 = zeta_table(3, 2)
    assert np.allclose(zt3[2], [1.0, 2.0, 2.0, 1.0, 0.25])


def test_rf_coefficients_sum_to_one():
    for m in (1, 2, 3):
        for k in (1, 2, 4, 5):
            a1, b0, l_count = rf_coefficients(RfLinkParams(m=m, avg_snr=3.7, n_users=k))
            assert abs(a1.sum() - 1.0) < 1e-10
            assert np.all(b0 > 0)
            assert np.all(l_count >= m)


def test_rf_cdf_best_matches_scipy():
    rf = RfLinkParams(m=3, avg_snr=5.0, n_users=4)
    x = np.linspace(0.01, 40.0, 50)
    ref = gammainc(rf.m, rf.m * x / rf.avg_snr) ** rf.n_users
    assert np.max(np.abs(rf_cdf_best(rf, x) - ref)) < 1e-13


def test_rf_expansion_matches_product_form():
    x = np.linspace(0.0, 60.0, 200)
    worst = 0.0
    for m in (1, 2, 3):
        for k in (1, 2, 3, 4, 5):
            rf = RfLinkParams(m=m, avg_snr=8.0, n_users=k)
            diff = np.max(np.abs(rf_cdf_expansion(rf, x) - rf_cdf_best(rf, x)))
            worst = max(worst, diff)
    assert worst < 1e-9


def test_rf_sampler_ks():
    rf = RfLinkParams(m=2, avg_snr=6.0, n_users=3)
    rng = np.random.default_rng(90210)
    s = np.sort(rf_sample_best(rf, 1_000_000, rng))
    F = rf_cdf_best(rf, s)
    n = len(s)
    i = np.arange(1, n + 1)
    ks = max(np.max(i / n - F), np.max(F - (i - 1) / n))
    assert ks < 0.002


# ---------------------------------------------------------------------------
# interference side
# ---------------------------------------------------------------------------


def test_inr_pdf_matches_gamma_aggregate():
    intf = InterferenceParams(m_i=1.5, omega_i=0.8, n_interferers=3)
    x = np.linspace(0.01, 15.0, 60)
    ref = gamma_dist.pdf(x, a=intf.m_i * intf.n_interferers,
                         scale=intf.omega_i / intf.m_i)
    assert np.max(np.abs(inr_pdf(intf, x) - ref)) < 1e-12
    assert inr_pdf(intf, -1.0) == 0.0
    assert inr_pdf(intf, 0.0) == 0.0


def test_inr_sample_ks():
    intf = InterferenceParams(m_i=1.0, omega_i=1.0, n_interferers=2)
    rng = np.random.default_rng(5150)
    s = np.sort(inr_sample(intf, 500_000, rng))
    F = gamma_dist.cdf(s, a=intf.m_i * intf.n_interferers,
                       scale=intf.omega_i / intf.m_i)
    n = len(s)
    i = np.arange(1, n + 1)
    ks = max(np.max(i / n - F), np.max(F - (i - 1) / n))
    assert ks < 0.003


# ---------------------------------------------------------------------------
# pointing geometry
# ---------------------------------------------------------------------------


def test_pointing_error_xi_reference_values():
    # independent recomputation of the equivalent-beam construction
    def xi_ref(ratio):
        v = math.sqrt(math.pi / 2.0) / ratio
        weq2 = ratio ** 2 * math.sqrt(math.pi) * erf(v) / (2.0 * v * math.exp(-v * v))
        return math.sqrt(weq2) / 4.0

    for ratio in (1.0, 2.5, 5.0, 10.0, 20.0):
        assert abs(pointing_error_xi(ratio) - xi_ref(ratio)) < 1e-14
    assert abs(POINTING_PRESETS["strong"] - XI_STRONG) < 1e-12
    assert abs(POINTING_PRESETS["weak"] - XI_WEAK) < 1e-12
    # larger beam, milder misalignment (holds once the beam covers the aperture)
    ratios = np.linspace(1.5, 30.0, 40)
    vals = [pointing_error_xi(r) for r in ratios]
    assert np.all(np.diff(vals) > 0)
    with pytest.raises(ValueError):
        pointing_error_xi(0.0)


# ---------------------------------------------------------------------------
# optical reduced constants
# ---------------------------------------------------------------------------


def test_dgg_derive_moderate_structure():
    fso = fso_moderate(mu_r=10.0, r=1)
    d = dgg_derive(fso)
    assert (d.lambda_, d.sigma) == (21, 20)
    assert d.y == 42.0
    assert d.ratio_error == 0.0
    assert len(d.tau0) == d.sigma + d.lambda_
    assert d.tau1 == (fso.xi ** 2 / d.y,) + d.tau0
    assert d.tau2 == (1.0 + fso.xi ** 2 / d.y,)
    assert len(d.tau3) == fso.r
    assert len(d.tau4) == d.n == fso.r * len(d.tau1)
    assert min(d.tau4) == pytest.approx(fso.xi ** 2 / d.y, rel=1e-12)
    for v, lv in ((d.d1, d.log_d1), (d.d4, d.log_d4), (d.d5, d.log_d5)):
        assert v == pytest.approx(math.exp(lv), rel=1e-12)


def test_dgg_derive_second_set_warns():
    with pytest.warns(RationalApproximationWarning):
        d = dgg_derive(FsoLinkParams(alpha1=2.169, alpha2=1.0, beta1=1.0,
                                     beta2=2.0, omega1=1.5793, omega2=1.0,
                                     xi=XI_WEAK, mu_r=10.0, r=1))
    assert (d.lambda_, d.sigma) == (13, 6)
    assert d.y == 13.0
    assert d.ratio_error == pytest.approx(abs(13.0 / 6.0 - 2.169), abs=1e-12)


def test_dgg_derive_r2_doubles_ladders():
    d1 = dgg_derive(fso_moderate(r=1))
    d2 = dgg_derive(fso_moderate(r=2))
    assert len(d2.tau4) == 2 * len(d1.tau4)
    assert min(d2.tau4) == pytest.approx(min(d1.tau4) / 2.0, rel=1e-12)


# ---------------------------------------------------------------------------
# optical distribution functions
# ---------------------------------------------------------------------------


@pytest.mark.parametrize("maker,r", [(fso_moderate, 1), (fso_moderate, 2),
                                     (fso_second, 1), (fso_second, 2)])
def test_fso_pdf_normalizes(maker, r):
    fso = maker(mu_r=10.0, r=r)
    der = dgg_derive(fso)
    total, _ = quad(lambda u: fso_pdf(fso, math.exp(u), derived=der) * math.exp(u),
                    -40.0, 25.0, limit=300)
    assert abs(total - 1.0) < 1e-9


@pytest.mark.parametrize("maker,r", [(fso_moderate, 1), (fso_moderate, 2),
                                     (fso_second, 1), (fso_second, 2)])
def test_fso_cdf_matches_pdf_integral(maker, r):
    fso = maker(mu_r=10.0, r=r)
    der = dgg_derive(fso)
    for g in (0.05, 0.5, 2.0, 10.0, 60.0):
        ig, _ = quad(lambda u: fso_pdf(fso, math.exp(u), derived=der) * math.exp(u),
                     -40.0, math.log(g), limit=300)
        c = fso_cdf(fso, g, derived=der)
        assert abs(ig - c) / c < 1e-9


def test_fso_cdf_derivative_is_pdf():
    # ties the distribution-function ladder constants to the density ones
    for r in (1, 2):
        fso = fso_moderate(mu_r=10.0, r=r)
        der = dgg_derive(fso)
        for g in (0.3, 1.0, 5.0):
            h = g * 1e-6
            dnum = (fso_cdf(fso, g + h, derived=der)
                    - fso_cdf(fso, g - h, derived=der)) / (2 * h)
            p = fso_pdf(fso, g, derived=der)
            assert abs(dnum - p) / p < 1e-6


def test_fso_cdf_sf_complement():
    fso = fso_moderate(mu_r=10.0, r=1)
    der = dgg_derive(fso)
    for g in (0.1, 1.0, 8.0, 40.0):
        c = fso_cdf(fso, g, derived=der)
        s = fso_sf(fso, g, derived=der)
        assert abs(c + s - 1.0) < 1e-10


def test_fso_scaling_in_mean_snr():
    # SNR scales linearly with mu_r: pdf_c(g) = pdf(g/c)/c, cdf_c(g) = cdf(g/c)
    base = fso_moderate(mu_r=10.0, r=1)
    scaled = fso_moderate(mu_r=30.0, r=1)
    db, ds = dgg_derive(base), dgg_derive(scaled)
    c = 3.0
    for g in (0.2, 1.0, 5.0, 20.0):
        assert fso_cdf(scaled, g, derived=ds) == pytest.approx(
            fso_cdf(base, g / c, derived=db), rel=1e-10)
        assert fso_pdf(scaled, g, derived=ds) == pytest.approx(
            fso_pdf(base, g / c, derived=db) / c, rel=1e-10)


def test_fso_swap_of_scatter_components():
    # the two generalized-gamma factors enter symmetrically
    a = fso_moderate(mu_r=10.0, r=1)
    b = FsoLinkParams(alpha1=a.alpha2, alpha2=a.alpha1, beta1=a.beta2,
                      beta2=a.beta1, omega1=a.omega2, omega2=a.omega1,
                      xi=a.xi, mu_r=a.mu_r, r=a.r)
    da, db = dgg_derive(a), dgg_derive(b)
    assert da.y == db.y
    for g in (0.2, 1.0, 5.0, 20.0):
        assert fso_cdf(a, g, derived=da) == pytest.approx(
            fso_cdf(b, g, derived=db), rel=1e-9)


def test_fso_cdf_monotone_in_gamma_and_mu():
    fso = fso_moderate(mu_r=10.0, r=1)
    der = dgg_derive(fso)
    gs = np.geomspace(0.01, 100.0, 25)
    vals = np.array([fso_cdf(fso, g, derived=der) for g in gs])
    assert np.all(np.diff(vals) > 0)
    mus = [3.0, 10.0, 30.0, 100.0]
    at_fixed = [fso_cdf(fso_moderate(mu_r=mu, r=1), 2.0) for mu in mus]
    assert np.all(np.diff(at_fixed) < 0)


@pytest.mark.parametrize("maker,r", [(fso_moderate, 1), (fso_moderate, 2),
                                     (fso_second, 1), (fso_second, 2)])
def test_fso_sampler_ks(maker, r):
    fso = maker(mu_r=10.0, r=r)
    der = dgg_derive(fso)
    interp = FsoCdfInterpolator(fso, derived=der)
    rng = np.random.default_rng(1234)
    s = np.sort(fso_sample(fso, 200_000, rng, derived=der))
    F = interp.cdf(s)
    n = len(s)
    i = np.arange(1, n + 1)
    ks = max(np.max(i / n - F), np.max(F - (i - 1) / n))
    assert ks < 0.004


def test_fso_sampler_chi_square_moderate():
    # exact rational exponents, so sampled and represented laws coincide
    fso = fso_moderate(mu_r=10.0, r=1)
    der = dgg_derive(fso)
    interp = FsoCdfInterpolator(fso, derived=der)
    rng = np.random.default_rng(777)
    s = fso_sample(fso, 400_000, rng, derived=der)
    edges = np.geomspace(0.02, 80.0, 41)
    counts, _ = np.histogram(s, bins=edges)
    cdf_at = interp.cdf(edges)
    p_bin = np.diff(cdf_at)
    keep = p_bin * len(s) >= 20
    expected = p_bin[keep] * len(s)
    observed = counts[keep]
    stat = np.sum((observed - expected) ** 2 / expected)
    p_value = chi2.sf(stat, df=keep.sum() - 1)
    assert p_value > 0.01


# ---------------------------------------------------------------------------
# tabulated distribution
# ---------------------------------------------------------------------------


@pytest.mark.parametrize("maker,r", [(fso_moderate, 1), (fso_moderate, 2),
                                     (fso_second, 1), (fso_second, 2)])
def test_interpolator_matches_direct(maker, r):
    fso = maker(mu_r=10.0, r=r)
    der = dgg_derive(fso)
    interp = FsoCdfInterpolator(fso, derived=der)
    gs = np.geomspace(1e-8, 1e4, 40)
    for g in gs:
        c = fso_cdf(fso, g, derived=der)
        if c > 1e-300:
            assert abs(interp.cdf(g) - c) / c < 5e-6
        s = fso_sf(fso, g, derived=der)
        if s > 1e-12:
            assert abs(interp.sf(g) - s) / s < 1e-4


def test_interpolator_mu_override():
    # one table serves every mean SNR through the log-argument shift
    fso = fso_moderate(mu_r=10.0, r=1)
    interp = FsoCdfInterpolator(fso)
    hi = fso_moderate(mu_r=250.0, r=1)
    dhi = dgg_derive(hi)
    for g in (0.5, 5.0, 50.0):
        ref = fso_cdf(hi, g, derived=dhi)
        assert abs(interp.cdf(g, mu_r=250.0) - ref) / ref < 5e-6


def test_interpolator_tail_behavior():
    interp = FsoCdfInterpolator(fso_moderate(mu_r=10.0, r=1))
    assert interp.cdf(1e-200) >= 0.0
    assert interp.sf(1e12) >= 0.0
    assert interp.cdf(1e12) == pytest.approx(1.0, abs=1e-10)
    gs = np.geomspace(1e-6, 1e8, 60)
    vals = interp.cdf(gs)
    assert np.all(np.diff(vals) >= 0)


# ---------------------------------------------------------------------------
# parameter validation
# ---------------------------------------------------------------------------


def test_parameter_validation():
    with pytest.raises(ValueError):
        RfLinkParams(m=0, avg_snr=1.0, n_users=2)
    with pytest.raises(ValueError):
        RfLinkParams(m=2, avg_snr=-1.0, n_users=2)
    with pytest.raises(ValueError):
        InterferenceParams(m_i=1.0, omega_i=0.0, n_interferers=1)
    with pytest.raises(ValueError):
        fso_moderate(r=3)
    with pytest.raises(ValueError):
        FsoLinkParams(alpha1=-2.0, alpha2=1.0, beta1=1.0, beta2=1.0,
                      omega1=1.0, omega2=1.0, xi=1.0, mu_r=1.0, r=1)
