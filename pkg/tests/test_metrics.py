"""Metric-layer tests: outage and sum rate by all three routes."""

import math
import warnings

import numpy as np
import pytest
from scipy.integrate import quad
from scipy.special import exp1

from rfso.channels import (
    FsoCdfInterpolator,
    FsoLinkParams,
    InterferenceParams,
    RfLinkParams,
    SystemConfig,
    dgg_derive,
)
from rfso.metrics import (
    NumericalNoiseWarning,
    _clamp_probability,
    asr_asymptotic,
    asr_coefficients,
    asr_exact,
    asr_quadrature,
    effective_rf_cdf,
    effective_rf_pdf,
    effective_rf_sf,
    outage_asymptotic,
    outage_coefficients,
    outage_exact,
    outage_quadrature,
)

from conftest import XI_STRONG, fso_moderate, fso_second, system


def _simple_cfg(snr=10.0, gamma_th=1.0, mu_r=None):
    """K = m = N = m_i = 1 with unit mean interference."""
    return SystemConfig(
        rf=RfLinkParams(m=1, avg_snr=snr, n_users=1),
        fso=fso_moderate(mu_r=snr if mu_r is None else mu_r, r=1),
        interference=InterferenceParams(m_i=1.0, omega_i=1.0, n_interferers=1),
        gamma_th=gamma_th)


# ---------------------------------------------------------------------------
# effective RF distribution (interference divided out)
# ---------------------------------------------------------------------------


def test_effective_rf_pareto_oracle():
    # X ~ Exp(1/s), Z ~ Exp(1): P(X/Z > g) = (1 + g/s)^-1
    s = 10.0
    cfg = _simple_cfg(snr=s)
    for g in (0.1, 1.0, 7.0, 50.0):
        ref = 1.0 / (1.0 + g / s)
        assert effective_rf_sf(g, cfg) == pytest.approx(ref, rel=1e-13)
        assert effective_rf_cdf(g, cfg) == pytest.approx(1.0 - ref, rel=1e-12)
        assert effective_rf_pdf(g, cfg) == pytest.approx(
            (1.0 / s) / (1.0 + g / s) ** 2, rel=1e-12)


def test_effective_rf_two_term_oracle():
    # m = 2, K = 1: SF_rf(x) = e^-u (1+u); dividing by Exp(1) interference
    # gives SF(g) = (1 + 2u) / (1 + u)^2 with u = b0 g
    s = 6.0
    cfg = SystemConfig(
        rf=RfLinkParams(m=2, avg_snr=s, n_users=1),
        fso=fso_moderate(mu_r=s, r=1),
        interference=InterferenceParams(m_i=1.0, omega_i=1.0, n_interferers=1),
        gamma_th=1.0)
    b0 = 2.0 / s
    for g in (0.2, 1.0, 4.0, 20.0):
        u = b0 * g
        ref = (1.0 + 2.0 * u) / (1.0 + u) ** 2
        assert effective_rf_sf(g, cfg) == pytest.approx(ref, rel=1e-12)


def test_effective_rf_pdf_normalizes():
    cfg = system(12.0, fso_kind="moderate", r=1, m=2, k_users=2,
                 m_i=1.0, n_interferers=2)
    total, _ = quad(lambda u: effective_rf_pdf(math.exp(u), cfg) * math.exp(u),
                    -30.0, 40.0, limit=300)
    assert abs(total - 1.0) < 1e-8


def test_effective_rf_pdf_is_cdf_derivative():
    cfg = system(10.0, fso_kind="moderate", r=1, m=2, k_users=3,
                 m_i=1.5, n_interferers=2)
    c = effective_rf_cdf
    for g in (0.3, 1.0, 5.0):
        h = g * 1e-4
        dnum = (-c(g + 2 * h, cfg) + 8 * c(g + h, cfg)
                - 8 * c(g - h, cfg) + c(g - 2 * h, cfg)) / (12 * h)
        p = effective_rf_pdf(g, cfg)
        assert abs(dnum - p) / p < 1e-5


# ---------------------------------------------------------------------------
# outage coefficient invariants
# ---------------------------------------------------------------------------


def test_outage_coefficients_structure():
    cfg = system(10.0, fso_kind="moderate", r=1)
    der = dgg_derive(cfg.fso)
    co = outage_coefficients(cfg, derived=der)
    assert co.a1.sum() == pytest.approx(1.0, abs=1e-10)
    assert np.all(co.b1 > 0)
    assert len(co.tau5) == int(der.y)
    assert co.p_n == pytest.approx(XI_STRONG ** 2 / der.y, rel=1e-12)
    assert co.p_n == pytest.approx(min(der.tau4), rel=1e-12)
    assert co.lambda1 > 0
    assert math.isfinite(co.log_b2) and math.isfinite(co.log_d7)


def test_outage_coefficients_need_integer_ladder():
    fso = FsoLinkParams(alpha1=1.1, alpha2=1.1, beta1=1.0, beta2=1.0,
                        omega1=1.0, omega2=1.0, xi=1.3, mu_r=10.0, r=1)
    cfg = SystemConfig(rf=RfLinkParams(m=1, avg_snr=10.0, n_users=1),
                       fso=fso,
                       interference=InterferenceParams(m_i=1.0, omega_i=1.0,
                                                       n_interferers=1),
                       gamma_th=1.0)
    # alpha1/alpha2 = 1 so y = alpha2 = 1.1, not an integer
    with pytest.raises(ValueError):
        outage_coefficients(cfg)


def test_outage_coefficients_degenerate_pole():
    # xi^2/y = 2/42 = 1/21 collides with the first scatter ladder value
    fso = fso_moderate(mu_r=10.0, r=1, xi=math.sqrt(2.0))
    cfg = SystemConfig(rf=RfLinkParams(m=2, avg_snr=10.0, n_users=2),
                       fso=fso,
                       interference=InterferenceParams(m_i=1.0, omega_i=1.0,
                                                       n_interferers=2),
                       gamma_th=1.0)
    with pytest.warns(RuntimeWarning):
        co = outage_coefficients(cfg)
    assert co.p_n == pytest.approx(1.0 / 21.0 - 1e-6, rel=1e-9)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        v = outage_asymptotic(cfg)
    assert math.isfinite(v) and v > 0


def test_clamp_probability_behavior():
    assert _clamp_probability(0.3, "x") == 0.3
    with pytest.warns(NumericalNoiseWarning):
        assert _clamp_probability(-5e-7, "x") == 0.0
    with pytest.warns(NumericalNoiseWarning):
        assert _clamp_probability(1.0 + 5e-7, "x") == 1.0
    with pytest.raises(ValueError):
        _clamp_probability(-1e-3, "x")
    with pytest.raises(ValueError):
        _clamp_probability(1.01, "x")


# ---------------------------------------------------------------------------
# outage probability routes
# ---------------------------------------------------------------------------


def test_outage_rf_only_median_oracle():
    # X, Z iid Exp(1): P(X/Z < 1) = 1/2
    cfg = _simple_cfg(snr=1.0, gamma_th=1.0)
    v = outage_quadrature(cfg, rf_only=True)
    assert v == pytest.approx(0.5, abs=1e-10)


def test_outage_rf_only_matches_effective_cdf():
    cfg = system(10.0, fso_kind="moderate", r=1, m=2, k_users=2,
                 n_interferers=2)
    v = outage_quadrature(cfg, rf_only=True)
    assert v == pytest.approx(effective_rf_cdf(cfg.gamma_th, cfg), abs=1e-11)


@pytest.mark.parametrize("db", [0.0, 10.0, 20.0])
def test_outage_exact_vs_quadrature_moderate(db):
    cfg = system(db, fso_kind="moderate", r=1)
    ex = outage_exact(cfg)
    qd = outage_quadrature(cfg)
    assert abs(ex - qd) / qd < 1e-4


@pytest.mark.parametrize("fso_kind,r,n_int", [("moderate", 2, 1),
                                              ("second", 1, 3),
                                              ("second", 2, 2)])
def test_outage_exact_vs_quadrature_variants(fso_kind, r, n_int):
    cfg = system(15.0, fso_kind=fso_kind, r=r, n_interferers=n_int)
    ex = outage_exact(cfg)
    qd = outage_quadrature(cfg)
    assert abs(ex - qd) / qd < 1e-4


def test_outage_reduced_matches_double_contour():
    for db in (0.0, 10.0):
        cfg = system(db, fso_kind="moderate", r=1)
        a = outage_exact(cfg, method="reduced")
        b = outage_exact(cfg, method="double")
        assert abs(a - b) / b < 1e-10
    with pytest.raises(ValueError):
        outage_exact(system(10.0), method="simpson")


def test_outage_decreases_with_snr():
    vals = [outage_exact(system(db, fso_kind="moderate", r=1))
            for db in (0.0, 10.0, 20.0, 30.0, 40.0)]
    assert np.all(np.diff(vals) < 0)
    assert all(0.0 <= v <= 1.0 for v in vals)


def test_outage_vanishes_with_threshold():
    cfg = system(10.0, fso_kind="moderate", r=1, gamma_th=1e-6)
    assert outage_exact(cfg) < 1e-9


def test_outage_aperture_order():
    # heterodyne conversion (r = 1) outperforms direct detection (r = 2)
    for db in (5.0, 15.0, 25.0):
        p1 = outage_exact(system(db, fso_kind="moderate", r=1))
        p2 = outage_exact(system(db, fso_kind="moderate", r=2))
        assert p1 <= p2


# ---------------------------------------------------------------------------
# outage asymptote
# ---------------------------------------------------------------------------


def test_outage_asymptote_ratio_approaches_one():
    ratios = []
    for db in (25.0, 32.5, 40.0):
        cfg = system(db, fso_kind="moderate", r=1)
        ratios.append(outage_asymptotic(cfg) / outage_exact(cfg))
    assert all(0.5 < r < 2.0 for r in ratios)
    assert ratios[0] > ratios[1] > ratios[2] > 1.0


def test_outage_asymptote_slope():
    cfg = system(10.0, fso_kind="moderate", r=1)
    der = dgg_derive(cfg.fso)
    co = outage_coefficients(cfg, derived=der)
    target = -der.y * co.p_n / 10.0
    p1 = outage_asymptotic(system(60.0, fso_kind="moderate", r=1))
    p2 = outage_asymptotic(system(70.0, fso_kind="moderate", r=1))
    slope = (math.log10(p2) - math.log10(p1)) / 10.0
    assert slope == pytest.approx(target, rel=5e-3)


# ---------------------------------------------------------------------------
# sum rate routes
# ---------------------------------------------------------------------------


def test_asr_quadrature_unit_interference_oracle():
    # gamma_I pinned to 1, optical mean driven to zero: only the RF hop
    # contributes, and its rate is e^0.1 E1(0.1) / (2 ln 2)
    cfg = _simple_cfg(snr=10.0, mu_r=1e-30)
    v = asr_quadrature(cfg, gamma_i_fixed=1.0)
    oracle = math.exp(0.1) * float(exp1(0.1)) / (2.0 * math.log(2.0))
    assert oracle == pytest.approx(1.4532574042074027, rel=1e-13)
    assert v == pytest.approx(oracle, rel=1e-11)


def test_asr_quadrature_averaged_interference_oracle():
    # with Exp(1) interference the RF hop rate closes to
    # ln(1/b0) / ((1 - b0) 2 ln 2), b0 = 1/avg_snr
    cfg = _simple_cfg(snr=10.0, mu_r=1e-30)
    v = asr_quadrature(cfg)
    oracle = math.log(10.0) / (0.9 * 2.0 * math.log(2.0))
    assert v == pytest.approx(oracle, rel=1e-10)


@pytest.mark.parametrize("fso_kind,r", [("moderate", 1), ("moderate", 2),
                                        ("second", 1), ("second", 2)])
def test_asr_exact_vs_quadrature(fso_kind, r):
    cfg = system(15.0, fso_kind=fso_kind, r=r)
    ex = asr_exact(cfg)
    qd = asr_quadrature(cfg)
    assert abs(ex - qd) < 1e-3


def test_asr_exact_vs_quadrature_sweep():
    for db in (0.0, 20.0, 40.0):
        cfg = system(db, fso_kind="moderate", r=1)
        assert abs(asr_exact(cfg) - asr_quadrature(cfg)) < 1e-3


def test_asr_delta_knob_detects_corruption():
    # the knob exists to prove the dual routes are independent
    cfg = system(15.0, fso_kind="moderate", r=1)
    qd = asr_quadrature(cfg)
    assert abs(asr_exact(cfg, delta=1.0) - qd) < 1e-3
    assert abs(asr_exact(cfg, delta=2.0) - qd) > 0.1


def test_asr_increases_with_snr():
    vals = [asr_exact(system(db, fso_kind="moderate", r=1))
            for db in (0.0, 10.0, 20.0, 30.0)]
    assert np.all(np.diff(vals) > 0)


def test_asr_user_and_interferer_trends():
    base = dict(fso_kind="second", r=1, m=2, m_i=1.0)
    by_k = [asr_exact(system(10.0, k_users=k, n_interferers=2, **base))
            for k in (1, 2, 4)]
    assert by_k[0] < by_k[1] < by_k[2]
    by_n = [asr_exact(system(10.0, k_users=2, n_interferers=n, **base))
            for n in (1, 2, 4)]
    assert by_n[0] > by_n[1] > by_n[2]


def test_asr_asymptote_converges():
    for db, tol in ((25.0, 5e-3), (35.0, 1e-4)):
        cfg = system(db, fso_kind="moderate", r=1)
        ex = asr_exact(cfg)
        asy = asr_asymptotic(cfg)
        assert abs(asy - ex) / ex < tol


def test_asr_coefficients_structure():
    cfg = system(10.0, fso_kind="moderate", r=1)
    der = dgg_derive(cfg.fso)
    co = asr_coefficients(cfg, derived=der)
    y = int(der.y)
    assert len(co.tau13) == 2 * y + cfg.fso.r + 1
    assert len(co.tau14) == der.n + y + 1
    assert co.a3.shape == (co.a1.size, int(co.l_count.max()))
    assert math.isfinite(co.log_r2_arg) and math.isfinite(co.log_r2_pref)
