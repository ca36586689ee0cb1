"""Outage probability and achievable sum-rate of the relayed mixed link.

Every quantity here describes the end-to-end SINR of a two-way relay whose
two hops are the multiuser RF uplink and the optical downlink of
:mod:`rfso.channels`, both divided by the same aggregate interference power
at the relay.  Outage is the probability that the weaker of the two hop
SINRs falls below a threshold; the sum rate is the average of the two hop
spectral efficiencies with the half duplex factor.

Each metric ships in three independent routes that the test suite plays
against each other:

* ``*_exact``: closed forms built from the coefficient bundles below and
  evaluated through :mod:`rfso.specfun` contour integrals;
* ``*_quadrature``: direct numerical integration of the defining averages
  using only the channel-level distributions (the bridge oracle);
* ``*_asymptotic``: dominant-pole expansions for the high-SNR regime.

The coefficient bundles are plain frozen dataclasses and safe to share
across threads.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.integrate import IntegrationWarning, quad
from scipy.special import gammaincinv

from .channels import (
    FsoCdfInterpolator,
    _ladder,
    dgg_derive,
    rf_coefficients,
    rf_cdf_best,
    series_crossover,
)
from .specfun import (
    DEFAULT_POLICY,
    BivariateFoxHSpec,
    GammaFactor,
    MeijerGSpec,
    fox_h_bivariate,
    fox_h_univariate,
    meijer_g,
    residue_series,
)

__all__ = [
    "NumericalNoiseWarning",
    "OutageCoefficients",
    "AsrCoefficients",
    "RESOLUTIONS",
    "outage_coefficients",
    "outage_exact",
    "outage_quadrature",
    "outage_asymptotic",
    "effective_rf_cdf",
    "effective_rf_sf",
    "effective_rf_pdf",
    "asr_coefficients",
    "asr_exact",
    "asr_quadrature",
    "asr_asymptotic",
]

_LN2 = math.log(2.0)
_LN_2PI = math.log(2.0 * math.pi)


class NumericalNoiseWarning(UserWarning):
    """A result was clamped onto its valid range by a roundoff-sized amount."""


# Ambiguities in the source formulas that were settled by playing the closed
# forms against the quadrature oracle; `rfso validate` prints these.
RESOLUTIONS = (
    "outage closed form keeps the RF-limited floor term and adds the"
    " cross-term sum; the sign and argument powers follow the derivation"
    " that matches direct quadrature",
    "the outage coefficient table a2 drops the duplicated factorial so the"
    " closed form matches direct quadrature",
    "rate closed forms use re-derived parameter rows; the printed variants"
    " are inconsistent with quadrature and with each other",
    "delta is an explicit rate-coefficient field defaulting to 1; any other"
    " value breaks the exact/quadrature rate agreement by design",
    "the interferer power inside b3 is the first-interferer average power",
    "pointing-error presets derive the offset parameter from the stated"
    " beam-to-aperture geometry",
)


# ---------------------------------------------------------------------------
# coefficient bundles
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class OutageCoefficients:
    """Inputs of the closed-form outage evaluation.

    ``a1`` and ``a2`` are flat tables over the RF selection expansion pairs
    (one entry per (n1, n2)); ``b0`` and ``b1`` are parallel tables (the RF
    rate parameter and the first contour argument depend on n1 through
    B0 = beta*(n1+1)).  ``b2`` and ``d7`` are the optical-side contour
    arguments; ``tau5`` is the y-entry ladder of the interference order,
    ``tau6`` the per-term shift of the coupled parameter, and ``tau7`` /
    ``tau8`` the static upper and lower parameter rows.  ``p_n`` is the
    dominant pole (the smallest tau4 entry) and ``lambda1`` the matching
    residue coefficient of the asymptote.
    """

    a1: np.ndarray
    a2: np.ndarray
    b0: np.ndarray
    b1: np.ndarray
    b2: float
    d7: float
    tau5: tuple
    tau6: tuple
    tau7: tuple
    tau8: tuple
    p_n: float
    lambda1: float
    # evaluation extras; the log twins stay finite when b2/d7/lambda1
    # overflow or underflow the double range
    l_count: np.ndarray
    log_b1: np.ndarray
    log_b2: float
    log_d7: float
    log_lambda1: float
    m1n: float
    gamma_th: float

    def __post_init__(self):
        if np.any(self.b1 <= 0):
            raise ValueError("contour arguments must be positive")
        if not (math.isfinite(self.log_b2) and math.isfinite(self.log_d7)):
            raise ValueError("contour arguments must be positive")


@dataclass(frozen=True)
class AsrCoefficients:
    """Inputs of the closed-form sum-rate evaluation.

    ``a3`` is the coefficient table over (n1, n2, series index); ``b3`` the
    per-n1 rate-contour argument.  ``tau9``..``tau12`` hold the base
    (index zero) three-entry parameter rows of the two RF-side integrals;
    the evaluator shifts them with the series index.  ``tau13`` / ``tau14``
    are the full upper and lower rows of the optical-side integral and
    ``delta`` the explicit normalization knob (see RESOLUTIONS).
    """

    a3: np.ndarray
    b3: np.ndarray
    tau9: tuple
    tau10: tuple
    tau11: tuple
    tau12: tuple
    tau13: tuple
    tau14: tuple
    delta: float
    # evaluation extras
    l_count: np.ndarray
    a1: np.ndarray
    log_b3: np.ndarray
    log_r2_arg: float
    log_r2_pref: float
    m1n: float


def _interference_scale(cfg):
    """Rate parameter and order of the aggregate interference power."""
    intf = cfg.interference
    lam = intf.m_i / intf.omega_i
    return lam, intf.m_i * intf.n_interferers


def outage_coefficients(cfg, *, derived=None):
    if derived is None:
        derived = dgg_derive(cfg.fso)
    d = derived
    if abs(d.y - round(d.y)) > 1e-9:
        raise ValueError("closed forms need an integer ladder order y; "
                         f"got y = {d.y}")
    y = int(round(d.y))
    lam_i, m1n = _interference_scale(cfg)
    a1, b0, l_count = rf_coefficients(cfg.rf)
    gamma_th = cfg.gamma_th
    b1 = b0 * gamma_th / lam_i
    log_b2 = d.log_d5 + d.y * (math.log(gamma_th / lam_i) - math.log(cfg.fso.mu_r))
    log_d7 = d.log_d5 + d.y * (math.log(d.y / lam_i) - math.log(cfg.fso.mu_r))
    a2 = a1 * math.exp(d.log_d4 - math.lgamma(m1n))

    tau4 = np.asarray(d.tau4)
    order = np.argsort(tau4)
    p_n = float(tau4[order[0]])
    degenerate = tau4.size > 1 and float(tau4[order[1]]) - p_n < 1e-9
    if degenerate:
        warnings.warn("dominant pole is degenerate; separating it by 1e-6 "
                      "for the asymptote", RuntimeWarning)
        p_n -= 1e-6
    log_l1 = -math.log(p_n)
    for j, t in enumerate(tau4):
        if j == order[0]:
            continue
        log_l1 += math.lgamma(t - p_n)
    for t in d.tau3:
        log_l1 -= math.lgamma(t - p_n)

    max_l = int(l_count.max())
    return OutageCoefficients(
        a1=a1,
        a2=a2,
        b0=b0,
        b1=b1,
        b2=math.exp(min(log_b2, 700.0)),
        d7=math.exp(min(log_d7, 700.0)),
        tau5=tuple(_ladder(y, 1.0 - m1n)),
        tau6=tuple(1.0 - m1n - l for l in range(max_l)),
        tau7=(1.0,) + d.tau3,
        tau8=d.tau4 + (0.0,),
        p_n=p_n,
        lambda1=math.exp(log_l1),
        l_count=l_count,
        log_b1=np.log(b1),
        log_b2=log_b2,
        log_d7=log_d7,
        log_lambda1=log_l1,
        m1n=m1n,
        gamma_th=gamma_th,
    )


# ---------------------------------------------------------------------------
# effective RF-side distribution (the RF hop divided by the interference)
# ---------------------------------------------------------------------------


def _rf_term_tables(cfg):
    """Per-pair arrays (a1, b0, l_count) and the interference constants."""
    a1, b0, l_count = rf_coefficients(cfg.rf)
    lam_i, m1n = _interference_scale(cfg)
    return a1, b0, l_count, lam_i, m1n


def _log_c_l(l, m1n):
    """log of the interference mixture weight for series index l."""
    return math.lgamma(l + m1n) - math.lgamma(l + 1) - math.lgamma(m1n)


def effective_rf_sf(gamma, cfg):
    """Survival of the interference-divided RF hop, elementwise."""
    a1, b0, l_count, lam_i, m1n = _rf_term_tables(cfg)
    gs = np.atleast_1d(np.asarray(gamma, dtype=float))
    out = np.zeros_like(gs)
    pos = gs > 0
    gp = gs[pos]
    acc = np.zeros_like(gp)
    for i in range(a1.size):
        u = b0[i] * gp
        # sum_l C_l u^l lam^m1n (u+lam)^(-l-m1n) in log domain
        inner = np.zeros_like(gp)
        log_u = np.log(u)
        log_up = np.log(u + lam_i)
        for l in range(int(l_count[i])):
            term = (_log_c_l(l, m1n) + m1n * math.log(lam_i)
                    + l * log_u - (l + m1n) * log_up)
            inner += np.exp(term)
        acc += a1[i] * inner
    out[pos] = acc
    out[~pos] = 1.0
    out = np.clip(out, 0.0, 1.0)
    if np.asarray(gamma).ndim == 0:
        return float(out[0])
    return out


def effective_rf_cdf(gamma, cfg):
    """Distribution of the interference-divided RF hop, elementwise."""
    res = 1.0 - effective_rf_sf(gamma, cfg)
    return res


def effective_rf_pdf(gamma, cfg):
    """Density of the interference-divided RF hop, elementwise."""
    a1, b0, l_count, lam_i, m1n = _rf_term_tables(cfg)
    gs = np.atleast_1d(np.asarray(gamma, dtype=float))
    out = np.zeros_like(gs)
    pos = gs > 0
    gp = gs[pos]
    acc = np.zeros_like(gp)
    for i in range(a1.size):
        u = b0[i] * gp
        log_u = np.log(u)
        log_up = np.log(u + lam_i)
        inner = np.zeros_like(gp)
        for l in range(int(l_count[i])):
            base = _log_c_l(l, m1n) + m1n * math.log(lam_i)
            inner += (l + m1n) * np.exp(base + l * log_u - (l + m1n + 1) * log_up)
            if l > 0:
                inner -= l * np.exp(base + (l - 1) * log_u - (l + m1n) * log_up)
        acc += a1[i] * b0[i] * inner
    out[pos] = acc
    out = np.maximum(out, 0.0)
    if np.asarray(gamma).ndim == 0:
        return float(out[0])
    return out


# ---------------------------------------------------------------------------
# outage probability
# ---------------------------------------------------------------------------


def _cross_term_bivariate_spec(coeffs, derived, l):
    """Double-contour form of one cross term of the closed-form outage."""
    outer = (GammaFactor(coeffs.m1n + l, -1.0, -derived.y, "numerator"),)
    s_factors = (GammaFactor(0.0, 1.0, 0.0, "numerator"),)
    t_factors = [GammaFactor(0.0, 0.0, -1.0, "numerator")]
    t_factors += [GammaFactor(t, 0.0, 1.0, "numerator") for t in derived.tau4]
    t_factors.append(GammaFactor(1.0, 0.0, -1.0, "denominator"))
    t_factors += [GammaFactor(t, 0.0, 1.0, "denominator") for t in derived.tau3]
    return BivariateFoxHSpec(outer, s_factors, tuple(t_factors))


def _cross_term_factors(coeffs, derived, l):
    """Single-contour form of one cross term.

    The inner contour of the double form is a Beta integral and is folded
    into the argument exactly, which keeps the numerical work on one axis
    where the series/contour routing is sharp for any SNR.
    """
    fs = [GammaFactor(coeffs.m1n + l, -derived.y, 0.0, "numerator"),
          GammaFactor(0.0, -1.0, 0.0, "numerator")]
    fs += [GammaFactor(t, 1.0, 0.0, "numerator") for t in derived.tau4]
    fs.append(GammaFactor(1.0, -1.0, 0.0, "denominator"))
    fs += [GammaFactor(t, 1.0, 0.0, "denominator") for t in derived.tau3]
    return tuple(fs)


def _clamp_probability(p, what):
    if p < -1e-6 or p > 1.0 + 1e-6:
        raise ValueError(f"{what} fell outside [0,1] by more than 1e-6: {p}")
    if p < 0.0 or p > 1.0:
        warnings.warn(f"{what} clamped onto [0,1] ({p})", NumericalNoiseWarning)
        return min(max(p, 0.0), 1.0)
    return p


def outage_exact(cfg, *, coeffs=None, derived=None, policy=DEFAULT_POLICY,
                 method="reduced"):
    """Closed-form outage probability of the relayed link.

    ``method`` selects how the cross-term contour integrals are evaluated:
    ``"reduced"`` folds the inner contour analytically and integrates one
    axis (robust at any SNR), ``"double"`` evaluates the coupled double
    contour directly (a cross-check, practical at moderate SNR only).
    """
    if method not in ("reduced", "double"):
        raise ValueError("method must be 'reduced' or 'double'")
    if derived is None:
        derived = dgg_derive(cfg.fso)
    if coeffs is None:
        coeffs = outage_coefficients(cfg, derived=derived)
    total = effective_rf_cdf(coeffs.gamma_th, cfg)
    for i in range(coeffs.a1.size):
        sign = 1.0 if coeffs.a1[i] >= 0 else -1.0
        log_a = math.log(abs(coeffs.a1[i])) if coeffs.a1[i] != 0 else -math.inf
        if not math.isfinite(log_a):
            continue
        log1p_b1 = math.log1p(coeffs.b1[i])
        for l in range(int(coeffs.l_count[i])):
            log_pref = (log_a + derived.log_d4 - math.lgamma(coeffs.m1n)
                        + l * coeffs.log_b1[i] - math.lgamma(l + 1))
            if method == "double":
                spec = _cross_term_bivariate_spec(coeffs, derived, l)
                val = fox_h_bivariate(spec, policy=policy,
                                      log_x1=coeffs.log_b1[i],
                                      log_x2=coeffs.log_b2,
                                      log_prefactor=log_pref).value
            else:
                factors = _cross_term_factors(coeffs, derived, l)
                lx = coeffs.log_b2 - derived.y * log1p_b1
                lp = log_pref - (coeffs.m1n + l) * log1p_b1
                if lx < series_crossover(factors):
                    val = residue_series(factors, log_x=lx, max_power=3.0,
                                         policy=policy, log_prefactor=lp).value
                else:
                    val = fox_h_univariate(factors, policy=policy, log_x=lx,
                                           log_prefactor=lp).value
            total += sign * val
    return _clamp_probability(total, "outage probability")


def outage_asymptotic(cfg, *, coeffs=None, derived=None):
    """Dominant-pole approximation of the outage probability."""
    if derived is None:
        derived = dgg_derive(cfg.fso)
    if coeffs is None:
        coeffs = outage_coefficients(cfg, derived=derived)
    p_n = coeffs.p_n
    total = effective_rf_cdf(coeffs.gamma_th, cfg)
    for i in range(coeffs.a1.size):
        if coeffs.a1[i] == 0:
            continue
        sign = 1.0 if coeffs.a1[i] >= 0 else -1.0
        log_a = math.log(abs(coeffs.a1[i]))
        log1p_b1 = math.log1p(coeffs.b1[i])
        for l in range(int(coeffs.l_count[i])):
            order = l + coeffs.m1n + derived.y * p_n
            log_term = (log_a + derived.log_d4 - math.lgamma(coeffs.m1n)
                        + l * coeffs.log_b1[i] - math.lgamma(l + 1)
                        + coeffs.log_lambda1 + math.lgamma(order)
                        - order * log1p_b1 + p_n * coeffs.log_b2)
            total += sign * math.exp(log_term)
    return total


def _interference_log_nodes(cfg, n_nodes=160, tail=1e-15):
    """Gauss-Legendre nodes and weights for averaging over the interference.

    Returns (z, w, p_lo) so that sum w_i g(z_i) approximates E[g(Z)] for the
    aggregate interference power Z over its central quantile range; ``p_lo``
    is the truncated lower-tail mass (where g is near its z->0 limit).
    """
    lam_i, m1n = _interference_scale(cfg)
    lo = math.log(max(gammaincinv(m1n, tail) / lam_i, 1e-290))
    hi = math.log(gammaincinv(m1n, 1.0 - tail) / lam_i)
    x, w = np.polynomial.legendre.leggauss(n_nodes)
    u = 0.5 * (hi + lo) + 0.5 * (hi - lo) * x
    z = np.exp(u)
    # density of Z on the log axis: z^m1n lam^m1n e^(-lam z) / Gamma(m1n)
    log_pdf = (m1n * math.log(lam_i) + m1n * u - lam_i * z
               - math.lgamma(m1n))
    weights = 0.5 * (hi - lo) * w * np.exp(log_pdf)
    return z, weights, tail


def outage_quadrature(cfg, *, derived=None, interp=None, rf_only=False):
    """Outage probability by direct averaging over the interference power."""
    if cfg.gamma_th <= 0:
        return 0.0
    if not rf_only:
        if derived is None:
            derived = dgg_derive(cfg.fso)
        if interp is None:
            interp = FsoCdfInterpolator(cfg.fso, derived=derived)
    z, w, p_lo = _interference_log_nodes(cfg)
    sf_rf = 1.0 - rf_cdf_best(cfg.rf, z * cfg.gamma_th)
    if rf_only:
        sf_fso = np.ones_like(z)
    else:
        sf_fso = interp.sf(z * cfg.gamma_th, mu_r=cfg.fso.mu_r)
    # below the lower node the links survive essentially surely
    survive = float(np.sum(w * sf_rf * sf_fso)) + p_lo
    return _clamp_probability(1.0 - survive, "outage probability")


# ---------------------------------------------------------------------------
# achievable sum rate
# ---------------------------------------------------------------------------


def asr_coefficients(cfg, *, delta=1.0, derived=None):
    if derived is None:
        derived = dgg_derive(cfg.fso)
    d = derived
    if abs(d.y - round(d.y)) > 1e-9:
        raise ValueError("closed forms need an integer ladder order y; "
                         f"got y = {d.y}")
    if delta <= 0:
        raise ValueError("delta must be positive")
    y = int(round(d.y))
    lam_i, m1n = _interference_scale(cfg)
    a1, b0, l_count = rf_coefficients(cfg.rf)
    b3 = b0 / (lam_i * delta)
    max_l = int(l_count.max())
    a3 = np.zeros((a1.size, max_l))
    for i in range(a1.size):
        for l in range(int(l_count[i])):
            a3[i, l] = a1[i] * math.exp(-math.lgamma(l + 1) - math.lgamma(m1n))

    zero_ladder = tuple(_ladder(y, 0.0))
    tau13 = zero_ladder + tuple(_ladder(y, 1.0 - m1n)) + d.tau3 + (1.0,)
    tau14 = d.tau4 + (0.0,) + zero_ladder

    log_c_t1 = (d.log_d4 + 0.5 * (1.0 - d.y) * _LN_2PI
                + (m1n - 0.5) * math.log(d.y) - math.lgamma(m1n))
    log_r2_arg = (d.log_d5 + d.y * (math.log(d.y / lam_i) - math.log(cfg.fso.mu_r))
                  - d.y * math.log(delta))
    log_r2_pref = log_c_t1 + (1.0 - d.y) * _LN_2PI - math.log(2.0 * delta * _LN2)

    return AsrCoefficients(
        a3=a3,
        b3=b3,
        tau9=(-1.0, -m1n, 0.0),
        tau10=(0.0, -1.0, -1.0),
        tau11=(0.0, 1.0 - m1n, 1.0),
        tau12=(0.0, 0.0, 0.0),
        tau13=tau13,
        tau14=tau14,
        delta=delta,
        l_count=l_count,
        a1=a1,
        log_b3=np.log(b3),
        log_r2_arg=log_r2_arg,
        log_r2_pref=log_r2_pref,
        m1n=m1n,
    )


def _rate_g_specs(l, m1n):
    """The two rate-integral contour specs for series index l."""
    g1 = MeijerGSpec(m=3, n=2, p=3, q=3,
                     a=(-l - 1.0, -l - m1n, -l + 0.0),
                     b=(0.0, -l - 1.0, -l - 1.0))
    g2 = MeijerGSpec(m=3, n=2, p=3, q=3,
                     a=(-l + 0.0, 1.0 - l - m1n, 1.0 - l),
                     b=(0.0, -l + 0.0, -l + 0.0))
    return g1, g2


def _r2_spec(cfg, derived, m1n):
    d = derived
    y = int(round(d.y))
    zero_ladder = _ladder(y, 0.0)
    a_row = tuple(zero_ladder) + tuple(_ladder(y, 1.0 - m1n)) + d.tau3 + (1.0,)
    b_row = d.tau4 + (0.0,) + tuple(zero_ladder)
    n_upper = 2 * y
    m_lower = len(d.tau4) + 1 + y
    return MeijerGSpec(m=m_lower, n=n_upper, p=len(a_row), q=len(b_row),
                       a=a_row, b=b_row)


def _r1_exact(cfg, coeffs, policy):
    total = 0.0
    m1n = coeffs.m1n
    for i in range(coeffs.a1.size):
        if coeffs.a1[i] == 0:
            continue
        sign = 1.0 if coeffs.a1[i] >= 0 else -1.0
        log_a = math.log(abs(coeffs.a1[i]))
        for l in range(int(coeffs.l_count[i])):
            g1, g2 = _rate_g_specs(l, m1n)
            base = (log_a - math.lgamma(l + 1) - math.lgamma(m1n)
                    - math.log(2.0 * _LN2))
            v1 = meijer_g(g1, policy=policy, log_x=coeffs.log_b3[i],
                          log_prefactor=base + (l + 1) * coeffs.log_b3[i]).value
            total += sign * v1
            if l > 0:
                v2 = meijer_g(g2, policy=policy, log_x=coeffs.log_b3[i],
                              log_prefactor=base + math.log(l)
                              + l * coeffs.log_b3[i]).value
                total -= sign * v2
    return total


def asr_exact(cfg, *, delta=1.0, coeffs=None, derived=None,
              policy=DEFAULT_POLICY):
    """Closed-form achievable sum rate in bits/s/Hz."""
    if derived is None:
        derived = dgg_derive(cfg.fso)
    if coeffs is None:
        coeffs = asr_coefficients(cfg, delta=delta, derived=derived)
    r1 = _r1_exact(cfg, coeffs, policy)
    spec = _r2_spec(cfg, derived, coeffs.m1n)
    r2 = meijer_g(spec, policy=policy, log_x=coeffs.log_r2_arg,
                  log_prefactor=coeffs.log_r2_pref).value
    return r1 + r2


def _r1_series(cfg, coeffs, policy):
    total = 0.0
    m1n = coeffs.m1n
    for i in range(coeffs.a1.size):
        if coeffs.a1[i] == 0:
            continue
        sign = 1.0 if coeffs.a1[i] >= 0 else -1.0
        log_a = math.log(abs(coeffs.a1[i]))
        for l in range(int(coeffs.l_count[i])):
            g1, g2 = _rate_g_specs(l, m1n)
            base = (log_a - math.lgamma(l + 1) - math.lgamma(m1n)
                    - math.log(2.0 * _LN2))
            v1 = residue_series(g1.factors(), log_x=coeffs.log_b3[i],
                                max_power=l + 0.9, policy=policy,
                                log_prefactor=base + (l + 1) * coeffs.log_b3[i]).value
            total += sign * v1
            if l > 0:
                v2 = residue_series(g2.factors(), log_x=coeffs.log_b3[i],
                                    max_power=l - 0.1, policy=policy,
                                    log_prefactor=base + math.log(l)
                                    + l * coeffs.log_b3[i]).value
                total -= sign * v2
    return total


def asr_asymptotic(cfg, *, delta=1.0, coeffs=None, derived=None,
                   policy=DEFAULT_POLICY):
    """High-SNR pole expansion of the achievable sum rate."""
    if derived is None:
        derived = dgg_derive(cfg.fso)
    if coeffs is None:
        coeffs = asr_coefficients(cfg, delta=delta, derived=derived)
    r1 = _r1_series(cfg, coeffs, policy)
    spec = _r2_spec(cfg, derived, coeffs.m1n)
    r2 = residue_series(spec.factors(), log_x=coeffs.log_r2_arg,
                        max_power=3.5 / derived.y, policy=policy,
                        log_prefactor=coeffs.log_r2_pref).value
    return r1 + r2


def asr_quadrature(cfg, *, derived=None, interp=None, gamma_i_fixed=None):
    """Sum rate by direct integration of the two hop survival functions.

    With ``gamma_i_fixed`` the interference power is pinned to that value
    instead of being averaged out (an interference-free surrogate used by
    oracle tests).
    """
    if derived is None:
        derived = dgg_derive(cfg.fso)
    if interp is None:
        interp = FsoCdfInterpolator(cfg.fso, derived=derived)

    if gamma_i_fixed is not None:
        z = np.array([float(gamma_i_fixed)])
        w = np.array([1.0])
    else:
        z, w, _ = _interference_log_nodes(cfg)

    def sf_rf_eff(g):
        return float(np.sum(w * (1.0 - rf_cdf_best(cfg.rf, z * g))))

    def sf_fso_eff(g):
        return float(np.sum(w * interp.sf(z * g, mu_r=cfg.fso.mu_r)))

    def rate_term(sf_eff):
        def integrand(u):
            g = math.exp(u)
            return sf_eff(g) * g / (1.0 + g)
        with warnings.catch_warnings():
            # the integrand spans hundreds of log-units and is zero over
            # most of them; the roundoff report is expected and harmless
            warnings.simplefilter("ignore", IntegrationWarning)
            val, _ = quad(integrand, -40.0, 120.0, limit=400,
                          epsabs=1e-11, epsrel=1e-9)
        return val / (2.0 * _LN2)

    return rate_term(sf_rf_eff) + rate_term(sf_fso_eff)
