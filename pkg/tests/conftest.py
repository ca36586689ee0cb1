"""Shared fixtures: the two turbulence parameter sets used throughout."""

import warnings

import pytest

from rfso.channels import (
    FsoLinkParams,
    InterferenceParams,
    RfLinkParams,
    SystemConfig,
    RationalApproximationWarning,
)

XI_STRONG = 1.2765675571131119
XI_WEAK = 2.5131380647586896


def fso_moderate(mu_r=10.0, r=1, xi=XI_STRONG):
    return FsoLinkParams(alpha1=2.1, alpha2=2.0, beta1=2.0, beta2=1.0,
                         omega1=1.0676, omega2=0.9, xi=xi, mu_r=mu_r, r=r)


def fso_second(mu_r=10.0, r=1, xi=XI_WEAK):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RationalApproximationWarning)
        return FsoLinkParams(alpha1=2.169, alpha2=1.0, beta1=1.0, beta2=2.0,
                             omega1=1.5793, omega2=1.0, xi=xi, mu_r=mu_r, r=r)


def system(snr_db=10.0, *, fso_kind="moderate", r=1, m=2, k_users=2,
           m_i=1.0, n_interferers=2, gamma_th=1.0):
    snr = 10.0 ** (snr_db / 10.0)
    maker = fso_moderate if fso_kind == "moderate" else fso_second
    return SystemConfig(rf=RfLinkParams(m=m, avg_snr=snr, n_users=k_users),
                        fso=maker(mu_r=snr, r=r),
                        interference=InterferenceParams(
                            m_i=m_i, omega_i=1.0, n_interferers=n_interferers),
                        gamma_th=gamma_th)


@pytest.fixture(autouse=True)
def _quiet_rational_warning():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RationalApproximationWarning)
        yield


# one line per acceptance criterion, echoed after the test summary
ACCEPTANCE_LINES = []


def record_criterion(number, name, ok, detail):
    line = f"criterion {number} ({name}): {'PASS' if ok else 'FAIL'} - {detail}"
    ACCEPTANCE_LINES.append(line)
    assert ok, line


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
