"""Shared fixtures and independent closed-form oracles.

The Ohmic exponential-cutoff bath admits exact decoherence exponents
obtained by elementary integration (Matsubara sum of 0.5*ln(1 + t^2/a_n^2)
terms collapsing to a log-sinh):

    beta = inf, Omega = 1:  Gamma(t) = 0.5 ln(1 + t^2)
    beta = 1,   Omega = 1:  Gamma(t) = ln(sinh(pi t)/(pi t)) - 0.5 ln(1 + t^2)

both cross-checked against 40-digit quadrature while these tests were
frozen.  They are used as oracles for the adaptive kernel quadrature,
never computed through it.
"""

import math

import numpy as np
import pytest

from dephasing import BathSpec, QuadConfig, SpectralDensity


def log_sinh(x: float) -> float:
    """ln(sinh x) without overflow for large x."""
    return x - math.log(2.0) + math.log1p(-math.exp(-2.0 * x))


def gamma_ohmic_beta1(t: float) -> float:
    """Exact Gamma(t) for J = w exp(-w), beta = 1."""
    return log_sinh(math.pi * t) - math.log(math.pi * t) - 0.5 * math.log1p(t * t)


def rate_ohmic_beta1(t: float) -> float:
    """Exact dGamma/dt for J = w exp(-w), beta = 1."""
    return math.pi / math.tanh(math.pi * t) - 1.0 / t - t / (1.0 + t * t)


def gamma_ohmic_zero_t(t: float) -> float:
    """Exact Gamma(t) for J = w exp(-w), beta = inf."""
    return 0.5 * math.log1p(t * t)


@pytest.fixture(scope="session")
def ohmic_b1() -> BathSpec:
    return BathSpec(1.0, SpectralDensity.ohmic_exp(1.0))


@pytest.fixture(scope="session")
def drude_b1() -> BathSpec:
    return BathSpec(1.0, SpectralDensity.drude_lorentz(1.0))


@pytest.fixture(scope="session")
def ohmic_zero_t() -> BathSpec:
    return BathSpec(math.inf, SpectralDensity.ohmic_exp(1.0))


@pytest.fixture(scope="session")
def tight_cfg() -> QuadConfig:
    return QuadConfig(omega_c=1.0, rel_tol=1e-12)


@pytest.fixture()
def rng() -> np.random.Generator:
    return np.random.default_rng(20260810)
