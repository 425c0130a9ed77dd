"""Exact pure-dephasing decoherence of a qubit in a bosonic thermal bath.

The coherence decays as rho10(t) = rho10(0) exp(-Gamma(t)) with Gamma
determined entirely by the bath spectral density and temperature.  This
package computes the exact Gamma(t) and dephasing rate, classifies the
long-time decoherence law from the low-frequency behaviour of the
effective spectral density, verifies the asymptotic quantum-regression
property for Ohmic baths, and certifies whether sampled decay curves are
representable by finite exponential sums (semigroup embeddings).
"""

from .asymptotics import (
    AsymptoticLaw,
    ConstantEstimate,
    ResidualReport,
    coherence_law,
    estimate_constant,
    predict_law,
    residual_report,
)
from .dynamics import (
    DephasingCurve,
    FiniteBath,
    QubitState,
    dephasing_curve,
    dephasing_rate,
    evolve,
    finite_bath_gamma,
    gamma_of_t,
    sample_bath,
    write_curve_csv,
)
from .embedfit import ExpSumModel, ExpSumTerm, FitReport, certify_curve, fit_exp_sum
from .errors import AccuracyError, DivergenceError, RegimeError
from .qrf import MultiTimeSpec, QrfCheck, QrfReport, lhs_correlator_exponent, qrf_check, rhs_product_exponent
from .quad import (
    EULER_GAMMA,
    QuadConfig,
    cosine_integral,
    kernel_integral,
    sine_integral,
    sine_kernel_integral,
    universal_constant,
    universal_moment,
)
from .spectral import (
    BathSpec,
    EffectiveAtZero,
    LowFrequency,
    Regime,
    RegimeClass,
    SpectralDensity,
    a_const,
    alpha_const,
    classify,
    coth,
    effective,
    effective_at_zero,
    effective_lowfreq,
    evaluate,
    gamma0,
    gamma_infinity,
)

__version__ = "0.1.0"
