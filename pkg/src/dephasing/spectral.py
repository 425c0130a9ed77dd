"""Bath spectral densities, the effective (temperature-dressed) density,
low-frequency analysis, and the closed-form decoherence constants.

The long-time behaviour of the decoherence exponent is controlled entirely
by the effective density J_eff(w) = J(w) coth(beta w / 2) near w = 0.  Every
model here exposes its low-frequency expansion

    J_eff(w) = w^g (c + d w + O(w^2)),

from which the regime classification and all constants follow:

    g < 0   superexponential decay  exp(-A t^(1-g))
    g = 0   exponential             exp(-G0 t - alpha ln t)
    0<g<1   subexponential power    exp(-A t^(1-g))
    g = 1   power law               t^(-alpha)
    g > 1   partial decoherence     exp(-G_inf)
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import integrate
from scipy.interpolate import PchipInterpolator

from .errors import AccuracyError, DivergenceError, RegimeError
from .quad import universal_constant

__all__ = [
    "OHMIC_EXP",
    "DRUDE_LORENTZ",
    "POWER_LAW",
    "TABULATED",
    "SpectralDensity",
    "BathSpec",
    "RegimeClass",
    "Regime",
    "coth",
    "evaluate",
    "effective",
    "effective_fn",
    "effective_lowfreq",
    "effective_at_zero",
    "EffectiveAtZero",
    "LowFrequency",
    "classify",
    "gamma0",
    "alpha_const",
    "gamma_infinity",
    "a_const",
]

OHMIC_EXP = "ohmic_exp"
DRUDE_LORENTZ = "drude_lorentz"
POWER_LAW = "power_law"
TABULATED = "tabulated"

_KINDS = (OHMIC_EXP, DRUDE_LORENTZ, POWER_LAW, TABULATED)

_JSON_KEYS = {"kind", "omega_scale", "exponent", "coupling2", "table", "lowfreq"}


def coth(x):
    """coth(x) for x > 0, with the Laurent form 1/x + x/3 - x^3/45 below
    x = 5e-4 (i.e. beta * omega < 1e-3) where the direct formula loses digits."""
    x = np.asarray(x, dtype=float)
    small = x < 5e-4
    x_large = np.where(small, 1.0, x)
    x_small = np.where(small, x, 1.0)
    with np.errstate(divide="ignore"):
        out = np.where(small, 1.0 / x_small + x_small / 3.0 - x_small**3 / 45.0,
                       1.0 / np.tanh(x_large))
    if out.ndim == 0:
        return float(out)
    return out


@dataclass(frozen=True)
class SpectralDensity:
    """Tagged bath spectral density model J(w) with a known low-frequency power.

    Built-in kinds (lam2 is the dimensionless squared coupling ``coupling2``):

        ohmic_exp      J(w) = lam2 * w exp(-w/Omega)
        drude_lorentz  J(w) = lam2 * w Omega^2 / (w^2 + Omega^2)
        power_law      J(w) = lam2 * 2 Omega^(1-g) w^g exp(-w/Omega)
        tabulated      monotone cubic through the grid, lam2-scaled, with the
                       declared law c w^g below the grid and an exponential
                       tail J(w_max) exp(-(w - w_max)/Omega) beyond it
    """

    kind: str
    omega_scale: float
    exponent: float = 1.0
    coupling2: float = 1.0
    table: tuple[tuple[float, float], ...] | None = None
    lowfreq: tuple[float, float] | None = None

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ValueError(f"unknown spectral density kind {self.kind!r}")
        if not self.omega_scale > 0.0:
            raise ValueError("omega_scale must be positive")
        if not self.coupling2 > 0.0:
            raise ValueError("coupling2 must be positive")
        if not self.exponent > -1.0:
            raise ValueError("low-frequency exponent must exceed -1")
        if self.kind in (OHMIC_EXP, DRUDE_LORENTZ) and self.exponent != 1.0:
            raise ValueError(f"{self.kind} has exponent fixed to 1")
        if self.kind == TABULATED:
            if self.table is None or len(self.table) < 2:
                raise ValueError("tabulated density needs at least two grid points")
            if self.lowfreq is None:
                raise ValueError("tabulated density must declare its (exponent, coeff) low-frequency law")
            ws = [w for w, _ in self.table]
            js = [j for _, j in self.table]
            if ws[0] < 0.0 or any(b <= a for a, b in zip(ws, ws[1:])):
                raise ValueError("table frequencies must be nonnegative and strictly increasing")
            if any(j < 0.0 for j in js):
                raise ValueError("table values must be nonnegative")
            g, c = self.lowfreq
            if not (g > -1.0 and c > 0.0):
                raise ValueError("declared low-frequency law needs exponent > -1 and coeff > 0")
            if g != self.exponent:
                raise ValueError("exponent field must match the declared low-frequency law")
        elif self.table is not None or (self.lowfreq is not None):
            raise ValueError(f"table/lowfreq are only valid for kind {TABULATED!r}")

    # -- constructors ------------------------------------------------------

    @classmethod
    def ohmic_exp(cls, omega_scale: float, coupling2: float = 1.0) -> "SpectralDensity":
        return cls(OHMIC_EXP, omega_scale, 1.0, coupling2)

    @classmethod
    def drude_lorentz(cls, omega_scale: float, coupling2: float = 1.0) -> "SpectralDensity":
        return cls(DRUDE_LORENTZ, omega_scale, 1.0, coupling2)

    @classmethod
    def power_law(cls, omega_scale: float, exponent: float, coupling2: float = 1.0) -> "SpectralDensity":
        return cls(POWER_LAW, omega_scale, exponent, coupling2)

    @classmethod
    def tabulated(cls, table, lowfreq, omega_scale: float, coupling2: float = 1.0) -> "SpectralDensity":
        table = tuple((float(w), float(j)) for w, j in table)
        lowfreq = (float(lowfreq[0]), float(lowfreq[1]))
        return cls(TABULATED, omega_scale, lowfreq[0], coupling2, table, lowfreq)

    @classmethod
    def from_dict(cls, data: dict) -> "SpectralDensity":
        """Strict JSON-object constructor; unknown keys are rejected."""
        if not isinstance(data, dict):
            raise ValueError("spectral density spec must be a JSON object")
        unknown = set(data) - _JSON_KEYS
        if unknown:
            raise ValueError(f"unknown spectral density keys: {sorted(unknown)}")
        if "kind" not in data or "omega_scale" not in data:
            raise ValueError("spectral density spec requires 'kind' and 'omega_scale'")
        kind = data["kind"]
        omega_scale = float(data["omega_scale"])
        coupling2 = float(data.get("coupling2", 1.0))
        if kind == TABULATED:
            if "table" not in data or "lowfreq" not in data:
                raise ValueError("tabulated spec requires 'table' and 'lowfreq'")
            d = cls.tabulated(data["table"], data["lowfreq"], omega_scale, coupling2)
            if "exponent" in data and float(data["exponent"]) != d.exponent:
                raise ValueError("exponent conflicts with the declared low-frequency law")
            return d
        if "table" in data or "lowfreq" in data:
            raise ValueError("table/lowfreq are only valid for kind 'tabulated'")
        exponent = float(data.get("exponent", 1.0))
        return cls(kind, omega_scale, exponent, coupling2)

    def to_dict(self) -> dict:
        out = {"kind": self.kind, "omega_scale": self.omega_scale,
               "exponent": self.exponent, "coupling2": self.coupling2}
        if self.kind == TABULATED:
            out["table"] = [list(p) for p in self.table]
            out["lowfreq"] = list(self.lowfreq)
        return out

    def __call__(self, omega):
        return evaluate(self, omega)


@lru_cache(maxsize=64)
def _interpolator(d: SpectralDensity) -> PchipInterpolator:
    ws = np.array([w for w, _ in d.table])
    js = np.array([j for _, j in d.table])
    return PchipInterpolator(ws, js, extrapolate=False)


def _lowfreq_of_density(d: SpectralDensity) -> tuple[float, float, float]:
    """Expansion J(w) = w^g (c + d1 w + O(w^2)) near w = 0."""
    lam2, om = d.coupling2, d.omega_scale
    if d.kind == OHMIC_EXP:
        return 1.0, lam2, -lam2 / om
    if d.kind == DRUDE_LORENTZ:
        return 1.0, lam2, 0.0
    if d.kind == POWER_LAW:
        k = 2.0 * lam2 * om ** (1.0 - d.exponent)
        return d.exponent, k, -k / om
    # Tabulated: below the first grid point the declared law c w^g is exact
    # by the extrapolation convention, so the subleading slope vanishes.
    g, c = d.lowfreq
    return g, c * lam2, 0.0


def evaluate(d: SpectralDensity, omega):
    """J(omega) for omega >= 0 (scalar or array)."""
    arr = np.asarray(omega, dtype=float)
    if np.any(arr < 0.0):
        raise ValueError("spectral density is defined for omega >= 0")
    lam2, om = d.coupling2, d.omega_scale
    if d.kind == OHMIC_EXP:
        out = lam2 * arr * np.exp(-arr / om)
    elif d.kind == DRUDE_LORENTZ:
        out = lam2 * arr * om**2 / (arr**2 + om**2)
    elif d.kind == POWER_LAW:
        g = d.exponent
        with np.errstate(divide="ignore"):
            out = lam2 * 2.0 * om ** (1.0 - g) * np.power(arr, g) * np.exp(-arr / om)
    else:
        w0, w_max = d.table[0][0], d.table[-1][0]
        j_max = d.table[-1][1] * lam2
        g, c = d.lowfreq
        interp = _interpolator(d)
        with np.errstate(divide="ignore"):
            below = c * lam2 * np.power(arr, g)
        inside = lam2 * interp(np.clip(arr, w0, w_max))
        beyond = j_max * np.exp(-(arr - w_max) / om)
        out = np.where(arr < w0, below, np.where(arr > w_max, beyond, inside))
    if out.ndim == 0:
        return float(out)
    return out


@dataclass(frozen=True)
class BathSpec:
    """Inverse temperature plus a spectral density; beta = inf selects the
    zero-temperature kernel (no coth dressing)."""

    beta: float
    density: SpectralDensity

    def __post_init__(self):
        if not self.beta > 0.0:
            raise ValueError("beta must be positive (use math.inf for zero temperature)")

    @property
    def zero_temperature(self) -> bool:
        return math.isinf(self.beta)

    @classmethod
    def from_dict(cls, data: dict) -> "BathSpec":
        if not isinstance(data, dict):
            raise ValueError("bath spec must be a JSON object")
        unknown = set(data) - {"beta", "density"}
        if unknown:
            raise ValueError(f"unknown bath keys: {sorted(unknown)}")
        if "beta" not in data or "density" not in data:
            raise ValueError("bath spec requires 'beta' and 'density'")
        beta = data["beta"]
        if isinstance(beta, str):
            if beta.lower() not in ("inf", "infinity"):
                raise ValueError(f"beta must be a positive number or 'inf', got {beta!r}")
            beta = math.inf
        return cls(float(beta), SpectralDensity.from_dict(data["density"]))

    def to_dict(self) -> dict:
        return {"beta": "inf" if self.zero_temperature else self.beta,
                "density": self.density.to_dict()}


def effective(b: BathSpec, omega):
    """Effective spectral density J(w) coth(beta w / 2); plain J at beta = inf.

    Defined for omega > 0; the w -> 0 limit is served by effective_at_zero.
    """
    arr = np.asarray(omega, dtype=float)
    if np.any(arr <= 0.0):
        raise ValueError("effective density needs omega > 0; use effective_at_zero for the limit")
    j = evaluate(b.density, arr)
    if b.zero_temperature:
        return j
    return j * coth(0.5 * b.beta * arr)


def effective_fn(b: BathSpec):
    """Scalar closure w -> J_eff(w), cheap enough for pointwise quadrature."""
    d = b.density
    lam2, om = d.coupling2, d.omega_scale
    if d.kind == OHMIC_EXP:
        def j(w):
            return lam2 * w * math.exp(-w / om)
    elif d.kind == DRUDE_LORENTZ:
        om2 = om * om

        def j(w):
            return lam2 * w * om2 / (w * w + om2)
    elif d.kind == POWER_LAW:
        g = d.exponent
        k = 2.0 * lam2 * om ** (1.0 - g)

        def j(w):
            return k * w**g * math.exp(-w / om)
    else:
        def j(w):
            return float(evaluate(d, w))
    if b.zero_temperature:
        return j
    half_beta = 0.5 * b.beta

    def j_eff(w):
        x = half_beta * w
        c = (1.0 / x + x / 3.0 - x**3 / 45.0) if x < 5e-4 else 1.0 / math.tanh(x)
        return j(w) * c

    return j_eff


@dataclass(frozen=True)
class LowFrequency:
    """J_eff(w) = w^exponent (coeff + slope * w + O(w^2)) near w = 0."""

    exponent: float
    coeff: float
    slope: float


def effective_lowfreq(b: BathSpec) -> LowFrequency:
    g, c, d1 = _lowfreq_of_density(b.density)
    if b.zero_temperature:
        return LowFrequency(g, c, d1)
    # w^g (c + d1 w) * coth(beta w/2) = w^(g-1) * (2/beta) (c + d1 w + O(w^2))
    return LowFrequency(g - 1.0, 2.0 * c / b.beta, 2.0 * d1 / b.beta)


@dataclass(frozen=True)
class EffectiveAtZero:
    value: float
    derivative: float | None


def effective_at_zero(b: BathSpec) -> EffectiveAtZero:
    """Limits J_eff(0) and J_eff'(0); derivative None when it does not exist.

    J_eff(0) is +inf for low-frequency powers below Ohmic at finite
    temperature (exponent of J below 1), never silently truncated.
    """
    lf = effective_lowfreq(b)
    g, c, d1 = lf.exponent, lf.coeff, lf.slope
    if g < 0.0:
        return EffectiveAtZero(math.inf, None)
    if g == 0.0:
        return EffectiveAtZero(c, d1)
    if g < 1.0:
        return EffectiveAtZero(0.0, None)
    if g == 1.0:
        return EffectiveAtZero(0.0, c)
    return EffectiveAtZero(0.0, 0.0)


class RegimeClass(enum.Enum):
    PARTIAL = "Partial"
    EXPONENTIAL = "Exponential"
    SUBEXPONENTIAL_POWER = "SubexponentialPower"
    POWER_LAW = "PowerLaw"
    SUPEREXPONENTIAL = "Superexponential"


@dataclass(frozen=True)
class RegimeConstants:
    gamma0: float | None = None
    alpha: float | None = None
    gamma_infinity: float | None = None
    big_a: float | None = None
    delta: float | None = None
    constant_estimable: bool = False


@dataclass(frozen=True)
class Regime:
    regime_class: RegimeClass
    gamma_lowfreq: float
    constants: RegimeConstants


_FLICKER_HINT = (
    "the decoherence exponent diverges: J_eff(w)/w^2 is not integrable near w = 0 "
    "(flicker / 1-f-type spectrum); regularize the low-frequency power, "
    "J ~ w^eps with small eps > 0, and retry"
)


def _check_convergent(b: BathSpec) -> LowFrequency:
    lf = effective_lowfreq(b)
    if lf.exponent <= -1.0:
        raise DivergenceError(_FLICKER_HINT)
    return lf


def classify(b: BathSpec, quad_tol: float = 1e-10) -> Regime:
    """Decoherence regime of a bath, with its computable constants attached.

    The class is a pure function of the low-frequency exponent of J_eff.
    quad_tol only matters for the partial regime, whose plateau constant
    requires a quadrature.
    """
    lf = _check_convergent(b)
    g, c = lf.exponent, lf.coeff
    if g < 0.0:
        return Regime(RegimeClass.SUPEREXPONENTIAL, g,
                      RegimeConstants(big_a=c * universal_constant(2.0 - g), delta=g))
    if g == 0.0:
        return Regime(RegimeClass.EXPONENTIAL, g,
                      RegimeConstants(gamma0=0.5 * math.pi * c, alpha=lf.slope,
                                      constant_estimable=True))
    if g < 1.0:
        return Regime(RegimeClass.SUBEXPONENTIAL_POWER, g,
                      RegimeConstants(big_a=c * universal_constant(2.0 - g), delta=g,
                                      constant_estimable=True))
    if g == 1.0:
        return Regime(RegimeClass.POWER_LAW, g,
                      RegimeConstants(alpha=c, constant_estimable=True))
    return Regime(RegimeClass.PARTIAL, g,
                  RegimeConstants(gamma_infinity=gamma_infinity(b, quad_tol, _checked=True)))


def gamma0(b: BathSpec) -> float:
    """Asymptotic dephasing rate (pi/2) J_eff(0) in the exponential regime."""
    lf = _check_convergent(b)
    if lf.exponent != 0.0:
        raise RegimeError("gamma0 exists only in the exponential regime (J_eff(0) finite and positive)")
    return 0.5 * math.pi * lf.coeff


def alpha_const(b: BathSpec) -> float:
    """Logarithm coefficient J_eff'(0) (exponential regime) or the power-law
    exponent (power-law regime)."""
    lf = _check_convergent(b)
    if lf.exponent == 0.0:
        if not math.isfinite(lf.slope):
            raise RegimeError("J_eff'(0) does not exist for this bath")
        return lf.slope
    if lf.exponent == 1.0:
        return lf.coeff
    raise RegimeError("alpha is defined only for the exponential and power-law regimes")


def gamma_infinity(b: BathSpec, quad_tol: float = 1e-10, _checked: bool = False) -> float:
    """Plateau value int_0^inf J_eff(w)/w^2 dw in the partial regime."""
    if not 0 < quad_tol <= 1e-2:
        raise ValueError("quad_tol must lie in (0, 1e-2]")
    if not _checked:
        lf = _check_convergent(b)
        if lf.exponent <= 1.0:
            raise RegimeError("gamma_infinity diverges outside the partial regime")
    om = b.density.omega_scale
    j_eff = effective_fn(b)

    def integrand(w):
        return j_eff(w) / w**2

    v1, e1 = integrate.quad(integrand, 0.0, om, epsabs=1e-14, epsrel=quad_tol / 2, limit=400)
    v2, e2 = integrate.quad(integrand, om, np.inf, epsabs=1e-14, epsrel=quad_tol / 2, limit=400)
    total, err = v1 + v2, e1 + e2
    if err > 2.0 * quad_tol * abs(total) + 1e-13:
        raise AccuracyError("gamma_infinity quadrature missed its tolerance",
                            value=total, estimate=err)
    return total


def a_const(b: BathSpec) -> float:
    """Coefficient of t^(1-delta) in the sub/superexponential regimes:
    c_eff times the universal (1 - cos u)/u^(2-delta) integral."""
    lf = _check_convergent(b)
    g = lf.exponent
    if g == 0.0 or not -1.0 < g < 1.0:
        raise RegimeError("the power-law-in-exponent coefficient requires a "
                          "sub- or superexponential regime")
    if not (math.isfinite(lf.coeff) and lf.coeff > 0.0):
        raise RegimeError("low-frequency coefficient must be finite and positive")
    return lf.coeff * universal_constant(2.0 - g)
