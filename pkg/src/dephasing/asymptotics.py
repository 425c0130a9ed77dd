"""Long-time decoherence laws and agreement reports against the exact Gamma(t).

Each regime carries a law of the form

    Gamma(t) ~ G0 t + alpha ln t + A t^p + C,

with only the terms appropriate to the regime present.  The additive
constant C is not available in closed form; it is estimated from the tail
of an exact curve.  In the superexponential regime no constant exists
(the correction is O(t^-delta ln t)) and residuals are reported in
normalized form instead.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import TextIO

import numpy as np

from . import quad as _quad
from .dynamics import DephasingCurve, dephasing_curve
from .errors import RegimeError
from .spectral import BathSpec, Regime, RegimeClass, classify

__all__ = [
    "AsymptoticLaw",
    "ConstantEstimate",
    "ResidualRow",
    "ResidualReport",
    "predict_law",
    "estimate_constant",
    "residual_report",
    "coherence_law",
]


@dataclass(frozen=True)
class AsymptoticLaw:
    """Predicted long-time form of the decoherence exponent."""

    regime: Regime
    gamma0: float | None = None
    alpha: float | None = None
    power_coeff: float | None = None
    power_exponent: float | None = None
    constant: float | None = None
    constant_estimable: bool = False

    def known_terms(self, t):
        """Law value at t excluding the additive constant."""
        t = np.asarray(t, dtype=float)
        out = np.zeros_like(t)
        if self.gamma0:
            out = out + self.gamma0 * t
        if self.alpha:
            with np.errstate(divide="ignore"):
                out = out + self.alpha * np.log(t)
        if self.power_coeff:
            out = out + self.power_coeff * t**self.power_exponent
        if out.ndim == 0:
            return float(out)
        return out

    def law_value(self, t):
        base = self.known_terms(t)
        return base + self.constant if self.constant is not None else base

    def with_constant(self, c: float) -> "AsymptoticLaw":
        if not self.constant_estimable:
            raise RegimeError("this regime has no estimable additive constant")
        return replace(self, constant=float(c))


def predict_law(b: BathSpec, quad_tol: float = 1e-10) -> AsymptoticLaw:
    """Law with every analytically available constant filled in.

    The additive constant stays None for the estimable regimes (use
    estimate_constant); for partial decoherence it is the computed plateau.
    """
    reg = classify(b, quad_tol)
    k = reg.constants
    cls = reg.regime_class
    if cls is RegimeClass.EXPONENTIAL:
        return AsymptoticLaw(reg, gamma0=k.gamma0, alpha=k.alpha, constant_estimable=True)
    if cls is RegimeClass.POWER_LAW:
        return AsymptoticLaw(reg, alpha=k.alpha, constant_estimable=True)
    if cls is RegimeClass.SUBEXPONENTIAL_POWER:
        return AsymptoticLaw(reg, power_coeff=k.big_a, power_exponent=1.0 - k.delta,
                             constant_estimable=True)
    if cls is RegimeClass.SUPEREXPONENTIAL:
        # correction is O(t^-delta ln t); no additive constant exists
        return AsymptoticLaw(reg, power_coeff=k.big_a, power_exponent=1.0 - k.delta)
    return AsymptoticLaw(reg, constant=k.gamma_infinity)


@dataclass(frozen=True)
class ConstantEstimate:
    value: float
    std: float
    n_points: int
    t_lo: float
    t_hi: float


def estimate_constant(
    law: AsymptoticLaw,
    curve: DephasingCurve,
    t_fit: float | None = None,
    t_hi: float | None = None,
) -> ConstantEstimate:
    """Tail-average estimate of the additive constant.

    The window is [t_fit, t_hi]; by default the last 25 percent of the
    grid span.  When only t_fit is given the curve must reach 2 * t_fit so
    the window is a genuine tail.  Also returns the window standard
    deviation of the residual as a convergence diagnostic.
    """
    if not law.constant_estimable:
        raise RegimeError("no additive constant to estimate in this regime")
    t = curve.times
    if t_fit is not None and t_hi is None and t[-1] < 2.0 * t_fit:
        raise ValueError("insufficient grid coverage: curve must reach 2 * t_fit")
    lo = t_fit if t_fit is not None else t[0] + 0.75 * (t[-1] - t[0])
    hi = t_hi if t_hi is not None else t[-1]
    mask = (t >= lo) & (t <= hi)
    if t_fit is None and int(mask.sum()) < 2 and t.size >= 2:
        # sparse grid: the 25-percent tail holds fewer than 2 samples
        lo = float(t[-2])
        mask = t >= lo
    if int(mask.sum()) < 2:
        raise ValueError("insufficient grid coverage: need at least 2 points in the window")
    resid = curve.gamma_values[mask] - law.known_terms(t[mask])
    return ConstantEstimate(float(np.mean(resid)), float(np.std(resid)),
                            int(mask.sum()), float(lo), float(hi))


@dataclass(frozen=True)
class ResidualRow:
    t: float
    exact: float
    law: float
    residual: float
    normalized: float | None = None


@dataclass(frozen=True)
class ResidualReport:
    regime: Regime
    law: AsymptoticLaw
    c_hat: ConstantEstimate | None
    rows: tuple[ResidualRow, ...]

    def to_json_dict(self) -> dict:
        k = self.regime.constants
        constants = {}
        for name, val in (("gamma0", k.gamma0), ("alpha", k.alpha),
                          ("gamma_infinity", k.gamma_infinity),
                          ("A", k.big_a), ("delta", k.delta)):
            if val is not None:
                constants[name] = val
        if self.c_hat is not None:
            constants["c_hat"] = self.c_hat.value
            constants["c_hat_std"] = self.c_hat.std
        out = {
            "regime": self.regime.regime_class.value,
            "gamma_lowfreq": self.regime.gamma_lowfreq,
            "constants": constants,
            "residuals": [
                {k2: v for k2, v in (("t", r.t), ("exact", r.exact), ("law", r.law),
                                     ("residual", r.residual), ("normalized", r.normalized))
                 if v is not None}
                for r in self.rows
            ],
        }
        return out

    def write_csv(self, fh: TextIO) -> None:
        has_norm = any(r.normalized is not None for r in self.rows)
        fh.write("t,exact,law,residual" + (",normalized" if has_norm else "") + "\n")
        for r in self.rows:
            line = f"{r.t:.17g},{r.exact:.17g},{r.law:.17g},{r.residual:.17g}"
            if has_norm:
                line += f",{r.normalized:.17g}" if r.normalized is not None else ","
            fh.write(line + "\n")


def residual_report(
    b: BathSpec,
    times,
    cfg: _quad.QuadConfig | None = None,
    t_fit: float | None = None,
) -> ResidualReport:
    """Exact-versus-law residuals over a time grid (full-decoherence regimes).

    For the superexponential regime the residual is additionally normalized
    by t^-delta ln t, which must stay bounded.
    """
    t = np.asarray(times, dtype=float)
    if t.ndim != 1 or t.size < 2 or np.any(np.diff(t) <= 0.0):
        raise ValueError("times must be an increasing grid with at least 2 points")
    law = predict_law(b)
    if law.regime.regime_class is RegimeClass.PARTIAL:
        raise RegimeError("residual reports apply to full-decoherence regimes only")
    curve = dephasing_curve(b, t, cfg)
    c_hat = None
    if law.constant_estimable:
        c_hat = estimate_constant(law, curve, t_fit=t_fit)
        law = law.with_constant(c_hat.value)
    rows = []
    delta = law.regime.constants.delta
    for ti, gi in zip(curve.times, curve.gamma_values):
        law_i = float(law.law_value(ti))
        resid = gi - law_i
        norm = None
        if law.regime.regime_class is RegimeClass.SUPEREXPONENTIAL and ti > 1.0:
            norm = resid / (ti ** (-delta) * math.log(ti))
        rows.append(ResidualRow(float(ti), float(gi), law_i, float(resid), norm))
    return ResidualReport(law.regime, law, c_hat, tuple(rows))


def coherence_law(b: BathSpec, t) -> float:
    """Predicted |rho10(t)/rho10(0)| up to a constant factor: exp(-law terms).

    The estimable constant is omitted; the partial-decoherence plateau
    exp(-Gamma_inf) is exact and therefore kept.
    """
    law = predict_law(b)
    value = law.known_terms(t)
    if not law.constant_estimable and law.constant is not None:
        value = value + law.constant
    with np.errstate(over="ignore"):
        out = np.exp(-np.asarray(value, dtype=float))
    if out.ndim == 0:
        return float(out)
    return out
