"""Exact pure-dephasing dynamics.

Populations are conserved; the coherence decays as rho10(t) = rho10(0)
exp(-Gamma(t)) with

    Gamma(t) = int_0^inf J_eff(w) (1 - cos wt) / w^2 dw,

and the instantaneous dephasing rate gamma(t) = dGamma/dt is the matching
sine-kernel integral.  A finite bath of N modes gives the same expression
as a discrete sum, periodic or almost periodic in t.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, TextIO

import numpy as np

from . import quad as _quad
from .errors import DivergenceError
from .spectral import BathSpec, SpectralDensity, coth, effective_fn, effective_lowfreq, evaluate

__all__ = [
    "QubitState",
    "FiniteBath",
    "DephasingCurve",
    "gamma_of_t",
    "dephasing_rate",
    "evolve",
    "finite_bath_gamma",
    "sample_bath",
    "dephasing_curve",
    "write_curve_csv",
]

_TRACE_TOL = 1e-12


@dataclass(frozen=True)
class QubitState:
    """Qubit density matrix in the sigma_z eigenbasis.

    rho11 and rho00 are the populations, rho10 the coherence; the 01
    element is implicitly conj(rho10).
    """

    rho11: float
    rho00: float
    rho10: complex

    def __post_init__(self):
        if self.rho11 < -_TRACE_TOL or self.rho00 < -_TRACE_TOL:
            raise ValueError("populations must be nonnegative")
        if abs(self.rho11 + self.rho00 - 1.0) > _TRACE_TOL:
            raise ValueError("trace must equal 1")
        if abs(self.rho10) ** 2 > self.rho11 * self.rho00 + 1e-12:
            raise ValueError("coherence violates positivity: |rho10|^2 <= rho11 rho00")

    def as_matrix(self) -> np.ndarray:
        return np.array([[self.rho11, self.rho10],
                         [np.conjugate(self.rho10), self.rho00]])


@dataclass(frozen=True)
class FiniteBath:
    """Discrete bath: mode frequencies and squared couplings |g_k|^2."""

    omegas: tuple[float, ...]
    g_abs2: tuple[float, ...]

    def __post_init__(self):
        if len(self.omegas) == 0 or len(self.omegas) != len(self.g_abs2):
            raise ValueError("need equal, nonzero numbers of frequencies and couplings")
        if any(w <= 0.0 for w in self.omegas):
            raise ValueError("mode frequencies must be positive")
        if any(g < 0.0 for g in self.g_abs2):
            raise ValueError("squared couplings must be nonnegative")


@dataclass(frozen=True)
class DephasingCurve:
    """Gamma(t) sampled on an increasing time grid."""

    times: np.ndarray
    gamma_values: np.ndarray
    bath: BathSpec | None = None
    tol: float = 0.0

    def __post_init__(self):
        t = np.asarray(self.times, dtype=float)
        g = np.asarray(self.gamma_values, dtype=float)
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "gamma_values", g)
        if t.ndim != 1 or t.size < 1 or g.shape != t.shape:
            raise ValueError("times and gamma_values must be matching 1-d arrays")
        if t[0] < 0.0 or np.any(np.diff(t) <= 0.0):
            raise ValueError("times must be nonnegative and strictly increasing")
        if np.any(g < -1e-12):
            raise ValueError("decoherence exponent must be nonnegative")
        if t[0] == 0.0 and abs(g[0]) > 1e-12:
            raise ValueError("Gamma(0) must vanish")

    @property
    def coherence(self) -> np.ndarray:
        return np.exp(-self.gamma_values)


def _kernel_form(b: BathSpec) -> tuple[Callable[[float], float], float, float, float]:
    """Rewrite J_eff (1 - cos wt)/w^2 as f(w) (1 - cos wt)/w^s with s in (0, 3).

    With J_eff = w^g h(w) the natural choice is s = 2 - g, f = h.  When g > 1.5
    that power would leave s too close to (or below) zero, so whole powers of w
    are folded back into f, which shifts the known Taylor data accordingly.
    """
    lf = effective_lowfreq(b)
    g = lf.exponent
    if g <= -1.0:
        raise DivergenceError(
            "Gamma(t) diverges: J_eff(w)/w^2 is not integrable near w = 0 "
            "(flicker / 1-f-type spectrum); regularize the low-frequency power "
            "J ~ w^eps, eps > 0, and retry")
    s = 2.0 - g
    shift = 0
    while s < 0.5:
        s += 1.0
        shift += 1
    power = s - 2.0  # f(w) = J_eff(w) * w**power
    j_eff = effective_fn(b)
    if power == 0.0:
        f = j_eff
    else:
        def f(w: float) -> float:
            return j_eff(w) * w**power

    if shift == 0:
        f0, f0p = lf.coeff, lf.slope
    elif shift == 1:
        f0, f0p = 0.0, lf.coeff
    else:
        f0, f0p = 0.0, 0.0
    return f, s, f0, f0p


def _default_cfg(b: BathSpec, cfg: _quad.QuadConfig | None) -> _quad.QuadConfig:
    if cfg is not None:
        return cfg
    return _quad.QuadConfig(omega_c=b.density.omega_scale)


def gamma_of_t(b: BathSpec, t: float, cfg: _quad.QuadConfig | None = None) -> float:
    """Decoherence exponent Gamma(t) >= 0."""
    if t < 0.0:
        raise ValueError("t must be nonnegative")
    if t == 0.0:
        return 0.0
    f, s, f0, f0p = _kernel_form(b)
    cfg = _default_cfg(b, cfg)
    value = _quad.kernel_integral(f, t, s, cfg, f0=f0, f0_prime=f0p)
    # Roundoff may leave a tiny negative residue on an exact zero.
    return value if value > 0.0 else 0.0


def dephasing_rate(b: BathSpec, t: float, cfg: _quad.QuadConfig | None = None) -> float:
    """Instantaneous rate gamma(t) = dGamma/dt = int J_eff(w) sin(wt)/w dw.

    May transiently be negative (recoherence); only the long-time limit is
    fixed, so no clamping is applied.
    """
    if t < 0.0:
        raise ValueError("t must be nonnegative")
    if t == 0.0:
        return 0.0
    f, s, f0, _ = _kernel_form(b)
    cfg = _default_cfg(b, cfg)
    return _quad.sine_kernel_integral(f, t, s - 1.0, cfg, f0=f0 if f0 != 0.0 else None)


def evolve(
    rho0: QubitState,
    b: BathSpec,
    t: float,
    omega0: float = 0.0,
    picture: str = "interaction",
    cfg: _quad.QuadConfig | None = None,
) -> QubitState:
    """Evolved qubit state at time t.

    Populations stay fixed; the coherence picks up exp(-Gamma(t)), plus the
    deterministic phase exp(-i omega0 t) in the Schroedinger picture.
    """
    if picture not in ("interaction", "schroedinger"):
        raise ValueError("picture must be 'interaction' or 'schroedinger'")
    factor = math.exp(-gamma_of_t(b, t, cfg))
    rho10 = rho0.rho10 * factor
    if picture == "schroedinger":
        rho10 *= complex(math.cos(omega0 * t), -math.sin(omega0 * t))
    return QubitState(rho0.rho11, rho0.rho00, rho10)


def finite_bath_gamma(fb: FiniteBath, beta: float, t: float) -> float:
    """Exact discrete-bath exponent sum_k |g_k|^2 coth(beta w_k/2) (1-cos w_k t)/w_k^2."""
    if not beta > 0.0:
        raise ValueError("beta must be positive (math.inf for zero temperature)")
    w = np.asarray(fb.omegas)
    g2 = np.asarray(fb.g_abs2)
    kernel = 2.0 * np.sin(0.5 * w * t) ** 2 / w**2
    if math.isinf(beta):
        return float(np.sum(g2 * kernel))
    return float(np.sum(g2 * coth(0.5 * beta * w) * kernel))


def sample_bath(d: SpectralDensity, n_modes: int, omega_max: float) -> FiniteBath:
    """Midpoint-rule discretization: w_k = (k - 1/2) d, |g_k|^2 = J(w_k) d."""
    if n_modes < 1:
        raise ValueError("n_modes must be at least 1")
    if not omega_max > 0.0:
        raise ValueError("omega_max must be positive")
    delta = omega_max / n_modes
    w = (np.arange(n_modes) + 0.5) * delta
    g2 = evaluate(d, w) * delta
    return FiniteBath(tuple(float(x) for x in w), tuple(float(x) for x in g2))


def dephasing_curve(b: BathSpec, times, cfg: _quad.QuadConfig | None = None) -> DephasingCurve:
    """Gamma(t) over a time grid, evaluated point by point."""
    cfg = _default_cfg(b, cfg)
    t = np.asarray(times, dtype=float)
    values = np.array([gamma_of_t(b, float(ti), cfg) for ti in t])
    return DephasingCurve(t, values, bath=b, tol=cfg.rel_tol)


def write_curve_csv(b: BathSpec, times, fh: TextIO, cfg: _quad.QuadConfig | None = None) -> None:
    """Write `t,gamma,abs_coherence,rate` rows, 17 significant digits, LF endings."""
    cfg = _default_cfg(b, cfg)
    fh.write("t,gamma,abs_coherence,rate\n")
    for t in np.asarray(times, dtype=float):
        g = gamma_of_t(b, float(t), cfg)
        r = dephasing_rate(b, float(t), cfg)
        fh.write(f"{t:.17g},{g:.17g},{math.exp(-g):.17g},{r:.17g}\n")
