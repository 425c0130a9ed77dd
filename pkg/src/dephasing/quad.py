"""Oscillatory singular quadrature for (1 - cos wt)/w^s and sin(wt)/w^q kernels.

The central object is ``kernel_integral``, which evaluates

    int_0^inf f(w) (1 - cos wt) / w^s dw,        0 < s < 3,

by splitting at a cutoff w_c: on [0, w_c] the Taylor polynomial
f(0) + f'(0) w is subtracted, the regular remainder is integrated
adaptively, and the subtracted moments are restored through universal
integrals of (1 - cos u)/u^p (closed forms where they exist, the cosine
integral for p = 1).  On [w_c, inf) the non-oscillatory part and the
Fourier-cosine part are integrated separately, the latter with QUADPACK's
cycle-summing Fourier integrator (half-period panels accelerated with the
epsilon algorithm).

All functions are pure; the universal-constant cache is write-once.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable

import numpy as np
from scipy import integrate
from scipy.special import gamma as _gamma

from .errors import AccuracyError, DivergenceError

__all__ = [
    "EULER_GAMMA",
    "QuadConfig",
    "cosine_integral",
    "sine_integral",
    "one_minus_cos",
    "universal_constant",
    "universal_moment",
    "kernel_integral",
    "sine_kernel_integral",
]

EULER_GAMMA = 0.57721566490153286061

# Oscillation budget below which an integrand is treated as non-oscillatory
# and integrated directly instead of through the Fourier splitting.
_OSC_PERIODS = 8.0 * math.pi


@dataclass(frozen=True)
class QuadConfig:
    """Tolerances and the cutoff splitting head from tail.

    ``omega_c`` is the base cutoff; per evaluation it is tightened to
    min(omega_c, 1/t), clamped to [1e-3 * omega_c, omega_c], so the
    Taylor-subtraction region never spans many oscillation periods.
    """

    omega_c: float = 1.0
    rel_tol: float = 1e-10
    max_panels: int = 300

    def __post_init__(self):
        if not self.omega_c > 0.0:
            raise ValueError("omega_c must be positive")
        if not 1e-14 <= self.rel_tol <= 1e-2:
            raise ValueError("rel_tol must lie in [1e-14, 1e-2]")
        if self.max_panels < 10:
            raise ValueError("max_panels must be at least 10")


def one_minus_cos(x):
    """1 - cos(x) as 2 sin^2(x/2); exact to relative rounding for small x."""
    return 2.0 * np.sin(0.5 * np.asarray(x)) ** 2


def _cisi(x: float) -> tuple[float, float]:
    """(Ci(x), Si(x)) for x > 0.

    Power series up to x = 8, complex continued fraction (modified Lentz)
    for the exponential integral of imaginary argument beyond.  Absolute
    accuracy a few 1e-15 over the full range.
    """
    if x <= 8.0:
        x2 = x * x
        s_ci = 0.0
        term = 1.0
        for k in range(1, 80):
            term *= -x2 / ((2 * k - 1) * (2 * k))
            add = term / (2 * k)
            s_ci += add
            if abs(add) < 1e-18 * max(1.0, abs(s_ci)):
                break
        ci = EULER_GAMMA + math.log(x) + s_ci
        si = x
        term = x
        for k in range(1, 80):
            term *= -x2 / ((2 * k) * (2 * k + 1))
            add = term / (2 * k + 1)
            si += add
            if abs(add) < 1e-18 * max(1.0, abs(si)):
                break
        return ci, si
    # E1(ix) = -Ci(x) + i (Si(x) - pi/2), via the Lentz continued fraction.
    z = complex(0.0, x)
    b = z + 1.0
    c = complex(1e308, 0.0)
    d = 1.0 / b
    h = d
    for i in range(1, 400):
        a = -float(i * i)
        b += 2.0
        d = 1.0 / (a * d + b)
        c = b + a / c
        delta = c * d
        h *= delta
        if abs(delta - 1.0) < 1e-16:
            break
    e1 = h * cmath.exp(-z)
    return -e1.real, math.pi / 2 + e1.imag


def cosine_integral(x: float) -> float:
    """Cosine integral Ci(x) = -int_x^inf cos(u)/u du, x > 0."""
    if not x > 0.0:
        raise ValueError("cosine_integral requires x > 0")
    return _cisi(x)[0]


def sine_integral(x: float) -> float:
    """Sine integral Si(x) = int_0^x sin(u)/u du, x >= 0."""
    if x < 0.0:
        raise ValueError("sine_integral requires x >= 0")
    if x == 0.0:
        return 0.0
    return _cisi(x)[1]


@lru_cache(maxsize=None)
def universal_constant(s: float) -> float:
    """int_0^inf (1 - cos u)/u^s du for 1 < s < 3.

    Closed form Gamma(1-u) * (pi/2) * sinc(u/2) / (1+u) with u = s - 2,
    written so the removable singularity at s = 2 is harmless.
    """
    if not 1.0 < s < 3.0:
        raise ValueError("universal constant exists only for s in (1, 3)")
    u = s - 2.0
    return float(_gamma(1.0 - u) * (math.pi / 2.0) * np.sinc(u / 2.0) / (1.0 + u))


def _quad(fun, a, b, *, epsabs, epsrel, limit, weight=None, wvar=None):
    """scipy.integrate.quad wrapper returning (value, error_estimate)."""
    kwargs = dict(epsabs=epsabs, epsrel=epsrel, limit=limit, full_output=1)
    if weight is not None:
        kwargs["weight"] = weight
        kwargs["wvar"] = wvar
        if b == np.inf:
            # QUADPACK's Fourier path ignores epsrel and uses cycle lists.
            kwargs.pop("epsrel")
            kwargs["limlst"] = max(50, limit)
    out = integrate.quad(fun, a, b, **kwargs)
    value, err = out[0], out[1]
    if not math.isfinite(value):
        raise AccuracyError("quadrature returned a non-finite value", value=value, estimate=err)
    return value, abs(err)


def _phi_truncated(p: float, y: float, *, epsabs: float, epsrel: float, limit: int) -> tuple[float, float]:
    """int_0^y (1 - cos u)/u^p du for 0 < p < 3, y >= 0."""
    if y <= 0.0:
        return 0.0, 0.0
    if p == 1.0:
        return math.log(y) + EULER_GAMMA - cosine_integral(y), 3e-15
    if y <= 16.0 * math.pi:
        return _quad(lambda u: 2.0 * math.sin(0.5 * u) ** 2 * u ** (-p), 0.0, y,
                     epsabs=epsabs, epsrel=epsrel, limit=max(limit, 200))
    # Long range: peel off the full-line constant and a Fourier tail.
    tail_cos, e_t = _quad(lambda u: u ** (-p), y, np.inf, weight="cos", wvar=1.0,
                          epsabs=epsabs, epsrel=epsrel, limit=limit)
    if p > 1.0:
        value = universal_constant(p) - y ** (1.0 - p) / (p - 1.0) + tail_cos
    else:
        full_cos = _gamma(1.0 - p) * math.sin(math.pi * p / 2.0)
        value = y ** (1.0 - p) / (1.0 - p) - full_cos + tail_cos
    return float(value), e_t + 1e-15 * abs(value)


def universal_moment(s: float, t: float, omega_c: float | None = None) -> float:
    """Moment int_0^inf (1 - cos wt)/w^s dw, as t^(s-1) times the universal constant.

    For s <= 1 the full-line moment diverges; the omega_c-truncated value
    int_0^{omega_c} (1 - cos wt)/w^s dw is returned instead (for s = 1 this
    is log(omega_c t) + gamma_E - Ci(omega_c t)).
    """
    if not 0.0 < s < 3.0:
        raise ValueError("universal_moment requires s in (0, 3)")
    if t < 0.0:
        raise ValueError("universal_moment requires t >= 0")
    if t == 0.0:
        return 0.0
    if s > 1.0:
        return universal_constant(s) * t ** (s - 1.0)
    if omega_c is None:
        raise ValueError("for s <= 1 the moment is omega_c-truncated; pass omega_c")
    if not omega_c > 0.0:
        raise ValueError("omega_c must be positive")
    value, _ = _phi_truncated(s, omega_c * t, epsabs=1e-14, epsrel=1e-13, limit=400)
    return t ** (s - 1.0) * value


def _effective_cutoff(omega_c: float, t: float) -> float:
    if t <= 0.0:
        return omega_c
    return min(max(min(omega_c, 1.0 / t), 1e-3 * omega_c), omega_c)


def _tail_extent(f: Callable[[float], float], w_start: float, rel: float) -> float:
    """Geometric probe for the point where |f| has dropped below rel * max|f|."""
    f_max = abs(f(w_start))
    w = w_start
    below = 0
    for _ in range(120):
        w *= 1.6
        v = abs(f(w))
        f_max = max(f_max, v)
        if v <= rel * f_max:
            below += 1
            if below >= 2:
                return w
        else:
            below = 0
        if w > 1e12:
            break
    return max(w, 1e12)


def _derivative_at_zero(f: Callable[[float], float], f0: float, scale: float) -> float:
    """One-sided first derivative at 0 by Richardson-extrapolated differences."""
    h = 1e-4 * scale
    d1 = (f(h) - f0) / h
    d2 = (f(h / 2.0) - f0) / (h / 2.0)
    d3 = (f(h / 4.0) - f0) / (h / 4.0)
    # two Richardson levels for the O(h) one-sided stencil
    r1 = 2.0 * d2 - d1
    r2 = 2.0 * d3 - d2
    return 2.0 * r2 - r1


class _Accumulator:
    """Sums piece values and error estimates for the final tolerance check."""

    def __init__(self):
        self.value = 0.0
        self.error = 0.0
        self.magnitude = 0.0

    def add(self, value: float, error: float):
        self.value += value
        self.error += error
        self.magnitude += abs(value)


def kernel_integral(
    f: Callable[[float], float],
    t: float,
    s: float,
    cfg: QuadConfig | None = None,
    *,
    f0: float | None = None,
    f0_prime: float | None = None,
) -> float:
    """int_0^inf f(w) (1 - cos wt)/w^s dw to relative tolerance cfg.rel_tol.

    Parameters
    ----------
    f : callable
        Smooth, integrable weight on [0, inf); the caller guarantees the
        integral converges (f must vanish fast enough at 0 when s >= 2
        only through the subtracted Taylor terms, and decay at infinity).
    t : float
        Kernel time, >= 0.
    s : float
        Singularity power, in (0, 3).
    cfg : QuadConfig
        Cutoff and tolerances; defaults to QuadConfig().
    f0, f0_prime : float, optional
        Exact values of f(0) and f'(0) for the Taylor subtraction (used
        when s > 1).  When omitted they are measured numerically, which
        needs f to be evaluable at (and near) zero.

    Raises
    ------
    DivergenceError
        If the subtraction data is non-finite (f(0) diverges).
    AccuracyError
        If the accumulated error estimate exceeds the tolerance budget.
    """
    cfg = cfg or QuadConfig()
    if not 0.0 < s < 3.0:
        raise ValueError("kernel_integral requires s in (0, 3)")
    if t < 0.0:
        raise ValueError("kernel_integral requires t >= 0")
    if t == 0.0:
        return 0.0

    w_c = _effective_cutoff(cfg.omega_c, t)
    subtract = s > 1.0
    if subtract:
        if f0 is None:
            f0 = f(0.0)
        if not math.isfinite(f0):
            raise DivergenceError("f(0) is not finite: the kernel integral diverges at w = 0")
        if f0_prime is None:
            f0_prime = _derivative_at_zero(f, f0, w_c)
        if not math.isfinite(f0_prime):
            raise DivergenceError("f'(0) is not finite: Taylor subtraction impossible")

    def attempt(epsabs: float) -> _Accumulator:
        acc = _Accumulator()
        epsrel = cfg.rel_tol / 4.0
        limit = cfg.max_panels
        if subtract:
            m0, e0 = _phi_truncated(s, w_c * t, epsabs=epsabs, epsrel=epsrel, limit=limit)
            m1, e1 = _phi_truncated(s - 1.0, w_c * t, epsabs=epsabs, epsrel=epsrel, limit=limit)
            acc.add(f0 * t ** (s - 1.0) * m0, abs(f0) * t ** (s - 1.0) * e0)
            acc.add(f0_prime * t ** (s - 2.0) * m1, abs(f0_prime) * t ** (s - 2.0) * e1)

            def head_base(w: float) -> float:
                return (f(w) - f0 - f0_prime * w) * w ** (-s)
        else:

            def head_base(w: float) -> float:
                return f(w) * w ** (-s)

        if w_c * t <= _OSC_PERIODS:
            acc.add(*_quad(lambda w: head_base(w) * 2.0 * math.sin(0.5 * w * t) ** 2,
                           0.0, w_c, epsabs=epsabs, epsrel=epsrel, limit=limit))
        else:
            acc.add(*_quad(head_base, 0.0, w_c, epsabs=epsabs, epsrel=epsrel, limit=limit))
            v, e = _quad(head_base, 0.0, w_c, weight="cos", wvar=t,
                         epsabs=epsabs, epsrel=epsrel, limit=limit)
            acc.add(-v, e)

        def g(w: float) -> float:
            return f(w) * w ** (-s)

        extent = _tail_extent(f, w_c, cfg.rel_tol)
        if t * (extent - w_c) <= _OSC_PERIODS * 2.0 * math.pi:
            acc.add(*_quad(lambda w: g(w) * 2.0 * math.sin(0.5 * w * t) ** 2,
                           w_c, np.inf, epsabs=epsabs, epsrel=epsrel, limit=limit))
        else:
            b1, e1 = _quad(g, w_c, np.inf, epsabs=epsabs, epsrel=epsrel, limit=limit)
            acc.add(b1, e1)
            scale = max(acc.magnitude, abs(b1))
            eps_fourier = max(cfg.rel_tol * scale / 4.0, 5e-15 * scale, 1e-300)
            b2, e2 = _quad(g, w_c, np.inf, weight="cos", wvar=t,
                           epsabs=eps_fourier, epsrel=epsrel, limit=limit)
            acc.add(-b2, e2)
        return acc

    acc = attempt(epsabs=1e-14)
    budget = 2.0 * cfg.rel_tol * max(abs(acc.value), acc.magnitude)
    if acc.error > budget:
        # Retry in pure-relative mode now that the magnitude is known.
        acc = attempt(epsabs=max(cfg.rel_tol * abs(acc.value) / 8.0, 1e-305))
        budget = 2.0 * cfg.rel_tol * max(abs(acc.value), acc.magnitude)
        if acc.error > budget:
            raise AccuracyError(
                f"kernel_integral achieved error estimate {acc.error:.3e}, "
                f"above the budget {budget:.3e} for rel_tol={cfg.rel_tol:.1e}",
                value=acc.value,
                estimate=acc.error,
            )
    return acc.value


def sine_kernel_integral(
    f: Callable[[float], float],
    t: float,
    q: float,
    cfg: QuadConfig | None = None,
    *,
    f0: float | None = None,
) -> float:
    """int_0^inf f(w) sin(wt)/w^q dw for q < 2, same splitting strategy.

    For q = 1 with f(0) = f0 finite and nonzero the head subtracts f0 and
    restores it through the sine integral Si(w_c t); otherwise the head is
    integrated directly (the integrand is then integrable at 0 without help).
    """
    cfg = cfg or QuadConfig()
    if q >= 2.0:
        raise ValueError("sine_kernel_integral requires q < 2")
    if t < 0.0:
        raise ValueError("sine_kernel_integral requires t >= 0")
    if t == 0.0:
        return 0.0

    w_c = _effective_cutoff(cfg.omega_c, t)
    epsrel = cfg.rel_tol / 4.0
    limit = cfg.max_panels
    acc = _Accumulator()

    subtract = q == 1.0 and f0 is not None and f0 != 0.0
    if subtract:
        acc.add(f0 * sine_integral(w_c * t), 3e-15 * abs(f0))

        def head_base(w: float) -> float:
            return (f(w) - f0) / w
    else:

        def head_base(w: float) -> float:
            return f(w) * w ** (-q)

    if w_c * t <= _OSC_PERIODS:
        acc.add(*_quad(lambda w: head_base(w) * math.sin(w * t), 0.0, w_c,
                       epsabs=1e-14, epsrel=epsrel, limit=limit))
    else:
        acc.add(*_quad(head_base, 0.0, w_c, weight="sin", wvar=t,
                       epsabs=1e-14, epsrel=epsrel, limit=limit))

    def g(w: float) -> float:
        return f(w) * w ** (-q)

    extent = _tail_extent(f, w_c, cfg.rel_tol)
    if t * (extent - w_c) <= _OSC_PERIODS * 2.0 * math.pi:
        acc.add(*_quad(lambda w: g(w) * math.sin(w * t), w_c, np.inf,
                       epsabs=1e-14, epsrel=epsrel, limit=limit))
    else:
        scale = max(acc.magnitude, 1e-30)
        eps_fourier = max(cfg.rel_tol * scale / 4.0, 5e-15 * scale, 1e-300)
        acc.add(*_quad(g, w_c, np.inf, weight="sin", wvar=t,
                       epsabs=eps_fourier, epsrel=epsrel, limit=limit))

    budget = 2.0 * cfg.rel_tol * max(abs(acc.value), acc.magnitude) + 1e-13
    if acc.error > budget:
        raise AccuracyError(
            f"sine_kernel_integral error estimate {acc.error:.3e} above budget {budget:.3e}",
            value=acc.value,
            estimate=acc.error,
        )
    return acc.value
