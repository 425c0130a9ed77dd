"""Asymptotic quantum-regression checks for Ohmic baths at positive temperature.

For a multi-time dephasing correlator specified by bit strings j, l and
waiting times t_k, both sides of the regression identity are exponentials.
The product side contributes Gamma(t_k) for every index where j and l
differ.  The joint side is

    (1/2) int_0^inf J_eff(w)/w^2 | sum_k (j_k - l_k)(e^{i w T_k} - e^{i w T_{k-1}}) |^2 dw

with partial sums T_k; expanding the squared modulus into pairwise
1 - cos(w tau) terms (exact, since the coefficients sum to zero) reduces it
to a signed combination of Gamma at pairwise time differences, so the same
singular quadrature handles it.  Both exponents equal Gamma_0 T up to
O(ln min t); the check scales the times through a geometric ladder and
verifies the normalized deviation does not grow.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from . import quad as _quad
from .dynamics import gamma_of_t
from .spectral import TABULATED, BathSpec, gamma0

__all__ = [
    "MultiTimeSpec",
    "QrfReport",
    "QrfCheck",
    "lhs_correlator_exponent",
    "rhs_product_exponent",
    "qrf_check",
]


@dataclass(frozen=True)
class MultiTimeSpec:
    """One multi-time correlator: bits j_k, l_k and waiting times t_k."""

    j: tuple[int, ...]
    l: tuple[int, ...]
    t: tuple[float, ...]

    def __post_init__(self):
        n = len(self.j)
        if n < 1 or len(self.l) != n or len(self.t) != n:
            raise ValueError("j, l, t must have equal length n >= 1")
        if any(bit not in (0, 1) for bit in self.j + self.l):
            raise ValueError("j and l must consist of bits 0/1")
        if any(tk < 0.0 for tk in self.t):
            raise ValueError("times must be nonnegative")

    @property
    def n(self) -> int:
        return len(self.j)

    @property
    def diff_indices(self) -> tuple[int, ...]:
        return tuple(k for k in range(self.n) if self.j[k] != self.l[k])

    @property
    def big_t(self) -> float:
        """T = sum of t_k over differing indices."""
        return sum(self.t[k] for k in self.diff_indices)

    @property
    def min_t(self) -> float | None:
        """min t_k over differing indices; None when j = l everywhere."""
        idx = self.diff_indices
        return min(self.t[k] for k in idx) if idx else None

    def scaled(self, s: float) -> "MultiTimeSpec":
        return MultiTimeSpec(self.j, self.l, tuple(s * tk for tk in self.t))


def _require_ohmic(b: BathSpec) -> None:
    if b.zero_temperature:
        raise ValueError("the regression check requires a positive-temperature bath")
    if b.density.kind == TABULATED:
        raise ValueError("tabulated densities carry no certified smoothness at w = 0; "
                         "use an analytic Ohmic model")
    if b.density.exponent != 1.0:
        raise ValueError("the regression check requires an Ohmic low-frequency power")


def _pair_weights(m: MultiTimeSpec) -> list[tuple[float, float]]:
    """Expansion |sum_k d_k (z_k - z_{k-1})|^2 = sum 2 w (1 - cos(w tau)) pairs.

    Returns (tau, weight) with tau > 0; exact because the event coefficients
    sum to zero.
    """
    coeff: dict[float, float] = {}
    big_t = 0.0
    prev = 0.0
    for k in range(m.n):
        cur = prev + m.t[k]
        d = m.j[k] - m.l[k]
        if d:
            coeff[cur] = coeff.get(cur, 0.0) + d
            coeff[prev] = coeff.get(prev, 0.0) - d
        prev = cur
    events = sorted((tau, c) for tau, c in coeff.items() if c != 0.0)
    pairs = []
    for a in range(len(events)):
        for bi in range(a + 1, len(events)):
            tau = events[bi][0] - events[a][0]
            w = -events[a][1] * events[bi][1]
            if tau > 0.0 and w != 0.0:
                pairs.append((tau, w))
    return pairs


def lhs_correlator_exponent(b: BathSpec, m: MultiTimeSpec,
                            cfg: _quad.QuadConfig | None = None) -> float:
    """Negative log-magnitude of the joint multi-time correlator."""
    _require_ohmic(b)
    pairs = _pair_weights(m)
    if not pairs:
        return 0.0
    value = sum(w * gamma_of_t(b, tau, cfg) for tau, w in pairs)
    # exact nonnegativity can be grazed by roundoff in the signed sum
    return value if value > 0.0 else 0.0


def rhs_product_exponent(b: BathSpec, m: MultiTimeSpec,
                         cfg: _quad.QuadConfig | None = None) -> float:
    """Negative log-magnitude of the product of single-interval factors."""
    _require_ohmic(b)
    return sum(gamma_of_t(b, m.t[k], cfg) for k in m.diff_indices)


@dataclass(frozen=True)
class QrfReport:
    """Both exponents at one point of the scaling family."""

    scale: float
    lhs_exponent: float
    rhs_exponent: float
    big_t: float
    min_t: float
    gamma0_t: float
    deviation: float          # |lhs - rhs|
    normalized: float         # deviation / ln(min_t)
    lhs_deviation: float      # |lhs - Gamma_0 T|
    rhs_deviation: float      # |rhs - Gamma_0 T|
    normalized_lhs: float
    normalized_rhs: float


@dataclass(frozen=True)
class QrfCheck:
    spec: MultiTimeSpec
    gamma0: float
    rungs: tuple[QrfReport, ...]
    passed: bool
    growth_factor: float


def qrf_check(
    b: BathSpec,
    m: MultiTimeSpec,
    cfg: _quad.QuadConfig | None = None,
    ladder: tuple[float, ...] = (10.0, 30.0, 100.0, 300.0),
    growth_factor: float = 1.2,
) -> QrfCheck:
    """Run the scaling family t -> s t and test boundedness of the deviations.

    Passing means: relative to the first rung, neither |lhs - Gamma_0 T| nor
    |rhs - Gamma_0 T| divided by ln(s * min t) grows by more than the growth
    factor anywhere on the ladder.  The theorem guarantees only an O(ln min t)
    envelope, so shrinkage is fine and only growth fails the check.
    """
    _require_ohmic(b)
    if not m.diff_indices:
        raise ValueError("qrf_check needs at least one index where j and l differ")
    if len(ladder) < 2 or any(s2 <= s1 for s1, s2 in zip(ladder, ladder[1:])):
        raise ValueError("ladder must be an increasing sequence of at least 2 scales")
    base_min = m.min_t
    if base_min is None or base_min * ladder[0] <= 1.0:
        raise ValueError("scaled min t must exceed 1 (ln(min t) sets the allowed envelope)")
    g0 = gamma0(b)
    rungs = []
    for s in ladder:
        ms = m.scaled(s)
        lhs = lhs_correlator_exponent(b, ms, cfg)
        rhs = rhs_product_exponent(b, ms, cfg)
        g0t = g0 * ms.big_t
        log_min = math.log(ms.min_t)
        rungs.append(QrfReport(
            scale=s, lhs_exponent=lhs, rhs_exponent=rhs, big_t=ms.big_t,
            min_t=ms.min_t, gamma0_t=g0t,
            deviation=abs(lhs - rhs), normalized=abs(lhs - rhs) / log_min,
            lhs_deviation=abs(lhs - g0t), rhs_deviation=abs(rhs - g0t),
            normalized_lhs=abs(lhs - g0t) / log_min,
            normalized_rhs=abs(rhs - g0t) / log_min,
        ))
    ref_l, ref_r = rungs[0].normalized_lhs, rungs[0].normalized_rhs
    floor = 1e-9 * (1.0 + abs(g0))
    ok = all(
        r.normalized_lhs <= growth_factor * max(ref_l, floor)
        and r.normalized_rhs <= growth_factor * max(ref_r, floor)
        for r in rungs
    )
    return QrfCheck(m, g0, tuple(rungs), ok, growth_factor)
