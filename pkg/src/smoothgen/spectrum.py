"""Self-information spectrum quantiles and convergence diagnostics.

The per-sequence self-information (1/n) log 1/P(X^n) induces a finite
spectrum of levels; the generator f turns tail masses into divergence
levels, so its inverse turns a divergence budget into a mass quantile.
``kbar`` is the smallest level whose lower tail captures that mass,
``kunder`` the largest level whose upper tail does.  These per-n
surrogates drop the limit operations of the asymptotic theory; the
report and sweep helpers make the convergence visible instead of
asserting it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence, Union

from .distributions import (
    FiniteDistribution,
    ProductSourceView,
    _grouped_levels,
    _log_exact,
    iid_power,
)
from .errors import BadParamError, OutOfRangeError, TooFewPointsError
from .fdiv import FFunction, inverse, offset
from .smooth_entropy import smooth_max_entropy, smooth_min_entropy

Number = Union[int, float, Fraction]
Source = Union[FiniteDistribution, ProductSourceView]

__all__ = [
    "SpectrumRate",
    "spectrum_rate",
    "EquivalenceRow",
    "EquivalenceReport",
    "equivalence_report",
    "SweepStatistics",
    "sweep_statistics",
]


@dataclass(frozen=True)
class SpectrumRate:
    """Quantile pair of the self-information spectrum at level epsilon.

    First order keeps the raw per-symbol levels; second order recenters
    by a reference rate R and rescales by sqrt(n).
    """

    n: int
    kbar: float
    kunder: float
    epsilon: float
    order: str = "first"

    def __post_init__(self) -> None:
        if self.n < 1:
            raise BadParamError("n must be positive")
        if self.order not in ("first", "second"):
            raise BadParamError(f"order must be first or second, got {self.order!r}")
        if self.kunder > self.kbar + 1e-9:
            raise BadParamError(
                f"kunder = {self.kunder} exceeds kbar = {self.kbar} beyond tolerance"
            )


def _spectrum_levels(source: Source) -> tuple[list[tuple[float, Number]], int, bool]:
    """(level value, mass) ascending by value, plus n and exactness.

    Level values use big-int logs on exact sources so they agree
    bitwise with the smooth-entropy routes.
    """
    if isinstance(source, ProductSourceView):
        out = []
        for rep, members in _grouped_levels(source):
            if source.exact:
                value = -_log_exact(rep.per_sequence_prob) / source.n
                mass: Number = sum(tc.mass for tc in members)
            else:
                value = -rep.log_prob / source.n
                mass = math.fsum(
                    float(tc.multiplicity) * math.exp(tc.log_prob) for tc in members
                )
            out.append((value, mass))
        return out, source.n, source.exact
    if not isinstance(source, FiniteDistribution):
        raise BadParamError(f"unsupported source type {type(source).__name__}")
    out = []
    prev: Optional[Number] = None
    for i in source.descending():
        m = source.masses[i]
        if m <= 0:
            break
        if prev is not None and m == prev:
            value, mass = out[-1]
            out[-1] = (value, mass + m)
        else:
            out.append((-(_log_exact(m) if source.exact else math.log(float(m))), m))
            prev = m
    return out, 1, source.exact


def spectrum_rate(
    source: Source,
    f: FFunction,
    epsilon: Number,
    order: str = "first",
    R: Optional[float] = None,
) -> SpectrumRate:
    """Quantile pair at mass threshold f0^{-1}(epsilon).

    The generator is used through its offset form, which leaves C1
    families untouched (their linear coefficient is zero) and makes the
    rest monotone.  kbar scans the spectrum upward accumulating mass,
    kunder scans downward; exact sources accumulate in rationals.
    """
    f0 = offset(f)
    if epsilon < 0 or not epsilon < f0.f_at_zero:
        raise OutOfRangeError(
            f"epsilon must lie in [0, f0(0)) = [0, {f0.f_at_zero}), got {float(epsilon)}"
        )
    if order == "second" and R is None:
        raise BadParamError("second order needs a reference rate R")
    levels, n, exact = _spectrum_levels(source)
    eps = Fraction(epsilon) if exact and isinstance(epsilon, float) else epsilon
    c = inverse(f0, eps)
    if exact and isinstance(c, float):
        c = Fraction(c)
    elif not exact:
        c = float(c)

    cum: Number = 0
    kbar = levels[-1][0]
    for value, mass in levels:
        cum = cum + mass
        if cum >= c:
            kbar = value
            break
    cum = 0
    kunder = levels[0][0]
    for value, mass in reversed(levels):
        cum = cum + mass
        if cum >= c:
            kunder = value
            break
    if order == "second":
        scale = math.sqrt(n)
        kbar = scale * (kbar - R)
        kunder = scale * (kunder - R)
    return SpectrumRate(n=n, kbar=kbar, kunder=kunder, epsilon=float(epsilon), order=order)


@dataclass(frozen=True)
class EquivalenceRow:
    """One n of the entropy-vs-quantile comparison, all in nats."""

    n: int
    nu: float
    h0_rate: float
    hinf_rate: float
    kbar: float
    kunder: float
    gap0: float
    gapinf: float


@dataclass(frozen=True)
class EquivalenceReport:
    """Gap table plus shrinkage flags; non-shrinkage warns, never raises."""

    rows: tuple[EquivalenceRow, ...]
    h0_gap_shrank: bool
    hinf_gap_shrank: bool
    warnings: tuple[str, ...] = field(default=())


def equivalence_report(
    base: FiniteDistribution,
    f: FFunction,
    D: Number,
    nu: float,
    n_list: Sequence[int],
) -> EquivalenceReport:
    """Compare smoothed-entropy rates with spectrum quantiles per n.

    Both routes run at divergence level D + nu: the covering entropy
    against kbar and the min entropy against kunder.  The gaps are
    expected to shrink from the first to the last n; violations land in
    ``warnings``.
    """
    f0 = offset(f)
    nu_f = float(nu)
    if not nu_f > 0:
        raise BadParamError(f"nu must be positive, got {nu}")
    if not n_list:
        raise BadParamError("n list must be nonempty")
    exact = base.exact
    lvl = (Fraction(D) + Fraction(nu)) if exact else float(D) + nu_f
    t = inverse(f0, lvl)
    if exact and isinstance(t, float):
        t = Fraction(t)
    delta = 1 - t
    rows: list[EquivalenceRow] = []
    for n in n_list:
        view = iid_power(base, int(n))
        h0 = smooth_max_entropy(view, delta).value / n
        hinf = smooth_min_entropy(view, delta).value / n
        sr = spectrum_rate(view, f, lvl)
        rows.append(
            EquivalenceRow(
                n=int(n),
                nu=nu_f,
                h0_rate=h0,
                hinf_rate=hinf,
                kbar=sr.kbar,
                kunder=sr.kunder,
                gap0=abs(h0 - sr.kbar),
                gapinf=abs(hinf - sr.kunder),
            )
        )
    warnings: list[str] = []
    h0_shrank = rows[-1].gap0 <= rows[0].gap0 + 1e-12
    hinf_shrank = rows[-1].gapinf <= rows[0].gapinf + 1e-12
    if not h0_shrank:
        warnings.append(
            f"covering-entropy gap grew from {rows[0].gap0:.3e} to {rows[-1].gap0:.3e}"
        )
    if not hinf_shrank:
        warnings.append(
            f"min-entropy gap grew from {rows[0].gapinf:.3e} to {rows[-1].gapinf:.3e}"
        )
    return EquivalenceReport(
        rows=tuple(rows),
        h0_gap_shrank=h0_shrank,
        hinf_gap_shrank=hinf_shrank,
        warnings=tuple(warnings),
    )


@dataclass(frozen=True)
class SweepStatistics:
    """Trailing-window extreme estimates of a per-n value sequence.

    ``running_limsup[i]`` is the maximum over the window ending at i,
    ``running_liminf[i]`` the minimum; the final entries estimate the
    limit superior and inferior when the sequence has settled.
    """

    values: tuple[float, ...]
    window: int
    running_liminf: tuple[float, ...]
    running_limsup: tuple[float, ...]

    def __post_init__(self) -> None:
        for lo, hi in zip(self.running_liminf, self.running_limsup):
            if lo > hi:
                raise BadParamError("liminf estimate exceeds limsup estimate")


def sweep_statistics(values: Sequence[float], window: int = 5) -> SweepStatistics:
    """Window extremes of an existing per-n sequence.

    Takes sequences rather than sources on purpose: optimistic-rate
    estimates are statistics of already-computed rates, never new
    per-n computations.
    """
    vals = tuple(float(v) for v in values)
    if len(vals) < 2:
        raise TooFewPointsError(f"need at least 2 values, got {len(vals)}")
    if window < 1:
        raise BadParamError(f"window must be positive, got {window}")
    lo: list[float] = []
    hi: list[float] = []
    for i in range(len(vals)):
        chunk = vals[max(0, i - window + 1) : i + 1]
        lo.append(min(chunk))
        hi.append(max(chunk))
    return SweepStatistics(
        values=vals,
        window=window,
        running_liminf=tuple(lo),
        running_limsup=tuple(hi),
    )
