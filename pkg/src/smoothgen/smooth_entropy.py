"""Smooth max and min entropies over finite alphabets, in nats.

The smooth max entropy at smoothing level delta is the log of the
smallest atom count whose total mass reaches 1 - delta.  The smooth min
entropy is -log(beta0) where beta0 is the smallest cap beta, at least
1/|alphabet|, whose excess mass sum_x (P(x) - beta)+ stays within delta.

Both accept an explicit :class:`FiniteDistribution` or a compressed
:class:`ProductSourceView`; the view path works on whole probability
levels (type classes grouped by equal probability) so n in the
thousands stays cheap.  Exact sources are processed in exact rational
arithmetic; float sources run in log space so that per-sequence
probabilities far below float range cannot underflow to nonsense.

Two brute-force oracles, deliberately sharing no code with the fast
paths, serve as verification anchors for small instances.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Union

import numpy as np

from .distributions import (
    FiniteDistribution,
    ProductSourceView,
    _grouped_levels,
    _log_exact,
)
from .errors import BadParamError, TooLargeError

Number = Union[int, float, Fraction]
Source = Union[FiniteDistribution, ProductSourceView]

__all__ = [
    "MaxEntropyWitness",
    "MinEntropyWitness",
    "SmoothEntropyResult",
    "smooth_max_entropy",
    "smooth_min_entropy",
    "oracle_max_entropy",
    "oracle_min_entropy",
]


@dataclass(frozen=True)
class MaxEntropyWitness:
    """Chosen covering set: its atom count and captured mass.

    ``set_size`` is None when the count only exists in log space (the
    value is then still exact to float precision via the log form).
    """

    set_size: Optional[int]
    mass: float

    def __post_init__(self) -> None:
        if self.set_size is not None and self.set_size < 1:
            raise BadParamError("covering set cannot be empty")
        if not -1e-9 <= self.mass <= 1 + 1e-9:
            raise BadParamError(f"witness mass {self.mass} outside [0, 1]")


@dataclass(frozen=True)
class MinEntropyWitness:
    """Minimizing cap beta and its residual excess mass.

    ``beta`` is an exact ``Fraction`` on exact sources; on float sources
    it is ``exp(log_beta)`` and may underflow to 0.0, in which case
    ``log_beta`` remains authoritative.
    """

    beta: Number
    log_beta: float
    residual: float

    def __post_init__(self) -> None:
        if self.residual < -1e-12:
            raise BadParamError(f"residual {self.residual} is negative")


@dataclass(frozen=True)
class SmoothEntropyResult:
    order: str
    delta: float
    value: float
    witness: Union[MaxEntropyWitness, MinEntropyWitness]

    def __post_init__(self) -> None:
        if self.order not in ("max", "min"):
            raise BadParamError(f"order must be max or min, got {self.order!r}")
        if not 0.0 <= self.delta < 1.0:
            raise BadParamError(f"delta {self.delta} outside [0, 1)")
        if not self.value >= -1e-12:
            raise BadParamError(f"entropy {self.value} is negative")


def _check_delta(delta: Number) -> float:
    try:
        d = float(delta)
    except (TypeError, ValueError):
        raise BadParamError(f"delta must be a number, got {delta!r}")
    if not 0.0 <= d < 1.0:
        raise BadParamError(f"delta must lie in [0, 1), got {d}")
    return d


def _levels(source: Source) -> tuple[list[tuple[Number, int, float]], int, bool]:
    """(prob, count, log_prob) per distinct positive level, descending."""
    if isinstance(source, ProductSourceView):
        out = []
        for rep, members in _grouped_levels(source):
            count = sum(tc.multiplicity for tc in members)
            out.append((rep.per_sequence_prob, count, rep.log_prob))
        return out, source.full_alphabet_size, source.exact
    if not isinstance(source, FiniteDistribution):
        raise BadParamError(f"unsupported source type {type(source).__name__}")
    out = []
    for i in source.descending():
        m = source.masses[i]
        if m <= 0:
            break
        if out and out[-1][0] == m:
            prob, count, lp = out[-1]
            out[-1] = (prob, count + 1, lp)
        else:
            out.append((m, 1, _log_exact(m)))
    return out, source.size, source.exact


def smooth_max_entropy(source: Source, delta: Number) -> SmoothEntropyResult:
    """Log of the smallest atom count covering mass 1 - delta.

    Greedy by probability descending: whole levels first, then the
    partial tail of the crossing level counted atom-by-atom.
    """
    delta_f = _check_delta(delta)
    levels, _, exact = _levels(source)
    if exact:
        target = 1 - (delta if isinstance(delta, Fraction) else Fraction(delta))
        cum = Fraction(0)
        whole = 0
        for prob, count, _ in levels:
            class_mass = prob * count
            if cum + class_mass < target:
                cum += class_mass
                whole += count
                continue
            extra = math.ceil((target - cum) / prob)
            size = whole + extra
            return SmoothEntropyResult(
                order="max",
                delta=delta_f,
                value=math.log(size),
                witness=MaxEntropyWitness(set_size=size, mass=float(cum + extra * prob)),
            )
        return SmoothEntropyResult(
            order="max",
            delta=delta_f,
            value=math.log(whole),
            witness=MaxEntropyWitness(set_size=whole, mass=float(cum)),
        )
    target_f = 1.0 - delta_f
    cum_f = 0.0
    whole = 0
    for prob, count, log_prob in levels:
        # Sums stay in linear floats while the level is representable;
        # the log chain is only for underflowed probabilities or counts
        # too large to convert exactly.
        prob_f = float(prob)
        if prob_f > 0.0 and count < (1 << 53):
            class_mass = prob_f * count
        else:
            class_mass = math.exp(log_prob + math.log(count))
        if cum_f + class_mass < target_f:
            cum_f += class_mass
            whole += count
            continue
        need = target_f - cum_f
        if prob_f == 0.0:
            prob_f = math.exp(log_prob)
        if prob_f > 0.0 and need / prob_f < 9e15:
            extra = max(math.ceil(need / prob_f), 1)
            size = whole + extra
            return SmoothEntropyResult(
                order="max",
                delta=delta_f,
                value=math.log(size),
                witness=MaxEntropyWitness(set_size=size, mass=cum_f + extra * prob_f),
            )
        # Tail count exists only in log space at this scale.
        log_extra = max(math.log(need) - log_prob, 0.0)
        log_whole = math.log(whole) if whole else -math.inf
        return SmoothEntropyResult(
            order="max",
            delta=delta_f,
            value=float(np.logaddexp(log_whole, log_extra)),
            witness=MaxEntropyWitness(set_size=None, mass=target_f),
        )
    return SmoothEntropyResult(
        order="max",
        delta=delta_f,
        value=math.log(whole),
        witness=MaxEntropyWitness(set_size=whole, mass=cum_f),
    )


def _residual_exact(
    levels: list[tuple[Number, int, float]], beta: Fraction
) -> Fraction:
    total = Fraction(0)
    for prob, count, _ in levels:
        if prob <= beta:
            break
        total += (prob - beta) * count
    return total


def _residual_float(levels: list[tuple[Number, int, float]], log_beta: float) -> float:
    terms = []
    for _, count, log_prob in levels:
        if log_prob <= log_beta:
            break
        log_count = math.log(count)
        terms.append(math.exp(log_prob + log_count) - math.exp(log_beta + log_count))
    return max(math.fsum(terms), 0.0)


def smooth_min_entropy(source: Source, delta: Number) -> SmoothEntropyResult:
    """-log of the smallest admissible cap beta (water-filling solve).

    The cap is clamped to at least 1/|alphabet| counting zero-mass
    atoms, so the clamp can raise beta above the unclamped solution.
    """
    delta_f = _check_delta(delta)
    levels, alphabet_size, exact = _levels(source)
    if exact:
        d = delta if isinstance(delta, Fraction) else Fraction(delta)
        cum = Fraction(0)
        n_cum = 0
        beta_star: Optional[Fraction] = None
        for j, (prob, count, _) in enumerate(levels):
            cum += prob * count
            n_cum += count
            if cum <= d:
                continue
            cand = (cum - d) / n_cum
            nxt = levels[j + 1][0] if j + 1 < len(levels) else 0
            if cand >= nxt:
                beta_star = cand
                break
        if beta_star is None:
            raise BadParamError("water-filling failed; masses do not reach delta")
        clamp = Fraction(1, alphabet_size)
        beta0 = beta_star if beta_star > clamp else clamp
        value = -_log_exact(beta0)
        return SmoothEntropyResult(
            order="min",
            delta=delta_f,
            value=value,
            witness=MinEntropyWitness(
                beta=beta0,
                log_beta=-value,
                residual=float(_residual_exact(levels, beta0)),
            ),
        )
    cum_f = 0.0
    n_cum = 0
    log_beta_star = -math.inf
    for j, (prob, count, log_prob) in enumerate(levels):
        cum_f += math.exp(log_prob + math.log(count))
        n_cum += count
        if cum_f <= delta_f:
            continue
        cand = math.log(cum_f - delta_f) - math.log(n_cum)
        nxt = levels[j + 1][2] if j + 1 < len(levels) else -math.inf
        if cand >= nxt:
            log_beta_star = cand
            break
    log_clamp = -math.log(alphabet_size)
    log_beta0 = max(log_beta_star, log_clamp)
    value = -log_beta0
    return SmoothEntropyResult(
        order="min",
        delta=delta_f,
        value=value,
        witness=MinEntropyWitness(
            beta=math.exp(log_beta0),
            log_beta=log_beta0,
            residual=_residual_float(levels, log_beta0),
        ),
    )


def oracle_max_entropy(dist: FiniteDistribution, delta: Number) -> float:
    """Exhaustive minimum of log|A| over subsets with mass >= 1 - delta.

    Works in float; exact inputs are compared at their rounded float
    values, so knife-edge exact instances should be fed as floats.
    """
    delta_f = _check_delta(delta)
    if not isinstance(dist, FiniteDistribution):
        raise BadParamError("oracle needs an explicit distribution")
    s = dist.size
    if s > 20:
        raise TooLargeError(f"{s} atoms exceed the exhaustive-subset limit of 20")
    p = dist.as_float()
    target = 1.0 - delta_f
    best: Optional[int] = None
    chunk = 1 << 16
    for start in range(0, 1 << s, chunk):
        masks = np.arange(start, min(start + chunk, 1 << s), dtype=np.int64)
        bits = ((masks[:, None] >> np.arange(s, dtype=np.int64)) & 1).astype(float)
        mass = bits @ p
        ok = mass >= target
        if ok.any():
            low = int(bits[ok].sum(axis=1).min())
            best = low if best is None else min(best, low)
    if best is None:
        best = dist.support_size
    return math.log(best)


def oracle_min_entropy(dist: FiniteDistribution, delta: Number) -> float:
    """Grid-plus-refinement search for the smallest admissible cap.

    Independent of the water-filling path: the excess-mass function is
    queried through sorted suffix sums, bracketed on a dense grid, and
    bisected inside the bracketing piece.
    """
    delta_f = _check_delta(delta)
    if not isinstance(dist, FiniteDistribution):
        raise BadParamError("oracle needs an explicit distribution")
    if dist.size > 10 ** 4:
        raise TooLargeError(f"{dist.size} atoms exceed the oracle limit of 10^4")
    p = dist.as_float()
    asc = np.sort(p[p > 0])
    csum = np.cumsum(asc)
    total = float(csum[-1])

    def excess(b: np.ndarray) -> np.ndarray:
        idx = np.searchsorted(asc, b, side="right")
        above = len(asc) - idx
        w_above = total - np.where(idx > 0, csum[np.maximum(idx - 1, 0)], 0.0)
        return w_above - b * above

    clamp = 1.0 / dist.size
    if float(excess(np.array([clamp]))[0]) <= delta_f:
        return -math.log(clamp)
    top = float(asc[-1])
    grid = np.unique(np.concatenate([asc, np.linspace(clamp, top, 4097)]))
    grid = grid[grid >= clamp]
    feasible = excess(grid) <= delta_f
    first = int(np.argmax(feasible))
    hi = float(grid[first])
    lo = clamp if first == 0 else float(grid[first - 1])
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if float(excess(np.array([mid]))[0]) <= delta_f:
            hi = mid
        else:
            lo = mid
        if hi - lo <= 1e-16 * max(hi, 1.0):
            break
    return -math.log(max(hi, clamp))
