"""Finite distributions and implicit i.i.d. product views.

Two source representations are used everywhere in this package:

* :class:`FiniteDistribution` — an explicit probability vector over an
  ordered finite alphabet.  Masses are either all exact (``int`` or
  ``Fraction``) or all floats; exact vectors must sum to 1 exactly.
* :class:`ProductSourceView` — the n-fold i.i.d. power of a base
  distribution, compressed into multinomial type classes so that desk
  machines can reach n in the thousands without materializing the
  |base|^n atoms.

Sequence probabilities inside a view are exact ``Fraction`` values
whenever the base is exact; a natural-log float is kept alongside every
class so that large-n computations can stay in log space.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from pathlib import Path
from typing import Iterable, Optional, Sequence, Union

import numpy as np

from .errors import (
    AllZeroError,
    BadParamError,
    NegativeMassError,
    OverflowGuardError,
    TooLargeError,
)

Number = Union[int, float, Fraction]

__all__ = [
    "FiniteDistribution",
    "UniformDistribution",
    "TypeClass",
    "ProductSourceView",
    "SpectrumSample",
    "make_distribution",
    "uniform_distribution",
    "bernoulli",
    "iid_power",
    "expand",
    "spectrum_of",
    "from_json_obj",
    "parse_source",
]


def _is_exact(x: Number) -> bool:
    return isinstance(x, (int, Fraction)) and not isinstance(x, bool)


def _log_exact(x: Number) -> float:
    """Natural log of a positive number, exact-aware for huge fractions."""
    if isinstance(x, Fraction):
        return math.log(x.numerator) - math.log(x.denominator)
    return math.log(x)


@dataclass(frozen=True)
class FiniteDistribution:
    """An ordered probability vector over an opaque finite alphabet.

    Labels must be hashable and unique.  The vector is exact when every
    mass is an ``int`` or ``Fraction``; exact vectors must sum to one
    exactly, float vectors within 1e-12.  Zero-mass atoms are permitted
    and reported through :attr:`has_zero_mass`.
    """

    labels: tuple
    masses: tuple

    def __post_init__(self) -> None:
        if len(self.labels) != len(self.masses):
            raise BadParamError("labels and masses must have equal length")
        if not self.labels:
            raise BadParamError("a distribution needs at least one atom")
        if len(set(self.labels)) != len(self.labels):
            raise BadParamError("labels must be unique")
        for m in self.masses:
            if m < 0:
                raise NegativeMassError(f"mass {m!r} is negative")
        total = sum(self.masses)
        if self.exact:
            if total != 1:
                raise BadParamError(f"exact masses must sum to 1, got {total!r}")
        elif abs(total - 1) > 1e-12:
            raise BadParamError(f"masses sum to {total!r}, outside 1 ± 1e-12")

    @cached_property
    def exact(self) -> bool:
        return all(_is_exact(m) for m in self.masses)

    @property
    def atoms(self) -> tuple[tuple[object, Number], ...]:
        return tuple(zip(self.labels, self.masses))

    @property
    def size(self) -> int:
        return len(self.labels)

    @cached_property
    def support_size(self) -> int:
        return sum(1 for m in self.masses if m > 0)

    @property
    def has_zero_mass(self) -> bool:
        return self.support_size < self.size

    def as_float(self) -> np.ndarray:
        return np.array([float(m) for m in self.masses], dtype=float)

    def descending(self) -> tuple[int, ...]:
        """Atom indices sorted by mass descending, ties in label order."""
        return tuple(
            sorted(range(self.size), key=lambda i: (-self.masses[i], i))
            if not self.exact
            else sorted(range(self.size), key=lambda i: self.masses[i], reverse=True)
        )


@dataclass(frozen=True)
class UniformDistribution:
    """The uniform distribution on {1..size}, kept exact."""

    size: int

    def __post_init__(self) -> None:
        if not isinstance(self.size, int) or self.size < 1:
            raise BadParamError(f"uniform size must be a positive integer, got {self.size!r}")

    @cached_property
    def distribution(self) -> FiniteDistribution:
        mass = Fraction(1, self.size)
        return FiniteDistribution(
            labels=tuple(range(1, self.size + 1)),
            masses=(mass,) * self.size,
        )


def make_distribution(
    weights: Sequence[Number], labels: Optional[Sequence] = None
) -> FiniteDistribution:
    """Normalize nonnegative weights into a distribution, preserving order.

    All-exact inputs produce exact ``Fraction`` masses.  Weights already
    summing to one (within 1e-12 for floats) are kept verbatim.
    """
    weights = list(weights)
    if not weights:
        raise BadParamError("need at least one weight")
    for i, w in enumerate(weights):
        if w < 0:
            raise NegativeMassError(f"weight {w!r} at index {i} is negative")
    total = sum(weights)
    if total == 0:
        raise AllZeroError("all weights are zero")
    if labels is None:
        labels = tuple(range(len(weights)))
    else:
        labels = tuple(labels)
    exact = all(_is_exact(w) for w in weights)
    if exact:
        total_f = Fraction(total)
        masses: tuple = (
            tuple(Fraction(w) for w in weights)
            if total_f == 1
            else tuple(Fraction(w) / total_f for w in weights)
        )
    elif abs(total - 1) <= 1e-12:
        masses = tuple(float(w) for w in weights)
    else:
        masses = tuple(float(w) / total for w in weights)
    return FiniteDistribution(labels=labels, masses=masses)


def uniform_distribution(size: int) -> FiniteDistribution:
    return UniformDistribution(size).distribution


def bernoulli(p: Union[Number, str]) -> FiniteDistribution:
    """Binary distribution with P(1) = p, exact at decimal face value.

    Floats are read as their shortest decimal representation, so
    ``bernoulli(0.3)`` carries mass exactly 3/10.
    """
    p_exact = Fraction(str(p)) if isinstance(p, float) else Fraction(p)
    if not 0 < p_exact < 1:
        raise BadParamError(f"bernoulli parameter must lie strictly in (0, 1), got {p}")
    return FiniteDistribution(labels=(0, 1), masses=(1 - p_exact, p_exact))


@dataclass(frozen=True)
class TypeClass:
    """All length-n sequences sharing one composition of support symbols.

    ``composition`` counts occurrences of each support symbol, aligned
    with the parent view's ``support_labels``.  ``multiplicity`` is the
    exact multinomial coefficient; ``log_prob`` is the natural log of
    ``per_sequence_prob`` and stays finite when the exact probability
    underflows a float.
    """

    composition: tuple[int, ...]
    per_sequence_prob: Number
    log_prob: float
    multiplicity: int

    @property
    def mass(self) -> Number:
        return self.multiplicity * self.per_sequence_prob

    @property
    def log_mass(self) -> float:
        return self.log_prob + math.log(self.multiplicity)


@dataclass(frozen=True)
class ProductSourceView:
    """The i.i.d. n-fold power of a base distribution, by type classes.

    Classes enumerate compositions of the base's support only; sequences
    touching a zero-mass base atom are counted in ``zero_mass_count`` so
    that the full alphabet size |base|^n stays available to min-entropy
    clamping without inflating the class list.
    """

    base: FiniteDistribution
    n: int
    support_labels: tuple
    type_classes: tuple[TypeClass, ...]
    full_alphabet_size: int
    zero_mass_count: int

    def __post_init__(self) -> None:
        support_total = sum(tc.multiplicity for tc in self.type_classes)
        expected = len(self.support_labels) ** self.n
        if support_total != expected:
            raise BadParamError(
                f"multiplicities sum to {support_total}, expected {expected}"
            )
        if self.zero_mass_count != self.full_alphabet_size - expected:
            raise BadParamError("zero-mass sequence count is inconsistent")
        log_total = -math.inf
        for tc in self.type_classes:
            log_total = np.logaddexp(log_total, tc.log_mass)
        if abs(log_total) > 1e-10:
            raise BadParamError(f"class masses sum to exp({log_total}), not 1")
        for a, b in zip(self.type_classes, self.type_classes[1:]):
            if self.exact:
                if b.per_sequence_prob > a.per_sequence_prob:
                    raise BadParamError("type classes not sorted by probability")
            elif b.log_prob > a.log_prob + 1e-15:
                raise BadParamError("type classes not sorted by probability")

    @property
    def exact(self) -> bool:
        return self.base.exact


def _compositions(n: int, s: int) -> Iterable[tuple[int, ...]]:
    """All s-tuples of nonnegative ints summing to n, lexicographic."""
    if s == 1:
        yield (n,)
        return
    for head in range(n + 1):
        for rest in _compositions(n - head, s - 1):
            yield (head,) + rest


def iid_power(
    base: FiniteDistribution,
    n: int,
    max_classes: int = 5_000_000,
    max_bits: int = 1 << 20,
) -> ProductSourceView:
    """Build the type-class view of base^n.

    Guards: the sequence-count width n*log2(|base|) must stay below
    ``max_bits`` bits and the composition count below ``max_classes``.
    """
    if not isinstance(n, int) or n < 1:
        raise BadParamError(f"n must be a positive integer, got {n!r}")
    if base.size < 2:
        raise BadParamError("base alphabet needs at least two symbols")
    if n * math.log2(base.size) > max_bits:
        raise OverflowGuardError(
            f"|base|^n needs more than {max_bits} bits at n={n}"
        )
    support = [(lab, m) for lab, m in base.atoms if m > 0]
    s = len(support)
    n_classes = math.comb(n + s - 1, s - 1)
    if n_classes > max_classes:
        raise OverflowGuardError(
            f"{n_classes} type classes exceed the cap of {max_classes}"
        )
    support_labels = tuple(lab for lab, _ in support)
    support_masses = [m for _, m in support]
    log_masses = [_log_exact(m) for m in support_masses]
    exact = base.exact

    classes: list[TypeClass] = []
    if s == 1:
        comp_iter: Iterable[tuple[int, ...]] = ((n,),)
    elif s == 2:
        comp_iter = ((k, n - k) for k in range(n + 1))
    else:
        comp_iter = _compositions(n, s)

    if s == 2:
        # Iterative binomial update keeps multiplicities cheap at large n.
        mult = 1
        mults = [1]
        for k in range(n):
            mult = mult * (n - k) // (k + 1)
            mults.append(mult)
    else:
        fact_n = math.factorial(n)
        mults = None

    for idx, comp in enumerate(comp_iter):
        if mults is not None:
            multiplicity = mults[idx]
        else:
            denom = math.prod(math.factorial(k) for k in comp)
            multiplicity = fact_n // denom
        log_prob = sum(k * lm for k, lm in zip(comp, log_masses))
        if exact:
            prob: Number = math.prod(
                (m ** k for m, k in zip(support_masses, comp)), start=Fraction(1)
            )
        else:
            prob = math.exp(log_prob)
        classes.append(
            TypeClass(
                composition=comp,
                per_sequence_prob=prob,
                log_prob=log_prob,
                multiplicity=multiplicity,
            )
        )

    if exact:
        classes.sort(key=lambda tc: tc.per_sequence_prob, reverse=True)
    else:
        classes.sort(key=lambda tc: -tc.log_prob)

    full = base.size ** n
    return ProductSourceView(
        base=base,
        n=n,
        support_labels=support_labels,
        type_classes=tuple(classes),
        full_alphabet_size=full,
        zero_mass_count=full - s ** n,
    )


def expand(view: ProductSourceView, max_atoms: int = 1 << 20) -> FiniteDistribution:
    """Materialize a view atom-by-atom, zero-mass base atoms included.

    Labels are n-tuples of base labels in ``itertools.product`` order.
    """
    total = view.full_alphabet_size
    if total > max_atoms:
        raise TooLargeError(
            f"{total} atoms exceed the expansion cap of {max_atoms}"
        )
    labels = tuple(itertools.product(view.base.labels, repeat=view.n))
    if view.exact:
        masses_list: list[Number] = [Fraction(1)]
        for _ in range(view.n):
            masses_list = [m * bm for m in masses_list for bm in view.base.masses]
        return FiniteDistribution(labels=labels, masses=tuple(masses_list))
    arr = np.array([1.0])
    base_arr = view.base.as_float()
    for _ in range(view.n):
        arr = (arr[:, None] * base_arr[None, :]).ravel()
    return FiniteDistribution(labels=labels, masses=tuple(float(x) for x in arr))


@dataclass(frozen=True)
class SpectrumSample:
    """One self-information level: value = (1/n) log(1/P(x)), in nats."""

    value: float
    mass: float


def _grouped_levels(view: ProductSourceView) -> list[tuple[TypeClass, list[TypeClass]]]:
    """Consecutive runs of classes sharing one probability level."""
    groups: list[tuple[TypeClass, list[TypeClass]]] = []
    for tc in view.type_classes:
        if groups and (
            (view.exact and groups[-1][0].per_sequence_prob == tc.per_sequence_prob)
            or (not view.exact and groups[-1][0].log_prob == tc.log_prob)
        ):
            groups[-1][1].append(tc)
        else:
            groups.append((tc, [tc]))
    return groups


def spectrum_of(view: ProductSourceView) -> list[SpectrumSample]:
    """Distinct probability levels with aggregated masses, value-ascending.

    Exact views group mathematically equal levels; float-backed views
    group by the stored log-probability, which may split equal levels
    that round differently.
    """
    samples: list[SpectrumSample] = []
    for rep, members in _grouped_levels(view):
        if view.exact:
            # Big-int log of the exact probability; the float log_prob chain
            # would round differently from the entropy routes.
            value = -_log_exact(rep.per_sequence_prob) / view.n
            mass = float(sum(tc.mass for tc in members))
        else:
            value = -rep.log_prob / view.n
            mass = math.fsum(float(tc.multiplicity) * math.exp(tc.log_prob) for tc in members)
        samples.append(SpectrumSample(value=value, mass=mass))
    total = math.fsum(s.mass for s in samples)
    if abs(total - 1) > 1e-10:
        raise BadParamError(f"spectrum masses sum to {total}, not 1")
    for a, b in zip(samples, samples[1:]):
        if b.value < a.value:
            raise BadParamError("spectrum samples not ascending in value")
    return samples


def from_json_obj(obj: dict) -> FiniteDistribution:
    """Read a distribution from a parsed JSON object.

    Accepted shapes: {"weights": [...], "labels": [...]} with labels
    optional, {"uniform": M}, or {"bernoulli": p}.  Numeric strings and
    floats are read at decimal face value and kept exact.
    """
    if not isinstance(obj, dict):
        raise BadParamError("distribution JSON must be an object")
    if "weights" in obj:
        raw = obj["weights"]
        if not isinstance(raw, list) or not raw:
            raise BadParamError("weights must be a nonempty list")
        weights = [Fraction(str(w)) for w in raw]
        labels = obj.get("labels")
        if labels is not None:
            labels = tuple(_canon_label(lab) for lab in labels)
        return make_distribution(weights, labels=labels)
    if "uniform" in obj:
        return uniform_distribution(int(obj["uniform"]))
    if "bernoulli" in obj:
        return bernoulli(str(obj["bernoulli"]))
    raise BadParamError("distribution JSON needs weights, uniform, or bernoulli")


def _canon_label(lab):
    return tuple(lab) if isinstance(lab, list) else lab


def parse_source(spec: str) -> FiniteDistribution:
    """Parse a CLI source spec: uniform:M, bernoulli:p, or a JSON path."""
    spec = spec.strip()
    kind, _, arg = spec.partition(":")
    if kind == "uniform" and arg:
        try:
            size = int(arg)
        except ValueError:
            raise BadParamError(f"uniform size must be an integer, got {arg!r}")
        return uniform_distribution(size)
    if kind == "bernoulli" and arg:
        try:
            return bernoulli(Fraction(arg))
        except (ValueError, ZeroDivisionError):
            raise BadParamError(f"cannot parse bernoulli parameter {arg!r}")
    path = Path(spec)
    try:
        text = path.read_text()
    except OSError:
        if kind in ("uniform", "bernoulli"):
            raise BadParamError(f"malformed source spec {spec!r}")
        raise
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise BadParamError(f"{spec}: not valid JSON ({exc})")
    return from_json_obj(obj)
