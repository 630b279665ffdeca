"""Extractor construction, uniformity certificates, and the converse."""

from __future__ import annotations

import math
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from smoothgen import (
    BadParamError,
    MTooSmallError,
    achieved_uniformity,
    bernoulli,
    build_extractor,
    f_divergence,
    half_variational,
    hellinger,
    iid_power,
    intrinsic_converse_check,
    ir_rate_formula,
    make_distribution,
    min_achievable_uniformity,
    reverse_kl,
    uniform_distribution,
    variational,
)


def test_three_atom_worked_example():
    d = make_distribution([Fraction(1, 2), Fraction(3, 10), Fraction(1, 5)])
    map_ = build_extractor(d, half_variational(), Fraction(1, 5), 0.05)
    # The full-alphabet floor 1/3 exceeds the water-filling cap 3/10, so
    # the clamp engages and the exact lane keeps every value rational.
    assert map_.modified.beta0 == Fraction(1, 3)
    assert map_.modified.a_n == Fraction(5, 6)
    assert map_.modified.dist.masses == (
        Fraction(2, 5),
        Fraction(9, 25),
        Fraction(6, 25),
    )
    assert map_.M == 2
    assert float(map_.achieved_divergence) == 0.0
    assert map_.params.beta0 == pytest.approx(1 / 3)
    assert map_.params.a_n == pytest.approx(5 / 6)


def test_bin_masses_respect_cap_and_floor():
    view = iid_power(bernoulli(0.3), 8)
    map_ = build_extractor(view, half_variational(), 0.2, 0.3)
    p = map_.params
    cap = 1 / map_.M
    floor = cap - float(p.beta0) / float(p.a_n)
    mod_mass = dict(zip(map_.modified.dist.labels, map_.modified.dist.masses))
    for i, b in enumerate(map_.bins):
        mass = float(sum(mod_mass[lab] for lab in b))
        if i < map_.M - 1:
            assert mass <= cap + 1e-12
        assert mass >= floor - 1e-12
    assert p.min_induced >= floor - 1e-12


def test_bins_partition_the_alphabet():
    view = iid_power(bernoulli(0.3), 6)
    map_ = build_extractor(view, variational(), 0.3, 0.2)
    seen = [lab for b in map_.bins for lab in b]
    assert len(seen) == len(set(seen)) == view.full_alphabet_size


def test_achieved_uniformity_is_divergence_to_uniform():
    view = iid_power(bernoulli(0.3), 6)
    map_ = build_extractor(view, half_variational(), 0.2, 0.3)
    direct = achieved_uniformity(map_, view, half_variational())
    via_divergence = f_divergence(
        half_variational(), map_.induced, uniform_distribution(map_.M)
    )
    assert direct.value == via_divergence.value


def test_achieved_stays_below_certified_bound():
    view = iid_power(bernoulli(0.3), 8)
    for f in (half_variational(), reverse_kl(), hellinger()):
        map_ = build_extractor(view, f, 0.2, 0.4)
        p = map_.params
        assert float(map_.achieved_divergence) <= p.bound + 1e-12
        assert float(map_.achieved_divergence) <= p.Delta + p.delta_n + 1e-12


def test_output_size_formula_shrinks_with_gamma():
    view = iid_power(bernoulli(0.3), 10)
    big = build_extractor(view, half_variational(), 0.2, 0.1).M
    small = build_extractor(view, half_variational(), 0.2, 1.0).M
    assert small < big


def test_m_too_small_is_reported():
    d = make_distribution([Fraction(1, 2), Fraction(1, 2)])
    with pytest.raises(MTooSmallError):
        build_extractor(d, half_variational(), 0.01, 10.0)


def test_override_bypasses_the_formula():
    view = iid_power(bernoulli(0.3), 6)
    map_ = build_extractor(view, half_variational(), 0.2, 0.3, M=3)
    assert map_.M == 3
    assert not map_.params.m_from_formula


def test_exhaustive_search_is_a_true_minimum():
    d = make_distribution([Fraction(k, 21) for k in (6, 5, 4, 3, 2, 1)])
    best, part = min_achievable_uniformity(d, half_variational(), 3)
    assert len(part) == 3
    built = build_extractor(d, half_variational(), 0.4, 0.01, M=3)
    assert float(best) <= float(built.achieved_divergence) + 1e-12


def test_exhaustive_search_threads_agree():
    d = make_distribution([Fraction(k, 15) for k in (5, 4, 3, 2, 1)])
    lone, part1 = min_achievable_uniformity(d, hellinger(), 2)
    pooled, part2 = min_achievable_uniformity(d, hellinger(), 2, threads=4)
    assert float(lone) == float(pooled)
    assert part1 == part2


def test_intrinsic_converse_accepts_built_maps():
    view = iid_power(bernoulli(0.3), 8)
    map_ = build_extractor(view, half_variational(), 0.2, 0.3)
    # At finite n the construction may overshoot its target by delta_n,
    # so the claim presented to the converse is what the map achieved.
    claim = max(0.2, float(map_.achieved_divergence) + 1e-9)
    assert intrinsic_converse_check(map_, view, half_variational(), claim, 0.0)


def test_intrinsic_converse_rejects_maps_missing_their_claim():
    view = iid_power(bernoulli(0.3), 4)
    map_ = build_extractor(view, half_variational(), 0.3, 0.2)
    achieved = float(map_.achieved_divergence)
    with pytest.raises(BadParamError):
        intrinsic_converse_check(
            map_, view, half_variational(), achieved / 2, achieved / 4
        )


@settings(max_examples=40, deadline=None)
@given(
    st.integers(min_value=2, max_value=5),
    st.sampled_from([0.1, 0.2, 0.35]),
)
def test_intrinsic_converse_never_fires_on_constructions(n, Delta):
    view = iid_power(bernoulli(0.3), n)
    try:
        map_ = build_extractor(view, half_variational(), Delta, 0.2)
    except MTooSmallError:
        return
    claim = max(Delta, float(map_.achieved_divergence) + 1e-9)
    assert intrinsic_converse_check(map_, view, half_variational(), claim, 0.0)


def test_ir_rate_formula_shapes():
    evals = ir_rate_formula(bernoulli(0.3), [4, 8], half_variational(), 0.2)
    assert [e.n for e in evals] == [4, 8]
    for e in evals:
        assert len(e.first_order) == len(e.nu_ladder) == 3
        firsts = list(e.first_order)
        assert firsts == sorted(firsts, reverse=True) or all(
            b <= a + 1e-12 for a, b in zip(firsts, firsts[1:])
        )


def test_ir_rate_formula_validates_the_ladder():
    with pytest.raises(BadParamError):
        ir_rate_formula(
            bernoulli(0.3), [4], half_variational(), 0.2, nu_ladder=(0.01, 0.1)
        )
