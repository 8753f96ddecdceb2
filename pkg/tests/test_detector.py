"""Tests for the threshold-detector POVM and simulated click statistics."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mdiqrng.detector import (
    ConditionalStats,
    DetectorParams,
    apply_visibility,
    build_threshold_povm,
    click_prob,
    dark_prob_from_rate,
    enumerate_patterns,
    sample_counts,
    simulate_statistics,
)
from mdiqrng.fock import (
    BlockDiagonalState,
    ModeVector,
    build_wcs_state,
    coherent_sector_state,
    enumerate_basis,
    kappa,
)


def test_click_prob_reference_values():
    # two photons on a 90% detector, no darks: 1 - 0.1^2
    assert abs(click_prob(2, 0.9, 0.0, 1) - 0.99) < 1e-15
    assert abs(click_prob(2, 0.9, 0.0, 0) - 0.01) < 1e-15
    assert click_prob(0, 0.9, 0.0, 1) == 0.0
    # vacuum clicks only through darks
    assert abs(click_prob(0, 0.9, 1.9e-7, 1) - 1.9e-7) < 1e-20
    assert click_prob(3, 1.0, 0.0, 1) == 1.0
    with pytest.raises(ValueError):
        click_prob(-1, 0.9, 0.0, 1)
    with pytest.raises(ValueError):
        click_prob(1, 0.9, 0.0, 2)


def test_dark_prob_conversion():
    assert abs(dark_prob_from_rate(19.0, 10.0) - 1.9e-7) < 1e-20
    assert abs(dark_prob_from_rate(1.3, 10.0) - 1.3e-8) < 1e-21


def test_pattern_enumeration_order():
    pats = enumerate_patterns(3)
    assert pats[0] == (0, 0, 0)
    assert pats[1] == (0, 0, 1)
    assert pats[4] == (1, 0, 0)
    assert pats[7] == (1, 1, 1)
    assert len(pats) == 8
    assert len(enumerate_patterns(2)) == 4


def test_povm_weight_example():
    # |110> with effective efficiencies and no darks: pattern (1,1,0) weight eta1*eta2
    space = enumerate_basis(3, 3)
    params = DetectorParams(efficiencies=(0.862, 0.900, 0.751), dark_probs=(0.0, 0.0, 0.0))
    model = build_threshold_povm(space, params)
    i = space.index_of((1, 1, 0))
    a = model.patterns.index((1, 1, 0))
    assert abs(model.weights[a, i] - 0.862 * 0.900) < 1e-15
    # same occupation cannot fire detector 3 without darks
    a3 = model.patterns.index((1, 1, 1))
    assert model.weights[a3, i] == 0.0


@settings(max_examples=50, deadline=None)
@given(
    etas=st.lists(st.floats(0.0, 1.0), min_size=2, max_size=3),
    darks=st.lists(st.floats(0.0, 0.2), min_size=3, max_size=3),
    cutoff=st.integers(min_value=0, max_value=3),
)
def test_povm_completeness_random_parameters(etas, darks, cutoff):
    d = len(etas)
    space = enumerate_basis(d, cutoff)
    params = DetectorParams(efficiencies=tuple(etas), dark_probs=tuple(darks[:d]))
    model = build_threshold_povm(space, params)
    col = model.weights.sum(axis=0)
    assert np.max(np.abs(col - 1.0)) < 1e-12
    assert np.all(model.weights >= 0.0)
    assert np.all(model.weights <= 1.0 + 1e-15)


def _brute_force_probs(mu, beta_sq, etas, darks, cutoff, visibility, patterns):
    """Independent click-distribution oracle: explicit loop over occupations."""
    modes = len(beta_sq)
    kap = math.exp(-mu) * sum(mu ** n / math.factorial(n) for n in range(cutoff + 1))
    occs = []
    def rec(prefix, left, modes_left):
        if modes_left == 1:
            occs.append(prefix + (left,))
            return
        for c in range(left + 1):
            rec(prefix + (c,), left - c, modes_left - 1)
    for n in range(cutoff + 1):
        rec((), n, modes)
    dim = len(occs)
    probs = []
    for pattern in patterns:
        total = 0.0
        for occ in occs:
            n = sum(occ)
            multinom = math.factorial(n)
            for c in occ:
                multinom //= math.factorial(c)
            diag = (math.exp(-mu) * mu ** n / math.factorial(n) / kap) * multinom
            for c, b2 in zip(occ, beta_sq):
                diag *= b2 ** c
            diag = visibility * diag + (1.0 - visibility) / dim
            w = 1.0
            for bit, c, eta, dk in zip(pattern, occ, etas, darks):
                p1 = 1.0 - (1.0 - dk) * (1.0 - eta) ** c
                w *= p1 if bit == 1 else 1.0 - p1
            total += diag * w
        probs.append(total)
    return np.array(probs)


def test_simulated_statistics_match_brute_force_enumeration():
    space = enumerate_basis(3, 2)
    params = DetectorParams(efficiencies=(0.862, 0.900, 0.751),
                            dark_probs=(1.9e-7, 9e-8, 1.3e-8))
    model = build_threshold_povm(space, params)
    mu = 1.22
    states = {
        "G": build_wcs_state(space, ModeVector.uniform(3), mu),
        "T1": build_wcs_state(space, ModeVector.basis(3, 0), mu),
    }
    stats = simulate_statistics(states, model, visibility=0.99)
    for label, beta_sq in (("G", (1 / 3, 1 / 3, 1 / 3)), ("T1", (1.0, 0.0, 0.0))):
        oracle = _brute_force_probs(mu, beta_sq, params.efficiencies, params.dark_probs,
                                    2, 0.99, model.patterns)
        assert np.max(np.abs(stats.row(label) - oracle / oracle.sum())) < 1e-12


def test_truncated_statistics_approach_untruncated_closed_form():
    # independent Poisson modes give p(a) = prod_i of click/no-click factors
    space = enumerate_basis(3, 8)
    etas = (0.862, 0.900, 0.751)
    params = DetectorParams(efficiencies=etas, dark_probs=(0.0, 0.0, 0.0))
    model = build_threshold_povm(space, params)
    mu = 0.5
    stats = simulate_statistics({"G": build_wcs_state(space, ModeVector.uniform(3), mu)}, model)
    for a, pattern in enumerate(model.patterns):
        closed = 1.0
        for bit, eta in zip(pattern, etas):
            pc = 1.0 - math.exp(-eta * mu / 3)
            closed *= pc if bit else 1.0 - pc
        assert abs(stats.table[0, a] - closed) < 1e-6


def test_ideal_single_photon_success_probabilities_are_one():
    space = enumerate_basis(3, 1)
    params = DetectorParams(efficiencies=(1.0, 1.0, 1.0), dark_probs=(0.0, 0.0, 0.0))
    model = build_threshold_povm(space, params)
    states = {}
    for i in range(3):
        sec1 = coherent_sector_state(space, ModeVector.basis(3, i), 1)
        states[f"T{i+1}"] = BlockDiagonalState(space=space, weights=(0.0, 1.0),
                                               sector_states=(None, sec1), kappa=1.0)
    stats = simulate_statistics(states, model)
    singles = [(1, 0, 0), (0, 1, 0), (0, 0, 1)]
    for i in range(3):
        a = model.patterns.index(singles[i])
        assert abs(stats.table[i, a] - 1.0) < 1e-12


def test_apply_visibility_mixes_with_white_noise():
    space = enumerate_basis(3, 3)
    state = build_wcs_state(space, ModeVector.uniform(3), 1.22)
    noisy = apply_visibility(state, 0.95)
    assert abs(noisy.trace() - 1.0) < 1e-12
    expect = 0.95 * state.to_blocks().diagonal() + 0.05 / space.dim
    assert np.max(np.abs(noisy.diagonal() - expect)) < 1e-12
    with pytest.raises(ValueError):
        apply_visibility(state, 1.2)


def test_conditional_stats_validation():
    pats = enumerate_patterns(2)
    with pytest.raises(ValueError):
        ConditionalStats(settings=("a", "b"), patterns=pats,
                         table=np.array([[0.5, 0.5, 0.0, 0.2], [0.25] * 4]))
    with pytest.raises(ValueError):
        ConditionalStats(settings=("a", "a"), patterns=pats, table=np.full((2, 4), 0.25))
    counts = ConditionalStats(settings=("a",), patterns=pats,
                              table=np.array([[3, 1, 0, 6]]), kind="count")
    assert counts.rounds_per_setting() == {"a": 10}
    freq = counts.frequencies()
    assert abs(freq.table[0, 3] - 0.6) < 1e-15
    with pytest.raises(ValueError):
        ConditionalStats(settings=("a",), patterns=pats,
                         table=np.array([[3.5, 1, 0, 6]]), kind="count")


def test_sample_counts_deterministic_and_statistically_sane():
    space = enumerate_basis(3, 3)
    params = DetectorParams(efficiencies=(0.862, 0.900, 0.751), dark_probs=(0.0,) * 3)
    model = build_threshold_povm(space, params)
    stats = simulate_statistics({"G": build_wcs_state(space, ModeVector.uniform(3), 1.22)}, model)
    c1 = sample_counts(stats, {"G": 1.0}, 200000, seed=7)
    c2 = sample_counts(stats, {"G": 1.0}, 200000, seed=7)
    assert np.array_equal(c1.table, c2.table)
    c3 = sample_counts(stats, {"G": 1.0}, 200000, seed=8)
    assert not np.array_equal(c1.table, c3.table)
    assert c1.rounds_per_setting() == {"G": 200000}
    n = 200000
    for a in range(8):
        p = stats.table[0, a]
        sd = math.sqrt(max(n * p * (1 - p), 1.0))
        assert abs(c1.table[0, a] - n * p) < 5 * sd


def test_sample_counts_schedule_split():
    space = enumerate_basis(2, 1)
    params = DetectorParams(efficiencies=(1.0, 1.0), dark_probs=(0.0, 0.0))
    model = build_threshold_povm(space, params)
    states = {
        "T1": build_wcs_state(space, ModeVector.basis(2, 0), 0.4),
        "G": build_wcs_state(space, ModeVector.uniform(2), 0.4),
    }
    stats = simulate_statistics(states, model)
    n = 1_000_000
    counts = sample_counts(stats, (0.03, 0.97), n, seed=11)
    per = counts.rounds_per_setting()
    assert per["T1"] + per["G"] == n
    sd = math.sqrt(n * 0.97 * 0.03)
    assert abs(per["G"] - 0.97 * n) < 5 * sd
    with pytest.raises(ValueError):
        sample_counts(stats, (0.5, 0.6), n, seed=0)
    with pytest.raises(ValueError):
        sample_counts(stats, (0.03, 0.97), 0, seed=0)
