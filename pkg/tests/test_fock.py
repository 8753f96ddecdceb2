"""Tests for truncated Fock-space enumeration and weak-coherent-state blocks."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mdiqrng.fock import (
    BlockDensity,
    BlockDiagonalState,
    ModeOccupation,
    ModeVector,
    build_wcs_state,
    coherent_sector_state,
    enumerate_basis,
    kappa,
)


def test_basis_sizes_match_binomials():
    # dim of D modes at cutoff N is C(N+D, D)
    assert enumerate_basis(3, 3).dim == 20
    assert enumerate_basis(2, 3).dim == 10
    assert enumerate_basis(1, 0).dim == 1
    assert enumerate_basis(3, 3).sector_dims == (1, 3, 6, 10)
    assert enumerate_basis(2, 3).sector_dims == (1, 2, 3, 4)
    assert enumerate_basis(4, 2).dim == math.comb(6, 4)


def test_basis_ordering_is_sector_major_then_lexicographic():
    space = enumerate_basis(3, 2)
    got = [occ.counts for occ in space.basis]
    assert got == [
        (0, 0, 0),
        (0, 0, 1), (0, 1, 0), (1, 0, 0),
        (0, 0, 2), (0, 1, 1), (0, 2, 0), (1, 0, 1), (1, 1, 0), (2, 0, 0),
    ]
    # sectors are contiguous index ranges
    assert [space.basis[s] for s in space.sector_slices]
    for n, sl in enumerate(space.sector_slices):
        assert all(occ.total() == n for occ in space.basis[sl])


def test_index_roundtrip_and_unknown_occupation():
    space = enumerate_basis(3, 3)
    for i, occ in enumerate(space.basis):
        assert space.index_of(occ) == i
        assert space.index_of(occ.counts) == i
    with pytest.raises(ValueError):
        space.index_of((4, 0, 0))
    with pytest.raises(ValueError):
        ModeOccupation((1, -1))


def test_three_mode_uniform_two_photon_coefficients():
    # sqrt(2!/(2!)) (1/sqrt3)^2 = 1/3 on the doubles, sqrt(2)/3 on the pairs
    space = enumerate_basis(3, 3)
    beta = ModeVector.uniform(3)
    st2 = coherent_sector_state(space, beta, 2)
    expected = {
        (0, 0, 2): 1 / 3, (0, 2, 0): 1 / 3, (2, 0, 0): 1 / 3,
        (0, 1, 1): 2 / (3 * math.sqrt(2)),
        (1, 0, 1): 2 / (3 * math.sqrt(2)),
        (1, 1, 0): 2 / (3 * math.sqrt(2)),
    }
    occs = space.sector_basis(2)
    for occ, amp in zip(occs, st2.amplitudes):
        assert amp.imag == 0
        assert abs(amp.real - expected[occ.counts]) < 1e-12


def test_three_mode_uniform_three_photon_coefficients():
    space = enumerate_basis(3, 3)
    st3 = coherent_sector_state(space, ModeVector.uniform(3), 3)
    by_occ = {occ.counts: amp.real for occ, amp in zip(space.sector_basis(3), st3.amplitudes)}
    assert abs(by_occ[(3, 0, 0)] - math.sqrt(3) / 9) < 1e-12
    assert abs(by_occ[(2, 1, 0)] - 1 / 3) < 1e-12
    assert abs(by_occ[(0, 1, 2)] - 1 / 3) < 1e-12
    assert abs(by_occ[(1, 1, 1)] - 2 / (3 * math.sqrt(2))) < 1e-12


def test_two_mode_uniform_coefficients():
    space = enumerate_basis(2, 3)
    beta = ModeVector.uniform(2)
    by2 = {o.counts: a.real for o, a in
           zip(space.sector_basis(2), coherent_sector_state(space, beta, 2).amplitudes)}
    assert abs(by2[(2, 0)] - 0.5) < 1e-12
    assert abs(by2[(0, 2)] - 0.5) < 1e-12
    assert abs(by2[(1, 1)] - 1 / math.sqrt(2)) < 1e-12
    by3 = {o.counts: a.real for o, a in
           zip(space.sector_basis(3), coherent_sector_state(space, beta, 3).amplitudes)}
    assert abs(by3[(3, 0)] - 1 / (2 * math.sqrt(2))) < 1e-12
    assert abs(by3[(2, 1)] - math.sqrt(6) / 4) < 1e-12


def test_single_mode_beta_concentrates_on_one_occupation():
    space = enumerate_basis(3, 3)
    stx = coherent_sector_state(space, ModeVector.basis(3, 0), 2)
    occs = [o.counts for o in space.sector_basis(2)]
    vec = np.zeros(len(occs))
    vec[occs.index((2, 0, 0))] = 1.0
    assert np.allclose(stx.amplitudes, vec, atol=1e-14)


@st.composite
def unit_mode_vectors(draw, max_modes=4):
    d = draw(st.integers(min_value=1, max_value=max_modes))
    re = draw(st.lists(st.floats(-1, 1), min_size=d, max_size=d))
    im = draw(st.lists(st.floats(-1, 1), min_size=d, max_size=d))
    v = np.array(re) + 1j * np.array(im)
    if np.linalg.norm(v) < 1e-3:
        v = v + 1.0
    return ModeVector(v / np.linalg.norm(v))


@settings(max_examples=60, deadline=None)
@given(beta=unit_mode_vectors(), n=st.integers(min_value=0, max_value=4))
def test_sector_states_are_normalized(beta, n):
    space = enumerate_basis(beta.modes, 4)
    stn = coherent_sector_state(space, beta, n)
    assert abs(np.linalg.norm(stn.amplitudes) - 1.0) < 1e-10


def test_kappa_reference_values():
    # partial Poisson sums, recomputed here term by term
    direct = math.exp(-1.22) * (1 + 1.22 + 1.22 ** 2 / 2 + 1.22 ** 3 / 6)
    assert abs(kappa(1.22, 3) - direct) < 1e-15
    assert abs(kappa(1.22, 3) - 0.9644701121542691) < 1e-12
    assert kappa(0.0, 5) == 1.0
    assert abs(kappa(2.0, 0) - math.exp(-2.0)) < 1e-15
    with pytest.raises(ValueError):
        kappa(-0.1, 3)


@settings(max_examples=40, deadline=None)
@given(mu=st.floats(min_value=0.01, max_value=5.0), cutoff=st.integers(min_value=0, max_value=6))
def test_kappa_monotone_in_cutoff_and_bounded(mu, cutoff):
    k0 = kappa(mu, cutoff)
    k1 = kappa(mu, cutoff + 1)
    assert 0.0 < k0 <= k1 <= 1.0 + 1e-15


def test_wcs_state_weights_and_kappa():
    space = enumerate_basis(3, 3)
    state = build_wcs_state(space, ModeVector.uniform(3), mu=1.22)
    assert state.renormalized
    assert abs(sum(state.weights) - 1.0) < 1e-12
    assert abs(state.kappa - kappa(1.22, 3)) < 1e-15
    # renormalized weights keep Poisson ratios
    assert abs(state.weights[2] / state.weights[1] - 1.22 / 2) < 1e-12
    raw = build_wcs_state(space, ModeVector.uniform(3), mu=1.22, renormalize=False)
    assert abs(sum(raw.weights) - raw.kappa) < 1e-12
    with pytest.raises(ValueError):
        build_wcs_state(space, ModeVector.uniform(3), mu=-1.0)


def test_wcs_dense_matrix_is_block_diagonal_unit_trace():
    space = enumerate_basis(3, 2)
    state = build_wcs_state(space, ModeVector.uniform(3), mu=0.7)
    rho = state.dense()
    assert abs(np.trace(rho).real - 1.0) < 1e-12
    assert np.max(np.abs(rho - rho.conj().T)) < 1e-12
    # no coherence between photon-number sectors after phase randomization
    for na, sa in enumerate(space.sector_slices):
        for nb, sb in enumerate(space.sector_slices):
            if na != nb:
                assert np.max(np.abs(rho[sa, sb]), initial=0.0) == 0.0
    evals = np.linalg.eigvalsh(rho)
    assert evals.min() >= -1e-12


def test_block_density_validation():
    space = enumerate_basis(2, 1)
    good = BlockDensity(space, (np.array([[0.4]]), np.array([[0.3, 0.1], [0.1, 0.3]])))
    assert abs(good.trace() - 1.0) < 1e-12
    assert np.allclose(good.diagonal(), [0.4, 0.3, 0.3])
    with pytest.raises(ValueError):
        BlockDensity(space, (np.array([[0.4]]), np.array([[0.3, 0.2], [0.1, 0.3]])))
    with pytest.raises(ValueError):
        BlockDensity(space, (np.array([[0.4]]),))


def test_block_state_weight_state_consistency_checks():
    space = enumerate_basis(2, 1)
    s1 = coherent_sector_state(space, ModeVector.uniform(2), 1)
    with pytest.raises(ValueError):
        BlockDiagonalState(space=space, weights=(0.5, 0.5), sector_states=(None, None),
                           kappa=1.0)
    ok = BlockDiagonalState(space=space, weights=(0.0, 1.0), sector_states=(None, s1),
                            kappa=1.0)
    mats = ok.sector_matrices()
    assert mats[0].shape == (1, 1) and np.all(mats[0] == 0)
    assert abs(np.trace(mats[1]).real - 1.0) < 1e-12
