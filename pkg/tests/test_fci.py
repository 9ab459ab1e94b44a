"""Exact solver against full-space dense diagonalization."""

import itertools

import numpy as np
import pytest

from qvqe.fci import (
    basis_for_system,
    fci_spectrum,
    lowest_singlet_excited,
    project_operator,
    sector_basis,
    spectrum_payload,
    track_overlaps,
)
from qvqe.hamiltonian import load_fixture


@pytest.fixture(scope="module")
def h4():
    return load_fixture("H4_d1.50")


def enumerate_sector_states(n_spatial, n_alpha, n_beta):
    """Independent combinatorial enumeration of sector determinants."""
    states = []
    for alphas in itertools.combinations(range(n_spatial), n_alpha):
        for betas in itertools.combinations(range(n_spatial), n_beta):
            b = sum(1 << (2 * p) for p in alphas) + sum(1 << (2 * p + 1) for p in betas)
            states.append(b)
    return sorted(states)


def test_sector_dimensions():
    assert sector_basis(4, 1, 1).dim == 4
    assert sector_basis(8, 2, 2).dim == 36
    assert sector_basis(12, 2, 2).dim == 225
    assert sector_basis(12, 3, 3).dim == 400


def test_sector_enumeration_matches_combinatorics(h4):
    basis = basis_for_system(h4)
    expected = enumerate_sector_states(h4.n_spatial, 2, 2)
    assert basis.states.tolist() == expected


def test_projected_hamiltonian_equals_dense_restriction(h4):
    basis = basis_for_system(h4)
    h_full = h4.hamiltonian.to_dense()
    np.testing.assert_allclose(h_full.imag, 0.0, atol=1e-12)
    restriction = h_full.real[np.ix_(basis.states, basis.states)]
    projected = np.asarray(project_operator(h4.hamiltonian, basis).todense())
    np.testing.assert_allclose(projected, restriction, atol=1e-12)


def test_h2_ground_state_energy():
    sys = load_fixture("H2_d0.735")
    roots = fci_spectrum(sys)
    # independent anchor: 2-electron Slater-Condon diagonalization
    assert roots[0].energy == pytest.approx(-1.1373060359172802, abs=1e-9)
    assert roots[0].energy < sys.hf_energy


def test_spectrum_structure(h4):
    roots = fci_spectrum(h4)
    assert len(roots) == 36
    energies = [r.energy for r in roots]
    assert energies == sorted(energies)
    for r in roots:
        assert r.residual < 1e-8
        # spin eigenvalues s(s+1) for s = 0 or 1 in this sector
        assert min(abs(r.s_squared - v) for v in (0.0, 2.0, 6.0)) < 1e-7
        pivot = np.argmax(np.abs(r.vector))
        assert r.vector[pivot] > 0
    gram = np.array([[float(a.vector @ b.vector) for b in roots] for a in roots])
    np.testing.assert_allclose(gram, np.eye(36), atol=1e-10)


def test_roots_match_dense_restriction_spectrum(h4):
    basis = basis_for_system(h4)
    h_full = h4.hamiltonian.to_dense().real
    restriction = h_full[np.ix_(basis.states, basis.states)]
    expected = np.linalg.eigvalsh(restriction)
    got = [r.energy for r in fci_spectrum(h4)]
    np.testing.assert_allclose(got, expected, atol=1e-10)


def test_lowest_singlet_excited(h4):
    roots = fci_spectrum(h4)
    es = lowest_singlet_excited(roots)
    assert es is not None
    assert es.index >= 1
    assert es.s_squared < 1e-6
    assert all(r.s_squared > 1e-6 for r in roots[1:es.index])


def test_track_overlaps_resolves_identity(h4):
    roots = fci_spectrum(h4)
    rng = np.random.default_rng(0)
    v = rng.normal(size=roots[0].basis.dim)
    v /= np.linalg.norm(v)
    ov = track_overlaps(v, roots)
    assert ov.sum() == pytest.approx(1.0, abs=1e-10)


def test_embedding_round_trip(h4):
    basis = basis_for_system(h4)
    rng = np.random.default_rng(1)
    v = rng.normal(size=basis.dim)
    full = basis.embed(v)
    assert full.shape == (256,)
    np.testing.assert_allclose(basis.restrict(full).real, v)
    assert np.linalg.norm(full) == pytest.approx(np.linalg.norm(v))


def test_spectrum_payload_shape(h4):
    roots = fci_spectrum(h4, n_roots=5)
    payload = spectrum_payload(h4, roots)
    assert payload["fixture"] == "H4_d1.50"
    assert payload["sector_dim"] == 36
    assert len(payload["roots"]) == 5
    assert set(payload["roots"][0]) == {"index", "energy", "s_squared", "residual"}
