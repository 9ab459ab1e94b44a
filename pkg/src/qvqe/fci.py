"""Exact diagonalization over (N, Sz) sectors.

The full 2^n space splits under particle number and spin projection; all
chemistry here lives in one sector, so operators are projected onto the
sector's determinant basis before any dense work.  For a sector basis B
and operator O with [O, N] = [O, Sz] = 0 the projection P O P equals O's
restriction, and individual Pauli strings that wander outside the sector
drop out of the projected sum.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .hamiltonian import MoleculeSystem, s_squared_operator
from .paulis import PauliSum

_I_POW = (1.0 + 0.0j, 1.0j, -1.0 + 0.0j, -1.0j)


@dataclass(frozen=True)
class SectorBasis:
    """Sorted determinant bitmasks spanning one (N_alpha, N_beta) sector."""

    n_qubits: int
    n_alpha: int
    n_beta: int
    states: np.ndarray  # uint64, ascending

    @property
    def dim(self) -> int:
        return self.states.size

    def index_of(self, bitmask: int) -> int:
        pos = int(np.searchsorted(self.states, np.uint64(bitmask)))
        if pos >= self.dim or self.states[pos] != np.uint64(bitmask):
            raise KeyError(f"determinant {bitmask:#x} not in sector")
        return pos

    def embed(self, vec: np.ndarray) -> np.ndarray:
        """Sector amplitudes -> full 2^n complex statevector."""
        full = np.zeros(1 << self.n_qubits, dtype=np.complex128)
        full[self.states] = vec
        return full

    def restrict(self, full: np.ndarray) -> np.ndarray:
        return full[self.states]


def sector_basis(n_qubits: int, n_alpha: int, n_beta: int) -> SectorBasis:
    idx = np.arange(1 << n_qubits, dtype=np.uint64)
    alpha_mask = np.uint64(sum(1 << q for q in range(0, n_qubits, 2)))
    beta_mask = np.uint64(sum(1 << q for q in range(1, n_qubits, 2)))
    sel = (np.bitwise_count(idx & alpha_mask) == n_alpha) & (
        np.bitwise_count(idx & beta_mask) == n_beta
    )
    return SectorBasis(n_qubits, n_alpha, n_beta, idx[sel])


def basis_for_system(system: MoleculeSystem) -> SectorBasis:
    n_alpha = (system.n_electrons + system.integrals.ms2) // 2
    n_beta = system.n_electrons - n_alpha
    return sector_basis(system.n_qubits, n_alpha, n_beta)


def project_operator(ps: PauliSum, basis: SectorBasis) -> sp.csr_matrix:
    """P O P as a sparse matrix over the sector determinants.

    Returns a real matrix whenever the projection is real (the case for
    Hamiltonians and for JW images of the anti-Hermitian generators used
    here), complex otherwise.
    """
    states = basis.states
    dim = basis.dim
    src = np.arange(dim)
    rows, cols, vals = [], [], []
    for (x, z), c in ps.items():
        amp = c * _I_POW[(x & z).bit_count() % 4]
        targets = states ^ np.uint64(x)
        pos = np.searchsorted(states, targets)
        pos_c = np.minimum(pos, dim - 1)
        valid = states[pos_c] == targets
        if not valid.any():
            continue
        signs = 1.0 - 2.0 * (
            np.bitwise_count(states[valid] & np.uint64(z)).astype(np.float64) % 2.0
        )
        rows.append(pos_c[valid])
        cols.append(src[valid])
        vals.append(amp * signs)
    if not rows:
        return sp.csr_matrix((dim, dim))
    mat = sp.coo_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
        shape=(dim, dim),
        dtype=np.complex128,
    ).tocsr()
    if abs(mat.imag).max() < 1e-12:
        return mat.real
    return mat


@dataclass
class Eigenpair:
    """One exact root: sector amplitudes plus spin diagnostics."""

    index: int
    energy: float
    s_squared: float
    vector: np.ndarray
    basis: SectorBasis
    residual: float

    def to_full(self) -> np.ndarray:
        return self.basis.embed(self.vector)


def fci_spectrum(
    system: MoleculeSystem,
    n_roots: int | None = None,
    degeneracy_tol: float = 1e-9,
) -> list[Eigenpair]:
    """All (or the lowest n_roots) exact eigenstates of the active space.

    Degenerate energy groups are rotated into the S^2 eigenbasis so every
    returned root has a sharp spin label, and each vector's phase is fixed
    by making its largest-magnitude amplitude real positive.
    """
    basis = basis_for_system(system)
    h_mat = project_operator(system.hamiltonian, basis)
    h_dense = np.asarray(h_mat.todense())
    if np.iscomplexobj(h_dense):
        raise ValueError("Hamiltonian projection should be real")
    energies, vectors = np.linalg.eigh(h_dense)

    s2_dense = np.asarray(project_operator(s_squared_operator(basis.n_qubits), basis).todense())
    start = 0
    while start < energies.size:
        stop = start + 1
        while stop < energies.size and energies[stop] - energies[start] < degeneracy_tol:
            stop += 1
        if stop - start > 1:
            block = vectors[:, start:stop]
            s2_block = block.T @ s2_dense @ block
            _, rot = np.linalg.eigh(0.5 * (s2_block + s2_block.T))
            vectors[:, start:stop] = block @ rot
        start = stop

    count = energies.size if n_roots is None else min(n_roots, energies.size)
    roots = []
    for k in range(count):
        v = vectors[:, k]
        pivot = np.argmax(np.abs(v))
        if v[pivot] < 0:
            v = -v
        s2_val = float(v @ s2_dense @ v)
        resid = float(np.linalg.norm(h_dense @ v - energies[k] * v))
        roots.append(Eigenpair(k, float(energies[k]), s2_val, v, basis, resid))
    return roots


def lowest_singlet_excited(roots: list[Eigenpair], tol: float = 1e-6) -> Eigenpair | None:
    """First root above the ground state with S^2 ~ 0."""
    for pair in roots[1:]:
        if pair.s_squared < tol:
            return pair
    return None


def track_overlaps(vector: np.ndarray, roots: list[Eigenpair]) -> np.ndarray:
    """|<psi|root>|^2 for a sector-basis amplitude vector."""
    return np.array([abs(np.vdot(pair.vector, vector)) ** 2 for pair in roots])


def spectrum_payload(system: MoleculeSystem, roots: list[Eigenpair]) -> dict:
    return {
        "fixture": system.label,
        "fixture_sha256": system.fixture_sha256,
        "n_qubits": system.n_qubits,
        "n_electrons": system.n_electrons,
        "sector_dim": roots[0].basis.dim if roots else 0,
        "roots": [
            {
                "index": pair.index,
                "energy": pair.energy,
                "s_squared": pair.s_squared,
                "residual": pair.residual,
            }
            for pair in roots
        ],
    }
