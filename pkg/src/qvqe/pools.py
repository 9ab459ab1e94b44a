"""Generator pool enumeration.

All enumerations produce canonicalized generators in a deterministic
order (ascending canonical label) and conserve particle number and spin
projection by construction.  Occupied/virtual splits follow the aufbau
reference of the fixture's active space.
"""

from __future__ import annotations

from itertools import combinations

from .fermions import (
    FermionGenerator,
    composite_excitation,
    make_generator,
    spatial_of,
    spin_of,
)
from .hamiltonian import MoleculeSystem


def occupied_sos(system: MoleculeSystem) -> list[int]:
    return list(range(system.n_electrons))

def virtual_sos(system: MoleculeSystem) -> list[int]:
    return list(range(system.n_electrons, system.n_qubits))


def _balanced(creators, annihilators) -> bool:
    return sum(1 for c in creators if spin_of(c) == 0) == sum(
        1 for a in annihilators if spin_of(a) == 0
    )


def _sorted_by_label(gens):
    return sorted(gens, key=lambda g: g.label)


def singles_pool(system: MoleculeSystem) -> list[FermionGenerator]:
    """Spin-projection-conserving occupied -> virtual singles."""
    occ, virt = occupied_sos(system), virtual_sos(system)
    gens = [
        make_generator("single", (a,), (i,))
        for i in occ
        for a in virt
        if spin_of(a) == spin_of(i)
    ]
    return _sorted_by_label(gens)


def doubles_pool(system: MoleculeSystem) -> list[FermionGenerator]:
    occ, virt = occupied_sos(system), virtual_sos(system)
    gens = []
    for i, j in combinations(occ, 2):
        for a, b in combinations(virt, 2):
            if _balanced((a, b), (i, j)):
                gens.append(make_generator("double", (a, b), (i, j)))
    return _sorted_by_label(gens)


def triples_pool(system: MoleculeSystem) -> list[FermionGenerator]:
    occ, virt = occupied_sos(system), virtual_sos(system)
    gens = []
    for holes in combinations(occ, 3):
        for parts in combinations(virt, 3):
            if _balanced(parts, holes):
                gens.append(make_generator("triple", parts, holes))
    return _sorted_by_label(gens)


def gsd_pool(system: MoleculeSystem) -> list[FermionGenerator]:
    """Generalized singles and doubles: the occupied/virtual split dropped.

    Singles run over all same-spin orbital pairs (the p<q orientation is
    kept; the reverse is the same generator negated).  Doubles run over
    four distinct spin-orbitals split into two unordered pairs; swapping
    the creator and annihilator pair also only flips the sign, so the
    annihilator pair is pinned to contain the smallest index.
    """
    nq = system.n_qubits
    gens = []
    for p in range(nq):
        for q in range(p + 1, nq):
            if spin_of(p) == spin_of(q):
                gens.append(make_generator("single", (q,), (p,)))
    for quad in combinations(range(nq), 4):
        lowest = quad[0]
        rest = quad[1:]
        for partner in rest:
            ann = (lowest, partner)
            cre = tuple(x for x in rest if x != partner)
            if _balanced(cre, ann):
                gens.append(make_generator("double", cre, ann))
    return _sorted_by_label(gens)


def default_cso_window(system: MoleculeSystem) -> tuple[list[int], list[int]]:
    """Contractible spatial orbitals: HOMO on the hole side, LUMO on the particle side."""
    return [system.homo], [system.lumo]


def hole_scatterer_candidates(
    system: MoleculeSystem,
    cluster: FermionGenerator,
    cso_occupied: list[int],
) -> list[FermionGenerator]:
    """S_h candidates contracting with the given cluster.

    The quasi vertex m is an occupied spin-orbital inside the window that
    the cluster annihilates; the scatterer re-creates it together with one
    virtual a of opposite spin while annihilating a fresh occupied pair.
    Pairs whose contraction with the cluster would be degenerate are
    dropped here, before any screening optimization runs.
    """
    occ = occupied_sos(system)
    virt = virtual_sos(system)
    out = []
    for m in cluster.annihilators:
        if spatial_of(m) not in cso_occupied:
            continue
        for a in virt:
            if spin_of(a) == spin_of(m):
                continue
            for i, j in combinations([o for o in occ if o != m], 2):
                if not _balanced((a, m), (i, j)):
                    continue
                sigma = make_generator("scatterer_h", (a, m), (i, j), quasi=m)
                try:
                    composite_excitation(cluster, sigma)
                except ValueError:
                    continue
                out.append(sigma)
    return _sorted_by_label(out)


def particle_scatterer_candidates(
    system: MoleculeSystem,
    cluster: FermionGenerator,
    cso_virtual: list[int],
) -> list[FermionGenerator]:
    """S_p candidates: quasi vertex e is a windowed virtual the cluster creates."""
    occ = occupied_sos(system)
    virt = virtual_sos(system)
    out = []
    for e in cluster.creators:
        if spatial_of(e) not in cso_virtual:
            continue
        for i in occ:
            if spin_of(i) == spin_of(e):
                continue
            for a, b in combinations([v for v in virt if v != e], 2):
                if not _balanced((a, b), (i, e)):
                    continue
                sigma = make_generator("scatterer_p", (a, b), (i, e), quasi=e)
                try:
                    composite_excitation(cluster, sigma)
                except ValueError:
                    continue
                out.append(sigma)
    return _sorted_by_label(out)


def scatterer_candidates(
    system: MoleculeSystem,
    cluster: FermionGenerator,
    cso_occupied: list[int] | None = None,
    cso_virtual: list[int] | None = None,
) -> list[FermionGenerator]:
    if cso_occupied is None or cso_virtual is None:
        occ_win, virt_win = default_cso_window(system)
        cso_occupied = cso_occupied if cso_occupied is not None else occ_win
        cso_virtual = cso_virtual if cso_virtual is not None else virt_win
    return hole_scatterer_candidates(system, cluster, cso_occupied) + \
        particle_scatterer_candidates(system, cluster, cso_virtual)
