"""Fermionic excitation generators and their qubit images.

Spin-orbitals are integers under the interleaved convention: the alpha
spin-orbital of spatial orbital p is 2p and the beta one is 2p+1, and the
spin-orbital index doubles as the qubit index.  Each generator is the
anti-Hermitian combination tau = t - t^dag of a canonical normal-ordered
monomial

    t = a^dag_{c1} ... a^dag_{ck} a_{xk} ... a_{x1},   c1 < ... < ck,  x1 < ... < xk,

so any permutation of the input indices canonicalizes to the same object,
with the sign difference absorbed into the variational amplitude.

Five kinds are supported: plain singles and doubles, hole/particle
scatterers carrying one quasi vertex pinned to the contractible orbital
window, and the triples their composites map onto.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .paulis import PauliSum, ladder_operator

KINDS = ("single", "double", "scatterer_h", "scatterer_p", "triple")

_RANK = {"single": 1, "double": 2, "scatterer_h": 2, "scatterer_p": 2, "triple": 3}


def spin_of(so: int) -> int:
    """0 for alpha, 1 for beta."""
    return so & 1


def spatial_of(so: int) -> int:
    return so >> 1


def so_index(spatial: int, spin: int) -> int:
    return 2 * spatial + spin


def _fmt_group(indices: tuple[int, ...], quasi: int | None) -> str:
    if quasi is None or quasi not in indices:
        return ",".join(str(i) for i in indices)
    rest = [str(i) for i in indices if i != quasi]
    return ",".join(rest + [f"{quasi}*"])


@dataclass(frozen=True, order=True)
class FermionGenerator:
    """Canonicalized anti-Hermitian excitation generator."""

    kind: str
    creators: tuple[int, ...]
    annihilators: tuple[int, ...]
    quasi: int | None = None
    label: str = field(init=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "label", self._make_label())

    def _make_label(self) -> str:
        tag = {"single": "S", "double": "D", "scatterer_h": "Sh",
               "scatterer_p": "Sp", "triple": "T"}[self.kind]
        if self.kind == "scatterer_h":
            lhs = _fmt_group(self.annihilators, None)
            rhs = _fmt_group(self.creators, self.quasi)
        elif self.kind == "scatterer_p":
            lhs = _fmt_group(self.annihilators, self.quasi)
            rhs = _fmt_group(self.creators, None)
        else:
            lhs = _fmt_group(self.annihilators, None)
            rhs = _fmt_group(self.creators, None)
        return f"{tag}({lhs}->{rhs})"

    @property
    def rank(self) -> int:
        return _RANK[self.kind]

    def __repr__(self) -> str:
        return f"FermionGenerator({self.label})"


def make_generator(
    kind: str,
    creators: tuple[int, ...] | list[int],
    annihilators: tuple[int, ...] | list[int],
    quasi: int | None = None,
) -> FermionGenerator:
    """Validate, canonicalize, and build a generator.

    Creators and annihilators are each sorted ascending; repeated indices
    within a group are rejected (the monomial would vanish), as is a
    creator/annihilator overlap, which would make tau number-non-conserving
    on some sector.  Scatterer kinds must name their quasi vertex inside
    the proper group, and hole scatterers must keep the quasi orbital out
    of the annihilator list so the generator kills the reference.
    """
    if kind not in KINDS:
        raise ValueError(f"unknown generator kind {kind!r}")
    cre = tuple(sorted(int(c) for c in creators))
    ann = tuple(sorted(int(a) for a in annihilators))
    if len(set(cre)) != len(cre) or len(set(ann)) != len(ann):
        raise ValueError(f"repeated index in {kind} generator {cre}<-{ann}")
    if set(cre) & set(ann):
        raise ValueError(f"creator/annihilator overlap in {kind} generator")
    if len(cre) != len(ann) or len(cre) != _RANK[kind]:
        raise ValueError(f"{kind} generator needs rank {_RANK[kind]} index groups")
    if any(i < 0 for i in cre + ann):
        raise ValueError("negative spin-orbital index")
    n_alpha = sum(1 for c in cre if spin_of(c) == 0)
    if n_alpha != sum(1 for a in ann if spin_of(a) == 0):
        raise ValueError(f"spin projection not conserved: {cre} <- {ann}")
    if kind == "scatterer_h":
        if quasi is None or quasi not in cre:
            raise ValueError("hole scatterer needs its quasi vertex among the creators")
        if quasi in ann:
            raise ValueError("hole scatterer quasi vertex may not also be annihilated")
    elif kind == "scatterer_p":
        if quasi is None or quasi not in ann:
            raise ValueError("particle scatterer needs its quasi vertex among the annihilators")
        if quasi in cre:
            raise ValueError("particle scatterer quasi vertex may not also be created")
    else:
        if quasi is not None:
            raise ValueError(f"{kind} generator takes no quasi vertex")
    return FermionGenerator(kind, cre, ann, quasi)


def jordan_wigner(gen: FermionGenerator, n_qubits: int) -> PauliSum:
    """Qubit image of tau = t - t^dag under the Jordan-Wigner mapping.

    The result always has purely imaginary coefficients, so its dense
    matrix is real anti-symmetric.
    """
    t = PauliSum.identity(n_qubits)
    for c in gen.creators:
        t = t @ ladder_operator(c, n_qubits, dagger=True)
    for a in reversed(gen.annihilators):
        t = t @ ladder_operator(a, n_qubits, dagger=False)
    return t - t.dagger()


def shares_cso(cluster: FermionGenerator, scatterer: FermionGenerator) -> bool:
    """Whether the scatterer's quasi vertex is contracted by the cluster.

    A hole scatterer re-creates an occupied orbital m; the pair is
    contractible when the cluster annihilates that same m.  A particle
    scatterer consumes a virtual orbital e, contractible when the cluster
    creates e.  Purely symbolic, no operator algebra involved.
    """
    if cluster.kind != "double":
        return False
    if scatterer.kind == "scatterer_h":
        return scatterer.quasi in cluster.annihilators
    if scatterer.kind == "scatterer_p":
        return scatterer.quasi in cluster.creators
    return False


def composite_excitation(
    cluster: FermionGenerator, scatterer: FermionGenerator
) -> FermionGenerator:
    """Triple excitation label of a contracted cluster/scatterer pair.

    Contracting the quasi vertex out of the product leaves a net
    three-body excitation: for a hole scatterer the quasi orbital is
    created by the scatterer and annihilated by the cluster, and the
    reverse for a particle scatterer.  Raises when the pair is not
    contractible or when the contraction leaves a repeated index
    (degenerate composites carry no triple label).
    """
    if not shares_cso(cluster, scatterer):
        raise ValueError(
            f"{scatterer.label} does not contract with {cluster.label}"
        )
    q = scatterer.quasi
    if scatterer.kind == "scatterer_h":
        occ = [a for a in cluster.annihilators if a != q] + list(scatterer.annihilators)
        vir = list(cluster.creators) + [c for c in scatterer.creators if c != q]
    else:
        occ = list(cluster.annihilators) + [a for a in scatterer.annihilators if a != q]
        vir = [c for c in cluster.creators if c != q] + list(scatterer.creators)
    if len(set(occ)) != 3 or len(set(vir)) != 3 or set(occ) & set(vir):
        raise ValueError(
            f"degenerate composite for {cluster.label} x {scatterer.label}"
        )
    return make_generator("triple", tuple(vir), tuple(occ))
