"""Molecular integral I/O and second-quantized Hamiltonian assembly.

Integrals travel in the FCIDUMP text format: a small namelist header and
then one record per line, ``value i j k l`` with 1-based orbital indices in
chemists' notation, (ij|kl).  Records with k=l=0 carry the one-body part,
(i,0,0,0) records carry orbital energies, and the all-zero record holds the
constant shift (nuclear repulsion plus any frozen-core contribution).
"""

from __future__ import annotations

import hashlib
import json
import os
import re
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .paulis import PauliSum, ladder_operator


@dataclass
class MolecularIntegrals:
    n_orbitals: int
    n_electrons: int
    ms2: int
    core_energy: float
    h1: np.ndarray
    h2: np.ndarray  # chemists' (ij|kl)
    orbital_energies: np.ndarray | None = None

    def copy(self) -> "MolecularIntegrals":
        oe = None if self.orbital_energies is None else self.orbital_energies.copy()
        return MolecularIntegrals(
            self.n_orbitals, self.n_electrons, self.ms2, self.core_energy,
            self.h1.copy(), self.h2.copy(), oe,
        )


def parse_fcidump(source: str | Path) -> MolecularIntegrals:
    """Read an FCIDUMP file or text blob; raises with line numbers."""
    text = Path(source).read_text() if isinstance(source, Path) else source
    lines = text.splitlines()

    header_end = None
    header = []
    for ln_no, line in enumerate(lines):
        header.append(line)
        if "&END" in line.upper() or line.strip() == "/":
            header_end = ln_no
            break
    if header_end is None:
        raise ValueError("FCIDUMP header never terminated with &END")
    head_blob = " ".join(header)

    def field_int(name: str) -> int:
        m = re.search(rf"{name}\s*=\s*(-?\d+)", head_blob, re.IGNORECASE)
        if not m:
            raise ValueError(f"FCIDUMP header missing {name}")
        return int(m.group(1))

    n_orb = field_int("NORB")
    n_elec = field_int("NELEC")
    ms2_m = re.search(r"MS2\s*=\s*(-?\d+)", head_blob, re.IGNORECASE)
    ms2 = int(ms2_m.group(1)) if ms2_m else 0

    h1 = np.zeros((n_orb, n_orb))
    h2 = np.zeros((n_orb, n_orb, n_orb, n_orb))
    eps = np.full(n_orb, np.nan)
    core = 0.0

    for ln_no in range(header_end + 1, len(lines)):
        line = lines[ln_no].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 5:
            raise ValueError(f"line {ln_no + 1}: expected 'value i j k l', got {line!r}")
        try:
            v = float(parts[0])
            i, j, k, l = (int(p) for p in parts[1:])
        except ValueError as exc:
            raise ValueError(f"line {ln_no + 1}: {exc}") from None
        for name, idx in zip("ijkl", (i, j, k, l)):
            if idx < 0 or idx > n_orb:
                raise ValueError(f"line {ln_no + 1}: index {name}={idx} outside 0..{n_orb}")
        if i == 0 and j == 0 and k == 0 and l == 0:
            core = v
        elif j == 0 and k == 0 and l == 0:
            eps[i - 1] = v
        elif k == 0 and l == 0:
            if i == 0 or j == 0:
                raise ValueError(f"line {ln_no + 1}: malformed one-body record")
            h1[i - 1, j - 1] = v
            h1[j - 1, i - 1] = v
        else:
            if min(i, j, k, l) == 0:
                raise ValueError(f"line {ln_no + 1}: malformed two-body record")
            a, b, c, d = i - 1, j - 1, k - 1, l - 1
            for p, q in ((a, b), (b, a)):
                for r, s in ((c, d), (d, c)):
                    h2[p, q, r, s] = v
                    h2[r, s, p, q] = v

    orbital_energies = None if np.isnan(eps).all() else np.nan_to_num(eps)
    return MolecularIntegrals(n_orb, n_elec, ms2, core, h1, h2, orbital_energies)


def serialize_fcidump(ints: MolecularIntegrals, thresh: float = 1e-12) -> str:
    """Inverse of parse_fcidump, writing each 8-fold class once."""
    n = ints.n_orbitals
    lines = [f" &FCI NORB={n:3d},NELEC={ints.n_electrons:3d},MS2={ints.ms2:2d},"]
    lines.append("  ORBSYM=" + "1," * n)
    lines.append("  ISYM=1,")
    lines.append(" &END")
    for i in range(n):
        for j in range(i + 1):
            ij = i * (i + 1) // 2 + j
            for k in range(n):
                for l in range(k + 1):
                    kl = k * (k + 1) // 2 + l
                    if ij < kl:
                        continue
                    v = ints.h2[i, j, k, l]
                    if abs(v) > thresh:
                        lines.append(f"{v:23.16E} {i + 1:4d} {j + 1:4d} {k + 1:4d} {l + 1:4d}")
    for i in range(n):
        for j in range(i + 1):
            if abs(ints.h1[i, j]) > thresh:
                lines.append(f"{ints.h1[i, j]:23.16E} {i + 1:4d} {j + 1:4d} {0:4d} {0:4d}")
    if ints.orbital_energies is not None:
        for i in range(n):
            lines.append(f"{ints.orbital_energies[i]:23.16E} {i + 1:4d} {0:4d} {0:4d} {0:4d}")
    lines.append(f"{ints.core_energy:23.16E} {0:4d} {0:4d} {0:4d} {0:4d}")
    return "\n".join(lines) + "\n"


def freeze_core(ints: MolecularIntegrals, n_frozen: int) -> MolecularIntegrals:
    """Fold the lowest n_frozen doubly-occupied orbitals into the core.

    The frozen orbitals contribute a constant and a mean-field potential:

        E_core += sum_c 2 h_cc + sum_cc' [2 (cc|c'c') - (cc'|c'c)]
        h_pq   += sum_c [2 (pq|cc) - (pc|cq)]

    and the active tensors are the remaining slices.
    """
    if n_frozen == 0:
        return ints.copy()
    if n_frozen < 0 or 2 * n_frozen > ints.n_electrons:
        raise ValueError(f"cannot freeze {n_frozen} orbitals with {ints.n_electrons} electrons")
    c = n_frozen
    h1, h2 = ints.h1, ints.h2
    core = ints.core_energy
    core += 2.0 * np.trace(h1[:c, :c])
    core += 2.0 * np.einsum("iijj->", h2[:c, :c, :c, :c])
    core -= np.einsum("ijji->", h2[:c, :c, :c, :c])
    veff = 2.0 * np.einsum("pqcc->pq", h2[:, :, :c, :c]) - np.einsum(
        "pccq->pq", h2[:, :c, :c, :]
    )
    h1_act = (h1 + veff)[c:, c:]
    h2_act = h2[c:, c:, c:, c:].copy()
    eps = None if ints.orbital_energies is None else ints.orbital_energies[c:].copy()
    return MolecularIntegrals(
        ints.n_orbitals - c, ints.n_electrons - 2 * c, ints.ms2, core,
        h1_act, h2_act, eps,
    )


def hf_energy_from_integrals(ints: MolecularIntegrals) -> float:
    """Closed-shell determinant energy straight from the tensors."""
    n_occ = ints.n_electrons // 2
    o = slice(0, n_occ)
    e = ints.core_energy + 2.0 * np.trace(ints.h1[o, o])
    e += 2.0 * np.einsum("iijj->", ints.h2[o, o, o, o])
    e -= np.einsum("ijji->", ints.h2[o, o, o, o])
    return float(e)


def excitation_operator(p: int, q: int, n_qubits: int) -> PauliSum:
    """JW image of a^dag_p a_q on spin-orbitals."""
    return ladder_operator(p, n_qubits, dagger=True) @ ladder_operator(q, n_qubits, dagger=False)


def build_qubit_hamiltonian(ints: MolecularIntegrals) -> PauliSum:
    """Interleaved-convention JW Hamiltonian from spatial-orbital tensors.

    H = E_core + sum_{pq,s} h_pq a+_{ps} a_{qs}
      + 1/2 sum_{pqrs,st} (pq|rs) a+_{ps} a+_{rt} a_{st} a_{qs}
    """
    n = ints.n_orbitals
    nq = 2 * n
    ladders = {}
    for so in range(nq):
        ladders[(so, True)] = ladder_operator(so, nq, dagger=True)
        ladders[(so, False)] = ladder_operator(so, nq, dagger=False)

    ham = PauliSum.identity(nq, ints.core_energy)
    for p in range(n):
        for q in range(n):
            if abs(ints.h1[p, q]) < 1e-14:
                continue
            for s in (0, 1):
                term = ladders[(2 * p + s, True)] @ ladders[(2 * q + s, False)]
                ham.add_scaled(term, ints.h1[p, q])
    for p in range(n):
        for q in range(n):
            for r in range(n):
                for s in range(n):
                    v = ints.h2[p, q, r, s]
                    if abs(v) < 1e-14:
                        continue
                    for sig in (0, 1):
                        for tau in (0, 1):
                            term = (
                                ladders[(2 * p + sig, True)]
                                @ ladders[(2 * r + tau, True)]
                                @ ladders[(2 * s + tau, False)]
                                @ ladders[(2 * q + sig, False)]
                            )
                            ham.add_scaled(term, 0.5 * v)
    return ham


def hf_bitmask(n_electrons: int) -> int:
    return (1 << n_electrons) - 1


def hf_statevector(n_electrons: int, n_qubits: int) -> np.ndarray:
    v = np.zeros(1 << n_qubits, dtype=np.complex128)
    v[hf_bitmask(n_electrons)] = 1.0
    return v


def number_operator(n_qubits: int) -> PauliSum:
    """N = sum_p (I - Z_p)/2."""
    terms = {(0, 0): n_qubits / 2.0 + 0.0j}
    for p in range(n_qubits):
        terms[(0, 1 << p)] = -0.5 + 0.0j
    return PauliSum(n_qubits, terms)


def sz_operator(n_qubits: int) -> PauliSum:
    """S_z = (N_alpha - N_beta)/2 under the interleaved convention."""
    terms: dict[tuple[int, int], complex] = {}
    for p in range(n_qubits):
        sign = 1.0 if p % 2 == 0 else -1.0
        terms[(0, 1 << p)] = terms.get((0, 1 << p), 0.0) - 0.25 * sign
        terms[(0, 0)] = terms.get((0, 0), 0.0) + 0.25 * sign
    return PauliSum(n_qubits, {k: v for k, v in terms.items() if abs(v) > 1e-14})


def s_squared_operator(n_qubits: int) -> PauliSum:
    """S^2 = S+ S- + Sz (Sz - 1) over interleaved spin-orbitals."""
    if n_qubits % 2:
        raise ValueError("spin-orbital register must be even")
    n_spatial = n_qubits // 2
    s_plus = PauliSum.zero(n_qubits)
    for p in range(n_spatial):
        s_plus.add_scaled(excitation_operator(2 * p, 2 * p + 1, n_qubits))
    sz = sz_operator(n_qubits)
    ident = PauliSum.identity(n_qubits)
    return (s_plus @ s_plus.dagger()) + (sz @ (sz - ident))


@dataclass
class MoleculeSystem:
    """A fixture bound to its qubit Hamiltonian and orbital bookkeeping."""

    label: str
    integrals: MolecularIntegrals        # active space
    raw_integrals: MolecularIntegrals    # before freezing
    n_frozen: int
    hamiltonian: PauliSum
    sidecar: dict = field(default_factory=dict)
    fixture_path: Path | None = None
    fixture_sha256: str = ""

    @property
    def n_qubits(self) -> int:
        return 2 * self.integrals.n_orbitals

    @property
    def n_electrons(self) -> int:
        return self.integrals.n_electrons

    @property
    def n_spatial(self) -> int:
        return self.integrals.n_orbitals

    @property
    def occupied_spatial(self) -> list[int]:
        return list(range(self.n_electrons // 2))

    @property
    def virtual_spatial(self) -> list[int]:
        return list(range(self.n_electrons // 2, self.n_spatial))

    @property
    def homo(self) -> int:
        return self.n_electrons // 2 - 1

    @property
    def lumo(self) -> int:
        return self.n_electrons // 2

    @property
    def hf_energy(self) -> float:
        return hf_energy_from_integrals(self.integrals)

    def hf_state(self) -> np.ndarray:
        return hf_statevector(self.n_electrons, self.n_qubits)


def fixtures_root() -> Path:
    env = os.environ.get("QVQE_FIXTURES")
    if env:
        return Path(env)
    return Path("fixtures")


def resolve_fixture(name: str | Path) -> Path:
    """Accept a direct path or a label like 'H4_d3.20'."""
    p = Path(name)
    if p.suffix == ".fcidump" and p.exists():
        return p
    m = re.fullmatch(r"([A-Za-z0-9]+)_(d[\d.]+)", str(name))
    if m:
        candidate = fixtures_root() / m.group(1) / f"{m.group(2)}.fcidump"
        if candidate.exists():
            return candidate
        raise FileNotFoundError(f"no fixture {candidate} for label {name!r}")
    if p.exists():
        return p
    raise FileNotFoundError(f"fixture {name!r} not found")


def load_fixture(name: str | Path, n_frozen: int | None = None) -> MoleculeSystem:
    """Parse a fixture, apply its (or the given) core freeze, build H."""
    path = resolve_fixture(name)
    raw = parse_fcidump(path)
    sidecar = {}
    sidecar_path = path.with_suffix(".json")
    if sidecar_path.exists():
        sidecar = json.loads(sidecar_path.read_text())
    if n_frozen is None:
        n_frozen = int(sidecar.get("suggested_frozen_core", 0))
    active = freeze_core(raw, n_frozen)
    ham = build_qubit_hamiltonian(active)
    label = f"{path.parent.name}_{path.stem}"
    digest = hashlib.sha256(path.read_bytes()).hexdigest()
    return MoleculeSystem(
        label=label,
        integrals=active,
        raw_integrals=raw,
        n_frozen=n_frozen,
        hamiltonian=ham,
        sidecar=sidecar,
        fixture_path=path,
        fixture_sha256=digest,
    )
