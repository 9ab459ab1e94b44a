"""Ansatz state preparation, energies, and analytic gradients.

Every pool generator tau obeys tau^3 = -tau (each is t - t^dag for a
normal-ordered monomial t with t^2 = 0 and t t^dag t = t), so the
exponential truncates exactly:

    exp(theta tau) v = v + sin(theta) tau v + (1 - cos(theta)) tau^2 v

which costs two matrix-vector products per factor and is exactly unitary.

Gradients come from one adjoint sweep.  With psi = G_M ... G_1 phi and
lambda = H psi, dE/dtheta_j = 2 Re <lambda_j | A_j | psi_j> where both
vectors are pulled back through G_j^dag one factor at a time, so the whole
gradient costs a constant factor more than one energy evaluation.

Two interchangeable backends execute the algebra: a reference dense
2^n path and an (N, Sz)-sector path whose projected operators are real,
cached per generator.  Both produce identical physics; tests pin their
agreement.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .fci import SectorBasis, basis_for_system, project_operator
from .fermions import FermionGenerator, jordan_wigner
from .hamiltonian import MoleculeSystem
from .paulis import PauliSum


@dataclass
class GradientReport:
    energy: float
    gradient: np.ndarray
    method: str


@dataclass
class AnsatzProgram:
    """Ordered exponential factors; ops[0] acts on the reference first."""

    ops: list[FermionGenerator] = field(default_factory=list)
    params: np.ndarray = field(default_factory=lambda: np.zeros(0))
    block_ids: list[int] = field(default_factory=list)

    def __post_init__(self):
        self.params = np.asarray(self.params, dtype=np.float64)
        if len(self.block_ids) == 0 and len(self.ops):
            self.block_ids = [0] * len(self.ops)
        if len(self.ops) != self.params.size or len(self.ops) != len(self.block_ids):
            raise ValueError("ops, params, block_ids lengths differ")

    def extended(self, ops, params, block_id: int) -> "AnsatzProgram":
        return AnsatzProgram(
            self.ops + list(ops),
            np.concatenate([self.params, np.asarray(params, dtype=np.float64)]),
            self.block_ids + [block_id] * len(ops),
        )

    def with_params(self, params) -> "AnsatzProgram":
        return AnsatzProgram(list(self.ops), np.asarray(params), list(self.block_ids))

    def __len__(self) -> int:
        return len(self.ops)


class FullSpaceBackend:
    """Dense 2^n complex statevectors driven by PauliSum application."""

    def __init__(self, system: MoleculeSystem):
        self.system = system
        self._gen_cache: dict[FermionGenerator, PauliSum] = {}

    def compile_generator(self, gen: FermionGenerator) -> PauliSum:
        img = self._gen_cache.get(gen)
        if img is None:
            img = jordan_wigner(gen, self.system.n_qubits)
            self._gen_cache[gen] = img
        return img

    def apply_generator(self, op: PauliSum, vec: np.ndarray) -> np.ndarray:
        return op.apply(vec)

    def apply_hamiltonian(self, vec: np.ndarray) -> np.ndarray:
        return self.system.hamiltonian.apply(vec)

    def reference(self) -> np.ndarray:
        return self.system.hf_state()

    @staticmethod
    def real_inner(u: np.ndarray, v: np.ndarray) -> float:
        return float(np.vdot(u, v).real)


class SectorBackend:
    """Real arithmetic over the (N, Sz) sector; the production path."""

    def __init__(self, system: MoleculeSystem, basis: SectorBasis | None = None):
        self.system = system
        self.basis = basis if basis is not None else basis_for_system(system)
        h = project_operator(system.hamiltonian, self.basis)
        if np.iscomplexobj(h):
            raise ValueError("sector Hamiltonian should project to a real matrix")
        self.h_mat: sp.csr_matrix = h
        self._gen_cache: dict[FermionGenerator, sp.csr_matrix] = {}

    def compile_generator(self, gen: FermionGenerator) -> sp.csr_matrix:
        mat = self._gen_cache.get(gen)
        if mat is None:
            img = jordan_wigner(gen, self.system.n_qubits)
            mat = project_operator(img, self.basis)
            if np.iscomplexobj(mat):
                raise ValueError(f"generator {gen.label} projected complex")
            self._gen_cache[gen] = mat
        return mat

    def apply_generator(self, op: sp.csr_matrix, vec: np.ndarray) -> np.ndarray:
        return op @ vec

    def apply_hamiltonian(self, vec: np.ndarray) -> np.ndarray:
        return self.h_mat @ vec

    def reference(self) -> np.ndarray:
        vec = np.zeros(self.basis.dim)
        vec[self.basis.index_of((1 << self.system.n_electrons) - 1)] = 1.0
        return vec

    @staticmethod
    def real_inner(u: np.ndarray, v: np.ndarray) -> float:
        return float(u @ v)


def apply_generator_exponential(backend, op, theta: float, vec: np.ndarray) -> np.ndarray:
    """exp(theta A) vec via the closed form; exact for A^3 = -A."""
    if theta == 0.0:
        return vec.copy()
    w = backend.apply_generator(op, vec)
    u = backend.apply_generator(op, w)
    return vec + np.sin(theta) * w + (1.0 - np.cos(theta)) * u


def prepare_state(backend, program: AnsatzProgram, base: np.ndarray | None = None) -> np.ndarray:
    vec = backend.reference() if base is None else base.copy()
    for gen, theta in zip(program.ops, program.params):
        op = backend.compile_generator(gen)
        vec = apply_generator_exponential(backend, op, float(theta), vec)
    return vec


def state_energy(backend, program: AnsatzProgram, base: np.ndarray | None = None) -> float:
    vec = prepare_state(backend, program, base)
    return backend.real_inner(vec, backend.apply_hamiltonian(vec))


def energy_and_gradient(
    backend,
    program: AnsatzProgram,
    base: np.ndarray | None = None,
    method: str = "adjoint",
    fd_step: float = 1e-5,
) -> GradientReport:
    """Energy and dE/dtheta over the program's own parameters.

    The reference (or the supplied frozen base state) is held fixed; the
    gradient covers exactly program.params.
    """
    if method == "finite_difference":
        return _fd_gradient(backend, program, base, fd_step)
    if method != "adjoint":
        raise ValueError(f"unknown gradient method {method!r}")

    psi = prepare_state(backend, program, base)
    lam = backend.apply_hamiltonian(psi)
    energy = backend.real_inner(psi, lam)
    grad = np.zeros(len(program))
    ops = [backend.compile_generator(g) for g in program.ops]
    for j in range(len(program) - 1, -1, -1):
        a_psi = backend.apply_generator(ops[j], psi)
        grad[j] = 2.0 * backend.real_inner(lam, a_psi)
        theta = float(program.params[j])
        psi = apply_generator_exponential(backend, ops[j], -theta, psi)
        lam = apply_generator_exponential(backend, ops[j], -theta, lam)
    return GradientReport(energy, grad, "adjoint")


def _fd_gradient(backend, program: AnsatzProgram, base, step: float) -> GradientReport:
    params = program.params.copy()
    grad = np.zeros(params.size)
    for j in range(params.size):
        plus = params.copy()
        plus[j] += step
        minus = params.copy()
        minus[j] -= step
        e_plus = state_energy(backend, program.with_params(plus), base)
        e_minus = state_energy(backend, program.with_params(minus), base)
        grad[j] = (e_plus - e_minus) / (2.0 * step)
    energy = state_energy(backend, program, base)
    return GradientReport(energy, grad, "finite_difference")


def pool_gradients(backend, psi: np.ndarray, gens: list[FermionGenerator]) -> np.ndarray:
    """<psi|[H, A_g]|psi> = 2 <H psi| A_g psi> for each candidate generator."""
    h_psi = backend.apply_hamiltonian(psi)
    out = np.zeros(len(gens))
    for k, gen in enumerate(gens):
        op = backend.compile_generator(gen)
        out[k] = 2.0 * backend.real_inner(h_psi, backend.apply_generator(op, psi))
    return out


def overlap_sq(u: np.ndarray, v: np.ndarray) -> float:
    return float(abs(np.vdot(u, v)) ** 2)


# dense-path conveniences for oracle checks

def prepare_ansatz_state(system: MoleculeSystem, program: AnsatzProgram) -> np.ndarray:
    return prepare_state(FullSpaceBackend(system), program)


def ansatz_energy(system: MoleculeSystem, program: AnsatzProgram) -> float:
    return state_energy(FullSpaceBackend(system), program)
