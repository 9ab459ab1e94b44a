"""Sparse Pauli-string algebra over symplectic bitmask keys.

A Pauli string on n qubits is stored as a pair of integer masks (x, z):
bit p of x flags an X on qubit p, bit p of z flags a Z, both flag a Y.
The stored string is the phase-fixed product

    W(x, z) = i**popcount(x & z) * X^x * Z^z

which is always Hermitian, so a sum of W's with real coefficients is a
Hermitian operator and purely imaginary coefficients give an anti-Hermitian
one.  Basis states are little-endian integers: bit p of the index is the
occupation of qubit p.
"""

from __future__ import annotations

import numpy as np

_TOL = 1e-14

_I_POW = (1.0 + 0.0j, 1.0j, -1.0 + 0.0j, -1.0j)


def _phase_product(x1: int, z1: int, x2: int, z2: int) -> tuple[int, int, complex]:
    """Multiply W(x1,z1) * W(x2,z2) -> (x3, z3, phase) with phase in {1,i,-1,-i}."""
    x3 = x1 ^ x2
    z3 = z1 ^ z2
    e = (x1 & z1).bit_count() + (x2 & z2).bit_count() - (x3 & z3).bit_count()
    e += 2 * (z1 & x2).bit_count()
    return x3, z3, _I_POW[e % 4]


class PauliSum:
    """Linear combination of Pauli strings on a fixed qubit register."""

    __slots__ = ("n_qubits", "_terms")

    def __init__(self, n_qubits: int, terms: dict[tuple[int, int], complex] | None = None):
        self.n_qubits = n_qubits
        self._terms: dict[tuple[int, int], complex] = dict(terms) if terms else {}

    @classmethod
    def zero(cls, n_qubits: int) -> "PauliSum":
        return cls(n_qubits)

    @classmethod
    def identity(cls, n_qubits: int, coeff: complex = 1.0) -> "PauliSum":
        return cls(n_qubits, {(0, 0): complex(coeff)})

    def items(self) -> list[tuple[tuple[int, int], complex]]:
        """Terms in canonical (x, z) order."""
        return sorted(self._terms.items())

    def __len__(self) -> int:
        return len(self._terms)

    def copy(self) -> "PauliSum":
        return PauliSum(self.n_qubits, self._terms)

    def _add_term(self, key: tuple[int, int], coeff: complex) -> None:
        c = self._terms.get(key, 0.0) + coeff
        if abs(c) <= _TOL:
            self._terms.pop(key, None)
        else:
            self._terms[key] = c

    def __add__(self, other: "PauliSum") -> "PauliSum":
        if self.n_qubits != other.n_qubits:
            raise ValueError("qubit counts differ")
        out = self.copy()
        for key, c in other._terms.items():
            out._add_term(key, c)
        return out

    def add_scaled(self, other: "PauliSum", scale: complex = 1.0) -> None:
        """In-place self += scale * other; for bulk accumulation."""
        if self.n_qubits != other.n_qubits:
            raise ValueError("qubit counts differ")
        for key, c in other._terms.items():
            self._add_term(key, c * scale)

    def __sub__(self, other: "PauliSum") -> "PauliSum":
        return self + (other * -1.0)

    def __mul__(self, scalar: complex) -> "PauliSum":
        if abs(scalar) <= _TOL:
            return PauliSum(self.n_qubits)
        return PauliSum(self.n_qubits, {k: c * scalar for k, c in self._terms.items()})

    __rmul__ = __mul__

    def __matmul__(self, other: "PauliSum") -> "PauliSum":
        if self.n_qubits != other.n_qubits:
            raise ValueError("qubit counts differ")
        out = PauliSum(self.n_qubits)
        for (x1, z1), c1 in self._terms.items():
            for (x2, z2), c2 in other._terms.items():
                x3, z3, ph = _phase_product(x1, z1, x2, z2)
                out._add_term((x3, z3), c1 * c2 * ph)
        return out

    def dagger(self) -> "PauliSum":
        """Hermitian adjoint: each W(x,z) is Hermitian, so conjugate coefficients."""
        return PauliSum(self.n_qubits, {k: c.conjugate() for k, c in self._terms.items()})

    def is_hermitian(self, tol: float = 1e-12) -> bool:
        return all(abs(c.imag) <= tol for c in self._terms.values())

    def is_antihermitian(self, tol: float = 1e-12) -> bool:
        return all(abs(c.real) <= tol for c in self._terms.values())

    def norm(self) -> float:
        """Coefficient 2-norm (Frobenius norm up to a 2^{n/2} factor)."""
        return float(np.sqrt(sum(abs(c) ** 2 for c in self._terms.values())))

    def apply(self, state: np.ndarray) -> np.ndarray:
        """Matrix-vector product on a dense 2^n statevector."""
        dim = 1 << self.n_qubits
        if state.shape != (dim,):
            raise ValueError(f"state must have shape ({dim},)")
        idx = np.arange(dim, dtype=np.uint64)
        out = np.zeros(dim, dtype=np.complex128)
        for (x, z), c in self._terms.items():
            amp = c * _I_POW[(x & z).bit_count() % 4]
            signs = 1.0 - 2.0 * (
                np.bitwise_count(idx & np.uint64(z)).astype(np.float64) % 2.0
            )
            np.add.at(out, idx ^ np.uint64(x), amp * signs * state)
        return out

    def expectation(self, state: np.ndarray) -> complex:
        return complex(np.vdot(state, self.apply(state)))

    def to_dense(self) -> np.ndarray:
        """Dense 2^n x 2^n matrix; for small registers and tests."""
        dim = 1 << self.n_qubits
        idx = np.arange(dim, dtype=np.uint64)
        mat = np.zeros((dim, dim), dtype=np.complex128)
        for (x, z), c in self._terms.items():
            amp = c * _I_POW[(x & z).bit_count() % 4]
            signs = 1.0 - 2.0 * (
                np.bitwise_count(idx & np.uint64(z)).astype(np.float64) % 2.0
            )
            mat[idx ^ np.uint64(x), idx] += amp * signs
        return mat

    def term_strings(self) -> list[tuple[str, complex]]:
        """Human-readable (label, coeff) pairs, e.g. ('X0 Z1 Y3', c)."""
        out = []
        for (x, z), c in self.items():
            parts = []
            for q in range(self.n_qubits):
                bx = (x >> q) & 1
                bz = (z >> q) & 1
                if bx and bz:
                    parts.append(f"Y{q}")
                elif bx:
                    parts.append(f"X{q}")
                elif bz:
                    parts.append(f"Z{q}")
            out.append((" ".join(parts) if parts else "I", c))
        return out

    def __repr__(self) -> str:
        body = " + ".join(f"({c:.6g})*{s}" for s, c in self.term_strings()[:6])
        more = "" if len(self) <= 6 else f" ... ({len(self)} terms)"
        return f"PauliSum[{self.n_qubits}q]({body}{more})"


def pauli_commutator(a: PauliSum, b: PauliSum) -> PauliSum:
    """[a, b] = ab - ba, exact over the symplectic term keys."""
    return (a @ b) - (b @ a)


def ladder_operator(p: int, n_qubits: int, dagger: bool) -> PauliSum:
    """Jordan-Wigner image of a_p (or a_p^dagger) on n_qubits.

    a_p = Z_0 ... Z_{p-1} (X_p + i Y_p)/2; the creation operator carries
    (X_p - i Y_p)/2.  Returned as a two-term PauliSum.
    """
    if not 0 <= p < n_qubits:
        raise ValueError(f"orbital {p} outside register of {n_qubits}")
    zstring = (1 << p) - 1
    x_key = (1 << p, zstring)
    y_key = (1 << p, zstring | (1 << p))
    # W(x, z|x) = i^1 X Z = Y on the target qubit, so the raw Y coefficient
    # 1/2 * (+/- i) maps onto the stored key without an extra phase fix.
    sign = -1.0 if dagger else 1.0
    return PauliSum(n_qubits, {x_key: 0.5 + 0.0j, y_key: sign * 0.5j})
