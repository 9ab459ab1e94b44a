"""Integral I/O, frozen core, and qubit Hamiltonian assembly."""

import numpy as np
import pytest

from qvqe.hamiltonian import (
    build_qubit_hamiltonian,
    freeze_core,
    hf_energy_from_integrals,
    hf_statevector,
    load_fixture,
    number_operator,
    parse_fcidump,
    s_squared_operator,
    serialize_fcidump,
    sz_operator,
)

from oracles import dense_ladder


def test_fixture_round_trip():
    sys = load_fixture("H4_d1.50")
    text = serialize_fcidump(sys.raw_integrals)
    again = parse_fcidump(text)
    np.testing.assert_allclose(again.h1, sys.raw_integrals.h1, atol=1e-14)
    np.testing.assert_allclose(again.h2, sys.raw_integrals.h2, atol=1e-14)
    assert again.core_energy == pytest.approx(sys.raw_integrals.core_energy, abs=1e-14)
    assert again.n_electrons == sys.raw_integrals.n_electrons
    np.testing.assert_allclose(
        again.orbital_energies, sys.raw_integrals.orbital_energies, atol=1e-14
    )


def test_parse_errors_carry_line_numbers():
    good = load_fixture("H2_d0.735")
    text = serialize_fcidump(good.raw_integrals)
    lines = text.splitlines()
    lines[6] = "0.5 1 2 3"
    with pytest.raises(ValueError, match="line 7"):
        parse_fcidump("\n".join(lines))
    lines = text.splitlines()
    lines[8] = "not_a_number 1 1 0 0"
    with pytest.raises(ValueError, match="line 9"):
        parse_fcidump("\n".join(lines))
    lines = text.splitlines()
    lines[5] = "0.5 1 99 1 1"
    with pytest.raises(ValueError, match="line 6"):
        parse_fcidump("\n".join(lines))
    with pytest.raises(ValueError, match="&END"):
        parse_fcidump(" &FCI NORB=2,NELEC=2,MS2=0,\n 0.5 1 1 0 0\n")


def test_hf_expectation_matches_sidecar_energy():
    # cross-component consistency: the determinant expectation of the
    # assembled qubit Hamiltonian must land on the generator's SCF energy
    for name in ("H2_d0.735", "H4_d1.50", "H4_d3.20"):
        sys = load_fixture(name)
        hf = sys.hf_state()
        e = sys.hamiltonian.expectation(hf).real
        assert e == pytest.approx(sys.sidecar["e_hf_total"], abs=1e-8)
        assert e == pytest.approx(sys.hf_energy, abs=1e-10)


def test_qubit_hamiltonian_matches_dense_ladder_oracle():
    sys = load_fixture("H2_d0.735")
    ints = sys.integrals
    n, nq = ints.n_orbitals, sys.n_qubits
    dim = 1 << nq
    a = {(p, True): dense_ladder(p, nq, True) for p in range(nq)}
    a.update({(p, False): dense_ladder(p, nq, False) for p in range(nq)})
    dense = np.eye(dim) * ints.core_energy
    for p in range(n):
        for q in range(n):
            for s in (0, 1):
                dense += ints.h1[p, q] * (a[(2 * p + s, True)] @ a[(2 * q + s, False)])
    for p in range(n):
        for q in range(n):
            for r in range(n):
                for s_ in range(n):
                    v = 0.5 * ints.h2[p, q, r, s_]
                    for sig in (0, 1):
                        for tau in (0, 1):
                            dense += v * (
                                a[(2 * p + sig, True)] @ a[(2 * r + tau, True)]
                                @ a[(2 * s_ + tau, False)] @ a[(2 * q + sig, False)]
                            )
    ham = sys.hamiltonian.to_dense()
    np.testing.assert_allclose(ham.imag, 0.0, atol=1e-12)
    np.testing.assert_allclose(ham.real, dense, atol=1e-11)
    assert sys.hamiltonian.is_hermitian()


def test_freeze_core_keeps_the_determinant_energy():
    for name in ("BeH2_d1.00", "H2O_d0.958"):
        sys = load_fixture(name)  # sidecar freezes one orbital
        assert sys.n_frozen == 1
        e_full = hf_energy_from_integrals(sys.raw_integrals)
        e_frozen = hf_energy_from_integrals(sys.integrals)
        assert e_frozen == pytest.approx(e_full, abs=1e-10)
        assert e_frozen == pytest.approx(sys.sidecar["e_hf_total"], abs=1e-8)
        assert sys.n_electrons == sys.raw_integrals.n_electrons - 2
        assert sys.n_qubits == 2 * (sys.raw_integrals.n_orbitals - 1)


def test_freeze_core_rejects_bad_counts():
    sys = load_fixture("H2_d0.735")
    with pytest.raises(ValueError):
        freeze_core(sys.raw_integrals, 2)
    with pytest.raises(ValueError):
        freeze_core(sys.raw_integrals, -1)


def test_symmetry_operators_on_the_reference():
    sys = load_fixture("H4_d1.50")
    hf = sys.hf_state()
    n_op = number_operator(sys.n_qubits)
    assert n_op.expectation(hf).real == pytest.approx(sys.n_electrons, abs=1e-12)
    assert sz_operator(sys.n_qubits).expectation(hf).real == pytest.approx(0.0, abs=1e-12)
    s2 = s_squared_operator(sys.n_qubits)
    assert s2.is_hermitian()
    assert s2.expectation(hf).real == pytest.approx(0.0, abs=1e-12)


def test_label_resolution():
    sys = load_fixture("BeH2_d3.00")
    assert sys.label == "BeH2_d3.00"
    assert sys.fixture_sha256
    with pytest.raises(FileNotFoundError):
        load_fixture("H2_d9.99")
    direct = load_fixture(sys.fixture_path)
    assert direct.label == sys.label


def test_hf_statevector_is_the_aufbau_determinant():
    v = hf_statevector(4, 8)
    assert v[0b1111] == 1.0
    assert np.linalg.norm(v) == 1.0
