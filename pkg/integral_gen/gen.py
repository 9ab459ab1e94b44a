#!/usr/bin/env python3
"""One-file molecular fixture generator.

Produces FCIDUMP files plus JSON sidecars for a small set of molecules in
the STO-3G basis: restricted Hartree-Fock over integrals evaluated with
the McMurchie-Davidson scheme (Hermite Gaussians, Boys function), then a
transform to the molecular-orbital basis.  No quantum chemistry package is
required; scipy supplies the confluent hypergeometric function for the
Boys kernel and numpy the linear algebra.

Usage:
    python gen.py --molecule H4 --d 3.20 --basis STO-3G --out fixtures/

Energies are in hartree, distances on the command line in angstrom.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path

import numpy as np
from scipy.special import hyp1f1

GENERATOR_VERSION = "1.0"
ANGSTROM_TO_BOHR = 1.8897259886

# STO-3G: per element, a list of shells (angular momentum, exponents,
# contraction coefficients over normalized primitives).  SP shells share
# their exponents between the s and p contractions.
STO3G = {
    "H": [
        (0, (3.425250914, 0.6239137298, 0.1688554040),
            (0.1543289673, 0.5353281423, 0.4446345422)),
    ],
    "Be": [
        (0, (30.16787069, 5.495115306, 1.487192653),
            (0.1543289673, 0.5353281423, 0.4446345422)),
        (0, (1.314833110, 0.3055389383, 0.09937074560),
            (-0.09996722919, 0.3995128261, 0.7001154689)),
        (1, (1.314833110, 0.3055389383, 0.09937074560),
            (0.1559162750, 0.6076837186, 0.3919573931)),
    ],
    "B": [
        (0, (48.79111318, 8.887362172, 2.405267040),
            (0.1543289673, 0.5353281423, 0.4446345422)),
        (0, (2.236956142, 0.5198204999, 0.1690617600),
            (-0.09996722919, 0.3995128261, 0.7001154689)),
        (1, (2.236956142, 0.5198204999, 0.1690617600),
            (0.1559162750, 0.6076837186, 0.3919573931)),
    ],
    "O": [
        (0, (130.7093214, 23.80886605, 6.443608313),
            (0.1543289673, 0.5353281423, 0.4446345422)),
        (0, (5.033151319, 1.169596125, 0.3803889600),
            (-0.09996722919, 0.3995128261, 0.7001154689)),
        (1, (5.033151319, 1.169596125, 0.3803889600),
            (0.1559162750, 0.6076837186, 0.3919573931)),
    ],
}

CHARGES = {"H": 1, "Be": 4, "B": 5, "O": 8}

_DFACT = {-1: 1.0, 0: 1.0, 1: 1.0, 2: 3.0, 3: 15.0}


@dataclass
class BasisFunction:
    """One contracted cartesian Gaussian."""

    center: np.ndarray
    powers: tuple[int, int, int]
    exps: tuple[float, ...]
    coefs: tuple[float, ...]  # includes primitive and contraction norms


def _primitive_norm(alpha: float, powers) -> float:
    lx, ly, lz = powers
    l = lx + ly + lz
    num = (2.0 * alpha / math.pi) ** 0.75 * (4.0 * alpha) ** (l / 2.0)
    den = math.sqrt(
        _DFACT[2 * lx - 1] * _DFACT[2 * ly - 1] * _DFACT[2 * lz - 1]
    )
    return num / den


def build_basis(atoms: list[tuple[str, np.ndarray]]) -> list[BasisFunction]:
    """Expand shells into cartesian AOs, normalizing each contraction."""
    aos = []
    for sym, xyz in atoms:
        for l, exps, coefs in STO3G[sym]:
            powers_list = [(0, 0, 0)] if l == 0 else [(1, 0, 0), (0, 1, 0), (0, 0, 1)]
            for powers in powers_list:
                scaled = [c * _primitive_norm(a, powers) for a, c in zip(exps, coefs)]
                bf = BasisFunction(np.asarray(xyz, float), powers, tuple(exps), tuple(scaled))
                s = _contracted_overlap(bf, bf)
                bf.coefs = tuple(c / math.sqrt(s) for c in bf.coefs)
                aos.append(bf)
    return aos


@lru_cache(maxsize=200000)
def _hermite_e(i: int, j: int, t: int, qx: float, a: float, b: float) -> float:
    """Hermite expansion coefficient E_t^{ij} for a 1D Gaussian product."""
    p = a + b
    mu = a * b / p
    if t < 0 or t > i + j:
        return 0.0
    if i == j == t == 0:
        return math.exp(-mu * qx * qx)
    if j == 0:
        return (
            _hermite_e(i - 1, j, t - 1, qx, a, b) / (2.0 * p)
            - (mu * qx / a) * _hermite_e(i - 1, j, t, qx, a, b)
            + (t + 1) * _hermite_e(i - 1, j, t + 1, qx, a, b)
        )
    return (
        _hermite_e(i, j - 1, t - 1, qx, a, b) / (2.0 * p)
        + (mu * qx / b) * _hermite_e(i, j - 1, t, qx, a, b)
        + (t + 1) * _hermite_e(i, j - 1, t + 1, qx, a, b)
    )


def _overlap_prim(a, la, ax, b, lb, bx) -> float:
    """3D primitive overlap from the t=0 Hermite coefficients."""
    p = a + b
    val = 1.0
    for d in range(3):
        val *= _hermite_e(la[d], lb[d], 0, ax[d] - bx[d], a, b)
    return val * (math.pi / p) ** 1.5


def _contracted_overlap(f: BasisFunction, g: BasisFunction) -> float:
    s = 0.0
    for a, ca in zip(f.exps, f.coefs):
        for b, cb in zip(g.exps, g.coefs):
            s += ca * cb * _overlap_prim(a, f.powers, f.center, b, g.powers, g.center)
    return s


def _kinetic_prim(a, la, ax, b, lb, bx) -> float:
    """Primitive kinetic energy via the overlap ladder in each dimension."""
    p = a + b
    pre = (math.pi / p) ** 1.5

    def s1d(d, i, j):
        if i < 0 or j < 0:
            return 0.0
        return _hermite_e(i, j, 0, ax[d] - bx[d], a, b)

    def t1d(d, i, j):
        term = b * (2 * j + 1) * s1d(d, i, j) - 2.0 * b * b * s1d(d, i, j + 2)
        if j >= 2:
            term -= 0.5 * j * (j - 1) * s1d(d, i, j - 2)
        return term

    out = 0.0
    for d in range(3):
        parts = [
            t1d(d, la[d], lb[d]) if e == d else s1d(e, la[e], lb[e])
            for e in range(3)
        ]
        out += parts[0] * parts[1] * parts[2]
    return out * pre


def boys(n_max: int, t: float) -> np.ndarray:
    """F_0..F_{n_max} via the confluent hypergeometric representation."""
    ns = np.arange(n_max + 1)
    return hyp1f1(ns + 0.5, ns + 1.5, -t) / (2.0 * ns + 1.0)


def _hermite_coulomb(t, u, v, n, p, dx, dy, dz, fvals):
    if t < 0 or u < 0 or v < 0:
        return 0.0
    if t == u == v == 0:
        return (-2.0 * p) ** n * fvals[n]
    if t > 0:
        return (t - 1) * _hermite_coulomb(t - 2, u, v, n + 1, p, dx, dy, dz, fvals) \
            + dx * _hermite_coulomb(t - 1, u, v, n + 1, p, dx, dy, dz, fvals)
    if u > 0:
        return (u - 1) * _hermite_coulomb(t, u - 2, v, n + 1, p, dx, dy, dz, fvals) \
            + dy * _hermite_coulomb(t, u - 1, v, n + 1, p, dx, dy, dz, fvals)
    return (v - 1) * _hermite_coulomb(t, u, v - 2, n + 1, p, dx, dy, dz, fvals) \
        + dz * _hermite_coulomb(t, u, v - 1, n + 1, p, dx, dy, dz, fvals)


def _nuclear_prim(a, la, ax, b, lb, bx, cx) -> float:
    """Primitive attraction integral to a unit charge at cx (positive value)."""
    p = a + b
    px = (a * ax + b * bx) / p
    dpc = px - cx
    t_arg = p * float(dpc @ dpc)
    lmax = sum(la) + sum(lb)
    fvals = boys(lmax, t_arg)
    out = 0.0
    for t in range(la[0] + lb[0] + 1):
        e1 = _hermite_e(la[0], lb[0], t, ax[0] - bx[0], a, b)
        if e1 == 0.0:
            continue
        for u in range(la[1] + lb[1] + 1):
            e2 = _hermite_e(la[1], lb[1], u, ax[1] - bx[1], a, b)
            if e2 == 0.0:
                continue
            for v in range(la[2] + lb[2] + 1):
                e3 = _hermite_e(la[2], lb[2], v, ax[2] - bx[2], a, b)
                if e3 == 0.0:
                    continue
                out += e1 * e2 * e3 * _hermite_coulomb(
                    t, u, v, 0, p, dpc[0], dpc[1], dpc[2], fvals
                )
    return out * 2.0 * math.pi / p


def _eri_prim(a, la, ax, b, lb, bx, c, lc, cx, d, ld, dx_) -> float:
    """Primitive (ab|cd) in chemists' notation."""
    p = a + b
    q = c + d
    alpha = p * q / (p + q)
    px = (a * ax + b * bx) / p
    qx = (c * cx + d * dx_) / q
    dpq = px - qx
    t_arg = alpha * float(dpq @ dpq)
    lmax = sum(la) + sum(lb) + sum(lc) + sum(ld)
    fvals = boys(lmax, t_arg)

    e_ab = [
        [
            _hermite_e(la[dim], lb[dim], t, ax[dim] - bx[dim], a, b)
            for t in range(la[dim] + lb[dim] + 1)
        ]
        for dim in range(3)
    ]
    e_cd = [
        [
            _hermite_e(lc[dim], ld[dim], s, cx[dim] - dx_[dim], c, d)
            for s in range(lc[dim] + ld[dim] + 1)
        ]
        for dim in range(3)
    ]

    out = 0.0
    for t in range(la[0] + lb[0] + 1):
        for u in range(la[1] + lb[1] + 1):
            for v in range(la[2] + lb[2] + 1):
                e1 = e_ab[0][t] * e_ab[1][u] * e_ab[2][v]
                if e1 == 0.0:
                    continue
                for tt in range(lc[0] + ld[0] + 1):
                    for uu in range(lc[1] + ld[1] + 1):
                        for vv in range(lc[2] + ld[2] + 1):
                            e2 = e_cd[0][tt] * e_cd[1][uu] * e_cd[2][vv]
                            if e2 == 0.0:
                                continue
                            sign = -1.0 if (tt + uu + vv) % 2 else 1.0
                            out += e1 * e2 * sign * _hermite_coulomb(
                                t + tt, u + uu, v + vv, 0, alpha,
                                dpq[0], dpq[1], dpq[2], fvals,
                            )
    return out * 2.0 * math.pi ** 2.5 / (p * q * math.sqrt(p + q))


def _contract2(f, g, prim_fn) -> float:
    out = 0.0
    for a, ca in zip(f.exps, f.coefs):
        for b, cb in zip(g.exps, g.coefs):
            out += ca * cb * prim_fn(a, f.powers, f.center, b, g.powers, g.center)
    return out


def compute_integrals(atoms: list[tuple[str, np.ndarray]]):
    """AO-basis S, T, V, ERI tensors plus the nuclear repulsion energy."""
    aos = build_basis(atoms)
    n = len(aos)
    S = np.zeros((n, n))
    T = np.zeros((n, n))
    V = np.zeros((n, n))
    for i in range(n):
        for j in range(i + 1):
            S[i, j] = S[j, i] = _contract2(aos[i], aos[j], _overlap_prim)
            T[i, j] = T[j, i] = _contract2(aos[i], aos[j], _kinetic_prim)
            vij = 0.0
            for sym, xyz in atoms:
                nuc = np.asarray(xyz, float)
                vij -= CHARGES[sym] * _contract2(
                    aos[i], aos[j],
                    lambda a, la, ax, b, lb, bx: _nuclear_prim(a, la, ax, b, lb, bx, nuc),
                )
            V[i, j] = V[j, i] = vij

    eri = np.zeros((n, n, n, n))
    for i in range(n):
        for j in range(i + 1):
            ij = i * (i + 1) // 2 + j
            for k in range(n):
                for l in range(k + 1):
                    kl = k * (k + 1) // 2 + l
                    if ij < kl:
                        continue
                    val = 0.0
                    fi, fj, fk, fl = aos[i], aos[j], aos[k], aos[l]
                    for a, ca in zip(fi.exps, fi.coefs):
                        for b, cb in zip(fj.exps, fj.coefs):
                            for c, cc in zip(fk.exps, fk.coefs):
                                for d, cd in zip(fl.exps, fl.coefs):
                                    val += ca * cb * cc * cd * _eri_prim(
                                        a, fi.powers, fi.center,
                                        b, fj.powers, fj.center,
                                        c, fk.powers, fk.center,
                                        d, fl.powers, fl.center,
                                    )
                    for p, q in ((i, j), (j, i)):
                        for r, s in ((k, l), (l, k)):
                            eri[p, q, r, s] = val
                            eri[r, s, p, q] = val

    e_nuc = 0.0
    for i in range(len(atoms)):
        for j in range(i):
            zi, zj = CHARGES[atoms[i][0]], CHARGES[atoms[j][0]]
            rij = np.linalg.norm(np.asarray(atoms[i][1]) - np.asarray(atoms[j][1]))
            e_nuc += zi * zj / rij
    return S, T, V, eri, e_nuc


def run_rhf(S, T, V, eri, e_nuc, n_electrons, max_iter=400):
    """Closed-shell SCF; returns (e_total, mo_coeffs, mo_energies).

    Stretched geometries in a minimal basis carry several self-consistent
    closed-shell solutions, and a plain core-guess DIIS loop happily
    converges onto excited ones.  This driver therefore runs from a few
    deterministic guesses, polishes each converged solution by descending
    through occupied-virtual rotations until no mixing lowers the energy,
    and returns the lowest solution found.  Raises if nothing converges.
    """
    n = S.shape[0]
    n_occ = n_electrons // 2
    hcore = T + V

    w, u = np.linalg.eigh(S)
    x = u @ np.diag(w ** -0.5) @ u.T

    def fock(dm):
        j = np.einsum("pqrs,rs->pq", eri, dm)
        k = np.einsum("prqs,rs->pq", eri, dm)
        return hcore + j - 0.5 * k

    def density(f, shift=0.0, dm_prev=None):
        fp = x.T @ f @ x
        if shift and dm_prev is not None:
            # level shift applied to the virtual block in the orthogonal basis
            dp = x.T @ S @ dm_prev @ S @ x / 2.0
            fp = fp + shift * (np.eye(n) - dp)
        eps, cp = np.linalg.eigh(fp)
        c = x @ cp
        cocc = c[:, :n_occ]
        return 2.0 * cocc @ cocc.T, c, eps

    def scf(dm, shift=0.0):
        e_old, c, eps = 0.0, None, None
        errs, focks = [], []
        for it in range(max_iter):
            f = fock(dm)
            err = x.T @ (f @ dm @ S - S @ dm @ f) @ x
            converged = it > 0 and abs(e_new - e_old) < 1e-12 and np.max(np.abs(err)) < 1e-8
            if converged:
                return e_new, c, eps, True
            if it > 0:
                e_old = e_new
            errs.append(err)
            focks.append(f)
            if len(errs) > 8:
                errs.pop(0)
                focks.pop(0)
            if len(errs) > 1:
                m = len(errs)
                bmat = -np.ones((m + 1, m + 1))
                bmat[m, m] = 0.0
                for a in range(m):
                    for b in range(m):
                        bmat[a, b] = np.sum(errs[a] * errs[b])
                rhs = np.zeros(m + 1)
                rhs[m] = -1.0
                try:
                    w_diis = np.linalg.solve(bmat, rhs)[:m]
                    f = sum(wi * fi for wi, fi in zip(w_diis, focks))
                except np.linalg.LinAlgError:
                    pass
            dm, c, eps = density(f, shift=shift, dm_prev=dm)
            e_new = 0.5 * np.sum(dm * (hcore + fock(dm)))
        return e_old, c, eps, False

    def dm_from_cocc(cocc):
        return 2.0 * cocc @ cocc.T

    def polish(e, c, eps):
        """Descend through pairwise occ-virt rotations until stationary."""
        for _ in range(12):
            improved = False
            for o in range(n_occ):
                for v in range(n_occ, n):
                    for angle in (0.35, -0.35):
                        cocc = c[:, :n_occ].copy()
                        cocc[:, o] = math.cos(angle) * c[:, o] + math.sin(angle) * c[:, v]
                        e2, c2, eps2, ok = scf(dm_from_cocc(cocc))
                        if ok and e2 < e - 1e-10:
                            e, c, eps = e2, c2, eps2
                            improved = True
                            break
                    if improved:
                        break
                if improved:
                    break
            if not improved:
                return e, c, eps
        return e, c, eps

    # deterministic guesses: bare core, Wolfsberg-Helmholz, shifted core
    gwh = np.empty_like(hcore)
    for i in range(n):
        for j in range(n):
            gwh[i, j] = 0.875 * S[i, j] * (hcore[i, i] + hcore[j, j])
    guesses = [
        (density(hcore)[0], 0.0),
        (density(gwh)[0], 0.0),
        (density(hcore)[0], 0.3),
        (density(gwh)[0], 0.3),
    ]
    best = None
    for dm0, shift in guesses:
        e, c, eps, ok = scf(dm0, shift=shift)
        if ok and shift:
            # un-shifted refinement from the shifted solution
            e, c, eps, ok = scf(dm_from_cocc(c[:, :n_occ]))
        if not ok:
            continue
        e, c, eps = polish(e, c, eps)
        if best is None or e < best[0] - 1e-12:
            best = (e, c, eps)
    if best is None:
        raise RuntimeError("SCF failed to converge from every guess")
    e_elec, c, eps = best

    # canonical phase: largest |coefficient| of each MO made positive
    for col in range(n):
        pivot = np.argmax(np.abs(c[:, col]))
        if c[pivot, col] < 0:
            c[:, col] = -c[:, col]
    return e_elec + e_nuc, c, eps


def mo_transform(hcore, eri, c):
    h1 = c.T @ hcore @ c
    g = np.einsum("pqrs,pi->iqrs", eri, c, optimize=True)
    g = np.einsum("iqrs,qj->ijrs", g, c, optimize=True)
    g = np.einsum("ijrs,rk->ijks", g, c, optimize=True)
    g = np.einsum("ijks,sl->ijkl", g, c, optimize=True)
    return h1, g


def write_fcidump(path: Path, h1, h2, e_core, n_electrons, eps=None, thresh=1e-12):
    """MO integrals in the standard namelist text format, chemists' indices."""
    n = h1.shape[0]
    lines = [f" &FCI NORB={n:3d},NELEC={n_electrons:3d},MS2= 0,"]
    lines.append("  ORBSYM=" + "1," * n)
    lines.append("  ISYM=1,")
    lines.append(" &END")

    def rec(val, i, j, k, l):
        lines.append(f"{val:23.16E} {i:4d} {j:4d} {k:4d} {l:4d}")

    for i in range(n):
        for j in range(i + 1):
            ij = i * (i + 1) // 2 + j
            for k in range(n):
                for l in range(k + 1):
                    kl = k * (k + 1) // 2 + l
                    if ij < kl:
                        continue
                    v = h2[i, j, k, l]
                    if abs(v) > thresh:
                        rec(v, i + 1, j + 1, k + 1, l + 1)
    for i in range(n):
        for j in range(i + 1):
            if abs(h1[i, j]) > thresh:
                rec(h1[i, j], i + 1, j + 1, 0, 0)
    if eps is not None:
        for i in range(n):
            rec(eps[i], i + 1, 0, 0, 0)
    rec(e_core, 0, 0, 0, 0)
    path.write_text("\n".join(lines) + "\n")


def build_geometry(molecule: str, d_angstrom: float):
    d = d_angstrom * ANGSTROM_TO_BOHR
    if molecule == "H2":
        atoms = [("H", np.array([0.0, 0.0, 0.0])), ("H", np.array([0.0, 0.0, d]))]
    elif molecule == "H4":
        atoms = [("H", np.array([0.0, 0.0, k * d])) for k in range(4)]
    elif molecule == "BH":
        atoms = [("B", np.zeros(3)), ("H", np.array([0.0, 0.0, d]))]
    elif molecule == "BeH2":
        atoms = [
            ("H", np.array([0.0, 0.0, -d])),
            ("Be", np.zeros(3)),
            ("H", np.array([0.0, 0.0, d])),
        ]
    elif molecule == "H2O":
        half = math.radians(104.5 / 2.0)
        hx, hz = d * math.sin(half), d * math.cos(half)
        atoms = [
            ("O", np.zeros(3)),
            ("H", np.array([hx, 0.0, hz])),
            ("H", np.array([-hx, 0.0, hz])),
        ]
    else:
        raise ValueError(f"unknown molecule {molecule!r}")
    return atoms


SUGGESTED_FROZEN = {"H2": 0, "H4": 0, "BH": 0, "BeH2": 1, "H2O": 1}


def geometry_label(d: float) -> str:
    return f"d{d:.2f}" if round(d, 2) == round(d, 10) else f"d{d:.3f}"


def generate(molecule: str, d: float, out_dir: Path, basis: str = "STO-3G"):
    if basis != "STO-3G":
        raise ValueError("only STO-3G is wired up")
    atoms = build_geometry(molecule, d)
    S, T, V, eri, e_nuc = compute_integrals(atoms)
    n_electrons = sum(CHARGES[sym] for sym, _ in atoms)
    e_hf, c, eps = run_rhf(S, T, V, eri, e_nuc, n_electrons)
    h1, h2 = mo_transform(T + V, eri, c)

    label = geometry_label(d)
    mol_dir = out_dir / molecule
    mol_dir.mkdir(parents=True, exist_ok=True)
    fcidump_path = mol_dir / f"{label}.fcidump"
    write_fcidump(fcidump_path, h1, h2, e_nuc, n_electrons, eps=eps)

    bohr = ANGSTROM_TO_BOHR
    sidecar = {
        "molecule": molecule,
        "basis": basis,
        "bond_length_A": d,
        "label": label,
        "geometry_A": [
            [sym, [float(v) / bohr for v in xyz]] for sym, xyz in atoms
        ],
        "n_orbitals": int(h1.shape[0]),
        "n_electrons": int(n_electrons),
        "ms2": 0,
        "e_nuclear": float(e_nuc),
        "e_hf_total": float(e_hf),
        "orbital_energies": [float(e) for e in eps],
        "suggested_frozen_core": SUGGESTED_FROZEN[molecule],
        "generator": {"name": "integral_gen", "version": GENERATOR_VERSION},
    }
    sidecar_path = mol_dir / f"{label}.json"
    sidecar_path.write_text(json.dumps(sidecar, indent=2, sort_keys=True) + "\n")
    return fcidump_path, sidecar_path, e_hf


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--molecule", required=True,
                    choices=sorted(SUGGESTED_FROZEN))
    ap.add_argument("--d", type=float, required=True,
                    help="bond length / spacing in angstrom")
    ap.add_argument("--basis", default="STO-3G")
    ap.add_argument("--out", type=Path, default=Path("fixtures"))
    args = ap.parse_args(argv)
    fcid, side, e_hf = generate(args.molecule, args.d, args.out, args.basis)
    print(f"{fcid}  E_HF = {e_hf:.10f}")
    print(f"{side}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
