"""Energy-stabilization screening and operator-block assembly.

A block couples one cluster excitation with the scatterers that contract
against it through the shared quasi vertex.  Doubles are screened by a
one-parameter relaxation from the reference; scatterers are screened by
a joint two-parameter relaxation of (cluster, scatterer) with the cluster
exponential applied first.  Scatterers that survive are stored inside
their block in descending order of pair stabilization, and duplicates
that contract to the same composite triple excitation are pruned across
blocks, keeping the most stabilizing copy.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .engine import AnsatzProgram, energy_and_gradient
from .fermions import FermionGenerator, composite_excitation
from .hamiltonian import MoleculeSystem
from .minimize import MinimizeOptions, minimize
from .pools import (
    default_cso_window,
    doubles_pool,
    hole_scatterer_candidates,
    particle_scatterer_candidates,
    singles_pool,
)

DEFAULT_THRESHOLD_D = 1e-5
DEFAULT_THRESHOLD_S = 1e-6

_SCREEN_OPTIONS = MinimizeOptions(grad_tol=1e-9, max_iters=300)


@dataclass(frozen=True)
class ScattererRecord:
    generator: FermionGenerator
    delta_pair: float
    e_pair: float
    composite_label: str


@dataclass
class OperatorBlock:
    """One pool entry: a cluster (or bare single) plus attached scatterers."""

    label: str
    kind: str  # "double_block" or "single_block"
    cluster: FermionGenerator
    scatterers: list[ScattererRecord] = field(default_factory=list)
    delta_e: float = 0.0
    e_screen: float = 0.0

    def generators(self) -> list[FermionGenerator]:
        """Application order: cluster exponential first, then scatterers."""
        return [self.cluster] + [rec.generator for rec in self.scatterers]

    @property
    def n_params(self) -> int:
        return 1 + len(self.scatterers)


@dataclass
class BlockPool:
    blocks: list[OperatorBlock]
    e_hf: float
    threshold_d: float
    threshold_s: float
    cso_occupied: list[int]
    cso_virtual: list[int]
    n_screened_doubles: int = 0
    n_pruned: int = 0


def _optimize_program(backend, ops, x0):
    program = AnsatzProgram(ops, np.asarray(x0, dtype=np.float64),
                            [0] * len(ops))

    def fg(x):
        rep = energy_and_gradient(backend, program.with_params(x))
        return rep.energy, rep.gradient

    return minimize(fg, np.asarray(x0, dtype=np.float64), _SCREEN_OPTIONS)


def screen_doubles(backend, doubles, e_hf, threshold_d=DEFAULT_THRESHOLD_D):
    """One-parameter relaxation per double; keep stabilizations above threshold.

    Returns (generator, e_screen, delta_e) triples in enumeration order.
    """
    kept = []
    for gen in doubles:
        res = _optimize_program(backend, [gen], [0.0])
        delta = abs(res.fun - e_hf)
        if delta > threshold_d:
            kept.append((gen, res.fun, delta))
    return kept


def screen_scatterers(backend, cluster, candidates, e_cluster,
                      threshold_s=DEFAULT_THRESHOLD_S):
    """Joint two-parameter relaxation of (cluster, scatterer) from zero.

    The pair energy is measured against the cluster's own screened
    energy; survivors come back sorted by descending stabilization with
    label as the tiebreak.
    """
    records = []
    for sigma in candidates:
        res = _optimize_program(backend, [cluster, sigma], [0.0, 0.0])
        delta = abs(res.fun - e_cluster)
        if delta > threshold_s:
            composite = composite_excitation(cluster, sigma)
            records.append(ScattererRecord(
                generator=sigma,
                delta_pair=delta,
                e_pair=res.fun,
                composite_label=composite.label,
            ))
    records.sort(key=lambda r: (-r.delta_pair, r.generator.label))
    return records


def prune_redundant(blocks: list[OperatorBlock]) -> int:
    """Drop scatterers whose composite triple already appears elsewhere.

    Among copies sharing a composite label the one with the largest pair
    stabilization survives; exact ties fall back to the lexicographically
    smallest (block label, scatterer label).  Clusters are never removed.
    Returns the number of scatterers dropped.
    """
    best: dict[str, tuple] = {}
    for block in blocks:
        for rec in block.scatterers:
            key = rec.composite_label
            rank = (-rec.delta_pair, block.label, rec.generator.label)
            if key not in best or rank < best[key][0]:
                best[key] = (rank, block.label, rec.generator.label)

    dropped = 0
    for block in blocks:
        keep = []
        for rec in block.scatterers:
            winner = best[rec.composite_label]
            if winner[1] == block.label and winner[2] == rec.generator.label:
                keep.append(rec)
            else:
                dropped += 1
        block.scatterers = keep
    return dropped


def build_block_pool(
    system: MoleculeSystem,
    backend,
    threshold_d: float = DEFAULT_THRESHOLD_D,
    threshold_s: float = DEFAULT_THRESHOLD_S,
    cso_occupied: list[int] | None = None,
    cso_virtual: list[int] | None = None,
) -> BlockPool:
    """Screened pool: double blocks by descending stabilization, then singles."""
    occ_win, virt_win = default_cso_window(system)
    if cso_occupied is None:
        cso_occupied = occ_win
    if cso_virtual is None:
        cso_virtual = virt_win

    e_hf = system.hf_energy
    kept_doubles = screen_doubles(backend, doubles_pool(system), e_hf,
                                  threshold_d)

    blocks = []
    for gen, e_screen, delta in kept_doubles:
        candidates = hole_scatterer_candidates(system, gen, cso_occupied) + \
            particle_scatterer_candidates(system, gen, cso_virtual)
        records = screen_scatterers(backend, gen, candidates, e_screen,
                                    threshold_s)
        blocks.append(OperatorBlock(
            label=gen.label,
            kind="double_block",
            cluster=gen,
            scatterers=records,
            delta_e=delta,
            e_screen=e_screen,
        ))

    n_pruned = prune_redundant(blocks)
    blocks.sort(key=lambda b: (-b.delta_e, b.label))

    for gen in singles_pool(system):
        blocks.append(OperatorBlock(
            label=gen.label,
            kind="single_block",
            cluster=gen,
            delta_e=0.0,
            e_screen=e_hf,
        ))

    return BlockPool(
        blocks=blocks,
        e_hf=e_hf,
        threshold_d=threshold_d,
        threshold_s=threshold_s,
        cso_occupied=list(cso_occupied),
        cso_virtual=list(cso_virtual),
        n_screened_doubles=len(kept_doubles),
        n_pruned=n_pruned,
    )


def pool_payload(system: MoleculeSystem, pool: BlockPool) -> dict:
    """JSON-ready summary of a screening run."""
    return {
        "fixture": system.label,
        "fixture_sha256": system.fixture_sha256,
        "e_hf": pool.e_hf,
        "threshold_d": pool.threshold_d,
        "threshold_s": pool.threshold_s,
        "cso_occupied": pool.cso_occupied,
        "cso_virtual": pool.cso_virtual,
        "n_screened_doubles": pool.n_screened_doubles,
        "n_pruned_scatterers": pool.n_pruned,
        "total_params": sum(b.n_params for b in pool.blocks),
        "blocks": [
            {
                "label": b.label,
                "kind": b.kind,
                "delta_e": b.delta_e,
                "e_screen": b.e_screen,
                "n_params": b.n_params,
                "scatterers": [
                    {
                        "label": r.generator.label,
                        "delta_pair": r.delta_pair,
                        "e_pair": r.e_pair,
                        "composite": r.composite_label,
                    }
                    for r in b.scatterers
                ],
            }
            for b in pool.blocks
        ],
    }
