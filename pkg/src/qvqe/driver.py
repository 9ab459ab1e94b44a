"""Ansatz-growth drivers and trace records.

Implements the COMPASS-PRO macro/micro cycle, its static and stepwise
reference variants, plain UCCSD/UCCSDT, and gradient-selected ADAPT-VQE
over SD or generalized-SD pools.  Every run produces a MacroTrace whose
rows record the energy trajectory against the exact active-space ground
state, plus squared overlaps with the ground and lowest excited singlet.
"""

from __future__ import annotations

import itertools
import time
from dataclasses import dataclass, field, asdict

import numpy as np

from .engine import (
    AnsatzProgram,
    SectorBackend,
    energy_and_gradient,
    pool_gradients,
    prepare_state,
    state_energy,
)
from .fci import fci_spectrum, lowest_singlet_excited
from .hamiltonian import MoleculeSystem
from .minimize import MinimizeOptions, minimize
from .pools import doubles_pool, gsd_pool, singles_pool, triples_pool
from .screening import (
    DEFAULT_THRESHOLD_D,
    DEFAULT_THRESHOLD_S,
    BlockPool,
    build_block_pool,
)

CHEMICAL_ACCURACY = 1.6e-3

MAX_CYCLES = 75

METHODS = (
    "compass_pro",
    "compass_static",
    "compass_stepwise",
    "uccsd",
    "uccsdt",
    "adapt_sd",
    "adapt_gsd",
)

INIT_STRATEGIES = ("warm", "hf_zero", "random")


@dataclass
class RunConfig:
    method: str = "compass_pro"
    threshold_d: float = DEFAULT_THRESHOLD_D
    threshold_s: float = DEFAULT_THRESHOLD_S
    macro_tol: float = 1e-7
    init: str = "warm"
    seed: int = 0
    random_range: float = np.pi
    max_blocks: int | None = None
    grad_tol_macro: float = 1e-9
    grad_tol_micro: float = 1e-8
    adapt_gradient_tol: float = 1e-4
    stall_patience: int = 3
    cso_occupied: list[int] | None = None
    cso_virtual: list[int] | None = None
    n_roots: int | None = None

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"unknown method {self.method!r}")
        if self.init not in INIT_STRATEGIES:
            raise ValueError(f"unknown init strategy {self.init!r}")

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class MacroRow:
    k: int
    block_label: str
    n_params: int
    energy: float
    delta_e: float
    delta_e_fci: float
    overlap_gs: float
    overlap_es: float | None
    micro_gain: float | None = None
    wall_time: float = 0.0


@dataclass
class MacroTrace:
    fixture_label: str
    fixture_sha256: str
    method: str
    config: dict
    e_hf: float
    e_fci: float
    rows: list[MacroRow] = field(default_factory=list)
    programs: list[AnsatzProgram] = field(default_factory=list)
    status: str = ""
    pool_summary: dict = field(default_factory=dict)

    @property
    def final_energy(self) -> float:
        return self.rows[-1].energy

    @property
    def final_error(self) -> float:
        return self.rows[-1].energy - self.e_fci

    @property
    def n_params(self) -> int:
        return self.rows[-1].n_params

    @property
    def gradient_trough(self) -> bool:
        """Gradient criterion fired while still outside chemical accuracy."""
        return (self.status == "converged_gradient"
                and abs(self.final_error) > CHEMICAL_ACCURACY)

    def first_k_within(self, tol: float = CHEMICAL_ACCURACY):
        """(k, n_params) at the first row inside tol of the exact energy."""
        for row in self.rows:
            if abs(row.delta_e_fci) < tol:
                return row.k, row.n_params
        return None

    def payload(self) -> dict:
        return {
            "fixture": self.fixture_label,
            "fixture_sha256": self.fixture_sha256,
            "method": self.method,
            "config": self.config,
            "e_hf": self.e_hf,
            "e_fci": self.e_fci,
            "status": self.status,
            "gradient_trough": self.gradient_trough,
            "pool": self.pool_summary,
            "final": {
                "energy": self.final_energy,
                "error_vs_fci": self.final_error,
                "n_params": self.n_params,
                "labels": [g.label for g in self.programs[-1].ops],
                "params": [float(x) for x in self.programs[-1].params],
                "block_ids": list(self.programs[-1].block_ids),
            },
            "rows": [
                {
                    "k": r.k,
                    "block": r.block_label,
                    "n_params": r.n_params,
                    "energy": r.energy,
                    "delta_e": r.delta_e,
                    "delta_e_fci": r.delta_e_fci,
                    "overlap_gs": r.overlap_gs,
                    "overlap_es": r.overlap_es,
                    "micro_gain": r.micro_gain,
                    "wall_time": r.wall_time,
                }
                for r in self.rows
            ],
        }


class _TraceBuilder:
    """Shared bookkeeping: exact spectrum, overlap columns, row assembly."""

    def __init__(self, system: MoleculeSystem, config: RunConfig, backend=None):
        self.system = system
        self.config = config
        self.backend = backend if backend is not None else SectorBackend(system)
        roots = fci_spectrum(system, n_roots=config.n_roots)
        self.roots = roots
        self.e_fci = roots[0].energy
        self.gs_vector = roots[0].vector
        excited = lowest_singlet_excited(roots)
        self.es_vector = excited.vector if excited is not None else None
        self.trace = MacroTrace(
            fixture_label=system.label,
            fixture_sha256=system.fixture_sha256,
            method=config.method,
            config=config.to_dict(),
            e_hf=system.hf_energy,
            e_fci=self.e_fci,
        )
        self._t0 = time.perf_counter()

    def _overlaps(self, psi):
        gs = float(np.abs(np.vdot(psi, self.gs_vector)) ** 2)
        es = None
        if self.es_vector is not None:
            es = float(np.abs(np.vdot(psi, self.es_vector)) ** 2)
        return gs, es

    def add_row(self, k, label, program, energy, prev_energy, psi,
                micro_gain=None):
        now = time.perf_counter()
        gs, es = self._overlaps(psi)
        delta = abs(energy - prev_energy) if k > 0 else 0.0
        self.trace.rows.append(MacroRow(
            k=k,
            block_label=label,
            n_params=len(program),
            energy=energy,
            delta_e=delta,
            delta_e_fci=energy - self.e_fci,
            overlap_gs=gs,
            overlap_es=es,
            micro_gain=micro_gain,
            wall_time=now - self._t0,
        ))
        self.trace.programs.append(program)
        self._t0 = now

    def seed_reference_row(self):
        program = AnsatzProgram()
        ref = self.backend.reference()
        self.add_row(0, "", program, self.system.hf_energy,
                     self.system.hf_energy, ref)
        return ref

    def finish(self, status):
        self.trace.status = status
        return self.trace


def _macro_options(config: RunConfig) -> MinimizeOptions:
    return MinimizeOptions(grad_tol=config.grad_tol_macro, max_iters=800)


def _micro_options(config: RunConfig) -> MinimizeOptions:
    return MinimizeOptions(grad_tol=config.grad_tol_micro, max_iters=200)


def _optimize(backend, program, x0, options, base=None):
    def fg(x):
        rep = energy_and_gradient(backend, program.with_params(x), base=base)
        return rep.energy, rep.gradient

    return minimize(fg, np.asarray(x0, dtype=np.float64), options)


_MICRO_GRID_FINE = np.linspace(-np.pi, np.pi, 9)[:-1]
_MICRO_GRID_COARSE = np.linspace(-np.pi, np.pi, 5)[:-1]


def _micro_optimize(backend, program, options, base):
    """Globally minimize one block's parameters on a frozen reference.

    A block energy is a low-order trigonometric polynomial in each
    parameter, so its minima sit in a handful of well separated lobes.
    Local descent from zero only reaches the perturbative lobe and can
    badly underestimate a block's stabilization, e.g. when the true
    minimum pairs two scatterer angles near pi while each alone gains
    nothing.  A coarse tensor grid locates the basin, a local polish
    finishes it, and polishing from zero as well keeps the perturbative
    minimum in play when it is the better one.
    """
    def fg(x):
        rep = energy_and_gradient(backend, program.with_params(x), base=base)
        return rep.energy, rep.gradient

    n = len(program)
    grid = _MICRO_GRID_FINE if n <= 3 else _MICRO_GRID_COARSE
    best_seed = np.zeros(n)
    best_val = state_energy(backend, program.with_params(best_seed), base=base)
    for combo in itertools.product(grid, repeat=n):
        x = np.asarray(combo, dtype=np.float64)
        val = state_energy(backend, program.with_params(x), base=base)
        if val < best_val:
            best_val, best_seed = val, x
    res = minimize(fg, best_seed, options)
    if best_seed.any():
        res_zero = minimize(fg, np.zeros(n), options)
        if res_zero.fun <= res.fun:
            res = res_zero
    return res


def _macro_start(config: RunConfig, warm_params, rng):
    if config.init == "warm":
        return np.asarray(warm_params, dtype=np.float64)
    if config.init == "hf_zero":
        return np.zeros(len(warm_params))
    return rng.uniform(-config.random_range, config.random_range,
                       len(warm_params))


def _pool_summary(pool: BlockPool) -> dict:
    return {
        "n_blocks": len(pool.blocks),
        "n_double_blocks": sum(1 for b in pool.blocks
                               if b.kind == "double_block"),
        "n_single_blocks": sum(1 for b in pool.blocks
                               if b.kind == "single_block"),
        "n_scatterers": sum(len(b.scatterers) for b in pool.blocks),
        "n_pruned": pool.n_pruned,
        "total_params": sum(b.n_params for b in pool.blocks),
    }


def run_compass_pro(system: MoleculeSystem, config: RunConfig,
                    pool: BlockPool | None = None) -> MacroTrace:
    """Progressive block reordering with per-cycle micro competition.

    Each macro cycle freezes the current state, relaxes every pool block
    alone on top of it, admits the winner, and re-optimizes the whole
    program from the configured start.  The pool is not consumed: a
    block may be admitted again in a later cycle, which is what lets the
    ansatz keep deepening near degeneracies where a single pass of every
    block saturates short of the ground state.  The run ends when no
    block, after full re-optimization, improves the energy by macro_tol.
    """
    tb = _TraceBuilder(system, config)
    backend = tb.backend
    if pool is None:
        pool = build_block_pool(system, backend, config.threshold_d,
                                config.threshold_s, config.cso_occupied,
                                config.cso_virtual)
    tb.trace.pool_summary = _pool_summary(pool)
    rng = np.random.default_rng(config.seed)
    micro_opts = _micro_options(config)
    macro_opts = _macro_options(config)
    cap = config.max_blocks if config.max_blocks is not None else MAX_CYCLES

    program = AnsatzProgram()
    reference = tb.seed_reference_row()
    e_prev = system.hf_energy
    e_best_seen = e_prev
    k = 0
    status = None
    while True:
        if not pool.blocks:
            status = "pool_exhausted"
            break
        if k >= cap:
            status = "max_blocks"
            break
        k += 1

        candidates = []
        for idx, block in enumerate(pool.blocks):
            tail = AnsatzProgram(block.generators(),
                                 np.zeros(block.n_params),
                                 [k] * block.n_params)
            res = _micro_optimize(backend, tail, micro_opts, base=reference)
            candidates.append((res.fun, block.label, idx, res.x))
        candidates.sort(key=lambda t: (t[0], t[1]))
        stalled = e_prev - candidates[0][0] < config.macro_tol
        if stalled and config.init != "warm":
            # A restart run only stops on a flat pool when it is sitting at
            # its own floor.  A restart that landed high leaves every block
            # looking flat too, but growing the program and re-landing is
            # exactly the escape mechanism, so keep going.
            if e_prev <= e_best_seen + config.macro_tol:
                status = "pool_exhausted_gain"
                break
            stalled = False

        # Normal cycle: the winner is admitted outright, and under a warm
        # start the joint re-optimization can only improve on its promise.
        # Once no block stabilizes the frozen reference by macro_tol the
        # micro energies stop being informative, so walk the ranking and
        # admit the first block whose full re-optimization still moves the
        # energy; the macro step routinely over-delivers near degeneracies
        # where the frozen-reference picture underestimates a block.
        chosen = None
        for e_cand, _, idx, x_cand in (candidates if stalled
                                       else candidates[:1]):
            block = pool.blocks[idx]
            trial = program.extended(block.generators(), x_cand, block_id=k)
            x0 = _macro_start(config, trial.params, rng)
            res = _optimize(backend, trial, x0, macro_opts)
            if not stalled or e_prev - res.fun >= config.macro_tol:
                chosen = (block, trial.with_params(res.x), res.fun,
                          e_prev - e_cand)
                break
        if chosen is None:
            status = "pool_exhausted_gain"
            break

        block, program, energy, gain = chosen
        reference = prepare_state(backend, program)
        tb.add_row(k, block.label, program, energy, e_prev, reference,
                   micro_gain=gain)
        delta = abs(energy - e_prev)
        e_prev = energy
        e_best_seen = min(e_best_seen, energy)
        if delta < config.macro_tol:
            status = "converged"
            break
    return tb.finish(status)


def ordered_static_blocks(pool: BlockPool):
    """compass_static order: double blocks by stabilization, singles last."""
    return list(pool.blocks)


def run_compass_stepwise(system: MoleculeSystem, config: RunConfig,
                         pool: BlockPool | None = None) -> MacroTrace:
    """Double blocks admitted in the fixed screening order, one per cycle.

    Every stage is the static concatenation truncated after k blocks: the
    full single-excitation product stays on the outside of the ansatz
    while the block product grows from the most stabilizing cluster down.
    Parameters are warm started from the previous stage.
    """
    tb = _TraceBuilder(system, config)
    backend = tb.backend
    if pool is None:
        pool = build_block_pool(system, backend, config.threshold_d,
                                config.threshold_s, config.cso_occupied,
                                config.cso_virtual)
    tb.trace.pool_summary = _pool_summary(pool)
    rng = np.random.default_rng(config.seed)
    macro_opts = _macro_options(config)

    double_blocks = [b for b in pool.blocks if b.kind == "double_block"]
    single_ops = [g for b in pool.blocks if b.kind == "single_block"
                  for g in b.generators()]

    tb.seed_reference_row()
    e_prev = system.hf_energy
    status = "pool_exhausted"
    block_ops: list = []
    block_ids: list = []
    block_params = np.zeros(0)
    single_params = np.zeros(len(single_ops))
    for k, block in enumerate(double_blocks, start=1):
        if config.max_blocks is not None and k > config.max_blocks:
            status = "max_blocks"
            break
        block_ops = block_ops + block.generators()
        block_ids = block_ids + [k] * block.n_params
        block_params = np.concatenate([block_params,
                                       np.zeros(block.n_params)])
        program = AnsatzProgram(block_ops + single_ops,
                                np.concatenate([block_params, single_params]),
                                block_ids + [0] * len(single_ops))
        x0 = _macro_start(config, program.params, rng)
        res = _optimize(backend, program, x0, macro_opts)
        program = program.with_params(res.x)
        block_params = res.x[:len(block_ops)]
        single_params = res.x[len(block_ops):]
        energy = res.fun
        psi = prepare_state(backend, program)
        tb.add_row(k, block.label, program, energy, e_prev, psi)
        delta = abs(energy - e_prev)
        e_prev = energy
        if delta < config.macro_tol:
            status = "converged"
            break
    return tb.finish(status)


def _static_ops(system: MoleculeSystem, method: str,
                pool: BlockPool | None) -> list:
    if method == "uccsd":
        return doubles_pool(system) + singles_pool(system)
    if method == "uccsdt":
        return (triples_pool(system) + doubles_pool(system)
                + singles_pool(system))
    ops = []
    for block in ordered_static_blocks(pool):
        ops.extend(block.generators())
    return ops


def run_static(system: MoleculeSystem, config: RunConfig,
               pool: BlockPool | None = None) -> MacroTrace:
    """One-shot optimization of a fixed ansatz (uccsd, uccsdt, compass_static)."""
    tb = _TraceBuilder(system, config)
    backend = tb.backend
    if config.method == "compass_static" and pool is None:
        pool = build_block_pool(system, backend, config.threshold_d,
                                config.threshold_s, config.cso_occupied,
                                config.cso_virtual)
    if pool is not None:
        tb.trace.pool_summary = _pool_summary(pool)
    rng = np.random.default_rng(config.seed)

    ops = _static_ops(system, config.method, pool)
    program = AnsatzProgram(ops, np.zeros(len(ops)), [1] * len(ops))
    tb.seed_reference_row()
    x0 = _macro_start(config, program.params, rng) \
        if config.init == "random" else np.zeros(len(ops))
    res = _optimize(backend, program, x0, _macro_options(config))
    program = program.with_params(res.x)
    psi = prepare_state(backend, program)
    tb.add_row(1, config.method, program, res.fun, system.hf_energy, psi)
    status = "converged" if res.converged else f"optimizer_{res.status}"
    return tb.finish(status)


def adapt_pool(system: MoleculeSystem, method: str):
    if method == "adapt_sd":
        gens = doubles_pool(system) + singles_pool(system)
        return sorted(gens, key=lambda g: g.label)
    return gsd_pool(system)


def run_adapt(system: MoleculeSystem, config: RunConfig) -> MacroTrace:
    """Gradient-selected growth; operators may be selected repeatedly.

    Stops when the largest pool gradient falls under the gradient
    tolerance (which may happen far from the exact energy), on an energy
    stall, or at the iteration cap.
    """
    tb = _TraceBuilder(system, config)
    backend = tb.backend
    gens = adapt_pool(system, config.method)
    tb.trace.pool_summary = {"n_pool_operators": len(gens)}
    macro_opts = _macro_options(config)

    program = AnsatzProgram()
    psi = tb.seed_reference_row()
    e_prev = system.hf_energy
    max_iters = config.max_blocks if config.max_blocks is not None else 75
    stall = 0
    k = 0
    status = "max_blocks"
    while k < max_iters:
        grads = pool_gradients(backend, psi, gens)
        order = sorted(range(len(gens)),
                       key=lambda i: (-abs(grads[i]), gens[i].label))
        best = order[0]
        if abs(grads[best]) < config.adapt_gradient_tol:
            status = "converged_gradient"
            break
        k += 1
        program = program.extended([gens[best]], [0.0], block_id=k)
        res = _optimize(backend, program, program.params, macro_opts)
        program = program.with_params(res.x)
        energy = res.fun
        psi = prepare_state(backend, program)
        tb.add_row(k, gens[best].label, program, energy, e_prev, psi,
                   micro_gain=float(abs(grads[best])))
        delta = abs(energy - e_prev)
        e_prev = energy
        if delta < config.macro_tol:
            stall += 1
            if stall >= config.stall_patience:
                status = "stalled"
                break
        else:
            stall = 0
    return tb.finish(status)


def run(system: MoleculeSystem, config: RunConfig) -> MacroTrace:
    if config.method == "compass_pro":
        return run_compass_pro(system, config)
    if config.method == "compass_stepwise":
        return run_compass_stepwise(system, config)
    if config.method in ("uccsd", "uccsdt", "compass_static"):
        return run_static(system, config)
    return run_adapt(system, config)
