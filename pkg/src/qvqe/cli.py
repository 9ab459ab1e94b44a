"""Command-line front end for screenings, runs, sweeps, and studies.

Every command writes a pair of artifacts under --out, named by a
deterministic run id: ``<run-id>.trace.json`` (full payload plus the
resolved configuration, fixture checksums, seed list, and package
version) and ``<run-id>.csv`` (flat rows for plotting).  Artifacts carry
no timestamps, so replaying a command with the same seeds reproduces
both files byte for byte.

Exit codes: 0 on success, 1 on a numerical failure inside a run, 2 on a
usage error (unknown command, unknown method, missing fixture).
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__
from .driver import (
    CHEMICAL_ACCURACY,
    METHODS,
    RunConfig,
    _macro_options,
    _optimize,
    run as run_method,
)
from .engine import SectorBackend
from .fci import fci_spectrum, spectrum_payload
from .hamiltonian import MoleculeSystem, load_fixture, resolve_fixture
from .screening import (
    DEFAULT_THRESHOLD_D,
    DEFAULT_THRESHOLD_S,
    build_block_pool,
    pool_payload,
)

_INIT_ALIASES = {"warm": "warm", "hf": "hf_zero", "hf_zero": "hf_zero",
                 "random": "random"}


# ---------------------------------------------------------------- artifacts

def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return str(value).lower()
    if isinstance(value, float):
        return f"{value:.16e}"
    return str(value)


def _write_csv(path: Path, header: list[str], rows: list[list]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])


def _write_json(path: Path, payload: dict) -> None:
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _strip_times(payload: dict) -> dict:
    """Wall times vary between replays; artifacts must not."""
    for row in payload.get("rows", []):
        row.pop("wall_time", None)
    return payload


def _run_id(command: str, slug: str, resolved: dict) -> str:
    blob = json.dumps({"command": command, "resolved": resolved},
                      sort_keys=True)
    digest = hashlib.sha256(blob.encode()).hexdigest()[:12]
    return f"{command}-{slug}-{digest}"


def _meta(command: str, run_id: str, fixtures: list[tuple[str, str]],
          config: dict, seeds: list[int]) -> dict:
    return {
        "artifact_version": __version__,
        "command": command,
        "run_id": run_id,
        "fixtures": [{"label": lab, "sha256": sha} for lab, sha in fixtures],
        "config": config,
        "seeds": seeds,
    }


# ------------------------------------------------------------ worker plumbing

_SYSTEM_CACHE: dict[str, MoleculeSystem] = {}


def _cached_system(label: str) -> MoleculeSystem:
    system = _SYSTEM_CACHE.get(label)
    if system is None:
        system = load_fixture(label)
        _SYSTEM_CACHE[label] = system
    return system


def _run_task(task) -> dict:
    label, cfg = task
    system = _cached_system(label)
    trace = run_method(system, RunConfig(**cfg))
    return _strip_times(trace.payload())


def _landscape_task(task) -> list:
    label, depth, program, seed, grad_tol = task
    system = _cached_system(label)
    backend = SectorBackend(system)
    rng = np.random.default_rng(seed)
    x0 = rng.uniform(-np.pi, np.pi, len(program))
    opts = _macro_options(RunConfig(grad_tol_macro=grad_tol))
    res = _optimize(backend, program, x0, opts)
    return [depth, len(program), seed, res.fun]


def _map_tasks(fn, tasks: list, workers: int) -> list:
    if workers <= 1 or len(tasks) <= 1:
        return [fn(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, tasks))


# ------------------------------------------------------------------ commands

def _fixture_meta(labels: list[str]) -> list[tuple[str, str]]:
    out = []
    for label in labels:
        system = _cached_system(label)
        out.append((system.label, system.fixture_sha256))
    return out


def _base_config(args, seed: int, method: str) -> dict:
    return RunConfig(
        method=method,
        threshold_d=args.threshold_d,
        threshold_s=args.threshold_s,
        macro_tol=args.macro_tol,
        init=_INIT_ALIASES[args.init],
        seed=seed,
        max_blocks=args.max_blocks,
        n_roots=args.roots,
    ).to_dict()


_TRACE_HEADER = ["k", "block", "n_params", "energy", "delta_e",
                 "delta_e_fci", "overlap_gs", "overlap_es", "micro_gain"]


def _trace_rows(payload: dict) -> list[list]:
    return [[r["k"], r["block"], r["n_params"], r["energy"], r["delta_e"],
             r["delta_e_fci"], r["overlap_gs"], r["overlap_es"],
             r["micro_gain"]] for r in payload["rows"]]


def _emit(args, command: str, slug: str, meta_cfg: dict, seeds: list[int],
          labels: list[str], json_body: dict, header: list[str],
          rows: list[list]) -> tuple[Path, Path]:
    fixtures = _fixture_meta(labels)
    resolved = {"config": meta_cfg, "fixtures": fixtures, "seeds": seeds}
    run_id = _run_id(command, slug, resolved)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    meta = _meta(command, run_id, fixtures, meta_cfg, seeds)
    json_path = out_dir / f"{run_id}.trace.json"
    csv_path = out_dir / f"{run_id}.csv"
    _write_json(json_path, {"meta": meta, **json_body})
    _write_csv(csv_path, header, rows)
    return json_path, csv_path


def _cmd_screen(args) -> int:
    system = _cached_system(args.fixture)
    backend = SectorBackend(system)
    pool = build_block_pool(system, backend, args.threshold_d,
                            args.threshold_s)
    payload = pool_payload(system, pool)
    rows = []
    for i, blk in enumerate(payload["blocks"]):
        scatterers = ";".join(s["label"] for s in blk["scatterers"])
        rows.append([i, blk["label"], blk["kind"], blk["delta_e"],
                     blk["e_screen"], blk["n_params"], scatterers])
    cfg = {"threshold_d": args.threshold_d, "threshold_s": args.threshold_s}
    jp, cp = _emit(args, "screen", system.label, cfg, [], [args.fixture],
                   {"pool": payload},
                   ["index", "label", "kind", "delta_e", "e_screen",
                    "n_params", "scatterers"], rows)
    print(f"{system.label}: {payload['n_screened_doubles']} doubles kept, "
          f"{payload['n_pruned_scatterers']} scatterers pruned, "
          f"{payload['total_params']} pool parameters")
    print(f"wrote {jp} and {cp}")
    return 0


def _cmd_run(args) -> int:
    seeds = args.seeds if args.seeds is not None else [0]
    cfg = _base_config(args, seeds[0], args.method)
    payload = _run_task((args.fixture, cfg))
    slug = f"{payload['fixture']}-{args.method}"
    jp, cp = _emit(args, "run", slug, cfg, seeds, [args.fixture],
                   {"trace": payload}, _TRACE_HEADER, _trace_rows(payload))
    final = payload["final"]
    print(f"{payload['fixture']} {args.method}: "
          f"E = {final['energy']:.12f} Ha, "
          f"E - E_FCI = {final['error_vs_fci']:.3e} Ha, "
          f"{final['n_params']} parameters, status {payload['status']}")
    print(f"wrote {jp} and {cp}")
    return 0


def _cmd_sweep(args) -> int:
    labels = [s for s in args.fixture.split(",") if s]
    seeds = args.seeds if args.seeds is not None else [0]
    cfg = _base_config(args, seeds[0], args.method)
    payloads = _map_tasks(_run_task, [(lab, cfg) for lab in labels],
                          args.workers)
    rows = []
    for payload in payloads:
        final = payload["final"]
        rows.append([payload["fixture"], payload["e_hf"], payload["e_fci"],
                     final["energy"], final["error_vs_fci"],
                     final["n_params"], len(payload["rows"]) - 1,
                     payload["status"]])
    jp, cp = _emit(args, "sweep", args.method, cfg, seeds, labels,
                   {"traces": payloads},
                   ["fixture", "e_hf", "e_fci", "energy", "error_vs_fci",
                    "n_params", "n_cycles", "status"], rows)
    for row in rows:
        print(f"{row[0]}: E - E_FCI = {row[4]:.3e} Ha ({row[5]} parameters)")
    print(f"wrote {jp} and {cp}")
    return 0


def _cmd_landscape(args) -> int:
    seeds = args.seeds if args.seeds is not None else list(range(50))
    cfg = _base_config(args, 0, args.method)
    cfg["init"] = "warm"
    system = _cached_system(args.fixture)
    reference = run_method(system, RunConfig(**cfg))
    ref_payload = _strip_times(reference.payload())

    tasks = []
    for row, program in zip(reference.rows[1:], reference.programs[1:]):
        for seed in seeds:
            tasks.append((args.fixture, row.k, program, seed,
                          cfg["grad_tol_macro"]))
    rows = _map_tasks(_landscape_task, tasks, args.workers)

    warm_by_depth = {r.k: r.energy for r in reference.rows[1:]}
    depths = {}
    for depth, n_params, seed, energy in rows:
        depths.setdefault(depth, []).append(energy)
    summary = [{"depth": d, "n_params": len(reference.programs[d]),
                "warm_energy": warm_by_depth[d],
                "restart_min": min(es), "restart_max": max(es),
                "restart_mean": sum(es) / len(es), "n_restarts": len(es)}
               for d, es in sorted(depths.items())]
    csv_rows = [[d, n, s, e, warm_by_depth[d], e - warm_by_depth[d]]
                for d, n, s, e in rows]
    jp, cp = _emit(args, "landscape", system.label, cfg, seeds,
                   [args.fixture],
                   {"reference": ref_payload, "depths": summary},
                   ["depth", "n_params", "seed", "energy", "warm_energy",
                    "gap_to_warm"], csv_rows)
    for d in summary:
        print(f"depth {d['depth']}: warm {d['warm_energy']:.10f}, "
              f"restarts [{d['restart_min']:.10f}, {d['restart_max']:.10f}]")
    print(f"wrote {jp} and {cp}")
    return 0


def _cmd_burrow(args) -> int:
    seeds = args.seeds if args.seeds is not None else list(range(10))
    cfg = _base_config(args, 0, args.method)
    cfg["init"] = "random"
    tasks = []
    for seed in seeds:
        per_seed = dict(cfg)
        per_seed["seed"] = seed
        tasks.append((args.fixture, per_seed))
    payloads = _map_tasks(_run_task, tasks, args.workers)

    rows = []
    n_accurate = 0
    for seed, payload in zip(seeds, payloads):
        energies = [r["energy"] for r in payload["rows"]]
        climbs = int(np.sum(np.diff(energies) > 1e-12))
        err = payload["final"]["error_vs_fci"]
        if abs(err) < CHEMICAL_ACCURACY:
            n_accurate += 1
        rows.append([seed, payload["final"]["energy"], err,
                     payload["final"]["n_params"], len(energies) - 1,
                     climbs, payload["status"]])
    jp, cp = _emit(args, "burrow", args.fixture, cfg, seeds, [args.fixture],
                   {"traces": payloads, "n_within_accuracy": n_accurate},
                   ["seed", "energy", "error_vs_fci", "n_params", "n_cycles",
                    "non_monotone_steps", "status"], rows)
    print(f"{args.fixture}: {n_accurate}/{len(seeds)} restarts within "
          f"{CHEMICAL_ACCURACY} Ha of FCI")
    print(f"wrote {jp} and {cp}")
    return 0


def _cmd_overlap(args) -> int:
    methods = [m for m in args.method.split(",") if m]
    seeds = args.seeds if args.seeds is not None else [0]
    tasks = []
    for method in methods:
        tasks.append((args.fixture, _base_config(args, seeds[0], method)))
    payloads = _map_tasks(_run_task, tasks, args.workers)

    rows = []
    traces = {}
    for method, payload in zip(methods, payloads):
        traces[method] = payload
        for r in payload["rows"]:
            rows.append([method, r["k"], r["n_params"], r["energy"],
                         r["delta_e_fci"], r["overlap_gs"], r["overlap_es"]])
    cfg = _base_config(args, seeds[0], methods[0])
    cfg["method"] = ",".join(methods)
    jp, cp = _emit(args, "overlap", args.fixture, cfg, seeds, [args.fixture],
                   {"traces": traces},
                   ["method", "k", "n_params", "energy", "delta_e_fci",
                    "overlap_gs", "overlap_es"], rows)
    for method, payload in zip(methods, payloads):
        last = payload["rows"][-1]
        trough = " trough" if payload["gradient_trough"] else ""
        es = ("none" if last["overlap_es"] is None
              else f"{last['overlap_es']:.4f}")
        print(f"{method}: overlap_gs = {last['overlap_gs']:.4f}, "
              f"overlap_es = {es}, status {payload['status']}{trough}")
    print(f"wrote {jp} and {cp}")
    return 0


def _cmd_fci(args) -> int:
    system = _cached_system(args.fixture)
    roots = fci_spectrum(system, n_roots=args.roots)
    payload = spectrum_payload(system, roots)
    e0 = roots[0].energy
    rows = [[r["index"], r["energy"], r["energy"] - e0, r["s_squared"]]
            for r in payload["roots"]]
    cfg = {"n_roots": args.roots}
    jp, cp = _emit(args, "fci", system.label, cfg, [], [args.fixture],
                   {"spectrum": payload},
                   ["index", "energy", "gap_to_gs", "s_squared"], rows)
    print(f"{system.label}: E_FCI = {e0:.12f} Ha "
          f"({len(roots)} roots, sector dimension {payload['sector_dim']})")
    print(f"wrote {jp} and {cp}")
    return 0


# -------------------------------------------------------------------- parser

def _parse_seeds(text: str) -> list[int]:
    try:
        seeds = [int(s) for s in text.split(",") if s.strip() != ""]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad seed list {text!r}")
    if not seeds:
        raise argparse.ArgumentTypeError("empty seed list")
    return seeds


def _add_shared(p: argparse.ArgumentParser, *, method: str | None = None,
                multi_method: bool = False) -> None:
    p.add_argument("--fixture", required=True,
                   help="fixture label like H4_d1.50, or a .fcidump path")
    p.add_argument("--out", default="out", help="artifact directory")
    p.add_argument("--threshold-d", type=float, default=DEFAULT_THRESHOLD_D,
                   dest="threshold_d")
    p.add_argument("--threshold-s", type=float, default=DEFAULT_THRESHOLD_S,
                   dest="threshold_s")
    if multi_method:
        p.add_argument("--method", default="compass_pro,adapt_sd,adapt_gsd",
                       help="comma-separated method list")
    elif method is not None:
        p.add_argument("--method", default=method, choices=METHODS)
    p.add_argument("--macro-tol", type=float, default=1e-7, dest="macro_tol")
    p.add_argument("--init", default="warm",
                   choices=("warm", "hf", "hf_zero", "random"))
    p.add_argument("--seeds", type=_parse_seeds, default=None,
                   help="comma-separated integer seeds")
    p.add_argument("--roots", type=int, default=None)
    p.add_argument("--max-blocks", type=int, default=None, dest="max_blocks")
    p.add_argument("--workers", type=int, default=1)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qvqe",
        description="operator-block VQE workbench (screen, run, sweep, "
                    "landscape, burrow, overlap, fci)")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("screen", help="build and report the screened pool")
    _add_shared(p)
    p.set_defaults(func=_cmd_screen)

    p = sub.add_parser("run", help="one method on one fixture")
    _add_shared(p, method="compass_pro")
    p.set_defaults(func=_cmd_run)

    p = sub.add_parser("sweep", help="one method across fixtures "
                                     "(--fixture a,b,c)")
    _add_shared(p, method="compass_pro")
    p.set_defaults(func=_cmd_sweep)

    p = sub.add_parser("landscape",
                       help="re-optimize each warm-run depth from random "
                            "starts (default 50 seeds)")
    _add_shared(p, method="compass_pro")
    p.set_defaults(func=_cmd_landscape)

    p = sub.add_parser("burrow",
                       help="random-restart full runs (default 10 seeds)")
    _add_shared(p, method="compass_pro")
    p.set_defaults(func=_cmd_burrow)

    p = sub.add_parser("overlap",
                       help="per-cycle overlaps with the exact roots for "
                            "several methods")
    _add_shared(p, multi_method=True)
    p.set_defaults(func=_cmd_overlap)

    p = sub.add_parser("fci", help="exact spectrum of the active space")
    _add_shared(p)
    p.set_defaults(func=_cmd_fci)
    return parser


def _validate(parser: argparse.ArgumentParser, args) -> None:
    if getattr(args, "method", None) and args.command == "overlap":
        for m in args.method.split(","):
            if m and m not in METHODS:
                parser.error(f"unknown method {m!r}")
    if args.command == "overlap" and args.roots is not None and args.roots < 2:
        parser.error("overlap needs --roots of at least 2")
    labels = getattr(args, "fixture", "")
    labels = labels.split(",") if args.command == "sweep" else [labels]
    for label in labels:
        try:
            resolve_fixture(label)
        except FileNotFoundError as exc:
            parser.error(str(exc))


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    _validate(parser, args)
    try:
        return args.func(args)
    except Exception as exc:  # noqa: BLE001 - map to the documented exit code
        diagnostic = {"error": type(exc).__name__, "message": str(exc),
                      "command": args.command}
        print(json.dumps(diagnostic, sort_keys=True), file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
