"""Command line entry point: ``nemsent run|preset|sweep|oracle``."""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

import numpy as np

from .evolution import PhysicalityError

EXIT_PHYSICALITY = 2
EXIT_USAGE = 1


def _print_result(res) -> None:
    label = res.csv_path or "(no csv)"
    print(f"{label}: {len(res.table)} points, " + ", ".join(res.report.lines()))
    for note in res.notes:
        print(f"  note: {note}")


def cmd_run(args) -> int:
    from .scenarios import load_config, run_scenario

    cfg = load_config(args.config)
    if args.check_cutoff:
        cfg = cfg.with_(check_cutoff=True)
    _print_result(run_scenario(cfg))
    return 0


def cmd_preset(args) -> int:
    from .plotting import plot_columns
    from .scenarios import preset, run_many, sweep_tag

    p = preset(args.name)
    configs = p.configs(args.out)
    if args.check_cutoff:
        configs = [c.with_(check_cutoff=True) for c in configs]
    results = run_many(configs, jobs=args.jobs)
    for res in results:
        _print_result(res)
    if p.sweep_key is not None:
        curves = [(sweep_tag(p.sweep_key, v), r) for v, r in zip(p.values, results)]
        path = plot_columns(curves, Path(args.out) / f"{p.name}.svg", title=p.note)
        print(f"overview: {path}")
    return 0


def cmd_sweep(args) -> int:
    from .plotting import plot_columns
    from .scenarios import load_config, run_many, sweep_configs, sweep_tag

    base = load_config(args.config)
    values = [v.strip() for v in args.values.split(",") if v.strip()]
    out = args.out or (Path(base.csv).parent if base.csv else Path("."))
    stem = Path(base.csv).stem if base.csv else Path(args.config).stem
    configs = sweep_configs(base, args.param, values, out, stem)
    results = run_many(configs, jobs=args.jobs)
    for res in results:
        _print_result(res)
    curves = [(sweep_tag(args.param, float(v)), r) for v, r in zip(values, results)]
    plot_columns(curves, Path(out) / f"{stem}_{args.param.rsplit('.', 1)[-1]}_sweep.svg")
    return 0


def cmd_oracle(args) -> int:
    from .analytic import single_excitation_oracle
    from .scenarios import load_config, simulate

    cfg = load_config(args.compare)
    cfg = cfg.with_(model=cfg.model.with_(rwa=True), measures=("qubit_resonator_tangle",))
    if cfg.initial_qubits != "e" or cfg.initial_resonator not in ("vacuum", "fock(0)"):
        print("oracle comparison needs initial.qubits = e and a vacuum resonator", file=sys.stderr)
        return EXIT_USAGE
    _, table, columns = simulate(cfg)
    ref = single_excitation_oracle(cfg.model, cfg.times)
    pipe = table[:, columns.index("tangle_qr")]
    dev = np.abs(pipe - ref.observables["tangle_qr"])
    print(f"max |tangle_pipeline - tangle_oracle| = {dev.max():.3e} at omega_t = {cfg.times[dev.argmax()]:.4f}")
    print(f"g_eff = {ref.meta['g_eff']:.12g}, dressed splitting = {ref.meta['splitting']:.12g}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="nemsent", description="Charge qubits on a lossy resonator: entanglement dynamics.")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="run one config file")
    r.add_argument("--config", required=True)
    r.add_argument("--check-cutoff", action="store_true", help="rerun at n_max+4 and report convergence")
    r.set_defaults(func=cmd_run)

    p = sub.add_parser("preset", help="run a figure preset (all sweep points)")
    p.add_argument("--name", required=True, choices=[f"fig{i}" for i in range(1, 8)])
    p.add_argument("--out", required=True)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--check-cutoff", action="store_true")
    p.set_defaults(func=cmd_preset)

    s = sub.add_parser("sweep", help="sweep one config key")
    s.add_argument("--config", required=True)
    s.add_argument("--param", required=True, help="dotted key, e.g. dissipation.kappa")
    s.add_argument("--values", required=True, help="comma separated values")
    s.add_argument("--out", default=None)
    s.add_argument("--jobs", type=int, default=1)
    s.set_defaults(func=cmd_sweep)

    o = sub.add_parser("oracle", help="compare the pipeline with the single-excitation solution")
    o.add_argument("--compare", required=True, metavar="CONFIG")
    o.set_defaults(func=cmd_oracle)
    return ap


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except PhysicalityError as exc:
        print(f"physicality abort: {exc}", file=sys.stderr)
        return EXIT_PHYSICALITY
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
