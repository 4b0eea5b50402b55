"""Command-line entry point.

Exit codes: 0 success, 2 configuration error, 3 validation or parse error,
4 runtime or I/O error, 1 anything else.
"""

from __future__ import annotations

import argparse
import dataclasses
import logging
import sys
from pathlib import Path

from . import snapshot
from .errors import VmconsolError
from .harness import (
    ALGORITHMS,
    TIMING_MODES,
    aggregate_metrics,
    build_settings,
    consolidate_datacenter,
    load_config,
    load_spec,
    rows_to_csv,
    run_experiment,
    write_csv,
    METRICS,
    TIMING_METRIC,
)
from .workload import generate_datacenter

log = logging.getLogger("vmconsol")


def _settings(args):
    return build_settings(load_config(args.config) if args.config else {})


def cmd_generate(args) -> int:
    settings = _settings(args)
    gen = settings.gen
    changes = {"seed": args.seed}
    for name in ("n_pm", "mean_rsc", "sd_rsc"):
        value = getattr(args, name)
        if value is not None:
            changes[name] = value
    gen = dataclasses.replace(gen, **changes)
    n_vm = args.n_vm if args.n_vm is not None else 2 * gen.n_pm
    dc = generate_datacenter(gen, n_vm)
    snapshot.save(dc, args.out)
    log.info("wrote %s (%d PMs, %d VMs)", args.out, gen.n_pm, n_vm)
    return 0


def cmd_consolidate(args) -> int:
    settings = _settings(args)
    dc = snapshot.load(args.snapshot)
    results = consolidate_datacenter(dc, settings, (args.algo,), args.cluster_size, args.seed)[args.algo]
    metrics = aggregate_metrics(results, args.timing_mode)
    row = {
        "sweep": "snapshot", "sweep_value": dc.config.n_pm, "algorithm": args.algo,
        "n_pm": dc.config.n_pm, "n_vm": dc.n_vm, "repetitions": 1, "failures": 0,
    }
    for metric in METRICS + (TIMING_METRIC,):
        row[metric] = metrics[metric]
        row[f"{metric}_std"] = 0.0
    sys.stdout.write(rows_to_csv([row]))
    if args.map_out:
        lines = ["vm_id,source_pm,target_pm"]
        for res in results:
            for vm_id, target in res.migration_map:
                lines.append(f"{vm_id},{dc.vms[vm_id].host},{target}")
        Path(args.map_out).write_text("\n".join(lines) + "\n")
    return 0


def cmd_experiment(args) -> int:
    spec = load_spec(args.spec)
    changes = {}
    if args.jobs is not None:
        changes["jobs"] = args.jobs
    if args.seed is not None:
        changes["base_seed"] = args.seed
    if changes:
        spec = dataclasses.replace(spec, **changes)
    rows = run_experiment(spec)
    write_csv(rows, args.out)
    log.info("wrote %d rows to %s", len(rows), args.out)
    if args.plot_dir:
        from .plotting import emit_plots

        emit_plots(args.out, args.plot_dir, args.format)
    return 0


def cmd_plot(args) -> int:
    from .plotting import emit_plots

    out_dir = args.out_dir or Path(args.csv).parent
    for path in emit_plots(args.csv, out_dir, args.format):
        print(path)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="vmconsol", description="Migration-aware VM consolidation simulator")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="generate a data-center snapshot")
    p.add_argument("--out", required=True, help="snapshot file to write")
    p.add_argument("--n-pm", dest="n_pm", type=int)
    p.add_argument("--n-vm", dest="n_vm", type=int, help="default: 2 x n-pm")
    p.add_argument("--mean-rsc", dest="mean_rsc", type=float)
    p.add_argument("--sd-rsc", dest="sd_rsc", type=float)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--config", help="flat key = value overrides")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("consolidate", help="run one algorithm on a snapshot, metrics to stdout")
    p.add_argument("--snapshot", required=True)
    p.add_argument("--algo", choices=ALGORITHMS, default="amdvmc")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--cluster-size", dest="cluster_size", type=int, default=8)
    p.add_argument("--timing-mode", dest="timing_mode", choices=TIMING_MODES, default="decentralized")
    p.add_argument("--config")
    p.add_argument("--map-out", dest="map_out", help="write the migration map as CSV")
    p.set_defaults(func=cmd_consolidate)

    p = sub.add_parser("experiment", help="run a sweep described by a spec file, CSV out")
    p.add_argument("--spec", required=True)
    p.add_argument("--out", required=True, help="CSV file to write")
    p.add_argument("--plot-dir", dest="plot_dir", help="also render figures here")
    p.add_argument("--format", default="svg", choices=("svg", "pdf"))
    p.add_argument("--jobs", type=int)
    p.add_argument("--seed", type=int, help="override base_seed")
    p.set_defaults(func=cmd_experiment)

    p = sub.add_parser("plot", help="render figures from an experiment CSV")
    p.add_argument("--csv", required=True)
    p.add_argument("--out-dir", dest="out_dir")
    p.add_argument("--format", default="svg", choices=("svg", "pdf"))
    p.set_defaults(func=cmd_plot)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except VmconsolError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
