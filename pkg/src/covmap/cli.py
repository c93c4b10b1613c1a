"""Command-line entry points: serve, simulate, aggregate."""

from __future__ import annotations

import argparse
import logging
import sys
import time

from .errors import AppError


def _cmd_serve(args) -> int:
    import uvicorn

    from .config import ServerConfig, load_server_config, parse_listen
    from .service import create_app
    from .store import MeasurementStore

    config = load_server_config(args.config) if args.config else ServerConfig()
    listen = args.listen or config.listen
    host, port = parse_listen(listen)
    store = MeasurementStore(args.data, known_sites=config.site_ids)
    print(f"loaded {store.count} measurements from {args.data}", file=sys.stderr)
    app = create_app(store, config)
    uvicorn.run(app, host=host, port=port, log_level="info")
    return 0


def _cmd_simulate(args) -> int:
    from .config import load_sim_config
    from .simulate import SimConfig, replace_config, write_dataset

    config = load_sim_config(args.config) if args.config else SimConfig()
    if args.seed is not None:
        config = replace_config(config, seed=args.seed)
    started = time.perf_counter()
    count = write_dataset(config, args.out)
    elapsed = time.perf_counter() - started
    print(f"wrote {count} measurements to {args.out} (seed {config.seed}, {elapsed:.1f}s)")
    return 0


def _cmd_aggregate(args) -> int:
    from .oracle import run_oracle_check
    from .store import MeasurementStore

    started = time.perf_counter()
    store = MeasurementStore(args.data)
    snap = store.snapshot()
    sites = sorted(snap.site_table)
    load_seconds = time.perf_counter() - started
    print(f"loaded {len(snap)} measurements, {len(sites)} site(s) ({load_seconds:.1f}s)")

    if not args.oracle_check:
        for site_id in sites:
            code = snap.site_code(site_id)
            n = sum(int((p.site_codes == code).sum()) for p in snap.parts)
            print(f"  {site_id}: {n} measurements")
        return 0

    report = run_oracle_check(
        snap,
        sites,
        n_grids=args.grids,
        seed=args.seed,
        k_min=args.k_min,
        min_cell_meters=args.min_cell_meters,
    )
    print(
        f"heatmap: {report.grids_checked} grids checked in {report.heatmap_seconds:.1f}s; "
        f"timeseries: {report.series_checked} metrics checked in {report.timeseries_seconds:.1f}s"
    )
    if not report.ok:
        for problem in report.problems[:50]:
            print(f"MISMATCH: {problem}", file=sys.stderr)
        if len(report.problems) > 50:
            print(f"... and {len(report.problems) - 50} more", file=sys.stderr)
        print("oracle check FAILED", file=sys.stderr)
        return 1
    print("oracle check passed: production aggregates match the brute-force oracle")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="covmap", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_serve = sub.add_parser("serve", help="load a dataset and serve the API")
    p_serve.add_argument("--config", help="server config YAML (defaults apply when omitted)")
    p_serve.add_argument("--data", required=True, help="measurement log file (created if missing)")
    p_serve.add_argument("--listen", help="host:port override")
    p_serve.set_defaults(func=_cmd_serve)

    p_sim = sub.add_parser("simulate", help="generate a mock dataset file")
    p_sim.add_argument("--config", help="simulator config YAML (defaults apply when omitted)")
    p_sim.add_argument("--seed", type=int, help="override the config seed")
    p_sim.add_argument("--out", required=True, help="output dataset file")
    p_sim.set_defaults(func=_cmd_simulate)

    p_agg = sub.add_parser("aggregate", help="summarize a dataset or run the oracle check")
    p_agg.add_argument("--data", required=True, help="dataset file to check")
    p_agg.add_argument("--oracle-check", action="store_true",
                       help="compare production aggregates against the brute-force oracle")
    p_agg.add_argument("--grids", type=int, default=50, help="random grids to check (default 50)")
    p_agg.add_argument("--seed", type=int, default=2024, help="grid-drawing seed (default 2024)")
    p_agg.add_argument("--k-min", type=int, default=5, help="suppression floor (default 5)")
    p_agg.add_argument("--min-cell-meters", type=float, default=300.0,
                       help="privacy floor for cell size (default 300)")
    p_agg.set_defaults(func=_cmd_aggregate)
    return parser


def main(argv=None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except AppError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except FileNotFoundError as exc:
        print(f"error: file not found: {exc.filename}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
