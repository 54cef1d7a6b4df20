"""Command-line interface: run, gen-corpus, validate, sweep, report.

Failures surface as one JSON line on stderr (`{"error": ..., "message":
...}`) and a nonzero exit; success paths print plain progress lines.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import os
import sys

from .config import load_config
from .corpus import generate_synthetic, load_store, write_store
from .errors import ConfigError, FergridError
from .reporting import generate_report
from .runner import run_experiment


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fergrid",
        description=(
            "Grid-world simulation of embodied facial-expression classifiers "
            "under scheduled embedding degradation."),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="execute one seeded experiment")
    p_run.add_argument("--config", required=True, help="flat key=value config file")
    p_run.add_argument("--seed", type=int, default=None, help="override the config seed")
    p_run.add_argument("--out", default=None, help="override the output directory")

    p_gen = sub.add_parser("gen-corpus", help="generate a synthetic embedding store")
    p_gen.add_argument("--spec", required=True,
                       help="flat key=value file with synthetic.* keys")
    p_gen.add_argument("--out", required=True, help="destination .embs path")

    p_val = sub.add_parser("validate", help="check an .embs store file")
    p_val.add_argument("--store", required=True, help=".embs path to validate")

    p_sweep = sub.add_parser("sweep", help="run one experiment per seed")
    p_sweep.add_argument("--config", required=True, help="flat key=value config file")
    p_sweep.add_argument("--seeds", required=True,
                         help="inclusive range a..b or a single seed")
    p_sweep.add_argument("--out", default=None,
                         help="base output directory (one subdirectory per seed)")

    p_rep = sub.add_parser("report", help="merge sweep outputs and render figures")
    p_rep.add_argument("--runs", required=True, help="directory holding run outputs")
    p_rep.add_argument("--out", default=None,
                       help="report directory (default <runs>/report)")
    return parser


def _parse_seeds(text: str) -> list[int]:
    if ".." in text:
        first, _, last = text.partition("..")
        try:
            lo, hi = int(first), int(last)
        except ValueError:
            raise ConfigError(f"bad seed range {text!r}, expected a..b") from None
        if hi < lo:
            raise ConfigError(f"empty seed range {text!r}")
        return list(range(lo, hi + 1))
    try:
        return [int(text)]
    except ValueError:
        raise ConfigError(f"bad seed value {text!r}") from None


def _cmd_run(args) -> int:
    cfg = load_config(args.config)
    if args.seed is not None:
        cfg = dataclasses.replace(cfg, seed=args.seed)
    if args.out is not None:
        cfg = dataclasses.replace(cfg, out_dir=args.out)
    out = run_experiment(cfg)
    print(f"run {out.run_id} complete")
    for path in (out.manifest_path, out.metrics_path, out.degradation_path,
                 out.snapshot_path):
        print(f"wrote {path}")
    return 0


def _cmd_gen_corpus(args) -> int:
    cfg = load_config(args.spec).resolved()
    store = generate_synthetic(cfg.synthetic)
    write_store(store, args.out)
    print(f"wrote {args.out}: {store.record_count()} records, dim {store.dim}, "
          f"groups {','.join(store.groups)}")
    return 0


def _cmd_validate(args) -> int:
    store = load_store(args.store)
    print(f"{args.store}: OK ({store.record_count()} records, dim {store.dim}, "
          f"groups {','.join(store.groups)}, "
          f"sigma {','.join(str(s) for s in store.sigma_levels)})")
    return 0


def _cmd_sweep(args) -> int:
    cfg = load_config(args.config)
    base_out = args.out if args.out is not None else cfg.out_dir
    for seed in _parse_seeds(args.seeds):
        run_cfg = dataclasses.replace(
            cfg, seed=seed, out_dir=os.path.join(base_out, f"seed-{seed:04d}"))
        out = run_experiment(run_cfg)
        print(f"run {out.run_id} complete -> {out.out_dir}")
    return 0


def _cmd_report(args) -> int:
    out_dir = args.out if args.out is not None else os.path.join(args.runs, "report")
    paths = generate_report(args.runs, out_dir)
    for path in (paths.summary_csv, paths.degradation_png, paths.curves_png):
        print(f"wrote {path}")
    return 0


_COMMANDS = {
    "run": _cmd_run,
    "gen-corpus": _cmd_gen_corpus,
    "validate": _cmd_validate,
    "sweep": _cmd_sweep,
    "report": _cmd_report,
}


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except (FergridError, OSError, ValueError) as exc:
        line = json.dumps({"error": type(exc).__name__, "message": str(exc)})
        print(line, file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
