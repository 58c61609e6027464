"""Command-line entry point: one subcommand per experiment, JSON-lines output."""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import __version__
from .experiments import RUNNERS, ConfigError, build_config, load_config, run_experiment, table_failed


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="u1phases", description=__doc__)
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="experiment", required=True, metavar="EXPERIMENT")
    for name in RUNNERS:
        s = sub.add_parser(name, help=f"run the {name} experiment")
        s.add_argument("--config", type=Path, help="JSON config file")
        mode = s.add_mutually_exclusive_group()
        mode.add_argument("--exact", action="store_true", help="infinite-shot noiseless mode")
        mode.add_argument("--shots", type=int, help="shots per circuit setting")
        s.add_argument("--seed", type=int, help="master seed (sampled mode)")
        s.add_argument("--noise", help="default, none, or a JSON noise-model file")
        s.add_argument("--out", type=Path, help="write JSON lines here instead of stdout")
        s.add_argument("--csv", type=Path, help="also write a flat CSV table")
    return p


def main(argv: list[str] | None = None) -> int:
    args = _parser().parse_args(argv)
    noise = args.noise
    if noise not in (None, "default", "none"):
        noise = str(Path(noise).resolve())
    overrides = {"seed": args.seed, "noise": noise, "output": str(args.out) if args.out else None}
    if args.exact:
        overrides["shots"] = "exact"
        overrides["noise"] = overrides["noise"] or "none"
    elif args.shots is not None:
        overrides["shots"] = args.shots
    try:
        if args.config:
            cfg = load_config(args.config, args.experiment, overrides)
        else:
            cfg = build_config(args.experiment, None, overrides)
        table = run_experiment(cfg)
    except (ConfigError, ValueError) as exc:
        print(f"u1phases: error: {exc}", file=sys.stderr)
        return 2

    text = table.to_jsonl()
    out = Path(cfg.output) if cfg.output else None
    if out:
        out.write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    if args.csv:
        args.csv.write_text(table.to_csv(), encoding="utf-8")
    if table_failed(table):
        print("u1phases: identity suite reported failures", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
