"""Command-line entry point: ``itesel run | dump-scenario | aggregate``."""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from .core import RandomStream, write_csv
from .dgp import get_scenario, sample
from .harness import FULL_SCALE, ExperimentConfig, aggregate, run, selections_from_raw, write_long_summary


def parse_ids(text: str) -> list[int]:
    """Parse ``"1-4,9,12-13"`` into a sorted list of unique ids."""
    ids: set[int] = set()
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        if "-" in part:
            lo, hi = (int(v) for v in part.split("-", 1))
            if hi < lo:
                raise argparse.ArgumentTypeError(f"bad range {part!r}")
            ids.update(range(lo, hi + 1))
        else:
            ids.add(int(part))
    if not ids:
        raise argparse.ArgumentTypeError("no scenario ids given")
    return sorted(ids)


def _cmd_run(args) -> int:
    cfg = ExperimentConfig.from_json(args.config).to_dict() if args.config else {}
    if args.full_scale:
        cfg["replications"] = FULL_SCALE["replications"]
        cfg["split_sizes"] = list(FULL_SCALE["split_sizes"])
    for key, val in (("scenarios", args.scenarios), ("replications", args.replications),
                     ("master_seed", args.seed), ("out_dir", args.out), ("jobs", args.jobs)):
        if val is not None:
            cfg[key] = val
    config = ExperimentConfig.from_dict(cfg)
    results = run(config)
    failed = sum(not r.ok for r in results)
    print(f"{len(results) - failed}/{len(results)} replications succeeded; outputs in {config.out_dir}")
    return 0


def _cmd_dump(args) -> int:
    spec = get_scenario(args.id)
    data, truth = sample(spec, args.n, RandomStream(args.seed).child("dump", args.id))
    write_csv(args.out, data, {"mu0": truth.mu0, "mu1": truth.mu1, "tau": truth.tau,
                               "propensity": truth.propensity})
    return 0


def _cmd_aggregate(args) -> int:
    raw = Path(args.input) / "raw_scores.csv"
    if not raw.exists():
        raise FileNotFoundError(f"{raw} not found")
    write_long_summary(args.out, aggregate(selections_from_raw(raw)))
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="itesel", description=__doc__)
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="run the benchmark")
    r.add_argument("--config", help="JSON file with ExperimentConfig fields")
    r.add_argument("--scenarios", type=parse_ids)
    r.add_argument("--replications", type=int)
    r.add_argument("--seed", type=int)
    r.add_argument("--out")
    r.add_argument("--jobs", type=int)
    r.add_argument("--full-scale", action="store_true",
                   help="100 replications with 1000/1000/1000 splits")
    r.set_defaults(fn=_cmd_run)

    d = sub.add_parser("dump-scenario", help="write sampled data and ground truth to CSV")
    d.add_argument("--id", type=int, required=True)
    d.add_argument("--n", type=int, required=True)
    d.add_argument("--seed", type=int, required=True)
    d.add_argument("--out", required=True)
    d.set_defaults(fn=_cmd_dump)

    a = sub.add_parser("aggregate", help="recompute the summary from raw_scores.csv")
    a.add_argument("--in", dest="input", required=True)
    a.add_argument("--out", required=True)
    a.set_defaults(fn=_cmd_aggregate)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.fn(args)
    except (ValueError, OSError) as exc:
        print(f"itesel: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
