"""Command-line entry point: ``jcrdt run`` and ``jcrdt check``."""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path
from typing import Sequence

from .core import dumps_canonical
from .errors import ExpectationFailed, JCRDTError, ScriptError, ScriptSyntaxError
from .harness import (
    DEFAULT_EXTENSION_LIMIT, check_convergence, check_pairwise_commutativity, gen_execution,
)
from .interp import parse_script, run_script
from .netsim import DeliveryPolicy, Simulation

EXIT_OK, EXIT_MISMATCH, EXIT_SCRIPT_ERROR = 0, 1, 2


def _seed_range(text: str) -> range:
    lo, sep, hi = text.partition("..")
    try:
        a, b = int(lo), int(hi) if sep else int(lo)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected A..B, got {text!r}") from None
    if b < a:
        raise argparse.ArgumentTypeError("empty seed range")
    return range(a, b + 1)


def _policy(text: str) -> DeliveryPolicy:
    try:
        return DeliveryPolicy.parse(text)
    except (ValueError, TypeError) as e:
        raise argparse.ArgumentTypeError(str(e)) from None


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="jcrdt", description="Replicated JSON document toolkit.")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="execute a script and print the renders")
    run.add_argument("script", type=Path)
    run.add_argument("--seed", type=int, default=0)
    run.add_argument("--policy", type=_policy, default=DeliveryPolicy(),
                     help="network abuse, e.g. reorder=0.5,dup=3")
    run.add_argument("--dump-state", action="store_true", help="also print the raw internal state")
    run.add_argument("--trace", type=Path, help="write the step trace to this file")

    chk = sub.add_parser("check", help="brute-force convergence check over seeded executions")
    chk.add_argument("--seed-range", type=_seed_range, default=range(0, 100),
                     help="inclusive range A..B (default 0..99)")
    chk.add_argument("--replicas", type=int, default=3)
    chk.add_argument("--ops", type=int, default=8)
    chk.add_argument("--sync-probability", type=float, default=0.3)
    chk.add_argument("--limit", type=int, default=DEFAULT_EXTENSION_LIMIT,
                     help="enumerate all orders up to this many, else sample")
    chk.add_argument("--out", type=Path, default=Path("failing-traces"),
                     help="directory for failing traces")
    return ap


def cmd_run(args: argparse.Namespace) -> int:
    try:
        text = args.script.read_text(encoding="utf-8")
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_SCRIPT_ERROR
    sim = Simulation(seed=args.seed, policy=args.policy)
    status = EXIT_OK
    try:
        result = run_script(parse_script(text), sim=sim)
        for line in result.output:
            print(line)
        for rid, rendered in result.renders.items():
            print(f"{rid} = {rendered}")
    except ExpectationFailed as e:
        print(f"expect failed: {e}", file=sys.stderr)
        status = EXIT_MISMATCH
    except (ScriptSyntaxError, ScriptError) as e:
        print(f"{args.script}: {e}", file=sys.stderr)
        status = EXIT_SCRIPT_ERROR
    if args.dump_state:
        from .state import dump_state
        for rid in sorted(sim.replicas):
            print(f"--- state {rid}")
            print(dump_state(sim.replicas[rid].document))
    if args.trace is not None:
        args.trace.write_text("".join(line + "\n" for line in sim.trace), encoding="utf-8")
    return status


def cmd_check(args: argparse.Namespace) -> int:
    print(f"{'seed':>6} {'ops':>4} {'orders':>7} {'pairs':>6}  result")
    failures = 0
    for seed in args.seed_range:
        trace = gen_execution(seed, replicas=args.replicas, ops=args.ops,
                              sync_probability=args.sync_probability)
        conv = check_convergence(trace, limit=args.limit, seed=seed)
        comm = check_pairwise_commutativity(trace)
        ok = conv.passed and comm.passed
        tag = "pass" if ok else "FAIL"
        if conv.sampled:
            tag += " (sampled)"
        print(f"{seed:>6} {len(trace):>4} {conv.histories:>7} {comm.pairs:>6}  {tag}")
        if not ok:
            failures += 1
            args.out.mkdir(parents=True, exist_ok=True)
            path = args.out / f"seed-{seed}.json"
            path.write_text(dumps_canonical(trace.to_json()) + "\n", encoding="utf-8")
            for line in (conv.error, *conv.diff, *comm.diff):
                if line:
                    print(f"       {line}")
            print(f"       trace written to {path}")
    total = len(args.seed_range)
    print(f"{total - failures}/{total} passed")
    return EXIT_OK if failures == 0 else EXIT_MISMATCH


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "run":
            return cmd_run(args)
        return cmd_check(args)
    except JCRDTError as e:  # anything the script handling above did not anticipate
        print(f"error: {e}", file=sys.stderr)
        return EXIT_SCRIPT_ERROR


if __name__ == "__main__":
    sys.exit(main())
