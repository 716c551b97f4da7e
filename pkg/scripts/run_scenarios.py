"""Run every worked-example scenario and show each replica's final rendering.

    python3 scripts/run_scenarios.py [--seed N] [--policy reorder=0.5,dup=3]

The scenarios carry their own @expect lines, so a wrong rendering aborts with
the expected and actual JSON side by side.
"""

from __future__ import annotations

import argparse
import sys
import time
from pathlib import Path

from jcrdt.errors import JCRDTError
from jcrdt.interp import run_script
from jcrdt.netsim import DeliveryPolicy

SCENARIOS = Path(__file__).resolve().parent.parent / "scenarios"


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--policy", type=DeliveryPolicy.parse, default=DeliveryPolicy())
    args = ap.parse_args()
    failures = 0
    for path in sorted(SCENARIOS.glob("*.jcrdt")):
        start = time.perf_counter()
        try:
            res = run_script(path.read_text(encoding="utf-8"), seed=args.seed, policy=args.policy)
        except JCRDTError as e:
            failures += 1
            print(f"{path.stem:<22} FAIL  {e}")
            continue
        ms = (time.perf_counter() - start) * 1000
        renders = sorted(set(res.renders.values()))
        agreed = "agree" if len(renders) == 1 else "DIFFER"
        print(f"{path.stem:<22} ok    {ms:6.1f} ms  {len(res.renders)} replica(s) {agreed}")
        for rendered in renders:
            print(f"{'':<22}       {rendered}")
    return 1 if failures else 0


if __name__ == "__main__":
    sys.exit(main())
