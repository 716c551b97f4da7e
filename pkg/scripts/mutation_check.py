"""Show that the convergence checker notices broken merge rules.

    python3 scripts/mutation_check.py [--seeds 200]

Each mutant replaces one rule with a plausible-looking wrong version. A
useful checker should flag every mutant that actually breaks convergence;
the "no-op delete" mutant is included as a control, since a delete that does
nothing is wrong but still converges.
"""

from __future__ import annotations

import argparse
import sys

import jcrdt.apply as A
from jcrdt.core import Tag, TaggedKey
from jcrdt.harness import (
    PAIR_CLASSES, check_convergence, gen_execution, ops_commute, random_concurrent_pair,
)
from jcrdt.state import RegNode, presence, set_presence


def insert_without_skip(node, prev, op_id, deps, val):
    nxt = node.next[prev]
    node.next[prev], node.next[op_id] = op_id, nxt
    A.apply_assign(node, op_id, op_id, deps, val)
    return node


def delete_wins(node, deps, k):
    survivors = set()
    for tag in (Tag.MAP, Tag.LIST, Tag.REG):
        child = node.children.get(TaggedKey(tag, k))
        if isinstance(child, RegNode):
            child.writes = {}
        elif child is not None:
            survivors |= A.clear(node, deps, TaggedKey(tag, k))
    pres = (survivors | presence(node, k)) - deps
    set_presence(node, k, pres)
    return pres


def noop_delete(node, deps, k):
    return ORIGINAL["clear_elem"](node, frozenset(), k)


ORIGINAL = {name: getattr(A, name) for name in ("apply_insert", "clear_elem")}

MUTANTS = {
    "insert ignores concurrent siblings": ("apply_insert", insert_without_skip),
    "delete discards concurrent writes": ("clear_elem", delete_wins),
    "delete does nothing (control)": ("clear_elem", noop_delete),
}


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--seeds", type=int, default=200)
    args = ap.parse_args()
    print(f"{'mutant':<38} {'executions':>10} {'pairs':>7}")
    for label, (attr, fn) in MUTANTS.items():
        setattr(A, attr, fn)
        try:
            runs = sum(not check_convergence(gen_execution(s), shrink=False) for s in range(args.seeds))
            pairs = sum(not ops_commute(p.base, p.a, p.b)[0]
                        for c in PAIR_CLASSES for p in (random_concurrent_pair(s, c) for s in range(args.seeds)))
        finally:
            setattr(A, attr, ORIGINAL[attr])
        print(f"{label:<38} {runs:>10} {pairs:>7}")
    print(f"(counts are failures caught out of {args.seeds} executions and "
          f"{args.seeds * len(PAIR_CLASSES)} concurrent pairs)")
    return 0


if __name__ == "__main__":
    sys.exit(main())
