"""Convergence checking by brute force.

``gen_execution`` drives a seeded simulation with random programs that are
valid by construction (indices drawn within live bounds, variables drawn from
the bound set). The resulting operations and their causal order are then
replayed in every causally consistent order (``linear_extensions``), and
``check_convergence`` demands one identical document at the end of all of
them. ``check_pairwise_commutativity`` is the finer-grained check: at every
reachable causal prefix, every pair of enabled operations must commute.

Each replay also asserts two list invariants as it goes: element order is never
rearranged once observed, and every inserted element stays strictly inside
the interval it was inserted into at its origin.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Callable, Iterator, Sequence

from .apply import apply_op
from .core import (
    DOC, EMPTY_LIST, EMPTY_MAP, HEAD, TAIL, Insert, Key, Operation, ReplicaId, Tag, TaggedKey,
    Timestamp, operation_to_json,
)
from .errors import TooManyExtensions
from .evaluate import Doc, Expr, Get, Idx, Var, format_expr
from .netsim import ApplyAt, DeliveryPolicy, SendFrom, Simulation, Transfer
from .replica import AssignCmd, Command, DeleteCmd, InsertAfter, Let, ReplicaState
from .rng import XorShift64Star
from .state import (
    ListNode, MapNode, Node, appears_after_preserved, check_chains, list_orders,
    state_diff, state_equal,
)

MAP_KEYS = ("a", "b", "c", "d")
PRIMITIVES = (0, 1, 2, 7, -3, 2.5, "x", "y", "z", "", True, False, None)
DEFAULT_EXTENSION_LIMIT = 40320  # 8!


# -- random valid programs ------------------------------------------------------


@dataclass(frozen=True)
class Position:
    """A cursor expression together with what it may be used for."""
    expr: Expr
    kind: str  # "entry" (map key), "elem" (list element) or "head"
    list_expr: Expr | None = None


def positions(replica: ReplicaState, depth: int = 3) -> list[Position]:
    """Every cursor expression reachable by get/idx over the live document."""
    out: list[Position] = []
    _expand(replica.document, DOC, Doc(), out, depth, root=True)
    return out


def _expand(parent: MapNode, key: Key, expr: Expr, out: list[Position], depth: int,
            root: bool = False) -> None:
    if depth == 0:
        return
    m = parent.children.get(TaggedKey(Tag.MAP, key))
    live = sorted(m.pres) if isinstance(m, MapNode) and not isinstance(m, ListNode) else []
    # fresh keys are always addressable: get() has no existence premise
    for k in sorted(set(live) | set(MAP_KEYS if root or m is not None else ())):
        e = Get(expr, k)  # type: ignore[arg-type]
        out.append(Position(e, "entry"))
        if m is not None:
            _expand(m, k, e, out, depth - 1)
    lst = parent.children.get(TaggedKey(Tag.LIST, key))
    if isinstance(lst, ListNode):
        out.append(Position(Idx(expr, 0), "head", expr))
        for i, k in enumerate(lst.live_elements(), 1):
            e = Idx(expr, i)
            out.append(Position(e, "elem", expr))
            _expand(lst, k, e, out, depth - 1)


def random_value(rng: XorShift64Star, containers: float = 0.25):
    if rng.chance(containers):
        return EMPTY_LIST if rng.chance(0.7) else EMPTY_MAP
    return rng.choice(PRIMITIVES)


def command_for(pos: Position, rng: XorShift64Star, kind: str | None = None) -> Command:
    """A random mutating command at ``pos``; ``kind`` forces insert/delete/assign."""
    if kind is None:
        kind = {"head": ("insert",),
                "elem": ("insert", "insert", "assign", "delete"),
                "entry": ("assign", "assign", "assign", "delete")}[pos.kind]
        kind = rng.choice(kind)
    if kind == "insert":
        return InsertAfter(pos.expr, random_value(rng, 0.2))  # type: ignore[arg-type]
    if kind == "delete":
        return DeleteCmd(pos.expr)  # type: ignore[arg-type]
    return AssignCmd(pos.expr, random_value(rng, 0.3))  # type: ignore[arg-type]


_KIND_OK = {"insert": ("head", "elem"), "delete": ("entry", "elem"), "assign": ("entry", "elem")}


def random_command(replica: ReplicaState, rng: XorShift64Star, kind: str | None = None,
                   var_kinds: dict[str, Position] | None = None,
                   candidates: Sequence[Position] | None = None) -> Command:
    """A command that cannot get stuck against ``replica``'s current state.

    With ``var_kinds`` the generator also binds variables and reuses them later,
    so some commands act through stale cursors.
    """
    pool = list(candidates) if candidates is not None else positions(replica)
    if kind is not None:
        pool = [p for p in pool if p.kind in _KIND_OK[kind]]
    if var_kinds is not None:
        usable = [(n, p) for n, p in sorted(var_kinds.items(), key=lambda kv: kv[0])
                  if kind is None or p.kind in _KIND_OK[kind]]
        if usable and rng.chance(0.2):
            name, pos = rng.choice(usable)
            return command_for(Position(Var(name), pos.kind, pos.list_expr), rng, kind)
        if pool and rng.chance(0.1):
            pos = rng.choice(pool)
            name = f"v{len(var_kinds)}"
            var_kinds[name] = pos
            return Let(name, pos.expr)  # type: ignore[arg-type]
    if not pool:
        raise ValueError(f"no position admits a {kind} here")
    # pick the position kind first so that list work is not swamped by map keys
    groups = sorted({p.kind for p in pool})
    group = rng.choice(groups)
    return command_for(rng.choice([p for p in pool if p.kind == group]), rng, kind)


# -- execution traces ---------------------------------------------------------


@dataclass
class ExecutionTrace:
    ops: dict[Timestamp, Operation] = field(default_factory=dict)
    generated: dict[ReplicaId, list[Timestamp]] = field(default_factory=dict)
    # insert id -> (element before it, element after it) at its origin
    intervals: dict[Timestamp, tuple[Key, Key]] = field(default_factory=dict)
    commands: list[tuple[ReplicaId, str]] = field(default_factory=list)
    sim: Simulation | None = None

    def __len__(self) -> int:
        return len(self.ops)

    def concurrent(self, a: Timestamp, b: Timestamp) -> bool:
        return a != b and a not in self.ops[b].deps and b not in self.ops[a].deps

    def restricted(self, ids: set[Timestamp]) -> ExecutionTrace:
        return ExecutionTrace(
            ops={t: o for t, o in self.ops.items() if t in ids},
            generated={r: [t for t in ts if t in ids] for r, ts in self.generated.items()},
            intervals={t: iv for t, iv in self.intervals.items() if t in ids},
        )

    def to_json(self) -> list:
        return [operation_to_json(self.ops[t]) for t in sorted(self.ops)]


def _insert_interval(replica: ReplicaState, op: Operation) -> tuple[Key, Key]:
    node: Node = replica.document
    for tk in op.cur.path:
        node = node.children[tk]  # type: ignore[union-attr]
    assert isinstance(node, ListNode)
    return op.cur.key, node.next[op.id]


def gen_execution(seed: int, replicas: int = 3, ops: int = 8, sync_probability: float = 0.3,
                  max_attempts: int | None = None) -> ExecutionTrace:
    """A random valid execution with exactly ``ops`` operations (fewer only if stuck)."""
    ids = [chr(ord("p") + i) for i in range(replicas)]
    sim = Simulation.with_replicas(ids, seed=seed)
    rng = XorShift64Star(seed ^ 0x5EED)
    trace = ExecutionTrace(generated={r: [] for r in ids}, sim=sim)
    var_kinds: dict[ReplicaId, dict[str, Position]] = {r: {} for r in ids}
    attempts = 0
    limit = max_attempts if max_attempts is not None else 20 * ops + 20
    while len(trace.ops) < ops and attempts < limit:
        attempts += 1
        rid = rng.choice(ids)
        if len(ids) > 1 and rng.chance(sync_probability):
            src = rng.choice([r for r in ids if r != rid])
            sim.step(SendFrom(src))
            sim.step(Transfer(src, rid))
            sim.step(ApplyAt(rid))
            continue
        r = sim[rid]
        cmd = random_command(r, rng, var_kinds=var_kinds[rid])
        before = len(r.queue)
        sim.execute(rid, cmd)
        trace.commands.append((rid, _fmt(cmd)))
        for op in r.queue[before:]:
            trace.ops[op.id] = op
            trace.generated[rid].append(op.id)
            if isinstance(op.mut, Insert):
                trace.intervals[op.id] = _insert_interval(r, op)
    return trace


def _fmt(cmd: Command) -> str:
    from .replica import format_command
    return format_command(cmd)


# -- linear extensions -----------------------------------------------------------


def count_linear_extensions(trace: ExecutionTrace) -> int:
    ids = sorted(trace.ops)
    index = {t: i for i, t in enumerate(ids)}
    need = [sum(1 << index[d] for d in trace.ops[t].deps if d in index) for t in ids]
    memo = {0: 1}
    full = (1 << len(ids)) - 1

    # iterate downsets in order of size; only reachable masks get entries
    frontier = {0}
    for _ in range(len(ids)):
        nxt: set[int] = set()
        for mask in frontier:
            for i in range(len(ids)):
                bit = 1 << i
                if not mask & bit and need[i] & mask == need[i]:
                    m2 = mask | bit
                    memo[m2] = memo.get(m2, 0) + memo[mask]
                    nxt.add(m2)
        frontier = nxt
    return memo.get(full, 1 if not ids else 0)


def linear_extensions(trace: ExecutionTrace, limit: int = DEFAULT_EXTENSION_LIMIT) -> Iterator[tuple[Timestamp, ...]]:
    """Every total order of the trace's ops that respects deps, smallest ids first."""
    if count_linear_extensions(trace) > limit:
        raise TooManyExtensions(f"more than {limit} causal orders")
    ops = trace.ops

    def rec(prefix: list[Timestamp], done: set[Timestamp]) -> Iterator[tuple[Timestamp, ...]]:
        ready = [t for t in sorted(ops) if t not in done and ops[t].deps <= done]
        if not ready:
            yield tuple(prefix)
            return
        for t in ready:
            prefix.append(t)
            done.add(t)
            yield from rec(prefix, done)
            done.remove(t)
            prefix.pop()

    yield from rec([], set())


def random_extension(trace: ExecutionTrace, rng: XorShift64Star) -> tuple[Timestamp, ...]:
    done: set[Timestamp] = set()
    out = []
    while len(out) < len(trace.ops):
        ready = [t for t in sorted(trace.ops) if t not in done and trace.ops[t].deps <= done]
        t = rng.choice(ready)
        out.append(t)
        done.add(t)
    return tuple(out)


# -- replay with invariant checks -----------------------------------------------------


class InvariantViolation(AssertionError):
    pass


def _position(order: list[Key], k: Key) -> int:
    if k is HEAD:
        return -1
    if k is TAIL:
        return len(order)
    return order.index(k)


def _check_interval(root: MapNode, op: Operation, interval: tuple[Key, Key]) -> None:
    node: Node = root
    for tk in op.cur.path:
        node = node.children[tk]  # type: ignore[union-attr]
    order = list(node.chain())  # type: ignore[union-attr]
    before, after = interval
    here = _position(order, op.id)
    if not _position(order, before) < here < _position(order, after):
        raise InvariantViolation(f"{op.id} left its insertion interval ({before}, {after})")


def apply_checked(root: MapNode, op: Operation, trace: ExecutionTrace,
                  inserted: list[Timestamp] | None = None) -> None:
    """Apply one op and assert the list invariants on the result."""
    before = list_orders(root)
    apply_op(root, op)
    check_chains(root)
    if not appears_after_preserved(before, list_orders(root)):
        raise InvariantViolation(f"applying {op.id} reordered existing list elements")
    if inserted is not None:
        if op.id in trace.intervals:
            inserted.append(op.id)
        for t in inserted:
            _check_interval(root, trace.ops[t], trace.intervals[t])


def replay(trace: ExecutionTrace, history: Sequence[Timestamp], check: bool = True) -> MapNode:
    root = MapNode()
    inserted: list[Timestamp] = []
    for t in history:
        if check:
            apply_checked(root, trace.ops[t], trace, inserted)
        else:
            apply_op(root, trace.ops[t])
    return root


# -- verdicts --------------------------------------------------------------------


@dataclass
class ConvergenceVerdict:
    passed: bool
    histories: int
    sampled: bool = False
    failing: tuple[tuple[Timestamp, ...], tuple[Timestamp, ...]] | None = None
    diff: list[str] = field(default_factory=list)
    error: str | None = None

    def __bool__(self) -> bool:
        return self.passed


def _first_divergence(trace: ExecutionTrace, histories: Iterator[tuple[Timestamp, ...]] | list,
                      check: bool) -> tuple[int, tuple | None, str | None, list[str]]:
    """Replay histories with a shared-prefix walk; stop at the first disagreement."""
    reference: MapNode | None = None
    ref_hist: tuple = ()
    count = 0
    for hist in histories:
        count += 1
        try:
            state = replay(trace, hist, check)
        except InvariantViolation as e:
            return count, (hist, hist), str(e), []
        if reference is None:
            reference, ref_hist = state, hist
        elif not state_equal(reference, state):
            return count, (ref_hist, hist), None, state_diff(reference, state)
    return count, None, None, []


def _tree_walk_check(trace: ExecutionTrace, check: bool) -> tuple[int, tuple | None, str | None, list[str]]:
    """All linear extensions, sharing work between histories with a common prefix."""
    ops = trace.ops
    order = sorted(ops)
    result: dict = {"count": 0, "ref": None, "ref_hist": None}

    def rec(prefix: list[Timestamp], done: set[Timestamp], root: MapNode, inserted: list[Timestamp]):
        ready = [t for t in order if t not in done and ops[t].deps <= done]
        if not ready:
            result["count"] += 1
            if result["ref"] is None:
                result["ref"], result["ref_hist"] = root, tuple(prefix)
            elif not state_equal(result["ref"], root):
                return (result["ref_hist"], tuple(prefix)), None, state_diff(result["ref"], root)
            return None
        for i, t in enumerate(ready):
            branch = root if i == len(ready) - 1 else root.copy()
            ins = list(inserted)
            prefix.append(t)
            try:
                if check:
                    apply_checked(branch, ops[t], trace, ins)
                else:
                    apply_op(branch, ops[t])
            except InvariantViolation as e:
                return (tuple(prefix), tuple(prefix)), str(e), []
            done.add(t)
            found = rec(prefix, done, branch, ins)
            done.remove(t)
            prefix.pop()
            if found:
                return found
        return None

    found = rec([], set(), MapNode(), [])
    if found:
        hists, err, diff = found
        return result["count"], hists, err, diff
    return result["count"], None, None, []


def check_convergence(trace: ExecutionTrace, limit: int = DEFAULT_EXTENSION_LIMIT,
                      samples: int = 200, seed: int = 0, check_invariants: bool = True,
                      shrink: bool = True) -> ConvergenceVerdict:
    """Replay every causal order of the trace and require a single end state.

    Above ``limit`` orders, ``samples`` seeded random orders are replayed
    instead. A failing verdict is shrunk to a minimal causally closed subset
    that still diverges.
    """
    total = count_linear_extensions(trace)
    sampled = total > limit
    if sampled:
        rng = XorShift64Star(seed)
        hists = [random_extension(trace, rng) for _ in range(samples)]
        count, failing, err, diff = _first_divergence(trace, hists, check_invariants)
    else:
        count, failing, err, diff = _tree_walk_check(trace, check_invariants)
    if failing is None:
        return ConvergenceVerdict(True, count, sampled)
    if shrink and err is None:
        small = shrink_divergence(trace)
        if len(small) < len(trace):
            return check_convergence(small, limit, samples, seed, check_invariants, shrink=False)
    return ConvergenceVerdict(False, count, sampled, failing, diff, err)


def _diverges(trace: ExecutionTrace) -> bool:
    if count_linear_extensions(trace) > DEFAULT_EXTENSION_LIMIT:
        return False
    return _tree_walk_check(trace, check=False)[1] is not None


def shrink_divergence(trace: ExecutionTrace, diverges: Callable[[ExecutionTrace], bool] = _diverges) -> ExecutionTrace:
    """Drop causally maximal ops one at a time while the divergence persists."""
    current = trace
    changed = True
    while changed:
        changed = False
        needed = {d for o in current.ops.values() for d in o.deps}
        for t in sorted(current.ops, reverse=True):
            if t in needed:
                continue
            candidate = current.restricted(set(current.ops) - {t})
            if diverges(candidate):
                current = candidate
                changed = True
                break
    return current


# -- pairwise commutativity ---------------------------------------------------------


@dataclass
class CommutativityVerdict:
    passed: bool
    pairs: int
    skipped: int
    failing: tuple[frozenset, Timestamp, Timestamp] | None = None
    diff: list[str] = field(default_factory=list)

    def __bool__(self) -> bool:
        return self.passed


def _apply_copy(root: MapNode, *ops: Operation) -> MapNode:
    new = root.copy()
    for op in ops:
        apply_op(new, op)
    return new


def ops_commute(base: MapNode, a: Operation, b: Operation) -> tuple[bool, list[str]]:
    ab = _apply_copy(base, a, b)
    ba = _apply_copy(base, b, a)
    if state_equal(ab, ba):
        return True, []
    return False, state_diff(ab, ba)


def check_pairwise_commutativity(trace: ExecutionTrace) -> CommutativityVerdict:
    """At every reachable causal prefix, every two enabled ops must commute."""
    ops = trace.ops
    order = sorted(ops)
    skipped = sum(1 for a, b in itertools.combinations(order, 2) if not trace.concurrent(a, b))
    states: dict[frozenset, MapNode] = {frozenset(): MapNode()}
    layer = [frozenset()]
    pairs = 0
    while layer:
        nxt: dict[frozenset, MapNode] = {}
        for done in layer:
            root = states[done]
            enabled = [t for t in order if t not in done and ops[t].deps <= done]
            for a, b in itertools.combinations(enabled, 2):
                pairs += 1
                ok, diff = ops_commute(root, ops[a], ops[b])
                if not ok:
                    return CommutativityVerdict(False, pairs, skipped, (done, a, b), diff)
            for t in enabled:
                key = done | {t}
                if key not in nxt:
                    nxt[key] = _apply_copy(root, ops[t])
        states = nxt
        layer = list(nxt)
    return CommutativityVerdict(True, pairs, skipped)


# -- random concurrent pairs -------------------------------------------------------------

PAIR_CLASSES = ("insert/insert", "delete/any", "assign/any")


@dataclass
class ConcurrentPair:
    base: MapNode
    a: Operation
    b: Operation
    commands: tuple[str, ...]


def _has_list(replica: ReplicaState) -> bool:
    return any(p.kind == "head" for p in positions(replica))


def _shared_lists(p: ReplicaState, q: ReplicaState) -> set:
    heads = lambda r: {x.list_expr for x in positions(r) if x.kind == "head"}  # noqa: E731
    return heads(p) & heads(q)


def random_concurrent_pair(seed: int, pair_class: str) -> ConcurrentPair:
    """Two concurrent ops of the given class, generated from one shared state.

    The first op is made at a copy "p", the second at a copy "q"; half the time
    "q" makes an extra op first, which then belongs to the shared prefix.
    Targets overlap deliberately: the second op is drawn from inside the first
    op's target about half of the time.
    """
    if pair_class not in PAIR_CLASSES:
        raise ValueError(f"unknown pair class {pair_class!r}")
    rng = XorShift64Star(seed)
    origin = ReplicaState("o")
    cmds: list[str] = []
    for _ in range(rng.below(8)):
        cmd = random_command(origin, rng)
        origin.exec_command(cmd)
        cmds.append(_fmt(cmd))
    if pair_class == "insert/insert" and not _has_list(origin):
        key = rng.choice(MAP_KEYS)
        for text in (f'doc.get("{key}") := []', f'doc.get("{key}").idx(0).insertAfter("s")'):
            from .interp import parse_command
            origin.exec_command(parse_command(text))
            cmds.append(text)
    p, q = origin.copy("p"), origin.copy("q")
    if rng.chance(0.5):
        extra = random_command(q, rng)
        q.exec_command(extra)
        if pair_class == "insert/insert" and not _shared_lists(p, q):
            q = origin.copy("q")  # the extra op removed every list; drop it
        else:
            cmds.append("q: " + _fmt(extra))
    first_kind, second_kind = {
        "insert/insert": ("insert", "insert"),
        "delete/any": ("delete", None),
        "assign/any": ("assign", None),
    }[pair_class]
    p_pos = [x for x in positions(p) if x.kind in _KIND_OK[first_kind]]
    if pair_class == "insert/insert":
        shared = _shared_lists(p, q)
        p_pos = [x for x in p_pos if x.list_expr in shared]
    pos_a = rng.choice(p_pos)
    cmd_a = command_for(pos_a, rng, first_kind)
    q_pos = positions(q)
    if pair_class == "insert/insert":
        same_list = [x for x in q_pos if x.kind in ("head", "elem") and x.list_expr == pos_a.list_expr]
        overlap = [x for x in same_list if x.expr == pos_a.expr]
        q_pos = overlap if overlap and rng.chance(0.5) else same_list
    else:
        prefix = format_expr(pos_a.expr)
        inside = [x for x in q_pos if format_expr(x.expr).startswith(prefix)]
        if inside and rng.chance(0.5):
            q_pos = inside
        if second_kind is None:
            second_kind = rng.choice(("insert", "delete", "assign"))
        q_pos = [x for x in q_pos if x.kind in _KIND_OK[second_kind]] or \
            [x for x in positions(q) if x.kind in _KIND_OK[second_kind]]
        if not q_pos:
            second_kind = rng.choice(("delete", "assign"))
            q_pos = [x for x in positions(q) if x.kind in _KIND_OK[second_kind]]
    cmd_b = command_for(rng.choice(q_pos), rng, second_kind)
    p.exec_command(cmd_a)
    q.exec_command(cmd_b)
    a, b = p.queue[-1], q.queue[-1]
    base = origin.document.copy()
    for op in q.queue[:-1]:
        apply_op(base, op)
    return ConcurrentPair(base, a, b, tuple(cmds) + ("p: " + _fmt(cmd_a), "q: " + _fmt(cmd_b)))


# -- adversarial schedules --------------------------------------------------------------


def adversarial_run(seed: int, replicas: int = 3, rounds: int = 12, steps_per_round: int = 6,
                    policy: DeliveryPolicy | None = None) -> Simulation:
    """Random local edits interleaved with abusive network steps, ending in a full sync."""
    ids = [chr(ord("p") + i) for i in range(replicas)]
    sim = Simulation.with_replicas(ids, seed=seed, policy=policy or DeliveryPolicy(reorder=0.5, dup=3))
    rng = XorShift64Star(seed ^ 0xAD5E)
    var_kinds: dict[ReplicaId, dict[str, Position]] = {r: {} for r in ids}
    for _ in range(rounds):
        rid = rng.choice(ids)
        sim.execute(rid, random_command(sim[rid], rng, var_kinds=var_kinds[rid]))
        sim.run_random(steps_per_round)
    sim.sync_all()
    return sim


# -- traces from scripted runs, and network spot checks ---------------------------------


def trace_from_simulation(sim: Simulation) -> ExecutionTrace:
    """Collect every locally generated op of a finished simulation."""
    trace = ExecutionTrace(generated={}, sim=sim)
    for rid in sorted(sim.replicas):
        r = sim.replicas[rid]
        trace.generated[rid] = [op.id for op in r.queue]
        for op in r.queue:
            trace.ops[op.id] = op
    # intervals are recomputed from the generating replica's own history
    for rid, ids in trace.generated.items():
        own = set(ids)
        root = MapNode()
        for t in sim.replicas[rid].history:
            op = trace.ops[t]
            apply_op(root, op)
            if t in own and isinstance(op.mut, Insert):
                node: Node = root
                for tk in op.cur.path:
                    node = node.children[tk]  # type: ignore[union-attr]
                trace.intervals[t] = (op.cur.key, node.next[t])  # type: ignore[union-attr]
    return trace


def network_schedule_state(trace: ExecutionTrace, seed: int) -> MapNode:
    """Deliver the trace to a fresh replica in random chunks and random order."""
    rng = XorShift64Star(seed)
    sink = ReplicaState("~sink")
    pending = [trace.ops[t] for t in sorted(trace.ops)]
    rng.shuffle(pending)
    while pending:
        n = 1 + rng.below(len(pending))
        batch, pending = pending[:n], pending[n:]
        for _ in range(1 + rng.below(3)):
            sink.yield_recv(batch)
        if rng.chance(0.7):
            sink.apply_remote_ready()
    sink.apply_remote_ready()
    if sink.ops != set(trace.ops):
        raise AssertionError("network replay left ops undelivered")
    return sink.document


def check_schedules(trace: ExecutionTrace, schedules: int = 100, seed: int = 0) -> bool:
    """Spot check: random delivery schedules all reach the replayed end state."""
    # timestamp order is always causal: every dep carries a smaller counter
    reference = replay(trace, sorted(trace.ops), check=False)
    return all(state_equal(reference, network_schedule_state(trace, seed * 1_000_003 + i))
               for i in range(schedules))

