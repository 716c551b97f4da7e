"""Seeded network simulation.

The nondeterministic ``yield`` is split into its rule instances: a replica
copies its queue to its send buffer (``SendFrom``), a replica pulls another's
send buffer into its receive buffer (``Transfer``), or a replica applies
whatever buffered operations have their dependencies met (``ApplyAt``).
A seeded scheduler picks among them.

Every action appends one line to ``Simulation.trace``::

    STEP <n> <action> | <canonical op encodings as a JSON array>

The ``| ...`` part is omitted when the action moved no operations.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Iterable, Union

from .core import Operation, ReplicaId, operation_to_json
from .errors import SyncDidNotConverge, UnknownReplica
from .replica import Command, ReplicaState, flatten
from .rng import XorShift64Star
from .state import dumps_canonical_ordered

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class SendFrom:
    replica: ReplicaId

    def __str__(self) -> str:
        return f"send {self.replica}"


@dataclass(frozen=True)
class Transfer:
    source: ReplicaId
    dest: ReplicaId

    def __str__(self) -> str:
        return f"transfer {self.source}->{self.dest}"


@dataclass(frozen=True)
class ApplyAt:
    replica: ReplicaId

    def __str__(self) -> str:
        return f"apply {self.replica}"


@dataclass(frozen=True)
class NoOp:
    def __str__(self) -> str:
        return "noop"


YieldAction = Union[SendFrom, Transfer, ApplyAt, NoOp]


def _flag(text: str) -> bool:
    if text not in ("0", "1", "true", "false"):
        raise ValueError(f"expected a boolean, got {text!r}")
    return text in ("1", "true")


@dataclass
class DeliveryPolicy:
    """How the scheduler abuses the network.

    ``reorder`` is the probability that a transfer delivers only a random
    subset of the sender's buffer, so later operations can overtake earlier
    ones. ``dup`` is how many times each transferred batch is delivered.
    ``relay`` makes a send forward received operations as well as local ones.
    """

    reorder: float = 0.0
    dup: int = 1
    relay: bool = False
    send_weight: float = 1.0
    transfer_weight: float = 1.0
    apply_weight: float = 1.0
    noop_weight: float = 0.1

    def __post_init__(self) -> None:
        if not 0.0 <= self.reorder <= 1.0:
            raise ValueError("reorder must be a probability")
        if self.dup < 1:
            raise ValueError("dup must be at least 1")

    @classmethod
    def parse(cls, text: str) -> DeliveryPolicy:
        """Parse ``reorder=0.5,dup=3`` style overrides."""
        names = {"reorder": float, "dup": int, "relay": _flag, "send": float,
                 "transfer": float, "apply": float, "noop": float}
        kwargs: dict = {}
        for part in filter(None, (p.strip() for p in text.split(","))):
            name, sep, raw = part.partition("=")
            name = name.strip()
            if not sep or name not in names:
                raise ValueError(f"bad policy item {part!r}")
            attr = name if name in ("reorder", "dup", "relay") else f"{name}_weight"
            kwargs[attr] = names[name](raw)
        return cls(**kwargs)


@dataclass
class Simulation:
    seed: int = 0
    policy: DeliveryPolicy = field(default_factory=DeliveryPolicy)
    replicas: dict[ReplicaId, ReplicaState] = field(default_factory=dict)
    trace: list[str] = field(default_factory=list)

    def __post_init__(self) -> None:
        self.rng = XorShift64Star(self.seed)
        self.steps = 0

    @classmethod
    def with_replicas(cls, ids: Iterable[ReplicaId], seed: int = 0,
                      policy: DeliveryPolicy | None = None) -> Simulation:
        sim = cls(seed=seed, policy=policy or DeliveryPolicy())
        for r in ids:
            sim.add_replica(r)
        return sim

    def add_replica(self, rid: ReplicaId) -> ReplicaState:
        if rid not in self.replicas:
            self.replicas[rid] = ReplicaState(rid, on_yield=self._yield_hook)
        return self.replicas[rid]

    def __getitem__(self, rid: ReplicaId) -> ReplicaState:
        try:
            return self.replicas[rid]
        except KeyError:
            raise UnknownReplica(rid) from None

    def _log(self, head: str, ops: list[Operation] | None = None) -> None:
        line = head
        if ops:
            line += " | " + dumps_canonical_ordered([operation_to_json(o) for o in ops])
        self.trace.append(line)

    # -- local work ----------------------------------------------------------

    def execute(self, rid: ReplicaId, cmd: Command):
        """Run a command at one replica, logging the operations it generates."""
        r = self[rid]
        result = None
        for part in flatten(cmd):
            before = len(r.queue)
            result = r.exec_command(part)
            for op in r.queue[before:]:
                self._log(f"LOCAL {rid}", [op])
        return result

    def _yield_hook(self, replica: ReplicaState) -> None:
        self.run_random(1, at=replica.id)

    # -- yield rules -----------------------------------------------------------

    def step(self, action: YieldAction) -> list[Operation]:
        self.steps += 1
        moved: list[Operation] = []
        if isinstance(action, SendFrom):
            moved = self[action.replica].yield_send(forward=self.policy.relay)
        elif isinstance(action, Transfer):
            src, dst = self[action.source], self[action.dest]
            moved = list(src.send.values())
            for _ in range(self.policy.dup):
                dst.yield_recv(moved)
        elif isinstance(action, ApplyAt):
            moved = self[action.replica].apply_remote_ready()
        elif not isinstance(action, NoOp):
            raise TypeError(f"not a yield action: {action!r}")
        self._log(f"STEP {self.steps} {action}", moved)
        return moved

    def _transfer_subset(self, source: ReplicaId, dest: ReplicaId) -> list[Operation]:
        """A transfer that may drop part of the batch (it can be resent later)."""
        self.steps += 1
        src, dst = self[source], self[dest]
        batch = list(src.send.values())
        if batch and self.rng.chance(self.policy.reorder):
            batch = [op for op in batch if self.rng.chance(0.5)]
            self.rng.shuffle(batch)
        for _ in range(self.policy.dup):
            dst.yield_recv(batch)
        self._log(f"STEP {self.steps} {Transfer(source, dest)}", batch)
        return batch

    def random_action(self, at: ReplicaId | None = None) -> YieldAction:
        ids = sorted(self.replicas)
        p = self.policy
        kind = self.rng.weighted(
            ("send", "transfer", "apply", "noop"),
            (p.send_weight, p.transfer_weight if len(ids) > 1 else 0.0, p.apply_weight, p.noop_weight),
        )
        me = at if at is not None else self.rng.choice(ids)
        if kind == "send":
            return SendFrom(me)
        if kind == "apply":
            return ApplyAt(me)
        if kind == "transfer":
            others = [r for r in ids if r != me]
            peer = self.rng.choice(others)
            # a yielding replica pulls from a peer; a global step picks any link
            return Transfer(peer, me)
        return NoOp()

    def run_random(self, n_steps: int, at: ReplicaId | None = None) -> None:
        for _ in range(n_steps):
            action = self.random_action(at)
            if isinstance(action, Transfer):
                self._transfer_subset(action.source, action.dest)
            else:
                self.step(action)

    def sync_all(self) -> None:
        """Exchange everything until every replica has applied every operation."""
        ids = sorted(self.replicas)
        total = len({t for r in self.replicas.values() for t in r.ops} |
                    {t for r in self.replicas.values() for t in r.recv})
        bound = total * max(len(ids), 1) + 2
        for _ in range(bound):
            before = {r: len(self.replicas[r].ops) for r in ids}
            for r in ids:
                self.step(SendFrom(r))
            for src in ids:
                for dst in ids:
                    if src != dst:
                        self.step(Transfer(src, dst))
            for r in ids:
                self.step(ApplyAt(r))
            if all(len(self.replicas[r].ops) == before[r] for r in ids):
                break
        else:
            raise SyncDidNotConverge(f"no fixpoint after {bound} rounds")
        op_sets = {frozenset(self.replicas[r].ops) for r in ids}
        if len(op_sets) > 1:
            raise SyncDidNotConverge("replicas hold different op sets after sync")
        log.debug("sync_all settled after %d steps", self.steps)

    def renders(self) -> dict[ReplicaId, str]:
        return {r: self.replicas[r].render() for r in sorted(self.replicas)}
