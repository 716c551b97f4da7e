"""One replica: command execution, operation generation and causal delivery."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Callable, Iterable, Union

from .apply import apply_op
from .core import (
    EMPTY_LIST, EMPTY_MAP, HEAD, Assign, Cursor, Delete, Insert, Mutation, Operation,
    ReplicaId, Timestamp, check_value,
)
from .errors import HeadNotMutable
from .evaluate import CursorExpr, Expr, Keys, Values, evaluate, format_expr, resolve
from .state import MapNode, render_json


@dataclass(frozen=True)
class Let:
    name: str
    expr: CursorExpr


@dataclass(frozen=True)
class AssignCmd:
    target: CursorExpr
    value: object


@dataclass(frozen=True)
class InsertAfter:
    target: CursorExpr
    value: object


@dataclass(frozen=True)
class DeleteCmd:
    target: CursorExpr


@dataclass(frozen=True)
class Yield:
    pass


@dataclass(frozen=True)
class Query:
    """A bare ``.keys`` / ``.values`` expression; no effect on state."""
    expr: Expr


@dataclass(frozen=True)
class Seq:
    first: Command
    second: Command


Command = Union[Let, AssignCmd, InsertAfter, DeleteCmd, Yield, Query, Seq]


def format_value(v) -> str:
    if v is EMPTY_MAP:
        return "{}"
    if v is EMPTY_LIST:
        return "[]"
    return json.dumps(check_value(v), ensure_ascii=False, allow_nan=False)


def format_command(cmd: Command) -> str:
    if isinstance(cmd, Seq):
        return f"{format_command(cmd.first)}; {format_command(cmd.second)}"
    if isinstance(cmd, Let):
        return f"let {cmd.name} = {format_expr(cmd.expr)}"
    if isinstance(cmd, AssignCmd):
        return f"{format_expr(cmd.target)} := {format_value(cmd.value)}"
    if isinstance(cmd, InsertAfter):
        return f"{format_expr(cmd.target)}.insertAfter({format_value(cmd.value)})"
    if isinstance(cmd, DeleteCmd):
        return f"{format_expr(cmd.target)}.delete"
    if isinstance(cmd, Query):
        return format_expr(cmd.expr)
    return "yield"


def flatten(cmd: Command) -> list[Command]:
    if isinstance(cmd, Seq):
        return flatten(cmd.first) + flatten(cmd.second)
    return [cmd]


@dataclass(eq=False)
class ReplicaState:
    id: ReplicaId
    document: MapNode = field(default_factory=MapNode)
    vars: dict[str, Cursor] = field(default_factory=dict)
    ops: set[Timestamp] = field(default_factory=set)
    queue: list[Operation] = field(default_factory=list)
    send: dict[Timestamp, Operation] = field(default_factory=dict)
    recv: dict[Timestamp, Operation] = field(default_factory=dict)
    history: list[Timestamp] = field(default_factory=list)
    # called for ``yield``; without a network only the Send rule can fire
    on_yield: Callable[[ReplicaState], None] | None = None

    def exec_command(self, cmd: Command):
        """Run one command. Returns the query result for ``Query``, else None."""
        if isinstance(cmd, Seq):
            self.exec_command(cmd.first)
            return self.exec_command(cmd.second)
        if isinstance(cmd, Let):
            self.vars[cmd.name] = resolve(self, cmd.expr)
        elif isinstance(cmd, AssignCmd):
            self.make_op(self._target(cmd.target), Assign(check_value(cmd.value)))
        elif isinstance(cmd, InsertAfter):
            self.make_op(resolve(self, cmd.target), Insert(check_value(cmd.value)))
        elif isinstance(cmd, DeleteCmd):
            self.make_op(self._target(cmd.target), Delete())
        elif isinstance(cmd, Query):
            return evaluate(self, cmd.expr)
        elif isinstance(cmd, Yield):
            if self.on_yield is not None:
                self.on_yield(self)
            else:
                self.yield_send()
        else:
            raise TypeError(f"not a command: {cmd!r}")
        return None

    def _target(self, expr: CursorExpr) -> Cursor:
        cur = resolve(self, expr)
        if cur.key is HEAD:
            raise HeadNotMutable(f"{format_expr(expr)} names a list head")
        return cur

    def next_counter(self) -> int:
        return max((t.counter for t in self.ops), default=0) + 1

    def make_op(self, cur: Cursor, mut: Mutation) -> Operation:
        op = Operation(Timestamp(self.next_counter(), self.id), frozenset(self.ops), cur, mut)
        apply_op(self.document, op)
        self.queue.append(op)
        self._mark_applied(op)
        return op

    def _mark_applied(self, op: Operation) -> None:
        self.ops.add(op.id)
        self.history.append(op.id)

    def yield_send(self, forward: bool = False) -> list[Operation]:
        """Copy the queue into the send buffer; returns the newly added ops.

        With ``forward`` the received ops go out too, so a replica can relay
        traffic between peers that never talk directly.
        """
        source = self.queue + list(self.recv.values()) if forward else self.queue
        added = [op for op in source if op.id not in self.send]
        for op in added:
            self.send[op.id] = op
        return added

    def yield_recv(self, peer_send: Iterable[Operation]) -> list[Operation]:
        added = []
        for op in peer_send:
            if op.id not in self.recv:
                self.recv[op.id] = op
                added.append(op)
        return added

    def pending(self) -> list[Operation]:
        return [op for t, op in self.recv.items() if t not in self.ops]

    def apply_remote_ready(self) -> list[Operation]:
        """Apply buffered remote ops whose deps are met, smallest id first, to a fixpoint."""
        applied = []
        waiting = self.pending()
        while True:
            ready = [op for op in waiting if op.deps <= self.ops]
            if not ready:
                return applied
            op = min(ready, key=lambda o: o.id)
            apply_op(self.document, op)
            self._mark_applied(op)
            applied.append(op)
            waiting.remove(op)

    def render(self) -> str:
        return render_json(self.document)

    def copy(self, new_id: ReplicaId | None = None) -> ReplicaState:
        """Independent copy; with ``new_id`` it becomes a fresh replica sharing this history."""
        return ReplicaState(
            id=self.id if new_id is None else new_id,
            document=self.document.copy(),
            vars=dict(self.vars),
            ops=set(self.ops),
            queue=list(self.queue) if new_id is None else [],
            send=dict(self.send) if new_id is None else {},
            recv=dict(self.recv),
            history=list(self.history),
        )
