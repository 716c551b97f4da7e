"""Expressions over a replica's local state.

An expression evaluates to a cursor, or, for ``.keys`` / ``.values``, to a
query result. Evaluation is read-only. Each premise that could fail raises a
named :mod:`jcrdt.errors` exception instead of getting stuck.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Mapping, Protocol, Union

from .core import HEAD, TAIL, Cursor, Key, Tag, TaggedKey, ROOT_CURSOR
from .errors import (
    GetOnHead, IndexOutOfBounds, NotAList, NotAMap, NotARegister, UnboundVariable,
)
from .state import Branch, ListNode, MapNode, Node, RegNode


@dataclass(frozen=True)
class Doc:
    pass


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Get:
    target: Expr
    key: str


@dataclass(frozen=True)
class Idx:
    target: Expr
    index: int

    def __post_init__(self) -> None:
        if self.index < 0:
            raise ValueError("idx() takes a non-negative index")


@dataclass(frozen=True)
class Keys:
    target: Expr


@dataclass(frozen=True)
class Values:
    target: Expr


Expr = Union[Doc, Var, Get, Idx, Keys, Values]
CursorExpr = Union[Doc, Var, Get, Idx]


class HasState(Protocol):
    document: MapNode
    vars: Mapping[str, Cursor]


def resolve(replica: HasState, expr: Expr) -> Cursor:
    if isinstance(expr, Doc):
        return ROOT_CURSOR
    if isinstance(expr, Var):
        try:
            return replica.vars[expr.name]
        except KeyError:
            raise UnboundVariable(expr.name) from None
    if isinstance(expr, Get):
        cur = resolve(replica, expr.target)
        if cur.key is HEAD:
            raise GetOnHead(f"get({expr.key!r}) on a list head")
        return Cursor(cur.path + (TaggedKey(Tag.MAP, cur.key),), expr.key)
    if isinstance(expr, Idx):
        cur = resolve(replica, expr.target)
        path = cur.path + (TaggedKey(Tag.LIST, cur.key),)
        node = _descend(replica.document, path)
        if not isinstance(node, ListNode):
            raise NotAList(f"no list at {Cursor(cur.path, cur.key)}")
        return Cursor(path, idx_resolve(node, HEAD, expr.index))
    raise TypeError(f"{type(expr).__name__} does not evaluate to a cursor")


def _descend(root: Branch, path: tuple[TaggedKey, ...]) -> Node | None:
    node: Node | None = root
    for tk in path:
        if not isinstance(node, MapNode):
            return None
        node = node.children.get(tk)
    return node


def idx_resolve(node: ListNode, start: Key, i: int) -> Key:
    k = start
    remaining = i
    while remaining > 0:
        nxt = node.next.get(k)
        if nxt is None:
            raise IndexOutOfBounds(f"{k} is not an element of this list")
        if nxt is TAIL:
            raise IndexOutOfBounds(f"index {i} past the end of the list")
        if node.pres.get(nxt):
            remaining -= 1
        k = nxt
    return k


def keys(replica: HasState, cursor: Cursor) -> set[str]:
    parent = _descend(replica.document, cursor.path)
    target = parent.children.get(TaggedKey(Tag.MAP, cursor.key)) if isinstance(parent, MapNode) else None
    if not isinstance(target, MapNode) or isinstance(target, ListNode):
        raise NotAMap(f"no map at {cursor}")
    return set(target.pres)  # type: ignore[arg-type]


def values(replica: HasState, cursor: Cursor) -> list:
    """Distinct register values at ``cursor``, in ascending writer order."""
    parent = _descend(replica.document, cursor.path)
    target = parent.children.get(TaggedKey(Tag.REG, cursor.key)) if isinstance(parent, MapNode) else None
    if not isinstance(target, RegNode):
        raise NotARegister(f"no register at {cursor}")
    return target.values()


def evaluate(replica: HasState, expr: Expr):
    """Evaluate any expression: a cursor, a key set, or a value list."""
    if isinstance(expr, Keys):
        return keys(replica, resolve(replica, expr.target))
    if isinstance(expr, Values):
        return values(replica, resolve(replica, expr.target))
    return resolve(replica, expr)


def format_expr(expr: Expr) -> str:
    if isinstance(expr, Doc):
        return "doc"
    if isinstance(expr, Var):
        return expr.name
    if isinstance(expr, Get):
        return f"{format_expr(expr.target)}.get({json.dumps(expr.key, ensure_ascii=False)})"
    if isinstance(expr, Idx):
        return f"{format_expr(expr.target)}.idx({expr.index})"
    if isinstance(expr, Keys):
        return f"{format_expr(expr.target)}.keys"
    return f"{format_expr(expr.target)}.values"


__all__ = [
    "Doc", "Var", "Get", "Idx", "Keys", "Values", "Expr", "CursorExpr",
    "resolve", "idx_resolve", "keys", "values", "evaluate", "format_expr",
]
