"""Applying operations to a document tree.

``apply_op`` walks the cursor path, creating missing branch nodes and recording
the operation id in the presence set of each key it passes through, then runs
the leaf rule for the mutation. Clearing undoes exactly the operations listed in
``deps`` and leaves concurrent ones alone.

All functions mutate the tree they are given in place and return it.
"""

from __future__ import annotations

from typing import AbstractSet

from .core import (
    EMPTY_LIST, EMPTY_MAP, HEAD, TAIL, Assign, Delete, Insert, Key, Operation,
    Tag, TaggedKey, Timestamp,
)
from .errors import CursorMismatch
from .state import (
    Branch, ListNode, MapNode, Node, RegNode, add_id, child_get_or_create, presence,
    set_presence,
)

Deps = AbstractSet[Timestamp]


def apply_op(root: Branch, op: Operation) -> Branch:
    _precheck(root, op)
    ctx: Node = root
    for tk in op.cur.path:
        if isinstance(ctx, RegNode):
            raise CursorMismatch(f"{op.id}: cursor descends into a register")
        child = child_get_or_create(ctx, tk)
        add_id(ctx, tk, op.id, op.mut)
        ctx = child
    if isinstance(ctx, RegNode):
        raise CursorMismatch(f"{op.id}: cursor ends inside a register")
    k = op.cur.key
    if isinstance(op.mut, Assign):
        apply_assign(ctx, k, op.id, op.deps, op.mut.value)
    elif isinstance(op.mut, Insert):
        apply_insert(ctx, k, op.id, op.deps, op.mut.value)  # type: ignore[arg-type]
    else:
        apply_delete(ctx, k, op.deps)
    return root


def _precheck(root: Branch, op: Operation) -> None:
    """Reject an insert whose anchor cannot exist, before anything is touched."""
    if not isinstance(op.mut, Insert):
        return
    path = op.cur.path
    if not path or path[-1].tag is not Tag.LIST:
        raise CursorMismatch(f"{op.id}: insert target is not a list position")
    node: Node | None = root
    for tk in path:
        node = node.children.get(tk) if isinstance(node, MapNode) else None
        if node is None:
            break
    if node is None:
        # the list will be created on the way down, holding only HEAD
        if op.cur.key is not HEAD:
            raise CursorMismatch(f"{op.id}: anchor {op.cur.key} is not in the list")
    elif op.cur.key not in node.next or op.cur.key is TAIL:  # type: ignore[union-attr]
        raise CursorMismatch(f"{op.id}: anchor {op.cur.key} is not in the list")


def apply_assign(node: Branch, k: Key, op_id: Timestamp, deps: Deps, val) -> Branch:
    mut = Assign(val)
    if val is EMPTY_MAP or val is EMPTY_LIST:
        tag = Tag.MAP if val is EMPTY_MAP else Tag.LIST
        clear_elem(node, deps, k)
        add_id(node, TaggedKey(tag, k), op_id, mut)
        child_get_or_create(node, TaggedKey(tag, k))
    else:
        tk = TaggedKey(Tag.REG, k)
        clear(node, deps, tk)
        add_id(node, tk, op_id, mut)
        reg = child_get_or_create(node, tk)
        reg.writes[op_id] = val  # type: ignore[union-attr]
    return node


def apply_insert(node: ListNode, prev: Key, op_id: Timestamp, deps: Deps, val) -> ListNode:
    if not isinstance(node, ListNode) or prev not in node.next:
        raise CursorMismatch(f"{op_id}: anchor {prev} is not in the list")
    # skip past concurrent inserts at the same anchor that carry a greater id
    nxt = node.next[prev]
    while nxt is not TAIL and op_id < nxt:  # type: ignore[operator]
        prev, nxt = nxt, node.next[nxt]
    node.next[prev] = op_id
    node.next[op_id] = nxt
    apply_assign(node, op_id, op_id, deps, val)
    return node


def apply_delete(node: Branch, k: Key, deps: Deps) -> Branch:
    clear_elem(node, deps, k)
    return node


def clear(node: Branch, deps: Deps, tk: TaggedKey) -> set[Timestamp]:
    """Drop the effects of ``deps`` below ``tk``; return the ids that survive."""
    child = node.children.get(tk)
    if child is None:
        return set()
    if isinstance(child, RegNode):
        child.writes = {t: v for t, v in child.writes.items() if t not in deps}
        return set(child.writes)
    pres: set[Timestamp] = set()
    if isinstance(child, ListNode):
        k: Key = HEAD
        while k is not TAIL:
            pres |= clear_elem(child, deps, k)
            k = child.next[k]
    else:
        for k in list(child.keys()):
            pres |= clear_elem(child, deps, k)
    return pres


def clear_elem(node: Branch, deps: Deps, k: Key) -> set[Timestamp]:
    survivors: set[Timestamp] = set()
    for tag in (Tag.MAP, Tag.LIST, Tag.REG):
        survivors |= clear(node, deps, TaggedKey(tag, k))
    pres = (survivors | presence(node, k)) - deps
    set_presence(node, k, pres)
    return set(pres)
