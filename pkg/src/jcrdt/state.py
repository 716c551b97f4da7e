"""Document-state tree: map, list and register nodes.

A map node holds its children under type-tagged keys plus a presence set per
untagged key. A list node is a map node whose keys are element ids, with an
extra ``next`` linkage running HEAD -> ... -> TAIL. Deleted list elements stay
linked; they are recognised by an empty presence set.

Presence sets are stored only while non-empty. An absent entry and an empty
one mean the same thing, so dropping the empty ones keeps structural equality
honest.
"""

from __future__ import annotations

import json
from typing import Iterator, Union

from .core import (
    DOC, HEAD, TAIL, Key, Mutation, Delete, Tag, TaggedKey, Timestamp,
    dumps_canonical, format_key, key_sort, value_key,
)


class MapNode:
    __slots__ = ("children", "pres")

    def __init__(self) -> None:
        self.children: dict[TaggedKey, Node] = {}
        self.pres: dict[Key, set[Timestamp]] = {}

    def copy(self) -> MapNode:
        new = type(self).__new__(type(self))
        new.children = {tk: c.copy() for tk, c in self.children.items()}
        new.pres = {k: set(s) for k, s in self.pres.items()}
        return new

    def keys(self) -> set[Key]:
        """Untagged keys with a child under any tag, live or not."""
        return {tk.key for tk in self.children}

    def live_keys(self) -> set[Key]:
        return set(self.pres)

    def __eq__(self, other: object) -> bool:
        return isinstance(other, (MapNode, ListNode, RegNode)) and state_equal(self, other)

    __hash__ = None  # type: ignore[assignment]

    def __repr__(self) -> str:
        return f"{type(self).__name__}({dump_state(self)})"


class ListNode(MapNode):
    __slots__ = ("next",)

    def __init__(self) -> None:
        super().__init__()
        self.next: dict[Key, Key] = {HEAD: TAIL}

    def copy(self) -> ListNode:
        new = super().copy()
        new.next = dict(self.next)
        return new

    def chain(self) -> Iterator[Key]:
        """Element ids in list order, tombstones included."""
        k = self.next[HEAD]
        while k is not TAIL:
            yield k
            k = self.next[k]

    def live_elements(self) -> list[Key]:
        return [k for k in self.chain() if self.pres.get(k)]


class RegNode:
    __slots__ = ("writes",)

    def __init__(self) -> None:
        self.writes: dict[Timestamp, object] = {}

    def copy(self) -> RegNode:
        new = RegNode.__new__(RegNode)
        new.writes = dict(self.writes)
        return new

    def values(self) -> list:
        """Distinct values in ascending writer order."""
        seen: set = set()
        out = []
        for t in sorted(self.writes):
            v = self.writes[t]
            if value_key(v) not in seen:
                seen.add(value_key(v))
                out.append(v)
        return out

    def __eq__(self, other: object) -> bool:
        return isinstance(other, (MapNode, RegNode)) and state_equal(self, other)

    __hash__ = None  # type: ignore[assignment]

    def __repr__(self) -> str:
        return f"RegNode({dump_state(self)})"


Node = Union[MapNode, ListNode, RegNode]
Branch = Union[MapNode, ListNode]

_FACTORY = {Tag.MAP: MapNode, Tag.LIST: ListNode, Tag.REG: RegNode}


def child_get_or_create(node: Branch, tk: TaggedKey) -> Node:
    child = node.children.get(tk)
    if child is None:
        child = node.children[tk] = _FACTORY[tk.tag]()
    return child


def presence(node: Branch, k: Key) -> set[Timestamp]:
    return node.pres.get(k, set())


def set_presence(node: Branch, k: Key, ids: set[Timestamp]) -> None:
    if ids:
        node.pres[k] = ids
    else:
        node.pres.pop(k, None)


def add_id(node: Branch, tk: TaggedKey, op_id: Timestamp, mut: Mutation) -> Branch:
    if not isinstance(mut, Delete):
        node.pres.setdefault(tk.key, set()).add(op_id)
    return node


def state_equal(a: Node, b: Node) -> bool:
    if type(a) is not type(b):
        return False
    if isinstance(a, RegNode):
        if a.writes.keys() != b.writes.keys():
            return False
        return all(value_key(v) == value_key(b.writes[t]) for t, v in a.writes.items())
    if a.pres != b.pres or a.children.keys() != b.children.keys():
        return False
    if isinstance(a, ListNode) and a.next != b.next:
        return False
    return all(state_equal(c, b.children[tk]) for tk, c in a.children.items())


def state_diff(a: Node, b: Node, where: str = "") -> list[str]:
    """Human-readable list of places where two trees differ."""
    here = where or "<root>"
    if type(a) is not type(b):
        return [f"{here}: {type(a).__name__} vs {type(b).__name__}"]
    if isinstance(a, RegNode):
        if state_equal(a, b):
            return []
        return [f"{here}: writes {_fmt_writes(a)} vs {_fmt_writes(b)}"]
    out = []
    for k in sorted(a.pres.keys() | b.pres.keys(), key=key_sort):
        pa, pb = presence(a, k), presence(b, k)
        if pa != pb:
            out.append(f"{here}: pres({format_key(k)}) {_fmt_ids(pa)} vs {_fmt_ids(pb)}")
    if isinstance(a, ListNode) and a.next != b.next:
        out.append(f"{here}: chain {_fmt_chain(a)} vs {_fmt_chain(b)}")
    for tk in sorted(a.children.keys() | b.children.keys(), key=_tk_sort):
        sub = f"{where}/{tk}"
        if tk not in a.children or tk not in b.children:
            side = "left" if tk not in a.children else "right"
            out.append(f"{sub}: missing on {side}")
        else:
            out.extend(state_diff(a.children[tk], b.children[tk], sub))
    return out


def _tk_sort(tk: TaggedKey) -> tuple:
    return key_sort(tk.key) + (tk.tag.value,)


def _fmt_ids(ids: set[Timestamp]) -> str:
    return "{" + ", ".join(str(t) for t in sorted(ids)) + "}"


def _fmt_writes(r: RegNode) -> str:
    return "{" + ", ".join(f"{t}: {json.dumps(r.writes[t])}" for t in sorted(r.writes)) + "}"


def _fmt_chain(node: ListNode) -> str:
    # tolerate a broken chain: this is used to report bugs
    out, k, seen = [], node.next.get(HEAD), set()
    while k is not None and k is not TAIL and k not in seen:
        seen.add(k)
        out.append(str(k))
        k = node.next.get(k)
    return "[" + ", ".join(out) + "]"


# -- structural invariants --------------------------------------------------


def walk(node: Node, path: tuple[TaggedKey, ...] = ()) -> Iterator[tuple[tuple[TaggedKey, ...], Node]]:
    yield path, node
    if not isinstance(node, RegNode):
        for tk, child in node.children.items():
            yield from walk(child, path + (tk,))


def check_chains(root: Node) -> None:
    """Assert every list's linkage is a single HEAD..TAIL chain over all its entries."""
    for path, node in walk(root):
        if not isinstance(node, ListNode):
            continue
        seen = []
        k = node.next.get(HEAD)
        while k is not TAIL:
            if k is None or k in seen or len(seen) > len(node.next):
                raise AssertionError(f"broken chain at {path}")
            seen.append(k)
            k = node.next.get(k)
        linked = set(node.next) - {HEAD}
        if linked != set(seen):
            raise AssertionError(f"chain at {path} misses {linked - set(seen)}")
        stray = {tk.key for tk in node.children} - linked
        if stray:
            raise AssertionError(f"children at {path} not linked: {stray}")


def list_orders(root: Node) -> dict[tuple[TaggedKey, ...], list[Key]]:
    """Every list in the tree with its full element order (tombstones included)."""
    return {path: list(node.chain()) for path, node in walk(root) if isinstance(node, ListNode)}


def appears_after_preserved(before: dict, after: dict) -> bool:
    """True when every list of ``before`` survives in ``after`` as a subsequence."""
    for path, old in before.items():
        new = after.get(path)
        if new is None:
            return False
        pos = {k: i for i, k in enumerate(new)}
        last = -1
        for k in old:
            if k not in pos or pos[k] < last:
                return False
            last = pos[k]
    return True


# -- rendering ---------------------------------------------------------------

_SUFFIX = {Tag.MAP: "map", Tag.LIST: "list", Tag.REG: "reg"}


def _visible_tags(node: Branch, k: Key) -> list[Tag]:
    present = [t for t in (Tag.MAP, Tag.LIST, Tag.REG) if TaggedKey(t, k) in node.children]
    shown = [t for t in present
             if t is not Tag.REG or node.children[TaggedKey(t, k)].writes]  # type: ignore[union-attr]
    return shown or present


def _project(node: Node):
    if isinstance(node, RegNode):
        vals = node.values()
        return vals[0] if len(vals) == 1 else {"?mv": vals}
    if isinstance(node, ListNode):
        out_list = []
        for k in node.live_elements():
            parts = _project_entry(node, k)
            out_list.append(parts[0][1] if len(parts) == 1 else {f"?{s}": v for s, v in parts})
        return out_list
    out = {}
    for k in sorted(node.pres, key=lambda k: (min(node.pres[k]), key_sort(k))):
        parts = _project_entry(node, k)
        if len(parts) == 1:
            out[k] = parts[0][1]
        else:
            out.update((f"{k}?{s}", v) for s, v in parts)
    return out


def _project_entry(node: Branch, k: Key) -> list[tuple[str, object]]:
    tags = _visible_tags(node, k)
    if not tags:
        return [("reg", {"?mv": []})]
    return [(_SUFFIX[t], _project(node.children[TaggedKey(t, k)])) for t in tags]


def to_json(root: Branch):
    """Plain-JSON projection of the document held under the root ``doc`` key."""
    tags = [t for t in (Tag.MAP, Tag.LIST, Tag.REG) if TaggedKey(t, DOC) in root.children]
    if not tags:
        return {}
    if len(tags) == 1:
        return _project(root.children[TaggedKey(tags[0], DOC)])
    return {f"doc?{_SUFFIX[t]}": _project(root.children[TaggedKey(t, DOC)]) for t in tags}


def render_json(root: Branch) -> str:
    return dumps_canonical_ordered(to_json(root))


def dumps_canonical_ordered(obj) -> str:
    # key order carries meaning here, so no sort_keys
    return json.dumps(obj, separators=(",", ":"), ensure_ascii=False, allow_nan=False)


def state_to_json(node: Node):
    """Raw, lossless dump of a tree (tombstones, presence sets, chains)."""
    if isinstance(node, RegNode):
        return {"reg": [[list(t), node.writes[t]] for t in sorted(node.writes)]}
    out: dict = {
        "pres": {_key_text(k): sorted(list(t) for t in ids)
                 for k, ids in sorted(node.pres.items(), key=lambda kv: key_sort(kv[0]))},
        "children": {str(tk): state_to_json(c)
                     for tk, c in sorted(node.children.items(), key=lambda kv: _tk_sort(kv[0]))},
    }
    if isinstance(node, ListNode):
        out["chain"] = [_key_text(k) for k in node.chain()]
    return out


def _key_text(k: Key) -> str:
    return str(k) if isinstance(k, Timestamp) else format_key(k)


def dump_state(node: Node) -> str:
    return dumps_canonical(state_to_json(node))
