"""Identifiers, keys, cursors, values and operations.

Everything in this module is an immutable value. A Lamport timestamp is a
``(counter, replica)`` named tuple, so Python's tuple ordering is exactly the
total order used to break ties between concurrent operations.
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass
from typing import Any, NamedTuple, Union

from .errors import OperationDecodeError

ReplicaId = str


class Timestamp(NamedTuple):
    counter: int
    replica: ReplicaId

    def __str__(self) -> str:
        return f"{self.counter}@{self.replica}"


def ts_less(a: Timestamp, b: Timestamp) -> bool:
    return a.counter < b.counter or (a.counter == b.counter and a.replica < b.replica)


class _Sentinel:
    """Atom used as a special key (``doc``, ``head``, ``tail``)."""

    __slots__ = ("name",)

    def __init__(self, name: str) -> None:
        self.name = name

    def __repr__(self) -> str:
        return self.name.upper()

    def __reduce__(self):
        return (_sentinel, (self.name,))


def _sentinel(name: str) -> _Sentinel:
    return {"doc": DOC, "head": HEAD, "tail": TAIL, "{}": EMPTY_MAP, "[]": EMPTY_LIST}[name]


DOC = _Sentinel("doc")
HEAD = _Sentinel("head")
TAIL = _Sentinel("tail")

# A key is DOC, HEAD, TAIL, a map key (str) or a list element id (Timestamp).
Key = Union[_Sentinel, str, Timestamp]


def key_sort(k: Key) -> tuple:
    """Deterministic sort key across the mixed key kinds."""
    if k is DOC:
        return (0,)
    if k is HEAD:
        return (1,)
    if isinstance(k, str):
        return (2, k)
    if isinstance(k, Timestamp):
        return (3, k.counter, k.replica)
    return (4,)


def format_key(k: Key) -> str:
    if isinstance(k, _Sentinel):
        return k.name
    if isinstance(k, Timestamp):
        return str(k)
    return json.dumps(k, ensure_ascii=False)


class Tag(enum.Enum):
    MAP = "mapT"
    LIST = "listT"
    REG = "regT"


class TaggedKey(NamedTuple):
    tag: Tag
    key: Key

    def __str__(self) -> str:
        return f"{self.tag.value}({format_key(self.key)})"


@dataclass(frozen=True)
class Cursor:
    path: tuple[TaggedKey, ...]
    key: Key

    def __str__(self) -> str:
        inner = ", ".join(str(tk) for tk in self.path)
        return f"cursor(<{inner}>, {format_key(self.key)})"


ROOT_CURSOR = Cursor((), DOC)

# Values: int/float/str/bool/None, plus the two empty-collection literals.
EMPTY_MAP = _Sentinel("{}")
EMPTY_LIST = _Sentinel("[]")
Value = Any


def is_primitive(v: Value) -> bool:
    return v is not EMPTY_MAP and v is not EMPTY_LIST


def value_key(v: Value) -> tuple:
    """Equality key that keeps ``True``, ``1`` and ``1.0`` apart."""
    if isinstance(v, _Sentinel):
        return ("sentinel", v.name)
    return (type(v).__name__, v)


def check_value(v: Value) -> Value:
    if v is None or v is EMPTY_MAP or v is EMPTY_LIST or isinstance(v, (bool, int, str)):
        return v
    if isinstance(v, float) and v == v and v not in (float("inf"), float("-inf")):
        return v
    raise TypeError(f"not a document value: {v!r}")


# Mutations compare by ``value_key`` so that e.g. assign(true) != assign(1).


@dataclass(frozen=True, eq=False)
class Insert:
    value: Value

    def __eq__(self, other: object) -> bool:
        return type(other) is Insert and value_key(self.value) == value_key(other.value)

    def __hash__(self) -> int:
        return hash(("insert", value_key(self.value)))


@dataclass(frozen=True, eq=False)
class Assign:
    value: Value

    def __eq__(self, other: object) -> bool:
        return type(other) is Assign and value_key(self.value) == value_key(other.value)

    def __hash__(self) -> int:
        return hash(("assign", value_key(self.value)))


@dataclass(frozen=True)
class Delete:
    pass


Mutation = Union[Insert, Assign, Delete]


@dataclass(frozen=True)
class Operation:
    id: Timestamp
    deps: frozenset[Timestamp]
    cur: Cursor
    mut: Mutation

    def __post_init__(self) -> None:
        if self.id in self.deps:
            raise ValueError(f"operation {self.id} lists itself as a dependency")


# -- canonical encoding -----------------------------------------------------


def _enc_ts(t: Timestamp) -> list:
    return [t.counter, t.replica]


def _enc_key(k: Key) -> dict:
    if k is DOC:
        return {"doc": True}
    if k is HEAD:
        return {"head": True}
    if isinstance(k, Timestamp):
        return {"id": _enc_ts(k)}
    if isinstance(k, str):
        return {"str": k}
    raise ValueError(f"key {k!r} cannot appear in a cursor")


def _enc_value(v: Value) -> Any:
    if v is EMPTY_MAP:
        return {}
    if v is EMPTY_LIST:
        return []
    return v


def operation_to_json(op: Operation) -> dict:
    mut: dict[str, Any]
    if isinstance(op.mut, Delete):
        mut = {"type": "delete"}
    else:
        mut = {"type": "insert" if isinstance(op.mut, Insert) else "assign",
               "value": _enc_value(op.mut.value)}
    return {
        "id": _enc_ts(op.id),
        "deps": [_enc_ts(t) for t in sorted(op.deps)],
        "cur": {
            "path": [{"tag": tk.tag.value, "key": _enc_key(tk.key)} for tk in op.cur.path],
            "key": _enc_key(op.cur.key),
        },
        "mut": mut,
    }


def dumps_canonical(obj: Any) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), ensure_ascii=False,
                      allow_nan=False)


def encode_operation(op: Operation) -> bytes:
    return dumps_canonical(operation_to_json(op)).encode("utf-8")


def _reject_constant(name: str) -> None:
    raise ValueError(f"non-finite number {name}")


def _dec_ts(obj: Any, field: str) -> Timestamp:
    if (not isinstance(obj, list) or len(obj) != 2 or type(obj[0]) is not int
            or obj[0] < 1 or not isinstance(obj[1], str)):
        raise OperationDecodeError(field, f"expected [counter>=1, replica], got {obj!r}")
    return Timestamp(obj[0], obj[1])


def _dec_key(obj: Any, field: str) -> Key:
    if not isinstance(obj, dict) or len(obj) != 1:
        raise OperationDecodeError(field, f"expected a single-entry key object, got {obj!r}")
    (kind, payload), = obj.items()
    if kind == "doc" and payload is True:
        return DOC
    if kind == "head" and payload is True:
        return HEAD
    if kind == "str" and isinstance(payload, str):
        return payload
    if kind == "id":
        return _dec_ts(payload, field + ".id")
    raise OperationDecodeError(field, f"unknown key encoding {obj!r}")


def _dec_value(obj: Any, field: str) -> Value:
    if obj == {} and isinstance(obj, dict):
        return EMPTY_MAP
    if obj == [] and isinstance(obj, list):
        return EMPTY_LIST
    try:
        return check_value(obj)
    except TypeError:
        raise OperationDecodeError(field, f"not a document value: {obj!r}") from None


def _field(obj: dict, name: str, prefix: str = "") -> Any:
    if not isinstance(obj, dict) or name not in obj:
        raise OperationDecodeError(prefix + name, "missing")
    return obj[name]


def operation_from_json(obj: Any) -> Operation:
    if not isinstance(obj, dict):
        raise OperationDecodeError("<root>", "expected an object")
    op_id = _dec_ts(_field(obj, "id"), "id")
    raw_deps = _field(obj, "deps")
    if not isinstance(raw_deps, list):
        raise OperationDecodeError("deps", "expected a list")
    deps = [_dec_ts(d, f"deps[{i}]") for i, d in enumerate(raw_deps)]
    if deps != sorted(set(deps)):
        raise OperationDecodeError("deps", "not strictly ascending")
    cur = _field(obj, "cur")
    raw_path = _field(cur, "path", "cur.")
    if not isinstance(raw_path, list):
        raise OperationDecodeError("cur.path", "expected a list")
    path = []
    for i, seg in enumerate(raw_path):
        where = f"cur.path[{i}]"
        tag = _field(seg, "tag", where + ".")
        if tag not in (Tag.MAP.value, Tag.LIST.value):
            raise OperationDecodeError(where + ".tag", f"expected mapT or listT, got {tag!r}")
        path.append(TaggedKey(Tag(tag), _dec_key(_field(seg, "key", where + "."), where + ".key")))
    final = _dec_key(_field(cur, "key", "cur."), "cur.key")
    raw_mut = _field(obj, "mut")
    kind = _field(raw_mut, "type", "mut.")
    mut: Mutation
    if kind == "delete":
        if set(raw_mut) != {"type"}:
            raise OperationDecodeError("mut", "delete carries no value")
        mut = Delete()
    elif kind in ("insert", "assign"):
        value = _dec_value(_field(raw_mut, "value", "mut."), "mut.value")
        mut = Insert(value) if kind == "insert" else Assign(value)
    else:
        raise OperationDecodeError("mut.type", f"unknown mutation {kind!r}")
    try:
        return Operation(op_id, frozenset(deps), Cursor(tuple(path), final), mut)
    except ValueError as e:
        raise OperationDecodeError("deps", str(e)) from None


def decode_operation(data: bytes | str) -> Operation:
    if isinstance(data, bytes):
        try:
            data = data.decode("utf-8")
        except UnicodeDecodeError as e:
            raise OperationDecodeError("<bytes>", str(e)) from None
    try:
        obj = json.loads(data, parse_constant=_reject_constant)
    except ValueError as e:
        raise OperationDecodeError("<json>", str(e)) from None
    return operation_from_json(obj)
