from __future__ import annotations

import json
import pickle

import pytest
from hypothesis import given, strategies as st

from jcrdt.core import (
    DOC, EMPTY_LIST, EMPTY_MAP, HEAD, Assign, Cursor, Delete, Insert, Operation, Tag, TaggedKey,
    Timestamp, decode_operation, encode_operation, key_sort, operation_to_json, ts_less,
    value_key,
)
from jcrdt.errors import OperationDecodeError

replica_ids = st.text(alphabet="pqrs", min_size=1, max_size=3)
timestamps = st.builds(Timestamp, st.integers(1, 50), replica_ids)
map_keys = st.text(max_size=4)
values = st.one_of(
    st.none(), st.booleans(), st.integers(-10**6, 10**6), st.text(max_size=5),
    st.floats(allow_nan=False, allow_infinity=False),
    st.just(EMPTY_MAP), st.just(EMPTY_LIST),
)


@st.composite
def operations(draw):
    path = [TaggedKey(Tag.MAP, DOC)]
    for _ in range(draw(st.integers(0, 3))):
        tag = draw(st.sampled_from([Tag.MAP, Tag.LIST]))
        path.append(TaggedKey(tag, draw(st.one_of(map_keys, timestamps))))
    mut = draw(st.sampled_from(["insert", "assign", "delete"]))
    if mut == "insert":
        path[-1] = TaggedKey(Tag.LIST, path[-1].key)
        key = draw(st.one_of(st.just(HEAD), timestamps))
        m = Insert(draw(values))
    else:
        key = draw(st.one_of(map_keys, timestamps))
        m = Assign(draw(values)) if mut == "assign" else Delete()
    op_id = draw(timestamps)
    deps = draw(st.frozensets(timestamps, max_size=5).map(lambda s: s - {op_id}))
    return Operation(op_id, deps, Cursor(tuple(path), key), m)


@given(timestamps, timestamps)
def test_tuple_order_is_lamport_order(a, b):
    assert (a < b) == ts_less(a, b)


def test_counter_dominates_replica_name():
    assert Timestamp(1, "z") < Timestamp(2, "a")
    assert Timestamp(3, "p") < Timestamp(3, "q")


def test_value_key_separates_bool_and_int():
    assert value_key(True) != value_key(1)
    assert value_key(1) != value_key(1.0)
    assert Assign(True) != Assign(1)
    assert Assign(2) == Assign(2)


def test_key_sort_orders_mixed_kinds():
    ks = [Timestamp(2, "p"), "b", HEAD, DOC, "a", Timestamp(1, "q")]
    assert sorted(ks, key=key_sort) == [DOC, HEAD, "a", "b", Timestamp(1, "q"), Timestamp(2, "p")]


def test_sentinels_survive_pickling():
    assert pickle.loads(pickle.dumps(HEAD)) is HEAD
    assert pickle.loads(pickle.dumps(EMPTY_MAP)) is EMPTY_MAP


def test_operation_rejects_self_dependency():
    with pytest.raises(ValueError):
        Operation(Timestamp(1, "p"), frozenset({Timestamp(1, "p")}), Cursor((), DOC), Delete())


@given(operations())
def test_encode_decode_round_trip(op):
    data = encode_operation(op)
    assert decode_operation(data) == op
    # canonical: decoding then re-encoding gives the same bytes
    assert encode_operation(decode_operation(data)) == data


@given(operations())
def test_encoding_is_key_sorted_compact(op):
    text = encode_operation(op).decode()
    assert text == json.dumps(json.loads(text), sort_keys=True, separators=(",", ":"),
                              ensure_ascii=False)


def test_encoding_example_is_stable():
    op = Operation(Timestamp(3, "p"), frozenset({Timestamp(2, "p"), Timestamp(1, "q")}),
                   Cursor((TaggedKey(Tag.MAP, DOC), TaggedKey(Tag.LIST, "l")), HEAD), Insert("x"))
    assert encode_operation(op) == (
        b'{"cur":{"key":{"head":true},"path":[{"key":{"doc":true},"tag":"mapT"},'
        b'{"key":{"str":"l"},"tag":"listT"}]},"deps":[[1,"q"],[2,"p"]],"id":[3,"p"],'
        b'"mut":{"type":"insert","value":"x"}}'
    )


def test_empty_collections_do_not_collide_with_strings():
    for v in (EMPTY_MAP, EMPTY_LIST, "{}", "[]"):
        op = Operation(Timestamp(1, "p"), frozenset(), Cursor((TaggedKey(Tag.MAP, DOC),), "k"), Assign(v))
        assert decode_operation(encode_operation(op)).mut.value == v


@given(operations(), st.data())
def test_truncated_input_is_rejected(op, data):
    raw = encode_operation(op)
    cut = data.draw(st.integers(0, len(raw) - 1))
    with pytest.raises(OperationDecodeError):
        decode_operation(raw[:cut])


@pytest.mark.parametrize("mutate, field", [
    (lambda o: o.pop("id"), "id"),
    (lambda o: o.update(deps=[[2, "p"], [1, "p"]]), "deps"),
    (lambda o: o.update(deps=[[0, "p"]]), "deps[0]"),
    (lambda o: o["cur"]["path"].append({"tag": "regT", "key": {"str": "a"}}), "cur.path[0].tag"),
    (lambda o: o["mut"].update(type="move"), "mut.type"),
    (lambda o: o["mut"].update(value={"a": 1}), "mut.value"),
    (lambda o: o["cur"].update(key={"str": "a", "id": [1, "p"]}), "cur.key"),
])
def test_decode_errors_name_the_field(mutate, field):
    obj = operation_to_json(Operation(Timestamp(3, "p"), frozenset(), Cursor((), DOC), Assign(1)))
    mutate(obj)
    with pytest.raises(OperationDecodeError) as exc:
        decode_operation(json.dumps(obj))
    assert exc.value.field == field


def test_decode_rejects_non_finite_numbers():
    with pytest.raises(OperationDecodeError):
        decode_operation('{"id":[1,"p"],"deps":[],"cur":{"path":[],"key":{"doc":true}},'
                         '"mut":{"type":"assign","value":NaN}}')
