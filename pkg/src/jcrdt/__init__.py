"""Replicated JSON documents that converge without coordination.

Typical use goes through a script (:func:`run_script`) or a simulation::

    sim = Simulation.with_replicas(["p", "q"], seed=1)
    sim.execute("p", parse_command('doc.get("k") := 1'))
    sim.sync_all()
    sim.renders()  # {"p": '{"k":1}', "q": '{"k":1}'}
"""

from __future__ import annotations

from .apply import apply_op
from .core import (
    DOC, EMPTY_LIST, EMPTY_MAP, HEAD, TAIL, Assign, Cursor, Delete, Insert, Operation, Tag,
    TaggedKey, Timestamp, decode_operation, encode_operation,
)
from .errors import JCRDTError
from .interp import parse_command, parse_script, run_script
from .netsim import DeliveryPolicy, Simulation
from .replica import ReplicaState
from .state import MapNode, render_json, state_equal

__all__ = [
    "DOC", "EMPTY_LIST", "EMPTY_MAP", "HEAD", "TAIL", "Assign", "Cursor", "Delete",
    "DeliveryPolicy", "Insert", "JCRDTError", "MapNode", "Operation", "ReplicaState",
    "Simulation", "Tag", "TaggedKey", "Timestamp", "apply_op", "decode_operation",
    "encode_operation", "parse_command", "parse_script", "render_json", "run_script",
    "state_equal",
]
