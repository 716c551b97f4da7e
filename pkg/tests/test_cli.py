from __future__ import annotations

import json
from pathlib import Path

import pytest

import jcrdt.apply as apply_mod
from jcrdt.cli import main
from jcrdt.core import decode_operation, dumps_canonical

SCENARIOS = Path(__file__).resolve().parent.parent / "scenarios"


def test_run_prints_renders(capsys):
    assert main(["run", str(SCENARIOS / "concurrent_register.jcrdt")]) == 0
    out = capsys.readouterr().out.splitlines()
    assert out[-2:] == ['p = {"key":{"?mv":["B","C"]}}', 'q = {"key":{"?mv":["B","C"]}}']


def test_expect_mismatch_exits_1(tmp_path, capsys):
    script = tmp_path / "bad.jcrdt"
    script.write_text('doc.get("a") := 1;\n@expect {"a":2}\n', encoding="utf-8")
    trace = tmp_path / "t.txt"
    assert main(["run", str(script), "--trace", str(trace)]) == 1
    assert "expected" in capsys.readouterr().err
    # the trace is still written for a failed run
    assert trace.read_text().startswith("LOCAL p | ")


def test_syntax_error_exits_2(tmp_path, capsys):
    script = tmp_path / "bad.jcrdt"
    script.write_text("doc.idx(\n", encoding="utf-8")
    assert main(["run", str(script)]) == 2
    assert "line 2, column 1: unexpected end of input" in capsys.readouterr().err


def test_missing_file_exits_2(tmp_path):
    assert main(["run", str(tmp_path / "nope.jcrdt")]) == 2


def test_dump_state_flag(capsys):
    main(["run", str(SCENARIOS / "shopping_list.jcrdt"), "--dump-state"])
    out = capsys.readouterr().out
    dump = out.split("--- state p\n", 1)[1].strip()
    assert json.loads(dump)["children"]


def test_check_table(tmp_path, capsys):
    assert main(["check", "--seed-range", "3..5", "--out", str(tmp_path / "f")]) == 0
    out = capsys.readouterr().out.splitlines()
    assert out[0].split() == ["seed", "ops", "orders", "pairs", "result"]
    assert [line.split()[0] for line in out[1:4]] == ["3", "4", "5"]
    assert out[-1] == "3/3 passed"
    assert not (tmp_path / "f").exists()


def test_check_writes_failing_traces(tmp_path, capsys, monkeypatch):
    def broken_insert(node, prev, op_id, deps, val):
        nxt = node.next[prev]
        node.next[prev], node.next[op_id] = op_id, nxt
        apply_mod.apply_assign(node, op_id, op_id, deps, val)
        return node

    monkeypatch.setattr(apply_mod, "apply_insert", broken_insert)
    assert main(["check", "--seed-range", "0..60", "--out", str(tmp_path)]) == 1
    files = sorted(tmp_path.glob("seed-*.json"))
    assert files
    raw = json.loads(files[0].read_text())
    ops = [decode_operation(dumps_canonical(o)) for o in raw]
    assert files[0].read_text() == dumps_canonical(raw) + "\n"
    assert ops and "FAIL" in capsys.readouterr().out


@pytest.mark.parametrize("bad", ["5..2", "x..3"])
def test_bad_seed_range(bad):
    with pytest.raises(SystemExit):
        main(["check", "--seed-range", bad])
