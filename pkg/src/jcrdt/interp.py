"""Script language: the document command language plus simulation directives.

Commands use the same concrete syntax as the editing API, separated by ``;``::

    doc := {};
    doc.get("shopping") := [];
    let head = doc.get("shopping").idx(0);
    head.insertAfter("eggs");
    doc.get("shopping").keys;        // a query, printed when run
    yield;

Directives start with ``@`` and run to the end of the line::

    @replica p           switch the current replica (created on first use)
    @sync                exchange everything until all replicas agree
    @yield 5             five seeded yield steps at the current replica
    @render [p]          record the JSON rendering of one or all replicas
    @expect [p] <json>   the rendering must match <json> byte for byte

``//`` starts a comment. When a script does not begin with ``@replica``, an
implicit ``@replica p`` is assumed.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from typing import Iterator, Union

from .core import EMPTY_LIST, EMPTY_MAP
from .errors import ExpectationFailed, JCRDTError, ScriptError, ScriptSyntaxError
from .evaluate import Doc, Expr, Get, Idx, Keys, Values, Var
from .netsim import DeliveryPolicy, Simulation
from .replica import (
    AssignCmd, Command, DeleteCmd, InsertAfter, Let, Query, Seq, Yield, format_command,
)
from .state import dump_state

DEFAULT_REPLICA = "p"
KEYWORDS = {"doc", "let", "yield", "true", "false", "null"}


@dataclass(frozen=True)
class ReplicaSwitch:
    replica: str


@dataclass(frozen=True)
class Cmd:
    command: Command


@dataclass(frozen=True)
class Sync:
    pass


@dataclass(frozen=True)
class YieldSteps:
    n: int


@dataclass(frozen=True)
class Render:
    replica: str | None = None


@dataclass(frozen=True)
class Expect:
    replica: str | None
    json_text: str


Directive = Union[ReplicaSwitch, Cmd, Sync, YieldSteps, Render, Expect]


@dataclass
class Script:
    directives: list[Directive]

    def commands(self) -> list[Command]:
        return [d.command for d in self.directives if isinstance(d, Cmd)]


# -- lexer -------------------------------------------------------------------

_TOKEN_RE = re.compile(r"""
    (?P<ws>[ \t\r]+)
  | (?P<nl>\n)
  | (?P<comment>//[^\n]*)
  | (?P<directive>@[^\n]*)
  | (?P<string>"(?:[^"\\\n]|\\.)*")
  | (?P<number>-?(?:0|[1-9][0-9]*)(?:\.[0-9]+)?(?:[eE][+-]?[0-9]+)?)
  | (?P<assign>:=)
  | (?P<punct>[.;(){}\[\]=])
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
""", re.VERBOSE)


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    line: int
    col: int


def tokenize(text: str) -> list[Token]:
    out = []
    pos, line, line_start = 0, 1, 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        col = pos - line_start + 1
        if m is None:
            raise ScriptSyntaxError(f"unexpected character {text[pos]!r}", line, col)
        kind = m.lastgroup
        assert kind is not None
        if kind == "nl":
            line += 1
            line_start = m.end()
        elif kind == "punct" or kind == "assign":
            out.append(Token(m.group(), m.group(), line, col))
        elif kind not in ("ws", "comment"):
            out.append(Token(kind, m.group(), line, col))
        pos = m.end()
    out.append(Token("eof", "", line, pos - line_start + 1))
    return out


# -- parser ------------------------------------------------------------------


@dataclass
class _Parser:
    tokens: list[Token]
    pos: int = 0
    directives: list[Directive] = field(default_factory=list)

    @property
    def tok(self) -> Token:
        return self.tokens[self.pos]

    def fail(self, expected: set[str], message: str | None = None):
        t = self.tok
        found = "end of input" if t.kind == "eof" else repr(t.text)
        raise ScriptSyntaxError(message or f"unexpected {found}", t.line, t.col, frozenset(expected))

    def take(self, kind: str, text: str | None = None) -> Token:
        t = self.tok
        if t.kind != kind or (text is not None and t.text != text):
            self.fail({text or kind})
        self.pos += 1
        return t

    def at(self, kind: str, text: str | None = None) -> bool:
        t = self.tok
        return t.kind == kind and (text is None or t.text == text)

    # statements

    def script(self) -> list[Directive]:
        while not self.at("eof"):
            if self.at(";"):
                self.pos += 1
            elif self.at("directive"):
                self.directives.append(self.directive(self.take("directive")))
            else:
                cmd = self.command()
                self.directives.append(YieldSteps(1) if isinstance(cmd, Yield) else Cmd(cmd))
                if not (self.at(";") or self.at("eof") or self.at("directive")):
                    self.fail({";"})
        return self.directives

    def commands(self) -> Command:
        cmds = [self.command()]
        while self.at(";"):
            self.pos += 1
            if self.at("eof"):
                break
            cmds.append(self.command())
        if not self.at("eof"):
            self.fail({";", "end of input"})
        out = cmds[-1]
        for c in reversed(cmds[:-1]):
            out = Seq(c, out)
        return out

    def command(self) -> Command:
        if self.at("ident", "let"):
            self.pos += 1
            name = self.take("ident").text
            if name in KEYWORDS:
                self.pos -= 1
                self.fail({"variable name"}, f"{name!r} is reserved")
            self.take("=")
            expr = self.expr()
            if isinstance(expr, (Keys, Values)):
                self.fail({";"}, "let binds a cursor, not a query result")
            return Let(name, expr)
        if self.at("ident", "yield"):
            self.pos += 1
            return Yield()
        expr = self.expr(allow_mutators=True)
        if isinstance(expr, _Mutator):
            return expr.command
        if self.at(":="):
            if isinstance(expr, (Keys, Values)):
                self.fail({";"}, "cannot assign to a query")
            self.pos += 1
            return AssignCmd(expr, self.value())
        if isinstance(expr, (Keys, Values)):
            return Query(expr)
        self.fail({":=", ".insertAfter", ".delete", ".keys", ".values"})

    def expr(self, allow_mutators: bool = False) -> Expr:
        t = self.tok
        if t.kind != "ident":
            self.fail({"doc", "variable"})
        self.pos += 1
        if t.text == "doc":
            expr: Expr = Doc()
        elif t.text in KEYWORDS:
            self.pos -= 1
            self.fail({"doc", "variable"})
        else:
            expr = Var(t.text)
        while self.at("."):
            if isinstance(expr, (Keys, Values)):
                self.fail({";"}, "nothing can follow .keys or .values")
            self.pos += 1
            name = self.tok
            if name.kind != "ident":
                self.fail({"get", "idx", "keys", "values", "insertAfter", "delete"})
            self.pos += 1
            if name.text == "get":
                self.take("(")
                key = _unquote(self.take("string"))
                self.take(")")
                expr = Get(expr, key)
            elif name.text == "idx":
                self.take("(")
                num = self.tok
                if num.kind != "number" or not re.fullmatch(r"0|[1-9][0-9]*", num.text):
                    self.fail({"non-negative integer"})
                self.pos += 1
                self.take(")")
                expr = Idx(expr, int(num.text))
            elif name.text == "keys":
                expr = Keys(expr)
            elif name.text == "values":
                expr = Values(expr)
            elif name.text in ("insertAfter", "delete") and allow_mutators:
                if isinstance(expr, (Keys, Values)):
                    self.fail({";"})
                if name.text == "delete":
                    return _Mutator(DeleteCmd(expr))  # type: ignore[return-value]
                self.take("(")
                val = self.value()
                self.take(")")
                return _Mutator(InsertAfter(expr, val))  # type: ignore[return-value]
            else:
                self.pos -= 1
                self.fail({"get", "idx", "keys", "values"} |
                          ({"insertAfter", "delete"} if allow_mutators else set()))
        return expr

    def value(self):
        t = self.tok
        if t.kind == "string":
            self.pos += 1
            return _unquote(t)
        if t.kind == "number":
            self.pos += 1
            return json.loads(t.text)
        if t.kind == "ident" and t.text in ("true", "false", "null"):
            self.pos += 1
            return {"true": True, "false": False, "null": None}[t.text]
        if t.kind == "{":
            self.pos += 1
            self.take("}")
            return EMPTY_MAP
        if t.kind == "[":
            self.pos += 1
            self.take("]")
            return EMPTY_LIST
        self.fail({"number", "string", "true", "false", "null", "{}", "[]"})

    def directive(self, t: Token) -> Directive:
        body = t.text[1:].split("//", 1)[0].strip() if not t.text.startswith("@expect") else t.text[1:].strip()
        name, _, rest = body.partition(" ")
        rest = rest.strip()

        def bad(msg: str):
            raise ScriptSyntaxError(msg, t.line, t.col,
                                    frozenset({"@replica", "@sync", "@yield", "@render", "@expect"}))

        if name == "replica":
            if not re.fullmatch(r"[A-Za-z0-9_]+", rest):
                bad("@replica needs a replica name")
            return ReplicaSwitch(rest)
        if name == "sync" and not rest:
            return Sync()
        if name == "yield":
            if not re.fullmatch(r"[0-9]+", rest):
                bad("@yield needs a step count")
            return YieldSteps(int(rest))
        if name == "render":
            if rest and not re.fullmatch(r"[A-Za-z0-9_]+", rest):
                bad("@render takes an optional replica name")
            return Render(rest or None)
        if name == "expect":
            rid = None
            m = re.match(r"([A-Za-z0-9_]+)\s+(.*)$", rest)
            if m and not rest.startswith(("{", "[", '"')):
                rid, rest = m.group(1), m.group(2)
            try:
                json.loads(rest)
            except ValueError:
                bad("@expect needs a JSON document")
            return Expect(rid, rest.strip())
        bad(f"unknown directive @{name}")
        raise AssertionError  # unreachable


@dataclass(frozen=True)
class _Mutator:
    command: Command


def _unquote(t: Token) -> str:
    try:
        return json.loads(t.text)
    except ValueError:
        raise ScriptSyntaxError("bad string escape", t.line, t.col) from None


def parse_script(text: str) -> Script:
    directives = _Parser(tokenize(text)).script()
    if not directives or not isinstance(directives[0], ReplicaSwitch):
        directives.insert(0, ReplicaSwitch(DEFAULT_REPLICA))
    return Script(directives)


def parse_command(text: str) -> Command:
    """Parse ``cmd; cmd; ...`` (no directives) into a single command."""
    return _Parser(tokenize(text)).commands()


def format_script(script: Script) -> str:
    lines = []
    for d in script.directives:
        if isinstance(d, ReplicaSwitch):
            lines.append(f"@replica {d.replica}")
        elif isinstance(d, Cmd):
            lines.append(format_command(d.command) + ";")
        elif isinstance(d, Sync):
            lines.append("@sync")
        elif isinstance(d, YieldSteps):
            lines.append(f"@yield {d.n}")
        elif isinstance(d, Render):
            lines.append("@render" + (f" {d.replica}" if d.replica else ""))
        else:
            lines.append("@expect " + (f"{d.replica} " if d.replica else "") + d.json_text)
    return "\n".join(lines) + "\n"


# -- running -----------------------------------------------------------------


@dataclass
class RunResult:
    renders: dict[str, str]
    output: list[str]
    sim: Simulation

    def dump_states(self) -> dict[str, str]:
        return {r: dump_state(s.document) for r, s in sorted(self.sim.replicas.items())}


def _canonical_json(text: str) -> str:
    return json.dumps(json.loads(text), separators=(",", ":"), ensure_ascii=False)


def run_script(script: Script | str, seed: int = 0, policy: DeliveryPolicy | None = None,
               sim: Simulation | None = None) -> RunResult:
    """Execute a script; raises ScriptError or ExpectationFailed.

    Passing ``sim`` lets the caller inspect the simulation (e.g. its trace)
    even when the run aborts; ``seed`` and ``policy`` are then ignored.
    """
    if isinstance(script, str):
        script = parse_script(script)
    if sim is None:
        sim = Simulation(seed=seed, policy=policy or DeliveryPolicy())
    output: list[str] = []
    current: str | None = None
    for i, d in enumerate(script.directives):
        try:
            if isinstance(d, ReplicaSwitch):
                sim.add_replica(d.replica)
                current = d.replica
            elif isinstance(d, Cmd):
                assert current is not None
                result = sim.execute(current, d.command)
                if result is not None:
                    output.append(f"{current}: {format_command(d.command)} = {_format_result(result)}")
            elif isinstance(d, Sync):
                sim.sync_all()
            elif isinstance(d, YieldSteps):
                sim.run_random(d.n, at=current)
            elif isinstance(d, Render):
                for rid in _targets(sim, d.replica):
                    output.append(f"{rid}: {sim[rid].render()}")
            elif isinstance(d, Expect):
                want = _canonical_json(d.json_text)
                for rid in _targets(sim, d.replica):
                    got = sim[rid].render()
                    if got != want:
                        raise ExpectationFailed(i, rid, want, got)
        except (ExpectationFailed, ScriptSyntaxError):
            raise
        except JCRDTError as e:
            raise ScriptError(i, current, e) from e
    return RunResult(sim.renders(), output, sim)


def _targets(sim: Simulation, rid: str | None) -> Iterator[str]:
    if rid is None:
        yield from sorted(sim.replicas)
    else:
        sim[rid]
        yield rid


def _format_result(result) -> str:
    if isinstance(result, set):
        return json.dumps(sorted(result), ensure_ascii=False)
    return json.dumps(list(result), ensure_ascii=False)
