"""Operator console: textual runtime composition against live composites.

One command per line. Scripts are parse-validated in full (with line and
column positions on errors) before anything executes; execution then
walks the commands against local or remote composites via their control
services. Every command and its outcome lands in the transcript.

Grammar:
    discover <filter>
    describe <uid>
    composite new <name>
    use <composite>
    type load <type_id>
    inst <type_id> <id> [k=v ...]
    bind <src.port> <dst.port>[,<dst.port>...]
    unbind <binding_id>
    probe sink|source <name> (<kind>,...)
    adapt begin|commit
    invoke <uid>.<method> [args ...]
    watch <filter>
    bench creation|probes|proxy [k=v ...]
    run <scenario-file>
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple

from .bus import BusNode
from .clock import Clock, MockClock, RealClock
from .components import standard_library
from .composite import Composite, ControlClient, TypeLibrary
from .config import NodeConfig
from .devsim import (
    bench_component_creation, bench_probe_addition, bench_proxy_generation,
    parse_scenario, run_scenario,
)
from .devsim.fleet import DeviceFleet
from .devsim.report import render_table, write_report
from .errors import ParseError, SlcaError
from .transport import LoopbackHub
from .values import kind_of


@dataclass(frozen=True)
class Token:
    text: str
    column: int


@dataclass(frozen=True)
class Command:
    line: int
    raw: str
    name: str
    args: Tuple[Token, ...]


@dataclass
class CommandResult:
    line: int
    command: str
    ok: bool
    output: str
    error: str = ""
    data: Any = None

    def to_doc(self) -> dict:
        doc = {"line": self.line, "command": self.command, "ok": self.ok,
               "output": self.output}
        if self.error:
            doc["error"] = self.error
        return doc


COMMANDS = {
    "discover": (1, 1), "describe": (1, 1), "composite": (2, 2),
    "use": (1, 1), "type": (2, 2), "inst": (2, None), "bind": (2, 2),
    "unbind": (1, 1), "probe": (3, 3), "adapt": (1, 1),
    "invoke": (1, None), "watch": (1, 1), "bench": (1, None),
    "run": (1, 1),
}


def tokenize(line: str, line_no: int) -> List[Token]:
    tokens: List[Token] = []
    i = 0
    while i < len(line):
        if line[i].isspace():
            i += 1
            continue
        if line[i] == "#":
            break
        start = i
        if line[i] == '"':
            i += 1
            while i < len(line) and line[i] != '"':
                i += 1
            if i >= len(line):
                raise ParseError("unterminated string", line_no, start + 1)
            i += 1
            tokens.append(Token(line[start:i], start + 1))
        else:
            while i < len(line) and not line[i].isspace():
                i += 1
            tokens.append(Token(line[start:i], start + 1))
    return tokens


def parse_line(line: str, line_no: int) -> Optional[Command]:
    tokens = tokenize(line, line_no)
    if not tokens:
        return None
    head, rest = tokens[0], tokens[1:]
    if head.text not in COMMANDS:
        raise ParseError(f"unknown command {head.text!r}", line_no, head.column)
    low, high = COMMANDS[head.text]
    if len(rest) < low:
        raise ParseError(f"{head.text} needs at least {low} argument(s)",
                         line_no, head.column)
    if high is not None and len(rest) > high:
        raise ParseError(f"{head.text} takes at most {high} argument(s)",
                         line_no, rest[high].column)
    _validate_shape(head, rest, line_no)
    return Command(line_no, line.rstrip("\n"), head.text, tuple(rest))


def _validate_shape(head: Token, rest: List[Token], line_no: int) -> None:
    if head.text == "composite" and rest[0].text != "new":
        raise ParseError("expected 'composite new <name>'", line_no, rest[0].column)
    if head.text == "type" and rest[0].text != "load":
        raise ParseError("expected 'type load <type_id>'", line_no, rest[0].column)
    if head.text == "probe":
        if rest[0].text not in ("sink", "source"):
            raise ParseError("probe kind must be 'sink' or 'source'",
                             line_no, rest[0].column)
        _parse_signature(rest[2], line_no)
    if head.text == "adapt" and rest[0].text not in ("begin", "commit"):
        raise ParseError("expected 'adapt begin' or 'adapt commit'",
                         line_no, rest[0].column)
    if head.text == "invoke" and "." not in rest[0].text:
        raise ParseError("expected '<uid>.<method>'", line_no, rest[0].column)
    if head.text == "bench" and rest[0].text not in ("creation", "probes", "proxy"):
        raise ParseError("bench name must be creation, probes or proxy",
                         line_no, rest[0].column)
    if head.text == "inst":
        for token in rest[2:]:
            if "=" not in token.text:
                raise ParseError("properties look like name=value",
                                 line_no, token.column)


def parse_script(text: str) -> List[Command]:
    commands = []
    for line_no, line in enumerate(text.splitlines(), start=1):
        command = parse_line(line, line_no)
        if command is not None:
            commands.append(command)
    return commands


def _parse_signature(token: Token, line_no: int):
    text = token.text
    if not (text.startswith("(") and text.endswith(")")):
        raise ParseError("signature looks like (int,string) or ()",
                         line_no, token.column)
    inner = text[1:-1].strip()
    if not inner:
        return ()
    try:
        return tuple(kind_of(part.strip()) for part in inner.split(","))
    except ValueError as exc:
        raise ParseError(str(exc), line_no, token.column) from None


def _parse_literal(text: str) -> Any:
    if text.startswith('"') and text.endswith('"'):
        return text[1:-1]
    if text == "true":
        return True
    if text == "false":
        return False
    try:
        return int(text)
    except ValueError:
        pass
    try:
        return float(text)
    except ValueError:
        pass
    return text


class RuntimeNode:
    """A running node: bus attachment, type library, local composites."""

    def __init__(self, config: Optional[NodeConfig] = None,
                 clock: Optional[Clock] = None,
                 hub: Optional[LoopbackHub] = None):
        self.config = config or NodeConfig()
        self.clock = clock or (MockClock() if hub is not None else RealClock())
        if self.config.transport == "loopback" and hub is None:
            hub = LoopbackHub()
        self.hub = hub
        self.node = BusNode(self.config.node_name, self.clock, hub, self.config)
        self.library = standard_library()
        self.composites: Dict[str, Composite] = {}
        self.fleet = DeviceFleet(hub, self.clock, self.config) if hub is not None else None
        self.on_composite_created: List = []

    def create_composite(self, name: str) -> Composite:
        if name in self.composites:
            raise SlcaError(f"composite {name!r} already exists on this node")
        composite = Composite(self.node, name, self.library)
        self.composites[name] = composite
        for hook in list(self.on_composite_created):
            hook(composite)
        return composite

    def resolve_control_uid(self, ref: str) -> str:
        if ref in self.composites:
            return self.composites[ref].control_uid
        return ref  # assume a control uid of a (possibly remote) composite

    def close(self) -> None:
        for composite in self.composites.values():
            composite.close()
        self.node.close()
        if isinstance(self.clock, RealClock):
            self.clock.close()


class ConsoleSession:
    """Executes parsed commands against a runtime node."""

    def __init__(self, runtime: RuntimeNode, strict: bool = False,
                 report_dir: Optional[Path] = None):
        self.runtime = runtime
        self.strict = strict
        self.report_dir = report_dir
        self.transcript: List[CommandResult] = []
        self._target_name: Optional[str] = None
        self._target: Optional[ControlClient] = None
        self._watch_events: List[str] = []

    # -- script execution --

    def exec_script(self, text: str) -> List[CommandResult]:
        commands = parse_script(text)  # validate everything before running
        for command in commands:
            result = self.execute(command)
            if not result.ok and self.strict:
                break
        return self.transcript

    def exec_line(self, line: str, line_no: int = 0) -> Optional[CommandResult]:
        command = parse_line(line, line_no)
        if command is None:
            return None
        return self.execute(command)

    def execute(self, command: Command) -> CommandResult:
        try:
            output, data = self._dispatch(command)
            result = CommandResult(command.line, command.raw, True, output,
                                   data=data)
        except SlcaError as exc:
            result = CommandResult(command.line, command.raw, False, "",
                                   error=f"{type(exc).__name__}: {exc}")
        self.transcript.append(result)
        return result

    # -- helpers --

    def _require_target(self) -> ControlClient:
        if self._target is None:
            raise SlcaError("no composite selected; 'composite new <name>' "
                            "or 'use <composite>' first")
        return self._target

    def _local_composite(self) -> Composite:
        composite = self.runtime.composites.get(self._target_name or "")
        if composite is None:
            raise SlcaError("this command needs a locally created composite")
        return composite

    def drain_watch_events(self) -> List[str]:
        events, self._watch_events = self._watch_events, []
        return events

    # -- command implementations --

    def _dispatch(self, cmd: Command) -> Tuple[str, Any]:
        args = [t.text for t in cmd.args]
        if cmd.name == "discover":
            sightings = self.runtime.node.known_sightings(args[0])
            found = {s.service_uid for s in sightings}
            for desc in self.runtime.node.search(args[0]):
                found.add(desc.service_uid)
            listing = sorted(found)
            lines = [f"{len(listing)} services"] + listing
            return "\n".join(lines), listing
        if cmd.name == "describe":
            doc = self.runtime.node.describe(args[0]).to_doc()
            return json.dumps(doc, indent=2, sort_keys=True), doc
        if cmd.name == "composite":
            composite = self.runtime.create_composite(args[1])
            self._target_name = args[1]
            self._target = ControlClient(self.runtime.node, composite.control_uid)
            return f"composite {args[1]} control={composite.control_uid}", \
                composite.control_uid
        if cmd.name == "use":
            uid = self.runtime.resolve_control_uid(args[0])
            self._target_name = args[0]
            self._target = ControlClient(self.runtime.node, uid)
            return f"using {uid}", uid
        if cmd.name == "type":
            self._require_target().add_type(args[1])
            return f"type {args[1]} loaded", None
        if cmd.name == "inst":
            properties = {}
            for raw in args[2:]:
                key, _, value = raw.partition("=")
                properties[key] = _parse_literal(value)
            self._require_target().add_instance(args[0], args[1], properties)
            return f"instance {args[1]} of {args[0]}", None
        if cmd.name == "bind":
            targets = args[1].split(",")
            binding_id = self._require_target().add_binding(args[0], targets)
            return f"binding {binding_id}", binding_id
        if cmd.name == "unbind":
            self._require_target().remove_binding(args[0])
            return f"binding {args[0]} removed", None
        if cmd.name == "probe":
            signature = _parse_signature(cmd.args[2], cmd.line)
            probe = self._local_composite().add_probe(args[0], args[1], signature)
            return f"probe {probe.probe_instance_id}", probe.probe_instance_id
        if cmd.name == "adapt":
            target = self._require_target()
            if args[0] == "begin":
                target.begin_adaptation()
            else:
                target.commit_adaptation()
            return f"adaptation {args[0]}", None
        if cmd.name == "invoke":
            ref, _, method = args[0].rpartition(".")
            values = [_parse_literal(a) for a in args[1:]]
            returns = self.runtime.node.invoke(ref, method, values)
            return f"returns {json.dumps(returns, default=str)}", returns
        if cmd.name == "watch":
            self.runtime.node.watch(
                args[0],
                lambda s: self._watch_events.append(f"found {s.service_uid}"),
                lambda uid: self._watch_events.append(f"lost {uid}"))
            return f"watching {args[0]}", None
        if cmd.name == "bench":
            return self._run_bench(args)
        if cmd.name == "run":
            script = parse_scenario(Path(args[0]))
            if self.runtime.fleet is None:
                raise SlcaError("scenarios need the loopback transport")
            log = run_scenario(self.runtime.fleet, script)
            return f"scenario ok, {len(log.entries)} log entries", log
        raise SlcaError(f"command {cmd.name} not implemented")

    def _run_bench(self, args: List[str]) -> Tuple[str, Any]:
        params: Dict[str, str] = {}
        for raw in args[1:]:
            key, _, value = raw.partition("=")
            params[key] = value
        name = args[0]
        if name == "creation":
            report = bench_component_creation(int(params.get("n", 1000)))
        elif name == "probes":
            report = bench_probe_addition(int(params.get("n", 40)),
                                          params.get("mode", "immediate"))
        else:
            report = bench_proxy_generation(runs=int(params.get("runs", 100)))
        out = params.get("out") or self.report_dir
        lines = [render_table(report)]
        if out:
            paths = write_report(report, Path(out))
            lines.append("wrote " + ", ".join(str(p) for p in paths))
        return "\n".join(lines), report
