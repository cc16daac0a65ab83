"""Command-line entry point: REPL, script runner and gateway server.

    slcalite                         interactive console (loopback node)
    slcalite --script build.slc      run a command script, print transcript
    slcalite --gateway 127.0.0.1:8750   serve the HTTP/WS gateway
    slcalite --json --script ...     machine-readable transcript
"""

from __future__ import annotations

import json
import sys
from pathlib import Path
from typing import Optional

import click

from .clock import MockClock, RealClock
from .config import NodeConfig
from .console import ConsoleSession, RuntimeNode
from .errors import ParseError
from .gateway import create_gateway_app
from .transport import LoopbackHub


def _build_runtime(config_path: Optional[str], transport: Optional[str],
                   clock_mode: str) -> RuntimeNode:
    config = NodeConfig.load(config_path)
    if transport:
        config.transport = transport
    clock = MockClock() if clock_mode == "mock" else RealClock()
    hub = LoopbackHub() if config.transport == "loopback" else None
    return RuntimeNode(config, clock=clock, hub=hub)


def _print_transcript(session: ConsoleSession, as_json: bool) -> int:
    failures = 0
    for result in session.transcript:
        if as_json:
            click.echo(json.dumps(result.to_doc(), sort_keys=True))
        else:
            prefix = "ok " if result.ok else "ERR"
            click.echo(f"[{prefix}] {result.command}")
            body = result.output if result.ok else result.error
            for line in body.splitlines():
                click.echo(f"      {line}")
        if not result.ok:
            failures += 1
    return failures


@click.command()
@click.option("--config", "config_path", type=click.Path(exists=True),
              default=None, help="JSON config file")
@click.option("--transport", type=click.Choice(["loopback", "udp"]),
              default=None, help="override the configured transport")
@click.option("--script", "script_path", type=click.Path(exists=True),
              default=None, help="run a command script and exit")
@click.option("--gateway", "gateway_addr", default=None,
              help="serve the HTTP/WS gateway on ADDR:PORT")
@click.option("--json", "as_json", is_flag=True,
              help="machine-readable transcript")
@click.option("--clock", "clock_mode", type=click.Choice(["real", "mock"]),
              default="real", help="mock clock makes loopback runs deterministic")
@click.option("--strict", is_flag=True, help="stop scripts on the first error")
@click.option("--reports", "report_dir", type=click.Path(), default="reports",
              help="default output directory for bench reports")
def main(config_path, transport, script_path, gateway_addr, as_json,
         clock_mode, strict, report_dir):
    """Operator console for runtime service composition."""
    runtime = _build_runtime(config_path, transport, clock_mode)
    session = ConsoleSession(runtime, strict=strict,
                             report_dir=Path(report_dir))
    try:
        if script_path:
            try:
                session.exec_script(Path(script_path).read_text())
            except ParseError as exc:
                click.echo(f"parse error: {exc}", err=True)
                sys.exit(2)
            failures = _print_transcript(session, as_json)
            sys.exit(1 if failures and strict else 0)
        if gateway_addr:
            _serve_gateway(runtime, gateway_addr)
            return
        _repl(session, as_json)
    finally:
        runtime.close()


def _repl(session: ConsoleSession, as_json: bool) -> None:
    click.echo("slcalite console; one command per line, ctrl-d to exit")
    line_no = 0
    while True:
        try:
            line = input("slca> ")
        except EOFError:
            click.echo("")
            return
        except KeyboardInterrupt:
            click.echo("")
            return
        line_no += 1
        try:
            result = session.exec_line(line, line_no)
        except ParseError as exc:
            click.echo(f"parse error: {exc}")
            continue
        if result is None:
            continue
        if as_json:
            click.echo(json.dumps(result.to_doc(), sort_keys=True))
        elif result.ok:
            click.echo(result.output)
        else:
            click.echo(f"error: {result.error}")
        for event in session.drain_watch_events():
            click.echo(f"* {event}")


def _serve_gateway(runtime: RuntimeNode, addr: str) -> None:
    import uvicorn

    host, _, port = addr.partition(":")
    static = Path(__file__).resolve().parents[2] / "frontend" / "dist"
    app = create_gateway_app(runtime, static_dir=static if static.is_dir() else None)
    try:
        uvicorn.run(app, host=host or "127.0.0.1", port=int(port or 8750),
                    log_level="warning")
    except OSError as exc:
        from .errors import BindFailure
        raise BindFailure(f"cannot serve gateway on {addr}: {exc}") from exc


if __name__ == "__main__":
    main()
