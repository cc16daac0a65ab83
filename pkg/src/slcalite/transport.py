"""Transports: a deterministic in-process loopback and a UDP/TCP stack.

Both present the same surface to a bus node: a multicast-style discovery
channel plus unicast request/response exchanges against endpoints. The
loopback hub delivers everything synchronously, never reorders, and keeps
an exact log of every message, which is what the message-count laws are
asserted against. The real transport uses UDP multicast datagrams for
discovery and one-shot TCP exchanges (single line of canonical JSON each
way) for invocation, eventing and description fetch.
"""

from __future__ import annotations

import socket
import struct
import threading
from dataclasses import dataclass
from typing import Callable, Dict, List, Optional

from . import wire
from .config import NodeConfig
from .errors import ServiceUnavailable

DiscoveryHandler = Callable[[dict, "ReplyContext"], None]
RequestHandler = Callable[[dict], dict]


@dataclass(frozen=True)
class MessageRecord:
    index: int
    sender: str
    channel: str      # "discovery" | "request" | "response"
    kind: str         # discovery kind or request type
    doc: dict
    unicast_to: str = ""


class ReplyContext:
    """Where a unicast discovery reply (RESPONSE) should go."""

    def __init__(self, send: Callable[[dict], None], origin: str = ""):
        self._send = send
        self.origin = origin

    def reply(self, doc: dict) -> None:
        self._send(doc)


class TransportBinding:
    """One node's attachment to a transport."""

    endpoint: str = ""
    node_name: str = ""

    def send_discovery(self, doc: dict) -> None:
        raise NotImplementedError

    def request(self, endpoint: str, doc: dict) -> dict:
        raise NotImplementedError

    def close(self) -> None:
        raise NotImplementedError


# --- loopback ---------------------------------------------------------------

class LoopbackHub:
    """In-process network. All attached bindings see all discovery traffic."""

    def __init__(self):
        self._bindings: Dict[str, "LoopbackBinding"] = {}
        self._log: List[MessageRecord] = []
        self._lock = threading.RLock()

    def attach(self, node_name: str,
               on_discovery: DiscoveryHandler,
               on_request: RequestHandler) -> "LoopbackBinding":
        with self._lock:
            if node_name in self._bindings:
                raise ValueError(f"node name {node_name!r} already attached")
            binding = LoopbackBinding(self, node_name, on_discovery, on_request)
            self._bindings[node_name] = binding
            return binding

    def detach(self, node_name: str) -> None:
        with self._lock:
            self._bindings.pop(node_name, None)

    # -- traffic --

    def _broadcast(self, sender: str, doc: dict) -> None:
        self._record(sender, "discovery", doc.get("kind", "?"), doc)
        for binding in self._targets():
            # replies from this receiver go back to the original sender
            ctx = ReplyContext(lambda d, frm=binding.node_name, to=sender:
                               self._unicast(frm, to, d), origin=sender)
            binding._on_discovery(doc, ctx)

    def _unicast(self, sender: str, to: str, doc: dict) -> None:
        self._record(sender, "discovery", doc.get("kind", "?"), doc, unicast_to=to)
        with self._lock:
            binding = self._bindings.get(to)
        if binding is not None:
            binding._on_discovery(doc, ReplyContext(lambda d: None, origin=sender))

    def _request(self, sender: str, endpoint: str, doc: dict) -> dict:
        target = None
        with self._lock:
            for binding in self._bindings.values():
                if binding.endpoint == endpoint:
                    target = binding
                    break
        if target is None:
            raise ServiceUnavailable(f"no endpoint {endpoint!r}")
        self._record(sender, "request", doc.get("type", "?"), doc, unicast_to=target.node_name)
        response = target._on_request(doc)
        self._record(target.node_name, "response", response.get("type", "?"),
                     response, unicast_to=sender)
        return response

    def _targets(self) -> List["LoopbackBinding"]:
        with self._lock:
            return list(self._bindings.values())

    def _record(self, sender: str, channel: str, kind: str, doc: dict,
                unicast_to: str = "") -> None:
        with self._lock:
            self._log.append(MessageRecord(len(self._log), sender, channel,
                                           kind, doc, unicast_to))

    # -- accounting --

    def mark(self) -> int:
        with self._lock:
            return len(self._log)

    def since(self, mark: int = 0, channel: Optional[str] = None) -> List[MessageRecord]:
        with self._lock:
            records = self._log[mark:]
        if channel is not None:
            records = [r for r in records if r.channel == channel]
        return records

    def discovery_counts(self, mark: int = 0) -> Dict[str, int]:
        counts: Dict[str, int] = {}
        for record in self.since(mark, channel="discovery"):
            counts[record.kind] = counts.get(record.kind, 0) + 1
        return counts

    def discovery_total(self, mark: int = 0) -> int:
        return len(self.since(mark, channel="discovery"))

    @property
    def log(self) -> List[MessageRecord]:
        with self._lock:
            return list(self._log)


class LoopbackBinding(TransportBinding):
    def __init__(self, hub: LoopbackHub, node_name: str,
                 on_discovery: DiscoveryHandler, on_request: RequestHandler):
        self._hub = hub
        self.node_name = node_name
        self.endpoint = f"loop://{node_name}"
        self._on_discovery = on_discovery
        self._on_request = on_request

    def send_discovery(self, doc: dict) -> None:
        self._hub._broadcast(self.node_name, doc)

    def request(self, endpoint: str, doc: dict) -> dict:
        return self._hub._request(self.node_name, endpoint, doc)

    def close(self) -> None:
        self._hub.detach(self.node_name)


# --- UDP multicast + TCP ------------------------------------------------------

class UdpTcpBinding(TransportBinding):
    """Real transport: UDP multicast discovery, one-shot TCP exchanges."""

    def __init__(self, node_name: str, config: NodeConfig,
                 on_discovery: DiscoveryHandler, on_request: RequestHandler):
        self.node_name = node_name
        self._config = config
        self._on_discovery = on_discovery
        self._on_request = on_request
        self._closed = threading.Event()

        self._tcp = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
        self._tcp.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
        self._tcp.bind((config.tcp_host, config.tcp_port))
        self._tcp.listen(32)
        host, port = self._tcp.getsockname()
        self.endpoint = f"tcp://{host}:{port}"

        group = config.multicast_group
        iface = config.tcp_host
        self._udp_addr = (group, config.multicast_port)
        self._udp = socket.socket(socket.AF_INET, socket.SOCK_DGRAM)
        self._udp.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
        if hasattr(socket, "SO_REUSEPORT"):  # several nodes per host
            self._udp.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEPORT, 1)
        self._udp.bind(("", config.multicast_port))
        mreq = struct.pack("4s4s", socket.inet_aton(group), socket.inet_aton(iface))
        self._udp.setsockopt(socket.IPPROTO_IP, socket.IP_ADD_MEMBERSHIP, mreq)
        self._udp.settimeout(0.25)

        # searches go out from an ephemeral port; unicast replies come back
        # to it, so it gets its own listener
        self._udp_send = socket.socket(socket.AF_INET, socket.SOCK_DGRAM)
        self._udp_send.setsockopt(socket.IPPROTO_IP, socket.IP_MULTICAST_IF,
                                  socket.inet_aton(iface))
        self._udp_send.setsockopt(socket.IPPROTO_IP, socket.IP_MULTICAST_LOOP, 1)
        self._udp_send.bind((iface, 0))
        self._udp_send.settimeout(0.25)

        self._threads = [
            threading.Thread(target=self._udp_loop, args=(self._udp,),
                             name=f"{node_name}-udp", daemon=True),
            threading.Thread(target=self._udp_loop, args=(self._udp_send,),
                             name=f"{node_name}-udp-replies", daemon=True),
            threading.Thread(target=self._tcp_loop, name=f"{node_name}-tcp", daemon=True),
        ]
        for t in self._threads:
            t.start()

    def send_discovery(self, doc: dict) -> None:
        self._udp_send.sendto(wire.encode(doc), self._udp_addr)

    def request(self, endpoint: str, doc: dict) -> dict:
        host, port = _parse_tcp_endpoint(endpoint)
        try:
            with socket.create_connection((host, port), timeout=5.0) as conn:
                conn.sendall(wire.encode(doc) + b"\n")
                data = _read_line(conn)
        except OSError as exc:
            raise ServiceUnavailable(f"endpoint {endpoint} unreachable: {exc}") from exc
        return wire.decode(data)

    def close(self) -> None:
        self._closed.set()
        for sock in (self._udp, self._udp_send, self._tcp):
            try:
                sock.close()
            except OSError:
                pass

    # -- loops --

    def _udp_loop(self, sock: socket.socket) -> None:
        while not self._closed.is_set():
            try:
                data, addr = sock.recvfrom(65536)
            except socket.timeout:
                continue
            except OSError:
                return
            try:
                doc = wire.decode(data)
            except ValueError:
                continue
            ctx = ReplyContext(lambda d, a=addr: self._udp_send.sendto(wire.encode(d), a),
                               origin=f"{addr[0]}:{addr[1]}")
            self._on_discovery(doc, ctx)

    def _tcp_loop(self) -> None:
        while not self._closed.is_set():
            try:
                conn, _ = self._tcp.accept()
            except OSError:
                return
            threading.Thread(target=self._serve_conn, args=(conn,), daemon=True).start()

    def _serve_conn(self, conn: socket.socket) -> None:
        try:
            with conn:
                data = _read_line(conn)
                doc = wire.decode(data)
                response = self._on_request(doc)
                conn.sendall(wire.encode(response) + b"\n")
        except (OSError, ValueError):
            pass


def _parse_tcp_endpoint(endpoint: str):
    if not endpoint.startswith("tcp://"):
        raise ServiceUnavailable(f"endpoint {endpoint!r} is not tcp://")
    host, _, port = endpoint[len("tcp://"):].partition(":")
    return host, int(port)


def _read_line(conn: socket.socket) -> bytes:
    chunks = []
    while True:
        chunk = conn.recv(4096)
        if not chunk:
            break
        chunks.append(chunk)
        if b"\n" in chunk:
            break
    data = b"".join(chunks)
    line, _, _ = data.partition(b"\n")
    if not line:
        raise OSError("connection closed before a full line arrived")
    return line
