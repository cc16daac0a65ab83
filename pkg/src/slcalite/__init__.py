"""Event-based composition runtime for services-for-devices.

Layers, bottom up:

* kernel     - in-process lightweight component assemblies (ports,
               properties, bindings, deterministic synchronous dispatch)
* bus        - decentralized discovery with leases, remote invocation and
               publish/subscribe eventing over the slca-lite/1 protocol
* proxy      - discovered services projected into assemblies as components
* composite  - containers exported back to the bus through a dynamic
               functional interface (probes) and a fixed control interface
* devsim     - simulated device fleet, scenario scripts, benchmark harness
* console / gateway / cli - operator surfaces
"""

from .clock import Clock, MockClock, RealClock
from .config import NodeConfig
from .kernel import (
    AssemblyGraph, Binding, ComponentBehavior, ComponentContext,
    ComponentInstance, ComponentKind, ComponentTypeDescriptor, Container,
    DispatchTrace, Endpoint, PortDirection, PortSpec, PropertySpec,
    make_sequence_descriptor,
)
from .bus import (
    BusNode, CallResult, ServiceHandler, ServiceSighting, Subscription,
    WatchHandle,
)
from .composite import (
    Composite, CompositeManifest, ControlClient, ProbeBinding, TypeLibrary,
    compose_hierarchy, create_composite,
)
from .proxy import (
    DisappearancePolicy, ProxySupervisor, ProxyTypeMapping,
    generate_proxy_type, instantiate_proxy, on_service_lost,
    rebind_compatible,
)
from .transport import LoopbackHub, UdpTcpBinding
from .values import ValueKind
from .wire import (
    DiscoveryMessage, MessageKind, MethodSpec, ServiceDescription,
    kind_matches,
)
from . import errors

__version__ = "0.1.0"
