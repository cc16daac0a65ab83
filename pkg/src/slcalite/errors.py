"""Exception hierarchy for the runtime.

Every error that can cross the wire is identified by its class name; the
invocation layer marshals handler-side errors into faults carrying that
name, and the client re-raises them (see RemoteFault).
"""


class SlcaError(Exception):
    """Base class for all runtime errors."""


# --- component kernel ------------------------------------------------------

class KernelError(SlcaError):
    pass


class MalformedDescriptor(KernelError):
    pass


class DuplicateTypeId(KernelError):
    pass


class UnknownTypeId(KernelError):
    pass


class DuplicateInstanceId(KernelError):
    pass


class UnknownInstanceId(KernelError):
    pass


class DuplicateBindingId(KernelError):
    pass


class MalformedBinding(KernelError):
    pass


class UnknownBindingId(KernelError):
    pass


class UnknownEndpoint(KernelError):
    pass


class TypeMismatch(KernelError):
    pass


class PayloadTypeError(KernelError):
    pass


class UnknownProperty(KernelError):
    pass


class BadPropertyValue(KernelError):
    pass


class CycleLimitExceeded(KernelError):
    """Dispatch cascade exceeded the configured frame limit."""


# --- service bus -----------------------------------------------------------

class BusError(SlcaError):
    pass


class DuplicateServiceUid(BusError):
    pass


class UnknownServiceUid(BusError):
    pass


class ServiceUnavailable(BusError):
    pass


class MethodNotFound(BusError):
    pass


class ArgumentError(BusError):
    pass


class UnknownVariable(BusError):
    pass


class UnknownSubscription(BusError):
    pass


class RemoteFault(BusError):
    """A fault raised on the remote side, carrying the inner error name."""

    def __init__(self, name: str, detail: str = ""):
        super().__init__(f"{name}: {detail}" if detail else name)
        self.name = name
        self.detail = detail


# --- proxy generation ------------------------------------------------------

class ProxyError(SlcaError):
    pass


class MalformedDescription(ProxyError):
    pass


class ProxyFrozen(ProxyError):
    """Call on a frozen proxy; fails fast instead of queueing."""


# --- composite services ----------------------------------------------------

class CompositeError(SlcaError):
    pass


class DuplicateExportName(CompositeError):
    pass


class NoOpenAdaptation(CompositeError):
    pass


# --- console / gateway / simulator -----------------------------------------

class ParseError(SlcaError):
    def __init__(self, message: str, line: int = 0, column: int = 0):
        super().__init__(f"line {line}, col {column}: {message}" if line else message)
        self.line = line
        self.column = column


class BindFailure(SlcaError):
    pass


class AssertionFailed(SlcaError):
    pass


#: Protocol-level faults re-raised as their typed local class; anything the
#: remote handler raised beyond these surfaces as RemoteFault(inner name).
PROTOCOL_ERRORS = {
    cls.__name__: cls
    for cls in (
        ServiceUnavailable, MethodNotFound, ArgumentError, UnknownVariable,
        UnknownSubscription, DuplicateServiceUid, UnknownServiceUid,
    )
}


def fault_name(exc: BaseException) -> str:
    """Wire name for an exception (class name, or RemoteFault's inner name)."""
    if isinstance(exc, RemoteFault):
        return exc.name
    return type(exc).__name__


def raise_fault(name: str, detail: str = ""):
    """Re-raise a wire fault locally, keeping protocol errors typed."""
    cls = PROTOCOL_ERRORS.get(name)
    if cls is not None:
        raise cls(detail or name)
    raise RemoteFault(name, detail)
