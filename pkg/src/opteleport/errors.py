"""Exception hierarchy for opteleport."""


class OpteleportError(Exception):
    """Base class for all library errors."""


class DimensionError(OpteleportError):
    """Shapes or tensor-leg dimensions do not match."""


class ConnectednessError(OpteleportError):
    """Operation requires a connected inclusion (trivial joint centre)."""


class TraceError(OpteleportError):
    """Functional is not a faithful tracial state where one is required."""


class StructureError(OpteleportError):
    """Block-structure data failed an exactness gate (non-integer ranks etc.)."""


class MarkovError(OpteleportError):
    """Trace extension to the basic construction is inconsistent or non-Markov."""


class NormaliserError(OpteleportError):
    """Unitary does not normalise the subalgebra."""


class PreconditionError(OpteleportError):
    """Caller-supplied data violates a stated precondition."""


class NotScalarError(OpteleportError):
    """A map expected to act as a scalar on a central block does not."""


class SchemeError(OpteleportError):
    """Teleportation scheme violates a structural clause (POVM, UCP, ...)."""


class HypothesisError(OpteleportError):
    """Inclusion fails a theorem hypothesis gate (e.g. trace restriction)."""


class ExtractionError(OpteleportError):
    """Scheme data could not be extracted / round-trip failed."""


class ColouringError(OpteleportError):
    """Colouring data is not a PVM in the required algebra."""


class CertificateError(OpteleportError):
    """Certificate arithmetic failed (non-projection bound witnesses)."""


class InternalError(OpteleportError):
    """An identity the theory guarantees failed numerically; indicates a bug."""
