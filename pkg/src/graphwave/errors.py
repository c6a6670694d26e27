"""Exception types raised across the package."""


class GraphWaveError(Exception):
    """Base class for all graphwave errors."""


class InvalidNetwork(GraphWaveError):
    """Network description violates a structural invariant."""


class DisconnectedGraph(InvalidNetwork):
    """The metric graph is not connected."""


class CycleInTreeMode(InvalidNetwork):
    """A cycle was found while building a graph in tree mode."""


class BadRootDegree(InvalidNetwork):
    """The designated root is missing, duplicated, or not of degree 1."""


class SelfLoop(InvalidNetwork):
    """An edge has identical endpoints."""


class NonpositiveLength(InvalidNetwork):
    """An edge has length <= 0."""


class UnknownVertex(GraphWaveError):
    """A vertex id does not exist in the graph."""


class InvalidDampingProfile(GraphWaveError):
    """A damping coefficient violates admissibility (sign, domain, pieces)."""


class OutOfDomain(GraphWaveError):
    """Evaluation point lies outside [0, length]."""


class ResolutionTooCoarse(GraphWaveError):
    """Fewer than 2 cells requested on some edge."""


class QuadratureDegreeOverflow(GraphWaveError):
    """Damping polynomial degree exceeds the supported quadrature order."""


class SingularMass(GraphWaveError):
    """Mass matrix factorization failed; signals an assembly bug."""


class IncompatibleInitialData(GraphWaveError):
    """Initial displacement violates Dirichlet or vertex-continuity conditions."""


class LinearSolveFailure(GraphWaveError):
    """An implicit time step could not be solved."""


class WindowTooShort(GraphWaveError):
    """Fit window contains too few samples."""


class EnergyUnderflow(GraphWaveError):
    """Too few samples above the round-off energy floor inside the fit window."""


class DenseThresholdExceeded(GraphWaveError):
    """System too large for the dense eigensolver path."""


class EigensolverFailure(GraphWaveError):
    """Eigenvalue computation failed or residual certification failed."""


class SingularShift(GraphWaveError):
    """i*beta coincides with an eigenvalue (undamped misuse)."""


class BandTooNarrow(GraphWaveError):
    """Resolvent scan band spans less than one decade."""


class ResolvedBandExceeded(GraphWaveError):
    """Requested beta exceeds the mesh's resolved frequency band."""


class SpecFormatError(GraphWaveError):
    """Network spec file failed to parse or to validate against the schema."""
