"""Exception taxonomy for the toolkit.

Every failure mode raised by the library derives from ToolkitError so callers
can catch one base class at the CLI boundary.
"""


class ToolkitError(Exception):
    """Base class for all toolkit errors."""


class InvalidDomain(ToolkitError):
    """Grid endpoints or point count do not describe a valid domain."""


class DomainMismatch(ToolkitError):
    """Grid does not match the domain an analytic spectrum requires."""


class ConvergenceFailure(ToolkitError):
    """Eigensolver failed, or its preconditions make a solve impossible."""


class NodeCountMismatch(ToolkitError):
    """A state's interior sign changes contradict its index (grid too coarse)."""


class OutOfDomain(ToolkitError):
    """Evaluation point lies outside the grid."""


class NonFinite(ToolkitError):
    """A quadrature sample was inf or nan (singular integrand in range)."""


class NodeInPath(ToolkitError):
    """An integration or evaluation path crosses a node of the reference state."""


class DegenerateEnergies(ToolkitError):
    """Two energies coincide within tolerance where a gap is required."""


class NotANode(ToolkitError):
    """Supplied location is not a node of the reference state."""


class NotAnExtremum(ToolkitError):
    """Supplied location is not an extremum of the reference state."""


class CoincidentPoints(ToolkitError):
    """Two evaluation points that must differ coincide."""


class InsufficientStates(ToolkitError):
    """A truncated sum needs more states than the spectrum can provide."""


class SingularAtWall(ToolkitError):
    """Partner-potential evaluation requested at the wall, where it diverges."""


class ConfigError(ToolkitError):
    """Run configuration could not be parsed or validated."""
