"""
Exception hierarchy shared by the library, the CLI and the HTTP layer
"""
from typing import Any, Dict, Optional


class WHGravError(Exception):
    """Base error; carries the CLI exit code and structured details"""

    exit_code = 3
    http_status = 422

    def __init__(self, message: str, details: Optional[Dict[str, Any]] = None):
        super().__init__(message)
        self.message = message
        self.details = details or {}

    def to_dict(self) -> Dict[str, Any]:
        """Convert to a JSON-serializable dictionary"""
        return {
            'error': type(self).__name__,
            'message': self.message,
            'exit_code': self.exit_code,
            'details': self.details,
        }


class ConfigurationError(WHGravError):
    """Invalid settings, arguments or node counts"""
    exit_code = 2
    http_status = 400


class MonodromyParseError(ConfigurationError):
    """Monodromy document does not conform to the schema"""

    def __init__(self, message: str, path: str = '$'):
        super().__init__(f"{path}: {message}", {'path': path})
        self.path = path


class DomainError(WHGravError):
    """Argument outside the domain of an operation"""


class GeometryError(WHGravError):
    """Contour construction produced an inadmissible curve"""


class InadmissibleContourError(WHGravError):
    """A monodromy singularity or a deformation root lies on the contour"""


class ZeroOnContourError(WHGravError):
    """Boundary samples vanish at a node"""


class ResolutionError(WHGravError):
    """Phase unwrapping needs more nodes than allowed"""


class NoCanonicalFactorizationError(WHGravError):
    """Nonzero winding index: only a partial-indices factorization exists"""

    def __init__(self, index: int, channel: Optional[int] = None):
        details = {'index': int(index)}
        if channel is not None:
            details['channel'] = channel
        super().__init__(f"no canonical factorization: winding index {index}", details)
        self.index = int(index)


class BranchPointError(WHGravError):
    """Spectral parameter at a branch point of the root functions"""


class BranchCrossingError(WHGravError):
    """Root continuation over a grid meets the branch locus"""


class SingularDerivativeError(WHGravError):
    """Root derivative requested at a fixed point of the involution"""


class ContourMismatchError(WHGravError):
    """Group operation on solutions defined on different contours"""


class EvaluationError(WHGravError):
    """Channel evaluated at one of its poles"""

    def __init__(self, message: str, pole: complex):
        super().__init__(message, {'pole': [pole.real, pole.imag]})
        self.pole = pole


class TaylorConditioningError(WHGravError):
    """Taylor coefficients at the origin cannot be extracted reliably"""


class NotCosetRepresentativeError(WHGravError):
    """2x2 solution is not symmetric with unit determinant"""


class UnreachableExponentsError(WHGravError):
    """Kasner exponents outside the deformed family"""


class VerificationFailure(WHGravError):
    """At least one verification check exceeded its tolerance"""
    exit_code = 1
    http_status = 200
