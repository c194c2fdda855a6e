"""Exception hierarchy shared across the package."""


class RicciFlowError(Exception):
    """Base class for all package errors."""


class MeshParseError(RicciFlowError):
    """Input file could not be parsed in the declared format."""


class NonManifoldMeshError(RicciFlowError):
    """An edge is incident to a number of faces other than two."""


class OrientationError(RicciFlowError):
    """Face orientations are inconsistent across a shared edge."""


class DegenerateFaceError(RicciFlowError):
    """A face violates the strict triangle inequality (or has a zero length).

    Carries the index of the first offending face.
    """

    def __init__(self, face_index, message=None):
        self.face_index = int(face_index)
        super().__init__(message or f"degenerate face {face_index}")


class MeshGenerationError(RicciFlowError):
    """Mesh generation could not produce an admissible mesh."""


class MeshExportError(RicciFlowError):
    """Mesh combinatorics cannot be represented in the requested format."""


class ChiSignError(RicciFlowError):
    """The flow requires a surface with negative Euler characteristic."""


class StepRejected(RicciFlowError):
    """A proposed flow step broke a triangle inequality; caller should shrink dt.

    Distinct from hard errors: carries the first offending face.
    """

    def __init__(self, face_index, dt):
        self.face_index = int(face_index)
        self.dt = float(dt)
        super().__init__(f"step dt={dt:g} rejected: face {face_index} degenerates")


class StepUnderflowError(RicciFlowError):
    """Adaptive dt fell below dt_min; carries the face that keeps rejecting."""

    def __init__(self, face_index, dt_min, t):
        self.face_index = int(face_index)
        self.dt_min = float(dt_min)
        self.t = float(t)
        super().__init__(
            f"dt underflow below {dt_min:g} at t={t:g} (face {face_index} rejects)"
        )


class EigenSolveError(RicciFlowError):
    """Eigenvalue solver failed to meet its residual contract or to converge."""


class NotConvergedError(RicciFlowError):
    """An operation requires a converged flow trace."""


class TraceFormatError(RicciFlowError):
    """A serialized run record is missing fields or malformed."""
