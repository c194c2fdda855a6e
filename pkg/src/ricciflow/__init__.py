"""Normalized Ricci flow on closed intrinsic triangulated surfaces.

Evolves conformal metrics on negative-Euler-characteristic surfaces to
constant curvature, tracks Laplacian eigenvalues along the way, and verifies
the curvature barrier, the eigenvalue lower bound, the ratio comparison, and
the sharp upper bounds with machine-checkable verdicts.
"""

__version__ = "0.1.0"

from .errors import (
    ChiSignError,
    DegenerateFaceError,
    EigenSolveError,
    MeshExportError,
    MeshGenerationError,
    MeshParseError,
    NonManifoldMeshError,
    NotConvergedError,
    OrientationError,
    RicciFlowError,
    StepRejected,
    StepUnderflowError,
    TraceFormatError,
)
from .mesh import (
    IntrinsicMesh,
    MeshValidationReport,
    euler_characteristic,
    generate_genus2,
    mesh_from_coordinates,
    mesh_from_faces,
    require_valid,
    subdivide,
    validate_mesh,
)
from .geometry import (
    BACKEND,
    CurvatureField,
    MetricState,
    corner_angles,
    cotan_weights,
    curvature_field,
    effective_lengths,
    triangle_area,
)
from .flow import FlowConfig, FlowSnapshot, FlowTrace, average_scalar, flow_step, run_flow
from .spectrum import (
    EigenTrack,
    SpectrumSlice,
    assemble_operators,
    build_tracks,
    eigenvalue_time_derivative,
    smallest_eigenpairs,
    track_eigenpairs,
)
from .bounds import (
    BarrierCheck,
    BarrierParams,
    EigenBoundCheck,
    TheoremReport,
    barrier_s,
    barrier_s_oracle,
    check_eigen_bound,
    check_max_principle,
    check_theorems,
    lower_bound_B,
)
from .records import RunRecord, TrackRecord, summarize_run
from .meshio import load_mesh, read_manifest, write_mesh_json, write_off

__all__ = [name for name in dir() if not name.startswith("_")]
