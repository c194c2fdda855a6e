"""Curvature fields, cotangent weights, and conformal metric states.

The per-face kernels (angles, areas, cotangents) live in a compiled
extension with a pure-numpy fallback; the active backend is chosen once at
import time.  Set ``RICCIFLOW_PURE=1`` to force the fallback.
"""

import os
from dataclasses import dataclass, replace

import numpy as np

from . import _purecore
from .errors import DegenerateFaceError
from .mesh import TAU, triangle_slacks

if os.environ.get("RICCIFLOW_PURE", "") not in ("", "0"):
    _core = _purecore
else:
    try:
        from . import _fastcore as _core
    except ImportError:  # pragma: no cover - build-environment dependent
        _core = _purecore

BACKEND = _core.BACKEND_NAME


@dataclass(frozen=True)
class MetricState:
    """Per-vertex conformal factors and the flow time they belong to.

    The effective metric is l_e = exp((u_i + u_j)/2) * l0_e; u = 0 is the
    reference metric.
    """

    u: np.ndarray
    t: float = 0.0

    def __post_init__(self):
        u = np.ascontiguousarray(self.u, dtype=np.float64)
        u.setflags(write=False)
        object.__setattr__(self, "u", u)
        object.__setattr__(self, "t", float(self.t))

    @classmethod
    def initial(cls, mesh):
        return cls(np.zeros(mesh.vertex_count), 0.0)

    def shifted(self, du, dt=0.0):
        return replace(self, u=self.u + du, t=self.t + dt)


@dataclass(frozen=True)
class CurvatureField:
    """Vertex curvature data of one metric state.

    deficit : angle deficits K_i (radians)
    area : barycentric lumped areas A_i (one third of incident face areas)
    gauss : K_i / A_i
    scalar : 2 * gauss
    volume : total surface area
    average_scalar : 4*pi*chi / volume
    min_gauss : smallest vertex Gauss curvature
    """

    deficit: np.ndarray
    area: np.ndarray
    gauss: np.ndarray
    scalar: np.ndarray
    volume: float
    average_scalar: float
    min_gauss: float

    @property
    def max_gauss(self):
        return float(self.gauss.max())


def effective_lengths(mesh, state):
    """Edge lengths of the conformally deformed metric."""
    u = state.u
    e = mesh.edges
    return np.exp(0.5 * (u[e[:, 0]] + u[e[:, 1]])) * mesh.lengths0


def corner_angles(a, b, c):
    """Angles of the triangle with sides (a, b, c), opposite each side."""
    ell = np.array([[a, b, c]], dtype=np.float64)
    if triangle_slacks(ell)[0] <= 0.0:
        raise DegenerateFaceError(0, f"sides ({a}, {b}, {c}) are degenerate")
    angles, _, _ = _core.face_geometry(ell)
    return tuple(float(x) for x in angles[0])


def triangle_area(a, b, c):
    """Area of the triangle with sides (a, b, c) (stable Heron form)."""
    ell = np.array([[a, b, c]], dtype=np.float64)
    if triangle_slacks(ell)[0] <= 0.0:
        raise DegenerateFaceError(0, f"sides ({a}, {b}, {c}) are degenerate")
    _, area, _ = _core.face_geometry(ell)
    return float(area[0])


class FacePass:
    """One full kernel evaluation of a (mesh, state) pair.

    Bundles everything the flow needs per step so that curvature fields and
    operator assembly share a single pass.
    """

    __slots__ = ("ell", "angles", "areas", "cots", "angle_sum", "area_sum")

    def __init__(self, mesh, state):
        ell = effective_lengths(mesh, state)[mesh.face_edges]
        slack = triangle_slacks(ell)
        worst = int(np.argmin(slack))
        if not slack[worst] > 0.0:
            raise DegenerateFaceError(
                worst,
                f"face {worst} violates the triangle inequality at t={state.t:g}",
            )
        self.ell = ell
        self.angles, self.areas, self.cots = _core.face_geometry(ell)
        self.angle_sum, self.area_sum = _core.vertex_sums(
            mesh.faces, self.angles, self.areas, mesh.vertex_count
        )


def curvature_field(mesh, state, face_pass=None):
    """Angle deficits, lumped areas, and curvatures of a metric state.

    Raises ``DegenerateFaceError`` (with the offending face) when the state
    breaks a triangle inequality.
    """
    fp = face_pass if face_pass is not None else FacePass(mesh, state)
    deficit = TAU - fp.angle_sum
    area = fp.area_sum / 3.0
    gauss = deficit / area
    volume = float(fp.areas.sum())
    avg = 2.0 * TAU * mesh.euler_characteristic / volume
    return CurvatureField(
        deficit=deficit,
        area=area,
        gauss=gauss,
        scalar=2.0 * gauss,
        volume=volume,
        average_scalar=avg,
        min_gauss=float(gauss.min()),
    )


def cotan_weights(mesh, state, face_pass=None):
    """Per-edge cotangent weights w_e = (cot theta_1 + cot theta_2) / 2."""
    fp = face_pass if face_pass is not None else FacePass(mesh, state)
    return _core.edge_cot_weights(mesh.face_edges, fp.cots, mesh.edge_count)
