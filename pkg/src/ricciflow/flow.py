"""Normalized Ricci flow integration in conformal-factor form.

The flow du_i/dt = (r - R_i)/2 is stepped explicitly with an adaptive dt:
steps that break a triangle inequality are rejected and dt shrinks, dt grows
gently after successes, and growth is capped by a Gershgorin estimate of the
explicit-Euler stability limit of the curvature linearization.  Every
accepted step ends with an exact volume projection (a constant shift of u),
so the total area is pinned to its initial value and the average scalar
curvature r = 4*pi*chi/V is a constant of the run.
"""

import json
import math
from dataclasses import asdict, dataclass, field as dc_field

import numpy as np

from .errors import ChiSignError, StepRejected, StepUnderflowError
from .geometry import (
    FacePass,
    MetricState,
    _core,
    curvature_field,
    cotan_weights,
    effective_lengths,
)
from .mesh import TAU, triangle_slacks
from .spectrum import assemble_operators, smallest_eigenpairs

_CONFIG_FIELDS = None  # populated after FlowConfig definition


@dataclass(frozen=True)
class FlowConfig:
    """Adaptive stepping and snapshot parameters.

    The first seven fields form the JSON configuration schema (exact names);
    the remaining knobs have safe defaults and are optional in config files.
    ``stability_safety=None`` disables the stability cap, leaving rejection
    and shrinkage as the only dt control.
    """

    dt_init: float = 1e-3
    dt_min: float = 1e-12
    safety_shrink: float = 0.5
    convergence_tol: float = 1e-3
    max_steps: int = 50000
    snapshot_stride: int = 4
    eigen_count: int = 5
    dt_growth: float = 1.1
    stability_safety: float | None = 0.7
    eigen_maxiter: int | None = None
    eigen_buffer: int = 3
    overlap_floor: float = 0.5

    def __post_init__(self):
        if not self.dt_init > 0:
            raise ValueError("dt_init must be positive")
        if not 0 < self.dt_min < self.dt_init:
            raise ValueError("dt_min must satisfy 0 < dt_min < dt_init")
        if not 0 < self.safety_shrink < 1:
            raise ValueError("safety_shrink must lie in (0, 1)")
        if not self.convergence_tol > 0:
            raise ValueError("convergence_tol must be positive")
        if self.max_steps < 1:
            raise ValueError("max_steps must be >= 1")
        if self.snapshot_stride < 1:
            raise ValueError("snapshot_stride must be >= 1")
        if self.eigen_count < 0:
            raise ValueError("eigen_count must be >= 0")
        if self.eigen_buffer < 0:
            raise ValueError("eigen_buffer must be >= 0")
        if not self.dt_growth >= 1:
            raise ValueError("dt_growth must be >= 1")
        if self.stability_safety is not None and not 0 < self.stability_safety <= 1:
            raise ValueError("stability_safety must lie in (0, 1] or be null")

    @classmethod
    def from_dict(cls, data):
        unknown = set(data) - set(_CONFIG_FIELDS)
        if unknown:
            raise ValueError(f"unknown flow config fields: {sorted(unknown)}")
        return cls(**data)

    @classmethod
    def from_json(cls, text):
        return cls.from_dict(json.loads(text))

    def to_dict(self):
        return asdict(self)


_CONFIG_FIELDS = tuple(FlowConfig.__dataclass_fields__)


@dataclass(frozen=True)
class FlowSnapshot:
    state: MetricState
    curvature: object
    spectrum: object = None

    @property
    def t(self):
        return self.state.t


@dataclass
class FlowTrace:
    """Time series of one flow run.

    sigma is the minimum Gauss curvature at t=0 (the tightest admissible
    lower bound); r = 4*pi*chi/v0 is the run constant shared by every
    snapshot.
    """

    mesh: object
    config: FlowConfig
    snapshots: list = dc_field(default_factory=list)
    sigma: float = math.nan
    r: float = math.nan
    v0: float = math.nan
    converged: bool = False
    step_count: int = 0

    @property
    def initial(self):
        return self.snapshots[0]

    @property
    def final(self):
        return self.snapshots[-1]

    @property
    def slices(self):
        return [s.spectrum for s in self.snapshots if s.spectrum is not None]

    @property
    def times(self):
        return np.array([s.t for s in self.snapshots])


def average_scalar(curvature):
    """Average scalar curvature 4*pi*chi/V recovered from a curvature field.

    chi is recovered exactly from the deficit total (Gauss-Bonnet), so the
    value agrees with the volume-weighted mean of R to rounding.
    """
    volume = curvature.volume
    if not volume > 0:
        raise ValueError("curvature field has non-positive volume")
    chi = round(float(curvature.deficit.sum()) / TAU)
    return 2.0 * TAU * chi / volume


def flow_step(mesh, state, dt, volume_target=None, face_pass=None, curvature=None):
    """One explicit step u += dt*(r - R)/2 followed by exact volume projection.

    Raises ``StepRejected`` (carrying the first offending face) when the raw
    update breaks a triangle inequality; the caller is expected to shrink dt.
    ``volume_target`` defaults to the input state's volume, so a standalone
    step is volume-preserving; the driver pins it to the run's V(0).
    """
    if not dt > 0:
        raise ValueError("dt must be positive")
    fp = face_pass if face_pass is not None else FacePass(mesh, state)
    fld = curvature if curvature is not None else curvature_field(mesh, state, fp)

    du = 0.5 * dt * (fld.average_scalar - fld.scalar)
    raw = state.shifted(du, dt)
    # oversized proposals may overflow exp; non-finite slack means rejection
    with np.errstate(over="ignore", invalid="ignore"):
        ell = effective_lengths(mesh, raw)[mesh.face_edges]
        slack = triangle_slacks(ell)
    finite = np.isfinite(slack)
    if not finite.all():
        raise StepRejected(int(np.argmin(finite)), dt)
    worst = int(np.argmin(slack))
    if not slack[worst] > 0.0:
        raise StepRejected(worst, dt)

    target = fld.volume if volume_target is None else float(volume_target)
    v_new = float(_core.face_areas(ell).sum())
    shift = 0.5 * math.log(target / v_new)
    return raw.shifted(shift)


def _stability_cap(mesh, state, face_pass, fld, residual, config):
    """Gershgorin bound on the explicit-Euler stability limit.

    The curvature linearization is the generalized cotangent Laplacian, so
    its spectrum is bounded by row sums of |L| over lumped areas; the extra
    terms cover the zeroth-order curvature coupling.
    """
    if config.stability_safety is None:
        return math.inf
    w = cotan_weights(mesh, state, face_pass=face_pass)
    aw = np.abs(w)
    s = np.zeros(mesh.vertex_count)
    np.add.at(s, mesh.edges[:, 0], aw)
    np.add.at(s, mesh.edges[:, 1], aw)
    bound = float((2.0 * s / fld.area).max()) + 0.5 * residual + abs(fld.average_scalar)
    return 2.0 * config.stability_safety / bound


def run_flow(mesh, config=None):
    """Integrate the flow until max |R - r| <= convergence_tol * |r|.

    Requires chi(mesh) < 0 (the constant-curvature limit with r < 0).
    Snapshots (with spectra when eigen_count >= 1) are recorded at t=0,
    every ``snapshot_stride`` accepted steps, and at the final state.  On
    step-budget exhaustion the trace is returned with ``converged=False``;
    adaptive-dt underflow raises ``StepUnderflowError``.
    """
    if config is None:
        config = FlowConfig()
    if mesh.euler_characteristic >= 0:
        raise ChiSignError(
            f"flow requires chi < 0, got chi = {mesh.euler_characteristic}"
        )

    state = MetricState.initial(mesh)
    fp = FacePass(mesh, state)
    fld = curvature_field(mesh, state, fp)
    v0 = fld.volume
    r = fld.average_scalar
    tol_abs = config.convergence_tol * abs(r)

    trace = FlowTrace(mesh=mesh, config=config, sigma=fld.min_gauss, r=r, v0=v0)
    warm = None

    # extra pairs beyond eigen_count keep tracking robust through crossings
    # with modes just outside the exported window
    k_solve = min(
        config.eigen_count + config.eigen_buffer, mesh.vertex_count - 1
    )

    def record(state, fp, fld):
        nonlocal warm
        spec = None
        if config.eigen_count >= 1:
            L, M = assemble_operators(mesh, state, face_pass=fp)
            spec = smallest_eigenpairs(
                L, M, k_solve, t=state.t,
                warm_start=warm, maxiter=config.eigen_maxiter,
            )
            warm = spec.eigenvectors
        trace.snapshots.append(FlowSnapshot(state, fld, spec))

    record(state, fp, fld)
    residual = float(np.abs(fld.scalar - r).max())
    converged = residual <= tol_abs

    dt = config.dt_init
    accepted = 0
    since_snapshot = 0
    while not converged and accepted < config.max_steps:
        cap = _stability_cap(mesh, state, fp, fld, residual, config)
        dt_eff = min(dt, cap)
        try:
            state_new = flow_step(
                mesh, state, dt_eff,
                volume_target=v0, face_pass=fp, curvature=fld,
            )
        except StepRejected as rej:
            if dt_eff <= config.dt_min:
                raise StepUnderflowError(
                    rej.face_index, config.dt_min, state.t
                ) from rej
            dt = max(dt_eff * config.safety_shrink, config.dt_min)
            continue
        state = state_new
        fp = FacePass(mesh, state)
        fld = curvature_field(mesh, state, fp)
        accepted += 1
        since_snapshot += 1
        dt = dt_eff * config.dt_growth
        residual = float(np.abs(fld.scalar - r).max())
        converged = residual <= tol_abs
        if converged or since_snapshot >= config.snapshot_stride:
            record(state, fp, fld)
            since_snapshot = 0

    if trace.snapshots[-1].state is not state:
        record(state, fp, fld)
    trace.converged = bool(converged)
    trace.step_count = accepted
    return trace
