"""Comparison functions and verdicts for the curvature and eigenvalue bounds.

The scalar curvature of the normalized flow is bounded below by the
spatially constant solution of ds/dt = s(s - r), s(0) = 2*sigma, whose
closed form is s(t) = r / (1 - (1 - r/(2*sigma)) e^{rt}).  Integrating the
same comparison inside the eigenvalue-derivative quadrature yields the lower
bound B(t) = lambda(0) (r/(2*sigma)) / (1 - (1 - r/(2*sigma)) e^{rt}), whose
t -> infinity limit gives the sharp bound lambda(inf) >= lambda(0) r/(2*sigma)
and, rearranged, the ratio comparison lambda_g/kappa_g >= lambda_t/kappa_t
and the upper bounds on lambda_g.  Every check here works on a RunRecord, so
verdicts are identical for in-memory and reloaded traces.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import NotConvergedError, TraceFormatError

# Default tolerance factors, tied to the magnitudes they guard.
BARRIER_TOL_FACTOR = 1e-2     # absolute slack = factor * |r|
EIGEN_BOUND_SLACK = 1e-3      # multiplicative slack on B(t)
THEOREM_TOL_FACTOR = 1e-3     # tol = factor * |lambda_t| * |kappa_g/kappa_t|
VOLUME_HYPOTHESIS_RTOL = 1e-12

_SIGMA_CLAMP_RTOL = 1e-9


@dataclass(frozen=True)
class BarrierParams:
    """Constants of one comparison problem.

    r: average scalar curvature (negative); sigma: lower bound of the initial
    Gauss curvature (sigma <= r/2 < 0); lambda0: initial eigenvalue for the
    eigenvalue bound (unused by the curvature barrier).
    """

    r: float
    sigma: float
    lambda0: float = 1.0

    def __post_init__(self):
        if not self.r < 0:
            raise ValueError("r must be negative")
        if not self.sigma < 0:
            raise ValueError("sigma must be negative")
        if self.sigma > self.r / 2:
            # min Gauss <= r/2 holds mathematically; allow only rounding slack
            if self.sigma > self.r / 2 + _SIGMA_CLAMP_RTOL * abs(self.r):
                raise ValueError("sigma must not exceed r/2")
            object.__setattr__(self, "sigma", self.r / 2)
        if not self.lambda0 > 0:
            raise ValueError("lambda0 must be positive")

    @property
    def ratio(self):
        """r/(2*sigma), in (0, 1]."""
        return self.r / (2.0 * self.sigma)


def barrier_s(t, params):
    """Closed-form curvature barrier s(t); s(0) = 2*sigma, s(inf) = r."""
    t = np.asarray(t, dtype=np.float64)
    q = params.ratio
    out = params.r / (1.0 - (1.0 - q) * np.exp(params.r * t))
    return float(out) if out.ndim == 0 else out


def barrier_s_oracle(t, params, steps=2000):
    """Classical fixed-step RK4 integration of ds/dt = s(s - r), s(0)=2*sigma.

    Independent of the closed form; exists to validate ``barrier_s``.
    """
    if steps < 1000:
        raise ValueError("oracle requires at least 1000 steps")
    t = float(t)
    if t < 0:
        raise ValueError("t must be >= 0")
    r = params.r
    s = 2.0 * params.sigma
    if t == 0.0:
        return s
    h = t / steps

    def f(x):
        return x * (x - r)

    for _ in range(steps):
        k1 = f(s)
        k2 = f(s + 0.5 * h * k1)
        k3 = f(s + 0.5 * h * k2)
        k4 = f(s + h * k3)
        s = s + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    return s


def lower_bound_B(t, params):
    """Eigenvalue lower bound B(t) = lambda0 * (r/2sigma) / (1-(1-r/2sigma)e^{rt})."""
    t = np.asarray(t, dtype=np.float64)
    q = params.ratio
    out = params.lambda0 * q / (1.0 - (1.0 - q) * np.exp(params.r * t))
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class BarrierCheck:
    ok: bool
    worst_margin: float
    worst_time: float
    tol_abs: float

    def to_dict(self):
        return {
            "ok": self.ok,
            "worst_margin": self.worst_margin,
            "worst_time": self.worst_time,
            "tol_abs": self.tol_abs,
        }


def check_max_principle(record, sigma=None, tol_factor=BARRIER_TOL_FACTOR):
    """min_i R_i(t) >= s(t) - tol at every snapshot (tol = tol_factor * |r|)."""
    params = BarrierParams(r=record.r, sigma=record.sigma if sigma is None else sigma)
    s = barrier_s(record.times, params)
    margins = record.scalar_min - s
    worst = int(np.argmin(margins))
    tol_abs = tol_factor * abs(record.r)
    return BarrierCheck(
        ok=bool(margins[worst] >= -tol_abs),
        worst_margin=float(margins[worst]),
        worst_time=float(record.times[worst]),
        tol_abs=tol_abs,
    )


@dataclass(frozen=True)
class EigenBoundCheck:
    index: int
    ok: bool
    final_ok: bool
    reliable: bool
    worst_margin: float
    slack: float

    def to_dict(self):
        return {
            "index": self.index,
            "ok": self.ok,
            "final_ok": self.final_ok,
            "reliable": self.reliable,
            "worst_margin": self.worst_margin,
            "slack": self.slack,
        }


def check_eigen_bound(record, track, sigma=None, slack=EIGEN_BOUND_SLACK):
    """lambda_i(t) >= B_i(t)(1 - slack) along the trace, and the limiting
    bound lambda_i(T) >= lambda_i(0) * r/(2 sigma) * (1 - slack) at the end.

    An ambiguous track yields a verdict marked unreliable rather than an
    error.
    """
    if isinstance(track, int):
        track = record.track(track)
    params = BarrierParams(
        r=record.r,
        sigma=record.sigma if sigma is None else sigma,
        lambda0=float(track.values[0]),
    )
    bound = lower_bound_B(record.times, params)
    margins = track.values - bound * (1.0 - slack)
    final_floor = params.lambda0 * params.ratio * (1.0 - slack)
    return EigenBoundCheck(
        index=track.index,
        ok=bool(margins.min() >= 0.0),
        final_ok=bool(track.values[-1] >= final_floor),
        reliable=not track.ambiguous,
        worst_margin=float(margins.min()),
        slack=slack,
    )


@dataclass
class TheoremReport:
    """Machine-checkable verdicts for the ratio comparison and upper bounds.

    Per-index arrays are aligned with ``indices``; kappa_tilde is the limit
    value r/2 (the measured extremes of the final snapshot are reported for
    drift diagnosis).  theorem2_ok aggregates the T2a/T2b/T2c variants.
    """

    indices: list
    lambda_g: list
    lambda_tilde: list
    kappa_g: float
    kappa_tilde: float
    kappa_tilde_measured_min: float
    kappa_tilde_measured_max: float
    sigma: float
    r: float
    volume: float
    chi: int
    theorem1_ok: list
    theorem2a_ok: list
    theorem2b_ok: list
    theorem2c_ok: list
    theorem2_ok: list
    pointwise_bound_ok: list
    pointwise_reliable: list
    barrier_ok: bool
    barrier: BarrierCheck
    margins: dict
    tolerances: list
    ambiguous_indices: list

    @property
    def all_ok(self):
        flags = (
            self.theorem1_ok + self.theorem2_ok + self.pointwise_bound_ok
            + [self.barrier_ok]
        )
        return bool(all(flags)) and not self.ambiguous_indices

    def to_dict(self):
        return {
            "indices": self.indices,
            "lambda_g": self.lambda_g,
            "lambda_tilde": self.lambda_tilde,
            "kappa_g": self.kappa_g,
            "kappa_tilde": self.kappa_tilde,
            "kappa_tilde_measured_min": self.kappa_tilde_measured_min,
            "kappa_tilde_measured_max": self.kappa_tilde_measured_max,
            "sigma": self.sigma,
            "r": self.r,
            "volume": self.volume,
            "chi": self.chi,
            "theorem1_ok": self.theorem1_ok,
            "theorem2a_ok": self.theorem2a_ok,
            "theorem2b_ok": self.theorem2b_ok,
            "theorem2c_ok": self.theorem2c_ok,
            "theorem2_ok": self.theorem2_ok,
            "pointwise_bound_ok": self.pointwise_bound_ok,
            "pointwise_reliable": self.pointwise_reliable,
            "barrier_ok": self.barrier_ok,
            "barrier": self.barrier.to_dict(),
            "margins": self.margins,
            "tolerances": self.tolerances,
            "ambiguous_indices": self.ambiguous_indices,
            "all_ok": self.all_ok,
        }


def check_theorems(
    record,
    sigma_override=None,
    tol_factor=THEOREM_TOL_FACTOR,
    barrier_tol_factor=BARRIER_TOL_FACTOR,
    eigen_slack=EIGEN_BOUND_SLACK,
):
    """All displayed inequalities on one converged run, per tracked index.

    T1:  lambda_g / kappa_g >= lambda_t / kappa_t - tol
    T2a: lambda_g <= (lambda_t / kappa_t) sigma + tol
    T2b: lambda_g <= (lambda_t / (2 pi chi)) vol * sigma + tol
    T2c: lambda_g <= (lambda_t / kappa_t) kappa_g + tol
    with tol = tol_factor * |lambda_t| * |kappa_g / kappa_t| per index,
    plus the curvature barrier and the pointwise eigenvalue bound along the
    trace.  T1 and T2c are equivalent rearrangements when sigma = kappa_g;
    that agreement is asserted.
    """
    if not record.converged:
        raise NotConvergedError(
            "trace did not converge; theorem verdicts need the uniformized metric"
        )
    vol0, vol_t = float(record.volumes[0]), float(record.volumes[-1])
    if abs(vol_t - vol0) > VOLUME_HYPOTHESIS_RTOL * vol0:
        raise TraceFormatError(
            f"volume hypothesis violated: vol(g)={vol0!r} vol(g~)={vol_t!r}"
        )
    if not record.tracks:
        raise TraceFormatError("trace carries no tracked eigenvalues")

    kappa_g = record.kappa_g
    kappa_t = record.r / 2.0
    sigma = kappa_g if sigma_override is None else float(sigma_override)
    if sigma > kappa_g + _SIGMA_CLAMP_RTOL * abs(record.r):
        raise ValueError(
            f"sigma override {sigma!r} is not a lower bound of the Gauss "
            f"curvature (min is {kappa_g!r})"
        )
    two_pi_chi = 2.0 * math.pi * record.chi

    barrier = check_max_principle(record, sigma=sigma,
                                  tol_factor=barrier_tol_factor)

    indices, lam_g, lam_t, tols = [], [], [], []
    t1, t2a, t2b, t2c, t2 = [], [], [], [], []
    pw_ok, pw_rel, ambiguous = [], [], []
    margins = {
        "theorem1": [], "theorem2a": [], "theorem2b": [], "theorem2c": [],
        "theorem1_rel": [], "theorem2c_rel": [],
    }

    for track in record.tracks:
        lg = float(track.values[0])
        lt = float(track.values[-1])
        tol = tol_factor * abs(lt) * abs(kappa_g / kappa_t)

        m1 = lg / kappa_g - lt / kappa_t
        m2a = (lt / kappa_t) * sigma - lg
        m2b = (lt / two_pi_chi) * vol_t * sigma - lg
        m2c = (lt / kappa_t) * kappa_g - lg

        ok1 = m1 >= -tol
        ok2a = m2a >= -tol
        ok2b = m2b >= -tol
        ok2c = m2c >= -tol
        if sigma_override is None:
            # same inequality rearranged; tolerances are generous enough
            # that the discrete margins never land between the two cuts
            assert ok1 == ok2c, "theorem-1/theorem-2c verdicts diverged"

        eig = check_eigen_bound(record, track, sigma=sigma, slack=eigen_slack)

        indices.append(track.index)
        lam_g.append(lg)
        lam_t.append(lt)
        tols.append(tol)
        t1.append(bool(ok1))
        t2a.append(bool(ok2a))
        t2b.append(bool(ok2b))
        t2c.append(bool(ok2c))
        t2.append(bool(ok2a and ok2b and ok2c))
        pw_ok.append(eig.ok and eig.final_ok)
        pw_rel.append(eig.reliable)
        if track.ambiguous:
            ambiguous.append(track.index)
        margins["theorem1"].append(m1)
        margins["theorem2a"].append(m2a)
        margins["theorem2b"].append(m2b)
        margins["theorem2c"].append(m2c)
        margins["theorem1_rel"].append(m1 / abs(lt / kappa_t))
        margins["theorem2c_rel"].append(m2c / abs((lt / kappa_t) * kappa_g))

    return TheoremReport(
        indices=indices,
        lambda_g=lam_g,
        lambda_tilde=lam_t,
        kappa_g=kappa_g,
        kappa_tilde=kappa_t,
        kappa_tilde_measured_min=record.kappa_tilde_min,
        kappa_tilde_measured_max=record.kappa_tilde_max,
        sigma=sigma,
        r=record.r,
        volume=vol_t,
        chi=record.chi,
        theorem1_ok=t1,
        theorem2a_ok=t2a,
        theorem2b_ok=t2b,
        theorem2c_ok=t2c,
        theorem2_ok=t2,
        pointwise_bound_ok=pw_ok,
        pointwise_reliable=pw_rel,
        barrier_ok=barrier.ok,
        barrier=barrier,
        margins=margins,
        tolerances=tols,
        ambiguous_indices=ambiguous,
    )
