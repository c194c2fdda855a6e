"""Serializable run summaries.

A ``RunRecord`` carries everything the verdict checks need from a completed
flow: per-snapshot scalars, tracked eigenvalue branches with their pairing
qualities, and the run constants.  It round-trips through JSON exactly, so
``verify`` works identically on an in-memory trace and on a trace loaded
from disk.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import TraceFormatError
from .spectrum import build_tracks

RECORD_FORMAT = "ricciflow-trace"
RECORD_VERSION = 1


@dataclass
class TrackRecord:
    """One tracked eigenvalue branch along a run."""

    index: int
    values: np.ndarray
    qualities: np.ndarray
    overlap_floor: float

    @property
    def ambiguous(self):
        return bool(self.qualities.size and self.qualities.min() < self.overlap_floor)

    def to_dict(self):
        return {
            "index": self.index,
            "values": [float(x) for x in self.values],
            "qualities": [float(x) for x in self.qualities],
            "overlap_floor": self.overlap_floor,
            "ambiguous": self.ambiguous,
        }

    @classmethod
    def from_dict(cls, data):
        return cls(
            index=int(data["index"]),
            values=np.asarray(data["values"], dtype=np.float64),
            qualities=np.asarray(data["qualities"], dtype=np.float64),
            overlap_floor=float(data["overlap_floor"]),
        )


@dataclass
class RunRecord:
    times: np.ndarray
    volumes: np.ndarray
    scalar_min: np.ndarray
    scalar_max: np.ndarray
    r: float
    sigma: float
    v0: float
    chi: int
    kappa_g: float
    kappa_tilde_min: float
    kappa_tilde_max: float
    converged: bool
    step_count: int
    tracks: list = field(default_factory=list)
    manifest: dict | None = None
    config: dict | None = None

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=np.float64)
        self.volumes = np.asarray(self.volumes, dtype=np.float64)
        self.scalar_min = np.asarray(self.scalar_min, dtype=np.float64)
        self.scalar_max = np.asarray(self.scalar_max, dtype=np.float64)
        n = self.times.size
        if not (self.volumes.size == self.scalar_min.size
                == self.scalar_max.size == n):
            raise TraceFormatError("per-snapshot series lengths disagree")
        for tr in self.tracks:
            if tr.values.size != n:
                raise TraceFormatError(
                    f"track {tr.index} has {tr.values.size} samples, expected {n}"
                )

    @property
    def snapshot_count(self):
        return self.times.size

    @property
    def residual_sup(self):
        return np.maximum(
            np.abs(self.scalar_max - self.r), np.abs(self.scalar_min - self.r)
        )

    def track(self, index):
        for tr in self.tracks:
            if tr.index == index:
                return tr
        raise KeyError(f"no tracked eigenvalue with index {index}")

    def to_dict(self):
        return {
            "format": RECORD_FORMAT,
            "version": RECORD_VERSION,
            "times": [float(x) for x in self.times],
            "volumes": [float(x) for x in self.volumes],
            "scalar_min": [float(x) for x in self.scalar_min],
            "scalar_max": [float(x) for x in self.scalar_max],
            "r": self.r,
            "sigma": self.sigma,
            "v0": self.v0,
            "chi": self.chi,
            "kappa_g": self.kappa_g,
            "kappa_tilde_min": self.kappa_tilde_min,
            "kappa_tilde_max": self.kappa_tilde_max,
            "converged": self.converged,
            "step_count": self.step_count,
            "tracks": [tr.to_dict() for tr in self.tracks],
            "manifest": self.manifest,
            "config": self.config,
        }

    @classmethod
    def from_dict(cls, data):
        if data.get("format") != RECORD_FORMAT:
            raise TraceFormatError("not a ricciflow trace document")
        try:
            return cls(
                times=data["times"],
                volumes=data["volumes"],
                scalar_min=data["scalar_min"],
                scalar_max=data["scalar_max"],
                r=float(data["r"]),
                sigma=float(data["sigma"]),
                v0=float(data["v0"]),
                chi=int(data["chi"]),
                kappa_g=float(data["kappa_g"]),
                kappa_tilde_min=float(data["kappa_tilde_min"]),
                kappa_tilde_max=float(data["kappa_tilde_max"]),
                converged=bool(data["converged"]),
                step_count=int(data["step_count"]),
                tracks=[TrackRecord.from_dict(t) for t in data.get("tracks", [])],
                manifest=data.get("manifest"),
                config=data.get("config"),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise TraceFormatError(f"bad trace document: {exc}") from exc


def summarize_run(trace, manifest=None):
    """Build the serializable record of a finished flow trace.

    Eigenvalue branches are tracked across the recorded spectra by mass
    overlap; only indices 1..eigen_count are exported even when extra pairs
    were solved for tracking robustness.
    """
    snaps = trace.snapshots
    config = trace.config
    times = np.array([s.t for s in snaps])
    volumes = np.array([s.curvature.volume for s in snaps])
    smin = np.array([float(s.curvature.scalar.min()) for s in snaps])
    smax = np.array([float(s.curvature.scalar.max()) for s in snaps])

    tracks = []
    slices = trace.slices
    if config.eigen_count >= 1 and len(slices) == len(snaps):
        raw = build_tracks(
            slices,
            overlap_floor=config.overlap_floor,
            indices=range(1, config.eigen_count + 1),
        )
        tracks = [
            TrackRecord(
                index=tr.index,
                values=tr.values,
                qualities=tr.qualities,
                overlap_floor=tr.overlap_floor,
            )
            for tr in raw
        ]

    final = snaps[-1].curvature
    return RunRecord(
        times=times,
        volumes=volumes,
        scalar_min=smin,
        scalar_max=smax,
        r=trace.r,
        sigma=trace.sigma,
        v0=trace.v0,
        chi=trace.mesh.euler_characteristic,
        kappa_g=trace.sigma,
        kappa_tilde_min=final.min_gauss,
        kappa_tilde_max=final.max_gauss,
        converged=trace.converged,
        step_count=trace.step_count,
        tracks=tracks,
        manifest=manifest,
        config=config.to_dict(),
    )
