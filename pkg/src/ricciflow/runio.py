"""Run artifacts: manifests, trace CSV/JSON, theorem reports, SVG plots.

All writers are byte-deterministic for identical inputs: floats are
serialized with shortest round-trip repr, JSON keys are sorted, and the SVG
backend runs with a pinned hash salt and no timestamps.
"""

import hashlib
import json

from . import __version__
from .errors import TraceFormatError
from .records import RunRecord

MANIFEST_TOOL = "ricciflow"


def canonical_json(obj):
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def digest_bytes(data):
    return "sha256:" + hashlib.sha256(data).hexdigest()


def digest_params(params):
    return digest_bytes(canonical_json(params).encode())


def generator_manifest(rounds, perturb, seed):
    gen = {"kind": "genus2", "rounds": int(rounds),
           "perturb": float(perturb), "seed": int(seed)}
    return {
        "tool": MANIFEST_TOOL,
        "version": __version__,
        "generator": gen,
        "seed": int(seed),
        "input_digest": digest_params(gen),
    }


def _write(target, data):
    if hasattr(target, "write"):
        target.write(data)
    else:
        with open(target, "wb") as fh:
            fh.write(data)
    return data


def write_trace_csv(record, target):
    """One row per snapshot: t, V, r, R_min, R_max, and the tracked
    eigenvalue branches lambda_1..lambda_k."""
    lines = []
    if record.manifest is not None:
        lines.append(f"# ricciflow-manifest: {canonical_json(record.manifest)}")
    cols = ["t", "V", "r", "R_min", "R_max"]
    cols += [f"lambda_{tr.index}" for tr in record.tracks]
    lines.append(",".join(cols))
    for s in range(record.snapshot_count):
        row = [
            repr(float(record.times[s])),
            repr(float(record.volumes[s])),
            repr(float(record.r)),
            repr(float(record.scalar_min[s])),
            repr(float(record.scalar_max[s])),
        ]
        row += [repr(float(tr.values[s])) for tr in record.tracks]
        lines.append(",".join(row))
    return _write(target, ("\n".join(lines) + "\n").encode())


def write_record_json(record, target):
    data = (json.dumps(record.to_dict(), sort_keys=True, indent=1) + "\n").encode()
    return _write(target, data)


def load_record_json(source):
    try:
        if hasattr(source, "read"):
            doc = json.load(source)
        else:
            with open(source, "rb") as fh:
                doc = json.load(fh)
    except json.JSONDecodeError as exc:
        raise TraceFormatError(f"bad trace JSON: {exc}") from exc
    return RunRecord.from_dict(doc)


def write_state_json(state, target, manifest=None):
    doc = {
        "format": "ricciflow-state",
        "version": 1,
        "t": float(state.t),
        "u": [float(x) for x in state.u],
    }
    if manifest is not None:
        doc["manifest"] = manifest
    return _write(target, (json.dumps(doc, sort_keys=True, indent=1) + "\n").encode())


def write_report_json(report, target, manifest=None, sigma_override=None):
    doc = report.to_dict()
    doc["format"] = "ricciflow-theorem-report"
    doc["version"] = 1
    doc["sigma_override"] = sigma_override
    if manifest is not None:
        doc["manifest"] = manifest
    return _write(target, (json.dumps(doc, sort_keys=True, indent=1) + "\n").encode())


def _deterministic_pyplot():
    import matplotlib

    matplotlib.use("Agg", force=False)
    import matplotlib.pyplot as plt

    plt.rcParams["svg.hashsalt"] = MANIFEST_TOOL
    return plt


def plot_eigenvalue_bounds(record, target, sigma=None):
    """SVG chart of tracked lambda_i(t) against their lower bounds B_i(t)."""
    from .bounds import BarrierParams, lower_bound_B

    plt = _deterministic_pyplot()
    sig = record.sigma if sigma is None else sigma
    fig, ax = plt.subplots(figsize=(7, 4.5))
    for tr in record.tracks:
        params = BarrierParams(r=record.r, sigma=sig, lambda0=float(tr.values[0]))
        (line,) = ax.plot(record.times, tr.values, label=f"$\\lambda_{{{tr.index}}}$")
        ax.plot(record.times, lower_bound_B(record.times, params),
                linestyle="--", color=line.get_color(), alpha=0.6)
    ax.set_xlabel("t")
    ax.set_ylabel("eigenvalue / bound")
    ax.set_title("tracked eigenvalues (solid) vs lower bounds (dashed)")
    ax.legend(loc="best", fontsize=8)
    fig.tight_layout()
    fig.savefig(target, format="svg", metadata={"Date": None})
    plt.close(fig)


def plot_curvature_barrier(record, target, sigma=None):
    """SVG chart of min R(t) against the comparison solution s(t)."""
    from .bounds import BarrierParams, barrier_s

    plt = _deterministic_pyplot()
    sig = record.sigma if sigma is None else sigma
    params = BarrierParams(r=record.r, sigma=sig)
    fig, ax = plt.subplots(figsize=(7, 4.5))
    ax.plot(record.times, record.scalar_min, label="min R")
    ax.plot(record.times, barrier_s(record.times, params), "--", label="s(t)")
    ax.axhline(record.r, color="gray", linewidth=0.8, label="r")
    ax.set_xlabel("t")
    ax.set_ylabel("scalar curvature")
    ax.set_title("curvature minimum vs comparison barrier")
    ax.legend(loc="best", fontsize=8)
    fig.tight_layout()
    fig.savefig(target, format="svg", metadata={"Date": None})
    plt.close(fig)
