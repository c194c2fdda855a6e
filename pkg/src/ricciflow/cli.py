"""Command-line front end: generate, flow, verify.

Every output embeds the run manifest (tool version, seed, generator
parameters or input digest, flow configuration), and identical manifests
reproduce byte-identical CSV/JSON artifacts.  Exit codes partition the
failure modes; see EXIT_* below.
"""

import argparse
import json
import os
import sys
from enum import IntEnum

from . import __version__
from .errors import (
    ChiSignError,
    EigenSolveError,
    MeshExportError,
    MeshParseError,
    NotConvergedError,
    RicciFlowError,
    StepUnderflowError,
    TraceFormatError,
)
from .flow import FlowConfig, run_flow
from .geometry import effective_lengths
from .mesh import IntrinsicMesh, generate_genus2
from .meshio import infer_format, load_mesh, read_manifest, write_mesh_json, write_off
from .records import summarize_run
from .bounds import check_theorems
from . import runio

OUTPUT_DIR_ENV = "RICCIFLOW_OUT"


class ExitCode(IntEnum):
    OK = 0
    USAGE = 2
    IO = 3
    CHI_REFUSAL = 4
    NON_CONVERGENCE = 5
    DT_UNDERFLOW = 6
    EIGEN_FAILURE = 7
    VERDICT_FAILURE = 8


def _fail(code, message):
    print(f"ricciflow: error: {message}", file=sys.stderr)
    return int(code)


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="ricciflow",
        description="normalized Ricci flow runs with spectral bound verification",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("generate", help="write a seeded genus-2 mesh file")
    gen.add_argument("--genus2", action="store_true", required=True,
                     help="octagon-gluing genus-2 generator (the only kind)")
    gen.add_argument("--rounds", type=int, required=True,
                     help="midpoint subdivision rounds (>= 1; >= 2 for OFF)")
    gen.add_argument("--perturb", type=float, default=0.0,
                     help="conformal perturbation amplitude")
    gen.add_argument("--seed", type=int, default=0, help="RNG seed")
    gen.add_argument("--out", required=True, help="output path (.off or .json)")

    flw = sub.add_parser("flow", help="integrate the flow to constant curvature")
    flw.add_argument("--input", required=True, help="mesh file (.off/.obj/.json)")
    flw.add_argument("--config", help="flow config JSON (flags override)")
    flw.add_argument("--out-dir",
                     default=os.environ.get(OUTPUT_DIR_ENV, "."),
                     help=f"output directory (default: ${OUTPUT_DIR_ENV} or .)")
    flw.add_argument("--ignore-manifest", action="store_true",
                     help="use file coordinates even when a generator "
                          "manifest header is present")
    for name in ("dt-init", "dt-min", "safety-shrink", "convergence-tol",
                 "dt-growth", "stability-safety", "overlap-floor"):
        flw.add_argument(f"--{name}", type=float, default=None)
    for name in ("max-steps", "snapshot-stride", "eigen-count",
                 "eigen-maxiter", "eigen-buffer"):
        flw.add_argument(f"--{name}", type=int, default=None)

    ver = sub.add_parser("verify", help="evaluate theorem verdicts on a run")
    ver.add_argument("--run", help="flow output directory (reads trace.json)")
    ver.add_argument("--trace", help="explicit trace JSON path")
    ver.add_argument("--sigma", type=float, default=None,
                     help="looser Gauss-curvature lower bound (<= measured min)")
    ver.add_argument("--plots", action="store_true", help="emit SVG charts")
    ver.add_argument("--out", help="report path (default: <run>/report.json)")
    return parser


def cmd_generate(args):
    try:
        mesh = generate_genus2(args.rounds, args.perturb, args.seed)
    except ValueError as exc:
        return _fail(ExitCode.USAGE, exc)
    manifest = runio.generator_manifest(args.rounds, args.perturb, args.seed)
    fmt = infer_format(args.out) or "off"
    try:
        if fmt == "json":
            write_mesh_json(mesh, args.out, manifest=manifest)
        else:
            write_off(mesh, args.out, manifest=manifest)
    except (MeshExportError, OSError) as exc:
        return _fail(ExitCode.IO, exc)
    print(f"wrote {args.out}: {mesh!r}")
    return int(ExitCode.OK)


def _load_flow_input(args):
    """Mesh for a flow run, regenerated from a manifest header when present."""
    path = args.input
    fmt = infer_format(path)
    manifest = None
    if fmt == "json":
        with open(path, "rb") as fh:
            doc = json.load(fh)
        manifest = doc.get("manifest")
    elif fmt in ("off", "obj"):
        manifest = read_manifest(path)
    gen = (manifest or {}).get("generator")
    if gen and not args.ignore_manifest:
        if runio.digest_params(gen) != manifest.get("input_digest"):
            raise MeshParseError("manifest digest does not match its parameters")
        mesh = generate_genus2(gen["rounds"], gen["perturb"], gen["seed"])
        return mesh, manifest
    mesh = load_mesh(path)
    with open(path, "rb") as fh:
        digest = runio.digest_bytes(fh.read())
    manifest = {
        "tool": runio.MANIFEST_TOOL,
        "version": __version__,
        "generator": None,
        "seed": None,
        "input": os.path.basename(path),
        "input_digest": digest,
    }
    return mesh, manifest


def _config_from_args(args):
    data = {}
    if args.config:
        with open(args.config, "r", encoding="utf-8") as fh:
            data = json.load(fh)
    overrides = {
        "dt_init": args.dt_init,
        "dt_min": args.dt_min,
        "safety_shrink": args.safety_shrink,
        "convergence_tol": args.convergence_tol,
        "max_steps": args.max_steps,
        "snapshot_stride": args.snapshot_stride,
        "eigen_count": args.eigen_count,
        "dt_growth": args.dt_growth,
        "stability_safety": args.stability_safety,
        "eigen_maxiter": args.eigen_maxiter,
        "eigen_buffer": args.eigen_buffer,
        "overlap_floor": args.overlap_floor,
    }
    data.update({k: v for k, v in overrides.items() if v is not None})
    return FlowConfig.from_dict(data)


def cmd_flow(args):
    try:
        config = _config_from_args(args)
    except (ValueError, json.JSONDecodeError) as exc:
        return _fail(ExitCode.USAGE, f"bad flow configuration: {exc}")
    try:
        mesh, manifest = _load_flow_input(args)
    except (OSError, json.JSONDecodeError, RicciFlowError) as exc:
        return _fail(ExitCode.IO, exc)
    manifest = dict(manifest)
    manifest["config"] = config.to_dict()
    manifest["output_dir"] = args.out_dir

    try:
        trace = run_flow(mesh, config)
    except ChiSignError as exc:
        return _fail(ExitCode.CHI_REFUSAL, exc)
    except StepUnderflowError as exc:
        return _fail(ExitCode.DT_UNDERFLOW, exc)
    except EigenSolveError as exc:
        return _fail(ExitCode.EIGEN_FAILURE, exc)

    record = summarize_run(trace, manifest=manifest)
    os.makedirs(args.out_dir, exist_ok=True)
    join = lambda name: os.path.join(args.out_dir, name)
    try:
        runio.write_trace_csv(record, join("trace.csv"))
        runio.write_record_json(record, join("trace.json"))
        runio.write_state_json(trace.final.state, join("final_state.json"),
                               manifest=manifest)
        final_mesh = IntrinsicMesh(
            mesh.vertex_count, mesh.faces, mesh.face_edges, mesh.face_orient,
            mesh.edges, effective_lengths(mesh, trace.final.state),
        )
        write_mesh_json(final_mesh, join("final_mesh.json"),
                        manifest={**manifest, "uniformized": True})
    except OSError as exc:
        return _fail(ExitCode.IO, exc)

    res = record.residual_sup[-1] / abs(record.r)
    print(f"flow: steps={record.step_count} t={float(record.times[-1])!r} "
          f"residual={res:.3e} converged={record.converged}")
    if not record.converged:
        return _fail(ExitCode.NON_CONVERGENCE,
                     f"no convergence within {config.max_steps} steps "
                     f"(trace written to {args.out_dir})")
    return int(ExitCode.OK)


def cmd_verify(args):
    if bool(args.run) == bool(args.trace):
        return _fail(ExitCode.USAGE, "give exactly one of --run or --trace")
    trace_path = args.trace or os.path.join(args.run, "trace.json")
    out_dir = args.run or os.path.dirname(trace_path) or "."
    try:
        record = runio.load_record_json(trace_path)
    except (OSError, TraceFormatError) as exc:
        return _fail(ExitCode.IO, exc)

    try:
        report = check_theorems(record, sigma_override=args.sigma)
    except NotConvergedError as exc:
        return _fail(ExitCode.NON_CONVERGENCE, exc)
    except (ValueError, TraceFormatError) as exc:
        return _fail(ExitCode.USAGE, exc)

    out_path = args.out or os.path.join(out_dir, "report.json")
    try:
        runio.write_report_json(report, out_path, manifest=record.manifest,
                                sigma_override=args.sigma)
        if args.plots:
            runio.plot_eigenvalue_bounds(
                record, os.path.join(out_dir, "eigenvalue_bounds.svg"),
                sigma=args.sigma)
            runio.plot_curvature_barrier(
                record, os.path.join(out_dir, "curvature_barrier.svg"),
                sigma=args.sigma)
    except OSError as exc:
        return _fail(ExitCode.IO, exc)

    for i, idx in enumerate(report.indices):
        print(f"index {idx}: T1={report.theorem1_ok[i]} "
              f"T2a={report.theorem2a_ok[i]} T2b={report.theorem2b_ok[i]} "
              f"T2c={report.theorem2c_ok[i]} bound={report.pointwise_bound_ok[i]} "
              f"reliable={report.pointwise_reliable[i]}")
    print(f"barrier={report.barrier_ok} all_ok={report.all_ok} -> {out_path}")
    if not report.all_ok:
        return _fail(ExitCode.VERDICT_FAILURE,
                     "verdicts failed or tracks ambiguous (see report)")
    return int(ExitCode.OK)


def main(argv=None):
    parser = _build_parser()
    args = parser.parse_args(argv)
    handler = {"generate": cmd_generate, "flow": cmd_flow, "verify": cmd_verify}
    return handler[args.command](args)


if __name__ == "__main__":
    sys.exit(main())
