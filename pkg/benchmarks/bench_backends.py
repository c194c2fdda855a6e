"""Benchmark the compiled kernels against the pure-numpy fallback.

The measured pass is exactly the per-step workload of the flow driver:
gather per-face side lengths, evaluate angles/areas/cotangents, reduce onto
vertices, and scatter the cotangent weights onto edges.

Usage: python benchmarks/bench_backends.py [--rounds R1 R2 ...] [--repeat N]
"""

import argparse
import time

import numpy as np

from ricciflow import MetricState, generate_genus2
from ricciflow.geometry import effective_lengths
from ricciflow import _purecore

try:
    from ricciflow import _fastcore
except ImportError:
    _fastcore = None


def kernel_pass(core, mesh, ell):
    angles, areas, cots = core.face_geometry(ell)
    core.vertex_sums(mesh.faces, angles, areas, mesh.vertex_count)
    core.edge_cot_weights(mesh.face_edges, cots, mesh.edge_count)


def time_backend(core, mesh, ell, repeat):
    kernel_pass(core, mesh, ell)  # warm-up
    best = np.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        kernel_pass(core, mesh, ell)
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--rounds", type=int, nargs="+", default=[2, 3, 4, 5])
    parser.add_argument("--repeat", type=int, default=50)
    args = parser.parse_args()

    print(f"{'rounds':>6} {'faces':>8} {'python':>12} {'cython':>12} {'speedup':>8}")
    for rounds in args.rounds:
        mesh = generate_genus2(rounds, 0.05, 0)
        state = MetricState.initial(mesh)
        ell = effective_lengths(mesh, state)[mesh.face_edges]
        t_py = time_backend(_purecore, mesh, ell, args.repeat)
        if _fastcore is not None:
            t_cy = time_backend(_fastcore, mesh, ell, args.repeat)
            print(f"{rounds:>6} {mesh.face_count:>8} {t_py * 1e6:>10.1f}us "
                  f"{t_cy * 1e6:>10.1f}us {t_py / t_cy:>7.2f}x")
        else:
            print(f"{rounds:>6} {mesh.face_count:>8} {t_py * 1e6:>10.1f}us "
                  f"{'n/a':>12} {'n/a':>8}")


if __name__ == "__main__":
    main()
