"""Fixture meshes shared across the test modules."""

import numpy as np

from ricciflow import IntrinsicMesh, generate_genus2, mesh_from_faces
from ricciflow.geometry import MetricState, effective_lengths


def equilateral_torus(n=8):
    """Flat torus: n x n diagonal grid combinatorics, all lengths 1.

    Intrinsically every face is equilateral, every vertex has six incident
    corners, so the metric is flat (chi = 0, R = 0 everywhere).
    """
    def vid(i, j):
        return (i % n) * n + (j % n)

    faces = []
    for i in range(n):
        for j in range(n):
            faces.append((vid(i, j), vid(i + 1, j), vid(i, j + 1)))
            faces.append((vid(i + 1, j), vid(i + 1, j + 1), vid(i, j + 1)))
    return mesh_from_faces(n * n, faces, 1.0)


def cone_sphere(valence=7):
    """Sphere built from two poles over a cycle, all edge lengths 1.

    Each pole has ``valence`` incident unit equilateral triangles, hence
    angle deficit 2*pi - valence*pi/3.
    """
    n = valence
    faces = []
    for k in range(n):
        a, b = 2 + k, 2 + (k + 1) % n
        faces.append((0, a, b))      # north pole fan
        faces.append((1, b, a))      # south pole fan, opposite orientation
    return mesh_from_faces(n + 2, faces, 1.0)


def unit_tetrahedron():
    """Regular tetrahedron with unit intrinsic edge lengths."""
    return mesh_from_faces(4, [(0, 1, 2), (0, 2, 3), (0, 3, 1), (1, 3, 2)], 1.0)


def square_pillow():
    """Doubled unit square (a quotient sphere) with explicit edge cells.

    The diagonal of each copy has both opposite angles pi/2, so its
    cotangent weight vanishes.
    """
    rt2 = np.sqrt(2.0)
    # edges 0..3: boundary (shared by the two copies); 4: front diagonal
    # from vertex 0 to 2; 5: back diagonal
    edges = [(0, 1), (1, 2), (2, 3), (3, 0), (0, 2), (0, 2)]
    lengths = [1.0, 1.0, 1.0, 1.0, rt2, rt2]
    faces = [(0, 1, 2), (0, 2, 3), (2, 1, 0), (3, 2, 0)]
    face_edges = [(1, 4, 0), (2, 3, 4), (0, 5, 1), (5, 3, 2)]
    face_orient = [(1, -1, 1), (1, 1, 1), (-1, 1, -1), (-1, -1, -1)]
    return IntrinsicMesh(4, faces, face_edges, face_orient, edges, lengths)


def tetra_off_bytes():
    """OFF file of a regular tetrahedron with unit circumradius."""
    s = 1.0 / np.sqrt(3.0)
    verts = [(s, s, s), (s, -s, -s), (-s, s, -s), (-s, -s, s)]
    faces = [(0, 1, 2), (0, 2, 3), (0, 3, 1), (1, 3, 2)]
    lines = ["OFF", "4 4 6"]
    lines += [f"{float(x)!r} {float(y)!r} {float(z)!r}" for x, y, z in verts]
    lines += [f"3 {i} {j} {k}" for i, j, k in faces]
    return ("\n".join(lines) + "\n").encode()


def torus_off_bytes(n=6, R=2.0, rr=0.7):
    """OFF file of an embedded torus of revolution (chi = 0 fixture)."""
    verts = []
    for i in range(n):
        for j in range(n):
            a, b = 2 * np.pi * i / n, 2 * np.pi * j / n
            verts.append((
                (R + rr * np.cos(b)) * np.cos(a),
                (R + rr * np.cos(b)) * np.sin(a),
                rr * np.sin(b),
            ))
    faces = []
    vid = lambda i, j: (i % n) * n + (j % n)
    for i in range(n):
        for j in range(n):
            faces.append((vid(i, j), vid(i + 1, j), vid(i, j + 1)))
            faces.append((vid(i + 1, j), vid(i + 1, j + 1), vid(i, j + 1)))
    lines = ["OFF", f"{n * n} {len(faces)} {3 * n * n}"]
    lines += [f"{float(x)!r} {float(y)!r} {float(z)!r}" for x, y, z in verts]
    lines += [f"3 {i} {j} {k}" for i, j, k in faces]
    return ("\n".join(lines) + "\n").encode()


def nonmanifold_off_bytes():
    """OFF file with an edge bounding three faces."""
    verts = [(0, 0, 0), (1, 0, 0), (0, 1, 0), (0, 0, 1), (0, -1, 0)]
    faces = [(0, 1, 2), (0, 1, 3), (1, 0, 4)]
    lines = ["OFF", "5 3 7"]
    lines += [f"{float(x)!r} {float(y)!r} {float(z)!r}" for x, y, z in verts]
    lines += [f"3 {i} {j} {k}" for i, j, k in faces]
    return ("\n".join(lines) + "\n").encode()


def rebase_to_state(mesh, state):
    """New mesh whose reference lengths are the state's effective lengths."""
    return IntrinsicMesh(
        mesh.vertex_count, mesh.faces, mesh.face_edges, mesh.face_orient,
        mesh.edges, effective_lengths(mesh, state),
    )


def admissible_random_state(mesh, amplitude, seed):
    """Random per-vertex conformal factors kept inside the admissible set."""
    from ricciflow.mesh import face_corner_lengths, triangle_slacks

    rng = np.random.default_rng(seed)
    u = rng.uniform(-amplitude, amplitude, size=mesh.vertex_count)
    for _ in range(12):
        state = MetricState(u)
        ell = effective_lengths(mesh, state)[mesh.face_edges]
        if triangle_slacks(ell).min() > 0:
            return state
        u = 0.5 * u
    raise AssertionError("could not build an admissible random state")
