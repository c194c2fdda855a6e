"""Closed intrinsic triangulated surfaces.

A mesh is stored combinatorially as oriented faces glued along explicit edge
cells.  No vertex coordinates are kept: the metric carrier is the vector of
reference edge lengths.  Edge cells are first-class (a list, not a set keyed
by vertex pairs) so that quotient constructions with parallel edges, such as
the glued octagon and its first midpoint subdivision, are representable.
"""

from dataclasses import dataclass

import numpy as np

from .errors import (
    DegenerateFaceError,
    MeshGenerationError,
    NonManifoldMeshError,
    OrientationError,
)

TAU = 2.0 * np.pi

# Retries for the perturbation amplitude before giving up.
_PERTURB_RETRY_BUDGET = 8


class IntrinsicMesh:
    """Closed oriented triangulated surface with per-edge reference lengths.

    Parameters
    ----------
    vertex_count : int
        Number of vertices.
    faces : (F, 3) int array
        Vertex indices of each face, oriented (counter-clockwise by
        convention).
    face_edges : (F, 3) int array
        ``face_edges[f, c]`` is the edge cell opposite corner ``c`` of face
        ``f`` (the side joining corners ``c+1`` and ``c+2`` mod 3).
    face_orient : (F, 3) int array, entries +1 or -1
        +1 when face ``f`` traverses that edge cell from its tail to its
        head, -1 otherwise.
    edges : (E, 2) int array
        Tail and head vertex of each edge cell.  Parallel cells (distinct
        edges with equal endpoints) are allowed.
    lengths0 : (E,) float array
        Strictly positive reference lengths.

    Instances are immutable after construction and safe to share across
    threads; all arrays are marked read-only.
    """

    __slots__ = (
        "vertex_count",
        "faces",
        "face_edges",
        "face_orient",
        "edges",
        "lengths0",
        "euler_characteristic",
        "_edge_faces",
        "_vertex_degree",
        "_vertex_faces",
    )

    def __init__(self, vertex_count, faces, face_edges, face_orient, edges, lengths0):
        self.vertex_count = int(vertex_count)
        self.faces = np.ascontiguousarray(faces, dtype=np.int64)
        self.face_edges = np.ascontiguousarray(face_edges, dtype=np.int64)
        self.face_orient = np.ascontiguousarray(face_orient, dtype=np.int64)
        self.edges = np.ascontiguousarray(edges, dtype=np.int64)
        self.lengths0 = np.ascontiguousarray(lengths0, dtype=np.float64)
        if self.faces.ndim != 2 or self.faces.shape[1] != 3:
            raise ValueError("faces must be (F, 3)")
        if self.face_edges.shape != self.faces.shape:
            raise ValueError("face_edges must match faces shape")
        if self.face_orient.shape != self.faces.shape:
            raise ValueError("face_orient must match faces shape")
        if self.edges.ndim != 2 or self.edges.shape[1] != 2:
            raise ValueError("edges must be (E, 2)")
        if self.lengths0.shape != (self.edges.shape[0],):
            raise ValueError("lengths0 must have one entry per edge")
        self.euler_characteristic = int(
            self.vertex_count - self.edge_count + self.face_count
        )
        self._edge_faces = None
        self._vertex_degree = None
        self._vertex_faces = None
        for arr in (self.faces, self.face_edges, self.face_orient,
                    self.edges, self.lengths0):
            arr.setflags(write=False)

    @property
    def face_count(self):
        return self.faces.shape[0]

    @property
    def edge_count(self):
        return self.edges.shape[0]

    @property
    def edge_faces(self):
        """(E, 2) array: faces using each edge with orientation +1 resp. -1.

        Only meaningful for meshes that pass validation.
        """
        if self._edge_faces is None:
            ef = np.full((self.edge_count, 2), -1, dtype=np.int64)
            for f in range(self.face_count):
                for c in range(3):
                    e = self.face_edges[f, c]
                    slot = 0 if self.face_orient[f, c] > 0 else 1
                    ef[e, slot] = f
            ef.setflags(write=False)
            self._edge_faces = ef
        return self._edge_faces

    @property
    def vertex_degree(self):
        """Number of face corners incident to each vertex."""
        if self._vertex_degree is None:
            deg = np.bincount(self.faces.ravel(), minlength=self.vertex_count)
            deg.setflags(write=False)
            self._vertex_degree = deg
        return self._vertex_degree

    @property
    def vertex_faces(self):
        """Tuple of per-vertex arrays of incident face indices (with
        multiplicity for quotient vertices appearing at several corners)."""
        if self._vertex_faces is None:
            order = np.argsort(self.faces.ravel(), kind="stable")
            splits = np.searchsorted(self.faces.ravel()[order],
                                     np.arange(1, self.vertex_count))
            self._vertex_faces = tuple(
                np.array_split(order // 3, splits)
            )
        return self._vertex_faces

    def __repr__(self):
        return (
            f"IntrinsicMesh(V={self.vertex_count}, E={self.edge_count}, "
            f"F={self.face_count}, chi={self.euler_characteristic})"
        )


@dataclass(frozen=True)
class MeshValidationReport:
    manifold_ok: bool
    orientation_ok: bool
    triangle_inequality_ok: bool
    euler_characteristic: int
    worst_triangle_slack: float

    @property
    def ok(self):
        return self.manifold_ok and self.orientation_ok and self.triangle_inequality_ok


def face_corner_lengths(mesh, lengths=None):
    """(F, 3) array of side lengths, column c opposite corner c."""
    if lengths is None:
        lengths = mesh.lengths0
    return lengths[mesh.face_edges]


def triangle_slacks(ell):
    """Per-face strict-triangle-inequality slack: perimeter minus twice the
    longest side.  Positive iff the face is a genuine triangle."""
    ell = np.asarray(ell)
    return ell.sum(axis=1) - 2.0 * ell.max(axis=1)


def validate_mesh(mesh, lengths=None):
    """Check closedness, orientation, and triangle inequalities.

    Returns a report; never raises.  ``lengths`` defaults to the reference
    lengths.
    """
    slots = np.zeros((mesh.edge_count, 2), dtype=np.int64)
    for f in range(mesh.face_count):
        for c in range(3):
            e = mesh.face_edges[f, c]
            slot = 0 if mesh.face_orient[f, c] > 0 else 1
            slots[e, slot] += 1
    manifold_ok = bool(np.all(slots.sum(axis=1) == 2))
    orientation_ok = bool(np.all(slots == 1))

    if lengths is None:
        lengths = mesh.lengths0
    lengths = np.asarray(lengths, dtype=np.float64)
    positive = bool(np.all(lengths > 0.0)) and bool(np.all(np.isfinite(lengths)))
    if positive:
        slack = triangle_slacks(face_corner_lengths(mesh, lengths))
        worst = float(slack.min()) if slack.size else np.inf
    else:
        worst = -np.inf
    tri_ok = positive and worst > 0.0

    return MeshValidationReport(
        manifold_ok=manifold_ok,
        orientation_ok=orientation_ok,
        triangle_inequality_ok=tri_ok,
        euler_characteristic=mesh.euler_characteristic,
        worst_triangle_slack=worst,
    )


def require_valid(mesh, lengths=None):
    """Raise the appropriate error if ``mesh`` fails validation."""
    report = validate_mesh(mesh, lengths)
    if not report.manifold_ok:
        raise NonManifoldMeshError("mesh is not a closed 2-manifold")
    if not report.orientation_ok:
        raise OrientationError("face orientations are inconsistent")
    if not report.triangle_inequality_ok:
        ell = face_corner_lengths(mesh, lengths)
        slack = triangle_slacks(ell)
        bad = int(np.argmin(slack))
        raise DegenerateFaceError(
            bad, f"face {bad} violates the strict triangle inequality"
        )
    return report


def euler_characteristic(mesh):
    """V - E + F of the mesh."""
    return mesh.euler_characteristic


def mesh_from_faces(vertex_count, faces, lengths):
    """Build a simplicial mesh from oriented faces and per-pair edge lengths.

    ``lengths`` is a scalar (all edges equal), a mapping from sorted vertex
    pairs to lengths, or a callable ``(i, j) -> length``.  Edges are derived
    from unique vertex pairs, so this constructor rejects non-manifold input
    (an edge in more than two faces) and inconsistent orientation; use the
    explicit ``IntrinsicMesh`` constructor for quotient complexes.
    """
    faces = np.asarray(faces, dtype=np.int64)
    if faces.ndim != 2 or faces.shape[1] != 3:
        raise ValueError("faces must be (F, 3)")
    if faces.size and (faces.min() < 0 or faces.max() >= vertex_count):
        raise ValueError("face vertex index out of range")
    if np.any(faces[:, 0] == faces[:, 1]) or np.any(faces[:, 1] == faces[:, 2]) \
            or np.any(faces[:, 2] == faces[:, 0]):
        bad = int(np.argmax((faces[:, 0] == faces[:, 1])
                            | (faces[:, 1] == faces[:, 2])
                            | (faces[:, 2] == faces[:, 0])))
        raise DegenerateFaceError(bad, f"face {bad} repeats a vertex")

    edge_index = {}
    edges = []
    face_edges = np.empty_like(faces)
    face_orient = np.empty_like(faces)
    use_count = {}
    for f in range(faces.shape[0]):
        v = faces[f]
        for c in range(3):
            i, j = int(v[(c + 1) % 3]), int(v[(c + 2) % 3])
            key = (i, j) if i < j else (j, i)
            e = edge_index.get(key)
            if e is None:
                e = len(edges)
                edge_index[key] = e
                edges.append((i, j))
                use_count[e] = 0
            use_count[e] += 1
            if use_count[e] > 2:
                raise NonManifoldMeshError(
                    f"edge {key} is shared by more than two faces"
                )
            tail, head = edges[e]
            face_edges[f, c] = e
            face_orient[f, c] = 1 if (i, j) == (tail, head) else -1

    edges = np.asarray(edges, dtype=np.int64)
    ne = edges.shape[0]
    if callable(lengths):
        l0 = np.array([lengths(int(t), int(h)) for t, h in edges], dtype=np.float64)
    elif np.isscalar(lengths):
        l0 = np.full(ne, float(lengths))
    else:
        l0 = np.empty(ne, dtype=np.float64)
        for e, (t, h) in enumerate(edges):
            key = (int(t), int(h)) if t < h else (int(h), int(t))
            l0[e] = lengths[key]

    mesh = IntrinsicMesh(vertex_count, faces, face_edges, face_orient, edges, l0)
    require_valid(mesh)
    return mesh


def mesh_from_coordinates(coords, faces):
    """Build a mesh from 3D vertex coordinates; lengths become Euclidean
    distances and the coordinates are then discarded."""
    coords = np.asarray(coords, dtype=np.float64)
    if coords.ndim != 2 or coords.shape[1] != 3:
        raise ValueError("coords must be (V, 3)")

    def dist(i, j):
        return float(np.linalg.norm(coords[i] - coords[j]))

    return mesh_from_faces(coords.shape[0], faces, dist)


def _octagon_base():
    """Glued-octagon genus-2 base complex: a center vertex fanned to the
    single identified boundary vertex (V=2, E=12, F=8, chi=-2).

    Side word a b a' b' c d c' d' (primes are reversed traversals); loops and
    parallel edges make this a quotient complex, not a simplicial one.
    """
    side_len = 2.0 * np.sin(np.pi / 8.0)
    # cells 0..7: spokes center->corner, length 1; cells 8..11: side classes
    edges = [(0, 1)] * 8 + [(1, 1)] * 4
    lengths = np.array([1.0] * 8 + [side_len] * 4)
    side_class = [8, 9, 8, 9, 10, 11, 10, 11]
    side_dir = [1, 1, -1, -1, 1, 1, -1, -1]

    faces, face_edges, face_orient = [], [], []
    for k in range(8):
        faces.append((0, 1, 1))
        face_edges.append((side_class[k], (k + 1) % 8, k))
        face_orient.append((side_dir[k], -1, 1))
    return IntrinsicMesh(2, faces, face_edges, face_orient, edges, lengths)


def subdivide(mesh):
    """Intrinsic 4-to-1 midpoint subdivision.

    Every edge is split at its midpoint and every face is replaced by three
    corner triangles plus the medial triangle.  Working inside each flat
    triangle, all child side lengths are exactly half a parent length, so the
    subdivision is metrically exact (and bit-exact in binary floating point).
    """
    nv, ne, nf = mesh.vertex_count, mesh.edge_count, mesh.face_count
    mid = lambda e: nv + e  # midpoint vertex of edge cell e

    new_edges = np.empty((2 * ne + 3 * nf, 2), dtype=np.int64)
    new_lengths = np.empty(2 * ne + 3 * nf, dtype=np.float64)
    for e in range(ne):
        tail, head = mesh.edges[e]
        new_edges[2 * e] = (tail, mid(e))
        new_edges[2 * e + 1] = (mid(e), head)
        new_lengths[2 * e] = new_lengths[2 * e + 1] = mesh.lengths0[e] / 2.0

    # Child-cell selection must use the face's traversal role, not vertex
    # identity: loop edges (both endpoints equal) occur in quotient bases.
    def half_leaving(e, orient):
        """Child cell at the corner where the face's traversal of e starts,
        with the canonical sign of the child traversal corner -> midpoint."""
        return (2 * e, 1) if orient > 0 else (2 * e + 1, -1)

    def half_entering(e, orient):
        """Child cell at the corner where the traversal of e ends, with the
        canonical sign of the child traversal midpoint -> corner."""
        return (2 * e + 1, 1) if orient > 0 else (2 * e, -1)

    new_faces = np.empty((4 * nf, 3), dtype=np.int64)
    new_fe = np.empty((4 * nf, 3), dtype=np.int64)
    new_fo = np.empty((4 * nf, 3), dtype=np.int64)
    for f in range(nf):
        v = mesh.faces[f]
        e = mesh.face_edges[f]
        o = mesh.face_orient[f]
        med = [2 * ne + 3 * f + c for c in range(3)]
        # medial cell c runs mid(e_{c+2}) -> mid(e_{c+1}), parallel to side c
        for c in range(3):
            new_edges[med[c]] = (mid(e[(c + 2) % 3]), mid(e[(c + 1) % 3]))
            new_lengths[med[c]] = mesh.lengths0[e[c]] / 2.0
        for c in range(3):
            c1, c2 = (c + 1) % 3, (c + 2) % 3
            # corner triangle at corner c: (v_c, mid(e_{c+2}), mid(e_{c+1}))
            fid = 4 * f + c
            new_faces[fid] = (v[c], mid(e[c2]), mid(e[c1]))
            # e_{c+1} is traversed into corner c, e_{c+2} out of it
            h_in, s_in = half_entering(e[c1], o[c1])   # side mid(e_c1) -> v_c
            h_out, s_out = half_leaving(e[c2], o[c2])  # side v_c -> mid(e_c2)
            new_fe[fid] = (med[c], h_in, h_out)
            new_fo[fid] = (1, s_in, s_out)
        fid = 4 * f + 3
        new_faces[fid] = (mid(e[0]), mid(e[1]), mid(e[2]))
        new_fe[fid] = (med[0], med[1], med[2])
        new_fo[fid] = (-1, -1, -1)

    return IntrinsicMesh(nv + ne, new_faces, new_fe, new_fo, new_edges, new_lengths)


def _perturb_lengths(mesh, amplitude, rng):
    eta = rng.uniform(-amplitude, amplitude, size=mesh.vertex_count)
    factor = np.exp(0.5 * (eta[mesh.edges[:, 0]] + eta[mesh.edges[:, 1]]))
    return mesh.lengths0 * factor


def generate_genus2(subdivision_rounds, perturbation_amplitude=0.0, seed=0):
    """Seeded genus-2 mesh: glued octagon, midpoint-subdivided, then given a
    random conformal length perturbation.

    Each edge length is multiplied by exp((eta_i + eta_j)/2) with per-vertex
    eta drawn uniformly from [-amplitude, amplitude].  If the draw breaks a
    triangle inequality the amplitude is halved and redrawn, up to a fixed
    retry budget.  Bit-reproducible for fixed (rounds, amplitude, seed).
    """
    rounds = int(subdivision_rounds)
    if rounds < 1:
        raise ValueError("subdivision_rounds must be >= 1")
    amplitude = float(perturbation_amplitude)
    if amplitude < 0.0:
        raise ValueError("perturbation_amplitude must be >= 0")
    seed = int(seed)
    if seed < 0:
        raise ValueError("seed must be a non-negative integer")

    mesh = _octagon_base()
    for _ in range(rounds):
        mesh = subdivide(mesh)

    if amplitude > 0.0:
        amp = amplitude
        for attempt in range(_PERTURB_RETRY_BUDGET):
            rng = np.random.default_rng([seed, attempt])
            with np.errstate(over="ignore", invalid="ignore"):
                lengths = _perturb_lengths(mesh, amp, rng)
                slack = triangle_slacks(face_corner_lengths(mesh, lengths))
            if np.all(np.isfinite(lengths)) and slack.min() > 0.0:
                mesh = IntrinsicMesh(
                    mesh.vertex_count, mesh.faces, mesh.face_edges,
                    mesh.face_orient, mesh.edges, lengths,
                )
                break
            amp *= 0.5
        else:
            raise MeshGenerationError(
                f"no admissible perturbation after {_PERTURB_RETRY_BUDGET} retries"
            )

    require_valid(mesh)
    return mesh


def is_simplicial(mesh):
    """True when edges are loop-free and no two cells share a vertex pair,
    i.e. the combinatorics embed in formats keyed by vertex pairs (OFF/OBJ).
    """
    if np.any(mesh.edges[:, 0] == mesh.edges[:, 1]):
        return False
    lo = mesh.edges.min(axis=1)
    hi = mesh.edges.max(axis=1)
    pairs = lo * np.int64(mesh.vertex_count) + hi
    return np.unique(pairs).size == pairs.size
