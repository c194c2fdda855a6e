"""Discrete Laplacian spectra and their evolution along a metric family.

The generalized problem L u = lambda M u with the cotangent stiffness L and
the lumped (diagonal) mass M discretizes -Delta u = lambda u on the surface;
lambda_0 = 0 with constant eigenvector is the kernel on a connected closed
mesh, and the geometric eigenvalue indexing starts at lambda_1.
"""

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import EigenSolveError
from .geometry import FacePass, cotan_weights
from .mesh import IntrinsicMesh  # noqa: F401  (typing-by-documentation)

# Below this size (or when the block nearly fills the space) a dense solve is
# cheaper and more robust than shift-invert ARPACK.
_DENSE_CUTOFF = 64

_RESIDUAL_TOL = 1e-8
_ORTHO_TOL = 1e-9


@dataclass(frozen=True)
class SpectrumSlice:
    """The smallest generalized eigenpairs of one metric state.

    eigenvalues are ascending, eigenvectors columns are orthonormal in the
    mass inner product recorded in ``mass`` (the lumped vertex areas).
    """

    t: float
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    mass: np.ndarray

    @property
    def count(self):
        return self.eigenvalues.shape[0]


@dataclass
class EigenTrack:
    """One eigenvalue index followed through a sequence of slices.

    ``qualities[s]`` is the overlap used for the transition from slice s to
    slice s+1; a track is ambiguous when any transition falls below the
    configured floor.
    """

    index: int
    times: np.ndarray
    values: np.ndarray
    columns: np.ndarray
    qualities: np.ndarray
    overlap_floor: float = 0.5

    @property
    def ambiguous(self):
        return bool(self.qualities.size and self.qualities.min() < self.overlap_floor)


def assemble_operators(mesh, state, face_pass=None):
    """Cotangent stiffness L and lumped mass M of a metric state.

    L is symmetric positive semidefinite with the constants in its kernel
    (row sums vanish); M is the positive diagonal of vertex areas.  Loop
    edges of quotient complexes contribute nothing to L.
    """
    fp = face_pass if face_pass is not None else FacePass(mesh, state)
    w = cotan_weights(mesh, state, face_pass=fp)
    tail = mesh.edges[:, 0]
    head = mesh.edges[:, 1]
    keep = tail != head
    ti, hi, wk = tail[keep], head[keep], w[keep]

    n = mesh.vertex_count
    rows = np.concatenate([ti, hi, ti, hi])
    cols = np.concatenate([ti, hi, hi, ti])
    vals = np.concatenate([wk, wk, -wk, -wk])
    L = sp.coo_matrix((vals, (rows, cols)), shape=(n, n)).tocsr()
    M = sp.diags(fp.area_sum / 3.0, format="csr")
    return L, M


def _fix_signs(vectors):
    for j in range(vectors.shape[1]):
        col = vectors[:, j]
        if col[np.argmax(np.abs(col))] < 0.0:
            vectors[:, j] = -col
    return vectors


def _check_contract(L, M, lam, vectors):
    mass = M.diagonal()
    mv = mass[:, None] * vectors
    gram = vectors.T @ mv
    ortho_err = float(np.abs(gram - np.eye(gram.shape[0])).max())
    if ortho_err > _ORTHO_TOL:
        raise EigenSolveError(f"mass-orthonormality violated: {ortho_err:.3e}")
    resid = L @ vectors - mv * lam[None, :]
    for j in range(lam.size):
        bound = _RESIDUAL_TOL * np.linalg.norm(mv[:, j]) * max(lam[j], 1.0)
        r = float(np.linalg.norm(resid[:, j]))
        if r > bound:
            raise EigenSolveError(
                f"residual {r:.3e} exceeds contract {bound:.3e} for pair {j}"
            )


def smallest_eigenpairs(L, M, k, t=0.0, warm_start=None, maxiter=None):
    """The k+1 smallest generalized eigenpairs (kernel included).

    Uses a dense solve for small problems and shift-invert ARPACK otherwise;
    either way the eigenvalues are reported as Rayleigh quotients of the
    returned vectors and the residual/orthonormality contract is enforced.
    ``warm_start`` (eigenvectors of a nearby state) seeds the iteration;
    results are deterministic for fixed inputs.
    """
    n = L.shape[0]
    m = int(k) + 1
    if m < 1 or m > n:
        raise ValueError(f"cannot extract {m} pairs from a {n}-vertex mesh")
    mass = M.diagonal()

    if n <= max(_DENSE_CUTOFF, 2 * m + 2) or m >= n - 1:
        lam, vec = scipy.linalg.eigh(L.toarray(), np.diag(mass))
        lam, vec = lam[:m], vec[:, :m]
    else:
        scale = float(L.diagonal().sum() / mass.sum())
        sigma = -1e-3 * scale
        if warm_start is not None:
            v0 = np.asarray(warm_start, dtype=np.float64)
            v0 = v0.sum(axis=1) if v0.ndim == 2 else v0
        else:
            v0 = np.linspace(1.0, 2.0, n)
        ncv = min(n - 1, max(2 * m + 1, 20))
        try:
            lam, vec = spla.eigsh(
                L, k=m, M=M, sigma=sigma, which="LM",
                v0=v0, ncv=ncv, maxiter=maxiter,
            )
        except spla.ArpackNoConvergence as exc:
            raise EigenSolveError(
                f"eigensolver did not converge within its iteration budget: {exc}"
            ) from exc

    # Rayleigh quotients of the solver vectors are the reported eigenvalues.
    mv = mass[:, None] * vec
    lam = np.einsum("ij,ij->j", vec, L @ vec) / np.einsum("ij,ij->j", vec, mv)
    order = np.argsort(lam, kind="stable")
    lam = lam[order]
    vec = vec[:, order]
    vec = vec / np.sqrt(np.einsum("ij,ij->j", vec, mass[:, None] * vec))
    vec = _fix_signs(vec)

    _check_contract(L, M, lam, vec)
    lam.setflags(write=False)
    vec.setflags(write=False)
    return SpectrumSlice(t=float(t), eigenvalues=lam, eigenvectors=vec, mass=mass)


def track_eigenpairs(prev, nxt):
    """Match the eigenvectors of two nearby slices by mass-overlap.

    Greedy on descending absolute overlap (sign flips are invisible);
    returns (pairing, quality) where ``pairing[p]`` is the column of ``nxt``
    continuing column ``p`` of ``prev`` and ``quality[p]`` the normalized
    overlap of that match.
    """
    mass = prev.mass
    weighted = mass[:, None] * nxt.eigenvectors
    overlap = np.abs(prev.eigenvectors.T @ weighted)
    norm_p = np.sqrt(np.einsum("ij,ij->j", prev.eigenvectors,
                               mass[:, None] * prev.eigenvectors))
    norm_n = np.sqrt(np.einsum("ij,ij->j", nxt.eigenvectors, weighted))
    overlap = overlap / np.outer(norm_p, norm_n)

    m = overlap.shape[0]
    pairing = np.full(m, -1, dtype=np.int64)
    quality = np.zeros(m)
    taken = np.zeros(overlap.shape[1], dtype=bool)
    flat = np.argsort(-overlap, axis=None, kind="stable")
    assigned = 0
    for idx in flat:
        p, q = divmod(int(idx), overlap.shape[1])
        if pairing[p] >= 0 or taken[q]:
            continue
        pairing[p] = q
        taken[q] = True
        quality[p] = overlap[p, q]
        assigned += 1
        if assigned == m:
            break
    return pairing, quality


def build_tracks(slices, overlap_floor=0.5, indices=None):
    """Follow each eigenvalue index through a time-ordered slice sequence."""
    if not slices:
        return []
    count = slices[0].count
    if indices is None:
        indices = range(1, count)
    times = np.array([s.t for s in slices])

    cols = np.arange(count)[None, :].repeat(len(slices), axis=0)
    quals = np.ones((max(len(slices) - 1, 0), count))
    for s in range(len(slices) - 1):
        pairing, quality = track_eigenpairs(slices[s], slices[s + 1])
        cols[s + 1] = pairing[cols[s]]
        quals[s] = quality[cols[s]]

    tracks = []
    for i in indices:
        values = np.array(
            [slices[s].eigenvalues[cols[s, i]] for s in range(len(slices))]
        )
        tracks.append(
            EigenTrack(
                index=int(i),
                times=times,
                values=values,
                columns=cols[:, i].copy(),
                qualities=quals[:, i].copy(),
                overlap_floor=float(overlap_floor),
            )
        )
    return tracks


def eigenvalue_time_derivative(curvature, slice_, i):
    """Predicted d(lambda_i)/dt along the flow at one snapshot.

    The rate is lambda_i times the (R - r) average weighted by the squared
    eigenfunction against the lumped measure.
    """
    u = slice_.eigenvectors[:, i]
    w = u * u * curvature.area
    num = float(((curvature.scalar - curvature.average_scalar) * w).sum())
    return float(slice_.eigenvalues[i]) * num / float(w.sum())
