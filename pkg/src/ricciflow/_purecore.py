"""Pure-numpy implementation of the per-face geometry kernels.

Import-time fallback for the compiled extension; semantics must match
``_fastcore`` exactly (same formulas, same accumulation order for the
scatter reductions).
"""

import numpy as np

BACKEND_NAME = "python"


def face_geometry(ell):
    """Corner angles, areas, and corner cotangents of flat triangles.

    Parameters
    ----------
    ell : (F, 3) float64 array
        Side lengths, column ``c`` opposite corner ``c``.  Caller guarantees
        the strict triangle inequality.

    Returns
    -------
    angles : (F, 3) corner angles (radians), column c at corner c
    areas : (F,) triangle areas
    cots : (F, 3) cotangent of each corner angle
    """
    ell = np.asarray(ell, dtype=np.float64)
    a = ell[:, 0]
    b = ell[:, 1]
    c = ell[:, 2]

    # Kahan's stable Heron form needs the sides sorted descending.
    s = np.sort(ell, axis=1)
    lo, md, hi = s[:, 0], s[:, 1], s[:, 2]
    area = 0.25 * np.sqrt(
        (hi + (md + lo)) * (lo - (hi - md)) * (lo + (hi - md)) * (hi + (md - lo))
    )

    d0 = b * b + c * c - a * a
    d1 = c * c + a * a - b * b
    d2 = a * a + b * b - c * c
    angles = np.empty_like(ell)
    np.arccos(np.clip(d0 / (2.0 * b * c), -1.0, 1.0), out=angles[:, 0])
    np.arccos(np.clip(d1 / (2.0 * c * a), -1.0, 1.0), out=angles[:, 1])
    np.arccos(np.clip(d2 / (2.0 * a * b), -1.0, 1.0), out=angles[:, 2])

    cots = np.empty_like(ell)
    q = 1.0 / (4.0 * area)
    cots[:, 0] = d0 * q
    cots[:, 1] = d1 * q
    cots[:, 2] = d2 * q
    return angles, area, cots


def face_areas(ell):
    """Triangle areas only (stable Heron form), for volume bookkeeping."""
    ell = np.asarray(ell, dtype=np.float64)
    s = np.sort(ell, axis=1)
    lo, md, hi = s[:, 0], s[:, 1], s[:, 2]
    return 0.25 * np.sqrt(
        (hi + (md + lo)) * (lo - (hi - md)) * (lo + (hi - md)) * (hi + (md - lo))
    )


def vertex_sums(faces, angles, areas, nv):
    """Accumulate corner angles and incident face areas onto vertices.

    Returns (angle_sum, area_sum).  Angles accumulate corner-major, areas
    face-major; the compiled kernel uses the same order.
    """
    angle_sum = np.zeros(nv, dtype=np.float64)
    area_sum = np.zeros(nv, dtype=np.float64)
    for c in range(3):
        np.add.at(angle_sum, faces[:, c], angles[:, c])
    np.add.at(area_sum, faces.ravel(), np.repeat(areas, 3))
    return angle_sum, area_sum


def edge_cot_weights(face_edges, cots, ne):
    """Half-sum of the corner cotangents opposite each edge cell."""
    w = np.zeros(ne, dtype=np.float64)
    np.add.at(w, face_edges.ravel(), 0.5 * cots.ravel())
    return w
