"""Mesh file formats.

OFF and OBJ files (vertex/face records) are ingested by computing Euclidean
edge lengths from the coordinates and then discarding the embedding; all
downstream work is intrinsic.  Generated meshes are exported as OFF with a
manifest comment header plus placeholder coordinates (a genus-2 intrinsic
metric admits no isometric embedding, so only the combinatorics and manifest
are contractual on reload).  The native JSON format carries the intrinsic
data exactly, including quotient combinatorics.
"""

import io
import json
import os

import numpy as np

from .errors import MeshExportError, MeshParseError
from .mesh import IntrinsicMesh, is_simplicial, mesh_from_coordinates, require_valid

MANIFEST_PREFIX = "ricciflow-manifest:"
MESH_JSON_FORMAT = "ricciflow-intrinsic-mesh"


def _open_maybe(source, mode):
    if hasattr(source, "read") or hasattr(source, "write"):
        return source, False
    return open(source, mode), True


def _text_lines(source):
    stream, owned = _open_maybe(source, "rb")
    try:
        data = stream.read()
    finally:
        if owned:
            stream.close()
    if isinstance(data, bytes):
        data = data.decode("utf-8", errors="replace")
    return data.splitlines()


def infer_format(name):
    ext = os.path.splitext(str(name))[1].lower()
    return {".off": "off", ".obj": "obj", ".json": "json"}.get(ext)


def read_manifest(source):
    """Manifest dict from a '# ricciflow-manifest: {...}' comment, or None."""
    for line in _text_lines(source):
        s = line.strip()
        if not s.startswith("#"):
            # manifests live in the leading comment block
            if s and not s.upper().startswith("OFF"):
                break
            continue
        body = s.lstrip("#").strip()
        if body.startswith(MANIFEST_PREFIX):
            try:
                return json.loads(body[len(MANIFEST_PREFIX):])
            except json.JSONDecodeError as exc:
                raise MeshParseError(f"unreadable manifest header: {exc}") from exc
    return None


def _parse_off(lines):
    rows = []
    for line in lines:
        s = line.split("#", 1)[0].strip()
        if s:
            rows.append(s)
    if not rows:
        raise MeshParseError("empty OFF file")
    if rows[0].upper() == "OFF":
        rows = rows[1:]
    if not rows:
        raise MeshParseError("OFF file has no counts line")
    try:
        nv, nf = (int(x) for x in rows[0].split()[:2])
    except (ValueError, IndexError) as exc:
        raise MeshParseError(f"bad OFF counts line: {rows[0]!r}") from exc
    if len(rows) < 1 + nv + nf:
        raise MeshParseError("OFF file truncated")
    try:
        coords = np.array(
            [[float(x) for x in rows[1 + i].split()[:3]] for i in range(nv)]
        )
    except (ValueError, IndexError) as exc:
        raise MeshParseError("bad OFF vertex line") from exc
    faces = []
    for i in range(nf):
        parts = rows[1 + nv + i].split()
        try:
            cnt = int(parts[0])
            idx = [int(x) for x in parts[1:1 + cnt]]
        except (ValueError, IndexError) as exc:
            raise MeshParseError(f"bad OFF face line: {rows[1 + nv + i]!r}") from exc
        if cnt != 3:
            raise MeshParseError(f"face {i} has {cnt} vertices; triangles only")
        faces.append(idx)
    return coords, faces


def _parse_obj(lines):
    coords = []
    faces = []
    for ln, line in enumerate(lines, 1):
        s = line.strip()
        if not s or s.startswith("#"):
            continue
        parts = s.split()
        if parts[0] == "v":
            try:
                coords.append([float(x) for x in parts[1:4]])
            except (ValueError, IndexError) as exc:
                raise MeshParseError(f"bad OBJ vertex at line {ln}") from exc
        elif parts[0] == "f":
            try:
                idx = [int(p.split("/")[0]) - 1 for p in parts[1:]]
            except (ValueError, IndexError) as exc:
                raise MeshParseError(f"bad OBJ face at line {ln}") from exc
            if len(idx) != 3:
                raise MeshParseError(f"OBJ face at line {ln} is not a triangle")
            faces.append(idx)
        # other record types carry no intrinsic data and are ignored
    return np.array(coords), faces


def load_mesh(source, fmt=None):
    """Read an OFF/OBJ/JSON mesh; validation runs before returning.

    ``fmt`` is inferred from the file name when omitted.  OFF/OBJ vertices
    must carry 3D coordinates; the coordinates only seed the reference edge
    lengths and are then dropped.
    """
    if fmt is None:
        name = getattr(source, "name", source)
        fmt = infer_format(name)
        if fmt is None:
            raise MeshParseError(f"cannot infer mesh format from {name!r}")
    fmt = fmt.lower()
    if fmt == "json":
        stream, owned = _open_maybe(source, "rb")
        try:
            data = json.load(stream)
        except json.JSONDecodeError as exc:
            raise MeshParseError(f"bad mesh JSON: {exc}") from exc
        finally:
            if owned:
                stream.close()
        return mesh_from_json_dict(data)
    lines = _text_lines(source)
    if fmt == "off":
        coords, faces = _parse_off(lines)
    elif fmt == "obj":
        coords, faces = _parse_obj(lines)
    else:
        raise MeshParseError(f"unsupported mesh format {fmt!r}")
    if coords.ndim != 2 or coords.shape[1] != 3:
        raise MeshParseError("vertices must carry 3D coordinates")
    return mesh_from_coordinates(coords, faces)


def placeholder_coordinates(n):
    """Deterministic embedding-free vertex coordinates for OFF export.

    Points on the moment curve (t, t^2, t^3): any three distinct points are
    affinely independent, so every exported face reloads as a genuine
    triangle.  The coordinates carry no metric meaning.
    """
    t = np.linspace(-1.0, 1.0, n) if n > 1 else np.zeros(1)
    return np.column_stack([t, t * t, t * t * t])


def write_off(mesh, target, manifest=None, coords=None):
    """Write the mesh combinatorics as OFF (byte-deterministic).

    Refuses quotient combinatorics (loops or parallel edges): OFF identifies
    edges by vertex pairs, so such meshes would reload as non-manifold.
    """
    if not is_simplicial(mesh):
        raise MeshExportError(
            "mesh has loop or parallel edges and cannot be written as OFF "
            "(genus-2 generator output needs subdivision_rounds >= 2)"
        )
    if coords is None:
        coords = placeholder_coordinates(mesh.vertex_count)
    buf = io.StringIO()
    buf.write("OFF\n")
    if manifest is not None:
        blob = json.dumps(manifest, sort_keys=True, separators=(",", ":"))
        buf.write(f"# {MANIFEST_PREFIX} {blob}\n")
    buf.write(f"{mesh.vertex_count} {mesh.face_count} {mesh.edge_count}\n")
    for x, y, z in coords:
        buf.write(f"{float(x)!r} {float(y)!r} {float(z)!r}\n")
    for i, j, k in mesh.faces:
        buf.write(f"3 {i} {j} {k}\n")
    data = buf.getvalue().encode()
    stream, owned = _open_maybe(target, "wb")
    try:
        stream.write(data)
    finally:
        if owned:
            stream.close()
    return data


def mesh_to_json_dict(mesh, manifest=None):
    doc = {
        "format": MESH_JSON_FORMAT,
        "version": 1,
        "vertex_count": mesh.vertex_count,
        "faces": mesh.faces.tolist(),
        "face_edges": mesh.face_edges.tolist(),
        "face_orient": mesh.face_orient.tolist(),
        "edges": mesh.edges.tolist(),
        "lengths": [float(x) for x in mesh.lengths0],
    }
    if manifest is not None:
        doc["manifest"] = manifest
    return doc


def mesh_from_json_dict(data):
    if data.get("format") != MESH_JSON_FORMAT:
        raise MeshParseError("not an intrinsic-mesh JSON document")
    try:
        mesh = IntrinsicMesh(
            data["vertex_count"],
            data["faces"],
            data["face_edges"],
            data["face_orient"],
            data["edges"],
            data["lengths"],
        )
    except (KeyError, ValueError) as exc:
        raise MeshParseError(f"bad intrinsic-mesh JSON: {exc}") from exc
    require_valid(mesh)
    return mesh


def write_mesh_json(mesh, target, manifest=None):
    doc = mesh_to_json_dict(mesh, manifest)
    data = (json.dumps(doc, sort_keys=True, indent=1) + "\n").encode()
    stream, owned = _open_maybe(target, "wb")
    try:
        stream.write(data)
    finally:
        if owned:
            stream.close()
    return data
