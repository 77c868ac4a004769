"""Mesh ingestion: a small JSON schema and OFF files."""
from __future__ import annotations

import json
from pathlib import Path

from .geometry import EmbeddedComplex, rescale_to_unit_disk


def complex_from_json(obj: dict, label: str = "") -> EmbeddedComplex:
    try:
        vertices = obj["vertices"]
        simplices = obj.get("simplices", [])
    except (KeyError, AttributeError, TypeError) as exc:
        raise ValueError("mesh JSON needs a 'vertices' list") from exc
    if not vertices:
        raise ValueError("empty shape")
    return EmbeddedComplex.from_simplices(vertices, simplices, label=obj.get("label", label))


def complex_to_json(k: EmbeddedComplex) -> dict:
    top = [list(s) for dim in k.simplices[1:] for s in dim]
    return {"label": k.label, "vertices": k.vertices.tolist(), "simplices": top}


def parse_off(text: str, label: str = "") -> EmbeddedComplex:
    """Parse an OFF mesh; polygonal faces are fan-triangulated and trailing
    per-face colour values are ignored."""
    lines = [ln.split("#", 1)[0].split() for ln in text.splitlines()]
    lines = [ln for ln in lines if ln]
    if not lines or not lines[0][0].endswith("OFF"):
        raise ValueError("missing OFF header")
    head = lines[0][1:] or lines[1]
    body = lines[1:] if lines[0][1:] else lines[2:]
    try:
        nv, nf = int(head[0]), int(head[1])
        verts = [[float(t) for t in ln[:3]] for ln in body[:nv]]
        faces = []
        for ln in body[nv:nv + nf]:
            k = int(ln[0])
            idx = [int(t) for t in ln[1:1 + k]]
            if len(idx) != k:
                raise ValueError("short face record")
            if k >= 3:
                faces.extend((idx[0], idx[i], idx[i + 1]) for i in range(1, k - 1))
            else:
                faces.append(tuple(idx))
    except (IndexError, ValueError) as exc:
        raise ValueError(f"malformed OFF file: {exc}") from exc
    if nv == 0:
        raise ValueError("empty shape")
    if len(verts) != nv or any(len(v) != 3 for v in verts):
        raise ValueError("malformed OFF file: vertex block truncated")
    faces = list(dict.fromkeys(tuple(sorted(f)) for f in faces))
    return EmbeddedComplex.from_simplices(verts, faces, label=label)


def load_mesh(path, rescale: bool = True) -> EmbeddedComplex:
    path = Path(path)
    text = path.read_text()
    if path.suffix.lower() == ".off":
        k = parse_off(text, label=path.stem)
    else:
        k = complex_from_json(json.loads(text), label=path.stem)
    return rescale_to_unit_disk(k) if rescale else k
