"""
Specular ray tracing over planar quadrilateral facets with the image method.

Reflections up to second order are enumerated by mirroring the transmitter
across every facet sequence, then back-tracking reflection points from the
receiver. A candidate survives when each reflection point lies inside its
facet and no leg is blocked by another facet.

Angles follow the compass convention: azimuth is the bearing clockwise from
north (+y) towards east (+x), elevation is measured up from the horizontal.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .constants import ns_from_m

EPS_M = 1e-6
REFLECTION_LOSS_DB = 10.0
MAX_ORDER = 2


class FacetError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class Facet:
    """Planar convex quadrilateral (normally a rectangle) given by four
    vertices in order around its boundary."""

    vertices: np.ndarray
    id: str = ""
    normal: np.ndarray = field(init=False, repr=False)
    offset: float = field(init=False, repr=False)

    def __post_init__(self):
        v = np.asarray(self.vertices, dtype=float)
        if v.shape != (4, 3) or not np.all(np.isfinite(v)):
            raise FacetError(f"facet {self.id!r}: expected four finite 3-D vertices")
        # Newell's method gives a robust normal for a planar polygon
        n = np.zeros(3)
        for i in range(4):
            a, b = v[i], v[(i + 1) % 4]
            n += np.cross(a, b)
        area2 = np.linalg.norm(n)
        if area2 < 1e-9:
            raise FacetError(f"facet {self.id!r}: degenerate (zero area)")
        n = n / area2
        offset = float(n @ v.mean(axis=0))
        if np.max(np.abs(v @ n - offset)) > EPS_M:
            raise FacetError(f"facet {self.id!r}: vertices are not coplanar")
        v.setflags(write=False)
        n.setflags(write=False)
        object.__setattr__(self, "vertices", v)
        object.__setattr__(self, "normal", n)
        object.__setattr__(self, "offset", offset)
        for i in range(4):
            if min(self._edge_side(i, v[(i + 2) % 4]), self._edge_side(i, v[(i + 3) % 4])) <= 0:
                raise FacetError(f"facet {self.id!r}: vertices do not form a convex quadrilateral")

    def _edge_side(self, i, p):
        a, b = self.vertices[i], self.vertices[(i + 1) % 4]
        return np.cross(b - a, p - a) @ self.normal

    def signed_distance(self, p):
        return float(self.normal @ p - self.offset)

    def contains(self, p, eps=EPS_M):
        """Whether `p` lies on the facet (edges included, within `eps`)."""
        if abs(self.signed_distance(p)) > eps:
            return False
        for i in range(4):
            a, b = self.vertices[i], self.vertices[(i + 1) % 4]
            if self._edge_side(i, p) < -eps * np.linalg.norm(b - a):
                return False
        return True

    def mirror(self, p):
        return p - 2.0 * self.signed_distance(p) * self.normal

    def blocks(self, a, b, eps=EPS_M):
        """Whether the open segment a-b passes through the facet.

        Contacts within `eps` of either endpoint are ignored so legs may start
        and end on reflecting facets.
        """
        sa, sb = self.signed_distance(a), self.signed_distance(b)
        if (sa > eps and sb > eps) or (sa < -eps and sb < -eps):
            return False
        denom = sa - sb
        if abs(denom) < 1e-15:
            return False  # segment lies in (or parallel to) the plane
        t = sa / denom
        length = float(np.linalg.norm(b - a))
        if t * length <= eps or (1.0 - t) * length <= eps:
            return False
        return self.contains(a + t * (b - a))


def rectangle(corner, edge_u, edge_v, id=""):
    """Facet spanned from `corner` by two perpendicular edge vectors."""
    c = np.asarray(corner, dtype=float)
    u = np.asarray(edge_u, dtype=float)
    w = np.asarray(edge_v, dtype=float)
    return Facet(np.array([c, c + u, c + u + w, c + w]), id=id)


def direction_angles(vec):
    """(azimuth, elevation) in degrees of a direction vector."""
    x, y, z = (float(c) for c in vec)
    az = math.degrees(math.atan2(x, y)) % 360.0
    if az >= 360.0:
        az = 0.0
    el = math.degrees(math.atan2(z, math.hypot(x, y)))
    return az, el


def angular_distance_deg(a, b):
    """Great-circle separation in degrees between two (azimuth, elevation) pairs."""
    az1, el1 = map(math.radians, a)
    az2, el2 = map(math.radians, b)
    u = np.array([math.cos(el1) * math.sin(az1), math.cos(el1) * math.cos(az1), math.sin(el1)])
    v = np.array([math.cos(el2) * math.sin(az2), math.cos(el2) * math.cos(az2), math.sin(el2)])
    return math.degrees(math.atan2(np.linalg.norm(np.cross(u, v)), float(u @ v)))


@dataclass(frozen=True, eq=False)
class RayPath:
    tx: tuple
    rx: tuple
    points: tuple
    facet_ids: tuple
    total_length_m: float
    image_length_m: float
    aod: tuple
    aoa: tuple

    @property
    def order(self):
        return len(self.points)

    @property
    def delay_ns(self):
        return ns_from_m(self.total_length_m)

    @property
    def vertices(self):
        """tx, reflection points, rx as arrays."""
        return [np.asarray(self.tx)] + [np.asarray(p) for p in self.points] + [np.asarray(self.rx)]

    def strength_db(self):
        """Relative ranking strength: free-space spreading plus a flat loss
        per reflection."""
        return -20.0 * math.log10(self.total_length_m) - REFLECTION_LOSS_DB * self.order


Scene = tuple


def _facet_key(facet, index):
    return facet.id or f"#{index}"


class _SceneArrays:
    """Facet planes and edges stacked for vectorized tests."""

    def __init__(self, scene):
        self.scene = scene
        self.normals = np.array([f.normal for f in scene]).reshape(-1, 3)
        self.offsets = np.array([f.offset for f in scene])
        verts = np.array([f.vertices for f in scene]).reshape(-1, 4, 3)
        self.starts = verts
        self.edges = np.roll(verts, -1, axis=1) - verts
        self.edge_len = np.linalg.norm(self.edges, axis=2)

    def contains(self, points, idx):
        """Vectorized Facet.contains for points[m] on facet idx[m]."""
        n = self.normals[idx]
        ok = np.abs(np.einsum("ij,ij->i", n, points) - self.offsets[idx]) <= EPS_M
        for e in range(4):
            side = np.einsum("ij,ij->i", np.cross(self.edges[idx, e], points - self.starts[idx, e]), n)
            ok &= side >= -EPS_M * self.edge_len[idx, e]
        return ok

    def blocked(self, a, b):
        """Whether any facet blocks the open segment a-b (see Facet.blocks)."""
        if not len(self.scene):
            return False
        sa = self.normals @ a - self.offsets
        sb = self.normals @ b - self.offsets
        cand = ~(((sa > EPS_M) & (sb > EPS_M)) | ((sa < -EPS_M) & (sb < -EPS_M)))
        denom = sa - sb
        cand &= np.abs(denom) >= 1e-15
        if not cand.any():
            return False
        idx = np.flatnonzero(cand)
        t = sa[idx] / denom[idx]
        length = float(np.linalg.norm(b - a))
        inner = (t * length > EPS_M) & ((1.0 - t) * length > EPS_M)
        if not inner.any():
            return False
        idx, t = idx[inner], t[inner]
        points = a + t[:, None] * (b - a)
        return bool(self.contains(points, idx).any())

    def reflect_all(self, src, target):
        """Reflection points of `src` mirrored in every facet towards `target`.

        Returns facet indices, images and reflection points for the facets
        where the mirrored ray actually lands on the facet.
        """
        sd = self.normals @ src - self.offsets
        images = src - 2.0 * sd[:, None] * self.normals
        sa = np.einsum("ij,ij->i", self.normals, images) - self.offsets
        sb = self.normals @ target - self.offsets
        ok = ((sa > EPS_M) & (sb < -EPS_M)) | ((sa < -EPS_M) & (sb > EPS_M))
        idx = np.flatnonzero(ok)
        if idx.size == 0:
            return idx, images[idx], images[idx]
        t = sa[idx] / (sa[idx] - sb[idx])
        points = images[idx] + t[:, None] * (target - images[idx])
        keep = self.contains(points, idx)
        return idx[keep], images[idx][keep], points[keep]


def _back_track(arrays, seq, tx, rx):
    """Reflection points for facet sequence `seq`, or None if invalid."""
    scene = arrays.scene
    images = [tx]
    for i in seq:
        images.append(scene[i].mirror(images[-1]))
    target = rx
    points = []
    for level in range(len(seq), 0, -1):
        facet = scene[seq[level - 1]]
        src = images[level]
        sa, sb = facet.signed_distance(src), facet.signed_distance(target)
        if not ((sa > EPS_M and sb < -EPS_M) or (sa < -EPS_M and sb > EPS_M)):
            return None
        p = src + (sa / (sa - sb)) * (target - src)
        if not facet.contains(p):
            return None
        points.append(p)
        target = p
    points.reverse()
    return points, float(np.linalg.norm(rx - images[-1]))


def _candidate_sequences(arrays, tx, rx, max_order):
    yield ()
    if max_order >= 1:
        idx, _, _ = arrays.reflect_all(tx, rx)
        for i in idx:
            yield (int(i),)
    if max_order >= 2:
        # For the second bounce, the first image acts as the source; the
        # vectorized filter keeps facets whose last reflection point is valid.
        for i in range(len(arrays.scene)):
            image1 = arrays.scene[i].mirror(tx)
            idx, _, _ = arrays.reflect_all(image1, rx)
            for j in idx:
                if j != i:
                    yield (i, int(j))


def trace_paths(scene: Sequence[Facet], tx, rx, max_order: int = MAX_ORDER):
    """All valid specular paths from `tx` to `rx`, shortest first."""
    if not 0 <= max_order <= MAX_ORDER:
        raise ValueError(f"max_order must lie in [0, {MAX_ORDER}], got {max_order}")
    tx = np.asarray(tx, dtype=float)
    rx = np.asarray(rx, dtype=float)
    if np.linalg.norm(tx - rx) <= EPS_M:
        raise ValueError("tx and rx coincide")
    scene = tuple(scene)
    arrays = _SceneArrays(scene)
    found = []
    for seq in _candidate_sequences(arrays, tx, rx, max_order):
        if seq:
            traced = _back_track(arrays, seq, tx, rx)
            if traced is None:
                continue
            points, image_len = traced
        else:
            points, image_len = [], float(np.linalg.norm(rx - tx))
        chain = [tx] + points + [rx]
        if any(arrays.blocked(chain[i], chain[i + 1]) for i in range(len(chain) - 1)):
            continue
        legs = [float(np.linalg.norm(chain[i + 1] - chain[i])) for i in range(len(chain) - 1)]
        found.append(
            RayPath(
                tx=tuple(tx.tolist()),
                rx=tuple(rx.tolist()),
                points=tuple(tuple(p.tolist()) for p in points),
                facet_ids=tuple(_facet_key(scene[i], i) for i in seq),
                total_length_m=math.fsum(legs),
                image_length_m=image_len,
                aod=direction_angles(chain[1] - tx),
                aoa=direction_angles(chain[-2] - rx),
            )
        )
    found.sort(key=lambda p: (p.total_length_m, p.order, p.facet_ids))
    return found


def predict_strongest_aoas(paths: Sequence[RayPath], limit: int = 4):
    """Up to `limit` paths ranked by predicted strength (strongest first)."""
    ranked = sorted(paths, key=lambda p: (-p.strength_db(), p.order, p.total_length_m, p.facet_ids))
    return ranked[:limit]


def reflection_residuals(path: RayPath, scene: Sequence[Facet]):
    """Angle in radians between each outgoing leg and the mirror image of the
    incoming leg; zero for an exact specular reflection."""
    by_id = {_facet_key(f, i): f for i, f in enumerate(scene)}
    chain = path.vertices
    out = []
    for i, fid in enumerate(path.facet_ids, start=1):
        n = by_id[fid].normal
        d_in = chain[i] - chain[i - 1]
        d_in = d_in / np.linalg.norm(d_in)
        d_out = chain[i + 1] - chain[i]
        d_out = d_out / np.linalg.norm(d_out)
        mirrored = d_in - 2.0 * (d_in @ n) * n
        out.append(math.atan2(float(np.linalg.norm(np.cross(mirrored, d_out))), float(mirrored @ d_out)))
    return out


# --- scene files -------------------------------------------------------------


def scene_from_dict(obj):
    facets = obj.get("facets") if isinstance(obj, dict) else obj
    if not isinstance(facets, list):
        raise FacetError("scene must hold a list of facets")
    out = []
    for i, f in enumerate(facets):
        verts = f["vertices"] if isinstance(f, dict) else f
        fid = str(f.get("id", f"#{i}")) if isinstance(f, dict) else f"#{i}"
        out.append(Facet(np.asarray(verts, dtype=float), id=fid))
    ids = [f.id for f in out]
    if len(set(ids)) != len(ids):
        raise FacetError("facet ids must be unique")
    return tuple(out)


def load_scene(path):
    return scene_from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


def scene_to_dict(scene):
    return {"facets": [{"id": f.id, "vertices": f.vertices.tolist()} for f in scene]}


def save_scene(scene, path):
    Path(path).write_text(json.dumps(scene_to_dict(scene), indent=1) + "\n", encoding="utf-8")
