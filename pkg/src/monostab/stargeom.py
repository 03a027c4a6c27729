"""Star-shapedness of planar polygons and separation of dilated boundaries."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np
from scipy import ndimage

EDGE_SAMPLES = 256
SEP_SAMPLES = 512
TRANSVERSAL_RAD = 1e-3
GEOM_EPS = 1e-12


class GeometryError(ValueError):
    pass


@dataclass(frozen=True)
class Polygon:
    vertices: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.vertices, dtype=float)
        if v.ndim != 2 or v.shape[1] != 2 or len(v) < 3:
            raise GeometryError("need at least three planar vertices")
        object.__setattr__(self, "vertices", v)
        if self.signed_area() <= 0:
            raise GeometryError("vertices must be counter-clockwise with positive area")
        if not self.is_simple():
            raise GeometryError("polygon is not simple")

    @property
    def edges(self):
        return self.vertices, np.roll(self.vertices, -1, axis=0)

    def signed_area(self) -> float:
        x, y = self.vertices[:, 0], self.vertices[:, 1]
        return 0.5 * float(np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y))

    def is_simple(self) -> bool:
        a, b = self.edges
        n = len(a)
        for i in range(n):
            for j in range(i + 1, n):
                if j == i + 1 or (i == 0 and j == n - 1):
                    continue
                if _segments_intersect(a[i], b[i], a[j], b[j]):
                    return False
        return True

    def contains(self, p, eps: float = GEOM_EPS):
        """Closed containment: inside or within eps of the boundary.

        Accepts one point or an (M, 2) array; returns a bool or a bool array.
        """
        P = np.asarray(p, dtype=float)
        single = P.ndim == 1
        P = P.reshape(-1, 2)
        a, b = self.edges
        near = _dist_to_edges(P, a, b).min(axis=1) <= eps
        x, y = P[:, :1], P[:, 1:]
        yi, yj = a[None, :, 1], b[None, :, 1]
        cross = (yi > y) != (yj > y)
        with np.errstate(divide="ignore", invalid="ignore"):
            xint = a[None, :, 0] + (y - yi) * (b[None, :, 0] - a[None, :, 0]) / (yj - yi)
        odd = (np.count_nonzero(cross & (x < xint), axis=1) % 2).astype(bool)
        out = near | odd
        return bool(out[0]) if single else out

    def boundary_samples(self, per_edge: int) -> np.ndarray:
        a, b = self.edges
        t = np.arange(per_edge) / per_edge
        return (a[:, None, :] + t[None, :, None] * (b - a)[:, None, :]).reshape(-1, 2)

    def scaled(self, k: float) -> "Polygon":
        return Polygon(k * self.vertices)

    def to_json(self) -> str:
        return json.dumps({"vertices": self.vertices.tolist()})

    @staticmethod
    def from_json(text: str) -> "Polygon":
        return Polygon(np.array(json.loads(text)["vertices"], dtype=float))


def _orient(p, q, r):
    return (q[0] - p[0]) * (r[1] - p[1]) - (q[1] - p[1]) * (r[0] - p[0])


def _segments_intersect(p1, p2, q1, q2) -> bool:
    d1, d2 = _orient(q1, q2, p1), _orient(q1, q2, p2)
    d3, d4 = _orient(p1, p2, q1), _orient(p1, p2, q2)
    if ((d1 > 0) != (d2 > 0)) and ((d3 > 0) != (d4 > 0)) and d1 * d2 < 0 and d3 * d4 < 0:
        return True

    def on(p, q, r):
        return min(p[0], q[0]) - 1e-15 <= r[0] <= max(p[0], q[0]) + 1e-15 and \
            min(p[1], q[1]) - 1e-15 <= r[1] <= max(p[1], q[1]) + 1e-15

    return (d1 == 0 and on(q1, q2, p1)) or (d2 == 0 and on(q1, q2, p2)) or \
        (d3 == 0 and on(p1, p2, q1)) or (d4 == 0 and on(p1, p2, q2))


def _dist_to_edges(P, a, b):
    """(M, n) distances from points P to the edges a-b."""
    ab = b - a
    L2 = np.einsum("ij,ij->i", ab, ab)
    w = P[:, None, :] - a[None, :, :]
    t = np.clip(np.einsum("mij,ij->mi", w, ab) / np.where(L2 > 0, L2, 1.0), 0.0, 1.0)
    d = w - t[:, :, None] * ab[None, :, :]
    return np.hypot(d[..., 0], d[..., 1])


def segments_inside(poly: Polygon, x, Y) -> np.ndarray:
    """For each row y of Y, whether the closed segment [x, y] lies in the closed polygon.

    Each segment is cut at every parameter where it meets an edge (or where
    a collinear edge starts and ends); a piece is inside iff its midpoint is.
    """
    x = np.asarray(x, float)
    Y = np.asarray(Y, float).reshape(-1, 2)
    S = len(Y)
    a, b = poly.edges
    d = Y - x  # (S, 2)
    e = b - a  # (n, 2)
    w = a - x  # (n, 2)
    den = d[:, None, 0] * e[None, :, 1] - d[:, None, 1] * e[None, :, 0]
    wxe = w[:, 0] * e[:, 1] - w[:, 1] * e[:, 0]
    wxd = w[None, :, 0] * d[:, None, 1] - w[None, :, 1] * d[:, None, 0]
    par = np.abs(den) < 1e-15
    with np.errstate(divide="ignore", invalid="ignore"):
        t = wxe[None, :] / den
        s = wxd / den
        ok = ~par & (s >= -1e-12) & (s <= 1 + 1e-12)
        t = np.where(ok, t, np.nan)
        dd = np.einsum("ij,ij->i", d, d)[:, None]
        col = par & (np.abs(wxd) < 1e-15) & (dd > 0)
        ta = np.where(col, ((a[None] - x) * d[:, None]).sum(-1) / dd, np.nan)
        tb = np.where(col, ((b[None] - x) * d[:, None]).sum(-1) / dd, np.nan)
    T = np.concatenate([np.zeros((S, 1)), np.ones((S, 1)), t, ta, tb], axis=1)
    T = np.sort(np.clip(T, 0.0, 1.0), axis=1)  # nan sorts last
    t0, t1 = T[:, :-1], T[:, 1:]
    live = np.isfinite(t0) & np.isfinite(t1) & (t1 - t0 >= 1e-14)
    mid = 0.5 * (t0 + t1)
    pts = x + np.where(live, mid, 0.0)[..., None] * d[:, None, :]
    flat = live.ravel()
    good = np.ones(flat.shape, dtype=bool)
    if flat.any():
        good[flat] = poly.contains(pts.reshape(-1, 2)[flat])
    ends = poly.contains(Y) & poly.contains(x)
    return ends & good.reshape(live.shape).all(axis=1)


def segment_inside(poly: Polygon, x, y) -> bool:
    return bool(segments_inside(poly, x, np.asarray(y, float)[None, :])[0])


def is_star_center(poly: Polygon, x, per_edge: int = EDGE_SAMPLES) -> bool:
    """Every boundary sample is joined to x by a segment inside the polygon."""
    x = np.asarray(x, float)
    if not poly.contains(x):
        return False
    return bool(segments_inside(poly, x, poly.boundary_samples(per_edge)).all())


def is_strict_center(poly: Polygon, x, per_edge: int = EDGE_SAMPLES, min_angle: float = TRANSVERSAL_RAD) -> bool:
    """Star centre whose rays cross every edge at an angle of at least ``min_angle``."""
    if not is_star_center(poly, x, per_edge):
        return False
    x = np.asarray(x, float)
    a, b = poly.edges
    t = (np.arange(per_edge) + 0.5) / per_edge
    for ai, bi in zip(a, b):
        e = (bi - ai) / np.linalg.norm(bi - ai)
        pts = ai + t[:, None] * (bi - ai)
        ray = pts - x
        nr = np.linalg.norm(ray, axis=1)
        sin = np.abs(ray[:, 0] * e[1] - ray[:, 1] * e[0]) / np.where(nr > 0, nr, 1.0)
        if np.any(sin < math.sin(min_angle)):
            return False
    return True


@dataclass
class KernelEstimate:
    points: np.ndarray
    mask: np.ndarray
    cell: float
    area: float
    area_ratio: float
    strongly_star: bool
    star: bool


def star_center_set(poly: Polygon, grid: int = 64, per_edge: int = EDGE_SAMPLES) -> KernelEstimate:
    """Star centres among grid nodes over the bounding box.

    Strongly star-shaped iff the kernel contains a disk of radius two cells.
    """
    if grid < 32:
        raise GeometryError("grid must be at least 32")
    lo, hi = poly.vertices.min(axis=0), poly.vertices.max(axis=0)
    cell = float(max(hi - lo)) / grid
    xs = np.arange(lo[0], hi[0] + 0.5 * cell, cell)
    ys = np.arange(lo[1], hi[1] + 0.5 * cell, cell)
    mask = np.zeros((len(ys), len(xs)), dtype=bool)
    for i, yy in enumerate(ys):
        for j, xx in enumerate(xs):
            mask[i, j] = is_star_center(poly, (xx, yy), per_edge)
    pts = np.array([(xs[j], ys[i]) for i, j in zip(*np.nonzero(mask))]).reshape(-1, 2)
    area = mask.sum() * cell * cell
    strong = bool(mask.any() and ndimage.distance_transform_edt(np.pad(mask, 1)).max() > 2.0)
    return KernelEstimate(pts, mask, cell, float(area), float(area / poly.signed_area()), strong, bool(mask.any()))


def dilation_separation(poly: Polygon, kappa: float, per_edge: int = SEP_SAMPLES) -> float:
    """min distance between kappa * boundary and boundary, for a polygon star-shaped about 0."""
    if not kappa > 1:
        raise GeometryError("kappa must exceed 1")
    if not is_star_center(poly, (0.0, 0.0)):
        raise GeometryError("the origin is not a star centre")
    big = poly.scaled(kappa)
    a, b = poly.edges
    A, B = big.edges
    d1 = float(_dist_to_edges(big.boundary_samples(per_edge), a, b).min())
    d2 = float(_dist_to_edges(poly.boundary_samples(per_edge), A, B).min())
    return min(d1, d2)


def regular_polygon(n: int, radius: float = 1.0) -> Polygon:
    th = 2 * np.pi * np.arange(n) / n
    return Polygon(radius * np.column_stack([np.cos(th), np.sin(th)]))


def hourglass(neck: float = 0.1, height: float = 1.0) -> Polygon:
    """Two triangles joined by a neck whose walls lie on the lines y = +-x.

    The origin sees the whole polygon, and no other point does.
    """
    e, H = neck, height
    v = [(-H, -H), (H, -H), (e, -e), (e, e), (H, H), (-H, H), (-e, e), (-e, -e)]
    return Polygon(np.array(v))


def l_shape(notch: float = 0.3) -> Polygon:
    """Unit square with a corner notch; the kernel is an open set."""
    c = 1 - notch
    return Polygon(np.array([(-1, -1), (1, -1), (1, c), (c, c), (c, 1), (-1, 1)], dtype=float))
