"""Node-based masks on uniform grids (one or two dimensions).

A mask is a boolean array over grid nodes; ``True`` marks unknowns, and every
``False`` node carries the homogeneous Dirichlet value.  Builders always leave
at least one layer of ``False`` nodes around the domain.  For curved
boundaries a node counts as inside when it lies more than h/2 inside the
domain, which places the discrete boundary at the nearest node layer.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage, sparse


class MaskError(ValueError):
    pass


@dataclass
class Mask:
    inside: np.ndarray
    h: float
    origin: tuple = (0.0, 0.0)
    name: str = "mask"
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.inside = np.asarray(self.inside, dtype=bool)
        if self.inside.ndim not in (1, 2):
            raise MaskError("masks are one- or two-dimensional")
        if not self.h > 0:
            raise MaskError("h must be positive")
        if self.inside.ndim == 1:
            self.origin = (float(self.origin[0]) if np.ndim(self.origin) else float(self.origin),)
        self.origin = tuple(float(o) for o in self.origin)
        # guarantee a Dirichlet frame
        if self.inside.any() and _touches_frame(self.inside):
            self.inside = np.pad(self.inside, 1)
            self.origin = tuple(o - self.h for o in self.origin)

    @property
    def ndim(self) -> int:
        return self.inside.ndim

    @property
    def shape(self) -> tuple:
        return self.inside.shape

    @property
    def n(self) -> int:
        return int(self.inside.sum())

    def coords(self):
        """Node coordinates; in 2-D (X, Y) with arrays of the mask's shape (rows = y)."""
        if self.ndim == 1:
            return self.origin[0] + self.h * np.arange(self.shape[0])
        ny, nx = self.shape
        x = self.origin[0] + self.h * np.arange(nx)
        y = self.origin[1] + self.h * np.arange(ny)
        return np.meshgrid(x, y)

    def index(self) -> np.ndarray:
        idx = -np.ones(self.shape, dtype=np.int64)
        idx[self.inside] = np.arange(self.n)
        return idx

    def restrict(self, sub: np.ndarray, name: str | None = None) -> "Mask":
        return Mask(self.inside & sub, self.h, self.origin, name or self.name, dict(self.meta))

    def components(self) -> list:
        """Connected components (4-neighbour in 2-D) as boolean arrays."""
        lab, k = ndimage.label(self.inside)
        return [lab == i for i in range(1, k + 1)]

    def is_connected(self) -> bool:
        return len(self.components()) == 1

    def to_json(self) -> str:
        return json.dumps({"h": self.h, "origin": list(self.origin), "name": self.name,
                           "shape": list(self.shape),
                           "inside": np.packbits(self.inside.ravel()).tolist()})

    @staticmethod
    def from_json(text: str) -> "Mask":
        d = json.loads(text)
        shape = tuple(d["shape"])
        bits = np.unpackbits(np.array(d["inside"], dtype=np.uint8))[: int(np.prod(shape))]
        return Mask(bits.reshape(shape).astype(bool), d["h"], tuple(d["origin"]), d["name"])


def _touches_frame(a: np.ndarray) -> bool:
    if a.ndim == 1:
        return bool(a[0] or a[-1])
    return bool(a[0].any() or a[-1].any() or a[:, 0].any() or a[:, -1].any())


def _nodes(a: float, h: float) -> int:
    k = a / h
    n = int(round(k))
    if abs(k - n) > 1e-9 * max(1.0, k):
        raise MaskError(f"length {a} is not a multiple of h={h}")
    return n


# builders

def interval(length: float, h: float) -> Mask:
    n = _nodes(length, h)
    inside = np.zeros(n + 1, dtype=bool)
    inside[1:n] = True
    return Mask(inside, h, (0.0,), f"interval({length:g})")


def rectangle(a: float, b: float, h: float, origin=(0.0, 0.0)) -> Mask:
    """(x0, x0 + a) x (y0, y0 + b)."""
    nx, ny = _nodes(a, h), _nodes(b, h)
    if nx < 2 or ny < 2:
        raise MaskError("rectangle must contain interior nodes")
    inside = np.zeros((ny + 1, nx + 1), dtype=bool)
    inside[1:ny, 1:nx] = True
    return Mask(inside, h, origin, f"rectangle({a:g}x{b:g})")


def strip(width: float, half_length: float, h: float) -> Mask:
    """(0, width) x (-half_length, half_length)."""
    m = rectangle(width, 2 * half_length, h, origin=(0.0, -half_length))
    m.name = f"strip({width:g},{half_length:g})"
    return m


def _box(xmin, xmax, ymin, ymax, h):
    nx0 = int(np.floor(xmin / h)) - 1
    ny0 = int(np.floor(ymin / h)) - 1
    nx1 = int(np.ceil(xmax / h)) + 1
    ny1 = int(np.ceil(ymax / h)) + 1
    x = h * np.arange(nx0, nx1 + 1)
    y = h * np.arange(ny0, ny1 + 1)
    X, Y = np.meshgrid(x, y)
    return X, Y, (nx0 * h, ny0 * h)


def disk(R: float, h: float, center=(0.0, 0.0)) -> Mask:
    X, Y, org = _box(center[0] - R, center[0] + R, center[1] - R, center[1] + R, h)
    rr = np.hypot(X - center[0], Y - center[1])
    return Mask(rr < R - 0.5 * h, h, org, f"disk({R:g})")


def annulus(R0: float, R1: float, h: float) -> Mask:
    if not 0 < R0 < R1:
        raise MaskError("need 0 < R0 < R1")
    X, Y, org = _box(-R1, R1, -R1, R1, h)
    rr = np.hypot(X, Y)
    return Mask((rr > R0 + 0.5 * h) & (rr < R1 - 0.5 * h), h, org, f"annulus({R0:g},{R1:g})",
                {"R0": R0, "R1": R1})


def wedge(slope: float, R: float, h: float) -> Mask:
    """Cone {y > M |x|} truncated to the disk of radius R."""
    if not slope > 0:
        raise MaskError("slope must be positive")
    X, Y, org = _box(-R, R, -h, R, h)
    rr = np.hypot(X, Y)
    # distance to the two boundary rays of the cone
    nrm = np.hypot(1.0, slope)
    d_side = (Y - slope * np.abs(X)) / nrm
    along = (np.abs(X) + slope * Y) / nrm
    d_ray = np.where(along >= 0, d_side, rr)
    inside = (d_side > 0) & (d_ray > 0.5 * h) & (rr < R - 0.5 * h)
    return Mask(inside, h, org, f"wedge(M={slope:g},R={R:g})")


def pocket(delta: float, half_length: float, h: float, pocket_side: float = 1.0, base_side: float = 3.0) -> Mask:
    """Square pocket joined to a square base by a thin straight bridge.

    The bridge is (-delta, delta) x [-half_length, half_length]; the pocket
    sits above it and the base below, both centred on the bridge axis.
    """
    if not delta > 0 or not half_length > 0:
        raise MaskError("delta and half_length must be positive")
    for v in (delta, half_length, pocket_side / 2, base_side / 2):
        _nodes(v, h)
    L, s, b = half_length, pocket_side, base_side
    X, Y, org = _box(-b / 2, b / 2, -L - b, L + s, h)
    eps = 1e-9 * h
    in_pocket = (np.abs(X) < s / 2 - eps) & (Y > L + eps) & (Y < L + s - eps)
    in_base = (np.abs(X) < b / 2 - eps) & (Y < -L - eps) & (Y > -L - b + eps)
    in_bridge = (np.abs(X) < delta - eps) & (Y >= -L - eps) & (Y <= L + eps)
    m = Mask(in_pocket | in_base | in_bridge, h, org, f"pocket(delta={delta:g},L={L:g})",
             {"delta": delta, "half_length": L, "pocket_side": s, "base_side": b})
    return m


def pocket_regions(m: Mask) -> dict:
    """Boolean node sets for the pocket, bridge and base of a :func:`pocket` mask."""
    X, Y = m.coords()
    L, s, d = m.meta["half_length"], m.meta["pocket_side"], m.meta["delta"]
    eps = 1e-9 * m.h
    return {
        "pocket": m.inside & (Y > L + eps),
        "bridge": m.inside & (Y >= -L - eps) & (Y <= L + eps) & (np.abs(X) < d),
        "base": m.inside & (Y < -L - eps),
    }


def wells(width: float, depth: float, h: float, base_width: float | None = None,
          base_height: float | None = None) -> Mask:
    """A rectangular well of the given width and depth hanging below a base block.

    The base block (0, base_width) x (0, base_height) stands in for the
    truncated half-plane; the well (c - width/2, c + width/2) x (-depth, 0]
    is centred under it.
    """
    W = 4 * width if base_width is None else base_width
    H = 2 * width if base_height is None else base_height
    for v in (width, depth, W, H):
        _nodes(v, h)
    X, Y, org = _box(0.0, W, -depth, H, h)
    eps = 1e-9 * h
    c = W / 2
    in_base = (X > eps) & (X < W - eps) & (Y > eps) & (Y < H - eps)
    in_well = (np.abs(X - c) < width / 2 - eps) & (Y > -depth + eps) & (Y <= eps)
    return Mask(in_base | in_well, h, org, f"wells(w={width:g},D={depth:g})",
                {"width": width, "depth": depth, "center": c, "base_height": H, "base_width": W})


def from_rectangles(rects, h: float, box=(0.0, 1.0, 0.0, 1.0), name: str = "union") -> Mask:
    """Union of open axis-parallel rectangles (x0, x1, y0, y1)."""
    X, Y, org = _box(box[0], box[1], box[2], box[3], h)
    eps = 1e-9 * h
    inside = np.zeros(X.shape, dtype=bool)
    for x0, x1, y0, y1 in rects:
        inside |= (X > x0 + eps) & (X < x1 - eps) & (Y > y0 + eps) & (Y < y1 - eps)
    return Mask(inside, h, org, name)


# operators

def laplacian(m: Mask) -> sparse.csr_matrix:
    """Standard (2d+1)-point Dirichlet Laplacian on the inside nodes (negative definite)."""
    idx = m.index()
    n = m.n
    rows, cols, vals = [np.arange(n)], [np.arange(n)], [np.full(n, -2.0 * m.ndim)]
    for ax in range(m.ndim):
        for sh in (1, -1):
            nb = np.roll(idx, sh, axis=ax)
            ok = m.inside & (nb >= 0)
            rows.append(idx[ok])
            cols.append(nb[ok])
            vals.append(np.ones(int(ok.sum())))
    A = sparse.csr_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(n, n))
    return A / (m.h * m.h)


def apply_laplacian(u: np.ndarray, m: Mask) -> np.ndarray:
    """Discrete Laplacian of a full-grid array that vanishes outside the mask."""
    v = np.where(m.inside, u, 0.0)
    out = -2.0 * m.ndim * v
    for ax in range(m.ndim):
        out += np.roll(v, 1, axis=ax) + np.roll(v, -1, axis=ax)
    return np.where(m.inside, out / (m.h * m.h), 0.0)


def distance_to_boundary(m: Mask) -> np.ndarray:
    """Euclidean distance from every inside node to the nearest Dirichlet node."""
    d = ndimage.distance_transform_edt(m.inside) * m.h
    return np.where(m.inside, d, 0.0)


def distance_brute(m: Mask) -> np.ndarray:
    """Same as :func:`distance_to_boundary` by exhaustive search (slow)."""
    pts_out = np.argwhere(~m.inside).astype(float)
    pts_in = np.argwhere(m.inside).astype(float)
    out = np.zeros(m.shape)
    for p in pts_in:
        d = np.sqrt(((pts_out - p) ** 2).sum(axis=1)).min()
        out[tuple(p.astype(int))] = d * m.h
    return out

