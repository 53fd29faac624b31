"""BEV-oriented 3D boxes, exact rotated IoU, anchor residual codecs, NMS.

Boxes are axis-aligned in z and rotated by ``yaw`` about the vertical axis
in the BEV plane. ``l`` runs along the heading direction, ``w`` across it,
``h`` vertically. Everything operates on immutable values and is
thread-safe.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

CLASSES = ("car", "pedestrian", "cyclist")

# Cross products smaller than this are treated as collinear during clipping.
_COLLINEAR_EPS = 1e-12


def wrap_angle(theta):
    """Wrap angles into (-pi, pi]."""
    wrapped = np.mod(np.asarray(theta, dtype=float) + np.pi, 2.0 * np.pi) - np.pi
    return np.where(wrapped == -np.pi, np.pi, wrapped)


@dataclass(frozen=True)
class Box3D:
    """Oriented 3D box in the ego frame; ``score`` defaults to 1 for labels."""

    cx: float
    cy: float
    cz: float
    l: float
    w: float
    h: float
    yaw: float
    class_id: str = "car"
    score: float = 1.0

    def __post_init__(self):
        if not (self.l > 0 and self.w > 0 and self.h > 0):
            raise ValueError(f"box dims must be positive, got ({self.l}, {self.w}, {self.h})")
        if self.class_id not in CLASSES:
            raise ValueError(f"unknown class {self.class_id!r}, expected one of {CLASSES}")
        object.__setattr__(self, "yaw", float(wrap_angle(self.yaw)))

    @property
    def center(self) -> np.ndarray:
        return np.array([self.cx, self.cy, self.cz])

    @property
    def dims(self) -> np.ndarray:
        return np.array([self.l, self.w, self.h])

    @property
    def bev_area(self) -> float:
        return self.l * self.w

    @property
    def volume(self) -> float:
        return self.l * self.w * self.h

    def corners_bev(self):
        """Footprint corners as a CCW list of (x, y) tuples."""
        c, s = math.cos(self.yaw), math.sin(self.yaw)
        hl, hw = 0.5 * self.l, 0.5 * self.w
        out = []
        for dx, dy in ((hl, -hw), (hl, hw), (-hl, hw), (-hl, -hw)):
            out.append((self.cx + c * dx - s * dy, self.cy + s * dx + c * dy))
        return out

    def with_center(self, center) -> "Box3D":
        return replace(self, cx=float(center[0]), cy=float(center[1]), cz=float(center[2]))


@dataclass(frozen=True)
class BoxDelta:
    """Anchor-relative box residuals (offsets normalized, dims as log-ratios)."""

    dx: float
    dy: float
    dz: float
    dl: float
    dw: float
    dh: float
    dyaw: float

    def __post_init__(self):
        vals = (self.dx, self.dy, self.dz, self.dl, self.dw, self.dh, self.dyaw)
        if not all(math.isfinite(v) for v in vals):
            raise ValueError(f"box delta must be finite, got {vals}")

    def as_array(self) -> np.ndarray:
        return np.array([self.dx, self.dy, self.dz, self.dl, self.dw, self.dh, self.dyaw])


def polygon_area(poly) -> float:
    """Shoelace area of a CCW polygon given as (x, y) pairs."""
    n = len(poly)
    if n < 3:
        return 0.0
    acc = 0.0
    for i in range(n):
        x0, y0 = poly[i]
        x1, y1 = poly[(i + 1) % n]
        acc += x0 * y1 - x1 * y0
    area = 0.5 * acc
    return area if area > _COLLINEAR_EPS else 0.0


def clip_polygon(subject, clip):
    """Sutherland-Hodgman clip of ``subject`` by convex CCW polygon ``clip``."""
    output = list(subject)
    n = len(clip)
    for i in range(n):
        if not output:
            return []
        ax, ay = clip[i]
        bx, by = clip[(i + 1) % n]
        ex, ey = bx - ax, by - ay
        inputs = output
        output = []
        px, py = inputs[-1]
        p_side = ex * (py - ay) - ey * (px - ax)
        for qx, qy in inputs:
            q_side = ex * (qy - ay) - ey * (qx - ax)
            q_in = q_side >= -_COLLINEAR_EPS
            p_in = p_side >= -_COLLINEAR_EPS
            if q_in:
                if not p_in:
                    t = p_side / (p_side - q_side)
                    output.append((px + t * (qx - px), py + t * (qy - py)))
                output.append((qx, qy))
            elif p_in:
                t = p_side / (p_side - q_side)
                output.append((px + t * (qx - px), py + t * (qy - py)))
            px, py, p_side = qx, qy, q_side
    return output


def _bev_intersection_area(a: Box3D, b: Box3D) -> float:
    # Quick reject: footprints cannot overlap beyond the circumradius sum.
    reach = 0.5 * (math.hypot(a.l, a.w) + math.hypot(b.l, b.w))
    if math.hypot(a.cx - b.cx, a.cy - b.cy) > reach:
        return 0.0
    # Clip near the origin: keeps the shoelace sum well-conditioned far from
    # the ego, where squared coordinates would eat into the area precision.
    mx, my = 0.5 * (a.cx + b.cx), 0.5 * (a.cy + b.cy)
    pa = [(x - mx, y - my) for x, y in a.corners_bev()]
    pb = [(x - mx, y - my) for x, y in b.corners_bev()]
    return polygon_area(clip_polygon(pa, pb))


def bev_iou(a: Box3D, b: Box3D) -> float:
    """Exact IoU of the two yaw-rotated BEV footprints."""
    inter = _bev_intersection_area(a, b)
    if inter == 0.0:
        return 0.0
    union = a.bev_area + b.bev_area - inter
    return min(max(inter / union, 0.0), 1.0)


def iou3d_let(pred: Box3D, gt: Box3D, corrected_center) -> float:
    """3D IoU with ``pred`` evaluated at its longitudinally corrected center.

    BEV intersection is exact polygon clipping; the vertical extent is
    axis-aligned so the 3D intersection is footprint area times z overlap.
    """
    moved = pred.with_center(corrected_center)
    inter_area = _bev_intersection_area(moved, gt)
    if inter_area == 0.0:
        return 0.0
    z_lo = max(moved.cz - 0.5 * moved.h, gt.cz - 0.5 * gt.h)
    z_hi = min(moved.cz + 0.5 * moved.h, gt.cz + 0.5 * gt.h)
    if z_hi <= z_lo:
        return 0.0
    inter = inter_area * (z_hi - z_lo)
    union = moved.volume + gt.volume - inter
    return min(max(inter / union, 0.0), 1.0)


def center_distance_bev(a: Box3D, b: Box3D) -> float:
    return math.hypot(a.cx - b.cx, a.cy - b.cy)


def encode_anchor(gt: Box3D, anchor: Box3D) -> BoxDelta:
    """Residual from anchor to ground truth; offsets normalized by the
    anchor's BEV diagonal (x, y) and height (z), dims as log-ratios."""
    diag = math.hypot(anchor.l, anchor.w)
    return BoxDelta(
        dx=(gt.cx - anchor.cx) / diag,
        dy=(gt.cy - anchor.cy) / diag,
        dz=(gt.cz - anchor.cz) / anchor.h,
        dl=math.log(gt.l / anchor.l),
        dw=math.log(gt.w / anchor.w),
        dh=math.log(gt.h / anchor.h),
        dyaw=float(wrap_angle(gt.yaw - anchor.yaw)),
    )


def decode_anchor(delta: BoxDelta, anchor: Box3D) -> Box3D:
    diag = math.hypot(anchor.l, anchor.w)
    return replace(
        anchor,
        cx=anchor.cx + delta.dx * diag,
        cy=anchor.cy + delta.dy * diag,
        cz=anchor.cz + delta.dz * anchor.h,
        l=anchor.l * math.exp(delta.dl),
        w=anchor.w * math.exp(delta.dw),
        h=anchor.h * math.exp(delta.dh),
        yaw=float(wrap_angle(anchor.yaw + delta.dyaw)),
    )


def rotated_nms(boxes, scores, iou_threshold: float, max_keep: int | None = None):
    """Greedy rotated-BEV NMS; returns kept indices.

    Candidates are visited in descending score, ties broken by the lower
    input index. A candidate is dropped when its BEV IoU with any already
    kept box exceeds ``iou_threshold``.
    """
    scores = np.asarray(scores, dtype=float)
    if len(boxes) != scores.shape[0]:
        raise ValueError("boxes and scores length mismatch")
    order = sorted(range(len(boxes)), key=lambda i: (-scores[i], i))
    kept: list[int] = []
    for idx in order:
        cand = boxes[idx]
        if all(bev_iou(cand, boxes[k]) <= iou_threshold for k in kept):
            kept.append(idx)
            if max_keep is not None and len(kept) >= max_keep:
                break
    return kept
