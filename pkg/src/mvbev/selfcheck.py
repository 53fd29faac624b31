"""Independent reference implementations used to cross-check the fast paths.

Everything here trades speed for obviousness: rasterization instead of
polygon clipping, exhaustive scans instead of pooling tricks, plain loops
instead of vectorized assignment. The test suite asserts agreement at tight
tolerances; ``mvbev selftest`` runs reduced-size versions of the same
comparisons.
"""

from __future__ import annotations

import math

import numpy as np

from .boxes import Box3D, bev_iou


def rasterized_bev_iou(a: Box3D, b: Box3D, resolution: int = 2000) -> float:
    """BEV IoU estimated by point sampling on a regular grid.

    The grid covers the union of the two footprints' axis-aligned bounds
    with a small margin and counts cell centers inside each rectangle.
    """
    ca = np.array(a.corners_bev())
    cb = np.array(b.corners_bev())
    allc = np.vstack([ca, cb])
    lo = allc.min(axis=0) - 1e-3
    hi = allc.max(axis=0) + 1e-3
    xs = np.linspace(lo[0], hi[0], resolution, endpoint=False) + 0.5 * (hi[0] - lo[0]) / resolution
    ys = np.linspace(lo[1], hi[1], resolution, endpoint=False) + 0.5 * (hi[1] - lo[1]) / resolution
    gx = xs[None, :]
    gy = ys[:, None]

    def inside(box: Box3D):
        c, s = math.cos(box.yaw), math.sin(box.yaw)
        dx = gx - box.cx
        dy = gy - box.cy
        local_x = c * dx + s * dy
        local_y = -s * dx + c * dy
        return (np.abs(local_x) <= 0.5 * box.l) & (np.abs(local_y) <= 0.5 * box.w)

    in_a = inside(a)
    in_b = inside(b)
    na = int(np.count_nonzero(in_a))
    nb = int(np.count_nonzero(in_b))
    ni = int(np.count_nonzero(in_a & in_b))
    union = na + nb - ni
    return ni / union if union else 0.0


def rasterized_3d_iou(a: Box3D, b: Box3D, resolution: int = 160, z_resolution: int = 48) -> float:
    """3D IoU by voxel sampling over the union of the two boxes' bounds."""
    ca = np.array(a.corners_bev())
    cb = np.array(b.corners_bev())
    allc = np.vstack([ca, cb])
    lo = allc.min(axis=0) - 1e-3
    hi = allc.max(axis=0) + 1e-3
    z_lo = min(a.cz - 0.5 * a.h, b.cz - 0.5 * b.h) - 1e-3
    z_hi = max(a.cz + 0.5 * a.h, b.cz + 0.5 * b.h) + 1e-3
    xs = lo[0] + (np.arange(resolution) + 0.5) * (hi[0] - lo[0]) / resolution
    ys = lo[1] + (np.arange(resolution) + 0.5) * (hi[1] - lo[1]) / resolution
    zs = z_lo + (np.arange(z_resolution) + 0.5) * (z_hi - z_lo) / z_resolution
    gx = xs[None, :, None]
    gy = ys[:, None, None]
    gz = zs[None, None, :]

    def inside(box: Box3D):
        c, s = math.cos(box.yaw), math.sin(box.yaw)
        dx = gx - box.cx
        dy = gy - box.cy
        bev = (np.abs(c * dx + s * dy) <= 0.5 * box.l) & (np.abs(-s * dx + c * dy) <= 0.5 * box.w)
        return bev & (np.abs(gz - box.cz) <= 0.5 * box.h)

    in_a = inside(a)
    in_b = inside(b)
    na = int(np.count_nonzero(in_a))
    nb = int(np.count_nonzero(in_b))
    ni = int(np.count_nonzero(in_a & in_b))
    union = na + nb - ni
    return ni / union if union else 0.0


def brute_force_nms(boxes, scores, iou_threshold: float, max_keep: int | None = None):
    """Reference greedy NMS: explicit suppression table, no shortcuts."""
    scores = np.asarray(scores, dtype=float)
    order = sorted(range(len(boxes)), key=lambda i: (-scores[i], i))
    suppressed = [False] * len(boxes)
    kept = []
    for i in order:
        if suppressed[i]:
            continue
        kept.append(i)
        if max_keep is not None and len(kept) >= max_keep:
            break
        for j in order:
            if not suppressed[j] and j != i and bev_iou(boxes[i], boxes[j]) > iou_threshold:
                suppressed[j] = True
    return kept


def brute_force_assign(anchors, gts, pos_thr_by_class, neg_thr_by_class,
                       force_best_match: bool = True):
    """Reference anchor labelling: full O(anchors x gts) IoU table.

    Returns per-anchor gt indices with the same encoding as the anchor
    head: ``>= 0`` positive, ``-1`` negative, ``-2`` ignored.
    """
    n, m = len(anchors), len(gts)
    iou = np.zeros((n, m))
    for i, anchor in enumerate(anchors):
        for j, gt in enumerate(gts):
            if anchor.class_id == gt.class_id:
                iou[i, j] = bev_iou(anchor, gt)
    labels = np.full(n, -1, dtype=np.int64)
    for i, anchor in enumerate(anchors):
        best_j = -1
        best = 0.0
        for j, gt in enumerate(gts):
            if anchor.class_id == gt.class_id and iou[i, j] > best:
                best, best_j = iou[i, j], j
        pos_thr = pos_thr_by_class[anchor.class_id]
        neg_thr = neg_thr_by_class[anchor.class_id]
        if best_j >= 0 and best >= pos_thr:
            labels[i] = best_j
        elif best >= neg_thr:
            labels[i] = -2
    if force_best_match:
        for j, gt in enumerate(gts):
            best_i = -1
            best = 0.0
            for i, anchor in enumerate(anchors):
                if anchor.class_id == gt.class_id and iou[i, j] > best:
                    best, best_i = iou[i, j], i
            if best_i >= 0:
                labels[best_i] = j
    return labels


def brute_force_peaks(heatmap: np.ndarray):
    """Exhaustive 3x3 local-maximum scan with lowest-linear-index tie rule.

    ``heatmap`` is (nx, ny, classes); returns a list of
    ``(i, j, class_index, score)`` tuples, unsorted.
    """
    nx, ny, nc = heatmap.shape
    peaks = []
    for c in range(nc):
        for i in range(nx):
            for j in range(ny):
                v = heatmap[i, j, c]
                idx = i * ny + j
                is_peak = True
                for di in (-1, 0, 1):
                    for dj in (-1, 0, 1):
                        if di == 0 and dj == 0:
                            continue
                        ni, nj = i + di, j + dj
                        if not (0 <= ni < nx and 0 <= nj < ny):
                            continue
                        nv = heatmap[ni, nj, c]
                        if nv > v or (nv == v and ni * ny + nj < idx):
                            is_peak = False
                            break
                    if not is_peak:
                        break
                if is_peak:
                    peaks.append((i, j, c, float(v)))
    return peaks


def central_difference(fn, x: float, h: float = 1e-5) -> float:
    """Central finite-difference derivative of a scalar function."""
    return (fn(x + h) - fn(x - h)) / (2.0 * h)
