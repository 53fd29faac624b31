"""Rigid transforms, pinhole cameras, and augmentation-consistent intrinsics.

Conventions used throughout the package:

- Camera frame: x right, y down, z forward (optical axis). Pixel (0, 0) is
  the top-left corner, u grows right, v grows down.
- Ego frame: x forward, y left, z up. Detection grids and boxes live here.
- ``SE3`` objects map points *into* the frame named first: ``cam_from_ego``
  takes ego-frame points to camera-frame points.

All types are immutable after construction and all operations are pure
functions, so everything here is safe to share between threads.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

# Points closer to the image plane than this are treated as behind the
# camera; avoids division blow-up near z = 0.
DEPTH_EPS = 1e-6

ORTHONORMAL_TOL = 1e-9


def _readonly(a: np.ndarray) -> np.ndarray:
    out = np.array(a, dtype=float)
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class SE3:
    """Proper rigid transform: ``p_out = rotation @ p_in + translation``."""

    rotation: np.ndarray
    translation: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "rotation", _readonly(self.rotation))
        object.__setattr__(self, "translation", _readonly(self.translation))
        if self.rotation.shape != (3, 3):
            raise ValueError(f"rotation must be 3x3, got {self.rotation.shape}")
        if self.translation.shape != (3,):
            raise ValueError(f"translation must be a 3-vector, got {self.translation.shape}")
        err = np.abs(self.rotation @ self.rotation.T - np.eye(3)).max()
        if err > ORTHONORMAL_TOL:
            raise ValueError(f"rotation is not orthonormal (max deviation {err:.3e})")
        det = np.linalg.det(self.rotation)
        if abs(det - 1.0) > ORTHONORMAL_TOL:
            raise ValueError(f"rotation must have determinant +1, got {det!r}")

    @staticmethod
    def identity() -> "SE3":
        return SE3(np.eye(3), np.zeros(3))

    @staticmethod
    def from_rt(rotation, translation) -> "SE3":
        return SE3(np.asarray(rotation, dtype=float), np.asarray(translation, dtype=float))

    @staticmethod
    def rot_z(angle: float, translation=(0.0, 0.0, 0.0)) -> "SE3":
        c, s = np.cos(angle), np.sin(angle)
        return SE3(np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]]), np.asarray(translation, float))

    def compose(self, other: "SE3") -> "SE3":
        """Transform that applies ``other`` first, then ``self``."""
        return SE3(self.rotation @ other.rotation,
                   self.rotation @ other.translation + self.translation)

    def __matmul__(self, other: "SE3") -> "SE3":
        return self.compose(other)

    def inverse(self) -> "SE3":
        rt = self.rotation.T
        return SE3(rt, -rt @ self.translation)

    def apply(self, points: np.ndarray) -> np.ndarray:
        """Apply to one point ``(3,)`` or a batch ``(..., 3)``."""
        p = np.asarray(points, dtype=float)
        return p @ self.rotation.T + self.translation

    def almost_equal(self, other: "SE3", tol: float = 1e-9) -> bool:
        return (np.abs(self.rotation - other.rotation).max() <= tol
                and np.abs(self.translation - other.translation).max() <= tol)


@dataclass(frozen=True)
class PinholeCamera:
    """Distortion-free pinhole camera with an ego-frame mounting pose.

    ``hflip`` marks a camera whose image has been mirrored horizontally:
    projections report ``width - 1 - u`` instead of ``u``. Focal lengths
    stay positive; the flip is handled in the projection equations.
    """

    fx: float
    fy: float
    cx: float
    cy: float
    width: int
    height: int
    cam_from_ego: SE3 = field(default_factory=SE3.identity)
    hflip: bool = False

    def __post_init__(self):
        if not (self.fx > 0 and self.fy > 0):
            raise ValueError(f"focal lengths must be positive, got fx={self.fx}, fy={self.fy}")
        if not (self.width > 0 and self.height > 0):
            raise ValueError(f"image size must be positive, got {self.width}x{self.height}")

    @property
    def center_in_ego(self) -> np.ndarray:
        """Camera optical center expressed in the ego frame."""
        return self.cam_from_ego.inverse().translation


@dataclass(frozen=True)
class CameraRig:
    """Ordered, uniquely-labelled surround cameras plus the ego pose.

    ``ego_from_world`` maps world-frame points into this frame's ego frame.
    """

    cameras: dict[str, PinholeCamera]
    ego_from_world: SE3 = field(default_factory=SE3.identity)
    timestamp: int = 0

    def __post_init__(self):
        if len(self.cameras) == 0:
            raise ValueError("rig needs at least one camera")

    @property
    def views(self) -> tuple[str, ...]:
        return tuple(self.cameras)


def project(cam: PinholeCamera, p_ego: np.ndarray):
    """Project ego-frame points into the image.

    Args:
        cam: camera to project through.
        p_ego: ``(3,)`` or ``(..., 3)`` points in the ego frame.

    Returns:
        ``(u, v, depth, visible)``. ``depth`` is the camera-frame z in
        meters. ``visible`` is true where ``depth > DEPTH_EPS`` and the
        pixel lands inside ``[0, width) x [0, height)``. For points at or
        behind the image plane no division is performed and ``u, v`` are
        reported as 0.
    """
    p_cam = cam.cam_from_ego.apply(p_ego)
    x, y, z = p_cam[..., 0], p_cam[..., 1], p_cam[..., 2]
    in_front = z > DEPTH_EPS
    safe_z = np.where(in_front, z, 1.0)
    u = np.where(in_front, cam.fx * x / safe_z + cam.cx, 0.0)
    v = np.where(in_front, cam.fy * y / safe_z + cam.cy, 0.0)
    if cam.hflip:
        u = np.where(in_front, (cam.width - 1) - u, 0.0)
    visible = in_front & (u >= 0) & (u < cam.width) & (v >= 0) & (v < cam.height)
    return u, v, z, visible


def unproject(cam: PinholeCamera, u, v, depth):
    """Inverse of :func:`project` for known depth; returns ego-frame points.

    Accepts scalars or equal-shaped arrays. Depth must be positive.
    """
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    depth = np.asarray(depth, dtype=float)
    if np.any(depth <= 0):
        raise ValueError("unproject requires positive depth")
    if cam.hflip:
        u = (cam.width - 1) - u
    x = (u - cam.cx) / cam.fx * depth
    y = (v - cam.cy) / cam.fy * depth
    p_cam = np.stack(np.broadcast_arrays(x, y, depth), axis=-1)
    return cam.cam_from_ego.inverse().apply(p_cam)


def relative_pose(curr: CameraRig, prev: CameraRig) -> SE3:
    """Transform taking current-frame ego coordinates to previous-frame ego
    coordinates: ``prev.ego_from_world @ inverse(curr.ego_from_world)``."""
    return prev.ego_from_world @ curr.ego_from_world.inverse()


def augment_camera(cam: PinholeCamera, scale: float, crop_origin, crop_size,
                   hflip: bool = False, scale_range=(0.95, 1.05)) -> PinholeCamera:
    """Camera equivalent of an image-space scale / crop / horizontal flip.

    The returned camera projects any 3D point to exactly the pixel where the
    same point lands after resizing the image by ``scale``, cropping a
    ``crop_size = (w, h)`` window at ``crop_origin = (ox, oy)`` of the scaled
    image, and optionally mirroring the crop horizontally.

    Raises:
        ValueError: if ``scale`` is outside ``scale_range`` or the crop does
            not fit inside the scaled image.
    """
    lo, hi = scale_range
    if not (lo <= scale <= hi):
        raise ValueError(f"scale {scale} outside allowed range [{lo}, {hi}]")
    ox, oy = float(crop_origin[0]), float(crop_origin[1])
    cw, ch = int(crop_size[0]), int(crop_size[1])
    if cw <= 0 or ch <= 0:
        raise ValueError("crop size must be positive")
    if ox < 0 or oy < 0 or ox + cw > scale * cam.width + 1e-9 or oy + ch > scale * cam.height + 1e-9:
        raise ValueError("crop window falls outside the scaled image")
    # Work in signed "effective" intrinsics (u = fe * x/z + ce) so flips
    # compose correctly with scale/crop and with an already-flipped input.
    fe = -cam.fx if cam.hflip else cam.fx
    ce = (cam.width - 1) - cam.cx if cam.hflip else cam.cx
    fe, ce = scale * fe, scale * ce - ox
    if hflip:
        fe, ce = -fe, (cw - 1) - ce
    flipped = fe < 0
    return PinholeCamera(
        fx=-fe if flipped else fe,
        fy=cam.fy * scale,
        cx=(cw - 1) - ce if flipped else ce,
        cy=cam.cy * scale - oy,
        width=cw,
        height=ch,
        cam_from_ego=cam.cam_from_ego,
        hflip=bool(flipped),
    )
