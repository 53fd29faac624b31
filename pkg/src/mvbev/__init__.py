"""Multi-view camera-to-BEV 3D detection engine on synthetic scenes."""

from .geometry import SE3, CameraRig, PinholeCamera, augment_camera, project, relative_pose, unproject
from .boxes import (
    Box3D,
    BoxDelta,
    bev_iou,
    center_distance_bev,
    decode_anchor,
    encode_anchor,
    iou3d_let,
    rotated_nms,
    wrap_angle,
)

__version__ = "0.1.0"
