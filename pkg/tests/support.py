"""Shared helpers for building random geometry in tests."""

import numpy as np

from mvbev.boxes import CLASSES, Box3D
from mvbev.geometry import SE3, PinholeCamera


def random_rotation(rng: np.random.Generator) -> np.ndarray:
    """Uniform random rotation matrix from a random quaternion."""
    q = rng.normal(size=4)
    q /= np.linalg.norm(q)
    w, x, y, z = q
    return np.array([
        [1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y)],
        [2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x)],
        [2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y)],
    ])


def random_se3(rng: np.random.Generator, translation_scale: float = 10.0) -> SE3:
    return SE3(random_rotation(rng), rng.uniform(-translation_scale, translation_scale, size=3))


def random_camera(rng: np.random.Generator) -> PinholeCamera:
    return PinholeCamera(
        fx=rng.uniform(200, 800),
        fy=rng.uniform(200, 800),
        cx=rng.uniform(200, 400),
        cy=rng.uniform(100, 300),
        width=int(rng.integers(400, 800)),
        height=int(rng.integers(300, 600)),
        cam_from_ego=random_se3(rng, translation_scale=2.0),
    )


def random_box(rng: np.random.Generator, center_span: float = 2.5,
               z_span: float = 1.0, class_id: str | None = None,
               score: float | None = None) -> Box3D:
    """Random box near the origin; spans chosen so pairs often overlap."""
    return Box3D(
        cx=rng.uniform(-center_span, center_span),
        cy=rng.uniform(-center_span, center_span),
        cz=rng.uniform(-z_span, z_span),
        l=rng.uniform(1.0, 5.0),
        w=rng.uniform(1.0, 3.0),
        h=rng.uniform(1.0, 2.5),
        yaw=rng.uniform(-np.pi, np.pi),
        class_id=class_id if class_id is not None else CLASSES[rng.integers(len(CLASSES))],
        score=float(rng.uniform(0, 1)) if score is None else score,
    )
