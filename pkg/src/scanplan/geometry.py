"""Pinhole camera models, projection, and barycentric/inverse-depth arithmetic.

Conventions used throughout the package:

* World frame: right-handed, Z up, meters.
* Camera frame: X right, Y down, Z forward (optical axis).
* Pixel coordinates: x along image width, y along height; pixel (row r, col c)
  spans [c, c+1] x [r, r+1] and has its center at (c + 0.5, r + 0.5).
* Inverse depth is 1/Z along the optical axis, so it is an affine function of
  pixel coordinates on any plane - the property the per-view linear solve
  relies on.
* Pitch is positive when the camera looks downward; yaw is measured about the
  world Z axis from +X toward +Y. Angles are degrees at API boundaries.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

BEHIND_CAMERA_EPS = 1e-6  # meters of forward depth below which a point counts as behind
DEGENERATE_AREA_EPS = 1e-12  # px^2; barycentric solves are unreliable below this


class GeometryError(ValueError):
    pass


class BehindCameraError(GeometryError):
    """Raised when a point is at or behind the camera plane (Z <= eps)."""


class InvalidInverseDepthError(GeometryError):
    """Raised for non-positive or non-finite inverse depth."""


class DegenerateTriangleError(GeometryError):
    """Raised when a triangle's signed area is below the degeneracy threshold."""


_WORLD_UP = np.array([0.0, 0.0, 1.0])


@dataclass(frozen=True)
class CameraModel:
    """A calibrated pinhole view (intrinsics + world-to-camera pose)."""

    fx: float
    fy: float
    cx: float
    cy: float
    width: int
    height: int
    rotation: np.ndarray  # (3, 3) world -> camera
    translation: np.ndarray  # (3,) world -> camera, meters

    def __post_init__(self):
        R = np.asarray(self.rotation, dtype=float).reshape(3, 3)
        t = np.asarray(self.translation, dtype=float).reshape(3)
        object.__setattr__(self, "rotation", R)
        object.__setattr__(self, "translation", t)
        if not (self.fx > 0 and self.fy > 0):
            raise GeometryError("focal lengths must be positive")
        if not (0 <= self.cx < self.width and 0 <= self.cy < self.height):
            raise GeometryError("principal point must lie inside the image")
        err = np.abs(R.T @ R - np.eye(3)).max()
        if err >= 1e-9 or np.linalg.det(R) < 0:
            raise GeometryError(f"rotation is not orthonormal with det +1 (err={err:.3e})")
        R.flags.writeable = False
        t.flags.writeable = False

    @classmethod
    def from_pose(cls, position, yaw_deg, pitch_deg, *, fx, fy, cx, cy, width, height) -> "CameraModel":
        """Build a camera at a world position from yaw/pitch (roll = 0)."""
        R = rotation_from_yaw_pitch(yaw_deg, pitch_deg)
        t = -R @ np.asarray(position, dtype=float)
        return cls(fx=fx, fy=fy, cx=cx, cy=cy, width=width, height=height, rotation=R, translation=t)

    @property
    def center(self) -> np.ndarray:
        """Camera center in world coordinates."""
        return -self.rotation.T @ self.translation

    @property
    def forward(self) -> np.ndarray:
        """Optical-axis direction in world coordinates."""
        return self.rotation[2].copy()

    @property
    def yaw_deg(self) -> float:
        f = self.rotation[2]
        return float(np.degrees(np.arctan2(f[1], f[0])))

    @property
    def pitch_deg(self) -> float:
        f = self.rotation[2]
        return float(np.degrees(np.arcsin(np.clip(-f[2], -1.0, 1.0))))

    def to_dict(self) -> dict:
        return {
            "fx": self.fx,
            "fy": self.fy,
            "cx": self.cx,
            "cy": self.cy,
            "width": self.width,
            "height": self.height,
            "rotation": [float(v) for v in self.rotation.reshape(-1)],
            "translation": [float(v) for v in self.translation],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "CameraModel":
        return cls(
            fx=float(d["fx"]),
            fy=float(d["fy"]),
            cx=float(d["cx"]),
            cy=float(d["cy"]),
            width=int(d["width"]),
            height=int(d["height"]),
            rotation=np.asarray(d["rotation"], dtype=float).reshape(3, 3),
            translation=np.asarray(d["translation"], dtype=float),
        )


def rotation_from_yaw_pitch(yaw_deg: float, pitch_deg: float) -> np.ndarray:
    """World-to-camera rotation for a roll-free camera (pitch > 0 looks down)."""
    yaw = np.radians(yaw_deg)
    pitch = np.radians(pitch_deg)
    forward = np.array(
        [np.cos(pitch) * np.cos(yaw), np.cos(pitch) * np.sin(yaw), -np.sin(pitch)]
    )
    right = np.cross(forward, _WORLD_UP)
    norm = np.linalg.norm(right)
    if norm < 1e-12:
        raise GeometryError("pitch of +-90 degrees leaves yaw undefined")
    right /= norm
    down = np.cross(forward, right)
    return np.stack([right, down, forward])


def project(camera: CameraModel, point) -> tuple[np.ndarray, float]:
    """Project a world point; returns (pixel (2,), inverse depth 1/Z)."""
    p_cam = camera.rotation @ np.asarray(point, dtype=float) + camera.translation
    z = p_cam[2]
    if z <= BEHIND_CAMERA_EPS:
        raise BehindCameraError(f"point behind camera (Z={z:.3e})")
    pixel = np.array(
        [camera.fx * p_cam[0] / z + camera.cx, camera.fy * p_cam[1] / z + camera.cy]
    )
    return pixel, 1.0 / z


def project_points(camera: CameraModel, points: np.ndarray):
    """Vectorized projection. Returns (pixels (n,2), inv_depths (n,), in_front (n,) mask).

    Points at or behind the camera get inv_depth 0 and an unspecified pixel;
    callers filter with the mask instead of catching per-point errors.
    """
    pts = np.asarray(points, dtype=float).reshape(-1, 3)
    p_cam = pts @ camera.rotation.T + camera.translation
    z = p_cam[:, 2]
    in_front = z > BEHIND_CAMERA_EPS
    safe_z = np.where(in_front, z, 1.0)
    pixels = np.empty((len(pts), 2))
    pixels[:, 0] = camera.fx * p_cam[:, 0] / safe_z + camera.cx
    pixels[:, 1] = camera.fy * p_cam[:, 1] / safe_z + camera.cy
    inv_depths = np.where(in_front, 1.0 / safe_z, 0.0)
    return pixels, inv_depths, in_front


def unproject(camera: CameraModel, pixel, inv_depth: float) -> np.ndarray:
    """Inverse of project: world point at pixel with inverse depth 1/Z."""
    if not (np.isfinite(inv_depth) and inv_depth > 0):
        raise InvalidInverseDepthError(f"invalid inverse depth {inv_depth!r}")
    pixel = np.asarray(pixel, dtype=float)
    z = 1.0 / inv_depth
    p_cam = np.array(
        [(pixel[0] - camera.cx) / camera.fx * z, (pixel[1] - camera.cy) / camera.fy * z, z]
    )
    return camera.rotation.T @ (p_cam - camera.translation)


def unproject_points(camera: CameraModel, pixels: np.ndarray, inv_depths: np.ndarray) -> np.ndarray:
    """Vectorized unproject for positive inverse depths."""
    pixels = np.asarray(pixels, dtype=float).reshape(-1, 2)
    inv_depths = np.asarray(inv_depths, dtype=float).reshape(-1)
    if np.any(~np.isfinite(inv_depths)) or np.any(inv_depths <= 0):
        raise InvalidInverseDepthError("invalid inverse depth in batch")
    z = 1.0 / inv_depths
    p_cam = np.empty((len(pixels), 3))
    p_cam[:, 0] = (pixels[:, 0] - camera.cx) / camera.fx * z
    p_cam[:, 1] = (pixels[:, 1] - camera.cy) / camera.fy * z
    p_cam[:, 2] = z
    return (p_cam - camera.translation) @ camera.rotation


def pixel_rays(camera: CameraModel, pixels: np.ndarray) -> np.ndarray:
    """World-space ray directions through pixels, scaled so the ray parameter is Z.

    The returned directions have unit length along the optical axis, so for
    origin + t * dir the parameter t equals camera-frame depth Z.
    """
    pixels = np.asarray(pixels, dtype=float).reshape(-1, 2)
    d_cam = np.empty((len(pixels), 3))
    d_cam[:, 0] = (pixels[:, 0] - camera.cx) / camera.fx
    d_cam[:, 1] = (pixels[:, 1] - camera.cy) / camera.fy
    d_cam[:, 2] = 1.0
    return d_cam @ camera.rotation


def in_frustum(camera: CameraModel, pixels: np.ndarray, in_front: np.ndarray) -> np.ndarray:
    """Mask of projections that land inside the image bounds."""
    pixels = np.asarray(pixels, dtype=float).reshape(-1, 2)
    return (
        in_front
        & (pixels[:, 0] >= 0.0)
        & (pixels[:, 0] < camera.width)
        & (pixels[:, 1] >= 0.0)
        & (pixels[:, 1] < camera.height)
    )


def barycentric_of(triangle, p) -> np.ndarray:
    """Barycentric weights of pixel p in a 2D triangle; weights sum to 1."""
    tri = np.asarray(triangle, dtype=float).reshape(3, 2)
    p = np.asarray(p, dtype=float).reshape(2)
    e1 = tri[1] - tri[0]
    e2 = tri[2] - tri[0]
    det = e1[0] * e2[1] - e1[1] * e2[0]
    if abs(det) * 0.5 <= DEGENERATE_AREA_EPS:
        raise DegenerateTriangleError(f"degenerate triangle (area={abs(det) * 0.5:.3e})")
    d = p - tri[0]
    a2 = (d[0] * e2[1] - d[1] * e2[0]) / det
    a3 = (e1[0] * d[1] - e1[1] * d[0]) / det
    return np.array([1.0 - a2 - a3, a2, a3])


def barycentric_batch(triangle: np.ndarray, points: np.ndarray) -> np.ndarray:
    """Barycentric weights of many points w.r.t. one 2D triangle, (n, 3)."""
    tri = np.asarray(triangle, dtype=float).reshape(3, 2)
    pts = np.asarray(points, dtype=float).reshape(-1, 2)
    e1 = tri[1] - tri[0]
    e2 = tri[2] - tri[0]
    det = e1[0] * e2[1] - e1[1] * e2[0]
    if abs(det) * 0.5 <= DEGENERATE_AREA_EPS:
        raise DegenerateTriangleError("degenerate triangle")
    d = pts - tri[0]
    a2 = (d[:, 0] * e2[1] - d[:, 1] * e2[0]) / det
    a3 = (e1[0] * d[:, 1] - e1[1] * d[:, 0]) / det
    return np.stack([1.0 - a2 - a3, a2, a3], axis=1)


def interp_inverse_depth(bary, d1: float, d2: float, d3: float) -> float:
    """Affine combination of vertex inverse depths; exact on planar surfaces."""
    b = np.asarray(bary, dtype=float)
    return float(b[0] * d1 + b[1] * d2 + b[2] * d3)


def save_cameras(cameras: list[CameraModel], path) -> None:
    """Write a camera set as the shared JSON document format."""
    data = [c.to_dict() for c in cameras]
    Path(path).write_text(json.dumps(data, indent=2, sort_keys=True) + "\n")


def load_cameras(path) -> list[CameraModel]:
    data = json.loads(Path(path).read_text())
    return [CameraModel.from_dict(d) for d in data]
