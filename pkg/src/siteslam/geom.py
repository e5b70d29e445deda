"""Rigid-body geometry: SE(3) poses, exp/log maps, pinhole camera, rigid alignment.

Conventions: rotations are 3x3 orthonormal matrices, translations are meter
vectors, camera frame is z-forward / x-right / y-down, world frame is z-up.
Quaternions appear only at file-format boundaries (qx qy qz qw order).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import AngleAtPi, BehindCamera, DegenerateConfiguration

ORTHONORMAL_TOL = 1e-9
_REORTHO_TRIGGER = 1e-12


def _as_vec3(v) -> np.ndarray:
    a = np.asarray(v, dtype=float).reshape(3)
    if not np.all(np.isfinite(a)):
        raise ValueError("vector components must be finite")
    return a


def hat(v: np.ndarray) -> np.ndarray:
    """Skew-symmetric cross-product matrix of a 3-vector."""
    x, y, z = v
    return np.array([[0.0, -z, y], [z, 0.0, -x], [-y, x, 0.0]])


def _project_to_so3(r: np.ndarray) -> np.ndarray:
    u, _, vt = np.linalg.svd(r)
    d = np.sign(np.linalg.det(u @ vt))
    return u @ np.diag([1.0, 1.0, d]) @ vt


@dataclass(frozen=True)
class SE3Pose:
    """World-from-frame rigid transform: p_out = rotation @ p_in + translation."""

    rotation: np.ndarray
    translation: np.ndarray

    def __post_init__(self):
        r = np.asarray(self.rotation, dtype=float).reshape(3, 3)
        t = _as_vec3(self.translation)
        err = np.abs(r @ r.T - np.eye(3)).max()
        if err > ORTHONORMAL_TOL or abs(np.linalg.det(r) - 1.0) > 1e-6:
            raise ValueError(f"rotation not orthonormal (drift {err:.2e})")
        if err > _REORTHO_TRIGGER:
            r = _project_to_so3(r)
        r.flags.writeable = False
        t.flags.writeable = False
        object.__setattr__(self, "rotation", r)
        object.__setattr__(self, "translation", t)

    @staticmethod
    def identity() -> "SE3Pose":
        return SE3Pose(np.eye(3), np.zeros(3))

    def compose(self, other: "SE3Pose") -> "SE3Pose":
        """self . other: apply other first, then self."""
        return SE3Pose(self.rotation @ other.rotation,
                       self.rotation @ other.translation + self.translation)

    def __matmul__(self, other: "SE3Pose") -> "SE3Pose":
        return self.compose(other)

    def inverse(self) -> "SE3Pose":
        rt = self.rotation.T
        return SE3Pose(rt, -rt @ self.translation)

    def apply(self, points: np.ndarray) -> np.ndarray:
        """Transform one (3,) point or an (N, 3) array of points."""
        p = np.asarray(points, dtype=float)
        return p @ self.rotation.T + self.translation

    def matrix(self) -> np.ndarray:
        m = np.eye(4)
        m[:3, :3] = self.rotation
        m[:3, 3] = self.translation
        return m

    @staticmethod
    def from_matrix(m: np.ndarray) -> "SE3Pose":
        m = np.asarray(m, dtype=float)
        return SE3Pose(m[:3, :3], m[:3, 3])

    def rotation_angle(self) -> float:
        c = (np.trace(self.rotation) - 1.0) / 2.0
        return float(np.arccos(np.clip(c, -1.0, 1.0)))

    def almost_equal(self, other: "SE3Pose", tol: float = 1e-9) -> bool:
        return (np.abs(self.rotation - other.rotation).max() <= tol
                and np.abs(self.translation - other.translation).max() <= tol)


@dataclass(frozen=True)
class Twist:
    """se(3) tangent coordinates: rho = translational part, phi = axis-angle."""

    rho: np.ndarray
    phi: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "rho", _as_vec3(self.rho))
        object.__setattr__(self, "phi", _as_vec3(self.phi))

    @staticmethod
    def from_vector(v: np.ndarray) -> "Twist":
        v = np.asarray(v, dtype=float).reshape(6)
        return Twist(v[:3], v[3:])

    def as_vector(self) -> np.ndarray:
        return np.concatenate([self.rho, self.phi])


@dataclass(frozen=True)
class CameraIntrinsics:
    fx: float
    fy: float
    cx: float
    cy: float
    width: int
    height: int
    depth_scale: float = 0.001

    def __post_init__(self):
        if self.fx <= 0 or self.fy <= 0:
            raise ValueError("focal lengths must be positive")
        if not (0 < self.cx < self.width and 0 < self.cy < self.height):
            raise ValueError("principal point must lie inside the raster")
        if self.depth_scale <= 0:
            raise ValueError("depth_scale must be positive")

    def scaled(self, factor: float) -> "CameraIntrinsics":
        """Intrinsics for a raster resized by `factor` (e.g. 0.5 for 320x240)."""
        return CameraIntrinsics(self.fx * factor, self.fy * factor,
                                self.cx * factor, self.cy * factor,
                                int(round(self.width * factor)),
                                int(round(self.height * factor)),
                                self.depth_scale)


# Raw (R, t) helpers used by hot loops; the dataclass wrappers above delegate here.

def _rot_exp(phi: np.ndarray) -> np.ndarray:
    theta = np.linalg.norm(phi)
    k = hat(phi)
    if theta < 1e-10:
        return np.eye(3) + k + 0.5 * (k @ k)
    a = np.sin(theta) / theta
    b = (1.0 - np.cos(theta)) / (theta * theta)
    return np.eye(3) + a * k + b * (k @ k)


def _rot_log(r: np.ndarray) -> np.ndarray:
    tr = np.trace(r)
    if tr <= -1.0 + 1e-9:
        raise AngleAtPi("rotation angle within tolerance of pi")
    c = np.clip((tr - 1.0) / 2.0, -1.0, 1.0)
    theta = np.arccos(c)
    w = np.array([r[2, 1] - r[1, 2], r[0, 2] - r[2, 0], r[1, 0] - r[0, 1]])
    if theta < 1e-7:
        # series for theta/(2 sin theta) ~ 1/2 + theta^2/12
        return (0.5 + theta * theta / 12.0) * w
    return (theta / (2.0 * np.sin(theta))) * w


def _se3_exp_rt(rho: np.ndarray, phi: np.ndarray):
    theta = np.linalg.norm(phi)
    k = hat(phi)
    k2 = k @ k
    if theta < 1e-10:
        r = np.eye(3) + k + 0.5 * k2
        v = np.eye(3) + 0.5 * k + k2 / 6.0
    else:
        s, c = np.sin(theta), np.cos(theta)
        r = np.eye(3) + (s / theta) * k + ((1.0 - c) / theta**2) * k2
        v = (np.eye(3) + ((1.0 - c) / theta**2) * k
             + ((theta - s) / theta**3) * k2)
    return r, v @ rho


def _se3_log_rt(r: np.ndarray, t: np.ndarray):
    phi = _rot_log(r)
    theta = np.linalg.norm(phi)
    k = hat(phi)
    if theta < 1e-10:
        vinv = np.eye(3) - 0.5 * k + (k @ k) / 12.0
    else:
        half = theta / 2.0
        cot = 1.0 / np.tan(half)
        coef = (1.0 - half * cot) / theta**2
        vinv = np.eye(3) - 0.5 * k + coef * (k @ k)
    return vinv @ t, phi


def se3_exp(xi: Twist) -> SE3Pose:
    """Exponential map from twist coordinates to a rigid transform."""
    r, t = _se3_exp_rt(xi.rho, xi.phi)
    return SE3Pose(r, t)


def se3_log(p: SE3Pose) -> Twist:
    """Inverse of se3_exp; raises AngleAtPi near the rotation singularity."""
    rho, phi = _se3_log_rt(p.rotation, p.translation)
    return Twist(rho, phi)


def se3_compose(a: SE3Pose, b: SE3Pose) -> SE3Pose:
    return a.compose(b)


def se3_inverse(a: SE3Pose) -> SE3Pose:
    return a.inverse()


def project(k: CameraIntrinsics, p_cam) -> tuple[float, float]:
    """Pinhole projection of a camera-frame point to pixel coordinates."""
    x, y, z = _as_vec3(p_cam)
    if z <= 0:
        raise BehindCamera(f"z = {z}")
    return (k.fx * x / z + k.cx, k.fy * y / z + k.cy)


def backproject(k: CameraIntrinsics, u: float, v: float, depth_m: float) -> np.ndarray:
    """Pixel plus metric depth to a camera-frame point."""
    if depth_m <= 0:
        raise BehindCamera(f"depth = {depth_m}")
    return np.array([(u - k.cx) * depth_m / k.fx,
                     (v - k.cy) * depth_m / k.fy,
                     depth_m])


def _rigid_align_rt(src: np.ndarray, dst: np.ndarray):
    """Least-squares rotation and translation with T @ src ~ dst, no scale."""
    if src.shape[0] < 3 or src.shape != dst.shape:
        raise DegenerateConfiguration(
            f"need >= 3 paired points, got {src.shape[0]} vs {dst.shape[0]}")
    cs = src.mean(axis=0)
    cd = dst.mean(axis=0)
    s0 = src - cs
    d0 = dst - cd
    # Collinear (or coincident) inputs leave a rotation axis unconstrained.
    sv_src = np.linalg.svd(s0, compute_uv=False)
    if sv_src[0] < 1e-12 or sv_src[1] < 1e-9 * sv_src[0]:
        raise DegenerateConfiguration("source points are collinear")
    h = s0.T @ d0
    u, _, vt = np.linalg.svd(h)
    d = np.sign(np.linalg.det(vt.T @ u.T))
    r = vt.T @ np.diag([1.0, 1.0, d]) @ u.T
    return r, cd - r @ cs


def rigid_align(src, dst) -> SE3Pose:
    """Closed-form rigid transform minimizing sum ||T(src_i) - dst_i||^2."""
    src = np.asarray(src, dtype=float).reshape(-1, 3)
    dst = np.asarray(dst, dtype=float).reshape(-1, 3)
    r, t = _rigid_align_rt(src, dst)
    return SE3Pose(r, t)


# quaternion interop for trajectory / archive formats (x, y, z, w order)

def quat_from_rotation(r: np.ndarray) -> np.ndarray:
    """Unit quaternion (qx, qy, qz, qw), qw >= 0, from a rotation matrix."""
    m = np.asarray(r, dtype=float)
    tr = np.trace(m)
    if tr > 0:
        s = np.sqrt(tr + 1.0) * 2.0
        q = np.array([(m[2, 1] - m[1, 2]) / s, (m[0, 2] - m[2, 0]) / s,
                      (m[1, 0] - m[0, 1]) / s, 0.25 * s])
    else:
        i = int(np.argmax(np.diag(m)))
        j, l = (i + 1) % 3, (i + 2) % 3
        s = np.sqrt(max(1.0 + m[i, i] - m[j, j] - m[l, l], 0.0)) * 2.0
        q = np.empty(4)
        q[i] = 0.25 * s
        q[j] = (m[j, i] + m[i, j]) / s
        q[l] = (m[l, i] + m[i, l]) / s
        q[3] = (m[l, j] - m[j, l]) / s
    if q[3] < 0:
        q = -q
    return q / np.linalg.norm(q)


def rotation_from_quat(q: np.ndarray) -> np.ndarray:
    x, y, z, w = np.asarray(q, dtype=float) / np.linalg.norm(q)
    return np.array([
        [1 - 2 * (y * y + z * z), 2 * (x * y - z * w), 2 * (x * z + y * w)],
        [2 * (x * y + z * w), 1 - 2 * (x * x + z * z), 2 * (y * z - x * w)],
        [2 * (x * z - y * w), 2 * (y * z + x * w), 1 - 2 * (x * x + y * y)],
    ])


def pose_to_tum(pose: SE3Pose) -> np.ndarray:
    """(tx, ty, tz, qx, qy, qz, qw) vector used by trajectory files."""
    return np.concatenate([pose.translation, quat_from_rotation(pose.rotation)])


def pose_from_tum(v) -> SE3Pose:
    v = np.asarray(v, dtype=float).reshape(7)
    return SE3Pose(rotation_from_quat(v[3:]), v[:3])


def rot_z(angle: float) -> np.ndarray:
    c, s = np.cos(angle), np.sin(angle)
    return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])


def rot_x(angle: float) -> np.ndarray:
    c, s = np.cos(angle), np.sin(angle)
    return np.array([[1.0, 0.0, 0.0], [0.0, c, -s], [0.0, s, c]])
