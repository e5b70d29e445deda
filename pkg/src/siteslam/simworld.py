"""Synthetic construction site and UAV flight simulator.

Renders timestamped RGB-D frames with ground-truth poses by ray-casting a
textured height field. The terrain function is bilinear interpolation over a
precomputed grid (procedural value noise plus object deltas), so renderer and
analytics query the identical surface; sharp object walls become ramps one
grid cell wide.
"""
from __future__ import annotations

import os
import re
import weakref
from dataclasses import dataclass, field

import numpy as np

from .errors import CameraUnderground, EmptyPlan, MalformedDataset
from .geom import SE3Pose, CameraIntrinsics, rot_x

RAY_STEP_M = 0.02
# bisection narrows the 0.02 m march bracket to ~0.6 mm, inside the depth
# quantization step
REFINE_ITERS = 5


# deterministic lattice hashing for value noise

_M1 = np.uint64(0x9E3779B97F4A7C15)
_M2 = np.uint64(0xC2B2AE3D27D4EB4F)
_M3 = np.uint64(0xBF58476D1CE4E5B9)
_M4 = np.uint64(0x94D049BB133111EB)
_MASK = (1 << 64) - 1


def _hash01(ix: np.ndarray, iy: np.ndarray, seed: int) -> np.ndarray:
    """Uniform [0,1) value per integer lattice node, stable across platforms."""
    h = ix.astype(np.int64).astype(np.uint64) * _M1
    h ^= iy.astype(np.int64).astype(np.uint64) * _M2
    h ^= np.uint64((seed * 0x165667B19E3779F9) & _MASK)
    h ^= h >> np.uint64(30)
    h *= _M3
    h ^= h >> np.uint64(27)
    h *= _M4
    h ^= h >> np.uint64(31)
    return (h >> np.uint64(11)).astype(np.float64) * (1.0 / (1 << 53))


def value_noise(x: np.ndarray, y: np.ndarray, seed: int, scale: float) -> np.ndarray:
    """Smooth value noise in [0,1), feature size ~`scale` meters."""
    gx = np.asarray(x, dtype=float) / scale
    gy = np.asarray(y, dtype=float) / scale
    ix = np.floor(gx)
    iy = np.floor(gy)
    fx = gx - ix
    fy = gy - iy
    sx = fx * fx * (3.0 - 2.0 * fx)
    sy = fy * fy * (3.0 - 2.0 * fy)
    v00 = _hash01(ix, iy, seed)
    v10 = _hash01(ix + 1, iy, seed)
    v01 = _hash01(ix, iy + 1, seed)
    v11 = _hash01(ix + 1, iy + 1, seed)
    return (v00 * (1 - sx) + v10 * sx) * (1 - sy) + (v01 * (1 - sx) + v11 * sx) * sy


# scene description

@dataclass(frozen=True, eq=False)
class TerrainParams:
    amplitude: float = 0.12      # half peak-to-peak relief, meters
    feature_size: float = 2.5    # largest octave wavelength, meters
    octaves: int = 2

    def height(self, x, y, seed):
        x = np.asarray(x, dtype=float)
        h = np.zeros(np.broadcast(x, np.asarray(y)).shape)
        if self.amplitude <= 0:
            return h
        for o in range(self.octaves):
            amp = self.amplitude / (2 ** o)
            h = h + amp * (2.0 * value_noise(x, y, seed + o, self.feature_size / (2 ** o)) - 1.0)
        return h


@dataclass(frozen=True, eq=False)
class SceneObject:
    kind: str                 # "box" | "trench_polygon"
    footprint: np.ndarray     # (M, 2) polygon vertices, meters
    height_delta: float       # negative = excavation
    label: str = ""

    def __post_init__(self):
        fp = np.asarray(self.footprint, dtype=float).reshape(-1, 2)
        if fp.shape[0] < 3:
            raise ValueError("footprint needs >= 3 vertices")
        fp.flags.writeable = False
        object.__setattr__(self, "footprint", fp)


# texture octaves: (feature size m, weight); smallest ~6 px at 4 m altitude
DEFAULT_TEXTURE_OCTAVES = ((0.5, 0.25), (0.2, 0.35), (0.09, 0.4))


@dataclass(frozen=True, eq=False)
class SceneSpec:
    extent: tuple[float, float] = (14.0, 12.0)
    terrain: TerrainParams = field(default_factory=TerrainParams)
    texture_seed: int = 7
    texture_contrast: float = 1.0
    objects: tuple[SceneObject, ...] = ()
    grid_cell: float = 0.05

    def __post_init__(self):
        if self.extent[0] <= 0 or self.extent[1] <= 0:
            raise ValueError("extent must be positive")
        if self.terrain.amplitude < 0:
            raise ValueError("amplitude must be >= 0")


def points_in_polygon(px: np.ndarray, py: np.ndarray, poly: np.ndarray) -> np.ndarray:
    """Even-odd containment test, vectorized over query points."""
    inside = np.zeros(np.broadcast(px, py).shape, dtype=bool)
    x1, y1 = poly[-1]
    for x2, y2 in poly:
        crosses = (y1 > py) != (y2 > py)
        if y2 != y1:
            with np.errstate(all="ignore"):
                xint = (x2 - x1) * (py - y1) / (y2 - y1) + x1
            inside ^= crosses & (px < xint)
        x1, y1 = x2, y2
    return inside


class HeightField:
    """Bilinear terrain surface on a regular grid; this IS the scene's height function."""

    def __init__(self, origin, cell, z):
        self.origin = np.asarray(origin, dtype=float)
        self.cell = float(cell)
        self.z = np.asarray(z, dtype=float)
        self.ny, self.nx = self.z.shape
        self.zmin = float(self.z.min())
        self.zmax = float(self.z.max())
        self._zf32 = self.z.astype(np.float32).ravel()
        # dilated per-tile height bounds let rays march only their local band
        tile = max(1, int(round(1.0 / cell)))
        pad_y = (-self.ny) % tile
        pad_x = (-self.nx) % tile
        zp = np.pad(self.z, ((0, pad_y), (0, pad_x)), mode="edge")
        nty, ntx = zp.shape[0] // tile, zp.shape[1] // tile
        blocks = zp.reshape(nty, tile, ntx, tile)
        from scipy.ndimage import maximum_filter, minimum_filter
        self._tile_w = tile * cell
        self._ntx, self._nty = ntx, nty
        self._tmax = maximum_filter(blocks.max(axis=(1, 3)), size=5,
                                    mode="nearest").astype(np.float32)
        self._tmin = minimum_filter(blocks.min(axis=(1, 3)), size=5,
                                    mode="nearest").astype(np.float32)

    def _sample32(self, x, y):
        # float32 fast path for the ray marcher (errors ~1e-7 m, far below
        # the depth quantization step)
        gx = np.clip((x - np.float32(self.origin[0])) * np.float32(1.0 / self.cell),
                     np.float32(0), np.float32(self.nx - 1))
        gy = np.clip((y - np.float32(self.origin[1])) * np.float32(1.0 / self.cell),
                     np.float32(0), np.float32(self.ny - 1))
        i0 = np.minimum(gx.astype(np.int32), self.nx - 2)
        j0 = np.minimum(gy.astype(np.int32), self.ny - 2)
        fx = gx - i0
        fy = gy - j0
        zf = self._zf32
        base = j0 * self.nx + i0
        top = zf[base] * (1 - fx) + zf[base + 1] * fx
        bot = zf[base + self.nx] * (1 - fx) + zf[base + self.nx + 1] * fx
        return top * (1 - fy) + bot * fy

    def sample(self, x, y):
        gx = np.clip((np.asarray(x, dtype=float) - self.origin[0]) / self.cell, 0.0, self.nx - 1.0)
        gy = np.clip((np.asarray(y, dtype=float) - self.origin[1]) / self.cell, 0.0, self.ny - 1.0)
        i0 = np.minimum(gx.astype(np.int64), self.nx - 2)
        j0 = np.minimum(gy.astype(np.int64), self.ny - 2)
        fx = gx - i0
        fy = gy - j0
        zf = self.z.ravel()
        base = j0 * self.nx + i0
        z00 = zf[base]
        z10 = zf[base + 1]
        z01 = zf[base + self.nx]
        z11 = zf[base + self.nx + 1]
        return (z00 * (1 - fx) + z10 * fx) * (1 - fy) + (z01 * (1 - fx) + z11 * fx) * fy


def build_heightfield(scene: SceneSpec) -> HeightField:
    ex, ey = scene.extent
    cell = scene.grid_cell
    nx = int(round(ex / cell)) + 1
    ny = int(round(ey / cell)) + 1
    xs = np.arange(nx) * cell
    ys = np.arange(ny) * cell
    gx, gy = np.meshgrid(xs, ys)
    z = scene.terrain.height(gx, gy, scene.texture_seed * 31 + 1)
    for obj in scene.objects:
        z = z + np.where(points_in_polygon(gx, gy, obj.footprint), obj.height_delta, 0.0)
    return HeightField((0.0, 0.0), cell, z)


class _World:
    def __init__(self, scene: SceneSpec):
        self.scene = scene
        self.heightfield = build_heightfield(scene)

    def texture_gray(self, x, y):
        s = self.scene
        if s.texture_contrast <= 0:
            return np.full(np.broadcast(x, y).shape, 128.0)
        total = np.zeros(np.broadcast(x, y).shape)
        wsum = 0.0
        for i, (scale, w) in enumerate(DEFAULT_TEXTURE_OCTAVES):
            total = total + w * value_noise(x, y, s.texture_seed + 101 + i, scale)
            wsum += w
        g01 = total / wsum
        return 255.0 * np.clip(0.5 + s.texture_contrast * (g01 - 0.5) * 2.0, 0.0, 1.0)


_world_cache: "weakref.WeakKeyDictionary[SceneSpec, _World]" = weakref.WeakKeyDictionary()


def _world_of(scene: SceneSpec) -> _World:
    w = _world_cache.get(scene)
    if w is None:
        w = _World(scene)
        _world_cache[scene] = w
    return w


def scene_height(scene: SceneSpec, x, y):
    """Terrain height at (x, y): the surface the renderer casts against."""
    return _world_of(scene).heightfield.sample(x, y)


# flight planning

@dataclass(frozen=True, eq=False)
class FlightPlan:
    waypoints: np.ndarray          # (N, 3), z = altitude
    speed: float = 0.5             # m/s
    frame_rate: float = 15.0       # Hz
    camera_pitch: float = 0.0      # radians from nadir, >0 tilts toward travel

    def __post_init__(self):
        wp = np.asarray(self.waypoints, dtype=float).reshape(-1, 3)
        wp.flags.writeable = False
        object.__setattr__(self, "waypoints", wp)
        if self.speed <= 0 or self.frame_rate <= 0:
            raise ValueError("speed and frame_rate must be positive")
        if wp.shape[0] and wp[:, 2].min() <= 0:
            raise ValueError("waypoint altitude must be positive")

    def path_length(self) -> float:
        d = np.diff(self.waypoints, axis=0)
        return float(np.linalg.norm(d, axis=1).sum())

    def duration(self) -> float:
        return self.path_length() / self.speed


def _heading_rotation(heading: np.ndarray, pitch: float) -> np.ndarray:
    # nadir camera, image-up toward travel: x_cam = right-of-travel, y_cam = -heading
    h = heading / np.linalg.norm(heading)
    cam_x = np.array([h[1], -h[0], 0.0])
    cam_y = -np.array([h[0], h[1], 0.0])
    cam_z = np.array([0.0, 0.0, -1.0])
    r = np.column_stack([cam_x, cam_y, cam_z])
    if pitch != 0.0:
        r = r @ rot_x(pitch)
    return r


def plan_trajectory(plan: FlightPlan, duration_s: float) -> list[tuple[float, SE3Pose]]:
    """Constant-speed poses along the piecewise-linear path, one per frame tick."""
    wp = plan.waypoints
    if wp.shape[0] < 2:
        raise EmptyPlan("need at least two waypoints")
    seg = np.diff(wp, axis=0)
    seg_len = np.linalg.norm(seg, axis=1)
    cum = np.concatenate([[0.0], np.cumsum(seg_len)])
    total = cum[-1]

    # horizontal headings per segment; vertical/zero segments reuse a neighbor
    headings = []
    last = np.array([1.0, 0.0])
    for d in seg:
        h = d[:2]
        if np.linalg.norm(h) > 1e-12:
            last = h / np.linalg.norm(h)
        headings.append(last)
    headings = np.asarray(headings)

    count = int(np.floor(duration_s * plan.frame_rate)) + 1
    out = []
    for k in range(count):
        t = k / plan.frame_rate
        s = min(plan.speed * t, total)
        i = min(int(np.searchsorted(cum, s, side="right")) - 1, len(seg) - 1)
        i = max(i, 0)
        if seg_len[i] > 0:
            pos = wp[i] + (s - cum[i]) / seg_len[i] * seg[i]
        else:
            pos = wp[i]
        r = _heading_rotation(np.array([headings[i][0], headings[i][1], 0.0]),
                              plan.camera_pitch)
        out.append((t, SE3Pose(r, pos)))
    return out


# sensor model

@dataclass(frozen=True)
class NoiseModel:
    depth_sigma_rel: float = 0.01
    depth_min: float = 0.5
    depth_max: float = 5.0
    dropout_prob: float = 0.02
    pixel_intensity_sigma: float = 2.0

    def __post_init__(self):
        if not (0.0 <= self.dropout_prob <= 1.0):
            raise ValueError("dropout_prob must be a probability")
        if not (0.0 < self.depth_min < self.depth_max):
            raise ValueError("need 0 < depth_min < depth_max")

    @staticmethod
    def noiseless(depth_min: float = 0.5, depth_max: float = 5.0) -> "NoiseModel":
        return NoiseModel(0.0, depth_min, depth_max, 0.0, 0.0)


@dataclass
class FrameRecord:
    timestamp: float
    rgb: np.ndarray               # (H, W, 3) uint8
    depth: np.ndarray             # (H, W) uint16, 0 = invalid
    gt_pose: SE3Pose | None = None


# R200 outdoor profile, stored verbatim as dataset metadata, never interpreted
DEFAULT_SENSOR_PROFILE: tuple[tuple[str, float], ...] = (
    ("Color_backlight_compensation", 0),
    ("Color_enable_auto_white_balance", 0),
    ("R200_lr_auto_exposure_enabled", 1),
    ("R200_lr_exposure", 23),
    ("R200_lr_gain", 100),
    ("R200_emitter_enabled", 1),
)


@dataclass(frozen=True)
class SensorProfile:
    entries: tuple[tuple[str, float], ...] = DEFAULT_SENSOR_PROFILE

    def __post_init__(self):
        names = [n for n, _ in self.entries]
        if len(set(names)) != len(names):
            raise ValueError("profile names must be unique")

    def get(self, name: str) -> float:
        for n, v in self.entries:
            if n == name:
                return v
        raise KeyError(name)


DEFAULT_INTRINSICS_640 = CameraIntrinsics(525.0, 525.0, 319.5, 239.5, 640, 480, 0.001)
DEFAULT_INTRINSICS_320 = DEFAULT_INTRINSICS_640.scaled(0.5)


_ray_cache: dict[tuple, tuple[np.ndarray, np.ndarray]] = {}


def _camera_rays(k: CameraIntrinsics):
    key = (k.fx, k.fy, k.cx, k.cy, k.width, k.height)
    hit = _ray_cache.get(key)
    if hit is None:
        u = np.arange(k.width, dtype=float)
        v = np.arange(k.height, dtype=float)
        uu, vv = np.meshgrid(u, v)
        d = np.stack([(uu - k.cx) / k.fx, (vv - k.cy) / k.fy, np.ones_like(uu)])
        d = d.reshape(3, -1)
        hit = (d, np.linalg.norm(d, axis=0))
        _ray_cache[key] = hit
    return hit


def render_clean(scene: SceneSpec, k: CameraIntrinsics, pose: SE3Pose):
    """Noise-free depth (meters, NaN where no hit) and gray texture rasters."""
    world = _world_of(scene)
    hf = world.heightfield
    c = pose.translation
    if c[2] <= float(hf.sample(c[0], c[1])):
        raise CameraUnderground(f"camera at z={c[2]:.3f} under terrain")

    dirs_cam, norms = _camera_rays(k)
    dirs = (pose.rotation @ dirs_cam).astype(np.float32)  # s is camera-z depth
    n = dirs.shape[1]
    dz = dirs[2]
    down = dz < -1e-12
    c32 = c.astype(np.float32)

    step_all = (RAY_STEP_M / norms).astype(np.float32)  # per-ray step in depth units

    # march downward rays in lockstep, periodically dropping finished rays
    idx = np.nonzero(down)[0].astype(np.int64)
    with np.errstate(all="ignore"):
        s_top = np.maximum((np.float32(hf.zmax + 1e-4) - c32[2]) / dz[idx], np.float32(0))
    ti = np.clip(((c32[0] + s_top * dirs[0, idx] - np.float32(hf.origin[0]))
                  / np.float32(hf._tile_w)).astype(np.int32), 0, hf._ntx - 1)
    tj = np.clip(((c32[1] + s_top * dirs[1, idx] - np.float32(hf.origin[1]))
                  / np.float32(hf._tile_w)).astype(np.int32), 0, hf._nty - 1)
    hub = hf._tmax[tj, ti] + np.float32(1e-4)
    hlb = hf._tmin[tj, ti] - np.float32(1e-4)
    s = np.maximum((hub - c32[2]) / dz[idx], np.float32(0))
    s_end = (hlb - c32[2]) / dz[idx]
    step = step_all[idx]
    dx, dy, dzi = dirs[0, idx], dirs[1, idx], dirs[2, idx]
    hit_s = np.full(n, np.nan, dtype=np.float32)
    cx, cy, cz = c32
    chunk_iter = iter([2, 3, 5])
    while idx.size:
        chunk = next(chunk_iter, 8)
        found = np.zeros(idx.shape, dtype=bool)
        for _ in range(chunk):
            s_next = np.minimum(s + step, s_end)
            below = (cz + s_next * dzi) <= hf._sample32(cx + s_next * dx, cy + s_next * dy)
            newly = below & ~found
            if newly.any():
                nz = newly.nonzero()[0]
                hit_s[idx[nz]] = s_next[nz]
                found |= newly
            s = s_next
        keep = ~found & (s < s_end)
        if not keep.all():
            idx, s, s_end, step = idx[keep], s[keep], s_end[keep], step[keep]
            dx, dy, dzi = dx[keep], dy[keep], dzi[keep]

    depth = np.full(n, np.nan)
    hit = np.isfinite(hit_s)
    if hit.any():
        idx = np.nonzero(hit)[0]
        b = hit_s[idx]
        a = b - step_all[idx]
        dx, dy, dzi = dirs[0, idx], dirs[1, idx], dirs[2, idx]
        for _ in range(REFINE_ITERS):
            m = np.float32(0.5) * (a + b)
            below = (cz + m * dzi) <= hf._sample32(cx + m * dx, cy + m * dy)
            b = np.where(below, m, b)
            a = np.where(below, a, m)
        depth[idx] = (np.float32(0.5) * (a + b)).astype(np.float64)

    gray = np.full(n, 128.0)
    if hit.any():
        idx = np.nonzero(hit)[0]
        hx = c[0] + depth[idx] * dirs[0, idx].astype(np.float64)
        hy = c[1] + depth[idx] * dirs[1, idx].astype(np.float64)
        gray[idx] = world.texture_gray(hx, hy)

    return depth.reshape(k.height, k.width), gray.reshape(k.height, k.width)


def finish_frame(depth_m: np.ndarray, gray: np.ndarray, k: CameraIntrinsics,
                 noise: NoiseModel, rng_seed, timestamp: float = 0.0,
                 gt_pose: SE3Pose | None = None) -> FrameRecord:
    """Apply the sensor noise model and quantize to the raster formats."""
    rng = np.random.default_rng(rng_seed)
    d = depth_m.copy()
    valid = np.isfinite(d)
    if noise.depth_sigma_rel > 0:
        d = d + noise.depth_sigma_rel * d * rng.standard_normal(d.shape)
    if noise.dropout_prob > 0:
        valid &= rng.random(d.shape) >= noise.dropout_prob
    valid &= np.isfinite(d) & (d >= noise.depth_min) & (d <= noise.depth_max)
    depth_u16 = np.zeros(d.shape, dtype=np.uint16)
    q = np.round(np.where(valid, d, 0.0) / k.depth_scale)
    depth_u16[valid] = np.clip(q[valid], 1, 65535).astype(np.uint16)

    g = gray.copy()
    if noise.pixel_intensity_sigma > 0:
        g = g + noise.pixel_intensity_sigma * rng.standard_normal(g.shape)
    g8 = np.clip(np.round(g), 0, 255).astype(np.uint8)
    rgb = np.repeat(g8[:, :, None], 3, axis=2)
    return FrameRecord(timestamp, rgb, depth_u16, gt_pose)


def render_frame(scene: SceneSpec, k: CameraIntrinsics, pose: SE3Pose,
                 noise: NoiseModel = NoiseModel(), rng_seed=0,
                 timestamp: float = 0.0) -> FrameRecord:
    depth_m, gray = render_clean(scene, k, pose)
    return finish_frame(depth_m, gray, k, noise, rng_seed, timestamp, gt_pose=pose)


# dataset directory format

def _write_pnm(path: str, magic: bytes, arr: np.ndarray, maxval: int):
    h, w = arr.shape[:2]
    with open(path, "wb") as f:
        f.write(magic + b"\n%d %d\n%d\n" % (w, h, maxval))
        if maxval > 255:
            f.write(arr.astype(">u2").tobytes())
        else:
            f.write(arr.tobytes())


def _read_pnm(path: str):
    with open(path, "rb") as f:
        data = f.read()
    m = re.match(rb"(P[56])\s+(\d+)\s+(\d+)\s+(\d+)\s", data)
    if not m:
        raise MalformedDataset(f"bad PNM header in {path}")
    magic, w, h, maxval = m.group(1), int(m.group(2)), int(m.group(3)), int(m.group(4))
    body = data[m.end():]
    if magic == b"P6":
        arr = np.frombuffer(body, dtype=np.uint8, count=w * h * 3).reshape(h, w, 3)
    elif maxval > 255:
        arr = np.frombuffer(body, dtype=">u2", count=w * h).reshape(h, w).astype(np.uint16)
    else:
        arr = np.frombuffer(body, dtype=np.uint8, count=w * h).reshape(h, w)
    return arr.copy()


def write_dataset(frames, k: CameraIntrinsics, profile: SensorProfile, out_dir: str):
    """Write frames to the on-disk layout (calib, profile, rgb/, depth/, timestamps,
    groundtruth when poses are present)."""
    os.makedirs(os.path.join(out_dir, "rgb"), exist_ok=True)
    os.makedirs(os.path.join(out_dir, "depth"), exist_ok=True)
    with open(os.path.join(out_dir, "calib.txt"), "w") as f:
        f.write("%.17g %.17g %.17g %.17g %d %d %.17g\n"
                % (k.fx, k.fy, k.cx, k.cy, k.width, k.height, k.depth_scale))
    with open(os.path.join(out_dir, "profile.txt"), "w") as f:
        for name, val in profile.entries:
            f.write(f"{name}={val:.17g}\n")
    ts_lines = []
    gt_lines = []
    n = 0
    for i, fr in enumerate(frames):
        if fr.rgb.shape[:2] != (k.height, k.width) or fr.depth.shape != (k.height, k.width):
            raise ValueError(f"frame {i} raster size does not match intrinsics")
        _write_pnm(os.path.join(out_dir, "rgb", f"{i:06d}.ppm"), b"P6", fr.rgb, 255)
        _write_pnm(os.path.join(out_dir, "depth", f"{i:06d}.pgm"), b"P5", fr.depth, 65535)
        ts_lines.append(f"{i:06d} {fr.timestamp:.6f}\n")
        if fr.gt_pose is not None:
            from .geom import pose_to_tum
            v = pose_to_tum(fr.gt_pose)
            gt_lines.append(f"{fr.timestamp:.6f} " + " ".join("%.17g" % x for x in v) + "\n")
        n += 1
    with open(os.path.join(out_dir, "timestamps.txt"), "w") as f:
        f.writelines(ts_lines)
    if gt_lines:
        if len(gt_lines) != n:
            raise ValueError("either all frames carry ground truth or none")
        with open(os.path.join(out_dir, "groundtruth.txt"), "w") as f:
            f.writelines(gt_lines)


class DatasetFrames:
    """Lazy frame sequence; rasters are loaded per access to bound memory."""

    def __init__(self, root: str, timestamps: list[float], gt: list[SE3Pose] | None,
                 k: CameraIntrinsics):
        self.root = root
        self.timestamps = timestamps
        self.gt = gt
        self.intrinsics = k

    def __len__(self):
        return len(self.timestamps)

    def __getitem__(self, i: int) -> FrameRecord:
        if not (0 <= i < len(self)):
            raise IndexError(i)
        rgb = _read_pnm(os.path.join(self.root, "rgb", f"{i:06d}.ppm"))
        depth = _read_pnm(os.path.join(self.root, "depth", f"{i:06d}.pgm"))
        gt = self.gt[i] if self.gt is not None else None
        return FrameRecord(self.timestamps[i], rgb, depth, gt)

    def __iter__(self):
        for i in range(len(self)):
            yield self[i]


def read_dataset(root: str) -> tuple[DatasetFrames, CameraIntrinsics, SensorProfile]:
    calib_path = os.path.join(root, "calib.txt")
    if not os.path.isfile(calib_path):
        raise MalformedDataset(f"missing calib.txt in {root}")
    try:
        parts = open(calib_path).read().split()
        fx, fy, cx, cy = map(float, parts[:4])
        w, h = int(parts[4]), int(parts[5])
        scale = float(parts[6])
        k = CameraIntrinsics(fx, fy, cx, cy, w, h, scale)
    except (ValueError, IndexError) as e:
        raise MalformedDataset(f"bad calib.txt: {e}") from e

    entries = []
    prof_path = os.path.join(root, "profile.txt")
    if os.path.isfile(prof_path):
        for line in open(prof_path):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            name, _, val = line.partition("=")
            try:
                entries.append((name.strip(), float(val)))
            except ValueError as e:
                raise MalformedDataset(f"bad profile line {line!r}") from e
    profile = SensorProfile(tuple(entries) if entries else DEFAULT_SENSOR_PROFILE)

    ts_path = os.path.join(root, "timestamps.txt")
    if not os.path.isfile(ts_path):
        raise MalformedDataset("missing timestamps.txt")
    timestamps = []
    for line in open(ts_path):
        if line.strip():
            _, t = line.split()
            timestamps.append(float(t))
    if not timestamps:
        raise MalformedDataset("dataset has no frames")

    for sub, ext in (("rgb", ".ppm"), ("depth", ".pgm")):
        d = os.path.join(root, sub)
        count = len([f for f in os.listdir(d)] if os.path.isdir(d) else [])
        if count != len(timestamps):
            raise MalformedDataset(
                f"{sub}/ has {count} files, timestamps.txt lists {len(timestamps)}")

    gt = None
    gt_path = os.path.join(root, "groundtruth.txt")
    if os.path.isfile(gt_path):
        from .geom import pose_from_tum
        gt = []
        for line in open(gt_path):
            if not line.strip() or line.startswith("#"):
                continue
            vals = list(map(float, line.split()))
            gt.append(pose_from_tum(vals[1:8]))
        if len(gt) != len(timestamps):
            raise MalformedDataset("groundtruth.txt frame count mismatch")

    return DatasetFrames(root, timestamps, gt, k), k, profile
