"""Equirectangular panoramas and spherical view rendering.

Conventions used throughout the package:

* World frame: x right, y up, z forward (unit vectors).
* Azimuth ``theta`` rotates about +y (positive = looking right/east),
  elevation ``phi`` tilts toward +y (positive = looking up).
* Equirectangular rasters are 2:1 (width = 2 * height); texel ``(i, j)``
  is centered at continuous coordinates ``u = i`` and ``v = j``, with
  ``u`` wrapping horizontally and ``v`` clamped vertically.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from PIL import Image

TWO_PI = 2.0 * np.pi
_POLE_EPS = 1e-12


def wrap_angle(theta):
    """Wrap angle(s) to (-pi, pi]."""
    wrapped = np.mod(np.asarray(theta, dtype=float) + np.pi, TWO_PI) - np.pi
    wrapped = np.where(wrapped == -np.pi, np.pi, wrapped)
    if np.ndim(theta) == 0:
        return float(wrapped)
    return wrapped


def dir_from_angles(azimuth, elevation):
    """Unit direction for gaze angles.

    Accepts scalars or broadcastable arrays; returns shape (..., 3) with
    components (cos(el)*sin(az), sin(el), cos(el)*cos(az)).
    """
    az = np.asarray(azimuth, dtype=float)
    el = np.asarray(elevation, dtype=float)
    ce = np.cos(el)
    d = np.stack([ce * np.sin(az), np.sin(el), ce * np.cos(az)], axis=-1)
    return d


def angles_from_dir(d):
    """Inverse of :func:`dir_from_angles`.

    Returns (azimuth, elevation). At the poles (|y| within 1e-12 of 1)
    azimuth is defined as 0.
    """
    d = np.asarray(d, dtype=float)
    x, y, z = d[..., 0], d[..., 1], d[..., 2]
    el = np.arcsin(np.clip(y, -1.0, 1.0))
    az = np.arctan2(x, z)
    az = np.where(np.abs(y) >= 1.0 - _POLE_EPS, 0.0, az)
    if d.ndim == 1:
        return float(az), float(el)
    return az, el


def equirect_pixel(d, width, height):
    """Map unit direction(s) to continuous equirectangular coordinates.

    u wraps modulo ``width``; v is clamped to [0, height).
    """
    az, el = angles_from_dir(np.asarray(d, dtype=float))
    u = np.mod((np.asarray(az) / TWO_PI + 0.5) * width, width)
    v = np.clip((0.5 - np.asarray(el) / np.pi) * height, 0.0,
                np.nextafter(float(height), 0.0))
    if np.ndim(d) == 1:
        return float(u), float(v)
    return u, v


def angles_from_pixel(u, v, width, height):
    """Gaze angles of continuous equirectangular coordinates (inverse map)."""
    az = (np.asarray(u, dtype=float) / width - 0.5) * TWO_PI
    el = (0.5 - np.asarray(v, dtype=float) / height) * np.pi
    if np.ndim(u) == 0 and np.ndim(v) == 0:
        return float(az), float(el)
    return az, el


def pixel_directions(width, height):
    """Unit directions of every texel center, shape (height, width, 3)."""
    u, v = np.meshgrid(np.arange(width, dtype=float),
                       np.arange(height, dtype=float))
    az, el = angles_from_pixel(u, v, width, height)
    return dir_from_angles(az, el)


@dataclass(frozen=True)
class EquirectPanorama:
    """Full-sphere raster; channels are reals in [0, 1], width = 2 * height."""

    pixels: np.ndarray = field(repr=False)

    def __post_init__(self):
        px = np.ascontiguousarray(np.asarray(self.pixels, dtype=float))
        if px.ndim != 3 or px.shape[2] != 3:
            raise ValueError(f"panorama pixels must be (H, W, 3), got {px.shape}")
        h, w = px.shape[:2]
        if w != 2 * h or h < 1 or w < 2:
            raise ValueError(f"panorama must be 2:1 (width = 2*height), got {w}x{h}")
        if px.min() < 0.0 or px.max() > 1.0:
            raise ValueError("panorama channel values must lie in [0, 1]")
        px.flags.writeable = False  # immutable after load; safe to share
        object.__setattr__(self, "pixels", px)

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def height(self) -> int:
        return self.pixels.shape[0]


@dataclass(frozen=True)
class ViewSpec:
    """Camera pose and optics for a square rendered view."""

    azimuth: float
    elevation: float
    fov: float
    resolution: int
    projection: str = "pinhole"  # or "fisheye" (ideal equidistant)

    def __post_init__(self):
        if self.projection not in ("pinhole", "fisheye"):
            raise ValueError(f"unknown projection {self.projection!r}")
        if self.resolution < 1:
            raise ValueError("resolution must be >= 1")
        hi = np.pi if self.projection == "pinhole" else TWO_PI
        if not (0.0 < self.fov < hi):
            raise ValueError(
                f"fov {self.fov!r} outside valid range (0, {hi:.6f}) "
                f"for {self.projection} projection")
        if not (-np.pi / 2 <= self.elevation <= np.pi / 2):
            raise ValueError("elevation must lie in [-pi/2, pi/2]")


def sample_bilinear(pano: EquirectPanorama, u, v):
    """Bilinear sample with horizontal wraparound and vertical clamping.

    Texel (i, j) is centered at (u=i, v=j); integer coordinates return
    exact texel values. Vectorized over arrays of coordinates.
    """
    px = pano.pixels
    h, w = px.shape[:2]
    u = np.mod(np.asarray(u, dtype=float), w)
    v = np.clip(np.asarray(v, dtype=float), 0.0, h - 1.0)

    x0 = np.floor(u).astype(np.intp)
    y0 = np.floor(v).astype(np.intp)
    fx = (u - x0)[..., None]
    fy = (v - y0)[..., None]
    x0 = np.mod(x0, w)
    x1 = np.mod(x0 + 1, w)   # seam wraps to column 0
    y1 = np.minimum(y0 + 1, h - 1)

    top = px[y0, x0] * (1.0 - fx) + px[y0, x1] * fx
    bot = px[y1, x0] * (1.0 - fx) + px[y1, x1] * fx
    return top * (1.0 - fy) + bot * fy


def rotation_y(theta: float) -> np.ndarray:
    c, s = np.cos(theta), np.sin(theta)
    return np.array([[c, 0.0, s], [0.0, 1.0, 0.0], [-s, 0.0, c]])


def rotation_x(theta: float) -> np.ndarray:
    c, s = np.cos(theta), np.sin(theta)
    return np.array([[1.0, 0.0, 0.0], [0.0, c, -s], [0.0, s, c]])


_RAY_CACHE: dict[tuple, np.ndarray] = {}
_RAY_CACHE_MAX = 64


def camera_rays(fov: float, resolution: int, projection: str) -> np.ndarray:
    """Unit camera-frame rays for every output pixel, shape (R, R, 3).

    Pinhole rays pass through an image plane at distance 1 with half-extent
    tan(fov/2); equidistant-fisheye rays make an angle with the optical axis
    proportional to radial pixel distance. Results are cached per geometry.
    """
    key = (projection, float(fov), int(resolution))
    cached = _RAY_CACHE.get(key)
    if cached is not None:
        return cached

    r = resolution
    ndc = (np.arange(r, dtype=float) + 0.5) / r * 2.0 - 1.0
    xx, yy = np.meshgrid(ndc, ndc)  # yy grows downward in the image
    if projection == "pinhole":
        half = np.tan(fov / 2.0)
        rays = np.stack([xx * half, -yy * half, np.ones_like(xx)], axis=-1)
        rays /= np.linalg.norm(rays, axis=-1, keepdims=True)
    else:  # ideal equidistant fisheye
        rho = np.hypot(xx, yy)
        alpha = rho * (fov / 2.0)
        with np.errstate(invalid="ignore", divide="ignore"):
            ux = np.where(rho > 0, xx / rho, 0.0)
            uy = np.where(rho > 0, -yy / rho, 0.0)
        sa = np.sin(alpha)
        rays = np.stack([sa * ux, sa * uy, np.cos(alpha)], axis=-1)

    if len(_RAY_CACHE) >= _RAY_CACHE_MAX:
        _RAY_CACHE.clear()
    _RAY_CACHE[key] = rays
    return rays


def render_view(pano: EquirectPanorama, view: ViewSpec) -> np.ndarray:
    """Render a square perspective or fisheye view by spherical resampling.

    Camera rays are rotated by R_y(azimuth) @ R_x(-elevation) and the
    panorama is sampled bilinearly. Pure function of the panorama content
    and view parameters; output channels stay in [0, 1].
    """
    rays = camera_rays(view.fov, view.resolution, view.projection)
    rot = rotation_y(view.azimuth) @ rotation_x(-view.elevation)
    world = rays.reshape(-1, 3) @ rot.T
    u, v = equirect_pixel(world, pano.width, pano.height)
    out = sample_bilinear(pano, u, v)
    return out.reshape(view.resolution, view.resolution, 3)


def load_panorama(path) -> EquirectPanorama:
    """Load an 8-bit RGB raster file as a panorama (channels scaled by 1/255)."""
    with Image.open(Path(path)) as im:
        arr = np.asarray(im.convert("RGB"), dtype=float) / 255.0
    return EquirectPanorama(arr)


def save_image(path, raster: np.ndarray) -> None:
    """Write an [0, 1] RGB array as an 8-bit PNG (or format by extension)."""
    arr = np.clip(np.asarray(raster, dtype=float), 0.0, 1.0)
    Image.fromarray(np.round(arr * 255.0).astype(np.uint8), mode="RGB").save(Path(path))
