"""Foveated observation machinery: crop pyramids, token coordinates,
3-axis rotary embeddings, and attention masks.

A pyramid is N concentric square renders at doubling fields of view, all
at the same resolution. Tokens (image patches plus non-image inputs) live
in a shared "source image" coordinate frame sized by the coarsest level,
so attention can relate the same physical point across scales. The
direction-to-coordinate map is angle-linear, which makes the coordinate
of a world direction identical at every pyramid level.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .gimbal import GazeState
from .panorama import EquirectPanorama, ViewSpec, render_view, rotation_x, rotation_y


@dataclass(frozen=True)
class PyramidConfig:
    """Observation pyramid geometry."""

    num_levels: int = 4
    resolution: int = 224
    fov0: float = math.radians(13.75)  # coarsest level spans 110 deg at N=4
    patch_grid: int = 16
    projection: str = "pinhole"

    def __post_init__(self):
        if self.num_levels < 1:
            raise ValueError("num_levels must be >= 1")
        if self.patch_grid < 1:
            raise ValueError("patch_grid must be >= 1")
        coarsest = self.fov0 * 2.0 ** (self.num_levels - 1)
        limit = math.pi if self.projection == "pinhole" else 2.0 * math.pi
        if not (0.0 < coarsest < limit):
            raise ValueError(
                f"coarsest fov {coarsest:.4f} rad invalid for "
                f"{self.projection} projection (need < {limit:.4f})")

    @property
    def level_fovs(self) -> tuple[float, ...]:
        return tuple(self.fov0 * 2.0 ** lv for lv in range(self.num_levels))

    @property
    def source_extent(self) -> float:
        """Side length of the shared coordinate frame, in source pixels."""
        return float(self.resolution * 2 ** (self.num_levels - 1))


@dataclass(frozen=True)
class ObservationPyramid:
    """Concentric same-resolution crops at strictly increasing fovs."""

    levels: tuple  # of (R, R, 3) arrays
    level_fovs: tuple
    gaze: GazeState

    def __post_init__(self):
        shapes = {lv.shape for lv in self.levels}
        if len(shapes) != 1:
            raise ValueError(f"pyramid levels must share a resolution, got {shapes}")
        fovs = self.level_fovs
        if any(b <= a for a, b in zip(fovs, fovs[1:])):
            raise ValueError("level fovs must be strictly increasing")

    @property
    def resolution(self) -> int:
        return self.levels[0].shape[0]


def build_pyramid(pano: EquirectPanorama, gaze: GazeState,
                  config: PyramidConfig) -> ObservationPyramid:
    """Render the N-level crop pyramid centered on the gaze direction."""
    views = [
        render_view(pano, ViewSpec(gaze.azimuth, gaze.elevation, fov,
                                   config.resolution, config.projection))
        for fov in config.level_fovs
    ]
    return ObservationPyramid(levels=tuple(views),
                              level_fovs=config.level_fovs, gaze=gaze)


# --- token layout ----------------------------------------------------------

IMAGE = "image"
PROPRIO = "proprio"
GAZE = "gaze"
TARGET = "target"
QUERY = "query"

_NON_IMAGE_KINDS = (PROPRIO, GAZE, TARGET)


@dataclass(frozen=True)
class Token:
    kind: str
    t: int
    x: float
    y: float
    level: int | None = None


@dataclass(frozen=True)
class TokenLayout:
    tokens: tuple[Token, ...]
    image_extent: tuple[float, float]  # (I_W, I_H) in source pixels

    def __len__(self):
        return len(self.tokens)

    def times(self) -> np.ndarray:
        return np.array([tok.t for tok in self.tokens])

    def is_image(self) -> np.ndarray:
        return np.array([tok.kind == IMAGE for tok in self.tokens])

    def coords(self) -> np.ndarray:
        """(n, 3) array of (t, x, y) rotary coordinates."""
        return np.array([(tok.t, tok.x, tok.y) for tok in self.tokens], dtype=float)


def assign_token_coords(config: PyramidConfig, timesteps,
                        chunk_size: int = 0,
                        non_image_kinds=_NON_IMAGE_KINDS) -> TokenLayout:
    """Lay out tokens for a history of observation timesteps.

    Per timestep: P*P image tokens per pyramid level at their patch-center
    source coordinates, one token per non-image input kind at the image
    center, and (if chunk_size > 0) query tokens whose timesteps span
    t .. t+chunk_size-1.
    """
    p = config.patch_grid
    extent = config.source_extent
    cx = cy = extent / 2.0
    tokens: list[Token] = []
    for t in timesteps:
        for lv in range(config.num_levels):
            side = config.resolution * 2.0 ** lv  # S_l, source pixels
            for b in range(p):      # row -> y
                fy = (b + 0.5) / p - 0.5
                for a in range(p):  # col -> x
                    fx = (a + 0.5) / p - 0.5
                    tokens.append(Token(IMAGE, t, cx + fx * side,
                                        cy + fy * side, level=lv))
        for kind in non_image_kinds:
            tokens.append(Token(kind, t, cx, cy))
        for k in range(chunk_size):
            tokens.append(Token(QUERY, t + k, cx, cy))
    return TokenLayout(tokens=tuple(tokens), image_extent=(extent, extent))


def token_coord_of_direction(direction, gaze: GazeState,
                             config: PyramidConfig) -> tuple[float, float]:
    """Continuous source coordinate of a world direction.

    Uses the angle-linear map shared by all levels (source pixels per
    radian = resolution / fov0), so the same direction lands on the same
    coordinate regardless of which level sees it.
    """
    rot = rotation_x(gaze.elevation) @ rotation_y(-gaze.azimuth)
    d = rot @ np.asarray(direction, dtype=float)
    ax = math.atan2(d[0], d[2])
    ay = math.atan2(d[1], math.hypot(d[0], d[2]))
    scale = config.resolution / config.fov0
    cx = cy = config.source_extent / 2.0
    return (cx + ax * scale, cy - ay * scale)


# --- rotary embeddings -----------------------------------------------------


@dataclass(frozen=True)
class RotaryConfig:
    """3-axis rotary embedding: dim/3 features per (t, x, y) axis."""

    dim: int
    base_frequency: float = 1.0e4

    def __post_init__(self):
        if self.dim % 6 != 0:
            raise ValueError(f"rotary dim must be divisible by 6, got {self.dim}")
        if self.base_frequency <= 1.0:
            raise ValueError("base_frequency must be > 1")

    @property
    def axis_dim(self) -> int:
        return self.dim // 3

    def frequencies(self) -> np.ndarray:
        """Per-pair rotation frequencies within one axis block."""
        d = self.axis_dim
        k = np.arange(d // 2, dtype=float)
        return self.base_frequency ** (-2.0 * k / d)


def apply_rotary(vec: np.ndarray, coords, config: RotaryConfig) -> np.ndarray:
    """Rotate feature pairs by per-axis coordinate angles; norm-preserving.

    ``vec`` has shape (..., dim); ``coords`` is the (t, x, y) triple (or a
    broadcastable (..., 3) array). Features split into three contiguous
    axis blocks; block pairs (2k, 2k+1) rotate by coord * base**(-2k/axis_dim).
    """
    v = np.asarray(vec, dtype=float)
    if v.shape[-1] != config.dim:
        raise ValueError(f"vector dim {v.shape[-1]} != rotary dim {config.dim}")
    c = np.asarray(coords, dtype=float)
    if c.shape[-1] != 3:
        raise ValueError("coords must be a (t, x, y) triple")

    d = config.axis_dim
    freqs = config.frequencies()                       # (d/2,)
    angles = c[..., :, None] * freqs                   # (..., 3, d/2)
    angles = angles.reshape(*c.shape[:-1], 3 * (d // 2))
    cos, sin = np.cos(angles), np.sin(angles)

    pairs = v.reshape(*v.shape[:-1], 3 * (d // 2), 2)
    even, odd = pairs[..., 0], pairs[..., 1]
    out = np.empty_like(pairs)
    out[..., 0] = even * cos - odd * sin
    out[..., 1] = even * sin + odd * cos
    return out.reshape(v.shape)


# --- attention masking -----------------------------------------------------

ROLE_WINDOWS = {"eye": 10, "hand": 1}


def attention_mask(layout: TokenLayout, window: int | None = None,
                   role: str = "eye") -> np.ndarray:
    """Boolean (n, n) matrix; entry (i, j) True iff token i may attend j.

    Attention is allowed iff NOT both tokens are image tokens, t_j <= t_i
    (causal), and t_i - t_j < window. Window defaults to 10 for the eye
    role and 1 for the hand role.
    """
    if len(layout) == 0:
        raise ValueError("token layout is empty")
    if window is None:
        try:
            window = ROLE_WINDOWS[role]
        except KeyError:
            raise ValueError(f"unknown role {role!r}; expected 'eye' or 'hand'")
    times = layout.times()
    image = layout.is_image()
    dt = times[:, None] - times[None, :]
    allowed = (dt >= 0) & (dt < window)
    allowed &= ~(image[:, None] & image[None, :])
    return allowed
