"""Reward families: truncated angular distance for object search, feature
similarity for scene search, and negative discrete Frechet distance between
end-effector paths for action-prediction quality.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .kinematics import DHChain, ee_path


def truncated_distance_reward(gaze_dir, target_dir, fov: float) -> float:
    """Zero outside the field of view, rising linearly to 1 when centered.

    alpha is the geodesic angle between gaze and target; the reward is
    1 - alpha/(fov/2) for alpha <= fov/2 and 0 beyond.
    """
    if not (0.0 < fov < np.pi):
        raise ValueError("fov must lie in (0, pi)")
    g = np.asarray(gaze_dir, dtype=float)
    t = np.asarray(target_dir, dtype=float)
    alpha = np.arccos(np.clip(np.dot(g, t), -1.0, 1.0))
    half = fov / 2.0
    if alpha > half:
        return 0.0
    return float(1.0 - alpha / half)


class FeatureExtractor:
    """Deterministic map from a square RGB raster to a fixed-length vector.

    Implementations declare ``dim`` and must be pure (same raster, same
    vector), so a single instance can be shared across parallel envs.
    """

    dim: int

    def __call__(self, raster: np.ndarray) -> np.ndarray:
        raise NotImplementedError


class BlockMeanExtractor(FeatureExtractor):
    """Built-in toy extractor: grid-of-block means, mean-centered.

    Downsamples the view to ``grid x grid`` RGB cells (192 dims at the
    default grid of 8), subtracts the global mean, flattens. Centering by
    the scalar mean (not per channel) keeps hue contrasts in the features,
    so differently colored regions stay distinguishable.
    """

    def __init__(self, grid: int = 8):
        if grid < 1:
            raise ValueError("grid must be >= 1")
        self.grid = grid
        self.dim = grid * grid * 3

    def __call__(self, raster: np.ndarray) -> np.ndarray:
        img = np.asarray(raster, dtype=float)
        r = img.shape[0]
        if img.shape[:2] != (r, r):
            raise ValueError(f"extractor expects a square raster, got {img.shape}")
        g = self.grid
        if r % g == 0:
            block = r // g
            cells = img.reshape(g, block, g, block, 3).mean(axis=(1, 3))
        else:
            # non-divisible resolutions fall back to nearest-texel pooling
            idx = (np.arange(g) + 0.5) / g * r
            idx = np.minimum(idx.astype(int), r - 1)
            cells = img[np.ix_(idx, idx)]
        cells = cells - cells.mean()
        return cells.reshape(-1)


def feature_similarity_reward(current: np.ndarray, target_features: np.ndarray,
                              fx: FeatureExtractor) -> float:
    """Cosine similarity between the extracted view and target features.

    Returns 0 when either vector is (numerically) all-zero; the 1e-12
    threshold absorbs mean-centering round-off on constant views.
    """
    feats = fx(current)
    target = np.asarray(target_features, dtype=float)
    if feats.shape != target.shape:
        raise ValueError(
            f"extractor dim {feats.shape} != target features {target.shape}")
    na, nb = np.linalg.norm(feats), np.linalg.norm(target)
    if na < 1e-12 or nb < 1e-12:
        return 0.0
    return float(np.dot(feats, target) / (na * nb))


def discrete_frechet(path_a, path_b) -> float:
    """Discrete Frechet distance between two polylines.

    Classic coupling-lattice dynamic program,
    c(i,j) = max(|a_i - b_j|, min(c(i-1,j), c(i,j-1), c(i-1,j-1))),
    computed in O(n*m) time with O(min(n,m)) rolling memory.
    """
    a = np.atleast_2d(np.asarray(path_a, dtype=float))
    b = np.atleast_2d(np.asarray(path_b, dtype=float))
    if a.shape[0] == 0 or b.shape[0] == 0:
        raise ValueError("paths must be non-empty")
    if a.shape[0] < b.shape[0]:
        a, b = b, a  # roll over the shorter path

    prev: list[float] = []
    for i in range(a.shape[0]):
        dist = np.sqrt(((b - a[i]) ** 2).sum(axis=1)).tolist()
        cur = [0.0] * len(dist)
        for j, d in enumerate(dist):
            if i == 0 and j == 0:
                best = d
            elif i == 0:
                best = max(cur[j - 1], d)
            elif j == 0:
                best = max(prev[0], d)
            else:
                reach = prev[j]
                if prev[j - 1] < reach:
                    reach = prev[j - 1]
                if cur[j - 1] < reach:
                    reach = cur[j - 1]
                best = reach if reach > d else d
            cur[j] = best
        prev = cur
    return prev[-1]


def bc_reward(chain: DHChain, predicted, ground_truth) -> float:
    """Negative discrete Frechet distance between end-effector paths.

    Inputs are joint-space chunks (JointTrajectory or (T, J) arrays) of
    equal length; the gripper channel, if any, is ignored.
    """
    pred_path = ee_path(chain, predicted)
    gt_path = ee_path(chain, ground_truth)
    if pred_path.shape != gt_path.shape:
        raise ValueError(
            f"chunk shapes differ: {pred_path.shape} vs {gt_path.shape}")
    return -discrete_frechet(pred_path, gt_path)


@dataclass(frozen=True)
class TargetAnnotation:
    """Panorama-frame bearing of a target per frame, with visibility flags."""

    directions: np.ndarray  # (frames, 3) unit vectors
    visible: np.ndarray | None = None  # (frames,) bools

    def __post_init__(self):
        d = np.asarray(self.directions, dtype=float)
        if d.ndim != 2 or d.shape[1] != 3:
            raise ValueError("annotation directions must be (frames, 3)")
        norms = np.linalg.norm(d, axis=1)
        if not np.allclose(norms, 1.0, atol=1e-6):
            raise ValueError("annotation directions must be unit vectors")
        object.__setattr__(self, "directions", d / norms[:, None])
        if self.visible is not None:
            vis = np.asarray(self.visible, dtype=bool)
            if vis.shape != (d.shape[0],):
                raise ValueError("visibility flags must match frame count")
            object.__setattr__(self, "visible", vis)


def read_feature_vectors(path) -> np.ndarray:
    """Load feature vectors from a flat text file.

    First line: declared dimensionality. Each following line: one vector of
    that many whitespace-separated reals. Returns an (n, dim) array.
    """
    path = Path(path)
    with open(path) as f:
        lines = [ln.strip() for ln in f if ln.strip() and not ln.startswith("#")]
    if not lines:
        raise ValueError(f"{path}: empty feature file")
    dim = int(lines[0])
    rows = []
    for i, ln in enumerate(lines[1:], start=2):
        vals = np.array([float(x) for x in ln.split()])
        if vals.shape != (dim,):
            raise ValueError(
                f"{path}:{i}: expected {dim} values, got {vals.shape[0]}")
        rows.append(vals)
    return np.array(rows)


def write_feature_vectors(path, vectors) -> None:
    vecs = np.atleast_2d(np.asarray(vectors, dtype=float))
    with open(Path(path), "w") as f:
        f.write(f"{vecs.shape[1]}\n")
        for row in vecs:
            f.write(" ".join(repr(float(x)) for x in row) + "\n")
