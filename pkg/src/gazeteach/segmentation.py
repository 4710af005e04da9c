"""Gaze-conditioned object segmentation of a scene point cloud.

Pipeline: passthrough crop -> voxel-grid downsample -> RANSAC ground-plane
removal -> Euclidean clustering -> gaze-based cluster selection. The final
selection keeps every cluster whose closest point lies within
``gaze_max_distance`` of the gaze point and whose size is at least
``gaze_min_cluster_size`` (2 cm / 5 points by default), so flat objects
that fragment into several low clusters are still recovered whole.
"""

from __future__ import annotations

from dataclasses import dataclass, field, fields, replace

import numpy as np
from scipy import sparse
from scipy.spatial import cKDTree

from gazeteach.geometry import Aabb3, PointCloud, aabb_of

Bounds = tuple[float, float]

UNBOUNDED: tuple[Bounds, Bounds, Bounds] = (
    (-np.inf, np.inf),
    (-np.inf, np.inf),
    (-np.inf, np.inf),
)


class SegmentationError(ValueError):
    """Segmentation step cannot proceed on the given input."""


@dataclass(frozen=True)
class PlaneModel:
    """Plane n.p + d = 0 with |n| = 1, plus its inlier indices."""

    normal: np.ndarray
    d: float
    inlier_indices: np.ndarray

    def distances(self, points: np.ndarray) -> np.ndarray:
        return np.abs(points @ self.normal + self.d)


@dataclass(frozen=True)
class Cluster:
    """Connected component of points, as indices into the working cloud."""

    indices: np.ndarray

    @property
    def size(self) -> int:
        return len(self.indices)


@dataclass(frozen=True)
class SegmentationParams:
    """All tunables of the segmentation pipeline. Distances in meters.

    The gaze thresholds (2 cm max cluster-to-gaze distance, minimum
    cluster size of five points) are the selection rule; the remaining
    defaults are engineering choices and freely configurable.
    """

    passthrough_bounds: tuple[Bounds, Bounds, Bounds] = ((-1.0, 1.0), (-1.0, 1.0), (-0.05, 1.45))
    voxel_leaf: float = 0.005
    ransac_inlier_threshold: float = 0.01
    ransac_max_iterations: int = 500
    ransac_seed: int = 0
    cluster_tolerance: float = 0.02
    cluster_min_size: int = 1
    cluster_max_size: int | None = None
    gaze_max_distance: float = 0.02
    gaze_min_cluster_size: int = 5

    def __post_init__(self):
        for name in ("voxel_leaf", "ransac_inlier_threshold", "cluster_tolerance", "gaze_max_distance"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be > 0")
        if self.gaze_min_cluster_size < 1 or self.cluster_min_size < 1:
            raise ValueError("minimum cluster sizes must be >= 1")
        if self.ransac_max_iterations < 1:
            raise ValueError("ransac_max_iterations must be >= 1")

    @staticmethod
    def from_dict(data: dict) -> "SegmentationParams":
        known = {f.name for f in fields(SegmentationParams)}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown segmentation parameter(s): {sorted(unknown)}")
        kwargs = dict(data)
        if "passthrough_bounds" in kwargs:
            b = kwargs["passthrough_bounds"]
            kwargs["passthrough_bounds"] = tuple(
                (float(lo), float(hi)) for lo, hi in b
            )
        return SegmentationParams(**kwargs)


def passthrough_filter(cloud: PointCloud, bounds: tuple[Bounds, Bounds, Bounds]) -> PointCloud:
    """Keep exactly the points inside all three axis intervals (inclusive)."""
    pts = cloud.points
    mask = np.ones(len(pts), dtype=bool)
    for axis, (lo, hi) in enumerate(bounds):
        mask &= (pts[:, axis] >= lo) & (pts[:, axis] <= hi)
    return cloud.select(mask)


_VOXEL_KEY_BITS = 21  # per-axis key budget inside one packed int64
_VOXEL_KEY_BIAS = 1 << (_VOXEL_KEY_BITS - 1)


def voxel_downsample(cloud: PointCloud, leaf: float) -> PointCloud:
    """One centroid point per occupied voxel of edge length ``leaf``.

    The output object_id per voxel is the majority id among the voxel's
    points, ties broken toward the smallest id. Output order follows the
    lexicographic order of voxel keys, so it is deterministic.
    """
    if leaf <= 0:
        raise SegmentationError(f"voxel leaf must be > 0, got {leaf}")
    if len(cloud) == 0:
        return cloud
    keys = np.floor(cloud.points / leaf).astype(np.int64)
    if np.any(np.abs(keys) >= _VOXEL_KEY_BIAS):
        raise SegmentationError(
            f"cloud extent exceeds {_VOXEL_KEY_BIAS} voxels per axis; "
            "crop with a passthrough filter or use a larger leaf"
        )
    # one packed int64 per voxel keeps np.unique in its fast 1-D path while
    # preserving the (x, y, z) lexicographic output order
    packed = (
        ((keys[:, 0] + _VOXEL_KEY_BIAS) << (2 * _VOXEL_KEY_BITS))
        | ((keys[:, 1] + _VOXEL_KEY_BIAS) << _VOXEL_KEY_BITS)
        | (keys[:, 2] + _VOXEL_KEY_BIAS)
    )
    uniq, inverse = np.unique(packed, return_inverse=True)
    n_voxels = len(uniq)

    counts = np.bincount(inverse, minlength=n_voxels)
    centroids = np.stack(
        [np.bincount(inverse, weights=cloud.points[:, axis], minlength=n_voxels) for axis in range(3)],
        axis=1,
    )
    centroids /= counts[:, None]

    ids = None
    if cloud.object_ids is not None:
        # count points per (voxel, id) pair, then pick per voxel the id with
        # the highest count, smallest id on ties
        id_biased = cloud.object_ids + _VOXEL_KEY_BIAS
        pair_packed = (inverse.astype(np.int64) << _VOXEL_KEY_BITS) | id_biased
        pairs, pair_counts = np.unique(pair_packed, return_counts=True)
        voxel_of_pair = pairs >> _VOXEL_KEY_BITS
        id_of_pair = (pairs & ((1 << _VOXEL_KEY_BITS) - 1)) - _VOXEL_KEY_BIAS
        order = np.lexsort((id_of_pair, -pair_counts, voxel_of_pair))
        first = np.unique(voxel_of_pair[order], return_index=True)[1]
        ids = np.empty(n_voxels, dtype=np.int64)
        ids[voxel_of_pair[order][first]] = id_of_pair[order][first]
    return PointCloud(centroids, ids, cloud.frame)


def ransac_plane(cloud: PointCloud, params: SegmentationParams) -> PlaneModel:
    """Best plane over seeded 3-point trials, maximizing the inlier count.

    Deterministic for a fixed params.ransac_seed; no adaptive stopping and
    no refit, so every reported inlier is within the threshold of the
    sampled plane itself.
    """
    pts = cloud.points
    n = len(pts)
    if n < 3:
        raise SegmentationError(f"RANSAC needs at least 3 points, got {n}")

    rng = np.random.default_rng(params.ransac_seed)
    samples = np.array(
        [rng.choice(n, size=3, replace=False) for _ in range(params.ransac_max_iterations)]
    )
    p1, p2, p3 = pts[samples[:, 0]], pts[samples[:, 1]], pts[samples[:, 2]]
    normals = np.cross(p2 - p1, p3 - p1)
    norms = np.linalg.norm(normals, axis=1)
    valid = norms > 1e-12
    if not valid.any():
        raise SegmentationError("RANSAC found no valid 3-point sample (collinear or coincident points)")
    normals[valid] /= norms[valid, None]
    ds = -np.einsum("ij,ij->i", normals, p1)

    # score all trials in chunked float32 matmuls into preallocated buffers
    # (the distance matrix dominates the cost; single-precision is plenty for
    # ranking trials); argmax keeps the first best trial, matching a
    # sequential strictly-improving scan
    counts = np.zeros(len(samples), dtype=np.int64)
    pts32 = pts.astype(np.float32)
    normals32 = normals.astype(np.float32)
    ds32 = ds.astype(np.float32)
    thr = np.float32(params.ransac_inlier_threshold)
    chunk = 32
    dist = np.empty((chunk, n), dtype=np.float32)
    for start in range(0, len(samples), chunk):
        stop = min(start + chunk, len(samples))
        buf = dist[: stop - start]
        np.dot(normals32[start:stop], pts32.T, out=buf)
        buf += ds32[start:stop, None]
        np.abs(buf, out=buf)
        counts[start:stop] = np.count_nonzero(buf <= thr, axis=1)
    counts[~valid] = -1
    best = int(np.argmax(counts))
    normal, d = normals[best], float(ds[best])
    inliers = np.flatnonzero(np.abs(pts @ normal + d) <= params.ransac_inlier_threshold)
    return PlaneModel(normal, d, inliers)


def euclidean_cluster(
    cloud: PointCloud,
    tolerance: float,
    min_size: int = 1,
    max_size: int | None = None,
) -> list[Cluster]:
    """Connected components of the within-tolerance neighbor graph.

    Components outside [min_size, max_size] are dropped; the survivors are
    returned largest first (ties broken by smallest member index), with
    each cluster's indices ascending.
    """
    if tolerance <= 0:
        raise SegmentationError(f"cluster tolerance must be > 0, got {tolerance}")
    n = len(cloud)
    if n == 0:
        return []
    tree = cKDTree(cloud.points)
    pairs = tree.query_pairs(tolerance, output_type="ndarray")
    if len(pairs):
        adj = sparse.coo_matrix(
            (np.ones(len(pairs), dtype=np.int8), (pairs[:, 0], pairs[:, 1])), shape=(n, n)
        )
        _, labels = sparse.csgraph.connected_components(adj, directed=False)
    else:
        labels = np.arange(n)

    order = np.argsort(labels, kind="stable")
    sorted_labels = labels[order]
    boundaries = np.flatnonzero(np.diff(sorted_labels)) + 1
    groups = np.split(order, boundaries)

    clusters = []
    for g in groups:
        if len(g) < min_size:
            continue
        if max_size is not None and len(g) > max_size:
            continue
        clusters.append(Cluster(np.sort(g)))
    clusters.sort(key=lambda c: (-c.size, c.indices[0]))
    return clusters


def select_object(
    clusters: list[Cluster],
    cloud: PointCloud,
    gaze,
    params: SegmentationParams,
) -> PointCloud:
    """Union of all clusters close enough to the gaze point and big enough.

    A cluster qualifies when its minimum point-to-gaze distance is at most
    params.gaze_max_distance and it has at least params.gaze_min_cluster_size
    points. Taking every qualifying cluster (not just the nearest) is what
    lets flat objects that split into several clusters come out whole.
    Returns an empty cloud when nothing is under the gaze.
    """
    gaze = np.asarray(gaze, dtype=np.float64).reshape(3)
    if not np.all(np.isfinite(gaze)):
        raise SegmentationError(f"gaze point must be finite, got {gaze}")
    keep: list[np.ndarray] = []
    for cluster in clusters:
        if cluster.size < params.gaze_min_cluster_size:
            continue
        d2 = np.min(np.sum((cloud.points[cluster.indices] - gaze) ** 2, axis=1))
        if d2 <= params.gaze_max_distance**2:
            keep.append(cluster.indices)
    if not keep:
        return PointCloud.empty(cloud.frame)
    indices = np.sort(np.concatenate(keep))
    return cloud.select(indices)


def segment_object(
    scene_cloud: PointCloud,
    gaze,
    params: SegmentationParams | None = None,
) -> tuple[PointCloud, Aabb3 | None]:
    """Full gaze-guided pipeline; returns (object cloud, its 3D bbox).

    An empty object cloud with bbox None means nothing selectable under
    the gaze, which is a valid outcome, not an error.
    """
    if params is None:
        params = SegmentationParams()
    if len(scene_cloud) == 0:
        raise SegmentationError("scene cloud is empty")

    working = passthrough_filter(scene_cloud, params.passthrough_bounds)
    working = voxel_downsample(working, params.voxel_leaf)
    plane = ransac_plane(working, params)

    off_ground = np.ones(len(working), dtype=bool)
    off_ground[plane.inlier_indices] = False
    remaining = working.select(off_ground)

    clusters = euclidean_cluster(
        remaining, params.cluster_tolerance, params.cluster_min_size, params.cluster_max_size
    )
    selected = select_object(clusters, remaining, gaze, params)
    if len(selected) == 0:
        return selected, None
    return selected, aabb_of(selected)
