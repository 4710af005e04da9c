"""IoU and COCO-style AP/AR evaluation over axis-aligned boxes.

Scores auto-generated labels against rendered ground truth, or any external
detector output against any reference set. Average precision follows the
101-point interpolated convention: greedy score-ordered matching per class
and IoU threshold, precision interpolated as the running maximum from the
high-recall end, sampled at recalls {0, 0.01, ..., 1.00}. Thresholds run
0.50:0.05:0.95; AR limits detections per image to the top k by score.
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field

import numpy as np

from gazeteach.geometry import Roi2D

IOU_THRESHOLDS = tuple(np.round(np.arange(0.50, 0.96, 0.05), 2))
RECALL_POINTS = np.linspace(0.0, 1.0, 101)
MAX_DETECTIONS = (1, 10, 100)


class EvaluationError(ValueError):
    """Evaluation request cannot be satisfied."""


@dataclass(frozen=True)
class Detection:
    roi: Roi2D
    class_name: str
    score: float
    image_id: str

    def __post_init__(self):
        if not 0.0 <= self.score <= 1.0:
            raise ValueError(f"score must be in [0, 1], got {self.score}")


@dataclass(frozen=True)
class GroundTruth:
    roi: Roi2D
    class_name: str
    image_id: str


@dataclass(frozen=True)
class EvalResult:
    """Per-class AP per IoU threshold plus the usual aggregates."""

    ap_per_class: dict[str, dict[float, float]]
    ar_per_class: dict[str, dict[int, float]]
    map: float
    map50: float
    map75: float
    mar: dict[int, float]
    pr_curves: dict[str, tuple[np.ndarray, np.ndarray]]  # recall grid, precision at IoU 0.5

    def to_table(self) -> str:
        lines = [f"{'class':<16} {'AP':>7} {'AP50':>7} {'AP75':>7} {'AR1':>7} {'AR10':>7} {'AR100':>7}"]
        for name in sorted(self.ap_per_class):
            aps = self.ap_per_class[name]
            ars = self.ar_per_class[name]
            mean_ap = float(np.mean([aps[t] for t in IOU_THRESHOLDS]))
            lines.append(
                f"{name:<16} {mean_ap:7.3f} {aps[0.5]:7.3f} {aps[0.75]:7.3f} "
                f"{ars[1]:7.3f} {ars[10]:7.3f} {ars[100]:7.3f}"
            )
        lines.append(
            f"{'mean':<16} {self.map:7.3f} {self.map50:7.3f} {self.map75:7.3f} "
            f"{self.mar[1]:7.3f} {self.mar[10]:7.3f} {self.mar[100]:7.3f}"
        )
        return "\n".join(lines)


def iou(a: Roi2D, b: Roi2D) -> float:
    """Intersection area over union area; 0 when the union is empty."""
    ix = max(0.0, min(a.x_max, b.x_max) - max(a.x_min, b.x_min))
    iy = max(0.0, min(a.y_max, b.y_max) - max(a.y_min, b.y_min))
    inter = ix * iy
    union = a.area() + b.area() - inter
    if union <= 0.0:
        return 0.0
    return inter / union


def match_detections(
    dets: list[Detection], gts: list[GroundTruth], iou_threshold: float
) -> tuple[list[tuple[int, int]], list[int], list[int]]:
    """Greedy per-image matching for one class.

    Detections are taken in descending score order; each claims the still
    unmatched ground truth with the highest IoU at or above the threshold
    (first gt index wins ties). Returns (matches as (det_idx, gt_idx)),
    unmatched detection indices, unmatched ground-truth indices.
    """
    order = sorted(range(len(dets)), key=lambda i: (-dets[i].score, i))
    gts_by_image: dict[str, list[int]] = defaultdict(list)
    for j, gt in enumerate(gts):
        gts_by_image[gt.image_id].append(j)

    taken = set()
    matches = []
    unmatched_dets = []
    for i in order:
        det = dets[i]
        best_j, best_iou = -1, -1.0
        for j in gts_by_image.get(det.image_id, ()):
            if j in taken:
                continue
            value = iou(det.roi, gts[j].roi)
            # strict improvement required, so the first gt index wins ties
            if value >= iou_threshold and value > best_iou:
                best_j, best_iou = j, value
        if best_j >= 0:
            taken.add(best_j)
            matches.append((i, best_j))
        else:
            unmatched_dets.append(i)
    unmatched_gts = [j for j in range(len(gts)) if j not in taken]
    return matches, unmatched_dets, unmatched_gts


def average_precision(
    dets: list[Detection], gts: list[GroundTruth], iou_threshold: float
) -> float | None:
    """101-point interpolated AP for a single class; None when no ground
    truth exists (excluded from class means)."""
    if not gts:
        return None
    if not dets:
        return 0.0
    matches, _, _ = match_detections(dets, gts, iou_threshold)
    matched_dets = {i for i, _ in matches}
    order = sorted(range(len(dets)), key=lambda i: (-dets[i].score, i))
    tp = np.cumsum([1 if i in matched_dets else 0 for i in order]).astype(float)
    fp = np.cumsum([0 if i in matched_dets else 1 for i in order]).astype(float)
    recall = tp / len(gts)
    precision = tp / np.maximum(tp + fp, 1e-12)
    # interpolated precision: running max from the high-recall end
    interp = np.maximum.accumulate(precision[::-1])[::-1]
    ap = 0.0
    for r in RECALL_POINTS:
        mask = recall >= r - 1e-12
        ap += float(np.max(interp[mask])) if mask.any() else 0.0
    return ap / len(RECALL_POINTS)


def _pr_curve(dets, gts, iou_threshold):
    """Precision at the 101 recall points (for plotting)."""
    if not gts or not dets:
        return RECALL_POINTS.copy(), np.zeros_like(RECALL_POINTS)
    matches, _, _ = match_detections(dets, gts, iou_threshold)
    matched_dets = {i for i, _ in matches}
    order = sorted(range(len(dets)), key=lambda i: (-dets[i].score, i))
    flags = np.array([i in matched_dets for i in order])
    tp = np.cumsum(flags).astype(float)
    fp = np.cumsum(~flags).astype(float)
    recall = tp / len(gts)
    precision = tp / np.maximum(tp + fp, 1e-12)
    interp = np.maximum.accumulate(precision[::-1])[::-1]
    out = np.zeros_like(RECALL_POINTS)
    for idx, r in enumerate(RECALL_POINTS):
        mask = recall >= r - 1e-12
        out[idx] = float(np.max(interp[mask])) if mask.any() else 0.0
    return RECALL_POINTS.copy(), out


def _recall_at_max_dets(dets, gts, iou_threshold, max_dets):
    """Recall keeping only the top-scoring max_dets detections per image."""
    if not gts:
        return None
    by_image: dict[str, list[Detection]] = defaultdict(list)
    for det in dets:
        by_image[det.image_id].append(det)
    kept: list[Detection] = []
    for image_dets in by_image.values():
        image_dets.sort(key=lambda d: -d.score)
        kept.extend(image_dets[:max_dets])
    matches, _, _ = match_detections(kept, gts, iou_threshold)
    return len(matches) / len(gts)


def evaluate(dets: list[Detection], gts: list[GroundTruth]) -> EvalResult:
    """Full COCO-style summary across classes, thresholds and AR limits."""
    if not gts:
        raise EvaluationError("cannot evaluate against an empty ground-truth set")
    classes = sorted({g.class_name for g in gts} | {d.class_name for d in dets})
    dets_by_class = defaultdict(list)
    for d in dets:
        dets_by_class[d.class_name].append(d)
    gts_by_class = defaultdict(list)
    for g in gts:
        gts_by_class[g.class_name].append(g)

    ap_per_class: dict[str, dict[float, float]] = {}
    ar_per_class: dict[str, dict[int, float]] = {}
    pr_curves = {}
    for name in classes:
        cls_gts = gts_by_class.get(name, [])
        if not cls_gts:
            continue  # undefined AP: class absent from ground truth
        cls_dets = dets_by_class.get(name, [])
        ap_per_class[name] = {
            thr: average_precision(cls_dets, cls_gts, thr) for thr in IOU_THRESHOLDS
        }
        ar_per_class[name] = {
            m: float(
                np.mean([_recall_at_max_dets(cls_dets, cls_gts, thr, m) for thr in IOU_THRESHOLDS])
            )
            for m in MAX_DETECTIONS
        }
        pr_curves[name] = _pr_curve(cls_dets, cls_gts, 0.5)

    if not ap_per_class:
        raise EvaluationError("no class has ground truth; nothing to evaluate")
    map_all = float(np.mean([np.mean([aps[t] for t in IOU_THRESHOLDS]) for aps in ap_per_class.values()]))
    map50 = float(np.mean([aps[0.5] for aps in ap_per_class.values()]))
    map75 = float(np.mean([aps[0.75] for aps in ap_per_class.values()]))
    mar = {
        m: float(np.mean([ars[m] for ars in ar_per_class.values()])) for m in MAX_DETECTIONS
    }
    return EvalResult(
        ap_per_class=ap_per_class,
        ar_per_class=ar_per_class,
        map=map_all,
        map50=map50,
        map75=map75,
        mar=mar,
        pr_curves=pr_curves,
    )


# ------------------------------------------------------------ text interface
#
# One record per line:  image_id class x_min y_min x_max y_max [score]
# Detections carry the trailing score; ground truth omits it. '#' starts a
# comment; blank lines are ignored.


def _parse_line(line: str, lineno: int, expect_score: bool):
    parts = line.split()
    expected = 7 if expect_score else 6
    if len(parts) != expected:
        raise EvaluationError(
            f"line {lineno}: expected {expected} fields "
            f"(image_id class x_min y_min x_max y_max{' score' if expect_score else ''}), "
            f"got {len(parts)}"
        )
    image_id, class_name = parts[0], parts[1]
    try:
        nums = [float(x) for x in parts[2:]]
    except ValueError as err:
        raise EvaluationError(f"line {lineno}: {err}") from None
    roi = Roi2D(nums[0], nums[1], nums[2], nums[3])
    return image_id, class_name, roi, nums[4] if expect_score else None


def load_detections(path) -> list[Detection]:
    out = []
    with open(path) as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            image_id, class_name, roi, score = _parse_line(line, lineno, expect_score=True)
            out.append(Detection(roi, class_name, score, image_id))
    return out


def load_ground_truths(path) -> list[GroundTruth]:
    out = []
    with open(path) as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            image_id, class_name, roi, _ = _parse_line(line, lineno, expect_score=False)
            out.append(GroundTruth(roi, class_name, image_id))
    return out


def save_detections(dets: list[Detection], path) -> None:
    with open(path, "w") as fh:
        for d in dets:
            fh.write(
                f"{d.image_id} {d.class_name} {d.roi.x_min!r} {d.roi.y_min!r} "
                f"{d.roi.x_max!r} {d.roi.y_max!r} {d.score!r}\n"
            )


def save_ground_truths(gts: list[GroundTruth], path) -> None:
    with open(path, "w") as fh:
        for g in gts:
            fh.write(
                f"{g.image_id} {g.class_name} {g.roi.x_min!r} {g.roi.y_min!r} "
                f"{g.roi.x_max!r} {g.roi.y_max!r}\n"
            )


def export_pr_curves(result: EvalResult, directory) -> list[str]:
    """One 'recall precision' two-column text file per class at IoU 0.5."""
    import os

    os.makedirs(directory, exist_ok=True)
    written = []
    for name, (recall, precision) in sorted(result.pr_curves.items()):
        path = os.path.join(directory, f"pr_{name}.txt")
        with open(path, "w") as fh:
            fh.write("# recall precision (IoU 0.5)\n")
            for r, p in zip(recall, precision):
                fh.write(f"{r:.2f} {p:.6f}\n")
        written.append(path)
    return written
