from __future__ import annotations

import numpy as np
import pytest

from gazeteach.geometry import Roi2D
from gazeteach.metrics import (
    IOU_THRESHOLDS,
    Detection,
    EvaluationError,
    GroundTruth,
    average_precision,
    evaluate,
    export_pr_curves,
    iou,
    load_detections,
    load_ground_truths,
    match_detections,
    save_detections,
    save_ground_truths,
)


def det(box, score, cls="obj", image="img0"):
    return Detection(Roi2D(*box), cls, score, image)


def gt(box, cls="obj", image="img0"):
    return GroundTruth(Roi2D(*box), cls, image)


# ------------------------------------------------------------ reference code
#
# Naive re-implementations straight from the operation contracts, written
# loop by loop with no shared code, used as oracles below.


def oracle_greedy_tp(dets, gts, thr):
    order = sorted(range(len(dets)), key=lambda i: (-dets[i].score, i))
    used = [False] * len(gts)
    tp = 0
    for i in order:
        best, best_v = None, -1.0
        for j in range(len(gts)):
            if used[j] or gts[j].image_id != dets[i].image_id:
                continue
            v = iou(dets[i].roi, gts[j].roi)
            if v >= thr and v > best_v:
                best, best_v = j, v
        if best is not None:
            used[best] = True
            tp += 1
    return tp


def oracle_average_precision(dets, gts, thr):
    if not gts:
        return None
    order = sorted(range(len(dets)), key=lambda i: (-dets[i].score, i))
    used = [False] * len(gts)
    flags = []
    for i in order:
        best, best_v = None, -1.0
        for j in range(len(gts)):
            if used[j] or gts[j].image_id != dets[i].image_id:
                continue
            v = iou(dets[i].roi, gts[j].roi)
            if v >= thr and v > best_v:
                best, best_v = j, v
        if best is None:
            flags.append(False)
        else:
            used[best] = True
            flags.append(True)
    precisions, recalls = [], []
    tp = fp = 0
    for matched in flags:
        if matched:
            tp += 1
        else:
            fp += 1
        precisions.append(tp / (tp + fp))
        recalls.append(tp / len(gts))
    total = 0.0
    for step in range(101):
        r = step / 100
        best_p = 0.0
        for p, rec in zip(precisions, recalls):
            if rec >= r - 1e-12 and p > best_p:
                best_p = p
        total += best_p
    return total / 101


def random_instance(rng, max_boxes=6, classes=("a",), images=("i",)):
    def rand_roi():
        x0, y0 = rng.uniform(0, 60, size=2)
        w, h = rng.uniform(5, 40, size=2)
        return Roi2D(x0, y0, x0 + w, y0 + h)

    dets = [
        Detection(rand_roi(), rng.choice(classes), float(rng.uniform(0.05, 1.0)), rng.choice(images))
        for _ in range(rng.integers(0, max_boxes + 1))
    ]
    gts = [
        GroundTruth(rand_roi(), rng.choice(classes), rng.choice(images))
        for _ in range(rng.integers(1, max_boxes + 1))
    ]
    return dets, gts


# ------------------------------------------------------------------------ iou


def test_iou_identical_boxes():
    a = Roi2D(3, 4, 10, 12)
    assert iou(a, a) == 1.0


def test_iou_disjoint_boxes():
    assert iou(Roi2D(0, 0, 1, 1), Roi2D(5, 5, 6, 6)) == 0.0


def test_iou_hand_computed_overlap():
    # intersection 1, union 4 + 4 - 1 = 7
    assert iou(Roi2D(0, 0, 2, 2), Roi2D(1, 1, 3, 3)) == pytest.approx(1 / 7)


def test_iou_symmetry_random():
    rng = np.random.default_rng(0)

    def rand_roi():
        x = np.sort(rng.uniform(0, 50, 2))
        y = np.sort(rng.uniform(0, 50, 2))
        return Roi2D(x[0], y[0], x[1], y[1])

    for _ in range(200):
        a, b = rand_roi(), rand_roi()
        assert iou(a, b) == iou(b, a)
        assert 0.0 <= iou(a, b) <= 1.0


def test_iou_zero_area_union():
    z = Roi2D(5, 5, 5, 5)
    assert iou(z, z) == 0.0


# ------------------------------------------------------------------- matching


def test_single_perfect_match():
    matches, ud, ug = match_detections([det((0, 0, 10, 10), 0.9)], [gt((0, 0, 10, 10))], 0.5)
    assert matches == [(0, 0)] and ud == [] and ug == []


def test_two_dets_one_gt_lower_score_is_fp():
    dets = [det((0, 0, 10, 10), 0.6), det((0, 0, 10, 10), 0.9)]
    matches, ud, ug = match_detections(dets, [gt((0, 0, 10, 10))], 0.5)
    assert matches == [(1, 0)]  # the higher-scoring detection wins
    assert ud == [0] and ug == []


def test_match_respects_image_ids():
    dets = [det((0, 0, 10, 10), 0.9, image="a")]
    gts = [gt((0, 0, 10, 10), image="b")]
    matches, ud, ug = match_detections(dets, gts, 0.5)
    assert matches == [] and ud == [0] and ug == [0]


def test_match_tie_goes_to_first_gt_index():
    dets = [det((0, 0, 10, 10), 0.9)]
    gts = [gt((0, 0, 10, 10)), gt((0, 0, 10, 10))]
    matches, _, ug = match_detections(dets, gts, 0.5)
    assert matches == [(0, 0)] and ug == [1]


def test_match_tp_count_agrees_with_naive_oracle():
    rng = np.random.default_rng(1)
    for _ in range(300):
        dets, gts = random_instance(rng, max_boxes=5)
        thr = float(rng.choice([0.3, 0.5, 0.75]))
        matches, _, _ = match_detections(dets, gts, thr)
        assert len(matches) == oracle_greedy_tp(dets, gts, thr)


# ------------------------------------------------------------------------- ap


def test_perfect_detections_give_ap_one():
    gts = [gt((0, 0, 10, 10)), gt((20, 20, 40, 40))]
    dets = [det((0, 0, 10, 10), 0.9), det((20, 20, 40, 40), 0.8)]
    assert average_precision(dets, gts, 0.5) == pytest.approx(1.0)


def test_no_detections_give_ap_zero():
    assert average_precision([], [gt((0, 0, 10, 10))], 0.5) == 0.0


def test_no_ground_truth_is_undefined():
    assert average_precision([det((0, 0, 10, 10), 0.5)], [], 0.5) is None


def test_three_detection_toy_case_frozen():
    # two gts; TP at 0.9, FP at 0.8, TP at 0.7:
    # PR points (1.0, .5), (.5, .5), (2/3, 1.0); interpolated precision is
    # 1.0 up to recall .5 and 2/3 beyond, so AP = (51*1 + 50*2/3)/101 = 253/303
    gts = [gt((0, 0, 10, 10)), gt((20, 20, 30, 30))]
    dets = [
        det((0, 0, 10, 10), 0.9),
        det((50, 50, 60, 60), 0.8),
        det((20, 20, 30, 30), 0.7),
    ]
    expected = 253 / 303
    assert oracle_average_precision(dets, gts, 0.5) == pytest.approx(expected, abs=1e-12)
    assert average_precision(dets, gts, 0.5) == pytest.approx(expected, abs=1e-12)


def test_ap_matches_oracle_on_200_random_instances():
    rng = np.random.default_rng(2)
    for _ in range(200):
        dets, gts = random_instance(rng)
        thr = float(rng.choice([0.4, 0.5, 0.6, 0.75]))
        got = average_precision(dets, gts, thr)
        want = oracle_average_precision(dets, gts, thr)
        assert got == pytest.approx(want, abs=1e-12)


def test_ap_monotone_in_iou_threshold():
    rng = np.random.default_rng(3)
    for _ in range(100):
        dets, gts = random_instance(rng)
        values = [average_precision(dets, gts, float(t)) for t in IOU_THRESHOLDS]
        for lo, hi in zip(values, values[1:]):
            assert hi <= lo + 1e-12


def test_adding_lowest_score_fp_never_increases_ap():
    rng = np.random.default_rng(4)
    for _ in range(50):
        dets, gts = random_instance(rng)
        base = average_precision(dets, gts, 0.5)
        min_score = min((d.score for d in dets), default=0.5)
        worse = dets + [det((900, 900, 910, 910), min_score * 0.5, image="i")]
        assert average_precision(worse, gts, 0.5) <= base + 1e-12


# ------------------------------------------------------------------- evaluate


def test_single_tp_at_iou_06_threshold_counting():
    # IoU 0.6 passes thresholds 0.50/0.55/0.60 -> per-class AP = 3/10
    g = [gt((0, 0, 10, 10))]
    # shift box right by 2.5: intersection 7.5*10, union 12.5*10 -> IoU 0.6
    d = [det((2.5, 0, 12.5, 10), 0.9)]
    assert iou(d[0].roi, g[0].roi) == pytest.approx(0.6)
    result = evaluate(d, g)
    assert result.ap_per_class["obj"][0.5] == 1.0
    assert result.ap_per_class["obj"][0.75] == 0.0
    assert result.map50 == 1.0
    assert result.map75 == 0.0
    assert result.map == pytest.approx(0.3)


def test_evaluate_empty_gt_errors():
    with pytest.raises(EvaluationError):
        evaluate([det((0, 0, 1, 1), 0.5)], [])


def test_evaluate_permutation_invariant():
    rng = np.random.default_rng(5)
    dets, gts = random_instance(rng, max_boxes=6, classes=("a", "b"), images=("u", "v"))
    dets += random_instance(rng, max_boxes=6, classes=("a", "b"), images=("u", "v"))[0]
    base = evaluate(dets, gts)
    perm = evaluate(list(reversed(dets)), list(reversed(gts)))
    assert base.map == pytest.approx(perm.map, abs=1e-12)
    assert base.mar == pytest.approx(perm.mar, abs=1e-12)


def test_evaluate_multiclass_means():
    gts = [gt((0, 0, 10, 10), cls="a"), gt((0, 0, 10, 10), cls="b")]
    dets = [det((0, 0, 10, 10), 0.9, cls="a")]  # class b undetected
    result = evaluate(dets, gts)
    assert result.ap_per_class["a"][0.5] == 1.0
    assert result.ap_per_class["b"][0.5] == 0.0
    assert result.map50 == pytest.approx(0.5)


def test_recall_limits_by_max_detections():
    gts = [gt((i * 20, 0, i * 20 + 10, 10)) for i in range(3)]
    dets = [det((i * 20, 0, i * 20 + 10, 10), 0.9 - 0.1 * i) for i in range(3)]
    result = evaluate(dets, gts)
    assert result.ar_per_class["obj"][1] == pytest.approx(1 / 3)
    assert result.ar_per_class["obj"][10] == pytest.approx(1.0)
    assert result.mar[100] == pytest.approx(1.0)


def test_detection_score_validated():
    with pytest.raises(ValueError):
        det((0, 0, 1, 1), 1.5)


# -------------------------------------------------------------------- file io


def test_text_round_trip(tmp_path):
    rng = np.random.default_rng(6)
    dets, gts = random_instance(rng, max_boxes=6, classes=("cup", "fork"), images=("f0", "f1"))
    dpath, gpath = tmp_path / "dets.txt", tmp_path / "gts.txt"
    save_detections(dets, dpath)
    save_ground_truths(gts, gpath)
    dets2 = load_detections(dpath)
    gts2 = load_ground_truths(gpath)
    assert dets2 == dets
    assert gts2 == gts


def test_malformed_line_reports_number(tmp_path):
    path = tmp_path / "bad.txt"
    path.write_text("img obj 0 0 10 10 0.5\nimg obj 0 0 10\n")
    with pytest.raises(EvaluationError, match="line 2"):
        load_detections(path)


def test_pr_curve_export(tmp_path):
    gts = [gt((0, 0, 10, 10))]
    dets = [det((0, 0, 10, 10), 0.9)]
    result = evaluate(dets, gts)
    files = export_pr_curves(result, tmp_path / "curves")
    assert len(files) == 1
    lines = open(files[0]).read().splitlines()
    assert lines[0].startswith("#")
    assert len(lines) == 102
    first = lines[1].split()
    assert float(first[0]) == 0.0 and float(first[1]) == 1.0
