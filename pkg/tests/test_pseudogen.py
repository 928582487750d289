from collections import Counter
from typing import List

import numpy as np
import pytest

from branches.scorers import OracleScorer
from geometry.boxes import iou_matrix
from geometry.coder import encode_array
from models.geometry_models import Box, Detection, GroundTruthObject
from models.pool_models import AnnotationOutcome, RejectionReason
from pseudogen.annotator import generate_annotation
from pseudogen.matching import average_overlap, converged
from pseudogen.pool import SemiStrongPool, update_pool

A = [0.0, 0.0, 6.0, 6.0]
B = [8.0, 0.0, 14.0, 6.0]
C = [16.0, 0.0, 22.0, 6.0]
D = [0.0, 8.0, 6.0, 14.0]


class ScriptedScorer:
    """Каждый вызов отправляет все боксы в очередной бокс сценария, класс - target_class"""

    def __init__(self, num_classes: int, script: List[List[float]], target_class: int, repeat_last: bool = True):
        self.num_classes = num_classes
        self.script = script
        self.target_class = target_class
        self.repeat_last = repeat_last
        self.calls = 0

    def score_boxes(self, scene, boxes):
        boxes = np.asarray(boxes, dtype=np.float64).reshape(-1, 4)
        if self.repeat_last:
            target = self.script[min(self.calls, len(self.script) - 1)]
        else:
            target = self.script[self.calls % len(self.script)]
        self.calls += 1
        n = boxes.shape[0]
        probs = np.zeros((self.num_classes + 1, n))
        probs[self.target_class + 1] = 1.0
        deltas = np.zeros((4 * self.num_classes, n))
        deltas[4 * self.target_class:4 * self.target_class + 4] = encode_array(boxes, np.tile(target, (n, 1))).T
        return probs, deltas


class BackgroundScorer:
    num_classes = 3

    def score_boxes(self, scene, boxes):
        n = len(boxes)
        probs = np.zeros((4, n))
        probs[0] = 1.0
        return probs, np.zeros((12, n))


def _det(cls, box, score=0.9):
    return Detection(class_id=cls, box=Box.from_array(box), score=score)


def _class_coverage(scene, fg_iou=0.5) -> bool:
    """Каждый класс метки получил пропозал, отнесённый к одному из его GT"""
    overlaps = iou_matrix(scene.proposals.boxes, scene.gt_array())
    best = np.argmax(overlaps, axis=1)
    hit = overlaps[np.arange(len(best)), best] >= fg_iou
    return {int(c) for c in scene.gt_classes()[best[hit]]} == set(scene.labels)


def _gt_coverage(scene, fg_iou=0.5) -> bool:
    """Каждый GT-объект перекрыт хотя бы одним пропозалом с IoU >= fg_iou"""
    overlaps = iou_matrix(scene.proposals.boxes, scene.gt_array())
    return bool(np.all(overlaps.max(axis=0) >= fg_iou))


@pytest.mark.parametrize("dataset_name", ["oracle_dataset", "tiny_dataset"])
def test_oracle_annotations_converge_immediately(dataset_name, request):
    dataset = request.getfixturevalue(dataset_name)
    scorer = OracleScorer(dataset.world.num_classes)
    accepted, expected = 0, 0
    for scene in dataset.weak():
        outcome = generate_annotation(scene, scorer)
        expected += _class_coverage(scene)
        assert outcome.accepted == _class_coverage(scene)
        if _gt_coverage(scene):
            assert outcome.accepted
        if outcome.accepted:
            accepted += 1
            entry = outcome.entry
            assert entry.iterations_to_converge == 1
            assert entry.global_weight == 1.0
            assert all(b.weight == pytest.approx(1.0) for b in entry.boxes)
            assert entry.class_set() == scene.labels
    assert accepted == expected
    assert accepted > 0


def test_oracle_accepts_everything_without_jitter(oracle_dataset):
    scorer = OracleScorer(oracle_dataset.world.num_classes)
    assert all(generate_annotation(s, scorer).accepted for s in oracle_dataset.weak())


def test_oracle_acceptance_rate_equals_gt_coverage_rate(oracle_dataset):
    scorer = OracleScorer(oracle_dataset.world.num_classes)
    weak = oracle_dataset.weak()
    accepted = [generate_annotation(s, scorer).accepted for s in weak]
    covered = [_gt_coverage(s) for s in weak]
    assert accepted == covered
    assert np.mean(accepted) == pytest.approx(np.mean(covered))


def test_uncovered_object_of_a_covered_class_is_still_accepted(tiny_dataset):
    scene = next(s for s in tiny_dataset.weak() if len(s.labels) == 1)
    cls = scene.labels[0]
    far = [16.0, 16.0, 22.0, 22.0]
    two_objects = scene.model_copy(update={
        "gt": [GroundTruthObject(class_id=cls, box=Box.from_array(A)),
               GroundTruthObject(class_id=cls, box=Box.from_array(far))],
        "proposals": scene.proposals.model_copy(update={"boxes": np.array([A, [0.5, 0.0, 6.5, 6.0]])}),
    })
    assert _class_coverage(two_objects)
    assert not _gt_coverage(two_objects)
    outcome = generate_annotation(two_objects, OracleScorer(3))
    assert outcome.accepted
    assert len(outcome.entry.boxes) == 1


def test_oscillating_detector_is_rejected(tiny_dataset):
    scene = tiny_dataset.weak()[0]
    scorer = ScriptedScorer(3, [A, B], scene.labels[0], repeat_last=False)
    outcome = generate_annotation(scene, scorer, max_iters=30)
    assert outcome.rejection == RejectionReason.NO_CONVERGENCE
    assert outcome.iterations_run == 30
    assert scorer.calls == 31


def test_empty_detector_is_rejected(tiny_dataset):
    outcome = generate_annotation(tiny_dataset.weak()[0], BackgroundScorer())
    assert outcome.rejection == RejectionReason.NO_DETECTIONS
    assert outcome.iterations_run == 0


def test_counter_resets_until_three_stable_iterations(tiny_dataset):
    scene = next(s for s in tiny_dataset.weak() if len(s.labels) == 1)
    scorer = ScriptedScorer(3, [A, B, C, D], scene.labels[0])
    outcome = generate_annotation(scene, scorer, max_iters=30)
    assert outcome.accepted
    assert outcome.entry.iterations_to_converge == 4
    assert outcome.iterations_run == 6
    assert len(outcome.entry.boxes) == 1
    np.testing.assert_allclose(outcome.entry.boxes[0].box.as_array(), A, atol=1e-9)
    assert outcome.entry.boxes[0].weight == 0.0


def test_weights_average_over_refinement_iterations(tiny_dataset):
    scene = next(s for s in tiny_dataset.weak() if len(s.labels) == 1)
    shifted = [1.0, 0.0, 7.0, 6.0]  # IoU с A = 30/42
    scorer = ScriptedScorer(3, [A, shifted], scene.labels[0])
    outcome = generate_annotation(scene, scorer)
    assert outcome.entry.iterations_to_converge == 1
    assert outcome.entry.boxes[0].weight == pytest.approx(30.0 / 42.0)


def test_first_refinement_is_left_out_of_box_weights(tiny_dataset):
    scene = next(s for s in tiny_dataset.weak() if len(s.labels) == 1)
    shifted = [1.0, 0.0, 7.0, 6.0]
    scorer = ScriptedScorer(3, [A, shifted, A], scene.labels[0])
    outcome = generate_annotation(scene, scorer)
    assert outcome.entry.iterations_to_converge == 1
    assert outcome.iterations_run == 3
    assert outcome.entry.boxes[0].weight == pytest.approx(1.0)


def test_missing_label_class_is_rejected(tiny_dataset):
    scene = next(s for s in tiny_dataset.weak() if len(s.labels) >= 2)
    scorer = ScriptedScorer(3, [A], scene.labels[0])
    outcome = generate_annotation(scene, scorer)
    assert outcome.rejection == RejectionReason.CLASS_MISMATCH


def test_converged_is_symmetric_and_class_aware():
    a = [_det(0, A), _det(1, B)]
    b = [_det(1, [8.5, 0.0, 14.5, 6.0]), _det(0, [0.5, 0.0, 6.5, 6.0])]
    assert converged(a, b) and converged(b, a)
    assert not converged(a, [_det(0, A)])
    assert not converged(a, [_det(1, A), _det(0, B)])
    assert converged([], [])


def test_converged_requires_one_to_one_matching():
    left = [_det(0, A), _det(0, [0.2, 0.0, 6.2, 6.0])]
    right = [_det(0, A), _det(0, C)]
    assert not converged(left, right)


def test_average_overlap_zero_below_threshold():
    initial = [_det(0, A), _det(1, B)]
    history = [[_det(0, A)], [_det(0, [1.0, 0.0, 7.0, 6.0]), _det(1, D)]]
    weights = average_overlap(initial, history)
    assert weights[0] == pytest.approx((1.0 + 30.0 / 42.0) / 2.0)
    assert weights[1] == 0.0


def test_pool_grows_and_shrinks(tiny_dataset):
    weak = tiny_dataset.weak()
    pool = SemiStrongPool(s.id for s in weak)
    scorer = OracleScorer(3)
    good = next(o for o in (generate_annotation(s, scorer) for s in weak) if o.accepted)
    assert update_pool(pool, good.image_id, good) == 1
    assert update_pool(pool, good.image_id, good) == 0
    assert good.image_id in pool and pool.fraction() == pytest.approx(1.0 / len(weak))
    rejected = AnnotationOutcome(image_id=good.image_id, rejection=RejectionReason.NO_CONVERGENCE, iterations_run=30)
    assert update_pool(pool, good.image_id, rejected) == -1
    assert len(pool) == 0
    snap = pool.snapshot(epoch=3)
    assert snap.accepted == 2 and snap.rejections == {"no-convergence": 1}
    assert snap.t_histogram == {1: 2}
    pool.reset_stats()
    assert pool.snapshot(3).accepted == 0


def test_pool_rejects_non_weak_images(tiny_dataset):
    pool = SemiStrongPool(s.id for s in tiny_dataset.weak())
    strong = tiny_dataset.strong()[0]
    outcome = AnnotationOutcome(image_id=strong.id, rejection=RejectionReason.NO_DETECTIONS)
    with pytest.raises(ValueError):
        pool.update(strong.id, outcome)


def test_t_histogram_counts_iterations(tiny_dataset):
    scene = next(s for s in tiny_dataset.weak() if len(s.labels) == 1)
    pool = SemiStrongPool([scene.id])
    for script in ([A], [A, B, C, D]):
        pool.update(scene.id, generate_annotation(scene, ScriptedScorer(3, script, scene.labels[0])))
    assert Counter(pool.snapshot(0).t_histogram) == Counter({1: 1, 4: 1})
