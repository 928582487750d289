"""
Лоссы обеих ветвей: значения на ручных примерах, назначение целей, второй проход OAM.
"""

import math

import numpy as np
import pytest

from branches.oam_branch import OAM_TERMS, OamBranch, select_second_pass_boxes
from losses.oam_losses import LOG_EPS, image_level_loss, image_level_loss_grad, proposal_loss
from losses.supervised_loss import l2b_loss
from losses.targets import assign_targets, sample_proposals
from models.train_models import AblationFlags, TrainConfig
from netcore.graph import LossGraph
from netcore.heads import oam_forward
from netcore.pooling import FeaturePooler

from tests.conftest import TINY_WORLD, make_params


def test_image_level_loss_values():
    alpha = np.array([0.9, 0.2])
    y = np.array([1.0, 0.0])
    assert image_level_loss(alpha, y) == pytest.approx(-(math.log(0.9) + math.log(0.8)))
    assert image_level_loss(np.array([0.0, 1.0]), np.array([1.0, 0.0])) == pytest.approx(-2.0 * math.log(LOG_EPS))


def test_image_level_loss_grad_is_zero_where_clamped():
    grad = image_level_loss_grad(np.array([0.0, 0.5, 1.0]), np.array([1.0, 1.0, 0.0]))
    assert grad[0] == 0.0 and grad[2] == 0.0
    assert grad[1] == pytest.approx(-2.0)


def test_assign_targets_threshold_and_ties():
    proposals = np.array([[0.0, 0.0, 10.0, 10.0], [0.0, 0.0, 10.0, 4.0], [20.0, 20.0, 30.0, 30.0]])
    gt = np.array([[0.0, 0.0, 10.0, 10.0], [0.0, 0.0, 10.0, 10.0]])
    targets = assign_targets(proposals, gt, np.array([2, 0]), fg_iou=0.5)
    assert targets.labels.tolist() == [3, 0, 0]
    assert targets.matched.tolist() == [0, -1, -1]
    np.testing.assert_allclose(targets.offsets[0], 0.0)


def test_sample_proposals_respects_fraction():
    proposals = np.array([[0.0, 0.0, 10.0, 10.0]] * 6 + [[30.0, 30.0, 40.0, 40.0]] * 20)
    targets = assign_targets(proposals, np.array([[0.0, 0.0, 10.0, 10.0]]), np.array([1]))
    idx = sample_proposals(targets, batch_size=8, fg_fraction=0.25, rng=np.random.default_rng(0))
    assert len(idx) == 8
    assert int(targets.foreground[idx].sum()) == 2
    assert np.all(np.diff(idx) > 0)
    assert sample_proposals(targets, 8, 0.25, None).tolist() == [0, 1, 6, 7, 8, 9, 10, 11]


def test_proposal_loss_without_foreground_has_no_regression():
    probs = np.full((3, 4), 1.0 / 3.0)
    reg = np.ones((8, 4))
    targets = assign_targets(np.array([[0.0, 0.0, 1.0, 1.0]] * 4), np.array([[5.0, 5.0, 9.0, 9.0]]), np.array([0]))
    result = proposal_loss(probs, reg, targets)
    assert result.num_foreground == 0
    assert result.reg_value == 0.0
    assert result.cls_value == pytest.approx(math.log(3.0))
    assert not np.any(result.d_reg)


def test_proposal_loss_regresses_only_target_class_rows():
    proposals = np.array([[0.0, 0.0, 10.0, 10.0]])
    targets = assign_targets(proposals, np.array([[1.0, 0.0, 11.0, 10.0]]), np.array([1]))
    reg = np.zeros((8, 1))
    result = proposal_loss(np.full((3, 1), 1.0 / 3.0), reg, targets)
    assert result.num_foreground == 1
    assert result.reg_value == pytest.approx(0.5 * 0.1 ** 2)
    assert np.flatnonzero(result.d_reg[:, 0]).tolist() == [4]


def test_l2b_weights_scale_classification():
    probs = np.array([[0.5, 0.5], [0.25, 0.5], [0.25, 0.0]])
    targets = assign_targets(np.array([[0.0, 0.0, 4.0, 4.0], [8.0, 8.0, 12.0, 12.0]]),
                             np.array([[0.0, 0.0, 4.0, 4.0]]), np.array([0]))
    omega = np.array([0.5, 1.0])
    result = l2b_loss(probs, np.zeros((8, 2)), targets, omega, image_weight=0.5, with_regression=False)
    expected = -0.5 * (0.5 * math.log(0.25) + 1.0 * math.log(0.5)) / 2.0
    assert result.value == pytest.approx(expected)
    assert result.reg_value == 0.0
    assert not np.any(result.d_reg)


def test_l2b_unit_weights_match_proposal_loss():
    rng = np.random.default_rng(1)
    logits = rng.normal(size=(4, 5))
    probs = np.exp(logits) / np.exp(logits).sum(axis=0)
    reg = rng.normal(scale=0.1, size=(12, 5))
    proposals = np.array([[0.0, 0.0, 8.0, 8.0], [1.0, 0.0, 9.0, 8.0], [10.0, 10.0, 14.0, 14.0],
                          [0.0, 10.0, 6.0, 16.0], [2.0, 2.0, 7.0, 7.0]])
    targets = assign_targets(proposals, np.array([[0.0, 0.0, 8.0, 8.0], [0.0, 10.0, 6.0, 15.0]]), np.array([1, 2]))
    a = l2b_loss(probs, reg, targets)
    b = proposal_loss(probs, reg, targets)
    assert a.value == pytest.approx(b.value)
    np.testing.assert_allclose(a.d_cls_logits, b.d_cls_logits)


def test_second_pass_selection(tiny_dataset):
    params = make_params(TINY_WORLD, seed=8)
    scene = tiny_dataset.train[0]
    first = oam_forward(params, FeaturePooler(2).pool(scene, scene.proposals.boxes))
    boxes = select_second_pass_boxes(first, scene.proposals.boxes, scene.labels, 4, *scene.grid.shape[:2])
    assert boxes.shape[0] <= 4 * len(scene.labels)
    assert np.all(boxes[:, 2] > boxes[:, 0]) and np.all(boxes[:, 3] > boxes[:, 1])
    assert np.all(boxes >= 0.0) and np.all(boxes[:, [0, 2]] <= TINY_WORLD.width)


def test_second_pass_with_zero_offsets_keeps_top_proposals(tiny_dataset):
    params = make_params(TINY_WORLD, seed=9)
    params.tensors["oam.reg.W"][:] = 0.0
    params.tensors["oam.reg.b"][:] = 0.0
    scene = tiny_dataset.train[1]
    first = oam_forward(params, FeaturePooler(2).pool(scene, scene.proposals.boxes))
    c = scene.labels[0]
    boxes = select_second_pass_boxes(first, scene.proposals.boxes, [c], 3, *scene.grid.shape[:2])
    top = np.lexsort((np.arange(first.num_proposals), -first.phi[c]))[:3]
    np.testing.assert_allclose(boxes, scene.proposals.boxes[top])


def test_oam_branch_terms_follow_flags(tiny_dataset):
    pooler = FeaturePooler(2)
    params = make_params(TINY_WORLD, seed=10)
    batch = tiny_dataset.weak()[:2] + tiny_dataset.strong()[:2]
    with_bba = OamBranch(TrainConfig(pool_size=2, hidden_dim=6, flags=AblationFlags(bbox_augmentation=True)), pooler)
    terms = with_bba.branch_loss(params, batch, LossGraph(), None)
    assert set(terms) == set(OAM_TERMS)
    assert all(v > 0.0 for v in terms.values())

    without_bba = OamBranch(TrainConfig(pool_size=2, hidden_dim=6, flags=AblationFlags(bbox_augmentation=False)), pooler)
    graph = LossGraph()
    terms = without_bba.branch_loss(params, batch, graph, None)
    assert terms["strong_second"] == 0.0 and terms["weak_second"] == 0.0
    assert graph.total == pytest.approx(terms["strong_first"] + terms["weak_first"])
