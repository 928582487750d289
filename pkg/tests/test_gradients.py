"""
Аналитические градиенты каждого члена лосса против центральных конечных разностей.
"""

import numpy as np
import pytest

from branches import oam_branch
from branches.oam_branch import OamBranch
from branches.supervised_branch import SupervisedBranch
from losses.oam_losses import proposal_loss
from losses.targets import assign_targets
from models.geometry_models import Box
from models.pool_models import PseudoBox, SemiStrongEntry
from models.train_models import AblationFlags, TrainConfig
from models.world_models import SupervisionTier
from netcore.graph import LossGraph, backward
from netcore.heads import oam_forward
from netcore.pooling import FeaturePooler
from synthworld.generator import generate_dataset

from tests.conftest import TINY_WORLD, make_params
from tests.gradcheck import max_relative_error

TOLERANCE = 1e-4
INSTANCES = 20


@pytest.fixture(scope="module")
def scenes():
    dataset = generate_dataset(TINY_WORLD, n_train=INSTANCES * 2, n_test=0, shots=3, seed=21)
    return dataset.train


def _cfg(**kwargs):
    return TrainConfig(hidden_dim=6, pool_size=2, proposal_batch=8, **kwargs)


def _check(params, build_graph, seed):
    def loss():
        return build_graph(LossGraph()).total

    graph = build_graph(LossGraph())
    analytic = backward(params, graph)
    return max_relative_error(params, loss, analytic, np.random.default_rng(seed))


def test_image_level_loss_gradient(scenes):
    pooler = FeaturePooler(2)
    branch = OamBranch(_cfg(), pooler)
    weak = [s for s in scenes if not s.is_strong][:INSTANCES]
    for k, scene in enumerate(weak):
        params = make_params(TINY_WORLD, seed=k)

        def build(graph, scene=scene, params=params):
            branch.first_pass(params, scene, graph, None)
            return graph

        assert _check(params, build, k) < TOLERANCE


def test_proposal_loss_gradient(scenes):
    pooler = FeaturePooler(2)
    for k in range(INSTANCES):
        scene = scenes[k]
        params = make_params(TINY_WORLD, seed=100 + k)
        targets = assign_targets(scene.proposals.boxes, scene.gt_array(), scene.gt_classes())

        def build(graph, scene=scene, params=params, targets=targets):
            out = oam_forward(params, pooler.pool(scene, scene.proposals.boxes))
            result = proposal_loss(out.cls_probs, out.reg, targets)
            graph.add_loss("p", result.value)
            graph.attach(out, d_cls_logits=result.d_cls_logits, d_reg=result.d_reg)
            return graph

        assert _check(params, build, k) < TOLERANCE


def test_oam_branch_loss_with_second_pass_gradient(scenes, monkeypatch):
    """Второй проход на зафиксированных сдвинутых боксах (боксы - константы)"""
    pooler = FeaturePooler(2)
    cfg = _cfg(flags=AblationFlags(bbox_augmentation=True))
    branch = OamBranch(cfg, pooler)
    original_select = oam_branch.select_second_pass_boxes
    for k in range(INSTANCES):
        batch = [scenes[2 * k], scenes[2 * k + 1]]
        params = make_params(TINY_WORLD, seed=200 + k)
        fixed = {}
        for scene in batch:
            first = oam_forward(params, pooler.pool(scene, scene.proposals.boxes))
            fixed[scene.id] = original_select(first, scene.proposals.boxes, scene.labels, cfg.second_pass_top,
                                              *scene.grid.shape[:2])
        pending = []

        def frozen_select(first, proposals, labels, m_top, height, width):
            return fixed[pending.pop(0)]

        monkeypatch.setattr(oam_branch, "select_second_pass_boxes", frozen_select)

        def build(graph, batch=batch, params=params):
            pending.extend(s.id for s in batch)
            branch.branch_loss(params, batch, graph, None)
            return graph

        assert _check(params, build, k) < TOLERANCE
        monkeypatch.setattr(oam_branch, "select_second_pass_boxes", original_select)


def test_supervised_strong_loss_gradient(scenes):
    pooler = FeaturePooler(2)
    branch = SupervisedBranch(_cfg(), pooler)
    for k in range(INSTANCES):
        scene = scenes[k].model_copy(update={"tier": SupervisionTier.STRONG})
        params = make_params(TINY_WORLD, seed=300 + k, shared_encoder=bool(k % 2))

        def build(graph, scene=scene, params=params):
            branch.image_loss(params, scene, None, graph, None)
            return graph

        assert _check(params, build, k) < TOLERANCE


def test_supervised_semi_strong_loss_gradient(scenes):
    pooler = FeaturePooler(2)
    branch = SupervisedBranch(_cfg(), pooler)
    rng = np.random.default_rng(9)
    weak = [s for s in scenes if not s.is_strong][:INSTANCES]
    for k, scene in enumerate(weak):
        entry = SemiStrongEntry(
            image_id=scene.id,
            boxes=[PseudoBox(class_id=o.class_id, box=Box.from_array(o.box.as_array()),
                             weight=float(rng.uniform(0.5, 1.0))) for o in scene.gt],
            iterations_to_converge=int(rng.integers(1, 5)),
        )
        params = make_params(TINY_WORLD, seed=400 + k)

        def build(graph, scene=scene, entry=entry, params=params):
            branch.image_loss(params, scene, entry, graph, None)
            return graph

        assert _check(params, build, k) < TOLERANCE
