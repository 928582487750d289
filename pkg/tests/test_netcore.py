import numpy as np
import pytest

from models.train_models import Branch
from netcore.graph import Gradients, LossGraph, backward
from netcore.heads import oam_forward, softmax, supervised_forward
from netcore.optimizer import sgd_step
from netcore.pooling import FeaturePooler, roi_pool_batch
from utils.errors import DegenerateBoxError, NonFiniteGradientError

from tests.conftest import TINY_WORLD, make_params


def test_normalization_invariants_over_random_forwards():
    rng = np.random.default_rng(0)
    models = [make_params(TINY_WORLD, seed=s, std=1.0) for s in range(20)]
    for trial in range(1000):
        params = models[trial % len(models)]
        features = rng.normal(0.0, 2.0, size=(int(rng.integers(1, 12)), params.feature_dim))
        out = oam_forward(params, features)
        np.testing.assert_allclose(out.gamma_c.sum(axis=0), 1.0, atol=1e-9)
        np.testing.assert_allclose(out.gamma_r.sum(axis=1), 1.0, atol=1e-9)
        assert np.all(out.alpha >= 0.0) and np.all(out.alpha <= 1.0 + 1e-12)
        np.testing.assert_allclose(out.cls_probs.sum(axis=0), 1.0, atol=1e-9)


def test_single_proposal_gives_gamma_r_one():
    params = make_params(TINY_WORLD)
    out = oam_forward(params, np.ones((1, params.feature_dim)))
    np.testing.assert_allclose(out.gamma_r, 1.0)
    np.testing.assert_allclose(out.alpha, out.gamma_c[:, 0])


def test_softmax_is_shift_invariant():
    x = np.array([[1000.0, 1001.0], [999.0, 1000.0]])
    np.testing.assert_allclose(softmax(x, axis=0), softmax(x - 1000.0, axis=0))


def test_roi_pool_constant_grid():
    grid = np.full((12, 10, 3), 2.5)
    feats = roi_pool_batch(grid, np.array([[1.0, 1.0, 7.5, 9.0], [0.0, 0.0, 10.0, 12.0]]), pool_size=3)
    assert feats.shape == (2, 27)
    np.testing.assert_allclose(feats, 2.5)


def test_roi_pool_cell_means():
    grid = np.arange(16, dtype=np.float64).reshape(4, 4, 1)
    feats = roi_pool_batch(grid, np.array([[0.0, 0.0, 4.0, 4.0]]), pool_size=2)
    # ячейки 2x2: верх-лево, верх-право, низ-лево, низ-право
    np.testing.assert_allclose(feats[0], [2.5, 4.5, 10.5, 12.5])


def test_roi_pool_tiny_box_takes_nearest_pixel():
    grid = np.arange(16, dtype=np.float64).reshape(4, 4, 1)
    feats = roi_pool_batch(grid, np.array([[1.2, 2.1, 1.4, 2.3]]), pool_size=2)
    np.testing.assert_allclose(feats[0], grid[2, 1, 0])


def test_roi_pool_rejects_box_outside_grid():
    with pytest.raises(DegenerateBoxError):
        roi_pool_batch(np.zeros((4, 4, 1)), np.array([[5.0, 5.0, 7.0, 7.0]]))


def test_feature_pooler_matches_direct_pooling(tiny_dataset):
    scene = tiny_dataset.train[0]
    pooler = FeaturePooler(pool_size=2)
    np.testing.assert_allclose(pooler.pool(scene, scene.proposals.boxes),
                               roi_pool_batch(scene.grid, scene.proposals.boxes, 2))


def test_sgd_step_rule():
    params = make_params(TINY_WORLD, seed=1)
    w0 = params["sup.cls.b"].copy()
    grads = Gradients(params)
    g = np.linspace(-1.0, 1.0, w0.size)
    grads.add("sup.cls.b", g)
    sgd_step(params, grads, lr=0.1, momentum=0.9, weight_decay=0.01)
    v1 = g + 0.01 * w0
    np.testing.assert_allclose(params["sup.cls.b"], w0 - 0.1 * v1)
    w1 = params["sup.cls.b"].copy()
    sgd_step(params, grads, lr=0.1, momentum=0.9, weight_decay=0.01)
    v2 = 0.9 * v1 + g + 0.01 * w1
    np.testing.assert_allclose(params["sup.cls.b"], w1 - 0.1 * v2)


def test_untouched_tensors_are_bit_identical_after_step():
    params = make_params(TINY_WORLD, seed=2)
    before = {k: v.copy() for k, v in params.tensors.items()}
    grads = Gradients(params)
    grads.add("oam.reg.W", np.ones_like(params["oam.reg.W"]))
    sgd_step(params, grads, lr=0.5)
    for name in params.names():
        if name == "oam.reg.W":
            assert not np.array_equal(params[name], before[name])
        else:
            assert np.array_equal(params[name], before[name])
            assert not np.any(params.momentum[name])


def test_separate_encoders_isolate_branches(tiny_dataset):
    params = make_params(TINY_WORLD, seed=3, shared_encoder=False)
    pooler = FeaturePooler(pool_size=params.pool_size)
    scene = tiny_dataset.train[0]
    out = supervised_forward(params, pooler.pool(scene, scene.proposals.boxes))
    graph = LossGraph()
    graph.add_loss("probe", float(out.cls_logits.sum()))
    graph.attach(out, d_cls_logits=np.ones_like(out.cls_logits))
    grads = backward(params, graph)
    assert grads.touched == {"enc2.W", "enc2.b", "sup.cls.W", "sup.cls.b", "sup.reg.W", "sup.reg.b"}
    oam_before = {k: params[k].copy() for k in params.names() if k.startswith(("enc.", "oam."))}
    sgd_step(params, grads, lr=0.1)
    for name, value in oam_before.items():
        assert np.array_equal(params[name], value)
    assert params.encoder_prefix(Branch.SUPERVISED) == "enc2"


def test_shared_encoder_receives_both_branches(tiny_dataset):
    params = make_params(TINY_WORLD, seed=4)
    pooler = FeaturePooler(pool_size=params.pool_size)
    scene = tiny_dataset.train[0]
    feats = pooler.pool(scene, scene.proposals.boxes)
    oam_graph, sup_graph = LossGraph(), LossGraph()
    oam_out = oam_forward(params, feats)
    oam_graph.attach(oam_out, d_alpha=np.ones(params.num_classes))
    sup_out = supervised_forward(params, feats)
    sup_graph.attach(sup_out, d_cls_logits=np.ones_like(sup_out.cls_logits) * np.arange(params.num_classes + 1)[:, None])
    assert backward(params, oam_graph).norm("enc") > 0.0
    assert backward(params, sup_graph).norm("enc") > 0.0


def test_backward_rejects_non_finite_gradients(tiny_dataset):
    params = make_params(TINY_WORLD, seed=5)
    scene = tiny_dataset.train[0]
    out = supervised_forward(params, FeaturePooler(params.pool_size).pool(scene, scene.proposals.boxes))
    graph = LossGraph()
    bad = np.zeros_like(out.reg)
    bad[0, 0] = np.nan
    graph.attach(out, d_reg=bad)
    with pytest.raises(NonFiniteGradientError):
        backward(params, graph)


def test_params_copy_is_independent():
    params = make_params(TINY_WORLD)
    snapshot = params.copy()
    params.tensors["enc.W"] += 1.0
    assert not np.array_equal(params["enc.W"], snapshot["enc.W"])
    assert snapshot.meta() == params.meta()
