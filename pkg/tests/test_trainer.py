import numpy as np
import pytest

from connectors.checkpoint_store import load_checkpoint
from models.train_models import AblationFlags, TrainConfig
from models.world_models import SupervisionTier
from trainers.trainer import Trainer, train
from utils.errors import InfeasibleSplitError, NonFiniteLossError, SchemaVersionError

ALL_OFF = AblationFlags(shared_encoder=False, bbox_augmentation=False, oam_supervision=False)


def _assert_same_params(a, b):
    assert sorted(a.tensors) == sorted(b.tensors)
    for name in a.tensors:
        assert np.array_equal(a.tensors[name], b.tensors[name]), name
        assert np.array_equal(a.momentum[name], b.momentum[name]), name


def test_training_is_deterministic(tiny_dataset, tiny_train_config):
    params_a, telemetry_a = train(tiny_dataset, tiny_train_config)
    params_b, telemetry_b = train(tiny_dataset, tiny_train_config)
    _assert_same_params(params_a, params_b)
    assert [r.model_dump() for r in telemetry_a] == [r.model_dump() for r in telemetry_b]


def test_telemetry_shape(tiny_dataset, tiny_train_config):
    _, telemetry = train(tiny_dataset, tiny_train_config)
    assert [r.epoch for r in telemetry] == [0, 1]
    for record in telemetry:
        assert record.iterations == 3
        assert np.isfinite(record.loss_total)
        assert record.loss_total == pytest.approx(record.loss_oam + record.loss_supervised)
        assert set(record.oam_terms) == {"strong_first", "weak_first", "strong_second", "weak_second"}
        assert 0.0 <= record.pool_fraction <= 1.0
        assert record.semi_strong_slots + record.strong_fallback_slots == 3 * tiny_train_config.sup_semi_per_batch


def test_oam_off_fills_semi_slots_with_strong(tiny_dataset, tiny_train_config):
    cfg = tiny_train_config.with_flags(ALL_OFF)
    result = Trainer(tiny_dataset, cfg).run()
    assert len(result.pool) == 0
    for record in result.telemetry:
        assert record.semi_strong_slots == 0
        assert record.strong_fallback_slots == cfg.sup_semi_per_batch * record.iterations
        assert record.pool_size == 0
        assert record.accepted == 0


def test_bba_off_zeroes_second_pass_terms(tiny_dataset, tiny_train_config):
    cfg = tiny_train_config.with_flags(AblationFlags(shared_encoder=True, bbox_augmentation=False,
                                                     oam_supervision=False))
    _, telemetry = train(tiny_dataset, cfg)
    for record in telemetry:
        assert record.oam_terms["strong_second"] == 0.0
        assert record.oam_terms["weak_second"] == 0.0


def test_shared_encoder_receives_both_branches(tiny_dataset, tiny_train_config):
    _, telemetry = train(tiny_dataset, tiny_train_config)
    for record in telemetry:
        assert record.both_branches_reach_encoder
        assert record.encoder_grad_norm_oam > 0.0
        assert record.encoder_grad_norm_supervised > 0.0


def test_separate_encoders_stay_isolated(tiny_dataset, tiny_train_config):
    cfg = tiny_train_config.with_flags(ALL_OFF)
    trainer = Trainer(tiny_dataset, cfg)
    before = trainer.params.copy()
    record = trainer.run_epoch(0)
    assert "enc2.W" in trainer.params.tensors
    assert not np.array_equal(before["enc.W"], trainer.params["enc.W"])
    assert not np.array_equal(before["enc2.W"], trainer.params["enc2.W"])
    assert record.encoder_grad_norm_supervised > 0.0


def test_resume_matches_continuous_run(tiny_dataset, tiny_train_config, tmp_path):
    cfg = tiny_train_config.model_copy(update={"epochs": 3, "checkpoint_every": 1})
    continuous = Trainer(tiny_dataset, cfg, tmp_path / "full").run()

    checkpoint = load_checkpoint(tmp_path / "full" / "epoch_001.npz")
    assert checkpoint.epoch == 1
    resumed_trainer = Trainer(tiny_dataset, cfg, tmp_path / "resumed")
    resumed_trainer.restore(checkpoint)
    resumed = resumed_trainer.run()

    _assert_same_params(continuous.params, resumed.params)
    assert [r.model_dump() for r in continuous.telemetry] == [r.model_dump() for r in resumed.telemetry]
    assert continuous.pool.entries == resumed.pool.entries
    assert (tmp_path / "full" / "epoch_003.npz").read_bytes() == (tmp_path / "resumed" / "epoch_003.npz").read_bytes()


def test_restore_rejects_other_config(tiny_dataset, tiny_train_config, tmp_path):
    Trainer(tiny_dataset, tiny_train_config, tmp_path).run()
    checkpoint = load_checkpoint(tmp_path / "epoch_002.npz")
    other = Trainer(tiny_dataset, tiny_train_config.model_copy(update={"seed": 8}))
    with pytest.raises(SchemaVersionError):
        other.restore(checkpoint)


def test_non_finite_loss_is_reported(tiny_dataset, tiny_train_config):
    trainer = Trainer(tiny_dataset, tiny_train_config.with_flags(ALL_OFF))
    trainer.params.tensors["enc.W"][:] = np.nan
    with pytest.raises(NonFiniteLossError) as info:
        trainer.run_epoch(0)
    diagnostic = info.value.diagnostic
    assert diagnostic["epoch"] == 0
    assert diagnostic["iteration"] == 0
    assert diagnostic["params_finite"] is False
    assert diagnostic["oam_batch"]


def test_no_strong_images_is_infeasible(tiny_dataset, tiny_train_config):
    weak_only = tiny_dataset.model_copy(update={
        "train": [s.model_copy(update={"tier": SupervisionTier.WEAK}) for s in tiny_dataset.train],
    })
    with pytest.raises(InfeasibleSplitError):
        Trainer(weak_only, tiny_train_config)


def test_learning_rate_schedule():
    cfg = TrainConfig(epochs=9, base_lr=0.01, lr_decay=0.1)
    assert cfg.step_epoch() == 6
    assert [cfg.learning_rate(e) for e in (0, 5)] == [0.01, 0.01]
    assert cfg.learning_rate(6) == pytest.approx(0.001)
    assert TrainConfig(epochs=9, lr_step_epoch=2).learning_rate(2) == pytest.approx(1e-4)


def test_default_iterations_cover_weak_images(tiny_dataset, tiny_train_config):
    cfg = tiny_train_config.model_copy(update={"iterations_per_epoch": None})
    trainer = Trainer(tiny_dataset, cfg)
    weak = len(tiny_dataset.weak())
    assert trainer.iterations_per_epoch() == -(-weak // cfg.oam_weak_per_batch)
