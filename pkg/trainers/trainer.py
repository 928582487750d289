"""
Тренер: одна итерация =
1. OAM-батч (weak + strong), L_1B;
2. псевдо-разметка weak-изображений батча на текущем снимке модели, обновление пула;
3. supervised-батч (strong + semi-strong; пустые semi-strong слоты заполняются strong), L_2B;
4. один шаг SGD по L_tot = L_1B + L_2B.

Генератор случайных чисел эпохи выводится из (seed, epoch), поэтому
продолжение с чекпоинта на границе эпохи воспроизводит непрерывный запуск.
"""

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from branches.oam_branch import OAM_TERMS, OamBranch
from branches.scorers import BranchScorer
from branches.supervised_branch import SupervisedBranch
from connectors.checkpoint_store import Checkpoint, save_checkpoint
from evaluation.evaluator import evaluate
from models.pool_models import PoolSnapshot
from models.train_models import Branch, TelemetryRecord, TrainConfig
from models.world_models import Dataset, SceneRecord
from netcore.graph import LossGraph, backward
from netcore.optimizer import sgd_step
from netcore.params import ModelParams
from netcore.pooling import FeaturePooler
from pseudogen.annotator import generate_annotation
from pseudogen.pool import SemiStrongPool, update_pool
from utils.errors import InfeasibleSplitError, NonFiniteLossError, SchemaVersionError
from utils.logger import get_logger

logger = get_logger(__name__)

INIT_STREAM = 0
EPOCH_STREAM = 1


class _Cycler:
    """Бесконечный поток id в перемешанном порядке; перемешивание заново после каждого прохода"""

    def __init__(self, ids: Sequence[int], rng: np.random.Generator):
        self.ids = list(ids)
        self.rng = rng
        self._order: List[int] = []

    def take(self, n: int) -> List[int]:
        out: List[int] = []
        if not self.ids:
            return out
        while len(out) < n:
            if not self._order:
                self._order = [self.ids[i] for i in self.rng.permutation(len(self.ids))]
            out.append(self._order.pop())
        return out


@dataclass
class TrainResult:
    params: ModelParams
    telemetry: List[TelemetryRecord]
    pool: SemiStrongPool
    pool_trajectory: List[PoolSnapshot] = field(default_factory=list)


class Trainer:
    """Владеет параметрами модели и пулом; прогоняет эпохи и пишет телеметрию"""

    def __init__(self, dataset: Dataset, cfg: TrainConfig, checkpoint_dir: Optional[Union[str, Path]] = None):
        self.dataset = dataset
        self.cfg = cfg
        self.checkpoint_dir = Path(checkpoint_dir) if checkpoint_dir else None
        self.scenes: Dict[int, SceneRecord] = {s.id: s for s in dataset.train}
        self.strong_ids = [s.id for s in dataset.strong()]
        self.weak_ids = [s.id for s in dataset.weak()]
        if not self.strong_ids:
            raise InfeasibleSplitError("В датасете нет strong-изображений, обучение невозможно")

        world = dataset.world
        self.pooler = FeaturePooler(cfg.pool_size)
        self.oam = OamBranch(cfg, self.pooler)
        self.supervised = SupervisedBranch(cfg, self.pooler)
        init_rng = np.random.default_rng(np.random.SeedSequence([cfg.seed, INIT_STREAM]))
        self.params = ModelParams.initialize(
            num_classes=world.num_classes,
            feature_dim=cfg.pool_size * cfg.pool_size * world.channels,
            hidden_dim=cfg.hidden_dim,
            shared_encoder=cfg.flags.shared_encoder,
            rng=init_rng,
            nonlinearity=cfg.nonlinearity,
            init_std_cls=cfg.init_std_cls,
            init_std_reg=cfg.init_std_reg,
            pool_size=cfg.pool_size,
        )
        self.pool = SemiStrongPool(self.weak_ids)
        self.start_epoch = 0
        self.telemetry: List[TelemetryRecord] = []
        self.pool_trajectory: List[PoolSnapshot] = []
        self.stats = self._empty_stats()

    @staticmethod
    def _empty_stats() -> dict:
        return {
            "iterations": 0,
            "loss_total": 0.0,
            "loss_oam": 0.0,
            "loss_supervised": 0.0,
            "oam_terms": {k: 0.0 for k in OAM_TERMS},
            "semi_strong_slots": 0,
            "strong_fallback_slots": 0,
            "encoder_grad_norm_oam": 0.0,
            "encoder_grad_norm_supervised": 0.0,
            "both_branches_reach_encoder": True,
        }

    def iterations_per_epoch(self) -> int:
        """По умолчанию - один проход по weak-изображениям OAM-батчами (или по strong, если weak нет)"""
        if self.cfg.iterations_per_epoch is not None:
            return self.cfg.iterations_per_epoch
        if self.weak_ids and self.cfg.oam_weak_per_batch > 0:
            return math.ceil(len(self.weak_ids) / self.cfg.oam_weak_per_batch)
        return math.ceil(len(self.strong_ids) / self.cfg.oam_strong_per_batch)

    def restore(self, checkpoint: Checkpoint) -> None:
        """Продолжение запуска с чекпоинта (конфиги должны совпадать)"""
        if checkpoint.params is None:
            raise SchemaVersionError("Продолжить обучение можно только с чекпоинта модели")
        if checkpoint.config != self.cfg:
            raise SchemaVersionError("Конфиг чекпоинта не совпадает с конфигом обучения")
        self.params = checkpoint.params
        self.pool.restore(checkpoint.pool_entries)
        self.start_epoch = checkpoint.epoch
        self.telemetry = list(checkpoint.telemetry)
        self.pool_trajectory = list(checkpoint.pool_trajectory)
        logger.info(f"♻️ Продолжение с эпохи {self.start_epoch + 1}, пул: {len(self.pool)} изображений")

    def _annotate(self, weak_batch: List[SceneRecord], epoch: int) -> None:
        scorer = BranchScorer(self.params, Branch.OAM, self.pooler)
        for scene in weak_batch:
            outcome = generate_annotation(
                scene, scorer,
                max_iters=self.cfg.max_annotation_iters,
                score_threshold=self.cfg.annotation_score_threshold,
                nms_threshold=self.cfg.nms_threshold,
                epoch=epoch,
            )
            update_pool(self.pool, scene.id, outcome)

    def _supervised_batch(self, strong: _Cycler, rng: np.random.Generator) -> Tuple[List[SceneRecord], List[SceneRecord]]:
        semi_ids: List[int] = []
        pooled = self.pool.ids()
        if self.cfg.flags.oam_supervision and pooled and self.cfg.sup_semi_per_batch > 0:
            n = min(self.cfg.sup_semi_per_batch, len(pooled))
            semi_ids = [pooled[i] for i in sorted(rng.choice(len(pooled), size=n, replace=False))]
        fallback = self.cfg.sup_semi_per_batch - len(semi_ids)
        strong_ids = strong.take(self.cfg.sup_strong_per_batch + fallback)
        self.stats["semi_strong_slots"] += len(semi_ids)
        self.stats["strong_fallback_slots"] += fallback
        return [self.scenes[i] for i in strong_ids], [self.scenes[i] for i in semi_ids]

    def _step(self, epoch: int, iteration: int, lr: float, weak: _Cycler, oam_strong: _Cycler,
              sup_strong: _Cycler, rng: np.random.Generator) -> None:
        weak_batch = [self.scenes[i] for i in weak.take(self.cfg.oam_weak_per_batch)]
        oam_batch = weak_batch + [self.scenes[i] for i in oam_strong.take(self.cfg.oam_strong_per_batch)]

        oam_graph = LossGraph()
        oam_terms = self.oam.branch_loss(self.params, oam_batch, oam_graph, rng)

        if self.cfg.flags.oam_supervision:
            self._annotate(weak_batch, epoch)

        strong_batch, semi_batch = self._supervised_batch(sup_strong, rng)
        sup_graph = LossGraph()
        self.supervised.branch_loss(self.params, strong_batch, semi_batch, self.pool, sup_graph, rng)

        total = oam_graph.total + sup_graph.total
        if not math.isfinite(total):
            raise NonFiniteLossError(
                f"Лосс стал неконечным на эпохе {epoch + 1}, итерации {iteration + 1}",
                diagnostic={
                    "epoch": epoch,
                    "iteration": iteration,
                    "lr": lr,
                    "oam_breakdown": oam_graph.breakdown,
                    "supervised_breakdown": sup_graph.breakdown,
                    "oam_batch": [s.id for s in oam_batch],
                    "strong_batch": [s.id for s in strong_batch],
                    "semi_strong_batch": [s.id for s in semi_batch],
                    "params_finite": self.params.is_finite(),
                },
            )

        oam_grads = backward(self.params, oam_graph)
        sup_grads = backward(self.params, sup_graph)
        norm_oam = oam_grads.norm(self.params.encoder_prefix(Branch.OAM))
        norm_sup = sup_grads.norm(self.params.encoder_prefix(Branch.SUPERVISED))
        if self.params.shared_encoder and oam_graph.total > 0 and sup_graph.total > 0:
            if norm_oam == 0.0 or norm_sup == 0.0:
                self.stats["both_branches_reach_encoder"] = False
        sgd_step(self.params, oam_grads + sup_grads, lr, self.cfg.momentum, self.cfg.weight_decay)

        self.stats["iterations"] += 1
        self.stats["loss_total"] += total
        self.stats["loss_oam"] += oam_graph.total
        self.stats["loss_supervised"] += sup_graph.total
        for k, v in oam_terms.items():
            self.stats["oam_terms"][k] += v
        self.stats["encoder_grad_norm_oam"] += norm_oam
        self.stats["encoder_grad_norm_supervised"] += norm_sup

    def run_epoch(self, epoch: int) -> TelemetryRecord:
        rng = np.random.default_rng(np.random.SeedSequence([self.cfg.seed, EPOCH_STREAM, epoch]))
        weak = _Cycler(self.weak_ids, rng)
        oam_strong = _Cycler(self.strong_ids, rng)
        sup_strong = _Cycler(self.strong_ids, rng)
        lr = self.cfg.learning_rate(epoch)
        self.stats = self._empty_stats()
        self.pool.reset_stats()
        self.oam.stats = {k: 0 for k in self.oam.stats}
        self.supervised.stats = {k: 0 for k in self.supervised.stats}

        iterations = self.iterations_per_epoch()
        for iteration in range(iterations):
            self._step(epoch, iteration, lr, weak, oam_strong, sup_strong, rng)

        snapshot = self.pool.snapshot(epoch)
        self.pool_trajectory.append(snapshot)
        n = max(self.stats["iterations"], 1)
        record = TelemetryRecord(
            epoch=epoch,
            lr=lr,
            iterations=self.stats["iterations"],
            loss_total=self.stats["loss_total"] / n,
            loss_oam=self.stats["loss_oam"] / n,
            loss_supervised=self.stats["loss_supervised"] / n,
            oam_terms={k: v / n for k, v in self.stats["oam_terms"].items()},
            pool_size=snapshot.size,
            pool_fraction=snapshot.fraction,
            accepted=snapshot.accepted,
            rejections=snapshot.rejections,
            t_histogram=snapshot.t_histogram,
            semi_strong_slots=self.stats["semi_strong_slots"],
            strong_fallback_slots=self.stats["strong_fallback_slots"],
            encoder_grad_norm_oam=self.stats["encoder_grad_norm_oam"] / n,
            encoder_grad_norm_supervised=self.stats["encoder_grad_norm_supervised"] / n,
            both_branches_reach_encoder=self.stats["both_branches_reach_encoder"],
            missing_fg_warnings=self.oam.stats["missing_fg_warnings"] + self.supervised.stats["missing_fg_warnings"],
            degenerate_second_pass=self.oam.stats["degenerate_second_pass"],
            val_map50=self._validate(epoch),
        )
        self.telemetry.append(record)
        self._print_epoch_stats(record)
        return record

    def _validate(self, epoch: int) -> Optional[float]:
        every = self.cfg.validate_every
        if not every or (epoch + 1) % every or not self.dataset.test:
            return None
        report = evaluate(self.params, self.dataset.test, branch=Branch.SUPERVISED,
                          score_threshold=self.cfg.detect_score_threshold,
                          nms_threshold=self.cfg.nms_threshold, max_dets=self.cfg.max_detections)
        return report.map50

    def _save(self, epoch: int) -> None:
        if self.checkpoint_dir is None:
            return
        save_checkpoint(
            self.checkpoint_dir / f"epoch_{epoch:03d}.npz", self.params, self.cfg, epoch,
            list(self.pool.entries.values()), self.telemetry, self.pool_trajectory, self.dataset.seed,
        )

    def run(self) -> TrainResult:
        cfg = self.cfg
        logger.info("=" * 80)
        logger.info(f"🚀 ОБУЧЕНИЕ: флаги {cfg.flags.label()}, seed={cfg.seed}, эпох {cfg.epochs}")
        logger.info(f"  strong: {len(self.strong_ids)}, weak: {len(self.weak_ids)}, "
                    f"итераций на эпоху: {self.iterations_per_epoch()}")
        logger.info("=" * 80)
        for epoch in range(self.start_epoch, cfg.epochs):
            self.run_epoch(epoch)
            completed = epoch + 1
            if cfg.checkpoint_every and completed % cfg.checkpoint_every == 0 and completed < cfg.epochs:
                self._save(completed)
        self._save(cfg.epochs)
        self._print_training_stats()
        return TrainResult(self.params, self.telemetry, self.pool, self.pool_trajectory)

    def _print_epoch_stats(self, record: TelemetryRecord) -> None:
        rejected = sum(record.rejections.values())
        val = f", val mAP50={record.val_map50:.4f}" if record.val_map50 is not None else ""
        logger.info(f"📊 Эпоха {record.epoch + 1}/{self.cfg.epochs} (lr={record.lr:g}): "
                    f"L_tot={record.loss_total:.4f} (1B={record.loss_oam:.4f}, 2B={record.loss_supervised:.4f}), "
                    f"пул {record.pool_size} ({record.pool_fraction:.1%}), принято {record.accepted}, "
                    f"отказов {rejected}{val}")
        if record.missing_fg_warnings:
            logger.warning(f"⚠️ Батчей strong без foreground: {record.missing_fg_warnings}")
        if not record.both_branches_reach_encoder:
            logger.warning("⚠️ Общий энкодер не получил градиент от одной из ветвей")

    def _print_training_stats(self) -> None:
        logger.info("=" * 80)
        logger.info("🎉 ОБУЧЕНИЕ ЗАВЕРШЕНО!")
        logger.info("=" * 80)
        if self.telemetry:
            last = self.telemetry[-1]
            logger.info("📊 СТАТИСТИКА:")
            logger.info(f"  📉 Лосс последней эпохи: {last.loss_total:.4f}")
            logger.info(f"  🏷️ Semi-strong изображений: {last.pool_size} из {len(self.weak_ids)} "
                        f"({last.pool_fraction:.1%})")
            logger.info(f"  🔁 Гистограмма T: {last.t_histogram}")
            if last.val_map50 is not None:
                logger.info(f"  🎯 Валидационный mAP50: {last.val_map50:.4f}")
        logger.info("=" * 80)
        logger.success("✅ Обучение завершено успешно!")


def train(dataset: Dataset, cfg: TrainConfig,
          checkpoint_dir: Optional[Union[str, Path]] = None) -> Tuple[ModelParams, List[TelemetryRecord]]:
    """Обучение с нуля; возвращает финальные параметры и телеметрию по эпохам"""
    result = Trainer(dataset, cfg, checkpoint_dir).run()
    return result.params, result.telemetry
