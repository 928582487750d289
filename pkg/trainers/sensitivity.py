"""
Чувствительность полной системы к выбору strong-подмножества:
для каждого фолда strong-изображения выбираются заново, модель обучается
с нуля, фиксируется mAP50 второй ветви.
"""

from typing import Optional, Sequence

import numpy as np

from evaluation.evaluator import evaluate
from models.eval_models import SensitivityReport
from models.train_models import AblationFlags, Branch, TrainConfig
from models.world_models import Dataset
from synthworld.generator import resplit_dataset
from trainers.trainer import train
from utils.logger import get_logger

logger = get_logger(__name__)


def run_seed_sensitivity(dataset: Dataset, base_cfg: TrainConfig, folds: Sequence[int],
                         flags: Optional[AblationFlags] = None, resplit: bool = True) -> SensitivityReport:
    """
    folds - сиды фолдов. resplit=False оставляет strong-подмножество и меняет
    только сид обучения.
    """
    flags = flags or AblationFlags()
    scores, fractions = [], []
    for fold in folds:
        fold_data = resplit_dataset(dataset, fold) if resplit else dataset
        cfg = base_cfg.with_flags(flags, seed=fold)
        params, telemetry = train(fold_data, cfg)
        report = evaluate(params, fold_data.test, branch=Branch.SUPERVISED,
                          score_threshold=cfg.detect_score_threshold, nms_threshold=cfg.nms_threshold,
                          max_dets=cfg.max_detections)
        scores.append(report.map50)
        fractions.append(telemetry[-1].pool_fraction if telemetry else 0.0)
        logger.info(f"📐 Фолд {fold}: mAP50={report.map50:.4f}")

    values = np.array(scores, dtype=np.float64)
    result = SensitivityReport(
        folds=list(folds),
        map50=scores,
        mean=float(values.mean()) if len(values) else 0.0,
        std=float(values.std(ddof=0)) if len(values) else 0.0,
        flags=flags.label(),
        pool_fraction=fractions,
    )
    logger.success(f"✅ Чувствительность: mAP50 = {result.mean:.4f} ± {result.std:.4f} по {len(scores)} фолдам")
    return result
