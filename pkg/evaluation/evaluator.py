"""
Оценка модели на тестовых сценах: detect() + AP по классам.
"""

from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from branches.detection import detect
from branches.scorers import BoxScorer, BranchScorer
from evaluation.average_precision import average_precision, per_class_gt
from models.eval_models import EvaluationReport
from models.geometry_models import Detection
from models.train_models import Branch
from models.world_models import SceneRecord
from netcore.params import ModelParams
from utils.logger import get_logger

logger = get_logger(__name__)

IOU_THRESHOLDS = tuple(round(0.5 + 0.05 * k, 2) for k in range(10))


def _mean(values: List[float]) -> float:
    return float(np.mean(values)) if values else 0.0


def evaluate_detections(detections: Dict[int, List[Detection]], scenes: Sequence[SceneRecord],
                        num_classes: int, branch: str = Branch.SUPERVISED.value) -> EvaluationReport:
    """Метрики по уже посчитанным детекциям {image_id: [Detection]}"""
    gts = per_class_gt(scenes, num_classes)
    by_class: List[List[Tuple[int, Detection]]] = [[] for _ in range(num_classes)]
    for scene in scenes:
        for det in detections.get(scene.id, []):
            by_class[det.class_id].append((scene.id, det))

    per_class: Dict[float, Dict[int, float]] = {thr: {} for thr in IOU_THRESHOLDS}
    excluded: List[int] = []
    for c in range(num_classes):
        if not any(len(boxes) for boxes in gts[c].values()):
            excluded.append(c)
            logger.info(f"ℹ️ Класс {c} не имеет GT в выборке, исключён из mAP")
            continue
        for thr in IOU_THRESHOLDS:
            per_class[thr][c] = average_precision(by_class[c], gts[c], thr)

    ap50 = per_class[0.5]
    ap50_95 = {c: _mean([per_class[thr][c] for thr in IOU_THRESHOLDS]) for c in ap50}
    return EvaluationReport(
        branch=branch,
        num_images=len(scenes),
        per_class_ap50=ap50,
        per_class_ap50_95=ap50_95,
        map50=_mean(list(ap50.values())),
        ap50_95=_mean([_mean(list(per_class[thr].values())) for thr in IOU_THRESHOLDS]),
        excluded_classes=excluded,
    )


def evaluate(model: Union[ModelParams, BoxScorer], scenes: Sequence[SceneRecord], num_classes: Optional[int] = None,
             branch: Branch = Branch.SUPERVISED, score_threshold: float = 0.05, nms_threshold: float = 0.5,
             max_dets: int = 100) -> EvaluationReport:
    """Детерминированная оценка модели (или оценщика боксов) на сценах"""
    scorer = BranchScorer(model, branch) if isinstance(model, ModelParams) else model
    num_classes = num_classes or scorer.num_classes
    detections = {
        scene.id: detect(scene, scorer, score_threshold, nms_threshold, max_dets)
        for scene in scenes
    }
    report = evaluate_detections(detections, scenes, num_classes, branch.value)
    logger.info(f"📈 Оценка ({branch.value}): mAP50={report.map50:.4f}, AP[50:95]={report.ap50_95:.4f} "
                f"на {len(scenes)} изображениях")
    return report
