"""
Генератор псевдо-разметки для weak-изображения.

Логика:
1. D_init = NMS(детекции совместного модуля на пропозалах), классы вне метки изображения отбрасываются
2. Итерации t = 1..K: ROI pooling на боксах D, прямой проход, смещения, NMS -> D_t
3. Пустой D_t - отказ (no-detections); D_t == D три раза подряд - сходимость, T = t + 1 - counter
4. Не сошлось за K итераций - отказ (no-convergence)
5. Классы D_init должны покрыть метку изображения, иначе отказ (class-mismatch)
Итоговые боксы - D_init, вес бокса - среднее перекрытие по итерациям уточнения 2..T+2
(все выполненные, кроме первой).
"""

from typing import List

import numpy as np

from branches.detection import detect_on_boxes
from branches.scorers import BoxScorer
from geometry.boxes import boxes_to_array
from models.geometry_models import Detection
from models.pool_models import AnnotationOutcome, PseudoBox, RejectionReason, SemiStrongEntry
from models.world_models import SceneRecord
from pseudogen.matching import average_overlap, converged
from utils.logger import get_logger

logger = get_logger(__name__)

STABLE_ITERATIONS = 3


def _reject(scene: SceneRecord, reason: RejectionReason, iterations: int) -> AnnotationOutcome:
    logger.debug(f"Изображение {scene.id}: отказ ({reason.value}) после {iterations} итераций")
    return AnnotationOutcome(image_id=scene.id, rejection=reason, iterations_run=iterations)


def generate_annotation(scene: SceneRecord, scorer: BoxScorer, max_iters: int = 30,
                        score_threshold: float = 0.5, nms_threshold: float = 0.5,
                        epoch: int = 0) -> AnnotationOutcome:
    """
    Псевдо-разметка одного weak-изображения на read-only снимке модели.
    Детерминирована при фиксированных (scene, scorer).
    """
    labels = list(scene.labels)

    def step(boxes: np.ndarray) -> List[Detection]:
        return detect_on_boxes(scene, boxes, scorer, score_threshold, nms_threshold, allowed_classes=labels)

    initial = step(scene.proposals.boxes)
    if not initial:
        return _reject(scene, RejectionReason.NO_DETECTIONS, 0)

    previous = initial
    history: List[List[Detection]] = []
    counter = 0
    iterations_to_converge = None
    for t in range(1, max_iters + 1):
        current = step(boxes_to_array(d.box for d in previous))
        if not current:
            return _reject(scene, RejectionReason.NO_DETECTIONS, t)
        history.append(current)
        if converged(current, previous):
            counter += 1
            if counter == STABLE_ITERATIONS:
                iterations_to_converge = t + 1 - counter
                break
        else:
            counter = 0
        previous = current

    if iterations_to_converge is None:
        return _reject(scene, RejectionReason.NO_CONVERGENCE, max_iters)
    if sorted({d.class_id for d in initial}) != labels:
        return _reject(scene, RejectionReason.CLASS_MISMATCH, len(history))

    # первая итерация уточнения в вес не входит: окно 2..T+2
    weights = average_overlap(initial, history[1:])
    entry = SemiStrongEntry(
        image_id=scene.id,
        boxes=[PseudoBox(class_id=d.class_id, box=d.box, weight=float(w), score=d.score)
               for d, w in zip(initial, weights)],
        iterations_to_converge=iterations_to_converge,
        epoch=epoch,
    )
    return AnnotationOutcome(image_id=scene.id, entry=entry, iterations_run=len(history))
