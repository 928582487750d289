"""
Инференс: вероятности -> детекции -> поклассовый NMS -> top max_dets.
"""

from typing import List, Optional, Sequence, Union

import numpy as np

from geometry.boxes import clip_boxes_array, valid_mask
from geometry.coder import decode_array
from geometry.nms import nms
from models.geometry_models import Box, Detection
from models.train_models import Branch
from models.world_models import SceneRecord
from netcore.params import ModelParams
from branches.scorers import BoxScorer, BranchScorer


def detections_from_scores(boxes: np.ndarray, probs: np.ndarray, deltas: np.ndarray,
                           height: int, width: int, score_threshold: float,
                           allowed_classes: Optional[Sequence[int]] = None) -> List[Detection]:
    """
    Детекция на каждую пару (бокс, foreground-класс) со скором >= score_threshold:
    бокс декодируется смещениями этого класса и обрезается по сетке.
    Порядок: по боксу, затем по классу; вырожденные после обрезки пропускаются.
    """
    boxes = np.asarray(boxes, dtype=np.float64).reshape(-1, 4)
    fg_probs = probs[1:]  # (C, N)
    mask = fg_probs >= score_threshold
    if allowed_classes is not None:
        allowed = np.zeros(fg_probs.shape[0], dtype=bool)
        allowed[list(allowed_classes)] = True
        mask &= allowed[:, None]
    box_idx, cls_idx = np.nonzero(mask.T)
    if box_idx.size == 0:
        return []
    rows = 4 * cls_idx[:, None] + np.arange(4)[None, :]
    decoded = decode_array(boxes[box_idx], deltas[rows, box_idx[:, None]])
    decoded = clip_boxes_array(decoded, height, width)
    ok = valid_mask(decoded)
    scores = np.clip(fg_probs[cls_idx, box_idx], 0.0, 1.0)
    return [
        Detection(class_id=int(c), box=Box.from_array(b), score=float(s))
        for c, b, s, keep in zip(cls_idx, decoded, scores, ok) if keep
    ]


def detect_on_boxes(scene: SceneRecord, boxes: np.ndarray, scorer: BoxScorer, score_threshold: float,
                    nms_threshold: float, allowed_classes: Optional[Sequence[int]] = None) -> List[Detection]:
    """Один шаг детектора на произвольном наборе боксов (без ограничения max_dets)"""
    height, width = scene.grid.shape[:2]
    probs, deltas = scorer.score_boxes(scene, boxes)
    dets = detections_from_scores(boxes, probs, deltas, height, width, score_threshold, allowed_classes)
    return nms(dets, nms_threshold)


def detect(scene: SceneRecord, model: Union[ModelParams, BoxScorer], score_threshold: float = 0.05,
           nms_threshold: float = 0.5, max_dets: int = 100,
           branch: Branch = Branch.SUPERVISED) -> List[Detection]:
    """
    Детекции изображения на его пропозалах. По умолчанию - вторая ветвь
    (единственная, используемая на тесте); branch=OAM даёт выход первой ветви.
    """
    scorer = BranchScorer(model, branch) if isinstance(model, ModelParams) else model
    return detect_on_boxes(scene, scene.proposals.boxes, scorer, score_threshold, nms_threshold)[:max_dets]
