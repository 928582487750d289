from typing import List

import numpy as np

from geometry.boxes import boxes_to_array, iou_matrix
from models.geometry_models import Detection


def score_order(scores: np.ndarray) -> np.ndarray:
    """Индексы по убыванию скора; при равенстве - по возрастанию индекса"""
    scores = np.asarray(scores, dtype=np.float64)
    return np.lexsort((np.arange(len(scores)), -scores))


def nms_indices(boxes: np.ndarray, scores: np.ndarray, iou_threshold: float = 0.5) -> List[int]:
    """
    Жадный NMS для боксов одного класса.
    Подавляется всё, что перекрывается с оставленным боксом с IoU > iou_threshold.
    """
    order = score_order(scores)
    if order.size == 0:
        return []
    overlaps = iou_matrix(boxes, boxes)
    keep = []
    suppressed = np.zeros(len(order), dtype=bool)
    for i in order:
        if suppressed[i]:
            continue
        keep.append(int(i))
        suppressed |= overlaps[i] > iou_threshold
    return keep


def nms(dets: List[Detection], iou_threshold: float = 0.5) -> List[Detection]:
    """
    Поклассовый жадный NMS.
    Результат отсортирован по убыванию скора (стабильно по исходному индексу).
    """
    if not 0.0 < iou_threshold < 1.0:
        raise ValueError(f"iou_threshold must be in (0, 1), got {iou_threshold}")
    if not dets:
        return []
    boxes = boxes_to_array(d.box for d in dets)
    scores = np.array([d.score for d in dets], dtype=np.float64)
    classes = np.array([d.class_id for d in dets])
    kept: List[int] = []
    for cls in np.unique(classes):
        idx = np.flatnonzero(classes == cls)
        kept.extend(int(idx[k]) for k in nms_indices(boxes[idx], scores[idx], iou_threshold))
    kept_arr = np.array(sorted(kept))
    ordered = kept_arr[score_order(scores[kept_arr])]
    return [dets[i] for i in ordered]
