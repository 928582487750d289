"""
Сопоставление наборов детекций между итерациями: тест сходимости и
вес бокса как среднее перекрытие.
"""

from typing import List, Sequence

import numpy as np

from geometry.boxes import boxes_to_array, iou_matrix
from models.geometry_models import Detection

MATCH_IOU = 0.5


def _same_class_iou(a: Sequence[Detection], b: Sequence[Detection]) -> np.ndarray:
    """IoU (|a|, |b|), занулённый для пар разных классов"""
    if not a or not b:
        return np.zeros((len(a), len(b)))
    overlaps = iou_matrix(boxes_to_array(d.box for d in a), boxes_to_array(d.box for d in b))
    same = np.array([d.class_id for d in a])[:, None] == np.array([d.class_id for d in b])[None, :]
    return np.where(same, overlaps, 0.0)


def converged(current: Sequence[Detection], previous: Sequence[Detection],
              iou_threshold: float = MATCH_IOU) -> bool:
    """
    D_t == D_{t-1}: одинаковый размер и взаимно-однозначное жадное сопоставление
    (по убыванию IoU, только совпадающие классы), покрывающее все боксы с IoU >= 0.5.
    """
    if len(current) != len(previous):
        return False
    if not current:
        return True
    overlaps = _same_class_iou(current, previous)
    rows, cols = np.nonzero(overlaps >= iou_threshold)
    order = np.lexsort((cols, rows, -overlaps[rows, cols]))
    used_rows, used_cols = set(), set()
    for k in order:
        r, c = int(rows[k]), int(cols[k])
        if r in used_rows or c in used_cols:
            continue
        used_rows.add(r)
        used_cols.add(c)
    return len(used_rows) == len(current)


def average_overlap(initial: Sequence[Detection], history: List[Sequence[Detection]],
                    iou_threshold: float = MATCH_IOU) -> np.ndarray:
    """
    Вес каждого бокса initial: среднее по итерациям history лучшего IoU с боксом
    того же класса; если лучший IoU < 0.5, итерация даёт 0.
    """
    if not history:
        raise ValueError("average_overlap requires a non-empty history")
    weights = np.zeros(len(initial))
    for dets in history:
        overlaps = _same_class_iou(initial, dets)
        best = overlaps.max(axis=1) if overlaps.shape[1] else np.zeros(len(initial))
        weights += np.where(best >= iou_threshold, best, 0.0)
    return np.clip(weights / len(history), 0.0, 1.0)
