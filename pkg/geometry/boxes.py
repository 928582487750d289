from typing import Iterable, Tuple

import numpy as np

from models.geometry_models import Box
from utils.errors import DegenerateBoxError


def boxes_to_array(boxes: Iterable[Box]) -> np.ndarray:
    """Список Box -> массив (N, 4) углов"""
    arr = np.array([[b.x1, b.y1, b.x2, b.y2] for b in boxes], dtype=np.float64)
    return arr.reshape(-1, 4)


def iou(a: Box, b: Box) -> float:
    """
    Intersection-over-union двух боксов.
    Симметрична, 0 для непересекающихся, 1 только для совпадающих.
    """
    iw = min(a.x2, b.x2) - max(a.x1, b.x1)
    ih = min(a.y2, b.y2) - max(a.y1, b.y1)
    if iw <= 0.0 or ih <= 0.0:
        return 0.0
    inter = iw * ih
    return float(inter / (a.area + b.area - inter))


def iou_matrix(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Попарный IoU для массивов (N, 4) и (M, 4) -> (N, M)"""
    a = np.asarray(a, dtype=np.float64).reshape(-1, 4)
    b = np.asarray(b, dtype=np.float64).reshape(-1, 4)
    xx1 = np.maximum(a[:, None, 0], b[None, :, 0])
    yy1 = np.maximum(a[:, None, 1], b[None, :, 1])
    xx2 = np.minimum(a[:, None, 2], b[None, :, 2])
    yy2 = np.minimum(a[:, None, 3], b[None, :, 3])
    inter = np.maximum(0.0, xx2 - xx1) * np.maximum(0.0, yy2 - yy1)
    area_a = (a[:, 2] - a[:, 0]) * (a[:, 3] - a[:, 1])
    area_b = (b[:, 2] - b[:, 0]) * (b[:, 3] - b[:, 1])
    union = area_a[:, None] + area_b[None, :] - inter
    return np.where(inter > 0.0, inter / np.maximum(union, 1e-12), 0.0)


def clip_boxes_array(boxes: np.ndarray, height: int, width: int) -> np.ndarray:
    """Обрезает боксы (N, 4) по сетке [0, width] x [0, height]"""
    out = np.array(boxes, dtype=np.float64).reshape(-1, 4)
    out[:, [0, 2]] = np.clip(out[:, [0, 2]], 0.0, float(width))
    out[:, [1, 3]] = np.clip(out[:, [1, 3]], 0.0, float(height))
    return out


def valid_mask(boxes: np.ndarray, min_side: float = 1e-6) -> np.ndarray:
    """Маска невырожденных боксов"""
    boxes = np.asarray(boxes).reshape(-1, 4)
    return ((boxes[:, 2] - boxes[:, 0]) > min_side) & ((boxes[:, 3] - boxes[:, 1]) > min_side)


def clip_box(box: Box, height: int, width: int) -> Box:
    clipped = clip_boxes_array(box.as_array()[None, :], height, width)[0]
    if not valid_mask(clipped[None, :])[0]:
        raise DegenerateBoxError(f"Бокс {box.as_array().tolist()} выродился после обрезки по сетке {height}x{width}")
    return Box.from_array(clipped)


def grid_shape(grid: np.ndarray) -> Tuple[int, int]:
    return int(grid.shape[0]), int(grid.shape[1])
