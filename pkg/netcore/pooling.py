"""
ROI pooling: S x S усреднение по области бокса.
Ячейка (i, j) содержит поканальное среднее пикселей, чьи центры попали в ячейку;
пустая ячейка берёт значение ближайшего к её центру пикселя.
Суммы считаются по интегральному изображению, поэтому бокс обрабатывается за O(S^2).
"""

from typing import Dict, Optional

import numpy as np

from geometry.boxes import clip_boxes_array, valid_mask
from models.geometry_models import Box
from models.world_models import SceneRecord
from utils.errors import DegenerateBoxError


def integral_image(grid: np.ndarray) -> np.ndarray:
    """(H + 1, W + 1, C) кумулятивные суммы с нулевой первой строкой и столбцом"""
    height, width, channels = grid.shape
    ii = np.zeros((height + 1, width + 1, channels), dtype=np.float64)
    ii[1:, 1:, :] = grid.cumsum(axis=0).cumsum(axis=1)
    return ii


def _cell_ranges(lo: np.ndarray, hi: np.ndarray, size: int, cells: int):
    """Полуинтервалы индексов пикселей [start, stop) для каждой ячейки вдоль одной оси"""
    edges = lo[:, None] + (hi - lo)[:, None] * (np.arange(cells + 1) / cells)[None, :]
    start = np.clip(np.ceil(edges[:, :-1] - 0.5), 0, size).astype(np.int64)
    stop = np.clip(np.ceil(edges[:, 1:] - 0.5), 0, size).astype(np.int64)
    empty = stop <= start
    if np.any(empty):
        mid = 0.5 * (edges[:, :-1] + edges[:, 1:])
        nearest = np.clip(np.floor(mid), 0, size - 1).astype(np.int64)
        start = np.where(empty, nearest, start)
        stop = np.where(empty, nearest + 1, stop)
    return start, stop


def roi_pool_batch(grid: np.ndarray, boxes: np.ndarray, pool_size: int = 3,
                   integral: Optional[np.ndarray] = None) -> np.ndarray:
    """
    (N, 4) боксы -> (N, S*S*C_ch) признаки, порядок (i, j, канал).
    Боксы обрезаются по сетке; вырожденный после обрезки бокс - ошибка.
    """
    height, width, channels = grid.shape
    boxes = clip_boxes_array(boxes, height, width)
    degenerate = ~valid_mask(boxes)
    if np.any(degenerate):
        bad = boxes[np.flatnonzero(degenerate)[0]].tolist()
        raise DegenerateBoxError(f"Бокс {bad} вырожден после обрезки по сетке {height}x{width}")
    if integral is None:
        integral = integral_image(grid)

    r0, r1 = _cell_ranges(boxes[:, 1], boxes[:, 3], height, pool_size)
    c0, c1 = _cell_ranges(boxes[:, 0], boxes[:, 2], width, pool_size)
    R0, R1 = r0[:, :, None], r1[:, :, None]
    C0, C1 = c0[:, None, :], c1[:, None, :]
    sums = integral[R1, C1] - integral[R0, C1] - integral[R1, C0] + integral[R0, C0]
    counts = ((R1 - R0) * (C1 - C0)).astype(np.float64)
    means = sums / counts[..., None]
    return means.reshape(boxes.shape[0], pool_size * pool_size * channels)


def roi_pool(grid: np.ndarray, box: Box, pool_size: int = 3) -> np.ndarray:
    return roi_pool_batch(grid, box.as_array()[None, :], pool_size)[0]


class FeaturePooler:
    """
    ROI pooling по сценам с кешем интегральных изображений.
    Кеш ограничен, при переполнении очищается целиком.
    """

    def __init__(self, pool_size: int = 3, max_cached: int = 4096):
        self.pool_size = pool_size
        self.max_cached = max_cached
        self._integrals: Dict[int, np.ndarray] = {}

    def _integral(self, scene: SceneRecord) -> np.ndarray:
        cached = self._integrals.get(scene.id)
        if cached is None:
            if len(self._integrals) >= self.max_cached:
                self._integrals.clear()
            cached = integral_image(scene.grid)
            self._integrals[scene.id] = cached
        return cached

    def pool(self, scene: SceneRecord, boxes: np.ndarray) -> np.ndarray:
        return roi_pool_batch(scene.grid, boxes, self.pool_size, self._integral(scene))
