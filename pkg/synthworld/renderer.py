"""
Рендер сетки признаков: каждый объект закрашивается сигнатурой своего класса
(поканальный вектор), фон - своей сигнатурой, поверх - i.i.d. шум sigma.
Объекты рисуются в порядке размещения, поздние перекрывают ранние.
"""

import math
from typing import List

import numpy as np

from models.geometry_models import GroundTruthObject
from models.world_models import WorldConfig


def class_signatures(num_classes: int, channels: int, scale: float = 1.0) -> np.ndarray:
    """
    (C, C_ch) сигнатуры классов. Точки лежат на окружности вокруг фоновой
    сигнатуры, поэтому каждый класс линейно отделим от остальных и от фона.
    """
    period = max(channels, 3)
    sig = np.empty((num_classes, channels), dtype=np.float64)
    for c in range(num_classes):
        theta = 2.0 * math.pi * c / num_classes
        for k in range(channels):
            sig[c, k] = math.cos(theta + 2.0 * math.pi * k / period)
    norms = np.linalg.norm(sig, axis=1, keepdims=True)
    return scale * sig / norms


def background_signature(channels: int) -> np.ndarray:
    return np.zeros(channels, dtype=np.float64)


def render(cfg: WorldConfig, objects: List[GroundTruthObject], rng: np.random.Generator) -> np.ndarray:
    """Сетка (H, W, C_ch) для размещённых объектов"""
    signatures = class_signatures(cfg.num_classes, cfg.channels, cfg.signature_scale)
    grid = np.broadcast_to(background_signature(cfg.channels), (cfg.height, cfg.width, cfg.channels)).copy()
    for obj in objects:
        b = obj.box
        grid[int(b.y1):int(b.y2), int(b.x1):int(b.x2), :] = signatures[obj.class_id]
    sigma = cfg.effective_noise()
    if sigma > 0.0:
        grid += sigma * rng.standard_normal(grid.shape)
    return grid
