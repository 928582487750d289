"""
Кодирование смещений боксов в параметризации R-CNN:
t_x = (x - x_a) / w_a, t_y = (y - y_a) / h_a, t_h = log(h / h_a), t_w = log(w / w_a).
Порядок компонент во всех массивах: (t_x, t_y, t_h, t_w).
"""

import math

import numpy as np

from models.geometry_models import Box, Offset

# Ограничение лог-масштаба при декодировании предсказаний (как в Fast R-CNN)
LOG_SCALE_CLIP = math.log(1000.0 / 16.0)


def _centers(boxes: np.ndarray):
    w = boxes[:, 2] - boxes[:, 0]
    h = boxes[:, 3] - boxes[:, 1]
    return boxes[:, 0] + 0.5 * w, boxes[:, 1] + 0.5 * h, w, h


def encode_array(anchors: np.ndarray, targets: np.ndarray) -> np.ndarray:
    """(N, 4) якоря и цели -> (N, 4) смещения"""
    anchors = np.asarray(anchors, dtype=np.float64).reshape(-1, 4)
    targets = np.asarray(targets, dtype=np.float64).reshape(-1, 4)
    ax, ay, aw, ah = _centers(anchors)
    gx, gy, gw, gh = _centers(targets)
    return np.stack([(gx - ax) / aw, (gy - ay) / ah, np.log(gh / ah), np.log(gw / aw)], axis=1)


def decode_array(anchors: np.ndarray, deltas: np.ndarray) -> np.ndarray:
    """(N, 4) якоря и смещения -> (N, 4) боксы; ширина и высота всегда положительны"""
    anchors = np.asarray(anchors, dtype=np.float64).reshape(-1, 4)
    deltas = np.asarray(deltas, dtype=np.float64).reshape(-1, 4)
    ax, ay, aw, ah = _centers(anchors)
    cx = ax + deltas[:, 0] * aw
    cy = ay + deltas[:, 1] * ah
    h = ah * np.exp(np.minimum(deltas[:, 2], LOG_SCALE_CLIP))
    w = aw * np.exp(np.minimum(deltas[:, 3], LOG_SCALE_CLIP))
    return np.stack([cx - 0.5 * w, cy - 0.5 * h, cx + 0.5 * w, cy + 0.5 * h], axis=1)


def encode_offset(anchor: Box, target: Box) -> Offset:
    return Offset.from_array(encode_array(anchor.as_array(), target.as_array())[0])


def decode_offset(anchor: Box, t: Offset) -> Box:
    return Box.from_array(decode_array(anchor.as_array(), t.as_array())[0])
