"""
Назначение целей пропозалам (стандартная схема Fast R-CNN) и сэмплинг батча.
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np

from geometry.boxes import iou_matrix
from geometry.coder import encode_array


@dataclass
class ProposalTargets:
    """
    labels: (M,) цель класса u в [0, C], 0 - фон;
    offsets: (M, 4) цели регрессии v (нули для фона);
    matched: (M,) индекс сопоставленного GT, -1 для фона;
    max_iou: (M,) лучший IoU с GT.
    """
    labels: np.ndarray
    offsets: np.ndarray
    matched: np.ndarray
    max_iou: np.ndarray

    def __len__(self) -> int:
        return int(self.labels.shape[0])

    @property
    def foreground(self) -> np.ndarray:
        return self.labels >= 1

    def subset(self, idx: np.ndarray) -> "ProposalTargets":
        return ProposalTargets(self.labels[idx], self.offsets[idx], self.matched[idx], self.max_iou[idx])


def assign_targets(proposals: np.ndarray, gt_boxes: np.ndarray, gt_classes: np.ndarray,
                   fg_iou: float = 0.5) -> ProposalTargets:
    """
    Пропозал сопоставляется GT с максимальным IoU (при равенстве - с меньшим индексом);
    foreground, если этот IoU >= fg_iou. Классы GT - индексы foreground в [0, C).
    """
    proposals = np.asarray(proposals, dtype=np.float64).reshape(-1, 4)
    if proposals.shape[0] == 0:
        raise ValueError("assign_targets requires at least one proposal")
    gt_boxes = np.asarray(gt_boxes, dtype=np.float64).reshape(-1, 4)
    gt_classes = np.asarray(gt_classes, dtype=np.int64).reshape(-1)
    m = proposals.shape[0]
    labels = np.zeros(m, dtype=np.int64)
    offsets = np.zeros((m, 4), dtype=np.float64)
    matched = np.full(m, -1, dtype=np.int64)
    if gt_boxes.shape[0] == 0:
        return ProposalTargets(labels, offsets, matched, np.zeros(m))

    overlaps = iou_matrix(proposals, gt_boxes)
    best = np.argmax(overlaps, axis=1)  # argmax берёт первый максимум
    max_iou = overlaps[np.arange(m), best]
    fg = max_iou >= fg_iou
    labels[fg] = gt_classes[best[fg]] + 1
    matched[fg] = best[fg]
    if np.any(fg):
        offsets[fg] = encode_array(proposals[fg], gt_boxes[best[fg]])
    return ProposalTargets(labels, offsets, matched, max_iou)


def sample_proposals(targets: ProposalTargets, batch_size: int, fg_fraction: float,
                     rng: Optional[np.random.Generator]) -> np.ndarray:
    """
    Индексы батча: до floor(fg_fraction * batch_size) foreground, остальное - фон.
    Без rng берутся первые по порядку (детерминированные тесты).
    """
    fg_idx = np.flatnonzero(targets.foreground)
    bg_idx = np.flatnonzero(~targets.foreground)
    n_fg = min(len(fg_idx), int(np.floor(fg_fraction * batch_size)))
    n_bg = min(len(bg_idx), batch_size - n_fg)
    if rng is not None:
        fg_idx = rng.permutation(fg_idx)
        bg_idx = rng.permutation(bg_idx)
    return np.sort(np.concatenate([fg_idx[:n_fg], bg_idx[:n_bg]])).astype(np.int64)
