"""
Имитация генератора пропозалов: доля fg_fraction - зашумлённые GT-боксы,
остальное - равномерно случайные боксы внутри сетки.
"""

import numpy as np

from geometry.boxes import clip_boxes_array, valid_mask
from models.world_models import ProposalSet, SceneRecord

MIN_RANDOM_SIDE = 4.0


def propose_boxes(gt_boxes: np.ndarray, height: int, width: int, num_proposals: int,
                  jitter: float, fg_fraction: float, rng: np.random.Generator) -> np.ndarray:
    """
    (B, 4) пропозалы для одного изображения.
    Шум координат пропорционален jitter * размер бокса; при jitter = 0
    зашумлённые пропозалы совпадают с GT.
    """
    if num_proposals < 8:
        raise ValueError(f"num_proposals must be >= 8, got {num_proposals}")
    gt_boxes = np.asarray(gt_boxes, dtype=np.float64).reshape(-1, 4)
    n_gt = gt_boxes.shape[0]
    n_fg = 0
    if n_gt:
        n_fg = min(num_proposals, max(int(round(fg_fraction * num_proposals)), n_gt))

    jittered = np.empty((n_fg, 4), dtype=np.float64)
    for i in range(n_fg):
        gt = gt_boxes[i % n_gt]
        size = np.array([gt[2] - gt[0], gt[3] - gt[1]] * 2)
        candidate = gt + jitter * size * rng.standard_normal(4)
        candidate = clip_boxes_array(candidate, height, width)[0]
        if not valid_mask(candidate[None, :], min_side=1.0)[0]:
            candidate = gt.copy()
        jittered[i] = candidate

    n_rand = num_proposals - n_fg
    w = rng.uniform(MIN_RANDOM_SIDE, width, size=n_rand)
    h = rng.uniform(MIN_RANDOM_SIDE, height, size=n_rand)
    x1 = rng.uniform(0.0, 1.0, size=n_rand) * (width - w)
    y1 = rng.uniform(0.0, 1.0, size=n_rand) * (height - h)
    random_boxes = np.stack([x1, y1, x1 + w, y1 + h], axis=1)
    return np.concatenate([jittered, random_boxes], axis=0)


def propose(scene: SceneRecord, num_proposals: int, jitter: float, fg_fraction: float,
            rng: np.random.Generator) -> ProposalSet:
    height, width = scene.grid.shape[:2]
    boxes = propose_boxes(scene.gt_array(), height, width, num_proposals, jitter, fg_fraction, rng)
    return ProposalSet(image_id=scene.id, boxes=boxes)
