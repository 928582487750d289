"""
Оценщики боксов: по набору боксов изображения возвращают вероятности классов
(C+1, N) и смещения регрессии (4C, N). Используются в detect() и в генераторе
псевдо-разметки.
"""

from typing import Optional, Protocol, Tuple

import numpy as np

from geometry.boxes import iou_matrix
from geometry.coder import encode_array
from models.train_models import Branch
from models.world_models import SceneRecord
from netcore.heads import oam_forward, supervised_forward
from netcore.params import ModelParams
from netcore.pooling import FeaturePooler


class BoxScorer(Protocol):
    num_classes: int

    def score_boxes(self, scene: SceneRecord, boxes: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        ...


class BranchScorer:
    """Оценщик на параметрах модели: классификация и регрессия выбранной ветви"""

    def __init__(self, params: ModelParams, branch: Branch = Branch.SUPERVISED,
                 pooler: Optional[FeaturePooler] = None):
        self.params = params
        self.branch = branch
        self.pooler = pooler or FeaturePooler(params.pool_size)
        self.num_classes = params.num_classes

    def score_boxes(self, scene: SceneRecord, boxes: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        features = self.pooler.pool(scene, boxes)
        if self.branch == Branch.OAM:
            out = oam_forward(self.params, features)
        else:
            out = supervised_forward(self.params, features)
        return out.cls_probs, out.reg


class OracleScorer:
    """
    Замороженный идеальный детектор: бокс с IoU >= fg_iou к GT получает
    вероятность 1 класса этого GT и смещение ровно в GT; остальные - фон.
    """

    def __init__(self, num_classes: int, fg_iou: float = 0.5):
        self.num_classes = num_classes
        self.fg_iou = fg_iou

    def score_boxes(self, scene: SceneRecord, boxes: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        boxes = np.asarray(boxes, dtype=np.float64).reshape(-1, 4)
        n = boxes.shape[0]
        C = self.num_classes
        probs = np.zeros((C + 1, n))
        probs[0] = 1.0
        deltas = np.zeros((4 * C, n))
        gt = scene.gt_array()
        if gt.shape[0] == 0 or n == 0:
            return probs, deltas
        overlaps = iou_matrix(boxes, gt)
        best = np.argmax(overlaps, axis=1)
        hit = np.flatnonzero(overlaps[np.arange(n), best] >= self.fg_iou)
        classes = scene.gt_classes()[best[hit]]
        probs[0, hit] = 0.0
        probs[classes + 1, hit] = 1.0
        offsets = encode_array(boxes[hit], gt[best[hit]])
        for i in range(4):
            deltas[4 * classes + i, hit] = offsets[:, i]
        return probs, deltas
