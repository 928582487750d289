"""
Вторая ветвь - fully supervised детектор в стиле Fast R-CNN.
Обучается на strong и semi-strong изображениях; на тесте используется только она.
"""

from typing import List, Optional

import numpy as np

from losses.supervised_loss import l2b_loss
from losses.targets import assign_targets, sample_proposals
from models.pool_models import SemiStrongEntry
from models.train_models import TrainConfig
from models.world_models import SceneRecord
from netcore.graph import LossGraph
from netcore.heads import supervised_forward
from netcore.params import ModelParams
from netcore.pooling import FeaturePooler
from pseudogen.pool import SemiStrongPool
from utils.errors import MissingSemiStrongEntryError
from utils.logger import get_logger

logger = get_logger(__name__)


def semi_strong_targets(scene: SceneRecord, entry: SemiStrongEntry, fg_iou: float):
    """Цели по псевдо-боксам и веса omega (вес сопоставленного псевдо-бокса, фон - 1)"""
    pseudo_boxes = np.array([[b.box.x1, b.box.y1, b.box.x2, b.box.y2] for b in entry.boxes]).reshape(-1, 4)
    pseudo_classes = np.array([b.class_id for b in entry.boxes], dtype=np.int64)
    pseudo_weights = np.array([b.weight for b in entry.boxes], dtype=np.float64)
    targets = assign_targets(scene.proposals.boxes, pseudo_boxes, pseudo_classes, fg_iou)
    omega = np.ones(len(targets))
    fg = targets.foreground
    omega[fg] = pseudo_weights[targets.matched[fg]]
    return targets, omega


class SupervisedBranch:
    """Считает L_2B по батчу strong + semi-strong изображений"""

    def __init__(self, cfg: TrainConfig, pooler: FeaturePooler):
        self.cfg = cfg
        self.pooler = pooler
        self.stats = {"missing_fg_warnings": 0}

    def image_loss(self, params: ModelParams, scene: SceneRecord, entry: Optional[SemiStrongEntry],
                   graph: LossGraph, rng: Optional[np.random.Generator]) -> float:
        if scene.is_strong:
            targets = assign_targets(scene.proposals.boxes, scene.gt_array(), scene.gt_classes(), self.cfg.fg_iou)
            omega = np.ones(len(targets))
            image_weight, with_regression, term = 1.0, True, "strong"
        else:
            if entry is None:
                raise MissingSemiStrongEntryError(f"Нет записи пула для semi-strong изображения {scene.id}")
            targets, omega = semi_strong_targets(scene, entry, self.cfg.fg_iou)
            image_weight, with_regression, term = entry.global_weight, False, "semi_strong"

        if rng is None:
            idx = np.arange(len(targets))
        else:
            idx = sample_proposals(targets, self.cfg.proposal_batch, self.cfg.fg_fraction, rng)
        out = supervised_forward(params, self.pooler.pool(scene, scene.proposals.boxes[idx]))
        result = l2b_loss(out.cls_probs, out.reg, targets.subset(idx), omega[idx], image_weight,
                          with_regression, self.cfg.log_eps)
        if scene.is_strong and result.num_foreground == 0:
            self.stats["missing_fg_warnings"] += 1
        graph.add_loss(term, result.value)
        graph.attach(out, d_cls_logits=result.d_cls_logits, d_reg=result.d_reg)
        return result.value

    def branch_loss(self, params: ModelParams, strong: List[SceneRecord], semi_strong: List[SceneRecord],
                    pool: SemiStrongPool, graph: LossGraph, rng: Optional[np.random.Generator]) -> float:
        total = 0.0
        for scene in strong:
            total += self.image_loss(params, scene, None, graph, rng)
        for scene in semi_strong:
            total += self.image_loss(params, scene, pool.get(scene.id), graph, rng)
        return total
