"""
Первая ветвь - Online Annotation Module.

Потеря ветви: L_1B = L_Is^I + L_Iw^I + L_Is^II + L_Iw^II
- strong-изображения: L_p + L_gc в обоих проходах;
- weak-изображения: только L_gc в обоих проходах;
- BBA=off отключает второй проход.
"""

from typing import Dict, List, Optional, Sequence

import numpy as np

from geometry.boxes import clip_boxes_array, valid_mask
from geometry.coder import decode_array
from losses.oam_losses import image_level_loss, image_level_loss_grad, proposal_loss
from losses.targets import assign_targets, sample_proposals
from models.train_models import TrainConfig
from models.world_models import SceneRecord
from netcore.graph import LossGraph
from netcore.heads import OamOutput, oam_forward
from netcore.params import ModelParams
from netcore.pooling import FeaturePooler
from utils.logger import get_logger

logger = get_logger(__name__)

OAM_TERMS = ("strong_first", "weak_first", "strong_second", "weak_second")


def select_second_pass_boxes(first: OamOutput, proposals: np.ndarray, labels: Sequence[int],
                             m_top: int, height: int, width: int) -> np.ndarray:
    """
    Для каждого класса метки - m_top пропозалов с наибольшим phi_P (стабильно по индексу),
    сдвинутых смещениями этого класса и обрезанных по сетке. Вырожденные отбрасываются.
    """
    moved = []
    num_proposals = first.num_proposals
    for c in labels:
        order = np.lexsort((np.arange(num_proposals), -first.phi[c]))[:min(m_top, num_proposals)]
        deltas = first.reg[4 * c:4 * c + 4, order].T
        moved.append(decode_array(proposals[order], deltas))
    if not moved:
        return np.zeros((0, 4))
    boxes = clip_boxes_array(np.concatenate(moved, axis=0), height, width)
    return boxes[valid_mask(boxes)]


class OamBranch:
    """
    Считает L_1B по батчу и регистрирует градиенты в графе лосса.
    Сдвинутые боксы второго прохода - константы для дифференцирования.
    """

    def __init__(self, cfg: TrainConfig, pooler: FeaturePooler):
        self.cfg = cfg
        self.pooler = pooler
        self.stats = {"missing_fg_warnings": 0, "degenerate_second_pass": 0}

    def _image_level_term(self, out: OamOutput, scene: SceneRecord, graph: LossGraph, term: str) -> float:
        y = scene.label_vector(out.alpha.shape[0])
        value = image_level_loss(out.alpha, y, self.cfg.log_eps)
        graph.add_loss(term, value)
        graph.attach(out, d_alpha=image_level_loss_grad(out.alpha, y, self.cfg.log_eps))
        return value

    def _proposal_term(self, out: OamOutput, scene: SceneRecord, boxes: np.ndarray, graph: LossGraph,
                       term: str, rng: Optional[np.random.Generator]) -> float:
        targets = assign_targets(boxes, scene.gt_array(), scene.gt_classes(), self.cfg.fg_iou)
        if rng is None:
            idx = np.arange(len(targets))
        else:
            idx = sample_proposals(targets, self.cfg.proposal_batch, self.cfg.fg_fraction, rng)
        result = proposal_loss(out.cls_probs[:, idx], out.reg[:, idx], targets.subset(idx), self.cfg.log_eps)
        if result.num_foreground == 0:
            self.stats["missing_fg_warnings"] += 1
            logger.debug(f"Strong-изображение {scene.id}: нет foreground в батче ({term}), L_reg = 0")
        d_cls = np.zeros_like(out.cls_logits)
        d_reg = np.zeros_like(out.reg)
        d_cls[:, idx] = result.d_cls_logits
        d_reg[:, idx] = result.d_reg
        graph.add_loss(term, result.value)
        graph.attach(out, d_cls_logits=d_cls, d_reg=d_reg)
        return result.value

    def first_pass(self, params: ModelParams, scene: SceneRecord, graph: LossGraph,
                   rng: Optional[np.random.Generator]) -> OamOutput:
        """Проход I по всем пропозалам изображения"""
        boxes = scene.proposals.boxes
        out = oam_forward(params, self.pooler.pool(scene, boxes))
        term = "strong_first" if scene.is_strong else "weak_first"
        self._image_level_term(out, scene, graph, term)
        if scene.is_strong:
            self._proposal_term(out, scene, boxes, graph, term, rng)
        return out

    def second_pass(self, params: ModelParams, scene: SceneRecord, first: OamOutput, graph: LossGraph) -> float:
        """
        Проход II: top-M по phi_P для каждого класса метки, сдвиг смещениями,
        повторный ROI pooling и те же потери на новых признаках.
        Для strong-изображений цели назначаются заново на сдвинутых боксах; батч - все сдвинутые боксы.
        """
        height, width = scene.grid.shape[:2]
        boxes = select_second_pass_boxes(first, scene.proposals.boxes, scene.labels,
                                         self.cfg.second_pass_top, height, width)
        if boxes.shape[0] == 0:
            self.stats["degenerate_second_pass"] += 1
            logger.debug(f"Изображение {scene.id}: все боксы второго прохода вырождены")
            return 0.0
        out = oam_forward(params, self.pooler.pool(scene, boxes))
        term = "strong_second" if scene.is_strong else "weak_second"
        value = self._image_level_term(out, scene, graph, term)
        if scene.is_strong:
            value += self._proposal_term(out, scene, boxes, graph, term, None)
        return value

    def branch_loss(self, params: ModelParams, batch: List[SceneRecord], graph: LossGraph,
                    rng: Optional[np.random.Generator]) -> Dict[str, float]:
        """L_1B по батчу; возвращает четыре слагаемых"""
        before = {k: graph.breakdown.get(k, 0.0) for k in OAM_TERMS}
        for scene in batch:
            first = self.first_pass(params, scene, graph, rng)
            if self.cfg.flags.bbox_augmentation:
                self.second_pass(params, scene, first, graph)
        return {k: graph.breakdown.get(k, 0.0) - before[k] for k in OAM_TERMS}
