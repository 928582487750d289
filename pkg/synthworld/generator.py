"""
Генератор синтетического датасета.

Логика генерации:
1. Размещение объектов (класс, размер, позиция) с ограничением взаимного IoU
2. Рендер сетки признаков
3. Генерация пропозалов
4. Жадное N-shot разбиение train на strong / weak
"""

from typing import Dict, List, Optional, Set

import numpy as np

from geometry.boxes import boxes_to_array, iou_matrix
from models.geometry_models import Box, GroundTruthObject
from models.world_models import Dataset, DatasetConfig, ProposalSet, SceneRecord, SupervisionTier, WorldConfig
from synthworld.proposals import propose_boxes
from synthworld.renderer import render
from utils.errors import InfeasibleSplitError
from utils.logger import get_logger

logger = get_logger(__name__)

MAX_PLACEMENT_ATTEMPTS = 50


def place_objects(cfg: WorldConfig, rng: np.random.Generator) -> List[GroundTruthObject]:
    """Размещает объекты сцены; объект, не уместившийся за MAX_PLACEMENT_ATTEMPTS попыток, пропускается"""
    n_objects = int(rng.integers(cfg.min_objects, cfg.effective_max_objects() + 1))
    overlap_cap = cfg.effective_max_overlap()
    placed: List[GroundTruthObject] = []
    for _ in range(n_objects):
        for _attempt in range(MAX_PLACEMENT_ATTEMPTS):
            cls = int(rng.integers(cfg.num_classes))
            w = int(rng.integers(cfg.min_side, cfg.max_side + 1))
            h = int(rng.integers(cfg.min_side, cfg.max_side + 1))
            x1 = int(rng.integers(0, cfg.width - w + 1))
            y1 = int(rng.integers(0, cfg.height - h + 1))
            box = Box(x1=x1, y1=y1, x2=x1 + w, y2=y1 + h)
            if placed:
                overlaps = iou_matrix(box.as_array()[None, :], boxes_to_array(o.box for o in placed))
                if np.any(overlaps > overlap_cap):
                    continue
            placed.append(GroundTruthObject(class_id=cls, box=box))
            break
    return placed


def make_scene(cfg: WorldConfig, scene_id: int, scene_rng: np.random.Generator,
               proposal_rng: np.random.Generator) -> SceneRecord:
    objects = place_objects(cfg, scene_rng)
    grid = render(cfg, objects, scene_rng)
    gt_boxes = boxes_to_array(o.box for o in objects)
    boxes = propose_boxes(gt_boxes, cfg.height, cfg.width, cfg.proposals_per_image,
                          cfg.proposal_jitter, cfg.proposal_fg_fraction, proposal_rng)
    return SceneRecord(
        id=scene_id,
        grid=grid,
        gt=objects,
        labels=sorted({o.class_id for o in objects}),
        tier=SupervisionTier.WEAK,
        proposals=ProposalSet(image_id=scene_id, boxes=boxes),
    )


def assign_shots(scenes: List[SceneRecord], num_classes: int, shots: int,
                 rng: Optional[np.random.Generator] = None) -> Set[int]:
    """
    Жадное N-shot разбиение: классы обходятся от самого редкого к самому частому,
    для каждого добираются strong-изображения, пока класс не покрыт shots раз.
    Изображение засчитывается каждому классу, который на нём есть.
    rng задаёт порядок кандидатов (фолды); без rng - порядок по id.
    """
    if shots * num_classes > len(scenes):
        raise InfeasibleSplitError(f"shots * C = {shots * num_classes} > n_train = {len(scenes)}")
    if shots == 0:
        return set()

    by_class: Dict[int, List[int]] = {c: [] for c in range(num_classes)}
    labels_of: Dict[int, List[int]] = {}
    for scene in scenes:
        labels_of[scene.id] = list(scene.labels)
        for c in scene.labels:
            by_class[c].append(scene.id)
    if rng is not None:
        for c in range(num_classes):
            by_class[c] = [by_class[c][i] for i in rng.permutation(len(by_class[c]))]

    strong: Set[int] = set()
    for c in sorted(range(num_classes), key=lambda k: (len(by_class[k]), k)):
        have = sum(1 for sid in strong if c in labels_of[sid])
        for sid in by_class[c]:
            if have >= shots:
                break
            if sid not in strong:
                strong.add(sid)
                have += 1
        if have < shots:
            raise InfeasibleSplitError(f"Класс {c} встречается только на {have} изображениях, нужно {shots}")
    return strong


def _with_tiers(scenes: List[SceneRecord], strong_ids: Set[int]) -> List[SceneRecord]:
    return [
        s.model_copy(update={"tier": SupervisionTier.STRONG if s.id in strong_ids else SupervisionTier.WEAK})
        for s in scenes
    ]


def generate_dataset(cfg: WorldConfig, n_train: int, n_test: int, shots: int, seed: int) -> Dataset:
    """
    Детерминированная генерация train/test сцен.
    Train-сцены получают id 0..n_train-1, test - n_train..n_train+n_test-1.
    """
    logger.info(f"🧪 Генерация датасета: train={n_train}, test={n_test}, shots={shots}, seed={seed}")
    scene_ss, proposal_ss = np.random.SeedSequence(seed).spawn(2)
    scene_rng = np.random.default_rng(scene_ss)
    proposal_rng = np.random.default_rng(proposal_ss)

    scenes = [make_scene(cfg, i, scene_rng, proposal_rng) for i in range(n_train + n_test)]
    train, test = scenes[:n_train], scenes[n_train:]

    strong_ids = assign_shots(train, cfg.num_classes, shots)
    train = _with_tiers(train, strong_ids)
    test = [s.model_copy(update={"tier": SupervisionTier.STRONG}) for s in test]

    dataset = Dataset(
        config=DatasetConfig(world=cfg, n_train=n_train, n_test=n_test, shots=shots),
        seed=seed, train=train, test=test,
    )
    summary = dataset.split_summary()
    logger.info(f"📊 Разбиение: strong={summary['strong']}, weak={summary['weak']}, test={summary['test']}")
    return dataset


def resplit_dataset(dataset: Dataset, fold_seed: int) -> Dataset:
    """Перевыбор strong-подмножества тех же train-сцен (фолд для анализа чувствительности)"""
    rng = np.random.default_rng(np.random.SeedSequence([dataset.seed, fold_seed]))
    strong_ids = assign_shots(dataset.train, dataset.world.num_classes, dataset.config.shots, rng)
    return dataset.model_copy(update={"train": _with_tiers(dataset.train, strong_ids)})
