"""
Файл датасета (формат oamdet-dataset, версия 1).

Заголовок: format, version, seed, config (DatasetConfig), n_train, n_test.
Массивы:
    ids          (N,)            id сцен, сначала train, затем test
    tiers        (N,)            1 - strong, 0 - weak
    grids        (N, H, W, C_ch) сетки признаков
    proposals    (N, B, 4)       пропозалы
    gt_boxes     (G, 4)          все GT-боксы подряд
    gt_classes   (G,)
    gt_offsets   (N + 1,)        границы GT сцены i: gt_offsets[i]:gt_offsets[i+1]
"""

from pathlib import Path
from typing import List, Union

import numpy as np

from connectors.archive import read_archive, write_archive
from models.geometry_models import Box, GroundTruthObject
from models.world_models import Dataset, DatasetConfig, ProposalSet, SceneRecord, SupervisionTier
from utils.logger import get_logger

logger = get_logger(__name__)

DATASET_FORMAT = "oamdet-dataset"
DATASET_VERSION = 1


def save_dataset(dataset: Dataset, path: Union[str, Path]) -> Path:
    scenes = dataset.train + dataset.test
    gt_boxes: List[List[float]] = []
    gt_classes: List[int] = []
    offsets = [0]
    for scene in scenes:
        for obj in scene.gt:
            gt_boxes.append([obj.box.x1, obj.box.y1, obj.box.x2, obj.box.y2])
            gt_classes.append(obj.class_id)
        offsets.append(len(gt_classes))
    header = {
        "format": DATASET_FORMAT,
        "version": DATASET_VERSION,
        "seed": dataset.seed,
        "config": dataset.config.model_dump(mode="json"),
        "n_train": len(dataset.train),
        "n_test": len(dataset.test),
    }
    arrays = {
        "ids": np.array([s.id for s in scenes], dtype=np.int64),
        "tiers": np.array([1 if s.is_strong else 0 for s in scenes], dtype=np.uint8),
        "grids": np.stack([s.grid for s in scenes]).astype(np.float64),
        "proposals": np.stack([s.proposals.boxes for s in scenes]).astype(np.float64),
        "gt_boxes": np.array(gt_boxes, dtype=np.float64).reshape(-1, 4),
        "gt_classes": np.array(gt_classes, dtype=np.int64),
        "gt_offsets": np.array(offsets, dtype=np.int64),
    }
    written = write_archive(path, header, arrays)
    logger.info(f"💾 Датасет сохранён: {written} ({len(scenes)} сцен)")
    return written


def load_dataset(path: Union[str, Path]) -> Dataset:
    header, arrays = read_archive(path, DATASET_FORMAT, [DATASET_VERSION])
    config = DatasetConfig.model_validate(header["config"])
    n_train = int(header["n_train"])
    scenes: List[SceneRecord] = []
    offsets = arrays["gt_offsets"]
    for i, scene_id in enumerate(arrays["ids"]):
        lo, hi = int(offsets[i]), int(offsets[i + 1])
        gt = [GroundTruthObject(class_id=int(c), box=Box.from_array(b))
              for b, c in zip(arrays["gt_boxes"][lo:hi], arrays["gt_classes"][lo:hi])]
        scenes.append(SceneRecord(
            id=int(scene_id),
            grid=arrays["grids"][i],
            gt=gt,
            labels=sorted({o.class_id for o in gt}),
            tier=SupervisionTier.STRONG if arrays["tiers"][i] else SupervisionTier.WEAK,
            proposals=ProposalSet(image_id=int(scene_id), boxes=arrays["proposals"][i]),
        ))
    logger.info(f"📥 Датасет загружен: {path} (train={n_train}, test={len(scenes) - n_train})")
    return Dataset(config=config, seed=int(header["seed"]), train=scenes[:n_train], test=scenes[n_train:])
