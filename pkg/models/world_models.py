"""
Модели синтетического мира детекции: конфигурация, сцены, пропозалы.
"""

from enum import Enum
from typing import List, Literal

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from models.geometry_models import Box, GroundTruthObject


class SupervisionTier(str, Enum):
    STRONG = "strong"
    WEAK = "weak"


class WorldConfig(BaseModel):
    """Параметры генератора сцен"""
    model_config = ConfigDict(extra="forbid", frozen=True)

    height: int = Field(64, ge=8)
    width: int = Field(64, ge=8)
    channels: int = Field(3, ge=2)
    num_classes: int = Field(6, ge=2)
    min_objects: int = Field(1, ge=1)
    max_objects: int = Field(4, ge=1)
    min_side: int = Field(8, ge=2)
    max_side: int = Field(28, ge=2)
    max_overlap: float = Field(0.4, ge=0.0, le=1.0)
    noise_sigma: float = Field(0.1, ge=0.0)
    signature_scale: float = Field(1.0, gt=0.0)
    difficulty: Literal["easy", "standard", "hard"] = "standard"
    # Пропозалы (имитация Edge Boxes / RPN)
    proposals_per_image: int = Field(64, ge=8)
    proposal_jitter: float = Field(0.1, ge=0.0)
    proposal_fg_fraction: float = Field(0.25, gt=0.0, le=1.0)

    @model_validator(mode="after")
    def ranges_must_be_non_empty(self):
        if self.min_objects > self.max_objects:
            raise ValueError("min_objects must be <= max_objects")
        if self.min_side > self.max_side:
            raise ValueError("min_side must be <= max_side")
        if self.max_side > min(self.height, self.width):
            raise ValueError("max_side must fit into the grid")
        if self.proposals_per_image < 2 * self.max_objects:
            raise ValueError("proposals_per_image must be >= 2 * max_objects")
        return self

    def effective_max_objects(self) -> int:
        """Сложность ограничивает число объектов"""
        if self.difficulty == "easy":
            return max(self.min_objects, min(self.max_objects, 2))
        return self.max_objects

    def effective_max_overlap(self) -> float:
        if self.difficulty == "easy":
            return 0.0
        return self.max_overlap

    def effective_noise(self) -> float:
        factor = {"easy": 0.5, "standard": 1.0, "hard": 1.5}[self.difficulty]
        return self.noise_sigma * factor


class DatasetConfig(BaseModel):
    """Содержимое JSON-конфига для gen-data"""
    model_config = ConfigDict(extra="forbid", frozen=True)

    world: WorldConfig = WorldConfig()
    n_train: int = Field(600, ge=1)
    n_test: int = Field(200, ge=0)
    shots: int = Field(10, ge=0)


class ProposalSet(BaseModel):
    """Кандидаты для одного изображения; boxes - массив (B, 4) углов"""
    model_config = ConfigDict(arbitrary_types_allowed=True)

    image_id: int
    boxes: np.ndarray

    @model_validator(mode="after")
    def boxes_must_be_valid(self):
        if self.boxes.ndim != 2 or self.boxes.shape[1] != 4:
            raise ValueError(f"Proposal boxes must be (B, 4), got {self.boxes.shape}")
        if not np.all(np.isfinite(self.boxes)):
            raise ValueError("Proposal boxes must be finite")
        if np.any(self.boxes[:, 2] <= self.boxes[:, 0]) or np.any(self.boxes[:, 3] <= self.boxes[:, 1]):
            raise ValueError("Proposal boxes must satisfy x1 < x2, y1 < y2")
        return self

    def __len__(self) -> int:
        return int(self.boxes.shape[0])

    def as_boxes(self) -> List[Box]:
        return [Box.from_array(b) for b in self.boxes]


class SceneRecord(BaseModel):
    """
    Синтетическое изображение: сетка признаков (H, W, C_ch), разметка,
    метки уровня изображения и уровень разметки (strong / weak).
    Тестовые сцены полностью размечены и помечаются как strong.
    """
    model_config = ConfigDict(arbitrary_types_allowed=True)

    id: int
    grid: np.ndarray
    gt: List[GroundTruthObject]
    labels: List[int]
    tier: SupervisionTier = SupervisionTier.WEAK
    proposals: ProposalSet

    @model_validator(mode="after")
    def labels_must_match_gt(self):
        if sorted(set(self.labels)) != list(self.labels):
            raise ValueError("labels must be sorted and unique")
        if set(self.labels) != {obj.class_id for obj in self.gt}:
            raise ValueError(f"Scene {self.id}: labels must equal the set of gt classes")
        height, width = self.grid.shape[:2]
        for obj in self.gt:
            b = obj.box
            if b.x1 < 0 or b.y1 < 0 or b.x2 > width or b.y2 > height:
                raise ValueError(f"Scene {self.id}: gt box outside grid")
        return self

    @property
    def is_strong(self) -> bool:
        return self.tier == SupervisionTier.STRONG

    def gt_array(self) -> np.ndarray:
        return np.array([[o.box.x1, o.box.y1, o.box.x2, o.box.y2] for o in self.gt], dtype=np.float64).reshape(-1, 4)

    def gt_classes(self) -> np.ndarray:
        return np.array([o.class_id for o in self.gt], dtype=np.int64)

    def label_vector(self, num_classes: int) -> np.ndarray:
        y = np.zeros(num_classes, dtype=np.float64)
        y[list(self.labels)] = 1.0
        return y


class Dataset(BaseModel):
    """Сгенерированный набор: конфиг, сид, train/test сцены"""
    model_config = ConfigDict(arbitrary_types_allowed=True)

    config: DatasetConfig
    seed: int
    train: List[SceneRecord]
    test: List[SceneRecord]

    @property
    def world(self) -> WorldConfig:
        return self.config.world

    def strong(self) -> List[SceneRecord]:
        return [s for s in self.train if s.is_strong]

    def weak(self) -> List[SceneRecord]:
        return [s for s in self.train if not s.is_strong]

    def split_summary(self) -> dict:
        strong = self.strong()
        per_class = {c: sum(1 for s in strong if c in s.labels) for c in range(self.world.num_classes)}
        return {
            "train": len(self.train),
            "test": len(self.test),
            "strong": len(strong),
            "weak": len(self.train) - len(strong),
            "strong_per_class": per_class,
        }
