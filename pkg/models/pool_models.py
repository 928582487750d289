"""
Модели псевдо-разметки: semi-strong запись, исход аннотирования, снимок пула.
"""

from enum import Enum
from typing import Dict, List, Optional

from pydantic import BaseModel, ConfigDict, Field, model_validator

from models.geometry_models import Box


class RejectionReason(str, Enum):
    NO_DETECTIONS = "no-detections"
    NO_CONVERGENCE = "no-convergence"
    CLASS_MISMATCH = "class-mismatch"


class PseudoBox(BaseModel):
    """Псевдо-бокс: класс, координаты, вес уровня бокса w_r и скор детектора"""
    model_config = ConfigDict(frozen=True)

    class_id: int = Field(..., ge=0)
    box: Box
    weight: float = Field(..., ge=0.0, le=1.0)
    score: float = Field(1.0, ge=0.0, le=1.0)


class SemiStrongEntry(BaseModel):
    """Псевдо-разметка weak-изображения с глобальным весом 1/T"""
    model_config = ConfigDict(frozen=True)

    image_id: int
    boxes: List[PseudoBox]
    iterations_to_converge: int = Field(..., ge=1)  # T
    epoch: int = 0

    @property
    def global_weight(self) -> float:
        return 1.0 / self.iterations_to_converge

    def class_set(self) -> List[int]:
        return sorted({b.class_id for b in self.boxes})


class AnnotationOutcome(BaseModel):
    """Результат аннотирования: запись (принято) или причина отказа"""
    image_id: int
    entry: Optional[SemiStrongEntry] = None
    rejection: Optional[RejectionReason] = None
    iterations_run: int = 0

    @model_validator(mode="after")
    def exactly_one_result(self):
        if (self.entry is None) == (self.rejection is None):
            raise ValueError("AnnotationOutcome must carry either an entry or a rejection reason")
        return self

    @property
    def accepted(self) -> bool:
        return self.entry is not None


class PoolSnapshot(BaseModel):
    """Состояние пула на конец эпохи (данные для графика роста пула)"""
    epoch: int
    size: int
    num_weak: int
    fraction: float
    accepted: int
    rejections: Dict[str, int]
    t_histogram: Dict[int, int]
