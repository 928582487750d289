"""
Геометрические модели: бокс, смещение регрессии, детекция.
Бокс хранится углами (x1, y1, x2, y2); центр/размер вычисляются точно.
"""

import math
from typing import Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator


class Box(BaseModel):
    """Прямоугольник в координатах изображения (пиксели, допускаются дробные)"""
    model_config = ConfigDict(frozen=True)

    x1: float
    y1: float
    x2: float
    y2: float

    @model_validator(mode="after")
    def corners_must_be_ordered(self):
        coords = (self.x1, self.y1, self.x2, self.y2)
        if not all(math.isfinite(v) for v in coords):
            raise ValueError(f"Box coordinates must be finite: {coords}")
        if not (self.x1 < self.x2 and self.y1 < self.y2):
            raise ValueError(f"Box must satisfy x1 < x2 and y1 < y2: {coords}")
        return self

    @classmethod
    def from_center(cls, cx: float, cy: float, w: float, h: float) -> "Box":
        return cls(x1=cx - w / 2.0, y1=cy - h / 2.0, x2=cx + w / 2.0, y2=cy + h / 2.0)

    @classmethod
    def from_array(cls, arr) -> "Box":
        return cls(x1=float(arr[0]), y1=float(arr[1]), x2=float(arr[2]), y2=float(arr[3]))

    @property
    def width(self) -> float:
        return self.x2 - self.x1

    @property
    def height(self) -> float:
        return self.y2 - self.y1

    @property
    def area(self) -> float:
        return self.width * self.height

    def to_center(self) -> Tuple[float, float, float, float]:
        """(cx, cy, w, h)"""
        return ((self.x1 + self.x2) / 2.0, (self.y1 + self.y2) / 2.0, self.width, self.height)

    def as_array(self) -> np.ndarray:
        return np.array([self.x1, self.y1, self.x2, self.y2], dtype=np.float64)


class Offset(BaseModel):
    """Цели регрессии (t_x, t_y, t_h, t_w); t_h, t_w - в лог-пространстве"""
    model_config = ConfigDict(frozen=True)

    t_x: float
    t_y: float
    t_h: float
    t_w: float

    @model_validator(mode="after")
    def must_be_finite(self):
        if not all(math.isfinite(v) for v in (self.t_x, self.t_y, self.t_h, self.t_w)):
            raise ValueError("Offset components must be finite")
        return self

    @classmethod
    def from_array(cls, arr) -> "Offset":
        return cls(t_x=float(arr[0]), t_y=float(arr[1]), t_h=float(arr[2]), t_w=float(arr[3]))

    def as_array(self) -> np.ndarray:
        return np.array([self.t_x, self.t_y, self.t_h, self.t_w], dtype=np.float64)


class Detection(BaseModel):
    """Тройка (класс, бокс, скор). class_id - индекс foreground-класса в [0, C)"""
    model_config = ConfigDict(frozen=True)

    class_id: int = Field(..., ge=0)
    box: Box
    score: float = Field(..., ge=0.0, le=1.0)


class GroundTruthObject(BaseModel):
    """Размеченный объект сцены"""
    model_config = ConfigDict(frozen=True)

    class_id: int = Field(..., ge=0)
    box: Box
