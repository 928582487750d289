"""
Модели результатов оценки и абляций.
"""

from typing import Dict, List, Optional

from pydantic import BaseModel


class EvaluationReport(BaseModel):
    """AP по классам при IoU 0.5, mAP50 и AP, усреднённый по IoU 0.50:0.05:0.95"""
    branch: str
    num_images: int
    per_class_ap50: Dict[int, float]
    per_class_ap50_95: Dict[int, float]
    map50: float
    ap50_95: float
    excluded_classes: List[int] = []


class AblationRow(BaseModel):
    """Один запуск матрицы абляций"""
    flags: str
    shared_encoder: bool
    bbox_augmentation: bool
    oam_supervision: bool
    seed: int
    map50_2b: float
    map50_1b: float
    ap50_95_2b: float
    final_pool_fraction: float


class SensitivityReport(BaseModel):
    """Разброс mAP50 полной системы по фолдам strong-подмножества"""
    folds: List[int]
    map50: List[float]
    mean: float
    std: float
    flags: str
    pool_fraction: Optional[List[float]] = None
