"""
Модели обучения: ветви, флаги абляции, конфиг тренера, телеметрия.
"""

from enum import Enum
from typing import Dict, List, Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, model_validator


class Branch(str, Enum):
    OAM = "oam"                # первая ветвь (1B)
    SUPERVISED = "supervised"  # вторая ветвь (2B), используется на тесте


class AblationFlags(BaseModel):
    """SE - общий энкодер, BBA - второй проход OAM, OAM - обучение 2B на semi-strong"""
    model_config = ConfigDict(extra="forbid", frozen=True)

    shared_encoder: bool = True
    bbox_augmentation: bool = True
    oam_supervision: bool = True

    def label(self) -> str:
        parts = [name for name, on in (("SE", self.shared_encoder), ("BBA", self.bbox_augmentation),
                                       ("OAM", self.oam_supervision)) if on]
        return "+".join(parts) if parts else "none"


# Строки таблицы абляции + цепочка none -> SE -> SE+OAM -> SE+OAM+BBA
DEFAULT_FLAG_SETS: List[AblationFlags] = [
    AblationFlags(shared_encoder=False, bbox_augmentation=False, oam_supervision=False),
    AblationFlags(shared_encoder=False, bbox_augmentation=True, oam_supervision=False),
    AblationFlags(shared_encoder=True, bbox_augmentation=False, oam_supervision=False),
    AblationFlags(shared_encoder=True, bbox_augmentation=True, oam_supervision=False),
    AblationFlags(shared_encoder=True, bbox_augmentation=False, oam_supervision=True),
    AblationFlags(shared_encoder=True, bbox_augmentation=True, oam_supervision=True),
]


class TrainConfig(BaseModel):
    """Полный конфиг обучения; неизвестные ключи JSON отклоняются"""
    model_config = ConfigDict(extra="forbid", frozen=True)

    seed: int = 0
    epochs: int = Field(20, ge=1)
    # lr: base_lr, затем x lr_decay с эпохи lr_step_epoch (по умолчанию - последняя треть)
    base_lr: float = Field(0.001, gt=0.0)
    lr_decay: float = Field(0.1, gt=0.0, le=1.0)
    lr_step_epoch: Optional[int] = Field(None, ge=0)
    momentum: float = Field(0.9, ge=0.0, lt=1.0)
    weight_decay: float = Field(1e-4, ge=0.0)
    iterations_per_epoch: Optional[int] = Field(None, ge=1)

    # Состав батчей
    oam_weak_per_batch: int = Field(2, ge=0)
    oam_strong_per_batch: int = Field(2, ge=1)
    sup_strong_per_batch: int = Field(2, ge=1)
    sup_semi_per_batch: int = Field(2, ge=0)

    # Сеть
    pool_size: int = Field(3, ge=1)
    hidden_dim: int = Field(32, ge=1)
    nonlinearity: Literal["tanh", "relu"] = "tanh"
    init_std_cls: float = Field(0.01, gt=0.0)
    init_std_reg: float = Field(0.001, gt=0.0)
    log_eps: float = Field(1e-7, gt=0.0, lt=0.5)

    # Сэмплинг пропозалов
    proposal_batch: int = Field(32, ge=2)
    fg_fraction: float = Field(0.25, gt=0.0, le=1.0)
    fg_iou: float = Field(0.5, gt=0.0, le=1.0)

    # Псевдо-разметка
    max_annotation_iters: int = Field(30, ge=3)
    annotation_score_threshold: float = Field(0.5, gt=0.0, le=1.0)
    nms_threshold: float = Field(0.5, gt=0.0, lt=1.0)

    # Инференс и оценка
    detect_score_threshold: float = Field(0.05, ge=0.0, le=1.0)
    max_detections: int = Field(100, ge=1)
    validate_every: int = Field(0, ge=0)
    checkpoint_every: int = Field(0, ge=0)

    flags: AblationFlags = AblationFlags()
    flag_sets: List[AblationFlags] = Field(default_factory=lambda: list(DEFAULT_FLAG_SETS))

    @model_validator(mode="after")
    def step_epoch_within_schedule(self):
        if self.lr_step_epoch is not None and self.lr_step_epoch > self.epochs:
            raise ValueError("lr_step_epoch must be <= epochs")
        return self

    @property
    def second_pass_top(self) -> int:
        """M для второго прохода - половина батча пропозалов"""
        return self.proposal_batch // 2

    def step_epoch(self) -> int:
        """Первая эпоха (0-based) с уменьшенным lr: 2/3 расписания на base_lr"""
        if self.lr_step_epoch is not None:
            return self.lr_step_epoch
        return (2 * self.epochs) // 3

    def learning_rate(self, epoch: int) -> float:
        return self.base_lr * (self.lr_decay if epoch >= self.step_epoch() else 1.0)

    def with_flags(self, flags: AblationFlags, seed: Optional[int] = None) -> "TrainConfig":
        update = {"flags": flags}
        if seed is not None:
            update["seed"] = seed
        return self.model_copy(update=update)


class TelemetryRecord(BaseModel):
    """Сводка одной эпохи"""
    epoch: int
    lr: float
    iterations: int
    loss_total: float
    loss_oam: float
    loss_supervised: float
    oam_terms: Dict[str, float] = {}
    pool_size: int = 0
    pool_fraction: float = 0.0
    accepted: int = 0
    rejections: Dict[str, int] = {}
    t_histogram: Dict[int, int] = {}
    semi_strong_slots: int = 0
    strong_fallback_slots: int = 0
    encoder_grad_norm_oam: float = 0.0
    encoder_grad_norm_supervised: float = 0.0
    both_branches_reach_encoder: bool = True
    missing_fg_warnings: int = 0
    degenerate_second_pass: int = 0
    val_map50: Optional[float] = None
