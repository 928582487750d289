"""
Файлы чекпоинтов (формат oamdet-checkpoint, версия 1).

kind = "model":  параметры и буферы момента, число завершённых эпох,
                 записи пула, телеметрия и траектория пула (для resume).
kind = "oracle": замороженный идеальный детектор, массивов нет.
"""

from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional, Union

from branches.scorers import BoxScorer, BranchScorer, OracleScorer
from connectors.archive import read_archive, write_archive
from models.pool_models import PoolSnapshot, SemiStrongEntry
from models.train_models import Branch, TelemetryRecord, TrainConfig
from netcore.params import ModelParams
from utils.errors import SchemaVersionError
from utils.logger import get_logger

logger = get_logger(__name__)

CHECKPOINT_FORMAT = "oamdet-checkpoint"
CHECKPOINT_VERSION = 1
MODEL_KIND = "model"
ORACLE_KIND = "oracle"


@dataclass
class Checkpoint:
    kind: str
    seed: int
    config: Optional[TrainConfig] = None
    params: Optional[ModelParams] = None
    epoch: int = 0
    pool_entries: List[SemiStrongEntry] = field(default_factory=list)
    telemetry: List[TelemetryRecord] = field(default_factory=list)
    pool_trajectory: List[PoolSnapshot] = field(default_factory=list)
    dataset_seed: Optional[int] = None
    num_classes: int = 0
    fg_iou: float = 0.5

    def scorer(self, branch: Branch = Branch.SUPERVISED) -> BoxScorer:
        if self.kind == ORACLE_KIND:
            return OracleScorer(self.num_classes, self.fg_iou)
        return BranchScorer(self.params, branch)


def save_checkpoint(path: Union[str, Path], params: ModelParams, config: TrainConfig, epoch: int,
                    pool_entries: List[SemiStrongEntry], telemetry: List[TelemetryRecord],
                    pool_trajectory: List[PoolSnapshot], dataset_seed: Optional[int] = None) -> Path:
    header = {
        "format": CHECKPOINT_FORMAT,
        "version": CHECKPOINT_VERSION,
        "kind": MODEL_KIND,
        "seed": config.seed,
        "config": config.model_dump(mode="json"),
        "epoch": epoch,
        "dataset_seed": dataset_seed,
        "params": params.meta(),
        "pool": [e.model_dump(mode="json") for e in sorted(pool_entries, key=lambda e: e.image_id)],
        "telemetry": [r.model_dump(mode="json") for r in telemetry],
        "pool_trajectory": [s.model_dump(mode="json") for s in pool_trajectory],
    }
    arrays = {f"param.{k}": v for k, v in params.tensors.items()}
    arrays.update({f"momentum.{k}": v for k, v in params.momentum.items()})
    written = write_archive(path, header, arrays)
    logger.debug(f"💾 Чекпоинт эпохи {epoch}: {written}")
    return written


def save_oracle_checkpoint(path: Union[str, Path], num_classes: int, fg_iou: float = 0.5,
                           seed: int = 0) -> Path:
    header = {
        "format": CHECKPOINT_FORMAT,
        "version": CHECKPOINT_VERSION,
        "kind": ORACLE_KIND,
        "seed": seed,
        "config": {"num_classes": num_classes, "fg_iou": fg_iou},
    }
    written = write_archive(path, header, {})
    logger.info(f"💾 Оракульный чекпоинт: {written} (C={num_classes})")
    return written


def load_checkpoint(path: Union[str, Path]) -> Checkpoint:
    header, arrays = read_archive(path, CHECKPOINT_FORMAT, [CHECKPOINT_VERSION])
    kind = header.get("kind")
    if kind == ORACLE_KIND:
        cfg = header["config"]
        return Checkpoint(kind=kind, seed=int(header["seed"]), num_classes=int(cfg["num_classes"]),
                          fg_iou=float(cfg["fg_iou"]))
    if kind != MODEL_KIND:
        raise SchemaVersionError(f"{path}: неизвестный тип чекпоинта {kind!r}")

    meta = header["params"]
    tensors = {k[len("param."):]: v for k, v in arrays.items() if k.startswith("param.")}
    momentum = {k[len("momentum."):]: v for k, v in arrays.items() if k.startswith("momentum.")}
    params = ModelParams(
        tensors, meta["num_classes"], meta["feature_dim"], meta["hidden_dim"], meta["shared_encoder"],
        meta["nonlinearity"], momentum, meta["pool_size"],
    )
    return Checkpoint(
        kind=kind,
        seed=int(header["seed"]),
        config=TrainConfig.model_validate(header["config"]),
        params=params,
        epoch=int(header["epoch"]),
        pool_entries=[SemiStrongEntry.model_validate(e) for e in header["pool"]],
        telemetry=[TelemetryRecord.model_validate(r) for r in header["telemetry"]],
        pool_trajectory=[PoolSnapshot.model_validate(s) for s in header["pool_trajectory"]],
        dataset_seed=header.get("dataset_seed"),
        num_classes=meta["num_classes"],
        fg_iou=TrainConfig.model_validate(header["config"]).fg_iou,
    )
