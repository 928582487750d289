"""
Артефакты запусков: телеметрия (CSV + JSON), траектория пула, метрики оценки,
таблица абляций, отчёт чувствительности и дамп диагностики.
Каждый JSON содержит конфиг и сид, которые его породили.
"""

import json
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Union

import pandas as pd

from models.eval_models import AblationRow, EvaluationReport, SensitivityReport
from models.pool_models import PoolSnapshot
from models.train_models import TelemetryRecord, TrainConfig
from trainers.ablation import ablation_frame, ablation_summary
from utils.logger import get_logger

logger = get_logger(__name__)

TELEMETRY_CSV = "telemetry.csv"
TELEMETRY_JSON = "telemetry.json"
POOL_JSON = "pool_trajectory.json"
METRICS_JSON = "metrics.json"
PER_CLASS_CSV = "per_class_ap.csv"
ABLATION_CSV = "ablation.csv"
ABLATION_JSON = "ablation.json"
SENSITIVITY_JSON = "sensitivity.json"
DIAGNOSTIC_JSON = "diagnostic.json"


def _write_json(path: Path, payload: Any) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(payload, indent=2, sort_keys=True, ensure_ascii=False, default=str) + "\n",
                    encoding="utf-8")
    return path


def _read_json(path: Path) -> Any:
    if not path.exists():
        raise FileNotFoundError(f"Файл не найден: {path}")
    return json.loads(path.read_text(encoding="utf-8"))


def telemetry_frame(records: Sequence[TelemetryRecord]) -> pd.DataFrame:
    """Плоская таблица: вложенные словари разворачиваются в колонки oam_terms.*, rejections.*"""
    rows = []
    for r in records:
        row = r.model_dump(exclude={"oam_terms", "rejections", "t_histogram"})
        row.update({f"oam_terms.{k}": v for k, v in r.oam_terms.items()})
        row.update({f"rejections.{k}": v for k, v in sorted(r.rejections.items())})
        rows.append(row)
    frame = pd.DataFrame(rows)
    rejection_cols = [c for c in frame.columns if c.startswith("rejections.")]
    if rejection_cols:
        frame[rejection_cols] = frame[rejection_cols].fillna(0).astype(int)
    return frame


def write_training_artifacts(out_dir: Union[str, Path], cfg: TrainConfig, telemetry: Sequence[TelemetryRecord],
                             pool_trajectory: Sequence[PoolSnapshot], dataset_seed: Optional[int] = None) -> Dict[str, Path]:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    meta = {"config": cfg.model_dump(mode="json"), "seed": cfg.seed, "dataset_seed": dataset_seed}
    paths = {
        "telemetry_csv": out_dir / TELEMETRY_CSV,
        "telemetry_json": _write_json(out_dir / TELEMETRY_JSON,
                                      {**meta, "epochs": [r.model_dump(mode="json") for r in telemetry]}),
        "pool_json": _write_json(out_dir / POOL_JSON,
                                 {**meta, "trajectory": [s.model_dump(mode="json") for s in pool_trajectory]}),
    }
    telemetry_frame(telemetry).to_csv(paths["telemetry_csv"], index=False)
    logger.info(f"📝 Телеметрия и траектория пула записаны в {out_dir}")
    return paths


def read_telemetry(run_dir: Union[str, Path]) -> List[TelemetryRecord]:
    payload = _read_json(Path(run_dir) / TELEMETRY_JSON)
    return [TelemetryRecord.model_validate(r) for r in payload["epochs"]]


def read_pool_trajectory(run_dir: Union[str, Path]) -> List[PoolSnapshot]:
    payload = _read_json(Path(run_dir) / POOL_JSON)
    return [PoolSnapshot.model_validate(s) for s in payload["trajectory"]]


def per_class_frame(report: EvaluationReport) -> pd.DataFrame:
    classes = sorted(set(report.per_class_ap50) | set(report.excluded_classes))
    rows = [{
        "class_id": c,
        "ap50": report.per_class_ap50.get(c),
        "ap50_95": report.per_class_ap50_95.get(c),
        "excluded": c in report.excluded_classes,
    } for c in classes]
    frame = pd.DataFrame(rows, columns=["class_id", "ap50", "ap50_95", "excluded"])
    summary = pd.DataFrame([{"class_id": "mean", "ap50": report.map50, "ap50_95": report.ap50_95, "excluded": False}])
    return pd.concat([frame, summary], ignore_index=True)


def write_metrics(out_dir: Union[str, Path], report: EvaluationReport, provenance: Dict[str, Any]) -> Dict[str, Path]:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = {
        "metrics_json": _write_json(out_dir / METRICS_JSON, {**provenance, "report": report.model_dump(mode="json")}),
        "per_class_csv": out_dir / PER_CLASS_CSV,
    }
    per_class_frame(report).to_csv(paths["per_class_csv"], index=False)
    logger.info(f"📝 Метрики записаны в {out_dir}")
    return paths


def read_metrics(run_dir: Union[str, Path]) -> EvaluationReport:
    payload = _read_json(Path(run_dir) / METRICS_JSON)
    return EvaluationReport.model_validate(payload["report"])


def write_ablation(out_dir: Union[str, Path], rows: Sequence[AblationRow], base_cfg: TrainConfig,
                   seeds: Sequence[int], dataset_seed: Optional[int] = None) -> Dict[str, Path]:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = {"ablation_csv": out_dir / ABLATION_CSV, "summary_csv": out_dir / "ablation_summary.csv"}
    ablation_frame(rows).to_csv(paths["ablation_csv"], index=False)
    ablation_summary(rows).to_csv(paths["summary_csv"], index=False)
    paths["ablation_json"] = _write_json(out_dir / ABLATION_JSON, {
        "config": base_cfg.model_dump(mode="json"),
        "seeds": list(seeds),
        "dataset_seed": dataset_seed,
        "rows": [r.model_dump(mode="json") for r in rows],
    })
    logger.info(f"📝 Таблица абляций записана: {paths['ablation_csv']}")
    return paths


def read_ablation(path: Union[str, Path]) -> pd.DataFrame:
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"Файл не найден: {path}")
    return pd.read_csv(path)


def write_sensitivity(out_dir: Union[str, Path], report: SensitivityReport, base_cfg: TrainConfig,
                      dataset_seed: Optional[int] = None) -> Path:
    return _write_json(Path(out_dir) / SENSITIVITY_JSON, {
        "config": base_cfg.model_dump(mode="json"),
        "dataset_seed": dataset_seed,
        "report": report.model_dump(mode="json"),
    })


def write_diagnostic(out_dir: Union[str, Path], diagnostic: Dict[str, Any]) -> Path:
    path = _write_json(Path(out_dir) / DIAGNOSTIC_JSON, diagnostic)
    logger.error(f"🧾 Диагностика записана: {path}")
    return path
