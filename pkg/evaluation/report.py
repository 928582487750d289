"""
Отчёт по каталогу запуска: кривая роста пула, кривые лоссов (SVG) и таблицы AP (CSV).
Берёт то, что есть в каталоге: телеметрию обучения, метрики оценки, таблицу абляций.
"""

from pathlib import Path
from typing import Dict, Sequence, Union

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import pandas as pd  # noqa: E402

from connectors.run_artifacts import (  # noqa: E402
    ABLATION_CSV, METRICS_JSON, POOL_JSON, TELEMETRY_JSON,
    per_class_frame, read_ablation, read_metrics, read_pool_trajectory, read_telemetry,
)
from models.pool_models import PoolSnapshot  # noqa: E402
from models.train_models import TelemetryRecord  # noqa: E402
from utils.logger import get_logger  # noqa: E402

logger = get_logger(__name__)

# Фиксированная соль id в SVG и без даты в метаданных - повторный рендер даёт те же байты
plt.rcParams["svg.hashsalt"] = "oamdet"
SVG_METADATA = {"Date": None}


def _save(fig, path: Path) -> Path:
    fig.savefig(path, format="svg", metadata=SVG_METADATA)
    plt.close(fig)
    return path


def plot_pool_growth(trajectory: Sequence[PoolSnapshot], path: Union[str, Path]) -> Path:
    epochs = [s.epoch + 1 for s in trajectory]
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(epochs, [s.fraction for s in trajectory], marker="o", label="semi-strong fraction")
    ax.set_xlabel("epoch")
    ax.set_ylabel("annotated weak images")
    ax.set_ylim(0.0, 1.0)
    ax.grid(alpha=0.3)
    ax.legend()
    fig.tight_layout()
    return _save(fig, Path(path))


def plot_loss_curves(telemetry: Sequence[TelemetryRecord], path: Union[str, Path]) -> Path:
    epochs = [r.epoch + 1 for r in telemetry]
    fig, axes = plt.subplots(1, 2, figsize=(11, 4))
    for name, values in (("L_tot", [r.loss_total for r in telemetry]),
                         ("L_1B", [r.loss_oam for r in telemetry]),
                         ("L_2B", [r.loss_supervised for r in telemetry])):
        axes[0].plot(epochs, values, label=name)
    terms = sorted({k for r in telemetry for k in r.oam_terms})
    for term in terms:
        axes[1].plot(epochs, [r.oam_terms.get(term, 0.0) for r in telemetry], label=term)
    axes[0].set_title("losses per iteration")
    axes[1].set_title("OAM terms")
    for ax in axes:
        ax.set_xlabel("epoch")
        ax.grid(alpha=0.3)
        ax.legend()
    fig.tight_layout()
    return _save(fig, Path(path))


def ablation_table(frame: pd.DataFrame) -> pd.DataFrame:
    """Таблица в разрезе флагов: среднее mAP50 обеих ветвей по сидам"""
    table = frame.groupby("flags", sort=False)[["map50_2b", "map50_1b", "ap50_95_2b"]].mean()
    return table.round(4).reset_index()


def render_report(run_dir: Union[str, Path], out_dir: Union[str, Path]) -> Dict[str, Path]:
    run_dir, out_dir = Path(run_dir), Path(out_dir)
    if not run_dir.is_dir():
        raise FileNotFoundError(f"Каталог запуска не найден: {run_dir}")
    out_dir.mkdir(parents=True, exist_ok=True)
    written: Dict[str, Path] = {}

    if (run_dir / TELEMETRY_JSON).exists():
        written["loss_curves"] = plot_loss_curves(read_telemetry(run_dir), out_dir / "loss_curves.svg")
    if (run_dir / POOL_JSON).exists():
        written["pool_growth"] = plot_pool_growth(read_pool_trajectory(run_dir), out_dir / "pool_growth.svg")
    if (run_dir / METRICS_JSON).exists():
        written["ap_table"] = out_dir / "ap_table.csv"
        per_class_frame(read_metrics(run_dir)).to_csv(written["ap_table"], index=False)
    if (run_dir / ABLATION_CSV).exists():
        written["ablation_table"] = out_dir / "ablation_table.csv"
        ablation_table(read_ablation(run_dir / ABLATION_CSV)).to_csv(written["ablation_table"], index=False)

    if not written:
        raise FileNotFoundError(f"В {run_dir} нет артефактов для отчёта")
    logger.success(f"✅ Отчёт: {len(written)} файлов в {out_dir}")
    return written
