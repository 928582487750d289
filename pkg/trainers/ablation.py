"""
Матрица абляций: каждая комбинация флагов x каждый сид, один и тот же
датасет (и одно и то же strong-подмножество). Строка таблицы - mAP50 обеих ветвей.
"""

from multiprocessing import Pool as ProcessPool
from typing import List, Optional, Sequence

import pandas as pd

from evaluation.evaluator import evaluate
from models.eval_models import AblationRow
from models.train_models import AblationFlags, Branch, TrainConfig
from models.world_models import Dataset
from trainers.trainer import train
from utils.logger import get_logger

logger = get_logger(__name__)


def run_single(dataset: Dataset, cfg: TrainConfig) -> AblationRow:
    """Один запуск: обучение + оценка 2B и 1B на тестовых сценах"""
    params, telemetry = train(dataset, cfg)
    eval_kwargs = dict(score_threshold=cfg.detect_score_threshold, nms_threshold=cfg.nms_threshold,
                       max_dets=cfg.max_detections)
    report_2b = evaluate(params, dataset.test, branch=Branch.SUPERVISED, **eval_kwargs)
    report_1b = evaluate(params, dataset.test, branch=Branch.OAM, **eval_kwargs)
    return AblationRow(
        flags=cfg.flags.label(),
        shared_encoder=cfg.flags.shared_encoder,
        bbox_augmentation=cfg.flags.bbox_augmentation,
        oam_supervision=cfg.flags.oam_supervision,
        seed=cfg.seed,
        map50_2b=report_2b.map50,
        map50_1b=report_1b.map50,
        ap50_95_2b=report_2b.ap50_95,
        final_pool_fraction=telemetry[-1].pool_fraction if telemetry else 0.0,
    )


def run_ablation_matrix(dataset: Dataset, base_cfg: TrainConfig, seeds: Sequence[int],
                        flag_sets: Optional[Sequence[AblationFlags]] = None,
                        workers: int = 1) -> List[AblationRow]:
    """
    Строки в порядке (флаги, сид). workers > 1 - запуски в отдельных процессах;
    результат от этого не зависит.
    """
    flag_sets = list(flag_sets) if flag_sets is not None else list(base_cfg.flag_sets)
    configs = [base_cfg.with_flags(flags, seed) for flags in flag_sets for seed in seeds]
    logger.info(f"🧮 Матрица абляций: {len(flag_sets)} комбинаций x {len(seeds)} сидов = {len(configs)} запусков")

    if workers > 1:
        with ProcessPool(processes=workers) as pool:
            rows = pool.starmap(run_single, [(dataset, cfg) for cfg in configs])
    else:
        rows = []
        for i, cfg in enumerate(configs, start=1):
            logger.info(f"▶️ Запуск {i}/{len(configs)}: {cfg.flags.label()}, seed={cfg.seed}")
            rows.append(run_single(dataset, cfg))

    for row in rows:
        logger.info(f"  {row.flags:<12} seed={row.seed}: mAP50 2B={row.map50_2b:.4f}, 1B={row.map50_1b:.4f}")
    logger.success(f"✅ Матрица абляций готова: {len(rows)} строк")
    return rows


def ablation_frame(rows: Sequence[AblationRow]) -> pd.DataFrame:
    return pd.DataFrame([r.model_dump() for r in rows], columns=list(AblationRow.model_fields))


def ablation_summary(rows: Sequence[AblationRow]) -> pd.DataFrame:
    """Среднее и std по сидам для каждой комбинации флагов (порядок комбинаций сохраняется)"""
    frame = ablation_frame(rows)
    summary = frame.groupby("flags", sort=False).agg(
        map50_2b_mean=("map50_2b", "mean"),
        map50_2b_std=("map50_2b", "std"),
        map50_1b_mean=("map50_1b", "mean"),
        final_pool_fraction=("final_pool_fraction", "mean"),
        runs=("seed", "count"),
    )
    return summary.reset_index()
