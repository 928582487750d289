#!/usr/bin/env python3
"""
Оценка чекпоинта на тестовых сценах датасета.

    python scripts/evaluate.py --data data/standard.npz --ckpt runs/full/model.npz --out runs/full/eval
    python scripts/evaluate.py --data data/standard.npz --ckpt runs/full/model.npz --out runs/full/eval_1b --branch oam

Пишет metrics.json и per_class_ap.csv.
"""

import argparse
import sys
from pathlib import Path

sys.path.append(str(Path(__file__).parent.parent))

from connectors.checkpoint_store import ORACLE_KIND, load_checkpoint
from connectors.dataset_store import load_dataset
from connectors.run_artifacts import write_metrics
from evaluation.evaluator import evaluate
from models.train_models import Branch, TrainConfig
from scripts.common import run_guarded
from utils.errors import SchemaVersionError
from utils.logger import get_logger

logger = get_logger(__name__)


def add_arguments(parser: argparse.ArgumentParser) -> argparse.ArgumentParser:
    parser.add_argument("--data", required=True, help="Файл датасета")
    parser.add_argument("--ckpt", required=True, help="Чекпоинт модели или оракула")
    parser.add_argument("--out", required=True, help="Каталог для метрик")
    parser.add_argument("--branch", choices=[b.value for b in Branch], default=Branch.SUPERVISED.value,
                        help="Ветвь для инференса (по умолчанию supervised)")
    return parser


def run(args: argparse.Namespace) -> int:
    def action():
        dataset = load_dataset(args.data)
        checkpoint = load_checkpoint(args.ckpt)
        if checkpoint.num_classes != dataset.world.num_classes:
            raise SchemaVersionError(
                f"Чекпоинт на {checkpoint.num_classes} классов, датасет - на {dataset.world.num_classes}")
        branch = Branch(args.branch)
        cfg = checkpoint.config or TrainConfig()
        report = evaluate(checkpoint.scorer(branch), dataset.test, dataset.world.num_classes, branch,
                          score_threshold=cfg.detect_score_threshold, nms_threshold=cfg.nms_threshold,
                          max_dets=cfg.max_detections)
        provenance = {
            "checkpoint": str(args.ckpt),
            "checkpoint_kind": checkpoint.kind,
            "config": checkpoint.config.model_dump(mode="json") if checkpoint.config else None,
            "seed": checkpoint.seed,
            "dataset_seed": dataset.seed,
            "oracle": checkpoint.kind == ORACLE_KIND,
        }
        write_metrics(args.out, report, provenance)
        print(f"mAP50={report.map50:.4f} AP[50:95]={report.ap50_95:.4f}")

    return run_guarded(action)


def main(argv=None) -> int:
    parser = add_arguments(argparse.ArgumentParser(description="Оценка чекпоинта"))
    return run(parser.parse_args(argv))


if __name__ == "__main__":
    sys.exit(main())
