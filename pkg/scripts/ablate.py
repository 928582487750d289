#!/usr/bin/env python3
"""
Матрица абляций по комбинациям флагов (TrainConfig.flag_sets) и сидам.

    python scripts/ablate.py --data data/standard.npz --config configs/train_standard.json \\
        --seeds 0,1,2 --out runs/ablation --workers 3

Пишет ablation.csv (строка на запуск), ablation_summary.csv и ablation.json.
"""

import argparse
import sys
from pathlib import Path

sys.path.append(str(Path(__file__).parent.parent))

from connectors.config_loader import load_train_config
from connectors.dataset_store import load_dataset
from connectors.run_artifacts import write_ablation
from scripts.common import parse_seeds, run_guarded
from trainers.ablation import run_ablation_matrix
from utils.logger import get_logger

logger = get_logger(__name__)


def add_arguments(parser: argparse.ArgumentParser) -> argparse.ArgumentParser:
    parser.add_argument("--data", required=True, help="Файл датасета")
    parser.add_argument("--config", required=True, help="Базовый JSON-конфиг обучения")
    parser.add_argument("--seeds", required=True, help="Сиды через запятую, например 0,1,2")
    parser.add_argument("--out", required=True, help="Каталог для таблиц")
    parser.add_argument("--workers", type=int, default=1, help="Число процессов (по умолчанию 1)")
    return parser


def run(args: argparse.Namespace) -> int:
    def action():
        seeds = parse_seeds(args.seeds)
        dataset = load_dataset(args.data)
        cfg = load_train_config(args.config)
        rows = run_ablation_matrix(dataset, cfg, seeds, workers=args.workers)
        write_ablation(args.out, rows, cfg, seeds, dataset.seed)

    return run_guarded(action)


def main(argv=None) -> int:
    parser = add_arguments(argparse.ArgumentParser(description="Матрица абляций"))
    return run(parser.parse_args(argv))


if __name__ == "__main__":
    sys.exit(main())
