#!/usr/bin/env python3
"""
Разброс mAP50 полной системы по фолдам strong-подмножества.

    python scripts/sensitivity.py --data data/standard.npz --config configs/train_standard.json \\
        --folds 0,1,2,3,4 --out runs/sensitivity
"""

import argparse
import sys
from pathlib import Path

sys.path.append(str(Path(__file__).parent.parent))

from connectors.config_loader import load_train_config
from connectors.dataset_store import load_dataset
from connectors.run_artifacts import write_sensitivity
from scripts.common import parse_seeds, run_guarded
from trainers.sensitivity import run_seed_sensitivity
from utils.logger import get_logger

logger = get_logger(__name__)


def add_arguments(parser: argparse.ArgumentParser) -> argparse.ArgumentParser:
    parser.add_argument("--data", required=True, help="Файл датасета")
    parser.add_argument("--config", required=True, help="JSON-конфиг обучения (используются его флаги)")
    parser.add_argument("--folds", default="0,1,2,3,4", help="Сиды фолдов через запятую")
    parser.add_argument("--out", required=True, help="Каталог для отчёта")
    parser.add_argument("--keep-split", action="store_true",
                        help="Не перевыбирать strong-подмножество, менять только сид обучения")
    return parser


def run(args: argparse.Namespace) -> int:
    def action():
        folds = parse_seeds(args.folds)
        dataset = load_dataset(args.data)
        cfg = load_train_config(args.config)
        report = run_seed_sensitivity(dataset, cfg, folds, cfg.flags, resplit=not args.keep_split)
        write_sensitivity(args.out, report, cfg, dataset.seed)
        print(f"mAP50 mean={report.mean:.4f} std={report.std:.4f}")

    return run_guarded(action)


def main(argv=None) -> int:
    parser = add_arguments(argparse.ArgumentParser(description="Чувствительность к фолдам"))
    return run(parser.parse_args(argv))


if __name__ == "__main__":
    sys.exit(main())
