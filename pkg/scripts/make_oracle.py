#!/usr/bin/env python3
"""
Чекпоинт замороженного идеального детектора для датасета.

    python scripts/make_oracle.py --data data/tiny.npz --out runs/oracle.npz

На мире с sigma=0 и без джиттера eval этого чекпоинта даёт mAP50 = 1.0.
"""

import argparse
import sys
from pathlib import Path

sys.path.append(str(Path(__file__).parent.parent))

from connectors.checkpoint_store import save_oracle_checkpoint
from connectors.dataset_store import load_dataset
from scripts.common import run_guarded
from utils.logger import get_logger

logger = get_logger(__name__)


def add_arguments(parser: argparse.ArgumentParser) -> argparse.ArgumentParser:
    parser.add_argument("--data", required=True, help="Файл датасета")
    parser.add_argument("--out", required=True, help="Путь к чекпоинту")
    parser.add_argument("--fg-iou", type=float, default=0.5, help="Порог IoU оракула (по умолчанию 0.5)")
    return parser


def run(args: argparse.Namespace) -> int:
    def action():
        dataset = load_dataset(args.data)
        save_oracle_checkpoint(args.out, dataset.world.num_classes, args.fg_iou, dataset.seed)

    return run_guarded(action)


def main(argv=None) -> int:
    parser = add_arguments(argparse.ArgumentParser(description="Оракульный чекпоинт"))
    return run(parser.parse_args(argv))


if __name__ == "__main__":
    sys.exit(main())
