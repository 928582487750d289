#!/usr/bin/env python3
"""
Генерация синтетического датасета.

    python scripts/gen_data.py --config configs/world_standard.json --seed 0 --out data/standard.npz

Одинаковые конфиг и сид дают побайтно одинаковый файл.
"""

import argparse
import sys
from pathlib import Path

sys.path.append(str(Path(__file__).parent.parent))

from connectors.config_loader import load_dataset_config
from connectors.dataset_store import save_dataset
from scripts.common import run_guarded
from synthworld.generator import generate_dataset
from utils.logger import get_logger

logger = get_logger(__name__)


def add_arguments(parser: argparse.ArgumentParser) -> argparse.ArgumentParser:
    parser.add_argument("--config", required=True, help="JSON-конфиг датасета (DatasetConfig)")
    parser.add_argument("--seed", type=int, required=True, help="Сид генерации")
    parser.add_argument("--out", required=True, help="Путь к .npz файлу датасета")
    return parser


def run(args: argparse.Namespace) -> int:
    def action():
        cfg = load_dataset_config(args.config)
        dataset = generate_dataset(cfg.world, cfg.n_train, cfg.n_test, cfg.shots, args.seed)
        save_dataset(dataset, args.out)
        summary = dataset.split_summary()
        print(f"train={summary['train']} test={summary['test']} strong={summary['strong']} weak={summary['weak']}")
        print("strong per class: " + ", ".join(f"{c}:{n}" for c, n in summary["strong_per_class"].items()))

    return run_guarded(action)


def main(argv=None) -> int:
    parser = add_arguments(argparse.ArgumentParser(description="Генерация синтетического датасета"))
    return run(parser.parse_args(argv))


if __name__ == "__main__":
    sys.exit(main())
