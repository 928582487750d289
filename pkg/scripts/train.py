#!/usr/bin/env python3
"""
Обучение модели.

    python scripts/train.py --data data/standard.npz --config configs/train_standard.json --out runs/full
    python scripts/train.py --data data/standard.npz --config configs/train_standard.json --out runs/full \\
        --resume runs/full/checkpoints/epoch_010.npz

В --out: checkpoints/epoch_NNN.npz, model.npz (финальный), telemetry.csv/json, pool_trajectory.json.
"""

import argparse
import shutil
import sys
from pathlib import Path

sys.path.append(str(Path(__file__).parent.parent))

from connectors.checkpoint_store import load_checkpoint
from connectors.config_loader import load_train_config
from connectors.dataset_store import load_dataset
from connectors.run_artifacts import write_training_artifacts
from scripts.common import run_guarded
from trainers.trainer import Trainer
from utils.logger import get_logger

logger = get_logger(__name__)

FINAL_CHECKPOINT = "model.npz"


def add_arguments(parser: argparse.ArgumentParser) -> argparse.ArgumentParser:
    parser.add_argument("--data", required=True, help="Файл датасета")
    parser.add_argument("--config", required=True, help="JSON-конфиг обучения (TrainConfig)")
    parser.add_argument("--out", required=True, help="Каталог запуска")
    parser.add_argument("--resume", default=None, help="Чекпоинт для продолжения обучения")
    return parser


def run(args: argparse.Namespace) -> int:
    out_dir = Path(args.out)

    def action():
        dataset = load_dataset(args.data)
        cfg = load_train_config(args.config)
        trainer = Trainer(dataset, cfg, checkpoint_dir=out_dir / "checkpoints")
        if args.resume:
            trainer.restore(load_checkpoint(args.resume))
        result = trainer.run()
        shutil.copyfile(out_dir / "checkpoints" / f"epoch_{cfg.epochs:03d}.npz", out_dir / FINAL_CHECKPOINT)
        write_training_artifacts(out_dir, cfg, result.telemetry, result.pool_trajectory, dataset.seed)

    return run_guarded(action, diagnostic_dir=out_dir)


def main(argv=None) -> int:
    parser = add_arguments(argparse.ArgumentParser(description="Обучение модели"))
    return run(parser.parse_args(argv))


if __name__ == "__main__":
    sys.exit(main())
