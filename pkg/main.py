#!/usr/bin/env python3
"""
Точка входа: подкоманды gen-data, make-oracle, train, eval, ablate, sensitivity, report.

    python main.py gen-data --config configs/world_tiny_oracle.json --seed 0 --out data/tiny.npz
    python main.py make-oracle --data data/tiny.npz --out runs/oracle.npz
    python main.py eval --data data/tiny.npz --ckpt runs/oracle.npz --out runs/oracle_eval

Уровень логирования задаётся только переменной окружения OAMDET_LOG_LEVEL.
"""

import argparse
import sys

from scripts import ablate, evaluate, gen_data, make_oracle, report, sensitivity, train

COMMANDS = {
    "gen-data": (gen_data, "Генерация синтетического датасета"),
    "make-oracle": (make_oracle, "Чекпоинт идеального детектора"),
    "train": (train, "Обучение модели"),
    "eval": (evaluate, "Оценка чекпоинта"),
    "ablate": (ablate, "Матрица абляций"),
    "sensitivity": (sensitivity, "Чувствительность к фолдам"),
    "report": (report, "Отчёт по каталогу запуска"),
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="oamdet", description="Детекция со смешанной разметкой")
    subparsers = parser.add_subparsers(dest="command", required=True)
    for name, (module, help_text) in COMMANDS.items():
        module.add_arguments(subparsers.add_parser(name, help=help_text, description=help_text))
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    module, _ = COMMANDS[args.command]
    return module.run(args)


if __name__ == "__main__":
    sys.exit(main())
