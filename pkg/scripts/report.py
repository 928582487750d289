#!/usr/bin/env python3
"""
Отчёт по каталогу запуска (обучение, оценка или абляции).

    python scripts/report.py --run runs/full --out runs/full/report
"""

import argparse
import sys
from pathlib import Path

sys.path.append(str(Path(__file__).parent.parent))

from evaluation.report import render_report
from scripts.common import run_guarded
from utils.logger import get_logger

logger = get_logger(__name__)


def add_arguments(parser: argparse.ArgumentParser) -> argparse.ArgumentParser:
    parser.add_argument("--run", required=True, help="Каталог запуска")
    parser.add_argument("--out", required=True, help="Каталог для SVG/CSV")
    return parser


def run(args: argparse.Namespace) -> int:
    return run_guarded(lambda: render_report(args.run, args.out))


def main(argv=None) -> int:
    parser = add_arguments(argparse.ArgumentParser(description="Отчёт по запуску"))
    return run(parser.parse_args(argv))


if __name__ == "__main__":
    sys.exit(main())
