"""
Общая обвязка скриптов: перехват ошибок и код выхода.
"""

from typing import Callable

from pydantic import ValidationError

from connectors.run_artifacts import write_diagnostic
from utils.errors import NonFiniteLossError, OamDetError
from utils.logger import get_logger

logger = get_logger(__name__)


def run_guarded(action: Callable[[], None], diagnostic_dir=None) -> int:
    """0 - успех, 1 - любая ошибка (сообщение в лог)"""
    try:
        action()
        return 0
    except NonFiniteLossError as e:
        logger.error(f"❌ {e}")
        if diagnostic_dir is not None:
            write_diagnostic(diagnostic_dir, e.diagnostic)
        return 1
    except (OamDetError, FileNotFoundError, ValidationError, ValueError) as e:
        logger.error(f"❌ {e}")
        return 1
    except Exception as e:
        logger.error(f"💥 Критическая ошибка: {e}")
        return 1


def parse_seeds(value: str):
    try:
        seeds = [int(s) for s in value.split(",") if s.strip()]
    except ValueError as e:
        raise ValueError(f"Некорректный список сидов: {value!r}") from e
    if not seeds:
        raise ValueError("Список сидов пуст")
    return seeds
