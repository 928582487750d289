"""
Иерархия исключений проекта.
Ошибки значений (невалидный Box и т.п.) отсекаются валидаторами pydantic,
здесь - ошибки уровня алгоритмов и файлов.
"""

from typing import Any, Dict, Optional


class OamDetError(Exception):
    """Базовое исключение проекта"""


class ConfigError(OamDetError):
    """Невалидный или неполный конфигурационный файл"""


class DegenerateBoxError(OamDetError):
    """Бокс выродился (нулевая ширина или высота) после обрезки по сетке"""


class InfeasibleSplitError(OamDetError):
    """Невозможно набрать требуемое число strong-изображений на класс"""


class SchemaVersionError(OamDetError):
    """Файл имеет неизвестный формат или версию схемы"""


class MissingSemiStrongEntryError(OamDetError):
    """В батч попало semi-strong изображение без записи в пуле (ошибка тренера)"""


class NonFiniteGradientError(OamDetError):
    """Градиент содержит NaN/inf"""

    def __init__(self, tensor_name: str):
        super().__init__(f"Неконечный градиент для тензора '{tensor_name}'")
        self.tensor_name = tensor_name


class NonFiniteLossError(OamDetError):
    """Лосс стал NaN/inf; diagnostic содержит состояние итерации для дампа"""

    def __init__(self, message: str, diagnostic: Optional[Dict[str, Any]] = None):
        super().__init__(message)
        self.diagnostic = diagnostic or {}
