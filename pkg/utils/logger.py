import sys
from loguru import logger

from config.settings import settings

_configured = False


def get_logger(name: str):
    """
    Получить логгер с предустановленными настройками.
    Синки настраиваются один раз на процесс, уровень берётся из OAMDET_LOG_LEVEL.
    """
    global _configured
    if not _configured:
        logger.remove()
        # Консоль - уровень из настроек (по умолчанию INFO)
        logger.add(sys.stderr, level=settings.log_level, format="{time:HH:mm:ss} | {level} | {message}")
        # Файл - подробные логи (DEBUG и выше), если путь задан
        if settings.log_file:
            logger.add(settings.log_file, rotation="5 MB", level="DEBUG",
                       format="{time:YYYY-MM-DD HH:mm:ss.SSS} | {level} | {name}:{function}:{line} - {message}")
        _configured = True
    return logger.bind(module=name)
