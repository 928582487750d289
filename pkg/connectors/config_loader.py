"""
Загрузка JSON-конфигов экспериментов в pydantic-модели.
Неизвестные ключи и невалидные значения - ConfigError.
"""

import json
from pathlib import Path
from typing import Type, TypeVar, Union

from pydantic import BaseModel, ValidationError

from models.train_models import TrainConfig
from models.world_models import DatasetConfig
from utils.errors import ConfigError
from utils.logger import get_logger

logger = get_logger(__name__)

ConfigModel = TypeVar("ConfigModel", bound=BaseModel)


def load_config(path: Union[str, Path], model: Type[ConfigModel]) -> ConfigModel:
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"Конфиг не найден: {path}")
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as e:
        raise ConfigError(f"{path}: невалидный JSON ({e})") from e
    try:
        config = model.model_validate(raw)
    except ValidationError as e:
        raise ConfigError(f"{path}: {e}") from e
    logger.debug(f"⚙️ Конфиг {model.__name__} загружен из {path}")
    return config


def load_dataset_config(path: Union[str, Path]) -> DatasetConfig:
    return load_config(path, DatasetConfig)


def load_train_config(path: Union[str, Path]) -> TrainConfig:
    return load_config(path, TrainConfig)
