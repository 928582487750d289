from pathlib import Path

from dotenv import load_dotenv
from pydantic_settings import BaseSettings, SettingsConfigDict

# Загружаем переменные из .env файла (или env.txt для тестирования)
env_file = ".env" if Path(".env").exists() else "env.txt"
load_dotenv(dotenv_path=env_file)


class Settings(BaseSettings):
    """
    Настройки окружения, загружаемые из переменных окружения.
    Экспериментальные параметры сюда не попадают - они живут в JSON-конфигах
    (см. models/world_models.py и models/train_models.py).
    """
    # Logging
    log_level: str = "INFO"
    log_file: str = "logs/oamdet.log"

    model_config = SettingsConfigDict(
        env_prefix="OAMDET_",
        env_file=env_file,
        env_file_encoding="utf-8",
        extra="ignore",
    )


settings = Settings()
