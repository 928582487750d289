"""
Детерминированные .npz архивы: JSON-заголовок (формат, версия, конфиг, сид)
и массивы. Метки времени в zip фиксированы, поэтому одинаковые входы дают
побайтно одинаковые файлы.
"""

import io
import json
import zipfile
from pathlib import Path
from typing import Dict, Iterable, Tuple, Union

import numpy as np

from utils.errors import SchemaVersionError

FIXED_ZIP_TIME = (1980, 1, 1, 0, 0, 0)


def _npy_bytes(arr: np.ndarray) -> bytes:
    buf = io.BytesIO()
    np.save(buf, np.ascontiguousarray(arr), allow_pickle=False)
    return buf.getvalue()


def write_archive(path: Union[str, Path], header: dict, arrays: Dict[str, np.ndarray]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    header_bytes = json.dumps(header, sort_keys=True, ensure_ascii=False).encode("utf-8")
    entries = [("header", np.frombuffer(header_bytes, dtype=np.uint8))]
    entries += [(name, arrays[name]) for name in sorted(arrays)]
    with zipfile.ZipFile(path, "w", compression=zipfile.ZIP_DEFLATED) as zf:
        for name, arr in entries:
            info = zipfile.ZipInfo(f"{name}.npy", date_time=FIXED_ZIP_TIME)
            info.compress_type = zipfile.ZIP_DEFLATED
            info.external_attr = 0o644 << 16
            zf.writestr(info, _npy_bytes(arr))
    return path


def read_archive(path: Union[str, Path], expected_format: str,
                 supported_versions: Iterable[int]) -> Tuple[dict, Dict[str, np.ndarray]]:
    """Читает архив, проверяя формат и версию схемы"""
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"Файл не найден: {path}")
    try:
        with np.load(path, allow_pickle=False) as data:
            header = json.loads(bytes(data["header"]).decode("utf-8"))
            arrays = {name: data[name] for name in data.files if name != "header"}
    except (ValueError, KeyError, OSError, zipfile.BadZipFile, json.JSONDecodeError) as e:
        raise SchemaVersionError(f"{path}: не является архивом формата {expected_format} ({e})") from e
    if header.get("format") != expected_format:
        raise SchemaVersionError(f"{path}: формат {header.get('format')!r}, ожидался {expected_format!r}")
    if header.get("version") not in set(supported_versions):
        raise SchemaVersionError(f"{path}: версия схемы {header.get('version')} не поддерживается")
    return header, arrays
