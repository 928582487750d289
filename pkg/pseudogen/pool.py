"""
Пул semi-strong изображений: расширяется при успешной разметке и
сжимается, когда ранее размеченное изображение не проходит разметку снова.
"""

from collections import Counter
from typing import Dict, Iterable, List, Optional

from models.pool_models import AnnotationOutcome, PoolSnapshot, SemiStrongEntry
from utils.logger import get_logger

logger = get_logger(__name__)


class SemiStrongPool:
    """Отображение image_id -> SemiStrongEntry со статистикой исходов за эпоху"""

    def __init__(self, weak_ids: Iterable[int]):
        self.weak_ids = frozenset(weak_ids)
        self.entries: Dict[int, SemiStrongEntry] = {}
        self.stats = self._empty_stats()

    @staticmethod
    def _empty_stats() -> dict:
        return {"accepted": 0, "rejections": Counter(), "t_histogram": Counter()}

    def __len__(self) -> int:
        return len(self.entries)

    def __contains__(self, image_id: int) -> bool:
        return image_id in self.entries

    def get(self, image_id: int) -> Optional[SemiStrongEntry]:
        return self.entries.get(image_id)

    def ids(self) -> List[int]:
        return sorted(self.entries)

    def update(self, image_id: int, outcome: AnnotationOutcome) -> int:
        """Применяет исход аннотирования; возвращает изменение размера пула (-1, 0, +1)"""
        if image_id not in self.weak_ids:
            raise ValueError(f"Image {image_id} is not a weak training image")
        before = len(self.entries)
        if outcome.accepted:
            self.entries[image_id] = outcome.entry
            self.stats["accepted"] += 1
            self.stats["t_histogram"][outcome.entry.iterations_to_converge] += 1
        else:
            self.entries.pop(image_id, None)
            self.stats["rejections"][outcome.rejection.value] += 1
        return len(self.entries) - before

    def fraction(self) -> float:
        return len(self.entries) / len(self.weak_ids) if self.weak_ids else 0.0

    def snapshot(self, epoch: int) -> PoolSnapshot:
        return PoolSnapshot(
            epoch=epoch,
            size=len(self.entries),
            num_weak=len(self.weak_ids),
            fraction=self.fraction(),
            accepted=self.stats["accepted"],
            rejections=dict(self.stats["rejections"]),
            t_histogram=dict(sorted(self.stats["t_histogram"].items())),
        )

    def reset_stats(self) -> None:
        self.stats = self._empty_stats()

    def restore(self, entries: Iterable[SemiStrongEntry]) -> None:
        self.entries = {e.image_id: e for e in entries}


def update_pool(pool: SemiStrongPool, image_id: int, outcome: AnnotationOutcome) -> int:
    delta = pool.update(image_id, outcome)
    if delta:
        logger.debug(f"Пул: изображение {image_id} {'добавлено' if delta > 0 else 'удалено'}, размер {len(pool)}")
    return delta
