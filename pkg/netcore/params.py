"""
Параметры модели: общий (или раздельный при SE=off) энкодер, три головы OAM
(scoring, classification, regression) и две головы supervised-ветви.
Для каждого тензора хранится буфер момента.
"""

from typing import Dict, Iterator, Optional

import numpy as np

from models.train_models import Branch

OAM_ENCODER = "enc"
SUPERVISED_ENCODER = "enc2"


class ModelParams:
    """
    Все обучаемые тензоры и буферы момента.
    Индекс 0 в головах классификации (C+1) - фон, индекс c+1 - foreground-класс c;
    строки 4c..4c+3 регрессии относятся к классу c в порядке (t_x, t_y, t_h, t_w).
    """

    def __init__(self, tensors: Dict[str, np.ndarray], num_classes: int, feature_dim: int,
                 hidden_dim: int, shared_encoder: bool, nonlinearity: str = "tanh",
                 momentum: Optional[Dict[str, np.ndarray]] = None, pool_size: int = 3):
        self.tensors = tensors
        self.num_classes = num_classes
        self.feature_dim = feature_dim
        self.hidden_dim = hidden_dim
        self.shared_encoder = shared_encoder
        self.nonlinearity = nonlinearity
        self.pool_size = pool_size
        self.momentum = momentum if momentum is not None else {k: np.zeros_like(v) for k, v in tensors.items()}
        self._check_shapes()

    @classmethod
    def initialize(cls, num_classes: int, feature_dim: int, hidden_dim: int, shared_encoder: bool,
                   rng: np.random.Generator, nonlinearity: str = "tanh",
                   init_std_cls: float = 0.01, init_std_reg: float = 0.001,
                   pool_size: int = 3) -> "ModelParams":
        C, d, P = num_classes, hidden_dim, feature_dim

        def encoder():
            return rng.normal(0.0, 1.0 / np.sqrt(P), size=(d, P)), np.zeros(d)

        tensors: Dict[str, np.ndarray] = {}
        tensors["enc.W"], tensors["enc.b"] = encoder()
        if not shared_encoder:
            tensors["enc2.W"], tensors["enc2.b"] = encoder()
        for name, rows, std in (
            ("oam.score", C, init_std_cls),
            ("oam.cls", C + 1, init_std_cls),
            ("oam.reg", 4 * C, init_std_reg),
            ("sup.cls", C + 1, init_std_cls),
            ("sup.reg", 4 * C, init_std_reg),
        ):
            tensors[f"{name}.W"] = rng.normal(0.0, std, size=(rows, d))
            tensors[f"{name}.b"] = np.zeros(rows)
        return cls(tensors, C, P, d, shared_encoder, nonlinearity, pool_size=pool_size)

    def _check_shapes(self) -> None:
        C, d, P = self.num_classes, self.hidden_dim, self.feature_dim
        expected = {
            "enc.W": (d, P), "enc.b": (d,),
            "oam.score.W": (C, d), "oam.score.b": (C,),
            "oam.cls.W": (C + 1, d), "oam.cls.b": (C + 1,),
            "oam.reg.W": (4 * C, d), "oam.reg.b": (4 * C,),
            "sup.cls.W": (C + 1, d), "sup.cls.b": (C + 1,),
            "sup.reg.W": (4 * C, d), "sup.reg.b": (4 * C,),
        }
        if not self.shared_encoder:
            expected.update({"enc2.W": (d, P), "enc2.b": (d,)})
        if set(expected) != set(self.tensors):
            raise ValueError(f"Unexpected tensor set: {sorted(self.tensors)}")
        for name, shape in expected.items():
            if self.tensors[name].shape != shape:
                raise ValueError(f"Tensor {name} has shape {self.tensors[name].shape}, expected {shape}")

    def encoder_prefix(self, branch: Branch) -> str:
        if branch == Branch.SUPERVISED and not self.shared_encoder:
            return SUPERVISED_ENCODER
        return OAM_ENCODER

    def __getitem__(self, name: str) -> np.ndarray:
        return self.tensors[name]

    def names(self) -> Iterator[str]:
        return iter(sorted(self.tensors))

    def copy(self) -> "ModelParams":
        """Глубокая копия (read-only снимок для псевдо-разметки или тестов)"""
        return ModelParams(
            {k: v.copy() for k, v in self.tensors.items()},
            self.num_classes, self.feature_dim, self.hidden_dim, self.shared_encoder,
            self.nonlinearity, {k: v.copy() for k, v in self.momentum.items()}, self.pool_size,
        )

    def is_finite(self) -> bool:
        return all(np.all(np.isfinite(v)) for v in self.tensors.values())

    def meta(self) -> dict:
        return {
            "num_classes": self.num_classes,
            "feature_dim": self.feature_dim,
            "hidden_dim": self.hidden_dim,
            "shared_encoder": self.shared_encoder,
            "nonlinearity": self.nonlinearity,
            "pool_size": self.pool_size,
        }
