"""
Граф лосса: набор прямых проходов с накопленными градиентами по их выходам.
backward() проталкивает их до параметров и проверяет конечность.
"""

from dataclasses import dataclass
from typing import Dict, List, Optional, Set, Union

import numpy as np

from netcore.heads import OamOutput, SupervisedOutput, oam_backward, supervised_backward
from netcore.params import ModelParams
from utils.errors import NonFiniteGradientError


class Gradients:
    """Градиенты по тензорам; touched - тензоры, до которых дошёл хоть один член лосса"""

    def __init__(self, params: ModelParams):
        self.values: Dict[str, np.ndarray] = {k: np.zeros_like(v) for k, v in params.tensors.items()}
        self.touched: Set[str] = set()

    def add(self, name: str, value: np.ndarray) -> None:
        self.values[name] += value
        self.touched.add(name)

    def __getitem__(self, name: str) -> np.ndarray:
        return self.values[name]

    def __add__(self, other: "Gradients") -> "Gradients":
        out = Gradients.__new__(Gradients)
        out.values = {k: v + other.values[k] for k, v in self.values.items()}
        out.touched = self.touched | other.touched
        return out

    def norm(self, prefix: Optional[str] = None) -> float:
        names = [k for k in self.values if prefix is None or k.startswith(prefix + ".")]
        return float(np.sqrt(sum(float(np.sum(self.values[k] ** 2)) for k in names)))

    def check_finite(self) -> None:
        for name in sorted(self.values):
            if not np.all(np.isfinite(self.values[name])):
                raise NonFiniteGradientError(name)


@dataclass
class _Term:
    output: Union[OamOutput, SupervisedOutput]
    d_alpha: Optional[np.ndarray] = None
    d_cls_logits: Optional[np.ndarray] = None
    d_reg: Optional[np.ndarray] = None


def _accumulate(current: Optional[np.ndarray], extra: Optional[np.ndarray]) -> Optional[np.ndarray]:
    if extra is None:
        return current
    if current is None:
        return np.array(extra, dtype=np.float64)
    return current + extra


class LossGraph:
    """
    Скалярный лосс как сумма членов. Каждый член регистрирует значение
    и градиенты по выходам своего прямого прохода.
    """

    def __init__(self):
        self.total = 0.0
        self.breakdown: Dict[str, float] = {}
        self._terms: List[_Term] = []
        self._index: Dict[int, int] = {}

    def add_loss(self, name: str, value: float) -> None:
        self.total += float(value)
        self.breakdown[name] = self.breakdown.get(name, 0.0) + float(value)

    def attach(self, output: Union[OamOutput, SupervisedOutput], d_alpha: Optional[np.ndarray] = None,
               d_cls_logits: Optional[np.ndarray] = None, d_reg: Optional[np.ndarray] = None) -> None:
        key = id(output)
        if key not in self._index:
            self._index[key] = len(self._terms)
            self._terms.append(_Term(output))
        term = self._terms[self._index[key]]
        term.d_alpha = _accumulate(term.d_alpha, d_alpha)
        term.d_cls_logits = _accumulate(term.d_cls_logits, d_cls_logits)
        term.d_reg = _accumulate(term.d_reg, d_reg)

    def __len__(self) -> int:
        return len(self._terms)

    def terms(self) -> List[_Term]:
        return list(self._terms)


def backward(params: ModelParams, graph: LossGraph) -> Gradients:
    """Градиент суммарного лосса графа по всем тензорам параметров"""
    grads = Gradients(params)
    for term in graph.terms():
        if isinstance(term.output, OamOutput):
            oam_backward(params, term.output, grads, term.d_alpha, term.d_cls_logits, term.d_reg)
        else:
            supervised_backward(params, term.output, grads, term.d_cls_logits, term.d_reg)
    grads.check_finite()
    return grads
