"""
Потери OAM-ветви:
  L_gc - бинарная кросс-энтропия по alpha (уровень изображения),
  L_p = L_cls + 1[u >= 1] L_reg - потеря пропозалов strong-изображений.
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np

from geometry.smooth_l1 import smooth_l1, smooth_l1_grad
from losses.targets import ProposalTargets

LOG_EPS = 1e-7


def image_level_loss(alpha: np.ndarray, y: np.ndarray, eps: float = LOG_EPS) -> float:
    """L_gc = -sum_c [(1 - y_c) log(1 - alpha_c) + y_c log(alpha_c)], alpha зажата в [eps, 1 - eps]"""
    a = np.clip(np.asarray(alpha, dtype=np.float64), eps, 1.0 - eps)
    y = np.asarray(y, dtype=np.float64)
    return float(-np.sum((1.0 - y) * np.log(1.0 - a) + y * np.log(a)))


def image_level_loss_grad(alpha: np.ndarray, y: np.ndarray, eps: float = LOG_EPS) -> np.ndarray:
    """dL_gc / d alpha; ноль там, где сработало зажатие"""
    alpha = np.asarray(alpha, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    a = np.clip(alpha, eps, 1.0 - eps)
    inside = (alpha > eps) & (alpha < 1.0 - eps)
    return np.where(inside, -(y / a) + (1.0 - y) / (1.0 - a), 0.0)


@dataclass
class ProposalLossResult:
    value: float
    cls_value: float
    reg_value: float
    num_foreground: int
    d_cls_logits: np.ndarray  # (C+1, M)
    d_reg: np.ndarray         # (4C, M)


def classification_term(cls_probs: np.ndarray, labels: np.ndarray, weights: np.ndarray,
                        scale: float, eps: float = LOG_EPS):
    """
    -scale * (1/M) sum_r w_r log p[u_r, r] и его градиент по логитам softmax.
    """
    m = cls_probs.shape[1]
    p_u = cls_probs[labels, np.arange(m)]
    clamped = p_u < eps
    value = float(-scale * np.sum(weights * np.log(np.maximum(p_u, eps))) / m)
    one_hot = np.zeros_like(cls_probs)
    one_hot[labels, np.arange(m)] = 1.0
    coef = np.where(clamped, 0.0, scale * weights / m)
    return value, coef[None, :] * (cls_probs - one_hot)


def regression_term(reg: np.ndarray, targets: ProposalTargets):
    """sum по foreground sum_i smooth_l1(t_i - v_i) по смещениям целевого класса"""
    d_reg = np.zeros_like(reg)
    fg = np.flatnonzero(targets.foreground)
    if fg.size == 0:
        return 0.0, d_reg, 0
    rows = 4 * (targets.labels[fg] - 1)
    value = 0.0
    for i in range(4):
        diff = reg[rows + i, fg] - targets.offsets[fg, i]
        value += float(np.sum(smooth_l1(diff)))
        d_reg[rows + i, fg] = smooth_l1_grad(diff)
    return value, d_reg, int(fg.size)


def proposal_loss(cls_probs: np.ndarray, reg: np.ndarray, targets: ProposalTargets,
                  eps: float = LOG_EPS, weights: Optional[np.ndarray] = None) -> ProposalLossResult:
    """
    L_p на батче из M пропозалов. cls_probs - (C+1, M) softmax-вероятности,
    reg - (4C, M) предсказанные смещения.
    """
    m = cls_probs.shape[1]
    if len(targets) != m or reg.shape[1] != m:
        raise ValueError("cls_probs, reg and targets must describe the same proposals")
    w = np.ones(m) if weights is None else np.asarray(weights, dtype=np.float64)
    cls_value, d_cls = classification_term(cls_probs, targets.labels, w, 1.0, eps)
    reg_value, d_reg, n_fg = regression_term(reg, targets)
    return ProposalLossResult(cls_value + reg_value, cls_value, reg_value, n_fg, d_cls, d_reg)
