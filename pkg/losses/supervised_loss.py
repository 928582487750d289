"""
Потеря второй (fully supervised) ветви:
  L_2B = L_cls + L_reg,
  L_cls = -(1/T) (1/M) sum_i omega_i log p_i[u_i]  - взвешенная кросс-энтропия,
  L_reg - smooth L1 по foreground, только для strong-изображений.
"""

from typing import Optional

import numpy as np

from losses.oam_losses import LOG_EPS, ProposalLossResult, classification_term, regression_term
from losses.targets import ProposalTargets


def l2b_loss(cls_probs: np.ndarray, reg: np.ndarray, targets: ProposalTargets,
             proposal_weights: Optional[np.ndarray] = None, image_weight: float = 1.0,
             with_regression: bool = True, eps: float = LOG_EPS) -> ProposalLossResult:
    """
    cls_probs - (C+1, M), reg - (4C, M) для сэмплированного батча изображения.
    Strong: omega = 1, image_weight = 1, регрессия включена.
    Semi-strong: omega_i - вес сопоставленного псевдо-бокса (фон - 1), image_weight = 1/T, без регрессии.
    """
    m = cls_probs.shape[1]
    if len(targets) != m or reg.shape[1] != m:
        raise ValueError("cls_probs, reg and targets must describe the same proposals")
    omega = np.ones(m) if proposal_weights is None else np.asarray(proposal_weights, dtype=np.float64)
    cls_value, d_cls = classification_term(cls_probs, targets.labels, omega, image_weight, eps)
    if with_regression:
        reg_value, d_reg, n_fg = regression_term(reg, targets)
    else:
        reg_value, d_reg, n_fg = 0.0, np.zeros_like(reg), int(np.sum(targets.foreground))
    return ProposalLossResult(cls_value + reg_value, cls_value, reg_value, n_fg, d_cls, d_reg)
