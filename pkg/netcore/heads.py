"""
Прямые и обратные проходы голов.

OAM: энкодер -> три параллельных слоя (scoring S, classification L, regression R).
  gamma_C = softmax по foreground-частям L вдоль классов (для каждого пропозала),
  gamma_R = softmax S вдоль пропозалов (для каждого класса),
  phi_P = gamma_C * gamma_R, alpha_c = sum_r phi_P(c, r).
Supervised: энкодер -> классификация (C+1) и регрессия (4C).

Выходы хранятся в ориентации "класс x пропозал", как в описании модели.
"""

from dataclasses import dataclass
from typing import Dict, Optional

import numpy as np

from models.train_models import Branch
from netcore.params import ModelParams


def softmax(x: np.ndarray, axis: int) -> np.ndarray:
    z = x - np.max(x, axis=axis, keepdims=True)
    e = np.exp(z)
    return e / np.sum(e, axis=axis, keepdims=True)


def softmax_backward(probs: np.ndarray, d_probs: np.ndarray, axis: int) -> np.ndarray:
    """Градиент по логитам softmax вдоль axis"""
    return probs * (d_probs - np.sum(d_probs * probs, axis=axis, keepdims=True))


@dataclass
class EncoderCache:
    prefix: str
    x: np.ndarray  # (B, P)
    h: np.ndarray  # (B, d)


def encode(params: ModelParams, prefix: str, features: np.ndarray) -> EncoderCache:
    x = np.asarray(features, dtype=np.float64).reshape(-1, params.feature_dim)
    z = x @ params[f"{prefix}.W"].T + params[f"{prefix}.b"]
    h = np.tanh(z) if params.nonlinearity == "tanh" else np.maximum(z, 0.0)
    return EncoderCache(prefix=prefix, x=x, h=h)


def encode_backward(params: ModelParams, cache: EncoderCache, d_h: np.ndarray, grads) -> None:
    if params.nonlinearity == "tanh":
        d_z = d_h * (1.0 - cache.h * cache.h)
    else:
        d_z = d_h * (cache.h > 0.0)
    grads.add(f"{cache.prefix}.W", d_z.T @ cache.x)
    grads.add(f"{cache.prefix}.b", d_z.sum(axis=0))


def _linear(params: ModelParams, name: str, h: np.ndarray) -> np.ndarray:
    """(rows, B) = W @ h^T + b"""
    return params[f"{name}.W"] @ h.T + params[f"{name}.b"][:, None]


@dataclass
class OamOutput:
    gamma_c: np.ndarray     # (C, B)
    gamma_r: np.ndarray     # (C, B)
    phi: np.ndarray         # (C, B)
    alpha: np.ndarray       # (C,)
    score_logits: np.ndarray  # (C, B)
    cls_logits: np.ndarray  # (C+1, B)
    cls_probs: np.ndarray   # (C+1, B)
    reg: np.ndarray         # (4C, B)
    encoder: EncoderCache

    @property
    def num_proposals(self) -> int:
        return int(self.cls_logits.shape[1])


@dataclass
class SupervisedOutput:
    cls_logits: np.ndarray  # (C+1, B)
    cls_probs: np.ndarray   # (C+1, B)
    reg: np.ndarray         # (4C, B)
    encoder: EncoderCache

    @property
    def num_proposals(self) -> int:
        return int(self.cls_logits.shape[1])


def oam_forward(params: ModelParams, features: np.ndarray) -> OamOutput:
    enc = encode(params, params.encoder_prefix(Branch.OAM), features)
    score_logits = _linear(params, "oam.score", enc.h)
    cls_logits = _linear(params, "oam.cls", enc.h)
    reg = _linear(params, "oam.reg", enc.h)
    gamma_c = softmax(cls_logits[1:], axis=0)
    gamma_r = softmax(score_logits, axis=1)
    phi = gamma_c * gamma_r
    return OamOutput(
        gamma_c=gamma_c, gamma_r=gamma_r, phi=phi, alpha=phi.sum(axis=1),
        score_logits=score_logits, cls_logits=cls_logits, cls_probs=softmax(cls_logits, axis=0),
        reg=reg, encoder=enc,
    )


def supervised_forward(params: ModelParams, features: np.ndarray) -> SupervisedOutput:
    enc = encode(params, params.encoder_prefix(Branch.SUPERVISED), features)
    cls_logits = _linear(params, "sup.cls", enc.h)
    return SupervisedOutput(
        cls_logits=cls_logits, cls_probs=softmax(cls_logits, axis=0),
        reg=_linear(params, "sup.reg", enc.h), encoder=enc,
    )


def oam_backward(params: ModelParams, out: OamOutput, grads, d_alpha: Optional[np.ndarray] = None,
                 d_cls_logits: Optional[np.ndarray] = None, d_reg: Optional[np.ndarray] = None) -> None:
    """Распространяет dL/d(alpha, cls_logits, reg) до параметров OAM и энкодера"""
    C, B = out.gamma_c.shape
    d_score = np.zeros((C, B))
    d_cls = np.zeros((C + 1, B)) if d_cls_logits is None else np.array(d_cls_logits, dtype=np.float64)
    d_reg = np.zeros((4 * C, B)) if d_reg is None else np.asarray(d_reg, dtype=np.float64)
    if d_alpha is not None:
        d_phi = np.broadcast_to(np.asarray(d_alpha, dtype=np.float64)[:, None], (C, B))
        d_score = softmax_backward(out.gamma_r, d_phi * out.gamma_c, axis=1)
        d_cls[1:] += softmax_backward(out.gamma_c, d_phi * out.gamma_r, axis=0)

    h = out.encoder.h
    grads_by_head: Dict[str, np.ndarray] = {"oam.score": d_score, "oam.cls": d_cls, "oam.reg": d_reg}
    d_h = np.zeros_like(h)
    for name, d_out in grads_by_head.items():
        grads.add(f"{name}.W", d_out @ h)
        grads.add(f"{name}.b", d_out.sum(axis=1))
        d_h += d_out.T @ params[f"{name}.W"]
    encode_backward(params, out.encoder, d_h, grads)


def supervised_backward(params: ModelParams, out: SupervisedOutput, grads,
                        d_cls_logits: Optional[np.ndarray] = None, d_reg: Optional[np.ndarray] = None) -> None:
    C = params.num_classes
    B = out.num_proposals
    d_cls = np.zeros((C + 1, B)) if d_cls_logits is None else np.asarray(d_cls_logits, dtype=np.float64)
    d_reg = np.zeros((4 * C, B)) if d_reg is None else np.asarray(d_reg, dtype=np.float64)
    h = out.encoder.h
    d_h = np.zeros_like(h)
    for name, d_out in (("sup.cls", d_cls), ("sup.reg", d_reg)):
        grads.add(f"{name}.W", d_out @ h)
        grads.add(f"{name}.b", d_out.sum(axis=1))
        d_h += d_out.T @ params[f"{name}.W"]
    encode_backward(params, out.encoder, d_h, grads)
