"""
Численное ядро обеих ветвей: ROI pooling, общий энкодер, головы OAM и
supervised-ветви, аналитические градиенты и SGD с моментом.
"""

from netcore.graph import Gradients, LossGraph, backward
from netcore.heads import OamOutput, SupervisedOutput, oam_forward, supervised_forward
from netcore.optimizer import sgd_step
from netcore.params import ModelParams
from netcore.pooling import FeaturePooler, roi_pool, roi_pool_batch

__all__ = [
    "Gradients", "LossGraph", "backward",
    "OamOutput", "SupervisedOutput", "oam_forward", "supervised_forward",
    "sgd_step", "ModelParams", "FeaturePooler", "roi_pool", "roi_pool_batch",
]
