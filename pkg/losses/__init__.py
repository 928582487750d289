"""
Функции потерь обеих ветвей и назначение целей пропозалам.
Каждая функция возвращает значение и градиенты по выходам голов.
"""

from losses.oam_losses import image_level_loss, image_level_loss_grad, proposal_loss
from losses.supervised_loss import l2b_loss
from losses.targets import ProposalTargets, assign_targets, sample_proposals

__all__ = [
    "image_level_loss", "image_level_loss_grad", "proposal_loss", "l2b_loss",
    "ProposalTargets", "assign_targets", "sample_proposals",
]
