"""
Совместное обучение двух ветвей, матрица абляций и анализ чувствительности к фолдам.
"""

from trainers.ablation import ablation_frame, ablation_summary, run_ablation_matrix
from trainers.sensitivity import run_seed_sensitivity
from trainers.trainer import Trainer, TrainResult, train

__all__ = ["Trainer", "TrainResult", "train", "run_ablation_matrix", "ablation_frame", "ablation_summary", "run_seed_sensitivity"]
