"""
Синтетический мир детекции: генерация сцен, рендер сеток признаков,
имитация пропозалов и разбиение на strong / weak.
"""

from synthworld.generator import assign_shots, generate_dataset, resplit_dataset
from synthworld.proposals import propose, propose_boxes
from synthworld.renderer import background_signature, class_signatures, render

__all__ = [
    "assign_shots", "generate_dataset", "resplit_dataset",
    "propose", "propose_boxes",
    "background_signature", "class_signatures", "render",
]
