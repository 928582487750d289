"""
Онлайн-генерация псевдо-разметки и пул semi-strong изображений.
"""

from pseudogen.annotator import generate_annotation
from pseudogen.matching import average_overlap, converged
from pseudogen.pool import SemiStrongPool, update_pool

__all__ = ["generate_annotation", "average_overlap", "converged", "SemiStrongPool", "update_pool"]
