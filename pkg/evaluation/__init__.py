"""
Метрики детекции: AP по классу, mAP50, AP[50:95].
"""

from evaluation.average_precision import average_precision, interpolated_ap
from evaluation.evaluator import IOU_THRESHOLDS, evaluate, evaluate_detections

__all__ = ["average_precision", "interpolated_ap", "IOU_THRESHOLDS", "evaluate", "evaluate_detections"]
