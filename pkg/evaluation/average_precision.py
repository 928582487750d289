"""
Average precision одного класса.
Детекции сортируются по убыванию скора (при равенстве - по порядку вставки);
каждая сопоставляется непокрытому GT своего изображения с наибольшим IoU,
если IoU >= порога (TP), иначе FP. AP - площадь под огибающей
precision-recall (непрерывная, как в VOC 2010+).
"""

from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from geometry.boxes import iou_matrix
from geometry.nms import score_order
from models.geometry_models import Detection


def interpolated_ap(recall: np.ndarray, precision: np.ndarray) -> float:
    """Площадь под монотонной огибающей precision по recall"""
    mrec = np.concatenate(([0.0], recall, [1.0]))
    mpre = np.concatenate(([0.0], precision, [0.0]))
    for i in range(mpre.size - 1, 0, -1):
        mpre[i - 1] = max(mpre[i - 1], mpre[i])
    idx = np.flatnonzero(mrec[1:] != mrec[:-1])
    return float(np.sum((mrec[idx + 1] - mrec[idx]) * mpre[idx + 1]))


def match_detections(dets: Sequence[Tuple[int, Detection]], gts: Dict[int, np.ndarray],
                     iou_threshold: float) -> np.ndarray:
    """Флаги TP для детекций в порядке убывания скора"""
    order = score_order(np.array([d.score for _, d in dets]))
    matched = {image_id: np.zeros(len(boxes), dtype=bool) for image_id, boxes in gts.items()}
    tp = np.zeros(len(order), dtype=bool)
    for rank, k in enumerate(order):
        image_id, det = dets[k]
        boxes = gts.get(image_id)
        if boxes is None or len(boxes) == 0:
            continue
        overlaps = iou_matrix(det.box.as_array()[None, :], boxes)[0]
        overlaps[matched[image_id]] = -1.0
        best = int(np.argmax(overlaps))
        if overlaps[best] >= iou_threshold:
            matched[image_id][best] = True
            tp[rank] = True
    return tp


def average_precision(dets: Sequence[Tuple[int, Detection]], gts: Dict[int, np.ndarray],
                      iou_threshold: float = 0.5) -> Optional[float]:
    """
    dets - пары (image_id, детекция) одного класса, gts - GT-боксы этого класса по изображениям.
    None, если у класса нет GT (класс исключается из mAP).
    """
    num_gt = sum(len(b) for b in gts.values())
    if num_gt == 0:
        return None
    if not dets:
        return 0.0
    tp = match_detections(dets, gts, iou_threshold)
    acc_tp = np.cumsum(tp)
    acc_fp = np.cumsum(~tp)
    recall = acc_tp / num_gt
    precision = acc_tp / np.maximum(acc_tp + acc_fp, 1)
    return interpolated_ap(recall, precision)


def per_class_gt(scenes, num_classes: int) -> List[Dict[int, np.ndarray]]:
    """GT-боксы, разложенные по классам и изображениям"""
    out: List[Dict[int, np.ndarray]] = [dict() for _ in range(num_classes)]
    for scene in scenes:
        boxes = scene.gt_array()
        classes = scene.gt_classes()
        for c in range(num_classes):
            out[c][scene.id] = boxes[classes == c]
    return out
