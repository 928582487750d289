"""
Геометрия боксов: IoU, NMS, кодирование смещений, smooth L1.
Все функции чистые и безопасны для параллельного вызова.
"""

from geometry.boxes import boxes_to_array, clip_box, clip_boxes_array, iou, iou_matrix
from geometry.coder import decode_array, decode_offset, encode_array, encode_offset
from geometry.nms import nms, nms_indices
from geometry.smooth_l1 import smooth_l1, smooth_l1_grad

__all__ = [
    "boxes_to_array", "clip_box", "clip_boxes_array", "iou", "iou_matrix",
    "decode_array", "decode_offset", "encode_array", "encode_offset",
    "nms", "nms_indices", "smooth_l1", "smooth_l1_grad",
]
