import numpy as np


def smooth_l1(x):
    """0.5 x^2 при |x| < 1, иначе |x| - 0.5. Работает и для скаляров, и для массивов"""
    ax = np.abs(x)
    out = np.where(ax < 1.0, 0.5 * ax * ax, ax - 0.5)
    return float(out) if np.ndim(out) == 0 else out


def smooth_l1_grad(x):
    """Производная smooth L1: x при |x| < 1, иначе sign(x)"""
    out = np.where(np.abs(x) < 1.0, x, np.sign(x))
    return float(out) if np.ndim(out) == 0 else out
