"""Combining the referenced and unreferenced scores into one number.

Both scores are first squeezed onto a comparable [0, 1] scale by min-max
normalization over the evaluation set being scored, then reduced per
pair by one of four strategies.
"""

from __future__ import annotations

import math
from enum import Enum

import numpy as np


class BlendStrategy(str, Enum):
    MIN = "min"
    MAX = "max"
    GEOMETRIC = "geometric"
    ARITHMETIC = "arithmetic"


# How far outside [0, 1] an input may stray before blend() refuses it.
_BLEND_SLACK = 1e-9


def normalize(values) -> np.ndarray:
    """Min-max rescale a score series onto [0, 1].

    The minimum maps to exactly 0 and the maximum to exactly 1.  A
    constant series (max equals min) maps to 0.5 everywhere.
    """
    arr = np.asarray(values, dtype=float)
    if arr.ndim != 1 or arr.size == 0:
        raise ValueError("normalize expects a non-empty 1-d series")
    if not np.all(np.isfinite(arr)):
        raise ValueError("normalize expects finite values")
    lo = float(arr.min())
    hi = float(arr.max())
    if lo == hi:
        return np.full(arr.shape, 0.5)
    return (arr - lo) / (hi - lo)


def blend(ref_score: float, unref_score: float, strategy) -> float:
    """Combine two normalized scores; the result stays inside [0, 1].

    Inputs must already be normalized: values outside [0, 1] by more
    than a hair are rejected rather than silently clipped.
    """
    strategy = BlendStrategy(strategy)
    x = _checked(ref_score)
    y = _checked(unref_score)
    if strategy is BlendStrategy.MIN:
        return min(x, y)
    if strategy is BlendStrategy.MAX:
        return max(x, y)
    if strategy is BlendStrategy.GEOMETRIC:
        return _geometric(x, y)
    return 0.5 * (x + y)


def _geometric(x: float, y: float) -> float:
    """sqrt(x*y), kept inside [min(x,y), max(x,y)] at float precision.

    The direct product can misbehave at the edges of the double range:
    sqrt(x*x) may dip half an ulp below x, and x*y can underflow to zero
    for subnormal inputs.  The equality branch, the factored square
    roots on underflow, and the final ordering clamp (a bound the exact
    geometric mean always satisfies) remove those artifacts.
    """
    if x == y:
        return x
    lo, hi = (x, y) if x < y else (y, x)
    product = x * y
    value = math.sqrt(product) if product > 0.0 else math.sqrt(x) * math.sqrt(y)
    return min(max(value, lo), hi)


def blend_series(ref_norm, unref_norm, strategy) -> np.ndarray:
    """Vector version of :func:`blend` over two aligned series."""
    ref_norm = np.asarray(ref_norm, dtype=float)
    unref_norm = np.asarray(unref_norm, dtype=float)
    if ref_norm.shape != unref_norm.shape:
        raise ValueError(
            f"series shapes differ: {ref_norm.shape} vs {unref_norm.shape}"
        )
    return np.array([
        blend(float(a), float(b), strategy) for a, b in zip(ref_norm, unref_norm)
    ])


def _checked(value: float) -> float:
    if not (-_BLEND_SLACK <= value <= 1.0 + _BLEND_SLACK):
        raise ValueError(f"blend input {value!r} lies outside [0, 1]")
    return min(max(value, 0.0), 1.0)
