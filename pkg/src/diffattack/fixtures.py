"""Deterministic desk-scale fixture models and seed sets.

These stand in for full-scale trained networks in tests and demos. Each
pair is hand-constructed so that a disagreement region provably exists
within single-pixel reach of its seeds: the two models share a base
decision rule, and the second model carries extra weight on a few
"trigger" pixels that the first model ignores. Driving any trigger pixel
high flips only the second model, which both makes the pair attackable
and lets tests verify reachability by direct construction.
"""

from __future__ import annotations

import numpy as np

from .oracle import LayerSpec, LocalModel, TaskKind
from .tensor import InputTensor

__all__ = [
    "TRIGGER_PIXELS_8X8",
    "campaign_seeds_8x8",
    "linear_pair_1x4",
    "mlp_pair_8x8",
    "regression_pair_8x8",
    "regression_seeds_8x8",
    "seed_1x4",
    "threshold_classifier",
]

# Flat indices (row-major in 8x8) of the pixels only the second model reacts
# to; all sit in the left half so the base rule is unaffected by design.
TRIGGER_PIXELS_8X8 = (9, 26, 48)


def linear_pair_1x4() -> tuple[LocalModel, LocalModel]:
    """Two 2-class linear-softmax models over 1x4 inputs.

    Both score class 0 from pixel 0 and class 1 from pixel 1; the second
    model additionally credits class 1 with 0.9 of pixel 3's weight. On a
    seed with pixel 3 dark the pair agrees exactly; raising pixel 3 high
    enough flips only the second model.
    """
    gain = 4.0
    w_a = [[gain, 0.0, 0.0, 0.0],
           [0.0, gain, 0.0, 0.0]]
    w_b = [[gain, 0.0, 0.0, 0.0],
           [0.0, gain, 0.0, 0.9 * gain]]
    zero = [0.0, 0.0]
    model_a = LocalModel(
        id="lin4-base", task=TaskKind.CLASSIFICATION, input_shape=(1, 4),
        layers=(LayerSpec.dense(w_a, zero), LayerSpec.softmax()))
    model_b = LocalModel(
        id="lin4-trigger", task=TaskKind.CLASSIFICATION, input_shape=(1, 4),
        layers=(LayerSpec.dense(w_b, zero), LayerSpec.softmax()))
    return model_a, model_b


def seed_1x4() -> InputTensor:
    """Seed for the 1x4 pair: both models answer class 0, triggers dark."""
    return InputTensor((1, 4), [200.0, 100.0, 0.0, 0.0])


def _halves_8x8() -> tuple[np.ndarray, np.ndarray]:
    cols = np.arange(64) % 8
    return cols < 4, cols >= 4


def mlp_pair_8x8() -> tuple[LocalModel, LocalModel]:
    """Two 2-class dense-relu-softmax models over 8x8 inputs.

    The base rule votes class 0 with the left half's mass and class 1 with
    the right half's. The second model adds strong class-1 weight on the
    trigger pixels, so a bright trigger flips it while the base model holds.
    """
    left, right = _halves_8x8()
    gain = 4.0
    w = np.zeros((2, 64))
    w[0, left] = gain / 32.0
    w[1, right] = gain / 32.0
    zero = np.zeros(2)

    w_trigger = w.copy()
    w_trigger[1, list(TRIGGER_PIXELS_8X8)] += 4.0

    model_a = LocalModel(
        id="grid8-base", task=TaskKind.CLASSIFICATION, input_shape=(8, 8),
        layers=(LayerSpec.dense(w, zero), LayerSpec.relu(), LayerSpec.softmax()))
    model_b = LocalModel(
        id="grid8-trigger", task=TaskKind.CLASSIFICATION, input_shape=(8, 8),
        layers=(LayerSpec.dense(w_trigger, zero), LayerSpec.relu(),
                LayerSpec.softmax()))
    return model_a, model_b


def campaign_seeds_8x8(count: int = 50, rng_seed: int = 1234
                       ) -> list[tuple[str, InputTensor]]:
    """Integer-valued seeds on which the 8x8 pair agrees on class 0.

    Left-half pixels are bright, right-half pixels dark, and every trigger
    pixel is zero, leaving the full trigger range available to the search.
    """
    left, right = _halves_8x8()
    rng = np.random.default_rng(rng_seed)
    seeds = []
    for i in range(count):
        values = np.zeros(64)
        values[left] = rng.integers(120, 201, size=int(left.sum()))
        values[right] = rng.integers(0, 61, size=int(right.sum()))
        values[list(TRIGGER_PIXELS_8X8)] = 0.0
        seeds.append((f"seed-{i:03d}", InputTensor((8, 8), values)))
    return seeds


def regression_pair_8x8() -> tuple[LocalModel, LocalModel]:
    """Two scalar-output models over 8x8 inputs (steering-style outputs).

    The base output is the left/right brightness balance in roughly [-1, 1].
    The second model adds 0.8 weight on each trigger pixel, so a trigger at
    full intensity opens a 0.8 output gap while the base model is unmoved.
    """
    left, right = _halves_8x8()
    w = np.zeros((1, 64))
    w[0, left] = 1.0 / 32.0
    w[0, right] = -1.0 / 32.0

    w_trigger = w.copy()
    w_trigger[0, list(TRIGGER_PIXELS_8X8)] += 0.8

    model_a = LocalModel(
        id="steer-base", task=TaskKind.REGRESSION, input_shape=(8, 8),
        layers=(LayerSpec.dense(w, [0.0]),))
    model_b = LocalModel(
        id="steer-trigger", task=TaskKind.REGRESSION, input_shape=(8, 8),
        layers=(LayerSpec.dense(w_trigger, [0.0]),))
    return model_a, model_b


def regression_seeds_8x8(count: int = 10, rng_seed: int = 987
                         ) -> list[tuple[str, InputTensor]]:
    """Seeds on which the regression pair answers identically."""
    left, right = _halves_8x8()
    rng = np.random.default_rng(rng_seed)
    seeds = []
    for i in range(count):
        values = np.zeros(64)
        values[left] = rng.integers(80, 161, size=int(left.sum()))
        values[right] = rng.integers(60, 141, size=int(right.sum()))
        values[list(TRIGGER_PIXELS_8X8)] = 0.0
        seeds.append((f"road-{i:03d}", InputTensor((8, 8), values)))
    return seeds


def threshold_classifier(threshold: float, model_id: str) -> LocalModel:
    """2-class model over 1x2 inputs answering 1 iff pixel 0 exceeds ``threshold``.

    ``threshold`` is in raw pixel units; pick a half-integer (e.g. 128.5) to
    keep integer pixels strictly off the decision boundary.
    """
    sharpness = 10.0
    t = threshold / 255.0
    w = [[-sharpness, 0.0], [sharpness, 0.0]]
    b = [sharpness * t, -sharpness * t]
    return LocalModel(
        id=model_id, task=TaskKind.CLASSIFICATION, input_shape=(1, 2),
        layers=(LayerSpec.dense(w, b), LayerSpec.softmax()))
