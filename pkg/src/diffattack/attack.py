"""Hill-climbing differential attack.

Starting from a seed input, repeatedly perturb a single pixel, query both
oracles on the candidate, and keep the candidate only on a strict fitness
improvement. The run ends the moment some candidate makes the two oracles
disagree, or when the per-oracle query budget is spent, returning the best
incumbent either way.

The fitness of a candidate x' against seed x is

    divergence(f1(x'), f2(x'))  -  c * l2(x', x)

so the search pushes the two oracles' outputs apart while the rescaling
constant c pulls the candidate back toward the seed. Setting c = 0 ignores
the perceptual term entirely and optimizes divergence alone.
"""

from __future__ import annotations

import enum
import time
from dataclasses import dataclass

import numpy as np

from .oracle import AccessLevel, Oracle, Prediction, TaskKind
from .tensor import InputTensor, l1_distance, l2_distance

__all__ = [
    "AttackConfig",
    "AttackError",
    "AttackResult",
    "AttackStatus",
    "ConfigurationError",
    "DivergenceMode",
    "divergence",
    "fitness",
    "hill_climb",
    "is_success",
    "mutate",
]


class ConfigurationError(ValueError):
    """Attack configuration is incompatible with the oracles in play."""


class AttackError(RuntimeError):
    """An oracle failed mid-run; carries the iteration that was executing."""

    def __init__(self, message: str, iteration: int):
        super().__init__(f"{message} (iteration {iteration})")
        self.iteration = iteration


class DivergenceMode(enum.Enum):
    """How the scalar output gap between the two oracles is measured.

    REFERENCE_LABEL_GAP compares the two probabilities assigned to a fixed
    reference label (the first oracle's answer on the seed). Under top-1
    access a model's probability on that label is observable only while the
    label is its top answer; otherwise its contribution is taken as 0, a
    lower bound that preserves the maximization direction.
    L1_DISTRIBUTION sums absolute differences across full distributions.
    REGRESSION_GAP is the absolute difference of scalar outputs.
    """

    REFERENCE_LABEL_GAP = "ref-gap"
    L1_DISTRIBUTION = "l1-dist"
    REGRESSION_GAP = "regression"


class AttackStatus(enum.Enum):
    SUCCESS = "SUCCESS"
    BUDGET_EXHAUSTED = "BUDGET_EXHAUSTED"


@dataclass(frozen=True)
class AttackConfig:
    """Knobs for one hill-climbing run.

    Args:
        max_iterations: per-oracle query budget T; the seed evaluation counts.
        c: rescaling constant trading divergence against L2 distance.
        divergence_mode: output-gap measure, see :class:`DivergenceMode`.
        regression_threshold: minimum output gap for a regression input to
            count as difference-inducing.
        rng_seed: seed for the mutation stream; identical configs replay
            identical runs.
        epsilon: optional hard cap on the candidate's L2 distance to the
            seed; candidates beyond it are skipped without querying.
    """

    max_iterations: int
    c: float = 0.001
    divergence_mode: DivergenceMode = DivergenceMode.REFERENCE_LABEL_GAP
    regression_threshold: float = 0.2
    rng_seed: int = 0
    epsilon: float | None = None

    def __post_init__(self) -> None:
        if self.max_iterations < 1:
            raise ConfigurationError("max_iterations must be >= 1")
        if self.c < 0:
            raise ConfigurationError("c must be non-negative")
        if self.regression_threshold <= 0:
            raise ConfigurationError("regression_threshold must be positive")
        if self.epsilon is not None and self.epsilon <= 0:
            raise ConfigurationError("epsilon must be positive when set")


@dataclass(frozen=True)
class AttackResult:
    """Outcome of one run.

    ``adversarial`` is the difference-inducing input on SUCCESS and the best
    incumbent on BUDGET_EXHAUSTED. ``accepted_scores`` is the strictly
    increasing sequence of retained incumbent fitness values, seed first;
    it is empty when the seed itself already succeeds.
    """

    status: AttackStatus
    adversarial: InputTensor
    divergence: float
    fitness: float
    l2: float
    queries_per_oracle: int
    iterations: int
    elapsed: float
    seed_labels: tuple[Prediction, Prediction]
    final_predictions: tuple[Prediction, Prediction]
    accepted_scores: tuple[float, ...]


def mutate(x: InputTensor, rng: np.random.Generator) -> InputTensor:
    """Copy of ``x`` with one uniformly chosen pixel set to a uniform 0..255 value.

    Draws the flat index first, then the value, so a fixed generator state
    replays identically. The value range is inclusive at both ends; the draw
    may repeat the current value, leaving the copy element-wise equal.
    """
    index = int(rng.integers(x.element_count))
    value = float(rng.integers(256))
    flat = x.values.copy()
    flat[index] = value
    return InputTensor(x.shape, flat)


def divergence(p1: Prediction, p2: Prediction, mode: DivergenceMode,
               reference_label: int | None = None) -> float:
    """Non-negative output gap between two predictions for the same input."""
    if mode is DivergenceMode.REGRESSION_GAP:
        if p1.task is not TaskKind.REGRESSION or p2.task is not TaskKind.REGRESSION:
            raise ConfigurationError("regression divergence needs regression oracles")
        return abs(p1.value - p2.value)
    if p1.task is not TaskKind.CLASSIFICATION or p2.task is not TaskKind.CLASSIFICATION:
        raise ConfigurationError(f"{mode.value} divergence needs classification oracles")
    if mode is DivergenceMode.L1_DISTRIBUTION:
        if p1.distribution is None or p2.distribution is None:
            raise ConfigurationError(
                "distribution divergence needs full-distribution access on both oracles"
            )
        return l1_distance(
            InputTensor((len(p1.distribution),), p1.distribution),
            InputTensor((len(p2.distribution),), p2.distribution),
        )
    if reference_label is None:
        raise ConfigurationError("reference-label divergence needs a reference label")
    q1 = p1.prob_of(reference_label)
    q2 = p2.prob_of(reference_label)
    if q1 is None or q2 is None:
        raise ConfigurationError(
            "reference-label divergence needs probability access on both oracles"
        )
    return abs(q1 - q2)


def fitness(x: InputTensor, x_prime: InputTensor, p1: Prediction, p2: Prediction,
            cfg: AttackConfig, reference_label: int | None = None) -> float:
    """Divergence of the candidate's predictions minus c times its L2 distance."""
    gap = divergence(p1, p2, cfg.divergence_mode, reference_label)
    return gap - cfg.c * l2_distance(x_prime, x)


def is_success(p1: Prediction, p2: Prediction, cfg: AttackConfig) -> bool:
    """Whether two predictions on one input count as difference-inducing.

    Classification: the top labels disagree. Regression: the outputs differ
    by at least the configured threshold.
    """
    if p1.task is not p2.task:
        raise ConfigurationError(
            f"oracles answer different tasks: {p1.task.value} vs {p2.task.value}"
        )
    if p1.task is TaskKind.CLASSIFICATION:
        return p1.top_label != p2.top_label
    return abs(p1.value - p2.value) >= cfg.regression_threshold


def _validate_run(x: InputTensor, o1: Oracle, o2: Oracle, cfg: AttackConfig) -> None:
    if o1.task is not o2.task:
        raise ConfigurationError(
            f"oracles answer different tasks: {o1.task.value} vs {o2.task.value}"
        )
    for o in (o1, o2):
        if o.input_shape is not None and o.input_shape != x.shape:
            raise ConfigurationError(
                f"oracle {o.id!r} expects shape {o.input_shape}, seed has {x.shape}"
            )
    mode = cfg.divergence_mode
    if (mode is DivergenceMode.REGRESSION_GAP) != (o1.task is TaskKind.REGRESSION):
        raise ConfigurationError(
            f"divergence mode {mode.value!r} does not fit task {o1.task.value!r}"
        )
    if o1.task is TaskKind.CLASSIFICATION:
        for o in (o1, o2):
            if mode is DivergenceMode.L1_DISTRIBUTION and \
                    o.access_level is not AccessLevel.FULL_DISTRIBUTION:
                raise ConfigurationError(
                    f"oracle {o.id!r}: distribution divergence needs full access"
                )
            if mode is DivergenceMode.REFERENCE_LABEL_GAP and \
                    o.access_level is AccessLevel.LABEL_ONLY:
                raise ConfigurationError(
                    f"oracle {o.id!r}: reference-label divergence needs the "
                    f"top-1 probability; label-only access is not enough"
                )


def _query_pair(o1: Oracle, o2: Oracle, x: InputTensor,
                iteration: int) -> tuple[Prediction, Prediction]:
    try:
        return o1.query(x), o2.query(x)
    except ConfigurationError:
        raise
    except Exception as exc:
        raise AttackError(f"oracle query failed: {exc}", iteration) from exc


def hill_climb(x: InputTensor, o1: Oracle, o2: Oracle,
               cfg: AttackConfig) -> AttackResult:
    """Run the single-pixel hill-climbing search from seed ``x``.

    Both oracles' query counters are reset at the start, then charged exactly
    once per evaluated candidate (the seed included), so the per-oracle total
    never exceeds the budget T. Candidates rejected by the optional epsilon
    cap consume an iteration but no query. Acceptance is strict improvement;
    plateaus are rejected and there are no restarts.
    """
    _validate_run(x, o1, o2, cfg)
    o1.reset_query_count()
    o2.reset_query_count()
    rng = np.random.default_rng(cfg.rng_seed)
    started = time.perf_counter()

    p1, p2 = _query_pair(o1, o2, x, iteration=0)
    seed_labels = (p1, p2)
    reference = p1.top_label if o1.task is TaskKind.CLASSIFICATION else None
    queries = 1

    def finish(status, adv, preds, iterations, accepted):
        gap = divergence(preds[0], preds[1], cfg.divergence_mode, reference)
        return AttackResult(
            status=status,
            adversarial=adv,
            divergence=gap,
            fitness=gap - cfg.c * l2_distance(adv, x),
            l2=l2_distance(adv, x),
            queries_per_oracle=queries,
            iterations=iterations,
            elapsed=time.perf_counter() - started,
            seed_labels=seed_labels,
            final_predictions=preds,
            accepted_scores=tuple(accepted),
        )

    if is_success(p1, p2, cfg):
        return finish(AttackStatus.SUCCESS, x, (p1, p2), 0, [])

    sol, sol_preds = x, (p1, p2)
    score = fitness(x, x, p1, p2, cfg, reference)
    accepted = [score]

    iterations = 0
    for _ in range(cfg.max_iterations - 1):
        iterations += 1
        candidate = mutate(sol, rng)
        if cfg.epsilon is not None and l2_distance(x, candidate) > cfg.epsilon:
            continue  # over the perturbation cap: costs the iteration, not a query
        c1, c2 = _query_pair(o1, o2, candidate, iterations)
        queries += 1
        if is_success(c1, c2, cfg):
            return finish(AttackStatus.SUCCESS, candidate, (c1, c2),
                          iterations, accepted)
        new_score = fitness(x, candidate, c1, c2, cfg, reference)
        if new_score > score:
            sol, sol_preds, score = candidate, (c1, c2), new_score
            accepted.append(new_score)

    return finish(AttackStatus.BUDGET_EXHAUSTED, sol, sol_preds,
                  iterations, accepted)
