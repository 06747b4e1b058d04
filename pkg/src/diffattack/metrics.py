"""Campaign bookkeeping and evaluation metrics.

Differential success rate (DSR) is counted per model pair as the fraction
of seed inputs for which a run produced a difference-inducing input, then
averaged (unweighted) across pairs. L2, query, and time aggregates are
taken over successful runs only, since failed runs produce no example;
their distributions are exported as histogram bins rather than plots.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .attack import AttackResult, AttackStatus
from .oracle import Oracle, TaskKind
from .tensor import InputTensor

__all__ = [
    "AdversarialEntry",
    "CampaignRecord",
    "DsrReport",
    "Histogram",
    "dsr_differential",
    "dsr_nondifferential",
    "histogram",
]


@dataclass(frozen=True)
class CampaignRecord:
    """One attack run: which seed, which model pair, what happened."""

    seed_id: str
    model_pair: tuple[str, str]
    result: AttackResult


@dataclass(frozen=True)
class Histogram:
    edges: tuple[float, ...]
    counts: tuple[int, ...]


@dataclass(frozen=True)
class DsrReport:
    """Per-pair and overall success rates plus success-only aggregates.

    The average fields and histograms are None when the campaign produced
    no successful run at all.
    """

    pair_dsr: dict[tuple[str, str], float]
    overall_dsr: float
    avg_l2: float | None
    avg_queries: float | None
    avg_time: float | None
    histograms: dict[str, Histogram] | None


def histogram(values, bin_count: int) -> Histogram:
    """Equal-width bins over [min, max] with the final bin right-closed.

    A degenerate range (all values equal) collapses to a single bin holding
    every sample. Counts always sum to the sample count.
    """
    values = [float(v) for v in values]
    if not values:
        raise ValueError("cannot histogram an empty value list")
    if bin_count < 1:
        raise ValueError(f"bin_count must be >= 1, got {bin_count}")
    lo, hi = min(values), max(values)
    if lo == hi:
        return Histogram(edges=(lo, hi), counts=(len(values),))
    counts, edges = np.histogram(values, bins=bin_count, range=(lo, hi))
    return Histogram(edges=tuple(float(e) for e in edges),
                     counts=tuple(int(c) for c in counts))


def dsr_differential(records: list[CampaignRecord], bin_count: int = 10) -> DsrReport:
    """Aggregate campaign records into a DSR report.

    Per-pair DSR is successes over records for that pair; the overall DSR is
    the unweighted mean across pairs. Records must be unique per
    (seed, pair).
    """
    if not records:
        raise ValueError("cannot aggregate an empty record list")
    seen: set[tuple[str, tuple[str, str]]] = set()
    per_pair: dict[tuple[str, str], list[CampaignRecord]] = {}
    for rec in records:
        key = (rec.seed_id, rec.model_pair)
        if key in seen:
            raise ValueError(f"duplicate record for seed {rec.seed_id!r}, "
                             f"pair {rec.model_pair}")
        seen.add(key)
        per_pair.setdefault(rec.model_pair, []).append(rec)

    pair_dsr = {
        pair: sum(r.result.status is AttackStatus.SUCCESS for r in recs) / len(recs)
        for pair, recs in per_pair.items()
    }
    overall = sum(pair_dsr.values()) / len(pair_dsr)

    successes = [r.result for r in records if r.result.status is AttackStatus.SUCCESS]
    if successes:
        l2s = [r.l2 for r in successes]
        queries = [r.queries_per_oracle for r in successes]
        times = [r.elapsed for r in successes]
        return DsrReport(
            pair_dsr=pair_dsr,
            overall_dsr=overall,
            avg_l2=sum(l2s) / len(l2s),
            avg_queries=sum(queries) / len(queries),
            avg_time=sum(times) / len(times),
            histograms={
                "l2": histogram(l2s, bin_count),
                "queries": histogram(queries, bin_count),
                "time": histogram(times, bin_count),
            },
        )
    return DsrReport(pair_dsr=pair_dsr, overall_dsr=overall,
                     avg_l2=None, avg_queries=None, avg_time=None,
                     histograms=None)


@dataclass(frozen=True)
class AdversarialEntry:
    """An adversarial input produced against model A by a single-model attack.

    Carries model A's recorded output on that input so a second model's
    answer can be compared without re-querying A.
    """

    seed_id: str
    model_a_id: str
    adversarial: InputTensor
    success_on_a: bool
    model_a_label: int | None = None
    model_a_value: float | None = None


def dsr_nondifferential(entries: list[AdversarialEntry], model_b: Oracle,
                        regression_threshold: float = 0.2) -> float:
    """Adapted DSR for single-model attacks.

    Each successful entry counts as difference-inducing iff model B answers
    differently than model A's recorded output on the saved adversarial
    input (label mismatch, or a regression gap of at least the threshold).
    Failed entries count 0 rather than being excluded, so the denominator
    stays the seed count.
    """
    if not entries:
        raise ValueError("cannot adapt an empty adversarial list")
    hits = 0
    for entry in entries:
        if not entry.success_on_a:
            continue
        pred = model_b.query(entry.adversarial)
        if model_b.task is TaskKind.CLASSIFICATION:
            if entry.model_a_label is None:
                raise ValueError(
                    f"entry {entry.seed_id!r} lacks model A's recorded label"
                )
            hits += pred.top_label != entry.model_a_label
        else:
            if entry.model_a_value is None:
                raise ValueError(
                    f"entry {entry.seed_id!r} lacks model A's recorded value"
                )
            hits += abs(pred.value - entry.model_a_value) >= regression_threshold
    return hits / len(entries)
