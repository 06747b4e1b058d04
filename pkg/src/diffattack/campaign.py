"""Campaign orchestration: fan a hill-climbing attack out over every
(seed, model-pair) combination and assemble the results.

The attack is order-symmetric, so campaigns evaluate each unordered model
pair once. Every run derives its own RNG seed from a stable hash of
(base seed, seed id, pair), which makes results independent of scheduling
order and parallelism degree.
"""

from __future__ import annotations

import dataclasses
import hashlib
from concurrent.futures import ThreadPoolExecutor
from itertools import combinations
from typing import Sequence

from .attack import AttackConfig, hill_climb
from .io import SeedSet
from .metrics import CampaignRecord, DsrReport
from .oracle import Oracle

__all__ = [
    "derive_run_seed",
    "dsr_matrix",
    "render_matrix_csv",
    "run_campaign",
]


def derive_run_seed(base_seed: int, seed_id: str, pair: tuple[str, str]) -> int:
    """Stable 64-bit RNG seed for one (seed, pair) run."""
    material = f"{base_seed}|{seed_id}|{pair[0]}|{pair[1]}".encode("utf-8")
    digest = hashlib.sha256(material).digest()
    return int.from_bytes(digest[:8], "little")


def run_campaign(oracles: Sequence[Oracle], seeds: SeedSet, cfg: AttackConfig,
                 parallel: int = 1) -> list[CampaignRecord]:
    """Attack every seed against every unordered oracle pair.

    Each task clones its two oracles so counters stay private per run.
    Records come back sorted by (seed id, pair) regardless of scheduling.
    """
    if len(oracles) < 2:
        raise ValueError("a campaign needs at least two models")
    if parallel < 1:
        raise ValueError("parallelism degree must be >= 1")
    ids = [o.id for o in oracles]
    if len(set(ids)) != len(ids):
        raise ValueError(f"oracle ids must be unique, got {ids}")

    pairs = list(combinations(oracles, 2))

    def one_run(seed_id: str, tensor, o1: Oracle, o2: Oracle) -> CampaignRecord:
        pair = (o1.id, o2.id)
        run_cfg = dataclasses.replace(
            cfg, rng_seed=derive_run_seed(cfg.rng_seed, seed_id, pair))
        result = hill_climb(tensor, o1.clone(), o2.clone(), run_cfg)
        return CampaignRecord(seed_id=seed_id, model_pair=pair, result=result)

    tasks = [(seed_id, tensor, o1, o2)
             for seed_id, tensor in seeds.entries
             for o1, o2 in pairs]
    if parallel == 1:
        records = [one_run(*t) for t in tasks]
    else:
        with ThreadPoolExecutor(max_workers=parallel) as pool:
            records = list(pool.map(lambda t: one_run(*t), tasks))
    records.sort(key=lambda r: (r.seed_id, r.model_pair))
    return records


def dsr_matrix(summary: DsrReport, model_ids: Sequence[str]
               ) -> list[list[float | None]]:
    """Mirrored pair-DSR matrix with a None diagonal, in ``model_ids`` order."""
    index = {mid: i for i, mid in enumerate(model_ids)}
    size = len(model_ids)
    matrix: list[list[float | None]] = [[None] * size for _ in range(size)]
    for (a, b), value in summary.pair_dsr.items():
        if a not in index or b not in index:
            raise ValueError(f"pair ({a!r}, {b!r}) names an unknown model")
        i, j = index[a], index[b]
        matrix[i][j] = value
        matrix[j][i] = value
    return matrix


def render_matrix_csv(matrix: list[list[float | None]],
                      model_ids: Sequence[str]) -> str:
    """Pair-DSR matrix as CSV text with NA on the diagonal."""
    lines = ["model," + ",".join(model_ids)]
    for mid, row in zip(model_ids, matrix):
        cells = ["NA" if v is None else f"{v:.6f}" for v in row]
        lines.append(f"{mid}," + ",".join(cells))
    return "\n".join(lines) + "\n"
