#!/usr/bin/env python3
"""Differential attack on scalar-output (regression) models.

Two steering-style models produce nearly identical angles on clean road
images; the search looks for a perturbed image on which their outputs
split by at least the gap threshold.

Usage:
    python demos/03_regression_gap.py
"""

from diffattack import AttackConfig, AttackStatus, DivergenceMode, hill_climb
from diffattack.fixtures import regression_pair_8x8, regression_seeds_8x8


def main():
    model_a, model_b = regression_pair_8x8()
    cfg = AttackConfig(max_iterations=10000, c=0.001, rng_seed=3,
                       divergence_mode=DivergenceMode.REGRESSION_GAP,
                       regression_threshold=0.2)

    print("=" * 64)
    print(f"Regression gap attack: {model_a.id} vs {model_b.id} "
          f"(threshold {cfg.regression_threshold})")
    print("=" * 64)

    import dataclasses
    for i, (seed_id, tensor) in enumerate(regression_seeds_8x8(5)):
        o1, o2 = model_a.oracle(), model_b.oracle()
        run_cfg = dataclasses.replace(cfg, rng_seed=cfg.rng_seed + i)
        result = hill_climb(tensor, o1, o2, run_cfg)
        s1, s2 = result.seed_labels
        f1, f2 = result.final_predictions
        marker = "ok " if result.status is AttackStatus.SUCCESS else "exh"
        print(f"[{marker}] {seed_id}: "
              f"seed outputs {s1.value:+.3f} / {s2.value:+.3f} "
              f"(gap {abs(s1.value - s2.value):.3f})  ->  "
              f"final {f1.value:+.3f} / {f2.value:+.3f} "
              f"(gap {abs(f1.value - f2.value):.3f}, "
              f"{result.queries_per_oracle} queries, L2 {result.l2:.1f})")


if __name__ == "__main__":
    main()
