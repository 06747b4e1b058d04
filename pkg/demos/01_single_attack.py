#!/usr/bin/env python3
"""Walk through one hill-climbing attack against a pair of bundled models.

The two models agree on the seed image; the search perturbs one pixel per
step and keeps strict fitness improvements until the predictions split.

Usage:
    python demos/01_single_attack.py
"""

from pathlib import Path

from diffattack import AttackConfig, hill_climb, l2_distance, save_adversarial
from diffattack.fixtures import linear_pair_1x4, seed_1x4

OUT_DIR = Path("demo-out/single-attack")


def main():
    model_a, model_b = linear_pair_1x4()
    oracle_a, oracle_b = model_a.oracle(), model_b.oracle()
    seed = seed_1x4()

    print("=" * 64)
    print("Single differential attack")
    print("=" * 64)
    print(f"models: {model_a.id} vs {model_b.id}")
    print(f"seed pixels: {[int(v) for v in seed.values]}")

    p1, p2 = oracle_a.query(seed), oracle_b.query(seed)
    print(f"\nseed predictions (they agree, so a search is needed):")
    print(f"  {model_a.id}: label {p1.top_label}, p={p1.top_prob:.4f}")
    print(f"  {model_b.id}: label {p2.top_label}, p={p2.top_prob:.4f}")

    cfg = AttackConfig(max_iterations=5000, c=0.001, rng_seed=7)
    result = hill_climb(seed, oracle_a, oracle_b, cfg)

    print(f"\noutcome: {result.status.value}")
    print(f"  queries per oracle : {result.queries_per_oracle}")
    print(f"  iterations         : {result.iterations}")
    print(f"  L2 to seed         : {result.l2:.3f}")
    print(f"  output divergence  : {result.divergence:.4f}")
    print(f"  adversarial pixels : {[int(v) for v in result.adversarial.values]}")

    f1, f2 = result.final_predictions
    print(f"\nfinal predictions (now disagreeing):")
    print(f"  {model_a.id}: label {f1.top_label}, p={f1.top_prob:.4f}")
    print(f"  {model_b.id}: label {f2.top_label}, p={f2.top_prob:.4f}")

    if result.accepted_scores:
        trace = ", ".join(f"{s:.4f}" for s in result.accepted_scores)
        print(f"\naccepted fitness trace (strictly increasing): {trace}")

    OUT_DIR.mkdir(parents=True, exist_ok=True)
    save_adversarial(seed, OUT_DIR / "seed.pgm")
    save_adversarial(result.adversarial, OUT_DIR / "adversarial.pgm")
    print(f"\nwrote {OUT_DIR}/seed.pgm and {OUT_DIR}/adversarial.pgm "
          f"(L2 distance {l2_distance(seed, result.adversarial):.3f})")


if __name__ == "__main__":
    main()
