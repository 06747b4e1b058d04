#!/usr/bin/env python3
"""Run a 50-seed campaign over the bundled 8x8 model pair and aggregate the
differential success rate, L2, query, and timing metrics.

Also writes the model/seed files to disk and prints the equivalent CLI
invocation, so the same campaign can be replayed from the shell.

Usage:
    python demos/02_campaign_and_metrics.py
"""

from pathlib import Path

from diffattack import (AttackConfig, ReportDocument, SeedSet, run_campaign,
                        save_model, write_report, write_seed_files)
from diffattack.fixtures import campaign_seeds_8x8, mlp_pair_8x8

OUT_DIR = Path("demo-out/campaign")


def ascii_histogram(histogram, width=40):
    top = max(histogram.counts) or 1
    lines = []
    for i, count in enumerate(histogram.counts):
        lo, hi = histogram.edges[i], histogram.edges[min(i + 1,
                                                         len(histogram.edges) - 1)]
        bar = "#" * round(width * count / top)
        lines.append(f"  [{lo:9.2f}, {hi:9.2f}] {bar} {count}")
    return "\n".join(lines)


def main():
    model_a, model_b = mlp_pair_8x8()
    seeds = campaign_seeds_8x8(50)
    seed_set = SeedSet(entries=tuple(seeds), manifest_path="<memory>")
    cfg = AttackConfig(max_iterations=10000, c=0.001, rng_seed=11)

    print("=" * 64)
    print(f"Campaign: {len(seeds)} seeds x pair ({model_a.id}, {model_b.id})")
    print("=" * 64)

    records = run_campaign([model_a.oracle(), model_b.oracle()], seed_set,
                           cfg, parallel=4)
    doc = ReportDocument.build(records, {
        "budget": cfg.max_iterations, "c": cfg.c, "rng_seed": cfg.rng_seed,
    })
    summary = doc.summary

    print(f"\noverall DSR : {summary.overall_dsr:.3f}")
    print(f"avg L2      : {summary.avg_l2:.3f}   (successes only)")
    print(f"avg queries : {summary.avg_queries:.1f}")
    print(f"avg time    : {summary.avg_time * 1000:.2f} ms")

    print("\nL2 distribution over successful attacks:")
    print(ascii_histogram(summary.histograms["l2"]))
    print("\nquery-count distribution:")
    print(ascii_histogram(summary.histograms["queries"]))

    OUT_DIR.mkdir(parents=True, exist_ok=True)
    write_report(doc, OUT_DIR / "report.csv", "csv")
    write_report(doc, OUT_DIR / "report.json", "json")

    # the same campaign from the shell
    save_model(model_a, OUT_DIR / "grid8-base.json")
    save_model(model_b, OUT_DIR / "grid8-trigger.json")
    manifest = write_seed_files(seeds, (8, 8), OUT_DIR / "seeds")
    print(f"\nartifacts in {OUT_DIR}/ ; replay from the shell with:")
    print(f"  diffattack campaign \\")
    print(f"    --models {OUT_DIR}/grid8-base.json {OUT_DIR}/grid8-trigger.json \\")
    print(f"    --seeds {manifest} --budget 10000 --c 0.001 --rng-seed 11 \\")
    print(f"    --out {OUT_DIR}/cli")


if __name__ == "__main__":
    main()
