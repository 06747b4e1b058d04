#!/usr/bin/env python3
"""Score a single-model attack's outputs with the adapted differential rate.

A single-model (non-differential) attack only certifies that its
adversarial input fools model A. The adaptation replays each saved input
against a second model B and counts it as difference-inducing only when
B answers differently than A's recorded output; failed attacks keep their
place in the denominator.

Usage:
    python demos/05_adapted_success_rate.py
"""

from diffattack import AdversarialEntry, InputTensor, dsr_nondifferential
from diffattack.fixtures import threshold_classifier


def main():
    # model A labels an input 1 when pixel 0 exceeds 128.5; picture a
    # single-model attack having produced these inputs against it
    entries = [
        AdversarialEntry("s0", "low", InputTensor((1, 2), [150.0, 0.0]),
                         success_on_a=True, model_a_label=1),
        AdversarialEntry("s1", "low", InputTensor((1, 2), [220.0, 0.0]),
                         success_on_a=True, model_a_label=1),
        AdversarialEntry("s2", "low", InputTensor((1, 2), [40.0, 0.0]),
                         success_on_a=False),  # the attack failed here
    ]

    print("=" * 64)
    print("Adapted differential success rate for a single-model attack")
    print("=" * 64)
    print(f"saved adversarials: {len(entries)} "
          f"({sum(e.success_on_a for e in entries)} fooled model A)")

    model_b = threshold_classifier(200.5, "high")
    rate = dsr_nondifferential(entries, model_b.oracle())
    print(f"\nagainst {model_b.id} (threshold 200.5): adapted DSR = {rate:.3f}")
    print("  pixel 150 -> B answers 0, A recorded 1  -> difference-inducing")
    print("  pixel 220 -> B answers 1, A recorded 1  -> not difference-inducing")
    print("  failed attack counts 0 but stays in the denominator")

    same = threshold_classifier(128.5, "low-copy")
    rate_same = dsr_nondifferential(entries, same.oracle())
    print(f"\nagainst an identical model: adapted DSR = {rate_same:.3f} "
          f"(no disagreement is ever possible)")


if __name__ == "__main__":
    main()
