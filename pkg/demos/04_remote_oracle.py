#!/usr/bin/env python3
"""Attack models served over HTTP instead of loaded in-process.

Starts two stub servers speaking the JSON prediction protocol, points
remote oracles at them, and runs the same hill-climbing attack as the
local demos. Also injects server failures to show the client's retry
behavior (3 attempts, 100 ms backoff).

Usage:
    python demos/04_remote_oracle.py
"""

from diffattack import (AttackConfig, RemoteOracle, StubModelServer,
                        TransportError, hill_climb)
from diffattack.fixtures import linear_pair_1x4, seed_1x4


def main():
    model_a, model_b = linear_pair_1x4()
    seed = seed_1x4()

    with StubModelServer(model_a) as server_a, \
            StubModelServer(model_b) as server_b:
        print("=" * 64)
        print("Remote oracles")
        print("=" * 64)
        print(f"serving {model_a.id} at {server_a.url}")
        print(f"serving {model_b.id} at {server_b.url}")

        remote_a = RemoteOracle(server_a.url, model_a.task, model_a.input_shape)
        remote_b = RemoteOracle(server_b.url, model_b.task, model_b.input_shape)

        print(f"\nwire answer for the seed: "
              f"{remote_a.query(seed).to_dict()}")

        result = hill_climb(seed, remote_a, remote_b,
                            AttackConfig(max_iterations=2000, rng_seed=5))
        print(f"\nattack over HTTP: {result.status.value} after "
              f"{result.queries_per_oracle} queries per oracle")

        print("\ninjecting 2 server failures; the client retries through them:")
        server_a.fail_next = 2
        pred = remote_a.query(seed)
        print(f"  recovered answer: label {pred.top_label}, "
              f"p={pred.top_prob:.4f}")

        print("injecting 3 failures; the retry budget is exhausted:")
        server_a.fail_next = 3
        try:
            remote_a.query(seed)
        except TransportError as exc:
            print(f"  raised as expected: {exc}")


if __name__ == "__main__":
    main()
