"""Acceptance gate: one test per shipped guarantee, each printing a
PASS/FAIL line (run with -s to see them). Tolerances and runtime bounds are
pinned here and nowhere else.
"""

import dataclasses
import json
import math
import time
from contextlib import contextmanager

import numpy as np
import pytest

from diffattack import (AdversarialEntry, AttackConfig,
                        AttackStatus, DivergenceMode, InputTensor, LayerSpec,
                        LocalModel, Prediction, RemoteOracle, ReportDocument,
                        SeedSet, StubModelServer, TaskKind, TransportError,
                        divergence, dsr_differential, dsr_nondifferential,
                        fitness, forward, hill_climb, l2_distance, load_seeds,
                        read_report, run_campaign, save_adversarial,
                        set_pixel, write_report)
from diffattack.fixtures import (campaign_seeds_8x8, linear_pair_1x4,
                                 mlp_pair_8x8, regression_pair_8x8,
                                 regression_seeds_8x8, seed_1x4,
                                 threshold_classifier)
from diffattack.metrics import CampaignRecord


@contextmanager
def criterion(number: int, title: str, budget_seconds: float):
    started = time.perf_counter()
    try:
        yield
    except BaseException:
        print(f"\n[FAIL] criterion {number}: {title}")
        raise
    elapsed = time.perf_counter() - started
    assert elapsed < budget_seconds, (
        f"criterion {number} took {elapsed:.2f}s, budget {budget_seconds}s")
    print(f"\n[PASS] criterion {number}: {title} ({elapsed:.2f}s)")


def test_criterion_01_forward_pass_fixtures():
    with criterion(1, "hand-computed forward passes match to 1e-9", 1.0):
        # 1) identity dense
        out = forward((LayerSpec.dense([[1, 0], [0, 1]], [0, 0]),),
                      InputTensor((2,), [3, 4]), normalizer=1.0)
        assert np.allclose(out, [3.0, 4.0], atol=1e-9)

        # 2) softmax symmetry
        out = forward((LayerSpec.dense(np.eye(3), np.zeros(3)),
                       LayerSpec.softmax()),
                      InputTensor.zeros((3,)), normalizer=1.0)
        assert np.allclose(out, [1 / 3, 1 / 3, 1 / 3], atol=1e-9)

        # 3) hand matrix multiply then relu
        dense = LayerSpec.dense([[1, -1], [0, 2]], [0.5, 0])
        out = forward((dense, LayerSpec.relu()), InputTensor((2,), [2, 1]), 1.0)
        assert np.allclose(out, [1.5, 2.0], atol=1e-9)

        # 4) logits [0, ln 3] -> softmax [1/4, 3/4]
        model = LocalModel(
            id="ln3", task=TaskKind.CLASSIFICATION, input_shape=(1,),
            layers=(LayerSpec.dense([[0.0], [math.log(3.0)]], [0.0, 0.0]),
                    LayerSpec.softmax()))
        pred = model.oracle().query(InputTensor((1,), [255.0]))
        assert pred.top_label == 1
        assert abs(pred.top_prob - 0.75) <= 1e-9
        assert abs(pred.distribution[0] - 0.25) <= 1e-9

        # 5) normalizer + relu clip through two dense layers:
        # x=[255,0] /255 -> [1,0]; W1+b1 -> [1,-2.5]; relu -> [1,0];
        # W2 -> [1,1]; softmax -> [0.5,0.5]
        layers = (LayerSpec.dense([[2, 1], [-3, 4]], [-1.0, 0.5]),
                  LayerSpec.relu(),
                  LayerSpec.dense([[1, 1], [1, -1]], [0.0, 0.0]),
                  LayerSpec.softmax())
        out = forward(layers, InputTensor((2,), [255.0, 0.0]), normalizer=255.0)
        assert np.allclose(out, [0.5, 0.5], atol=1e-9)


def _random_tiny_pair(run_index: int):
    rng = np.random.default_rng(run_index)
    n_in, n_classes, hidden = 4, 2, 5

    def model(model_id, weights1, bias1, weights2, bias2):
        return LocalModel(
            id=model_id, task=TaskKind.CLASSIFICATION, input_shape=(n_in,),
            layers=(LayerSpec.dense(weights1, bias1), LayerSpec.relu(),
                    LayerSpec.dense(weights2, bias2), LayerSpec.softmax()))

    w1 = rng.normal(size=(hidden, n_in))
    b1 = rng.normal(size=hidden)
    w2 = rng.normal(size=(n_classes, hidden))
    b2 = rng.normal(size=n_classes)
    first = model("first", w1, b1, w2, b2)
    if run_index % 2 == 0:
        second = model("second", rng.normal(size=(hidden, n_in)),
                       rng.normal(size=hidden),
                       rng.normal(size=(n_classes, hidden)),
                       rng.normal(size=n_classes))
    else:
        # near-identical twin: small weight noise, often exhausts the budget
        second = model("second", w1 + 0.01 * rng.normal(size=w1.shape), b1,
                       w2 + 0.01 * rng.normal(size=w2.shape), b2)
    x = InputTensor((n_in,), rng.uniform(0, 255, n_in))
    return first, second, x


def test_criterion_02_hill_climb_soundness_suite():
    with criterion(2, "200 randomized hill-climb runs stay sound", 30.0):
        budget = 200
        statuses = set()
        for run_index in range(200):
            first, second, x = _random_tiny_pair(run_index)
            cfg = AttackConfig(max_iterations=budget, rng_seed=run_index)
            result = hill_climb(x, first.oracle(), second.oracle(), cfg)
            statuses.add(result.status)

            scores = result.accepted_scores
            assert all(b > a for a, b in zip(scores, scores[1:]))
            assert result.queries_per_oracle <= budget

            if result.status is AttackStatus.SUCCESS:
                p1 = first.oracle().query(result.adversarial)
                p2 = second.oracle().query(result.adversarial)
                assert p1.top_label != p2.top_label

            again = hill_climb(x, first.oracle(), second.oracle(), cfg)
            assert dataclasses.replace(result, elapsed=0.0) == \
                dataclasses.replace(again, elapsed=0.0)
        assert statuses == {AttackStatus.SUCCESS, AttackStatus.BUDGET_EXHAUSTED}


def test_criterion_03_exhaustive_oracle_equivalence():
    with criterion(3, "brute force proves a reachable disagreement and the "
                      "search finds it in >= 9/10 runs", 10.0):
        model_a, model_b = linear_pair_1x4()
        o1, o2 = model_a.oracle(), model_b.oracle()
        x = seed_1x4()

        diae_found = 0
        for index in range(x.element_count):
            for value in range(256):
                cand = set_pixel(x, index, float(value))
                if o1.query(cand).top_label != o2.query(cand).top_label:
                    diae_found += 1
        assert diae_found > 0

        wins = 0
        for seed in range(10):
            result = hill_climb(x, model_a.oracle(), model_b.oracle(),
                                AttackConfig(max_iterations=5000,
                                             rng_seed=seed))
            if result.status is AttackStatus.SUCCESS:
                f1, f2 = result.final_predictions
                assert f1.top_label != f2.top_label
                wins += 1
        assert wins >= 9


def _canned_result(pred):
    from diffattack import AttackResult
    return AttackResult(
        status=AttackStatus.SUCCESS, adversarial=InputTensor((1,), [0.0]),
        divergence=0.5, fitness=0.4, l2=1.0, queries_per_oracle=1,
        iterations=1, elapsed=0.001, seed_labels=(pred, pred),
        final_predictions=(pred, pred), accepted_scores=(0.0,))


def _rate_records(rates: dict) -> list:
    pred = Prediction(TaskKind.CLASSIFICATION, top_label=0, top_prob=0.9)
    other = Prediction(TaskKind.CLASSIFICATION, top_label=1, top_prob=0.8)
    records = []
    for pair, rate in rates.items():
        hits = round(rate * 1000)
        for i in range(1000):
            ok = i < hits
            result = dataclasses.replace(
                _canned_result(pred),
                status=AttackStatus.SUCCESS if ok else AttackStatus.BUDGET_EXHAUSTED,
                final_predictions=(pred, other if ok else pred))
            records.append(CampaignRecord(seed_id=f"s{i}", model_pair=pair,
                                          result=result))
    return records


def test_criterion_04_dsr_averaging_matches_reference_mean():
    with criterion(4, "pair-rate averaging reproduces the 0.992 reference "
                      "mean within 0.002", 5.0):
        rates = {("d121", "mnv2"): 1.0, ("d121", "rn34"): 1.0,
                 ("d121", "vgg16"): 1.0, ("d121", "vgg19"): 1.0,
                 ("mnv2", "rn34"): 1.0, ("mnv2", "vgg16"): 0.989,
                 ("mnv2", "vgg19"): 0.989, ("rn34", "vgg16"): 0.988,
                 ("rn34", "vgg19"): 0.988, ("vgg16", "vgg19"): 0.977}
        report = dsr_differential(_rate_records(rates))
        for pair, rate in rates.items():
            assert report.pair_dsr[pair] == pytest.approx(rate, abs=1e-12)
        assert abs(report.overall_dsr - 0.992) <= 0.002


def test_criterion_05_fixture_campaign_dsr(tmp_path):
    with criterion(5, "50-seed fixture campaign reaches DSR >= 0.95 with a "
                      "byte-stable report", 300.0):
        model_a, model_b = mlp_pair_8x8()
        seeds = campaign_seeds_8x8(50)

        # verified-reachable disagreement: lighting any trigger pixel flips
        # exactly one of the two models on every seed
        from diffattack.fixtures import TRIGGER_PIXELS_8X8
        for seed_id, tensor in seeds:
            probe = set_pixel(tensor, TRIGGER_PIXELS_8X8[0], 255.0)
            p1 = model_a.oracle().query(probe)
            p2 = model_b.oracle().query(probe)
            assert p1.top_label != p2.top_label, seed_id

        seed_set = SeedSet(entries=tuple(seeds), manifest_path="<memory>")
        cfg = AttackConfig(max_iterations=10000, c=0.001, rng_seed=11)
        csv_texts = []
        for run in range(2):
            records = run_campaign([model_a.oracle(), model_b.oracle()],
                                   seed_set, cfg)
            report = dsr_differential(records)
            assert report.overall_dsr >= 0.95
            assert report.avg_queries is not None
            assert report.avg_queries <= 10000
            doc = ReportDocument.build(records, {"campaign": "fixture-a"})
            path = tmp_path / f"report{run}.csv"
            write_report(doc, path, "csv")
            csv_texts.append(path.read_text())

        drop_elapsed = lambda text: [line.rsplit(",", 1)[0]
                                     for line in text.splitlines()]
        assert drop_elapsed(csv_texts[0]) == drop_elapsed(csv_texts[1])


def test_criterion_06_regression_campaign_gap_soundness():
    with criterion(6, "every successful regression run re-queries to a gap "
                      ">= 0.2", 60.0):
        model_a, model_b = regression_pair_8x8()
        seeds = regression_seeds_8x8(10)
        seed_set = SeedSet(entries=tuple(seeds), manifest_path="<memory>")
        cfg = AttackConfig(max_iterations=10000, c=0.001, rng_seed=3,
                           divergence_mode=DivergenceMode.REGRESSION_GAP,
                           regression_threshold=0.2)
        records = run_campaign([model_a.oracle(), model_b.oracle()],
                               seed_set, cfg)
        successes = [r for r in records
                     if r.result.status is AttackStatus.SUCCESS]
        assert successes, "no successful regression runs to check"
        for rec in successes:
            v1 = model_a.oracle().query(rec.result.adversarial).value
            v2 = model_b.oracle().query(rec.result.adversarial).value
            assert abs(v1 - v2) >= 0.2


def test_criterion_07_c_zero_ignores_distance_rescaling():
    with criterion(7, "with c=0, accept/reject is invariant to rescaling "
                      "the distance term", 5.0):
        rng = np.random.default_rng(123)
        cfg = AttackConfig(max_iterations=1, c=0.0)
        for _ in range(100):
            x = InputTensor((4,), rng.uniform(0, 255, 4))
            prev = InputTensor((4,), rng.uniform(0, 255, 4))
            cand = InputTensor((4,), rng.uniform(0, 255, 4))
            dists = [rng.dirichlet(np.ones(3)) for _ in range(4)]
            preds = [Prediction(TaskKind.CLASSIFICATION,
                                top_label=int(np.argmax(d)),
                                top_prob=float(np.max(d)),
                                distribution=tuple(float(p) for p in d))
                     for d in dists]
            ref = 0
            decision = (fitness(x, cand, preds[2], preds[3], cfg, ref) >
                        fitness(x, prev, preds[0], preds[1], cfg, ref))
            for scale in (1e-6, 1e-3, 1.0, 1e3, 1e6):
                prev_score = divergence(preds[0], preds[1],
                                        cfg.divergence_mode, ref) \
                    - cfg.c * scale * l2_distance(prev, x)
                cand_score = divergence(preds[2], preds[3],
                                        cfg.divergence_mode, ref) \
                    - cfg.c * scale * l2_distance(cand, x)
                assert (cand_score > prev_score) == decision


def test_criterion_08_nondifferential_adaptation_exact_values():
    with criterion(8, "adapted success rate scores 0.5 on the threshold "
                      "pair and 0.0 on an identical model", 5.0):
        entries = [
            AdversarialEntry("s0", "low", InputTensor((1, 2), [150.0, 0.0]),
                             success_on_a=True, model_a_label=1),
            AdversarialEntry("s1", "low", InputTensor((1, 2), [220.0, 0.0]),
                             success_on_a=True, model_a_label=1),
        ]
        other = threshold_classifier(200.5, "high").oracle()
        assert dsr_nondifferential(entries, other) == 0.5
        same = threshold_classifier(128.5, "low-copy").oracle()
        assert dsr_nondifferential(entries, same) == 0.0


def test_criterion_09_codec_round_trips(tmp_path):
    with criterion(9, "PGM and JSON report round trips hold on 1000 "
                      "randomized integer tensors", 10.0):
        rng = np.random.default_rng(5150)
        tensors = []
        for case in range(1000):
            shape = (int(rng.integers(1, 9)), int(rng.integers(1, 9)))
            values = rng.integers(0, 256, size=shape).ravel().astype(float)
            tensors.append(InputTensor(shape, values))

        # PGM save -> manifest load identity for every tensor
        seen = 0
        for i, x in enumerate(tensors):
            save_adversarial(x, tmp_path / "case.pgm")
            manifest = tmp_path / "case.json"
            manifest.write_text(json.dumps({
                "shape": list(x.shape),
                "seeds": [{"id": f"case{i}", "file": "case.pgm"}],
            }))
            loaded = load_seeds(manifest).entries[0][1]
            assert loaded == x
            seen += 1
        assert seen == 1000

        # JSON report round trip embedding the same tensors
        pred = Prediction(TaskKind.CLASSIFICATION, top_label=0, top_prob=1.0)
        for chunk_start in range(0, 1000, 100):
            records = []
            for j, x in enumerate(tensors[chunk_start:chunk_start + 100]):
                result = dataclasses.replace(
                    _canned_result(pred), adversarial=x,
                    l2=float(rng.uniform(0, 100)),
                    elapsed=float(rng.uniform(0, 1)))
                records.append(CampaignRecord(
                    seed_id=f"s{j}", model_pair=("a", "b"), result=result))
            doc = ReportDocument.build(records, {"chunk": chunk_start})
            path = tmp_path / "report.json"
            write_report(doc, path, "json")
            assert read_report(path) == doc


def test_criterion_10_remote_oracle_conformance():
    with criterion(10, "remote answers equal the local engine and 500s "
                       "trigger the 3-attempt retry", 30.0):
        model_a, _ = linear_pair_1x4()
        with StubModelServer(model_a) as server:
            remote = RemoteOracle(server.url, model_a.task,
                                  model_a.input_shape)
            local = model_a.oracle()
            rng = np.random.default_rng(8)
            for _ in range(20):
                x = InputTensor((1, 4), rng.integers(0, 256, 4).astype(float))
                assert remote.query(x) == local.query(x)

            baseline = server.request_count
            server.fail_next = 2
            assert remote.query(seed_1x4()) == local.query(seed_1x4())
            assert server.request_count == baseline + 3

            server.fail_next = 3
            with pytest.raises(TransportError) as err:
                remote.query(seed_1x4())
            assert err.value.attempts == 3
