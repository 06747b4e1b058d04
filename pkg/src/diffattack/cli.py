"""Command-line front end.

Subcommands: ``attack`` (one seed, one model pair), ``campaign`` (every
seed against every unordered pair), ``matrix`` (campaign plus a pair-DSR
matrix artifact, needs three or more models), and ``adapt-dsr`` (score a
single-model attack's saved adversarials against a second model).

Exit codes: 0 when the requested runs completed and artifacts were
written, 2 when a single attack ran its budget out without finding a
difference-inducing input, 1 for any configuration or runtime error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from .attack import AttackConfig, AttackStatus, DivergenceMode, hill_climb
from .campaign import dsr_matrix, render_matrix_csv, run_campaign
from .io import (ReportDocument, load_model, load_seeds, save_adversarial,
                 tensor_from_image_bytes, write_report)
from .metrics import AdversarialEntry, dsr_nondifferential
from .oracle import AccessLevel, Oracle, RemoteOracle, TaskKind
from .tensor import validate_shape

TIMEOUT_ENV_VAR = "DIFFATTACK_HTTP_TIMEOUT_MS"
MODE_CHOICES = {m.value: m for m in DivergenceMode}


class _Parser(argparse.ArgumentParser):
    # argparse exits 2 on bad flags by default; 2 is reserved for
    # "ran, no adversarial found", so remap usage errors to 1.
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(1)


def _http_timeout_seconds() -> float:
    raw = os.environ.get(TIMEOUT_ENV_VAR)
    if raw is None:
        return 10.0
    try:
        ms = float(raw)
        if ms <= 0:
            raise ValueError
    except ValueError:
        raise ValueError(f"{TIMEOUT_ENV_VAR} must be a positive number "
                         f"of milliseconds, got {raw!r}")
    return ms / 1000.0


def _add_attack_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--models", nargs="+", required=True,
                        metavar="FILE|URL",
                        help="model weight files or http(s) endpoints")
    parser.add_argument("--seeds", required=True, metavar="MANIFEST",
                        help="seed manifest JSON")
    parser.add_argument("--budget", type=int, default=10000, metavar="T",
                        help="per-oracle query budget (default 10000)")
    parser.add_argument("--c", type=float, default=0.001,
                        help="L2 rescaling constant (default 0.001)")
    parser.add_argument("--mode", choices=sorted(MODE_CHOICES),
                        default=DivergenceMode.REFERENCE_LABEL_GAP.value,
                        help="divergence mode (default ref-gap)")
    parser.add_argument("--delta", type=float, default=0.2,
                        help="regression success threshold (default 0.2)")
    parser.add_argument("--epsilon", type=float, default=None,
                        help="optional hard L2 perturbation cap")
    parser.add_argument("--rng-seed", type=int, default=1, metavar="U64",
                        help="base RNG seed (default 1)")
    parser.add_argument("--out", default="diffattack-out", metavar="DIR",
                        help="output directory (default diffattack-out)")
    parser.add_argument("--save-adversarials", action="store_true",
                        help="write adversarial inputs as PGM files")


def _add_campaign_flags(parser: argparse.ArgumentParser) -> None:
    _add_attack_flags(parser)
    parser.add_argument("--parallel", type=int, default=1, metavar="N",
                        help="concurrent (seed, pair) runs (default 1)")
    parser.add_argument("--format", choices=["csv", "json", "both"],
                        default="both", help="report format (default both)")


def _attack_config(args) -> AttackConfig:
    return AttackConfig(
        max_iterations=args.budget,
        c=args.c,
        divergence_mode=MODE_CHOICES[args.mode],
        regression_threshold=args.delta,
        rng_seed=args.rng_seed,
        epsilon=args.epsilon,
    )


def _build_oracles(specs: list[str], mode: DivergenceMode,
                   input_shape: tuple[int, ...]) -> list[Oracle]:
    task = (TaskKind.REGRESSION if mode is DivergenceMode.REGRESSION_GAP
            else TaskKind.CLASSIFICATION)
    timeout = _http_timeout_seconds()
    oracles: list[Oracle] = []
    for spec in specs:
        if spec.startswith(("http://", "https://")):
            oracles.append(RemoteOracle(spec, task, input_shape,
                                        AccessLevel.FULL_DISTRIBUTION, timeout))
        else:
            oracles.append(load_model(spec).oracle())
    return oracles


def _config_echo(args, command: str) -> dict:
    return {
        "command": command,
        "models": list(args.models),
        "seeds": args.seeds,
        "budget": args.budget,
        "c": args.c,
        "mode": args.mode,
        "delta": args.delta,
        "epsilon": args.epsilon,
        "rng_seed": args.rng_seed,
        "parallel": getattr(args, "parallel", 1),
    }


def _print_result(result) -> None:
    print(f"status: {result.status.value}")
    print(f"divergence: {result.divergence:.6f}")
    print(f"fitness: {result.fitness:.6f}")
    print(f"l2: {result.l2:.6f}")
    print(f"queries_per_oracle: {result.queries_per_oracle}")
    print(f"iterations: {result.iterations}")
    print(f"elapsed_ms: {result.elapsed * 1000.0:.3f}")
    s1, s2 = result.seed_labels
    f1, f2 = result.final_predictions
    if s1.task is TaskKind.CLASSIFICATION:
        print(f"seed labels: {s1.top_label} vs {s2.top_label}")
        print(f"final labels: {f1.top_label} vs {f2.top_label}")
    else:
        print(f"seed outputs: {s1.value:.6f} vs {s2.value:.6f}")
        print(f"final outputs: {f1.value:.6f} vs {f2.value:.6f}")


def cmd_attack(args) -> int:
    if len(args.models) != 2:
        raise ValueError(f"attack needs exactly 2 models, got {len(args.models)}")
    seeds = load_seeds(args.seeds)
    if len(seeds.entries) != 1:
        raise ValueError(f"attack needs exactly 1 seed, manifest has "
                         f"{len(seeds.entries)}")
    seed_id, tensor = seeds.entries[0]
    o1, o2 = _build_oracles(args.models, MODE_CHOICES[args.mode], seeds.shape)
    result = hill_climb(tensor, o1, o2, _attack_config(args))
    _print_result(result)
    if args.save_adversarials:
        out_dir = Path(args.out)
        out_dir.mkdir(parents=True, exist_ok=True)
        target = out_dir / f"adversarial_{seed_id}.pgm"
        save_adversarial(result.adversarial, target)
        print(f"adversarial written to {target}")
    return 0 if result.status is AttackStatus.SUCCESS else 2


def _run_campaign_command(args, command: str, min_models: int) -> tuple[int, dict]:
    if len(args.models) < min_models:
        raise ValueError(f"{command} needs at least {min_models} models, "
                         f"got {len(args.models)}")
    seeds = load_seeds(args.seeds)
    oracles = _build_oracles(args.models, MODE_CHOICES[args.mode], seeds.shape)
    records = run_campaign(oracles, seeds, _attack_config(args), args.parallel)
    doc = ReportDocument.build(records, _config_echo(args, command))

    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    if args.format in ("csv", "both"):
        write_report(doc, out_dir / "report.csv", "csv")
    if args.format in ("json", "both"):
        write_report(doc, out_dir / "report.json", "json")
    if args.save_adversarials:
        adv_dir = out_dir / "adversarials"
        adv_dir.mkdir(exist_ok=True)
        for rec in records:
            if rec.result.status is AttackStatus.SUCCESS:
                a, b = rec.model_pair
                save_adversarial(rec.result.adversarial,
                                 adv_dir / f"{rec.seed_id}__{a}__{b}.pgm")

    summary = doc.summary
    successes = sum(r.result.status is AttackStatus.SUCCESS for r in records)
    print(f"records: {len(records)} ({successes} successful)")
    for (a, b), value in sorted(summary.pair_dsr.items()):
        print(f"pair {a} / {b}: dsr {value:.6f}")
    print(f"overall_dsr: {summary.overall_dsr:.6f}")
    if summary.avg_l2 is not None:
        print(f"avg_l2: {summary.avg_l2:.6f}")
        print(f"avg_queries: {summary.avg_queries:.6f}")
        print(f"avg_time_ms: {summary.avg_time * 1000.0:.3f}")
    return 0, {"doc": doc, "oracles": oracles, "out_dir": out_dir}


def cmd_campaign(args) -> int:
    code, _ = _run_campaign_command(args, "campaign", min_models=2)
    return code


def cmd_matrix(args) -> int:
    code, ctx = _run_campaign_command(args, "matrix", min_models=3)
    doc, oracles, out_dir = ctx["doc"], ctx["oracles"], ctx["out_dir"]
    ids = [o.id for o in oracles]
    matrix = dsr_matrix(doc.summary, ids)
    (out_dir / "matrix.csv").write_text(render_matrix_csv(matrix, ids))
    (out_dir / "matrix.json").write_text(json.dumps({
        "models": ids,
        "matrix": matrix,
        "overall_dsr": doc.summary.overall_dsr,
    }, indent=2))
    print(f"matrix written to {out_dir / 'matrix.csv'}")
    return code


def cmd_adapt_dsr(args) -> int:
    if len(args.models) != 1:
        raise ValueError(f"adapt-dsr needs exactly 1 model (the second model), "
                         f"got {len(args.models)}")
    manifest_path = Path(args.manifest)
    doc = json.loads(manifest_path.read_text())
    shape = validate_shape(doc["shape"])

    entries = []
    for item in doc["entries"]:
        seed_id = str(item["seed_id"])
        file_path = manifest_path.parent / item["file"]
        tensor = tensor_from_image_bytes(file_path.read_bytes(), shape,
                                         f"entry {seed_id!r}")
        entries.append(AdversarialEntry(
            seed_id=seed_id,
            model_a_id=str(doc.get("model_a", "model-a")),
            adversarial=tensor,
            success_on_a=bool(item["success_on_a"]),
            model_a_label=item.get("label"),
            model_a_value=item.get("value"),
        ))

    mode = MODE_CHOICES[args.mode]
    (model_b,) = _build_oracles(args.models, mode, shape)
    ratio = dsr_nondifferential(entries, model_b, args.delta)
    print(f"adapted_dsr: {ratio:.6f}")
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "adapted_dsr.json").write_text(json.dumps({
        "adapted_dsr": ratio,
        "entries": len(entries),
        "model_b": model_b.id,
    }, indent=2))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="diffattack",
                     description="Black-box differential adversarial input "
                                 "generation and evaluation.")
    sub = parser.add_subparsers(dest="command", required=True)

    p_attack = sub.add_parser("attack", help="attack one seed with one model pair")
    _add_attack_flags(p_attack)
    p_attack.set_defaults(func=cmd_attack)

    p_campaign = sub.add_parser("campaign",
                                help="attack every seed against every model pair")
    _add_campaign_flags(p_campaign)
    p_campaign.set_defaults(func=cmd_campaign)

    p_matrix = sub.add_parser("matrix",
                              help="campaign plus an all-pairs DSR matrix "
                                   "(needs >= 3 models)")
    _add_campaign_flags(p_matrix)
    p_matrix.set_defaults(func=cmd_matrix)

    p_adapt = sub.add_parser("adapt-dsr",
                             help="score saved single-model adversarials "
                                  "against a second model")
    p_adapt.add_argument("--manifest", required=True,
                         help="adversarial manifest JSON recording the first "
                              "model's outputs")
    p_adapt.add_argument("--models", nargs="+", required=True,
                         metavar="FILE|URL", help="the second model")
    p_adapt.add_argument("--mode", choices=sorted(MODE_CHOICES),
                         default=DivergenceMode.REFERENCE_LABEL_GAP.value,
                         help="task mode; use 'regression' for scalar models")
    p_adapt.add_argument("--delta", type=float, default=0.2,
                         help="regression gap threshold (default 0.2)")
    p_adapt.add_argument("--out", default="diffattack-out", metavar="DIR")
    p_adapt.set_defaults(func=cmd_adapt_dsr)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except SystemExit:
        raise
    except Exception as exc:
        print(f"diffattack: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
