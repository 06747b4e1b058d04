"""Bit-exact codecs for seed images, model weights, and campaign reports.

Formats:
  * Seed manifest: JSON ``{"shape": [...], "seeds": [{"id", "file"}]}``;
    each file is binary PGM (P5, maxval 255) or a raw byte file of exactly
    product(shape) bytes, mapped row-major onto the declared shape.
  * Model weights: JSON ``{"id", "task", "input_shape", "normalizer",
    "layers"}`` with dense weights stored row-major, out x in.
  * Reports: CSV rows ``seed_id,model_a,model_b,status,divergence,l2,
    queries,iterations,elapsed_ms`` (6 fractional digits), or a JSON
    document mirroring the in-memory report including the summary block.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .attack import AttackResult, AttackStatus
from .metrics import (CampaignRecord, DsrReport, Histogram, dsr_differential)
from .oracle import LocalModel, Prediction, model_from_dict, model_to_dict
from .tensor import InputTensor, validate_shape

__all__ = [
    "ReportDocument",
    "SeedSet",
    "load_model",
    "load_seeds",
    "read_pgm",
    "read_report",
    "read_report_csv",
    "save_adversarial",
    "save_model",
    "tensor_from_image_bytes",
    "write_pgm",
    "write_report",
    "write_seed_files",
]

REPORT_SCHEMA_VERSION = 1
CSV_HEADER = ["seed_id", "model_a", "model_b", "status", "divergence",
              "l2", "queries", "iterations", "elapsed_ms"]


# ---------------------------------------------------------------------------
# PGM (P5) codec

def _parse_pgm(data: bytes, source: str) -> tuple[int, int, bytes]:
    # Header tokens may be separated by any whitespace; '#' starts a comment.
    pos = 0
    tokens: list[bytes] = []
    while len(tokens) < 4:
        while pos < len(data) and data[pos:pos + 1].isspace():
            pos += 1
        if pos < len(data) and data[pos:pos + 1] == b"#":
            while pos < len(data) and data[pos:pos + 1] != b"\n":
                pos += 1
            continue
        start = pos
        while pos < len(data) and not data[pos:pos + 1].isspace():
            pos += 1
        if start == pos:
            raise ValueError(f"{source}: truncated PGM header")
        tokens.append(data[start:pos])
    if tokens[0] != b"P5":
        raise ValueError(f"{source}: not a binary PGM (P5) file")
    width, height, maxval = (int(t) for t in tokens[1:])
    if maxval != 255:
        raise ValueError(f"{source}: PGM maxval must be 255, got {maxval}")
    pos += 1  # single whitespace byte after maxval
    pixels = data[pos:pos + width * height]
    if len(pixels) != width * height:
        raise ValueError(
            f"{source}: PGM payload has {len(pixels)} bytes, "
            f"expected {width * height}"
        )
    return width, height, pixels


def read_pgm(path) -> tuple[int, int, bytes]:
    """Parse a binary PGM file into (width, height, pixel bytes)."""
    data = Path(path).read_bytes()
    return _parse_pgm(data, str(path))


def tensor_from_image_bytes(data: bytes, shape, source: str) -> InputTensor:
    """Decode PGM (by magic) or raw bytes into a tensor of ``shape``.

    ``source`` names the origin in error messages, e.g. a seed id.
    """
    shape = validate_shape(shape)
    count = math.prod(shape)
    if data.startswith(b"P5"):
        width, height, pixels = _parse_pgm(data, source)
        if width * height != count:
            raise ValueError(
                f"{source}: PGM is {width}x{height} ({width * height} px), "
                f"shape {shape} needs {count}"
            )
    else:
        pixels = data
        if len(pixels) != count:
            raise ValueError(
                f"{source}: raw file has {len(pixels)} bytes, "
                f"shape {shape} needs {count}"
            )
    values = np.frombuffer(pixels, dtype=np.uint8).astype(np.float64)
    return InputTensor(shape, values)


def write_pgm(path, width: int, height: int, pixels: bytes) -> None:
    if len(pixels) != width * height:
        raise ValueError(f"pixel payload has {len(pixels)} bytes, "
                         f"expected {width * height}")
    with open(path, "wb") as fh:
        fh.write(f"P5\n{width} {height}\n255\n".encode("ascii"))
        fh.write(pixels)


def save_adversarial(x: InputTensor, path) -> None:
    """Write a tensor as binary PGM, rounding half-up and clamping to 0..255.

    Supports 2-D shapes and 2-D plus a single trailing channel.
    """
    shape = x.shape
    if len(shape) == 3 and shape[2] == 1:
        shape = shape[:2]
    if len(shape) != 2:
        raise ValueError(f"cannot write shape {x.shape} as PGM; "
                         f"need 2-D or 2-D with one channel")
    height, width = shape
    rounded = np.clip(np.floor(x.values + 0.5), 0, 255).astype(np.uint8)
    write_pgm(path, width, height, rounded.tobytes())


# ---------------------------------------------------------------------------
# Seed sets

@dataclass(frozen=True)
class SeedSet:
    """Seed inputs loaded from a manifest; ids unique, one shared shape."""

    entries: tuple[tuple[str, InputTensor], ...]
    manifest_path: str

    @property
    def shape(self) -> tuple[int, ...]:
        return self.entries[0][1].shape


def load_seeds(manifest_path) -> SeedSet:
    """Load a seed manifest and every image it references."""
    manifest_path = Path(manifest_path)
    doc = json.loads(manifest_path.read_text())
    shape = validate_shape(doc["shape"])
    seeds = doc.get("seeds", [])
    if not seeds:
        raise ValueError(f"{manifest_path}: manifest lists no seeds")

    entries = []
    seen = set()
    for item in seeds:
        seed_id = str(item["id"])
        if seed_id in seen:
            raise ValueError(f"{manifest_path}: duplicate seed id {seed_id!r}")
        seen.add(seed_id)
        file_path = manifest_path.parent / item["file"]
        if not file_path.exists():
            raise ValueError(f"seed {seed_id!r}: file {file_path} does not exist")
        tensor = tensor_from_image_bytes(file_path.read_bytes(), shape,
                                         f"seed {seed_id!r}")
        entries.append((seed_id, tensor))
    return SeedSet(entries=tuple(entries), manifest_path=str(manifest_path))


def write_seed_files(entries, shape, out_dir, fmt: str = "pgm") -> Path:
    """Write seed tensors plus a manifest into ``out_dir``; returns the manifest path.

    ``fmt`` is ``pgm`` for 2-D shapes or ``raw`` for anything byte-exact.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    shape = validate_shape(shape)
    listed = []
    for seed_id, tensor in entries:
        if tensor.shape != shape:
            raise ValueError(f"seed {seed_id!r} has shape {tensor.shape}, "
                             f"manifest declares {shape}")
        if fmt == "pgm":
            name = f"{seed_id}.pgm"
            save_adversarial(tensor, out_dir / name)
        elif fmt == "raw":
            name = f"{seed_id}.raw"
            data = np.clip(np.floor(tensor.values + 0.5), 0, 255).astype(np.uint8)
            (out_dir / name).write_bytes(data.tobytes())
        else:
            raise ValueError(f"unknown seed format {fmt!r}")
        listed.append({"id": seed_id, "file": name})
    manifest = out_dir / "seeds.json"
    manifest.write_text(json.dumps({"shape": list(shape), "seeds": listed},
                                   indent=2))
    return manifest


# ---------------------------------------------------------------------------
# Model files

def load_model(path) -> LocalModel:
    try:
        doc = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ValueError(f"{path}: not valid JSON: {exc}") from exc
    try:
        return model_from_dict(doc)
    except (ValueError, KeyError, TypeError) as exc:
        raise ValueError(f"{path}: {exc}") from exc


def save_model(model: LocalModel, path) -> None:
    Path(path).write_text(json.dumps(model_to_dict(model), indent=2))


# ---------------------------------------------------------------------------
# Report documents

@dataclass(frozen=True)
class ReportDocument:
    """A campaign's full output: config echo, per-run rows, and the summary."""

    config: dict
    records: tuple[CampaignRecord, ...]
    summary: DsrReport
    schema_version: int = REPORT_SCHEMA_VERSION

    @classmethod
    def build(cls, records, config: dict, bin_count: int = 10) -> "ReportDocument":
        records = tuple(records)
        seeds = {r.seed_id for r in records}
        pairs = {r.model_pair for r in records}
        if len(records) != len(seeds) * len(pairs):
            raise ValueError(
                f"{len(records)} records do not cover "
                f"{len(seeds)} seeds x {len(pairs)} pairs"
            )
        return cls(config=dict(config), records=records,
                   summary=dsr_differential(list(records), bin_count))


def _tensor_to_dict(x: InputTensor) -> dict:
    return {"shape": list(x.shape), "values": x.values.tolist()}


def _tensor_from_dict(doc: dict) -> InputTensor:
    return InputTensor(tuple(doc["shape"]), doc["values"])


def _result_to_dict(result: AttackResult) -> dict:
    return {
        "status": result.status.value,
        "divergence": result.divergence,
        "fitness": result.fitness,
        "l2": result.l2,
        "queries_per_oracle": result.queries_per_oracle,
        "iterations": result.iterations,
        "elapsed": result.elapsed,
        "adversarial": _tensor_to_dict(result.adversarial),
        "seed_labels": [p.to_dict() for p in result.seed_labels],
        "final_predictions": [p.to_dict() for p in result.final_predictions],
        "accepted_scores": list(result.accepted_scores),
    }


def _result_from_dict(doc: dict) -> AttackResult:
    return AttackResult(
        status=AttackStatus(doc["status"]),
        adversarial=_tensor_from_dict(doc["adversarial"]),
        divergence=doc["divergence"],
        fitness=doc["fitness"],
        l2=doc["l2"],
        queries_per_oracle=doc["queries_per_oracle"],
        iterations=doc["iterations"],
        elapsed=doc["elapsed"],
        seed_labels=tuple(Prediction.from_dict(p) for p in doc["seed_labels"]),
        final_predictions=tuple(Prediction.from_dict(p)
                                for p in doc["final_predictions"]),
        accepted_scores=tuple(doc["accepted_scores"]),
    )


def _summary_to_dict(summary: DsrReport) -> dict:
    out = {
        "pair_dsr": [
            {"model_a": a, "model_b": b, "dsr": v}
            for (a, b), v in sorted(summary.pair_dsr.items())
        ],
        "overall_dsr": summary.overall_dsr,
        "avg_l2": summary.avg_l2,
        "avg_queries": summary.avg_queries,
        "avg_time": summary.avg_time,
        "histograms": None,
    }
    if summary.histograms is not None:
        out["histograms"] = {
            name: {"edges": list(h.edges), "counts": list(h.counts)}
            for name, h in summary.histograms.items()
        }
    return out


def _summary_from_dict(doc: dict) -> DsrReport:
    histograms = None
    if doc.get("histograms") is not None:
        histograms = {
            name: Histogram(edges=tuple(h["edges"]), counts=tuple(h["counts"]))
            for name, h in doc["histograms"].items()
        }
    return DsrReport(
        pair_dsr={(p["model_a"], p["model_b"]): p["dsr"] for p in doc["pair_dsr"]},
        overall_dsr=doc["overall_dsr"],
        avg_l2=doc.get("avg_l2"),
        avg_queries=doc.get("avg_queries"),
        avg_time=doc.get("avg_time"),
        histograms=histograms,
    )


def write_report(doc: ReportDocument, path, fmt: str) -> None:
    """Write a report as ``csv`` (rows only) or ``json`` (full document)."""
    if not doc.records:
        raise ValueError("report has no records")
    fmt = fmt.lower()
    if fmt == "json":
        payload = {
            "schema_version": doc.schema_version,
            "config": doc.config,
            "records": [
                {"seed_id": r.seed_id,
                 "model_a": r.model_pair[0],
                 "model_b": r.model_pair[1],
                 "result": _result_to_dict(r.result)}
                for r in doc.records
            ],
            "summary": _summary_to_dict(doc.summary),
        }
        Path(path).write_text(json.dumps(payload, indent=2))
    elif fmt == "csv":
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(CSV_HEADER)
            for r in doc.records:
                res = r.result
                writer.writerow([
                    r.seed_id, r.model_pair[0], r.model_pair[1],
                    res.status.value,
                    f"{res.divergence:.6f}",
                    f"{res.l2:.6f}",
                    res.queries_per_oracle,
                    res.iterations,
                    f"{res.elapsed * 1000.0:.6f}",
                ])
    else:
        raise ValueError(f"unknown report format {fmt!r}")


def read_report(path) -> ReportDocument:
    """Read back a JSON report written by :func:`write_report`."""
    doc = json.loads(Path(path).read_text())
    records = tuple(
        CampaignRecord(seed_id=r["seed_id"],
                       model_pair=(r["model_a"], r["model_b"]),
                       result=_result_from_dict(r["result"]))
        for r in doc["records"]
    )
    return ReportDocument(config=doc["config"], records=records,
                          summary=_summary_from_dict(doc["summary"]),
                          schema_version=doc["schema_version"])


def read_report_csv(path) -> list[dict]:
    """Parse report CSV rows back into typed dicts."""
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        rows = []
        for row in reader:
            rows.append({
                "seed_id": row["seed_id"],
                "model_a": row["model_a"],
                "model_b": row["model_b"],
                "status": row["status"],
                "divergence": float(row["divergence"]),
                "l2": float(row["l2"]),
                "queries": int(row["queries"]),
                "iterations": int(row["iterations"]),
                "elapsed_ms": float(row["elapsed_ms"]),
            })
    return rows
