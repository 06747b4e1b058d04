"""Opaque prediction targets.

Two backends share one query interface: a small dense-network inference
engine for models loaded from weight files, and an HTTP client for remote
endpoints speaking the JSON wire protocol. Every oracle counts its queries
and truncates its answers to a configured access level: the full output
distribution, the top-1 label with its probability, or the label alone.
"""

from __future__ import annotations

import enum
import math
import time
from dataclasses import dataclass

import numpy as np
import requests

from .tensor import InputTensor, validate_shape

__all__ = [
    "AccessLevel",
    "LayerSpec",
    "LocalModel",
    "LocalOracle",
    "Oracle",
    "Prediction",
    "ProtocolError",
    "RemoteOracle",
    "TaskKind",
    "TransportError",
    "forward",
    "model_from_dict",
    "model_to_dict",
]

RETRY_ATTEMPTS = 3
RETRY_BACKOFF_SECONDS = 0.1
DEFAULT_TIMEOUT_SECONDS = 10.0
DEFAULT_NORMALIZER = 255.0


class TaskKind(str, enum.Enum):
    CLASSIFICATION = "classification"
    REGRESSION = "regression"


class AccessLevel(enum.Enum):
    """How much of an oracle's output a caller is allowed to observe."""

    FULL_DISTRIBUTION = "full_distribution"
    TOP1 = "top1"
    LABEL_ONLY = "label_only"


class TransportError(RuntimeError):
    """Remote query failed after exhausting its retry budget."""

    def __init__(self, message: str, attempts: int):
        super().__init__(f"{message} (after {attempts} attempts)")
        self.attempts = attempts


class ProtocolError(RuntimeError):
    """Remote endpoint answered, but not in the expected wire format."""


@dataclass(frozen=True)
class Prediction:
    """One oracle answer, already truncated to the oracle's access level.

    Classification answers carry ``top_label`` always, ``top_prob`` unless
    the oracle is label-only, and ``distribution`` only under full access.
    Regression answers carry ``value`` alone.
    """

    task: TaskKind
    top_label: int | None = None
    top_prob: float | None = None
    distribution: tuple[float, ...] | None = None
    value: float | None = None

    def __post_init__(self) -> None:
        if self.task is TaskKind.CLASSIFICATION:
            if self.top_label is None:
                raise ValueError("classification prediction needs a top label")
            if self.distribution is not None:
                dist = self.distribution
                if any(p < 0.0 or p > 1.0 for p in dist):
                    raise ValueError("distribution entries must lie in [0, 1]")
                if abs(sum(dist) - 1.0) > 1e-6:
                    raise ValueError(f"distribution sums to {sum(dist)}, not 1")
                argmax = int(np.argmax(dist))
                if argmax != self.top_label:
                    raise ValueError(
                        f"distribution argmax {argmax} disagrees with "
                        f"top label {self.top_label}"
                    )
                if self.top_prob is None or abs(max(dist) - self.top_prob) > 1e-9:
                    raise ValueError("top probability must equal the distribution max")
        elif self.value is None:
            raise ValueError("regression prediction needs a value")

    def prob_of(self, label: int) -> float | None:
        """Observable probability of ``label``, or None when hidden.

        Under top-1 access a label's probability is visible only while it is
        the top label; under label-only access nothing is visible.
        """
        if self.distribution is not None:
            if not 0 <= label < len(self.distribution):
                raise ValueError(f"label {label} outside distribution of "
                                 f"{len(self.distribution)} classes")
            return self.distribution[label]
        if self.top_prob is not None:
            return self.top_prob if label == self.top_label else 0.0
        return None

    def to_dict(self) -> dict:
        out: dict = {"task": self.task.value}
        if self.top_label is not None:
            out["top_label"] = self.top_label
        if self.top_prob is not None:
            out["top_prob"] = self.top_prob
        if self.distribution is not None:
            out["distribution"] = list(self.distribution)
        if self.value is not None:
            out["value"] = self.value
        return out

    @classmethod
    def from_dict(cls, payload: dict) -> "Prediction":
        task = TaskKind(payload["task"])
        dist = payload.get("distribution")
        return cls(
            task=task,
            top_label=payload.get("top_label"),
            top_prob=payload.get("top_prob"),
            distribution=tuple(float(p) for p in dist) if dist is not None else None,
            value=payload.get("value"),
        )


class LayerKind(str, enum.Enum):
    DENSE = "dense"
    RELU = "relu"
    SOFTMAX = "softmax"


@dataclass(frozen=True)
class LayerSpec:
    """One layer of the inference stack: dense affine, relu, or softmax."""

    kind: LayerKind
    weights: np.ndarray | None = None  # out x in, row-major
    bias: np.ndarray | None = None

    def __post_init__(self) -> None:
        if self.kind is LayerKind.DENSE:
            if self.weights is None or self.bias is None:
                raise ValueError("dense layer needs weights and bias")
            weights = np.asarray(self.weights, dtype=np.float64)
            bias = np.asarray(self.bias, dtype=np.float64).reshape(-1)
            if weights.ndim != 2:
                raise ValueError("dense weights must be a 2-D out x in matrix")
            if weights.shape[0] != bias.size:
                raise ValueError(
                    f"dense weight rows ({weights.shape[0]}) must equal "
                    f"bias length ({bias.size})"
                )
            weights.setflags(write=False)
            bias.setflags(write=False)
            object.__setattr__(self, "weights", weights)
            object.__setattr__(self, "bias", bias)
        elif self.weights is not None or self.bias is not None:
            raise ValueError(f"{self.kind.value} layer takes no parameters")

    @classmethod
    def dense(cls, weights, bias) -> "LayerSpec":
        return cls(LayerKind.DENSE, weights, bias)

    @classmethod
    def relu(cls) -> "LayerSpec":
        return cls(LayerKind.RELU)

    @classmethod
    def softmax(cls) -> "LayerSpec":
        return cls(LayerKind.SOFTMAX)


def _validate_stack(layers: tuple[LayerSpec, ...], task: TaskKind,
                    input_len: int) -> None:
    if not layers:
        raise ValueError("model needs at least one layer")
    width = input_len
    for i, layer in enumerate(layers):
        if layer.kind is LayerKind.DENSE:
            if layer.weights.shape[1] != width:
                raise ValueError(
                    f"layer {i}: dense expects input width "
                    f"{layer.weights.shape[1]}, previous layer yields {width}"
                )
            width = layer.weights.shape[0]
        if layer.kind is LayerKind.SOFTMAX and i != len(layers) - 1:
            raise ValueError(f"layer {i}: softmax is only valid as the final layer")
    last = layers[-1]
    if task is TaskKind.CLASSIFICATION and last.kind is not LayerKind.SOFTMAX:
        raise ValueError("classification models must end in a softmax layer")
    if task is TaskKind.REGRESSION and last.kind is LayerKind.SOFTMAX:
        raise ValueError("regression models must not end in a softmax layer")


def forward(layers, x: InputTensor, normalizer: float = DEFAULT_NORMALIZER) -> np.ndarray:
    """Run the layer stack on ``x`` after dividing by ``normalizer``.

    Dense layers compute ``W v + b``; relu clips negatives; softmax is
    computed with max subtraction so large logits stay finite.
    """
    if normalizer <= 0:
        raise ValueError(f"normalizer must be positive, got {normalizer}")
    v = x.values / normalizer
    for i, layer in enumerate(layers):
        if layer.kind is LayerKind.DENSE:
            if v.size != layer.weights.shape[1]:
                raise ValueError(
                    f"layer {i}: dense expects input width "
                    f"{layer.weights.shape[1]}, got {v.size}"
                )
            v = layer.weights @ v + layer.bias
        elif layer.kind is LayerKind.RELU:
            v = np.maximum(v, 0.0)
        else:  # softmax
            z = np.exp(v - np.max(v))
            v = z / np.sum(z)
    return v


@dataclass(frozen=True)
class LocalModel:
    """A parsed weight file: the immutable recipe for building local oracles."""

    id: str
    task: TaskKind
    input_shape: tuple[int, ...]
    layers: tuple[LayerSpec, ...]
    normalizer: float = DEFAULT_NORMALIZER

    def __post_init__(self) -> None:
        object.__setattr__(self, "input_shape", validate_shape(self.input_shape))
        object.__setattr__(self, "layers", tuple(self.layers))
        _validate_stack(self.layers, self.task, math.prod(self.input_shape))

    def oracle(self, access_level: AccessLevel = AccessLevel.FULL_DISTRIBUTION
               ) -> "LocalOracle":
        return LocalOracle(self, access_level)


def model_to_dict(model: LocalModel) -> dict:
    layers = []
    for layer in model.layers:
        if layer.kind is LayerKind.DENSE:
            layers.append({
                "kind": "dense",
                "weights": layer.weights.tolist(),
                "bias": layer.bias.tolist(),
            })
        else:
            layers.append({"kind": layer.kind.value})
    return {
        "id": model.id,
        "task": model.task.value,
        "input_shape": list(model.input_shape),
        "normalizer": model.normalizer,
        "layers": layers,
    }


def model_from_dict(payload: dict) -> LocalModel:
    try:
        layers = []
        for entry in payload["layers"]:
            kind = LayerKind(entry["kind"])
            if kind is LayerKind.DENSE:
                layers.append(LayerSpec.dense(entry["weights"], entry["bias"]))
            else:
                layers.append(LayerSpec(kind))
        return LocalModel(
            id=str(payload["id"]),
            task=TaskKind(payload["task"]),
            input_shape=tuple(payload["input_shape"]),
            layers=tuple(layers),
            normalizer=float(payload.get("normalizer", DEFAULT_NORMALIZER)),
        )
    except KeyError as exc:
        raise ValueError(f"model document missing field {exc}") from exc


class Oracle:
    """Query interface shared by all backends.

    ``query`` bumps the oracle's counter by exactly one per call, delegates
    to the backend, and truncates the answer to the configured access level.
    A single oracle's counter is not synchronized; confine each instance to
    one task or guard it externally (``clone`` yields independent counters).
    """

    def __init__(self, oracle_id: str, task: TaskKind,
                 input_shape: tuple[int, ...] | None,
                 access_level: AccessLevel):
        self.id = oracle_id
        self.task = task
        self.input_shape = validate_shape(input_shape) if input_shape else None
        self.access_level = access_level
        self._query_count = 0

    @property
    def query_count(self) -> int:
        return self._query_count

    def reset_query_count(self) -> None:
        self._query_count = 0

    def query(self, x: InputTensor) -> Prediction:
        if self.input_shape is not None and x.shape != self.input_shape:
            raise ValueError(
                f"oracle {self.id!r} expects shape {self.input_shape}, "
                f"got {x.shape}"
            )
        self._query_count += 1
        return self._truncate(self._predict(x))

    def _predict(self, x: InputTensor) -> Prediction:
        raise NotImplementedError

    def clone(self) -> "Oracle":
        """Fresh oracle over the same target with an independent counter."""
        raise NotImplementedError

    def _truncate(self, pred: Prediction) -> Prediction:
        if pred.task is TaskKind.REGRESSION:
            return pred
        if self.access_level is AccessLevel.FULL_DISTRIBUTION:
            return pred
        if self.access_level is AccessLevel.TOP1:
            return Prediction(pred.task, pred.top_label, pred.top_prob)
        return Prediction(pred.task, pred.top_label)


class LocalOracle(Oracle):
    """In-process inference over a :class:`LocalModel`."""

    def __init__(self, model: LocalModel,
                 access_level: AccessLevel = AccessLevel.FULL_DISTRIBUTION):
        super().__init__(model.id, model.task, model.input_shape, access_level)
        self.model = model

    def _predict(self, x: InputTensor) -> Prediction:
        out = forward(self.model.layers, x, self.model.normalizer)
        if self.task is TaskKind.CLASSIFICATION:
            top = int(np.argmax(out))
            return Prediction(
                task=TaskKind.CLASSIFICATION,
                top_label=top,
                top_prob=float(out[top]),
                distribution=tuple(float(p) for p in out),
            )
        return Prediction(task=TaskKind.REGRESSION, value=float(out[0]))

    def clone(self) -> "LocalOracle":
        return LocalOracle(self.model, self.access_level)


class RemoteOracle(Oracle):
    """HTTP client for an endpoint speaking the JSON prediction protocol.

    Requests go to ``POST <endpoint>/predict`` with body
    ``{"input": [flat raw-domain values], "shape": [...]}``. Connection
    failures, timeouts, and 5xx answers are retried up to three attempts
    with a fixed 100 ms backoff; any other non-200 status or an unparsable
    body is a protocol error and fails immediately.
    """

    def __init__(self, endpoint: str, task: TaskKind,
                 input_shape: tuple[int, ...] | None = None,
                 access_level: AccessLevel = AccessLevel.FULL_DISTRIBUTION,
                 timeout: float = DEFAULT_TIMEOUT_SECONDS,
                 oracle_id: str | None = None):
        super().__init__(oracle_id or endpoint, task, input_shape, access_level)
        self.endpoint = endpoint.rstrip("/")
        self.timeout = timeout
        self._session = requests.Session()

    def _predict(self, x: InputTensor) -> Prediction:
        body = {"input": x.values.tolist(), "shape": list(x.shape)}
        url = f"{self.endpoint}/predict"
        last_error: str = "no attempt made"
        for attempt in range(1, RETRY_ATTEMPTS + 1):
            try:
                resp = self._session.post(url, json=body, timeout=self.timeout)
            except requests.RequestException as exc:
                last_error = f"transport failure querying {url}: {exc}"
            else:
                if resp.status_code == 200:
                    return self._parse(resp)
                if resp.status_code < 500:
                    raise ProtocolError(
                        f"{url} answered HTTP {resp.status_code}, expected 200"
                    )
                last_error = f"{url} answered HTTP {resp.status_code}"
            if attempt < RETRY_ATTEMPTS:
                time.sleep(RETRY_BACKOFF_SECONDS)
        raise TransportError(last_error, attempts=RETRY_ATTEMPTS)

    def _parse(self, resp: requests.Response) -> Prediction:
        try:
            payload = resp.json()
        except ValueError as exc:
            raise ProtocolError(f"response from {self.endpoint} is not JSON") from exc
        try:
            pred = Prediction.from_dict(payload)
        except (KeyError, TypeError, ValueError) as exc:
            raise ProtocolError(
                f"malformed prediction payload from {self.endpoint}: {exc}"
            ) from exc
        if pred.task is not self.task:
            raise ProtocolError(
                f"endpoint {self.endpoint} answered task {pred.task.value!r}, "
                f"oracle is declared {self.task.value!r}"
            )
        return pred

    def clone(self) -> "RemoteOracle":
        return RemoteOracle(self.endpoint, self.task, self.input_shape,
                            self.access_level, self.timeout, self.id)
