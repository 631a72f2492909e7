"""Classical-to-quantum encoders producing labeled pure-state samples."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ClassBalanceError, DimError, DomainError, ParamShapeError, ZeroVectorError
from .quantum import GateSpec, StateVector, apply_gate, zero_state

EMBEDDING_KINDS = ("amplitude", "angle", "pca-layer")


@dataclass(frozen=True)
class EmbeddingSpec:
    """Which encoder to use and, for the layered one, its trainable angles.

    kind "amplitude": input dimension at most 2**n_qubits, zero padded.
    kind "angle": single qubit, first feature only.
    kind "pca-layer": one Rx data-loading rotation per qubit followed by
    `layers` repetitions of per-qubit Ry plus nearest-neighbor ZZ couplers;
    `ring` adds the wrap-around coupler when there are 3+ qubits.
    """

    kind: str
    n_qubits: int
    params: tuple[float, ...] = ()
    layers: int = 1
    ring: bool = False

    def __post_init__(self) -> None:
        if self.kind not in EMBEDDING_KINDS:
            raise ValueError(f"unknown embedding kind {self.kind!r}")
        if self.kind == "angle" and self.n_qubits != 1:
            raise DimError("angle embedding is single-qubit")
        if self.n_qubits < 1:
            raise DimError("need at least one qubit")
        object.__setattr__(self, "params", tuple(float(p) for p in self.params))

    def param_count(self) -> int:
        if self.kind != "pca-layer":
            return 0
        return self.layers * (self.n_qubits + len(_coupler_pairs(self.n_qubits, self.ring)))


@dataclass(frozen=True)
class EmbeddedSample:
    """One encoded training or test point."""

    state: StateVector
    label: int
    source_index: int

    def __post_init__(self) -> None:
        if self.label not in (+1, -1):
            raise ValueError(f"label must be +1 or -1, got {self.label}")


def _coupler_pairs(n_qubits: int, ring: bool) -> list[tuple[int, int]]:
    pairs = [(q, q + 1) for q in range(n_qubits - 1)]
    if ring and n_qubits > 2:
        pairs.append((n_qubits - 1, 0))
    return pairs


def amplitude_encode(x: np.ndarray, n_qubits: int) -> StateVector:
    """Normalize x and pad with zeros to the full register dimension."""
    v = np.asarray(x, dtype=float)
    d = 2**n_qubits
    if v.ndim != 1 or v.shape[0] > d:
        raise DimError(f"input of dim {v.shape} does not fit {n_qubits} qubits")
    norm = np.linalg.norm(v)
    if norm < 1e-15:
        raise ZeroVectorError("cannot amplitude-encode the zero vector")
    amps = np.zeros(d, dtype=complex)
    amps[: v.shape[0]] = v / norm
    return StateVector(amps, n_qubits)


def angle_encode(x0: float) -> StateVector:
    """Ry(2 acos(x0))|0> = (x0, sqrt(1 - x0^2)) on one qubit."""
    if abs(x0) > 1.0:
        raise DomainError(f"angle encoding needs |x0| <= 1, got {x0}")
    return StateVector(np.array([x0, np.sqrt(1.0 - x0 * x0)], dtype=complex), 1)


def pca_layer_encode(x: np.ndarray, spec: EmbeddingSpec) -> StateVector:
    """Rx data loading, then alternating trainable Ry and ZZ coupler layers."""
    v = np.asarray(x, dtype=float)
    n = spec.n_qubits
    if v.shape != (n,):
        raise DimError(f"input of shape {v.shape} does not match {n} qubits")
    theta = np.asarray(spec.params, dtype=float)
    if theta.shape[0] != spec.param_count():
        raise ParamShapeError(
            f"expected {spec.param_count()} parameters, got {theta.shape[0]}"
        )
    state = zero_state(n)
    for q in range(n):
        state = apply_gate(state, GateSpec("Rx", (q,), angle=v[q]))
    pairs = _coupler_pairs(n, spec.ring)
    i = 0
    for _ in range(spec.layers):
        for q in range(n):
            state = apply_gate(state, GateSpec("Ry", (q,), angle=theta[i]))
            i += 1
        for pair in pairs:
            state = apply_gate(state, GateSpec("ZZ", pair, angle=theta[i]))
            i += 1
    return state


def encode_point(x: np.ndarray, spec: EmbeddingSpec) -> StateVector:
    if spec.kind == "amplitude":
        return amplitude_encode(x, spec.n_qubits)
    if spec.kind == "angle":
        return angle_encode(float(np.asarray(x, dtype=float).ravel()[0]))
    return pca_layer_encode(x, spec)


def embed_dataset(
    data: list[tuple[np.ndarray, int]], spec: EmbeddingSpec
) -> list[EmbeddedSample]:
    """Encode every (x, y) pair, preserving order; both classes required."""
    labels = {y for _, y in data}
    if not labels <= {+1, -1} or len(labels) != 2:
        raise ClassBalanceError(f"need both labels +1 and -1, got {sorted(labels)}")
    return [
        EmbeddedSample(encode_point(x, spec), int(y), m)
        for m, (x, y) in enumerate(data)
    ]


@dataclass(frozen=True)
class FeatureScaling:
    """Per-column affine map fixed on training data and reused on test data."""

    center: tuple[float, ...]
    factor: tuple[float, ...]

    def apply(self, features: np.ndarray) -> np.ndarray:
        return (np.asarray(features, dtype=float) - np.array(self.center)) * np.array(
            self.factor
        )


def fit_rotation_scaling(features: np.ndarray) -> FeatureScaling:
    """Center each column and scale the training range into [-pi, pi]."""
    f = np.asarray(features, dtype=float)
    center = f.mean(axis=0)
    spread = np.abs(f - center).max(axis=0)
    factor = np.where(spread > 1e-12, np.pi / np.where(spread > 1e-12, spread, 1.0), 1.0)
    return FeatureScaling(tuple(center.tolist()), tuple(factor.tolist()))
