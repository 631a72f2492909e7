"""Parameterized ancilla circuit, its Kraus pair, and post-selected filtering.

The trainable unitary acts on the system qubits plus a single ancilla kept
as the last (least significant) qubit. Keeping ancilla outcome 0 realizes
the operator K; outcome 1 realizes the discarded branch K0, and unitarity
of the full circuit gives K+K + K0+K0 = I.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .embedding import EmbeddedSample
from .errors import ClassAnnihilated, DimError, FilterAnnihilated, ParamShapeError
from .quantum import (
    ATOL_INVARIANT,
    DensityMatrix,
    GateSpec,
    StateVector,
    UnitaryMatrix,
    _apply_to_columns,
    gate_array,
)

EPS_ANNIHILATION = 1e-12


@dataclass(frozen=True)
class FeatureMapCircuit:
    """Gate sequence over n_system + 1 qubits; identity at theta = 0."""

    n_system: int
    layers: int
    gates: tuple[GateSpec, ...]
    n_params: int
    n_ancilla: int = 1

    @property
    def n_qubits(self) -> int:
        return self.n_system + self.n_ancilla

    def zero_theta(self) -> np.ndarray:
        return np.zeros(self.n_params)


@dataclass(frozen=True)
class KrausPair:
    """Kept and discarded branches of a single-ancilla measurement."""

    keep: np.ndarray
    discard: np.ndarray

    def __post_init__(self) -> None:
        k = np.asarray(self.keep, dtype=complex)
        k0 = np.asarray(self.discard, dtype=complex)
        if k.shape != k0.shape or k.ndim != 2 or k.shape[0] != k.shape[1]:
            raise DimError(f"mismatched Kraus shapes {k.shape} vs {k0.shape}")
        resid = k.conj().T @ k + k0.conj().T @ k0 - np.eye(k.shape[0])
        if np.abs(resid).max() > ATOL_INVARIANT:
            raise ValueError(
                f"Kraus completeness residual {np.abs(resid).max():.3e}"
            )
        object.__setattr__(self, "keep", k)
        object.__setattr__(self, "discard", k0)

    @classmethod
    def identity(cls, dim: int) -> "KrausPair":
        return cls(np.eye(dim, dtype=complex), np.zeros((dim, dim), dtype=complex))


@dataclass(frozen=True)
class TransformedEnsembles:
    """Class ensembles after filtering, with per-sample success bookkeeping.

    pos/neg are the renormalized filtered mixtures of the +1 and -1 classes.
    p_succ is the mean per-sample success probability; p_joint, the product,
    is reported for diagnostics only (it decays quickly with sample count).
    """

    pos: DensityMatrix
    neg: DensityMatrix
    p_s: np.ndarray
    p_s_pos: float
    p_s_neg: float
    p_succ: float
    p_joint: float


def build_ansatz(n_system: int, layers: int) -> FeatureMapCircuit:
    """Per layer: Rx and Rz sweeps over all qubits, then a CRx chain.

    The chain couples qubit q to q+1, ending on the ancilla, so every system
    qubit can influence the measured branch. All angles are trainable.
    """
    if n_system < 1 or layers < 1:
        raise ValueError("need n_system >= 1 and layers >= 1")
    n_total = n_system + 1
    gates: list[GateSpec] = []
    p = 0
    for _ in range(layers):
        for q in range(n_total):
            gates.append(GateSpec("Rx", (q,), param_index=p))
            p += 1
        for q in range(n_total):
            gates.append(GateSpec("Rz", (q,), param_index=p))
            p += 1
        for q in range(n_total - 1):
            gates.append(GateSpec("CRx", (q, q + 1), param_index=p))
            p += 1
    return FeatureMapCircuit(n_system, layers, tuple(gates), p)


def _check_theta(circuit: FeatureMapCircuit, theta: np.ndarray) -> np.ndarray:
    t = np.asarray(theta, dtype=float)
    if t.shape != (circuit.n_params,):
        raise ParamShapeError(
            f"circuit takes {circuit.n_params} parameters, got shape {t.shape}"
        )
    return t


def circuit_unitary(circuit: FeatureMapCircuit, theta: np.ndarray) -> UnitaryMatrix:
    """Dense matrix of the full gate sequence, first gate applied first."""
    t = _check_theta(circuit, theta)
    n = circuit.n_qubits
    u = np.eye(2**n, dtype=complex)
    for spec in circuit.gates:
        u = _apply_to_columns(u, gate_array(spec.kind, spec.resolve_angle(t)), spec.targets, n)
    return UnitaryMatrix(u, n)


def kraus_from_circuit(circuit: FeatureMapCircuit, theta: np.ndarray) -> KrausPair:
    """Extract both ancilla branches of V(theta) with ancilla prepared in |0>.

    With the ancilla as least significant bit, V reshaped to
    (dim, 2, dim, 2) indexes [system_out, ancilla_out, system_in, ancilla_in],
    so keep = V[:, 0, :, 0] and discard = V[:, 1, :, 0].
    """
    v = circuit_unitary(circuit, theta).entries
    dim = 2**circuit.n_system
    blocks = v.reshape(dim, 2, dim, 2)
    return KrausPair(blocks[:, 0, :, 0], blocks[:, 1, :, 0])


def filter_probability(pair: KrausPair, rho: DensityMatrix) -> float:
    """Success probability tr[K+K rho]."""
    k = pair.keep
    if k.shape[0] != rho.entries.shape[0]:
        raise DimError("Kraus operator and state dimensions differ")
    return float(np.real(np.trace(k.conj().T @ k @ rho.entries)))


def apply_filter(
    pair: KrausPair, rho: DensityMatrix, eps: float = EPS_ANNIHILATION
) -> tuple[DensityMatrix, float]:
    """Post-selected map rho -> K rho K+ / p_s with p_s = tr[K+K rho]."""
    p_s = filter_probability(pair, rho)
    if p_s <= eps:
        raise FilterAnnihilated(f"success probability {p_s:.3e} below {eps:.0e}")
    out = pair.keep @ rho.entries @ pair.keep.conj().T / p_s
    out = (out + out.conj().T) / 2  # scrub roundoff asymmetry before validation
    return DensityMatrix(out, rho.n_qubits), p_s


def transform_ensemble(
    pair: KrausPair, samples: list[EmbeddedSample], eps: float = EPS_ANNIHILATION
) -> TransformedEnsembles:
    """Filter every sample and rebuild the two class ensembles.

    Each class mixture weights sample m by p_s(x_m) / p_s(class), which is
    the same as accumulating sum_m K rho_m K+ and dividing once by the class
    sum. The single division keeps annihilated samples (p_s ~ 0) harmless as
    long as the class as a whole survives.
    """
    if not samples:
        raise ClassAnnihilated("no samples")
    n = samples[0].state.n_qubits
    dim = 2**n
    sums = {+1: np.zeros((dim, dim), dtype=complex), -1: np.zeros((dim, dim), dtype=complex)}
    class_p = {+1: 0.0, -1: 0.0}
    p_s = np.zeros(len(samples))
    for i, s in enumerate(samples):
        psi = s.state.amplitudes
        filtered = pair.keep @ np.outer(psi, psi.conj()) @ pair.keep.conj().T
        p = float(np.real(np.trace(filtered)))
        p_s[i] = p
        sums[s.label] += filtered
        class_p[s.label] += p
    out = {}
    for label in (+1, -1):
        if class_p[label] <= eps:
            raise ClassAnnihilated(f"class {label:+d} annihilated by the filter")
        m = sums[label] / class_p[label]
        out[label] = DensityMatrix((m + m.conj().T) / 2, n)
    return TransformedEnsembles(
        pos=out[+1],
        neg=out[-1],
        p_s=p_s,
        p_s_pos=class_p[+1],
        p_s_neg=class_p[-1],
        p_succ=float(p_s.mean()),
        p_joint=float(np.prod(p_s)),
    )
