"""Dense simulation primitives for small qubit registers.

Big-endian ordering throughout: qubit 0 is the most significant bit of a
basis index, so |q0 q1 ... q_{n-1}> lives at index sum_i q_i 2^(n-1-i).
Rotations follow R_a(t) = exp(-i t sigma_a / 2) and the two-qubit phase
coupling is ZZ(t) = exp(-i t Z (x) Z / 2).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    DimError,
    HermiticityError,
    NormError,
    ShapeError,
    UnsupportedGate,
    WeightError,
    ZeroVectorError,
)

# Tolerance tiers: invariants of our own constructions, user-supplied input,
# and agreement between two exact computation paths.
ATOL_INVARIANT = 1e-10
ATOL_INPUT = 1e-8
ATOL_PATHS = 1e-9

GATE_ARITY = {
    "Rx": 1,
    "Ry": 1,
    "Rz": 1,
    "H": 1,
    "X": 1,
    "ZZ": 2,
    "CRx": 2,
    "CSWAP": 3,
}

_PARAMETRIC = {"Rx", "Ry", "Rz", "ZZ", "CRx"}


@dataclass(frozen=True)
class GateSpec:
    """One gate instance: kind, target qubits, and where its angle comes from.

    Parametric gates take the angle either from a trainable parameter vector
    (param_index) or as a fixed constant (angle). Exactly one of the two may
    be set; non-parametric gates take neither.
    """

    kind: str
    targets: tuple[int, ...]
    param_index: int | None = None
    angle: float | None = None

    def __post_init__(self) -> None:
        if self.kind not in GATE_ARITY:
            raise UnsupportedGate(f"unknown gate kind {self.kind!r}")
        object.__setattr__(self, "targets", tuple(int(t) for t in self.targets))
        if len(self.targets) != GATE_ARITY[self.kind]:
            raise ShapeError(
                f"{self.kind} expects {GATE_ARITY[self.kind]} targets, got {self.targets}"
            )
        if len(set(self.targets)) != len(self.targets):
            raise ValueError(f"duplicate targets {self.targets}")
        if self.kind in _PARAMETRIC:
            if (self.param_index is None) == (self.angle is None):
                raise ValueError(
                    f"{self.kind} needs exactly one of param_index or angle"
                )
        elif self.param_index is not None or self.angle is not None:
            raise ValueError(f"{self.kind} takes no angle")

    def resolve_angle(self, theta: np.ndarray | None) -> float:
        if self.param_index is not None:
            assert theta is not None
            return float(theta[self.param_index])
        if self.angle is not None:
            return float(self.angle)
        return 0.0


@dataclass(frozen=True)
class StateVector:
    """Pure state on n_qubits qubits, stored as a dense complex vector."""

    amplitudes: np.ndarray
    n_qubits: int

    def __post_init__(self) -> None:
        amps = np.asarray(self.amplitudes, dtype=complex)
        if amps.ndim != 1 or amps.shape[0] != 2**self.n_qubits:
            raise DimError(
                f"expected {2**self.n_qubits} amplitudes, got shape {amps.shape}"
            )
        object.__setattr__(self, "amplitudes", amps)

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def normalized(self) -> "StateVector":
        n = self.norm()
        if n < 1e-15:
            raise ZeroVectorError("cannot normalize the zero state")
        return StateVector(self.amplitudes / n, self.n_qubits)

    def probabilities(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2


def zero_state(n_qubits: int) -> StateVector:
    amps = np.zeros(2**n_qubits, dtype=complex)
    amps[0] = 1.0
    return StateVector(amps, n_qubits)


def basis_state(n_qubits: int, index: int) -> StateVector:
    amps = np.zeros(2**n_qubits, dtype=complex)
    amps[index] = 1.0
    return StateVector(amps, n_qubits)


@dataclass(frozen=True)
class DensityMatrix:
    """Mixed state: Hermitian, unit trace, PSD up to -1e-10 eigenvalue slack."""

    entries: np.ndarray
    n_qubits: int

    def __post_init__(self) -> None:
        m = np.asarray(self.entries, dtype=complex)
        d = 2**self.n_qubits
        if m.shape != (d, d):
            raise DimError(f"expected {(d, d)} matrix, got {m.shape}")
        if not np.allclose(m, m.conj().T, atol=ATOL_INVARIANT, rtol=0):
            raise HermiticityError("density matrix is not Hermitian")
        tr = np.trace(m).real
        if abs(tr - 1.0) > ATOL_INVARIANT:
            raise NormError(f"density matrix trace {tr} != 1")
        if np.linalg.eigvalsh(m).min() < -ATOL_INVARIANT:
            raise NormError("density matrix has a negative eigenvalue")
        object.__setattr__(self, "entries", m)

    def purity(self) -> float:
        return overlap(self, self)


@dataclass(frozen=True)
class UnitaryMatrix:
    """Unitary on n_qubits qubits; U+ U = I is checked on construction."""

    entries: np.ndarray
    n_qubits: int

    def __post_init__(self) -> None:
        m = np.asarray(self.entries, dtype=complex)
        d = 2**self.n_qubits
        if m.shape != (d, d):
            raise DimError(f"expected {(d, d)} matrix, got {m.shape}")
        if not np.allclose(m.conj().T @ m, np.eye(d), atol=ATOL_INVARIANT, rtol=0):
            raise NormError("matrix is not unitary")
        object.__setattr__(self, "entries", m)


_H = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2.0)
_X = np.array([[0, 1], [1, 0]], dtype=complex)


def _rx(t: float) -> np.ndarray:
    c, s = np.cos(t / 2), np.sin(t / 2)
    return np.array([[c, -1j * s], [-1j * s, c]])


def _ry(t: float) -> np.ndarray:
    c, s = np.cos(t / 2), np.sin(t / 2)
    return np.array([[c, -s], [s, c]], dtype=complex)


def _rz(t: float) -> np.ndarray:
    return np.diag([np.exp(-1j * t / 2), np.exp(1j * t / 2)])


def _zz(t: float) -> np.ndarray:
    e_m, e_p = np.exp(-1j * t / 2), np.exp(1j * t / 2)
    return np.diag([e_m, e_p, e_p, e_m])


def _crx(t: float) -> np.ndarray:
    out = np.eye(4, dtype=complex)
    out[2:, 2:] = _rx(t)
    return out


_CSWAP = np.eye(8, dtype=complex)
_CSWAP[[5, 6], :] = _CSWAP[[6, 5], :]


def gate_array(kind: str, theta: float = 0.0) -> np.ndarray:
    """Dense matrix for a single gate, control = first target for CRx/CSWAP."""
    if kind == "Rx":
        return _rx(theta)
    if kind == "Ry":
        return _ry(theta)
    if kind == "Rz":
        return _rz(theta)
    if kind == "H":
        return _H.copy()
    if kind == "X":
        return _X.copy()
    if kind == "ZZ":
        return _zz(theta)
    if kind == "CRx":
        return _crx(theta)
    if kind == "CSWAP":
        return _CSWAP.copy()
    raise UnsupportedGate(f"unknown gate kind {kind!r}")


def gate_matrix(kind: str, theta: float = 0.0) -> UnitaryMatrix:
    arr = gate_array(kind, theta)
    return UnitaryMatrix(arr, GATE_ARITY[kind])


def _apply_to_columns(
    block: np.ndarray, local: np.ndarray, targets: tuple[int, ...], n_qubits: int
) -> np.ndarray:
    """Apply a k-qubit gate to the given qubits of every column of block.

    block has shape (2**n_qubits, tail); tail = 1 treats it as a state.
    """
    tail = block.shape[1]
    k = len(targets)
    rest = [q for q in range(n_qubits) if q not in targets]
    perm = list(targets) + rest + [n_qubits]
    t = block.reshape([2] * n_qubits + [tail]).transpose(perm)
    t = local @ t.reshape(2**k, -1)
    t = t.reshape([2] * n_qubits + [tail]).transpose(np.argsort(perm))
    return t.reshape(2**n_qubits, tail)


def apply_gate(
    state: StateVector, spec: GateSpec, theta: np.ndarray | None = None
) -> StateVector:
    """Apply one gate; angle comes from spec.resolve_angle(theta)."""
    for t in spec.targets:
        if not 0 <= t < state.n_qubits:
            raise IndexError(f"target {t} outside register of {state.n_qubits}")
    local = gate_array(spec.kind, spec.resolve_angle(theta))
    col = state.amplitudes.reshape(-1, 1)
    out = _apply_to_columns(col, local, spec.targets, state.n_qubits)
    return StateVector(out.ravel(), state.n_qubits)


def tensor(a: StateVector, b: StateVector) -> StateVector:
    return StateVector(np.kron(a.amplitudes, b.amplitudes), a.n_qubits + b.n_qubits)


def project_qubit(state: StateVector, qubit: int, outcome: int) -> tuple[StateVector, float]:
    """Project one qubit onto |outcome>, renormalize, return (state, probability).

    The projected register keeps all qubits; the measured one is left in
    |outcome>. Probability zero raises ZeroVectorError.
    """
    if not 0 <= qubit < state.n_qubits:
        raise IndexError(f"qubit {qubit} outside register of {state.n_qubits}")
    t = state.amplitudes.reshape([2] * state.n_qubits)
    keep = np.zeros_like(t)
    sl = [slice(None)] * state.n_qubits
    sl[qubit] = outcome
    keep[tuple(sl)] = t[tuple(sl)]
    flat = keep.ravel()
    prob = float(np.sum(np.abs(flat) ** 2))
    if prob < 1e-300:
        raise ZeroVectorError(f"outcome {outcome} on qubit {qubit} has probability 0")
    return StateVector(flat / np.sqrt(prob), state.n_qubits), prob


def pure_to_density(state: StateVector) -> DensityMatrix:
    if abs(state.norm() - 1.0) > ATOL_INPUT:
        raise NormError(f"state norm {state.norm()} != 1")
    psi = state.amplitudes
    return DensityMatrix(np.outer(psi, psi.conj()), state.n_qubits)


def mixture(states: list[DensityMatrix], weights: np.ndarray) -> DensityMatrix:
    w = np.asarray(weights, dtype=float)
    if len(states) != w.shape[0]:
        raise DimError(f"{len(states)} states but {w.shape[0]} weights")
    if np.any(w < 0):
        raise WeightError("mixture weights must be nonnegative")
    if abs(w.sum() - 1.0) > ATOL_INVARIANT:
        raise WeightError(f"mixture weights sum to {w.sum()}")
    n = states[0].n_qubits
    if any(s.n_qubits != n for s in states):
        raise DimError("mixture states live on different registers")
    acc = np.zeros_like(states[0].entries)
    for wi, s in zip(w, states):
        acc += wi * s.entries
    return DensityMatrix(acc, n)


def hs_distance(rho: DensityMatrix, sigma: DensityMatrix) -> float:
    """tr[(rho - sigma)^2]; equals the squared Frobenius norm for Hermitian args."""
    if rho.n_qubits != sigma.n_qubits:
        raise DimError("states live on different registers")
    diff = rho.entries - sigma.entries
    return float(np.sum(np.abs(diff) ** 2))


def overlap(rho: DensityMatrix, sigma: DensityMatrix) -> float:
    """Re tr[rho sigma]; real by Hermiticity."""
    if rho.n_qubits != sigma.n_qubits:
        raise DimError("states live on different registers")
    return float(np.real(np.vdot(sigma.entries, rho.entries)))


def trace_norm(matrix: np.ndarray) -> float:
    """Sum of absolute eigenvalues of a Hermitian matrix."""
    m = np.asarray(matrix, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise DimError(f"expected a square matrix, got {m.shape}")
    if not np.allclose(m, m.conj().T, atol=ATOL_INPUT, rtol=0):
        raise HermiticityError("trace norm input is not Hermitian")
    return float(np.sum(np.abs(np.linalg.eigvalsh(m))))


def apply_channel(kraus_ops: list[np.ndarray], matrix: np.ndarray) -> np.ndarray:
    """sum_i A_i X A_i+ for a list of Kraus operators."""
    out = np.zeros_like(np.asarray(matrix, dtype=complex))
    for a in kraus_ops:
        out += a @ matrix @ a.conj().T
    return out


def random_cptp(seed: int, dim: int, n_kraus: int) -> list[np.ndarray]:
    """Seeded random CPTP map as n_kraus Kraus blocks of a Haar-ish isometry.

    Columns of a QR-orthonormalized complex Gaussian give an isometry
    V: C^dim -> C^(n_kraus*dim); its dim x dim blocks satisfy
    sum_i A_i+ A_i = I to machine precision.
    """
    rng = np.random.default_rng(seed)
    g = rng.standard_normal((n_kraus * dim, dim)) + 1j * rng.standard_normal(
        (n_kraus * dim, dim)
    )
    q, _ = np.linalg.qr(g)
    return [q[i * dim : (i + 1) * dim] for i in range(n_kraus)]


def random_state(seed: int, n_qubits: int) -> StateVector:
    rng = np.random.default_rng(seed)
    d = 2**n_qubits
    v = rng.standard_normal(d) + 1j * rng.standard_normal(d)
    return StateVector(v / np.linalg.norm(v), n_qubits)


def random_density(seed: int, n_qubits: int, rank: int | None = None) -> DensityMatrix:
    """Seeded random mixed state as a normalized Wishart-style matrix."""
    rng = np.random.default_rng(seed)
    d = 2**n_qubits
    r = d if rank is None else rank
    g = rng.standard_normal((d, r)) + 1j * rng.standard_normal((d, r))
    m = g @ g.conj().T
    return DensityMatrix(m / np.trace(m).real, n_qubits)
