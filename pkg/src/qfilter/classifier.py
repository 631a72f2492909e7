"""Fidelity classifiers, weighted empirical risk, and the cutoff objective."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .embedding import EmbeddedSample
from .errors import ClassBalanceError, DomainError, ShapeError
from .featuremap import KrausPair, TransformedEnsembles, apply_filter
from .quantum import DensityMatrix, hs_distance, overlap

TIE_EPS = 1e-12
SENTINEL_COST = 2.0


@dataclass(frozen=True)
class ClassifierOutput:
    """Classifier value with its sign decision; ties go to +1 but are flagged."""

    value: float
    decision: int
    tie: bool
    p_s_test: float = 1.0


def _decide(value: float, p_s_test: float = 1.0) -> ClassifierOutput:
    if abs(value) <= TIE_EPS:
        return ClassifierOutput(value, +1, True, p_s_test)
    return ClassifierOutput(value, +1 if value > 0 else -1, False, p_s_test)


@dataclass(frozen=True)
class RiskReport:
    """Cutoff-constrained cost and its parts.

    risk = -hs_distance + penalty and penalty = lam * max(0, cutoff - p_succ)
    must hold to 1e-12; both are checked here so a report cannot go stale.
    """

    risk: float
    hs_distance: float
    p_succ: float
    penalty: float
    lam: float
    cutoff: float

    def __post_init__(self) -> None:
        expected_pen = self.lam * max(0.0, self.cutoff - self.p_succ)
        if abs(self.penalty - expected_pen) > 1e-12:
            raise ValueError(f"penalty {self.penalty} != {expected_pen}")
        if abs(self.risk - (-self.hs_distance + self.penalty)) > 1e-12:
            raise ValueError("risk does not decompose into -hs_distance + penalty")


def build_ensembles(samples: list[EmbeddedSample]) -> tuple[DensityMatrix, DensityMatrix]:
    """Uniform per-class mixtures (weights 1/M_class), +1 class first.

    Accumulation order and normalization mirror transform_ensemble exactly,
    so an identity filter reproduces these matrices bit-for-bit.
    """
    by_label = {+1: [], -1: []}
    for s in samples:
        by_label[s.label].append(s)
    if not by_label[+1] or not by_label[-1]:
        raise ClassBalanceError("both classes are required to build ensembles")
    n = samples[0].state.n_qubits
    out = {}
    for label in (+1, -1):
        acc = np.zeros((2**n, 2**n), dtype=complex)
        trace = 0.0
        for s in by_label[label]:
            psi = s.state.amplitudes
            rho = np.outer(psi, psi.conj())
            acc += rho
            trace += float(np.real(np.trace(rho)))
        m = acc / trace
        out[label] = DensityMatrix((m + m.conj().T) / 2, n)
    return out[+1], out[-1]


def fidelity_classify(
    rho: DensityMatrix, sigma: DensityMatrix, test: DensityMatrix
) -> ClassifierOutput:
    """tr[(rho - sigma) test]: positive favors the +1 class."""
    value = overlap(rho, test) - overlap(sigma, test)
    return _decide(value)


def filtered_fidelity_classify(
    ens: TransformedEnsembles, pair: KrausPair, test: DensityMatrix
) -> ClassifierOutput:
    """Filter the test state, then classify against the filtered ensembles."""
    test_f, p_s = apply_filter(pair, test)
    value = overlap(ens.pos, test_f) - overlap(ens.neg, test_f)
    return _decide(value, p_s)


def uniform_class_weights(labels: np.ndarray) -> np.ndarray:
    """Baseline weights M / M_class, balancing unequal class sizes."""
    y = np.asarray(labels)
    m = y.shape[0]
    counts = {lab: int(np.sum(y == lab)) for lab in (+1, -1)}
    if counts[+1] == 0 or counts[-1] == 0:
        raise ClassBalanceError("both classes required for class weights")
    return np.array([m / counts[int(lab)] for lab in y], dtype=float)


def filtered_class_weights(labels: np.ndarray, p_s: np.ndarray) -> np.ndarray:
    """Post-selected weights M * p_s(x_m) / p_s(class of m)."""
    y = np.asarray(labels)
    p = np.asarray(p_s, dtype=float)
    if y.shape != p.shape:
        raise ShapeError(f"labels {y.shape} vs p_s {p.shape}")
    m = y.shape[0]
    class_p = {lab: float(p[y == lab].sum()) for lab in (+1, -1)}
    if class_p[+1] <= 0 or class_p[-1] <= 0:
        raise ClassBalanceError("a class has zero total success probability")
    return np.array([m * p[i] / class_p[int(y[i])] for i in range(m)], dtype=float)


def weighted_empirical_risk(
    values: np.ndarray, labels: np.ndarray, weights: np.ndarray
) -> float:
    """-(1/M) sum_m w_m f(x_m) y_m."""
    v = np.asarray(values, dtype=float)
    y = np.asarray(labels, dtype=float)
    w = np.asarray(weights, dtype=float)
    if not (v.shape == y.shape == w.shape):
        raise ShapeError(f"shapes differ: {v.shape}, {y.shape}, {w.shape}")
    return float(-(w * v * y).sum() / v.shape[0])


def risk_from_ensembles(ens: TransformedEnsembles) -> float:
    """-D_hs of the filtered class ensembles; the training objective at c=0."""
    risk = -hs_distance(ens.pos, ens.neg)
    assert risk >= -2.0 - 1e-9, "risk below the -2 floor is impossible"
    return risk


def constrained_risk(risk: float, p_succ: float, lam: float, cutoff: float) -> RiskReport:
    """Hinge-penalized objective: risk + lam * max(0, cutoff - p_succ)."""
    if lam < 0:
        raise DomainError(f"lambda must be >= 0, got {lam}")
    if not 0.0 <= cutoff <= 1.0:
        raise DomainError(f"cutoff must be in [0, 1], got {cutoff}")
    if not -1e-9 <= p_succ <= 1.0 + 1e-9:
        raise DomainError(f"p_succ must be in [0, 1], got {p_succ}")
    p = min(max(p_succ, 0.0), 1.0)
    penalty = lam * max(0.0, cutoff - p)
    return RiskReport(risk + penalty, -risk, p, penalty, lam, cutoff)


def sentinel_report(lam: float, cutoff: float) -> RiskReport:
    """Worst-case stand-in when a filter annihilates an entire class.

    Cost pinned at +2 (no feasible objective exceeds it), p_succ at 0;
    hs_distance is back-derived so the RiskReport identities still hold.
    """
    penalty = lam * max(0.0, cutoff)
    return RiskReport(SENTINEL_COST, penalty - SENTINEL_COST, 0.0, penalty, lam, cutoff)
