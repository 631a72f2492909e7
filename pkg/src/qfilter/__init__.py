"""Probabilistic Kraus filters for quantum-embedded data.

Pipeline: embed classical points as pure states, train a post-selected
single-ancilla filter that pushes the two class ensembles apart in
Hilbert-Schmidt distance, and classify by ensemble fidelity. A register-level
circuit path (state preparation, post-selection, swap tests) mirrors the
analytic one for differential verification.
"""
from __future__ import annotations

__version__ = "0.1.0"

from .classifier import (
    ClassifierOutput,
    RiskReport,
    build_ensembles,
    constrained_risk,
    fidelity_classify,
    filtered_class_weights,
    filtered_fidelity_classify,
    risk_from_ensembles,
    uniform_class_weights,
    weighted_empirical_risk,
)
from .datasets import (
    PCAModel,
    RawDataset,
    downsample_image,
    iris_builtin,
    load_csv,
    pca_fit,
    pca_transform,
    synthetic_blobs,
)
from .embedding import (
    EmbeddedSample,
    EmbeddingSpec,
    amplitude_encode,
    angle_encode,
    embed_dataset,
    encode_point,
    pca_layer_encode,
)
from .featuremap import (
    FeatureMapCircuit,
    KrausPair,
    TransformedEnsembles,
    apply_filter,
    build_ansatz,
    circuit_unitary,
    kraus_from_circuit,
    transform_ensemble,
)
from .protocol import (
    ProtocolOutcome,
    RegisterLayout,
    apply_feature_maps_postselect,
    classifier_layout,
    prepare_classifier_state,
    prepare_risk_state,
    risk_layout,
    run_classifier_protocol,
    run_risk_protocol,
    sample_outcomes,
)
from .quantum import (
    DensityMatrix,
    GateSpec,
    StateVector,
    UnitaryMatrix,
    apply_gate,
    basis_state,
    gate_matrix,
    hs_distance,
    mixture,
    overlap,
    project_qubit,
    pure_to_density,
    random_cptp,
    tensor,
    trace_norm,
    zero_state,
)
from .training import (
    CompareCondition,
    TrainConfig,
    TrainResult,
    compare_conditions,
    cost,
    gradient,
    train,
)
