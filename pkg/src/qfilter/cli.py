"""Command-line front end: train, classify, compare, selftest.

All results are JSON with stable key order; the compare command also emits
a plottable CSV. Every result embeds a manifest (resolved config + dataset
fingerprint) sufficient to rebuild the run.
"""
from __future__ import annotations

import argparse
import csv
import hashlib
import json
import math
import sys

import numpy as np

from . import __version__
from .classifier import filtered_fidelity_classify
from .datasets import (
    PCAModel,
    RawDataset,
    iris_builtin,
    load_csv,
    pca_fit,
    pca_project,
    synthetic_blobs,
)
from .embedding import (
    EmbeddedSample,
    EmbeddingSpec,
    FeatureScaling,
    embed_dataset,
    encode_point,
    fit_rotation_scaling,
)
from .errors import (
    ClassAnnihilated,
    ClassBalanceError,
    CsvError,
    DimError,
    DomainError,
    FilterAnnihilated,
    ParamShapeError,
    ShapeError,
    ZeroVectorError,
)
from .featuremap import build_ansatz, kraus_from_circuit, transform_ensemble
from .protocol import run_classifier_protocol, sample_outcomes
from .quantum import pure_to_density
from .selftest import run_all
from .training import CompareCondition, TrainConfig, compare_conditions, train

DATA_ERRORS = (
    CsvError,
    ClassBalanceError,
    DimError,
    ShapeError,
    ZeroVectorError,
    DomainError,
    ParamShapeError,
    ClassAnnihilated,
    OSError,
    KeyError,
    json.JSONDecodeError,
)

TIE_EPS = 1e-12


def _sanitize(obj):
    """JSON-safe copy: numpy scalars/arrays unwrapped, NaN/inf to None."""
    if isinstance(obj, dict):
        return {k: _sanitize(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_sanitize(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_sanitize(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating, float)):
        f = float(obj)
        return f if math.isfinite(f) else None
    if isinstance(obj, (np.integer,)):
        return int(obj)
    return obj


def _emit_json(payload: dict, out_path: str | None) -> None:
    text = json.dumps(_sanitize(payload), indent=2, sort_keys=True)
    if out_path:
        with open(out_path, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    else:
        print(text)


def _fingerprint(dataset: RawDataset) -> dict:
    h = hashlib.sha256()
    h.update(np.ascontiguousarray(dataset.features).tobytes())
    h.update(np.ascontiguousarray(dataset.labels).tobytes())
    return {
        "rows": int(dataset.features.shape[0]),
        "dims": int(dataset.features.shape[1]),
        "sha256": h.hexdigest(),
    }


def _resolve_dataset(args) -> tuple[RawDataset, dict]:
    spec = args.dataset
    if spec == "iris":
        ds, _ = iris_builtin()
        return ds, {"kind": "iris"}
    if spec == "blobs":
        ds = synthetic_blobs(args.seed, args.per_class, args.dims, args.separation)
        return ds, {
            "kind": "blobs",
            "seed": args.seed,
            "per_class": args.per_class,
            "dims": args.dims,
            "separation": args.separation,
        }
    if spec.startswith("csv:"):
        path = spec[len("csv:") :]
        return load_csv(path), {"kind": "csv", "path": path}
    raise DomainError(f"unknown dataset {spec!r} (use iris, blobs, or csv:<path>)")


class Pipeline:
    """Dataset + preprocessing + embedding resolved from CLI args or a manifest."""

    def __init__(self, dataset, descriptor, embedding_arg, embed_layers, ring):
        self.dataset = dataset
        self.descriptor = descriptor
        feats = dataset.features
        self.pca = None
        self.scaling = None
        if embedding_arg == "angle":
            self.spec = EmbeddingSpec("angle", 1)
        elif embedding_arg == "amplitude":
            n_qubits = max(1, math.ceil(math.log2(max(feats.shape[1], 2))))
            self.spec = EmbeddingSpec("amplitude", n_qubits)
        elif embedding_arg.startswith("pca:"):
            k = int(embedding_arg[len("pca:") :])
            self.pca = pca_fit(dataset, k)
            projected = pca_project(self.pca, feats)
            self.scaling = fit_rotation_scaling(projected)
            count = EmbeddingSpec("pca-layer", k, layers=embed_layers, ring=ring).param_count()
            self.spec = EmbeddingSpec(
                "pca-layer", k, params=(0.0,) * count, layers=embed_layers, ring=ring
            )
        else:
            raise DomainError(f"unknown embedding {embedding_arg!r}")

    def preprocess(self, features: np.ndarray) -> np.ndarray:
        out = np.asarray(features, dtype=float)
        if self.pca is not None:
            out = pca_project(self.pca, out)
        if self.scaling is not None:
            out = self.scaling.apply(out)
        return out

    def training_pairs(self) -> list[tuple[np.ndarray, int]]:
        feats = self.preprocess(self.dataset.features)
        return [(feats[i], int(self.dataset.labels[i])) for i in range(len(feats))]

    def samples(self, spec: EmbeddingSpec | None = None):
        return embed_dataset(self.training_pairs(), spec or self.spec)

    def encode_test_point(self, x: np.ndarray, spec: EmbeddingSpec | None = None):
        row = self.preprocess(np.asarray(x, dtype=float)[None, :])[0]
        return encode_point(row, spec or self.spec)

    def embedding_manifest(self, spec: EmbeddingSpec | None = None) -> dict:
        spec = spec or self.spec
        out = {"kind": spec.kind, "n_qubits": spec.n_qubits}
        if spec.kind == "pca-layer":
            out["layers"] = spec.layers
            out["ring"] = spec.ring
            out["params"] = list(spec.params)
            out["pca_mean"] = self.pca.mean.tolist()
            out["pca_components"] = self.pca.components.tolist()
            out["scale_center"] = list(self.scaling.center)
            out["scale_factor"] = list(self.scaling.factor)
        return out


def _pipeline_from_manifest(cfg: dict) -> Pipeline:
    d = cfg["dataset"]
    if d["kind"] == "iris":
        dataset, _ = iris_builtin()
    elif d["kind"] == "blobs":
        dataset = synthetic_blobs(d["seed"], d["per_class"], d["dims"], d["separation"])
    else:
        dataset = load_csv(d["path"])
    e = cfg["embedding"]
    if e["kind"] == "pca-layer":
        pipe = Pipeline(dataset, d, f"pca:{e['n_qubits']}", e["layers"], e["ring"])
        # restore the fitted preprocessing and trained angles exactly
        comps = np.array(e["pca_components"])
        pipe.pca = PCAModel(np.array(e["pca_mean"]), comps, np.zeros(comps.shape[1]))
        pipe.scaling = FeatureScaling(tuple(e["scale_center"]), tuple(e["scale_factor"]))
        pipe.spec = EmbeddingSpec(
            "pca-layer",
            e["n_qubits"],
            params=tuple(e["params"]),
            layers=e["layers"],
            ring=e["ring"],
        )
        return pipe
    return Pipeline(dataset, d, e["kind"], 1, False)


def _decision_fields(value: float) -> dict:
    if value is None or not math.isfinite(value):
        return {"value": None, "decision": None, "tie_flag": False}
    tie = abs(value) <= TIE_EPS
    decision = +1 if (value > 0 or tie) else -1
    return {"value": value, "decision": decision, "tie_flag": tie}


def cmd_train(args) -> int:
    dataset, descriptor = _resolve_dataset(args)
    pipe = Pipeline(dataset, descriptor, args.embedding, args.embed_layers, args.ring)
    samples = pipe.samples()
    ansatz = build_ansatz(pipe.spec.n_qubits, args.layers)
    config = TrainConfig(
        learning_rate=args.lr,
        epochs=args.epochs,
        optimizer=args.optimizer,
        lam=getattr(args, "lambda"),
        cutoff=args.c,
        init_scale=args.init_scale,
        seed=args.seed,
        co_train_embedding=args.co_train,
    )
    raw = pipe.training_pairs() if args.co_train else None
    result = train(config, samples, ansatz, raw_data=raw, embedding_spec=pipe.spec)

    theta_star = result.theta_star
    final_spec = pipe.spec
    if args.co_train:
        final_spec = EmbeddingSpec(
            "pca-layer",
            pipe.spec.n_qubits,
            params=tuple(theta_star[ansatz.n_params :]),
            layers=pipe.spec.layers,
            ring=pipe.spec.ring,
        )
    final_samples = pipe.samples(final_spec)
    pair = kraus_from_circuit(ansatz, theta_star[: ansatz.n_params])
    ens = transform_ensemble(pair, final_samples)

    manifest = {
        "command": "train",
        "artifact_version": __version__,
        "seed": args.seed,
        "config": {
            "dataset": descriptor,
            "embedding": pipe.embedding_manifest(final_spec),
            "ansatz_layers": args.layers,
            "train": {
                "learning_rate": config.learning_rate,
                "epochs": config.epochs,
                "optimizer": config.optimizer,
                "fd_step": config.fd_step,
                "lambda": config.lam,
                "cutoff": config.cutoff,
                "init_scale": config.init_scale,
                "co_train_embedding": config.co_train_embedding,
            },
        },
        "dataset_fingerprint": _fingerprint(dataset),
    }
    payload = {
        "manifest": manifest,
        "initial_cost": result.cost_trace[0],
        "final_cost": result.report.risk,
        "hs_distance": result.report.hs_distance,
        "p_succ": result.report.p_succ,
        "p_joint": ens.p_joint,
        "penalty": result.report.penalty,
        "theta_star": theta_star,
        "cost_trace": result.cost_trace,
        "p_succ_trace": result.p_succ_trace,
        "wall_time_s": result.wall_time,
    }
    _emit_json(payload, args.out)
    return 0


def cmd_classify(args) -> int:
    with open(args.model, encoding="utf-8") as fh:
        model = json.load(fh)
    manifest = model["manifest"]
    cfg = manifest["config"]
    pipe = _pipeline_from_manifest(cfg)
    samples = pipe.samples()
    ansatz = build_ansatz(pipe.spec.n_qubits, cfg["ansatz_layers"])
    theta = np.array(model["theta_star"], dtype=float)[: ansatz.n_params]
    x = np.array([float(v) for v in args.input.split(",")], dtype=float)
    test_state = pipe.encode_test_point(x)

    out_manifest = {
        "command": "classify",
        "artifact_version": __version__,
        "seed": args.seed,
        "config": cfg,
        "dataset_fingerprint": manifest["dataset_fingerprint"],
        "input": x.tolist(),
        "path": args.path,
        "shots": args.shots,
        "model": args.model,
    }
    try:
        pair = kraus_from_circuit(ansatz, theta)
        ens = transform_ensemble(pair, samples)
        if args.path == "analytic":
            out = filtered_fidelity_classify(ens, pair, pure_to_density(test_state))
            fields = {
                "value": out.value,
                "decision": out.decision,
                "tie_flag": out.tie,
                "p_s_test": out.p_s_test,
            }
        else:
            outcome = run_classifier_protocol(samples, test_state, ansatz, theta)
            if args.shots > 0:
                outcome = sample_outcomes(outcome, args.shots, args.seed)
            fields = _decision_fields(outcome.derived_value)
            fields["p_s_test"] = outcome.p_postselect / ens.p_succ
    except FilterAnnihilated:
        fields = {
            "value": None,
            "decision": None,
            "tie_flag": False,
            "p_s_test": 0.0,
            "error": "filter-annihilated",
        }
    payload = {"manifest": out_manifest, **fields}
    _emit_json(payload, args.out)
    return 0


def _parse_conditions(text: str, lam: float) -> list[CompareCondition]:
    conds = []
    for token in text.split(","):
        token = token.strip()
        if token == "embedding-only":
            conds.append(CompareCondition("embedding-only"))
        elif token.startswith("c="):
            conds.append(CompareCondition("feature-map", cutoff=float(token[2:]), lam=lam))
        else:
            raise DomainError(f"bad condition {token!r} (use embedding-only or c=<x>)")
    return conds


def cmd_compare(args) -> int:
    conditions = _parse_conditions(args.conditions, getattr(args, "lambda"))
    if len(conditions) < 2:
        raise DomainError("compare needs at least 2 conditions")
    dim_list = [int(v) for v in str(args.dim_sweep).split(",")] if args.dataset == "blobs" else [None]

    all_rows = []
    descriptors = []
    for d in dim_list:
        run_args = argparse.Namespace(**vars(args))
        if d is not None:
            run_args.dims = d
        dataset, descriptor = _resolve_dataset(run_args)
        descriptors.append(descriptor)
        pipe = Pipeline(dataset, descriptor, args.embedding, args.embed_layers, args.ring)
        samples = pipe.samples()
        if args.dataset == "blobs":
            test_ds = synthetic_blobs(args.seed + 1, args.per_class, run_args.dims, args.separation)
            test_pairs = [
                (pipe.preprocess(test_ds.features)[i], int(test_ds.labels[i]))
                for i in range(len(test_ds.labels))
            ]
            test_samples = [
                EmbeddedSample(encode_point(x, pipe.spec), y, i)
                for i, (x, y) in enumerate(test_pairs)
            ]
        elif args.dataset == "iris":
            _, (tx, ty) = iris_builtin()
            test_samples = [EmbeddedSample(pipe.encode_test_point(tx), ty, 0)]
        else:
            test_samples = samples
        ansatz = build_ansatz(pipe.spec.n_qubits, args.layers)
        config = TrainConfig(
            learning_rate=args.lr,
            epochs=args.epochs,
            optimizer=args.optimizer,
            lam=getattr(args, "lambda"),
            seed=args.seed,
        )
        rows = compare_conditions(samples, test_samples, conditions, ansatz, config)
        d_value = dataset.features.shape[1]
        for row in rows:
            row["d"] = int(d_value)
        all_rows.extend(rows)

    manifest = {
        "command": "compare",
        "artifact_version": __version__,
        "seed": args.seed,
        "config": {
            "datasets": descriptors,
            "embedding": args.embedding,
            "ansatz_layers": args.layers,
            "conditions": args.conditions,
            "lambda": getattr(args, "lambda"),
            "epochs": args.epochs,
            "learning_rate": args.lr,
        },
    }
    _emit_json({"manifest": manifest, "rows": all_rows}, args.out)
    csv_path = (args.out.rsplit(".", 1)[0] if args.out else "compare") + ".csv"
    with open(csv_path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            ["condition", "d", "hs_distance", "p_succ_train", "p_succ_total", "accuracy"]
        )
        for row in all_rows:
            writer.writerow(
                [
                    row["condition"],
                    row["d"],
                    repr(row["hs_distance"]),
                    repr(row["p_succ_train"]),
                    repr(row["p_succ_total"]),
                    repr(row["accuracy"]),
                ]
            )
    return 0


def cmd_selftest(args) -> int:
    suites = run_all(inject_fault=args.inject_fault)
    passed = all(s.passed() for s in suites)
    payload = {
        "passed": passed,
        "suites": [
            {
                "name": s.name,
                "instances": s.instances,
                "failures": s.failures,
                "max_residual": s.max_residual,
                "tolerance": s.tolerance,
                "seconds": s.seconds,
                "failing_case": s.failing_case,
            }
            for s in suites
        ],
    }
    _emit_json(payload, args.out)
    return 0 if passed else 1


def _add_common_data_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--dataset", default="iris", help="iris | blobs | csv:<path>")
    p.add_argument(
        "--embedding",
        default=None,
        help="amplitude | angle | pca:<k> (default: angle for iris, else amplitude)",
    )
    p.add_argument("--layers", type=int, default=1, help="filter ansatz layers")
    p.add_argument("--embed-layers", type=int, default=1, dest="embed_layers")
    p.add_argument("--ring", action="store_true", help="ring couplers in pca-layer")
    p.add_argument("--per-class", type=int, default=20, dest="per_class")
    p.add_argument("--dims", type=int, default=2, help="blobs feature dimension")
    p.add_argument("--separation", type=float, default=2.0, help="blobs class gap")
    p.add_argument("--seed", type=int, default=0)


def _add_train_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--c", type=float, default=0.0, help="success-probability cutoff")
    p.add_argument("--lambda", type=float, default=1.0, help="penalty weight")
    p.add_argument("--epochs", type=int, default=200)
    p.add_argument("--lr", type=float, default=0.05)
    p.add_argument("--optimizer", choices=("adam", "sgd"), default="adam")
    p.add_argument("--init-scale", type=float, default=0.0, dest="init_scale",
                   help="stddev of the random start (0 = exact identity)")
    p.add_argument("--co-train", action="store_true", dest="co_train",
                   help="optimize pca-layer embedding angles jointly")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qfilter",
        description="Probabilistic Kraus filters over embedded data: "
        "train, classify, compare, selftest.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_train = sub.add_parser("train", help="fit filter parameters")
    _add_common_data_flags(p_train)
    _add_train_flags(p_train)
    p_train.add_argument("--out", default=None, help="result JSON path (default stdout)")
    p_train.set_defaults(func=cmd_train)

    p_cls = sub.add_parser("classify", help="classify one point with a trained model")
    p_cls.add_argument("--model", required=True, help="train result JSON")
    p_cls.add_argument("--input", required=True, help="comma-separated features")
    p_cls.add_argument("--path", choices=("analytic", "circuit"), default="analytic")
    p_cls.add_argument("--shots", type=int, default=0, help="0 = exact probabilities")
    p_cls.add_argument("--seed", type=int, default=0)
    p_cls.add_argument("--out", default=None)
    p_cls.set_defaults(func=cmd_classify)

    p_cmp = sub.add_parser("compare", help="embedding-only vs trained filter arms")
    _add_common_data_flags(p_cmp)
    _add_train_flags(p_cmp)
    p_cmp.add_argument(
        "--conditions",
        default="embedding-only,c=0,c=0.5",
        help="comma list: embedding-only, c=<cutoff>",
    )
    p_cmp.add_argument(
        "--dim-sweep",
        default=None,
        dest="dim_sweep",
        help="comma list of blob dims (default: --dims only)",
    )
    p_cmp.add_argument("--out", default=None, help="JSON path; CSV lands beside it")
    p_cmp.set_defaults(func=cmd_compare)

    p_self = sub.add_parser("selftest", help="run the verification suites")
    p_self.add_argument("--inject-fault", action="store_true", help=argparse.SUPPRESS)
    p_self.add_argument("--out", default=None)
    p_self.set_defaults(func=cmd_selftest)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "embedding", "") is None:
        args.embedding = "angle" if args.dataset == "iris" else "amplitude"
    if getattr(args, "dim_sweep", None) is None and hasattr(args, "dims"):
        args.dim_sweep = str(args.dims)
    if hasattr(args, "c") and not 0.0 <= args.c <= 1.0:
        parser.error("--c must be in [0, 1]")
    if hasattr(args, "lambda") and getattr(args, "lambda") < 0:
        parser.error("--lambda must be >= 0")
    if hasattr(args, "shots") and args.shots < 0:
        parser.error("--shots must be >= 0")
    if getattr(args, "co_train", False) and not str(args.embedding).startswith("pca:"):
        parser.error("--co-train requires a pca:<k> embedding")
    try:
        return args.func(args)
    except DATA_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
