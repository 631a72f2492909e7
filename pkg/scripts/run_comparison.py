#!/usr/bin/env python3
"""Condition comparison on synthetic blobs over a dimension sweep.

For each feature dimension, trains the filter under each condition on the
same seed-matched data and prints class separation, success probabilities,
and held-out accuracy side by side. Mirrors `qfilter compare` but stays in
one process so the table is easy to extend.
"""
import argparse
import math

import numpy as np

from qfilter.datasets import synthetic_blobs
from qfilter.embedding import EmbeddedSample, EmbeddingSpec, embed_dataset, encode_point
from qfilter.featuremap import build_ansatz
from qfilter.training import CompareCondition, TrainConfig, compare_conditions


def embed_blobs(seed, per_class, dims, separation, spec):
    ds = synthetic_blobs(seed, per_class, dims, separation)
    return embed_dataset(ds.pairs(), spec)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--dims", type=str, default="2,3,4,5")
    ap.add_argument("--per-class", type=int, default=20)
    ap.add_argument("--separation", type=float, default=2.0)
    ap.add_argument("--epochs", type=int, default=200)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--cutoffs", type=str, default="0,0.5",
                    help="comma list of post-selection cutoffs to train at")
    ap.add_argument("--lambda", type=float, default=1.0, dest="lam")
    args = ap.parse_args()

    conditions = [CompareCondition("embedding-only")]
    for c in args.cutoffs.split(","):
        conditions.append(CompareCondition("feature-map", cutoff=float(c), lam=args.lam))

    header = f"{'d':>2}  {'condition':<18}  {'D_hs':>8}  {'p_succ':>7}  {'p_total':>8}  {'acc':>5}"
    print(header)
    print("-" * len(header))
    for dims in (int(v) for v in args.dims.split(",")):
        n_qubits = max(1, math.ceil(math.log2(dims)))
        spec = EmbeddingSpec("amplitude", n_qubits)
        samples = embed_blobs(args.seed, args.per_class, dims, args.separation, spec)
        test_samples = embed_blobs(args.seed + 1, args.per_class, dims, args.separation, spec)
        ansatz = build_ansatz(n_qubits, 1)
        config = TrainConfig(epochs=args.epochs, seed=args.seed, lam=args.lam)
        rows = compare_conditions(samples, test_samples, conditions, ansatz, config)
        for row in rows:
            print(f"{dims:>2}  {row['condition']:<18}  {row['hs_distance']:>8.4f}  "
                  f"{row['p_succ_train']:>7.4f}  {row['p_succ_total']:>8.2e}  "
                  f"{row['accuracy']:>5.3f}")


if __name__ == "__main__":
    main()
