#!/usr/bin/env python3
"""Generate the bundled sparse binary classification data (LIBSVM text).

Rows mimic rcv1 tf-idf documents: very sparse (about 74 nonzeros per row on
average, Zipf-distributed feature popularity), unit Euclidean norm, labels
from a planted linear model with 3% flips.
"""
import argparse
import pathlib

import numpy as np


def fmt(v):
    return repr(float(v))


def make_rows(rng, n, dim, w):
    # Zipf-like feature popularity, as in text data.
    popularity = 1.0 / np.arange(1, dim + 1) ** 0.8
    popularity /= popularity.sum()
    lines = []
    for _ in range(n):
        nnz = rng.integers(30, 119)
        idx = np.sort(rng.choice(dim, size=nnz, replace=False, p=popularity))
        val = rng.gamma(2.0, 1.0, size=nnz) + 0.05
        val /= np.linalg.norm(val)
        val = np.maximum(np.round(val, 6), 0.001)
        margin = float(val @ w[idx])
        y = 1 if margin > 0 else -1
        if rng.random() < 0.03:
            y = -y
        pairs = " ".join(f"{i + 1}:{fmt(v)}" for i, v in zip(idx, val))
        lines.append(f"{y} {pairs}\n")
    return lines


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--out-dir", default=str(pathlib.Path(__file__).resolve().parent.parent / "data"))
    ap.add_argument("--seed", type=int, default=20190101)
    ap.add_argument("--dim", type=int, default=5000)
    ap.add_argument("--train", type=int, default=1500)
    ap.add_argument("--test", type=int, default=500)
    args = ap.parse_args()

    rng = np.random.default_rng(args.seed)
    w = rng.normal(size=args.dim) * 3.0
    w -= 0.15 * w.mean()
    out = pathlib.Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "small_train.svm").write_text("".join(make_rows(rng, args.train, args.dim, w)))
    (out / "small_test.svm").write_text("".join(make_rows(rng, args.test, args.dim, w)))


if __name__ == "__main__":
    main()
