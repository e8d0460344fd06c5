#!/usr/bin/env python3
"""Smoke test for the trajwarp_py extension module.

Loads the compiled cdylib straight from the cargo target directory (no
maturin needed), generates a small synthetic corpus, and drives the whole
pipeline: preprocessing, pairwise DTW, clustering, outlier ranking, MDS.

Usage:
    cargo build --workspace [--release]
    python3 python/smoke_test.py
"""
import importlib.util
import math
import os
import shutil
import sys
import tempfile

REPO = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))


def load_module():
    names = ["libtrajwarp_py.so", "trajwarp_py.so", "libtrajwarp_py.dylib", "trajwarp_py.pyd"]
    candidates = []
    for profile in ("release", "debug"):
        for name in names:
            path = os.path.join(REPO, "target", profile, name)
            if os.path.exists(path):
                candidates.append(path)
    if not candidates:
        sys.exit("extension not built; run `cargo build --workspace` first")
    built = max(candidates, key=os.path.getmtime)
    # The module must be importable under its canonical name.
    tmp = tempfile.mkdtemp(prefix="trajwarp-smoke-")
    target = os.path.join(tmp, "trajwarp_py" + os.path.splitext(built)[1])
    shutil.copy(built, target)
    spec = importlib.util.spec_from_file_location("trajwarp_py", target)
    module = importlib.util.module_from_spec(spec)
    spec.loader.exec_module(module)
    return module


def approx(a, b, tol=1e-9):
    assert abs(a - b) <= tol, f"{a} != {b} (tol {tol})"


def main():
    tw = load_module()
    print(f"loaded trajwarp_py {tw.__version__}")

    # DTW basics against hand-checked values.
    d, path = tw.dtw_distance([[0.0], [1.0], [2.0]], [[0.0], [2.0], [2.0]])
    approx(d, 1.0)
    assert path[0] == (0, 0) and path[-1] == (2, 2)
    d_self, _ = tw.dtw_distance([[1.0, 2.0], [3.0, 4.0]], [[1.0, 2.0], [3.0, 4.0]])
    approx(d_self, 0.0)
    d_banded, _ = tw.dtw_distance([[0.0], [1.0], [2.0]], [[0.0], [2.0], [2.0]], band_radius=0)
    assert d_banded >= d - 1e-12
    print("dtw_distance ok")

    # Small end-to-end run: 6 patients, 1 day, default perturbation plan.
    with tempfile.TemporaryDirectory() as tmp:
        corpus = os.path.join(tmp, "corpus.csv")
        tw.write_synthetic_corpus(corpus, seed=5, n_patients=6, duration_days=1)
        epochs = tw.load_epochs(corpus)
        assert len(epochs) == 6 * (1440 // 180), f"unexpected epoch count {len(epochs)}"
        assert all(len(e["data"]) == 180 and len(e["data"][0]) == 2 for e in epochs)

        series = [e["data"] for e in epochs]
        matrix = tw.dtw_pairwise(series)
        n = len(matrix)
        assert n == len(epochs)
        for i in range(n):
            approx(matrix[i][i], 0.0)
            for j in range(i + 1, n):
                approx(matrix[i][j], matrix[j][i])
        print(f"dtw_pairwise ok ({n} epochs)")

        merges = tw.linkage_average(matrix)
        assert len(merges) == n - 1
        distances = [m[2] for m in merges]
        assert all(b >= a for a, b in zip(distances, distances[1:])), "merge distances must not decrease"

        labels, k, gap = tw.cluster_by_max_gap(matrix)
        assert len(labels) == n and 1 <= k <= n and max(labels) == k - 1
        print(f"clustering ok (k={k}, cut gap {gap:.3f})")

        scores = tw.outlier_scores(matrix)
        assert len(scores) == n
        assert all(s1 >= s2 for (_, s1), (_, s2) in zip(scores, scores[1:]))
        row_mean = sum(matrix[scores[0][0]]) / (n - 1)
        approx(scores[0][1], row_mean, 1e-9)
        print("outlier_scores ok")

        coords, stress, eigenvalues, neg_mass = tw.classical_mds(matrix)
        assert len(coords) == n and len(coords[0]) == 2
        assert len(eigenvalues) == n
        assert 0.0 <= neg_mass <= 1.0 and stress >= 0.0
        for axis in range(2):
            centroid = sum(c[axis] for c in coords) / n
            assert abs(centroid) < 1e-8
        print(f"classical_mds ok (stress {stress:.4f}, clamped mass {neg_mass:.4f})")

    # Determinism of the in-memory generator.
    a = tw.generate_synthetic_corpus(seed=3, n_patients=2, duration_days=1)
    b = tw.generate_synthetic_corpus(seed=3, n_patients=2, duration_days=1)
    assert a == b, "same seed must generate identical corpora"
    hr = a["p00"]["hr"]
    assert len(hr) == 1440 and all(math.isfinite(v) for v in hr)
    print("generator determinism ok")

    print("smoke test passed")


if __name__ == "__main__":
    main()
