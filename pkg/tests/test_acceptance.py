"""Acceptance gate: every criterion prints one [ACCEPTANCE] pass/fail line.

Run with `pytest tests/test_acceptance.py -s` to see the lines as they pass.
"""

import functools
import json
import os
import subprocess
import sys
import time
from pathlib import Path

import numpy as np
import pytest
from sklearn.metrics import adjusted_rand_score

from sf_lens import kernels
from sf_lens.analytics import kmeans, reduce_pca, reduce_tsne
from sf_lens.bundle import SyntheticSpec, generate_synthetic_bundle
from sf_lens.csf import available_channels, compute_channel, mcd_channels, msr, pe
from sf_lens.metrics import aurc, aurc_scores, rc_curve
from sf_lens.shifts import (
    BRIGHTNESS_BETA,
    KINDS,
    LEVELS,
    NOISE_SIGMA,
    CorruptionSpec,
    corrupt,
)


def criterion(name):
    def deco(fn):
        @functools.wraps(fn)
        def wrapper(*args, **kwargs):
            try:
                fn(*args, **kwargs)
            except BaseException:
                print(f"\n[ACCEPTANCE] {name}: FAIL")
                raise
            print(f"\n[ACCEPTANCE] {name}: PASS")
        return wrapper
    return deco


# --- independent AURC oracle (explicit prefix re-summation, no shared code) ---

def oracle_aurc(residuals, confidences):
    n = len(residuals)
    order = sorted(range(n), key=lambda i: (-confidences[i], i))
    ranked = np.array([residuals[o] for o in order], dtype=float)
    total = 0.0
    for j in range(1, n + 1):
        total += float(np.sum(ranked[:j])) / j
    return 100.0 * total / n


@pytest.fixture(scope="module")
def shifted_bundles():
    """separation 8, n=2000, shift_offset 4, generator seeds 0..2."""
    return [
        generate_synthetic_bundle(
            SyntheticSpec(n=2000, K=2, d=16, T=4, class_separation=8.0,
                          shift_offset=4.0, seed=seed))
        for seed in (0, 1, 2)
    ]


@criterion("AURC oracle equivalence (1000 random instances, 1e-9, <10s)")
def test_aurc_oracle_equivalence():
    rng = np.random.default_rng(0)
    start = time.time()
    worst = 0.0
    for _ in range(1000):
        n = int(rng.integers(1, 1001))
        res = rng.integers(0, 2, n)
        conf = np.round(rng.uniform(0, 1, n), 2)  # coarse grid injects duplicates
        got = aurc(rc_curve(res, conf))
        worst = max(worst, abs(got - oracle_aurc(res, conf)))
    elapsed = time.time() - start
    assert worst < 1e-9, f"worst deviation {worst}"
    assert elapsed < 10.0, f"took {elapsed:.1f}s"


@criterion("Worked-example goldens (risks, AURC, e-AURC, reversed)")
def test_worked_example_goldens():
    res = np.array([0, 0, 1, 1])
    conf = np.array([0.9, 0.8, 0.2, 0.1])
    curve = rc_curve(res, conf)
    assert np.allclose(curve.risk, [0.0, 0.0, 1.0 / 3.0, 0.5], atol=1e-15)
    a, e = aurc_scores(res, conf)
    assert a == pytest.approx(100.0 * (1 / 3 + 1 / 2) / 4, abs=1e-12)   # 20.8333%
    assert e == pytest.approx(0.0, abs=1e-12)
    a_rev, _ = aurc_scores(res, conf[::-1].copy())
    assert a_rev == pytest.approx(100.0 * (1 + 1 + 2 / 3 + 1 / 2) / 4, abs=1e-12)  # 79.1667%


@criterion("K=2 ranking equivalence (msr vs pe, mcd variants at T=1)")
def test_k2_ranking_equivalence(shifted_bundles):
    for bundle in shifted_bundles:
        run = bundle.runs[0]
        res = bundle.residuals(0)
        curve_msr = rc_curve(res, msr(run.logits), run.ids)
        curve_pe = rc_curve(res, pe(run.logits), run.ids)
        assert np.array_equal(curve_msr.ordering, curve_pe.ordering)
        assert np.array_equal(curve_msr.risk, curve_pe.risk)
        assert aurc(curve_msr) == aurc(curve_pe)
        # single-sample stacks: the mcd variants must agree the same way
        stack = run.logits[:, None, :].astype(np.float64)
        out = mcd_channels(stack)
        c1 = rc_curve(res, out["mcd-msr"], run.ids)
        c2 = rc_curve(res, out["mcd-pe"], run.ids)
        assert np.array_equal(c1.risk, c2.risk)
        assert aurc(c1) == aurc(c2)


@criterion("MCD degeneracy (T=1: mcd channels equal msr/pe to 1e-12)")
def test_mcd_degeneracy(shifted_bundles):
    for bundle in shifted_bundles:
        run = bundle.runs[0]
        stack = run.logits[:, None, :].astype(np.float64)
        out = mcd_channels(stack)
        assert np.max(np.abs(out["mcd-msr"] - msr(run.logits))) < 1e-12
        assert np.max(np.abs(out["mcd-pe"] - pe(run.logits))) < 1e-12
        assert np.max(np.abs(out["mcd-ee"] - pe(run.logits))) < 1e-12


@criterion("Jensen property (conf(mcd-ee) >= conf(mcd-pe) per record)")
def test_jensen_property(shifted_bundles):
    for bundle in shifted_bundles:
        run = bundle.runs[0]
        out = mcd_channels(run.mcd.astype(np.float64))
        assert np.all(out["mcd-ee"] >= out["mcd-pe"] - 1e-12)
    # equality exactly when the samples agree
    rng = np.random.default_rng(5)
    row = rng.standard_normal(4)
    same = mcd_channels(np.tile(row, (6, 1)))
    assert same["mcd-ee"] == pytest.approx(same["mcd-pe"], abs=1e-12)
    distinct = mcd_channels(rng.standard_normal((6, 4)))
    assert distinct["mcd-ee"] > distinct["mcd-pe"]


@criterion("CSF discrimination (AURC(msr) beats random by >= 5 points, 3 seeds)")
def test_csf_discrimination(shifted_bundles):
    gaps = []
    for bundle in shifted_bundles:
        run = bundle.runs[0]
        res = bundle.residuals(0)
        a_msr = aurc(rc_curve(res, compute_channel(run, "msr", 2), run.ids))
        a_rand = aurc(rc_curve(res, compute_channel(run, "ext:random", 2), run.ids))
        gaps.append(a_rand - a_msr)
    assert float(np.mean(gaps)) >= 5.0, f"gaps {gaps}"


@criterion("Shift degradation (target AURC > iid AURC for every channel)")
def test_shift_degradation(shifted_bundles):
    for bundle in shifted_bundles:
        run = bundle.runs[0]
        res = bundle.residuals(0)
        src = run.meta["domain"] == "source"
        tgt = ~src
        for channel in available_channels(bundle):
            conf = compute_channel(run, channel, bundle.manifest.K)
            a_iid = aurc(rc_curve(res[src], conf[src], run.ids[src]))
            a_tgt = aurc(rc_curve(res[tgt], conf[tgt], run.ids[tgt]))
            assert a_tgt > a_iid, f"{channel}: target {a_tgt} !> iid {a_iid}"


@criterion("Corruption statistics (noise sigma, brightness shift, monotone severity)")
def test_corruption_statistics():
    flat = np.full((64, 64), 0.5)
    n = flat.size
    for lv in LEVELS:
        out = corrupt(flat, CorruptionSpec("gaussian_noise", lv, seed=0), "stat")
        sd = float(np.std(out - flat))
        sigma = NOISE_SIGMA[lv - 1]
        assert abs(sd - sigma) < 3.0 * sigma / np.sqrt(2 * n)
    for lv in LEVELS:
        up = corrupt(flat, CorruptionSpec("brightness_up", lv), "b")
        assert abs(float(np.mean(up - flat)) - BRIGHTNESS_BETA[lv - 1]) < 1e-6
        down = corrupt(flat, CorruptionSpec("brightness_down", lv), "b")
        assert abs(float(np.mean(flat - down)) - BRIGHTNESS_BETA[lv - 1]) < 1e-6
    rng = np.random.default_rng(1)
    from scipy.ndimage import gaussian_filter
    img = gaussian_filter(rng.uniform(0, 1, (64, 64, 3)), sigma=(5, 5, 0))
    img = 0.2 + 0.6 * (img - img.min()) / (img.max() - img.min())
    for kind in KINDS:
        changes = [float(np.mean(np.abs(
            corrupt(img, CorruptionSpec(kind, lv, seed=2), "mono") - img)))
            for lv in LEVELS]
        assert all(b >= a - 1e-12 for a, b in zip(changes, changes[1:])), (kind, changes)


@pytest.fixture(scope="module")
def embedding_fixture():
    spec = SyntheticSpec(n=300, K=3, d=50, T=0, class_separation=20.0,
                         shift_offset=0.0, seed=0)
    bundle = generate_synthetic_bundle(spec)
    return bundle.runs[0]


@criterion("Embedding pipeline (ARI >= 0.9, deterministic, <60s)")
def test_embedding_pipeline(embedding_fixture):
    run = embedding_fixture
    start = time.time()
    pca = reduce_pca(run.latents.astype(np.float64), k=50)
    ts = reduce_tsne(pca.coords, seed=0, perplexity=30, iterations=1000)
    km = kmeans(ts.coords, k=3, seed=0)
    elapsed = time.time() - start
    ari = adjusted_rand_score(run.labels, km.assignments)
    assert ari >= 0.9, f"ARI {ari}"
    assert elapsed < 60.0, f"took {elapsed:.1f}s"
    # byte-identical across repeated runs
    again = reduce_tsne(reduce_pca(run.latents.astype(np.float64), k=50).coords,
                        seed=0, perplexity=30, iterations=1000)
    assert np.array_equal(ts.coords, again.coords)


@criterion("Embedding pipeline determinism across thread counts")
def test_embedding_thread_count_determinism(tmp_path):
    script = (
        "import numpy as np, sys\n"
        "from sf_lens.bundle import SyntheticSpec, generate_synthetic_bundle\n"
        "from sf_lens.analytics import reduce_pca, reduce_tsne\n"
        "spec = SyntheticSpec(n=300, K=3, d=50, T=0, class_separation=20.0, seed=0)\n"
        "run = generate_synthetic_bundle(spec).runs[0]\n"
        "pca = reduce_pca(run.latents.astype(np.float64), k=50)\n"
        "ts = reduce_tsne(pca.coords, seed=0, perplexity=30, iterations=300)\n"
        "ts.coords.tofile(sys.argv[1])\n"
    )
    outputs = []
    for threads in ("1", "2"):
        out = tmp_path / f"coords_{threads}.f64"
        env = dict(os.environ,
                   OMP_NUM_THREADS=threads,
                   OPENBLAS_NUM_THREADS=threads,
                   MKL_NUM_THREADS=threads)
        subprocess.run([sys.executable, "-c", script, str(out)],
                       check=True, env=env, cwd="/", timeout=300)
        outputs.append(out.read_bytes())
    assert outputs[0] == outputs[1]


@criterion("k-means (SSE non-increasing on 100 instances, k=9 default)")
def test_kmeans_acceptance():
    rng = np.random.default_rng(11)
    for trial in range(100):
        m = int(rng.integers(15, 250))
        pts = rng.standard_normal((m, 3)) * rng.uniform(0.5, 4.0)
        out = kmeans(pts, seed=trial) if m >= 9 else kmeans(pts, k=9, seed=trial)
        hist = out.sse_history
        assert all(b <= a + 1e-9 for a, b in zip(hist, hist[1:]))
        assert out.centers.shape[0] == min(9, m)
    assert kmeans(rng.standard_normal((40, 3)), seed=0).centers.shape[0] == 9


@criterion("End-to-end CLI pipeline (synth -> split -> evaluate -> embed -> failures, <5min)")
def test_end_to_end_pipeline(tmp_path):
    start = time.time()
    bundle_dir = tmp_path / "e2e"

    def cli(*args):
        proc = subprocess.run([sys.executable, "-m", "sf_lens.cli", *args],
                              capture_output=True, text=True, timeout=280)
        assert proc.returncode == 0, proc.stderr + proc.stdout
        return proc.stdout

    cli("synth", "--n", "2000", "--k", "2", "--d", "16", "--t", "2",
        "--separation", "8", "--offset", "4", "--seed", "0", "--site-tags",
        "--out", str(bundle_dir))
    cli("split", "--preset", "mskcc-acq", "--bundle", str(bundle_dir))
    report_csv = tmp_path / "report.csv"
    confusion_csv = tmp_path / "confusion.csv"
    cli("evaluate", "--bundle", str(bundle_dir), "--channels", "all",
        "--out", str(report_csv), "--confusion-out", str(confusion_csv))
    cli("embed", "--bundle", str(bundle_dir), "--iterations", "500",
        "--perplexity", "30", "--seed", "0")
    failures_out = cli("failures", "--bundle", str(bundle_dir),
                       "--channel", "msr", "--top", "2")

    import csv
    rows = list(csv.DictReader(report_csv.open()))
    assert {"iid", "mskcc-acq-source", "mskcc-acq-target"} <= {r["study"] for r in rows}
    aurc_by_study = {r["study"]: float(r["aurc"]) for r in rows
                     if r["channel"] == "msr" and r["run"] == "mean"}
    assert aurc_by_study["mskcc-acq-target"] > aurc_by_study["mskcc-acq-source"]

    conf_rows = list(csv.DictReader(confusion_csv.open()))
    assert conf_rows
    for r in conf_rows:
        assert int(r["TP"]) + int(r["FP"]) + int(r["TN"]) + int(r["FN"]) == int(r["n"])

    hits = json.loads(failures_out)
    assert len(hits) == 2
    assert (bundle_dir / "embeddings").is_dir()
    elapsed = time.time() - start
    assert elapsed < 300.0, f"pipeline took {elapsed:.0f}s"
