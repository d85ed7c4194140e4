"""Acceptance suite: one test per criterion, each printing a pass/fail line.

Run with `pytest tests/test_acceptance.py -v -s` to see the per-criterion
lines as they complete.
"""

import os
import struct

import numpy as np
import pytest

from cfstereo.benchmarks import (
    SQRT_U_THRESHOLD,
    add_noise,
    desk_config,
    desk_scene,
    evaluate_scene,
)
from cfstereo.cascade import RangeParams, next_range, range_bounds, run_pipeline, sample_planes, uncertainty
from cfstereo.cost_volume import (
    HypothesisPlanes,
    ScoreVolume,
    build_dense_volume,
    build_sparse_volume,
    soft_argmin,
)
from cfstereo.io_formats import read_pfm, read_pgm, write_pfm, write_pgm
from cfstereo.ranking import schulze_rank
from cfstereo.synth import volume_oracle

N_SCENES = 20


def _report(name):
    print(f"\nacceptance {name}: PASS", flush=True)


@pytest.fixture(scope="module")
def scenes():
    return [desk_scene(seed) for seed in range(N_SCENES)]


@pytest.fixture(scope="module")
def clean_reports(scenes):
    cfg = desk_config()
    return [evaluate_scene(scene, cfg)[0] for scene in scenes]


def test_criterion_1_distribution_moments():
    """Unimodal and predominantly-unimodal five-plane distributions."""
    planes = HypothesisPlanes.per_pixel(np.array([2.0, 4.0, 6.0, 8.0, 10.0]).reshape(5, 1, 1))
    big = 1000.0

    cost = np.full((5, 1, 1), big)
    cost[2] = 0.0
    sv = ScoreVolume(cost, planes, 1)
    d = soft_argmin(sv)
    u = uncertainty(sv, d)
    assert abs(d[0, 0] - 6.0) < 1e-6
    assert abs(u[0, 0] - 0.0) < 1e-6

    probs = np.array([0.0, 0.0, 0.8, 0.2, 0.0])
    cost = np.where(probs > 0, -np.log(np.maximum(probs, 1e-300)), big).reshape(5, 1, 1)
    sv = ScoreVolume(cost, planes, 1)
    d = soft_argmin(sv)
    u = uncertainty(sv, d)
    assert abs(d[0, 0] - 6.4) < 1e-6
    assert abs(u[0, 0] - 0.64) < 1e-6
    _report("criterion 1 (distribution moments 6.0/0.0 and 6.4/0.64)")


def test_criterion_2_rank_fusion():
    ballots = [
        ["NLCANet", "CFNet", "CVANet", "GANet", "AANet", "HSMNet"],
        ["HSMNet", "CFNet", "NLCANet", "CVANet", "AANet", "GANet"],
        ["CFNet", "NLCANet", "HSMNet", "CVANet", "AANet", "GANet"],
    ]
    ranked = schulze_rank(ballots)
    assert [g for g in ranked] == [
        ["CFNet"],
        ["NLCANet"],
        ["HSMNet"],
        ["CVANet"],
        ["AANet"],
        ["GANet"],
    ]
    _report("criterion 2 (fused overall rank order)")


def test_criterion_3_oracle_equivalence():
    rng = np.random.default_rng(42)
    worst = 0.0
    for _ in range(200):
        g = int(rng.choice([1, 2, 4]))
        c = g * int(rng.integers(1, max(2, 8 // g + 1)))
        h = int(rng.integers(2, 17))
        w = int(rng.integers(4, 17))
        fl = rng.normal(size=(c, h, w))
        fr = rng.normal(size=(c, h, w))
        scale = 1
        dmax = int(rng.integers(2, 9)) << scale
        dense = build_dense_volume(fl, fr, dmax, scale, g)
        oracle = volume_oracle(fl, fr, dense.planes, scale, g)
        worst = max(worst, float(np.abs(dense.data - oracle.data).max()))

        n = int(rng.integers(2, 7))
        pv = np.sort(rng.uniform(-1.0, w, size=(n, h, w)), axis=0)
        planes = HypothesisPlanes.per_pixel(pv)
        sparse = build_sparse_volume(fl, fr, planes, scale, g)
        oracle_s = volume_oracle(fl, fr, planes, scale, g)
        worst = max(worst, float(np.abs(sparse.data - oracle_s.data).max()))

        count = dense.planes.count
        ipl = HypothesisPlanes.per_pixel(
            np.broadcast_to(np.arange(count, dtype=float)[:, None, None], (count, h, w)).copy()
        )
        exact = build_sparse_volume(fl, fr, ipl, scale, g)
        assert np.array_equal(exact.data, dense.data)
    assert worst < 1e-6
    _report(f"criterion 3 (oracle equivalence, worst |diff| = {worst:.2e})")


def test_criterion_4_window_algebra():
    rng = np.random.default_rng(7)
    for _ in range(500):
        shape = (3, 4)
        d = rng.uniform(0, 60, shape)
        u = rng.uniform(0, 9, shape)
        if rng.random() < 0.2:
            u[:] = 0.0
        a_lo, a_hi = sorted(rng.uniform(-1, 3, 2))
        b_lo, b_hi = sorted(rng.uniform(0, 4, 2))
        stage = int(rng.choice([3, 2]))
        dmax = int(rng.choice([64, 256]))

        # (a) larger alpha or beta never shrinks the window
        base = RangeParams(alpha=(a_lo, a_lo), beta=(b_lo, b_lo))
        lo0, hi0 = next_range(d, u, base, stage, dmax)
        for params in (
            RangeParams(alpha=(a_hi, a_hi), beta=(b_lo, b_lo)),
            RangeParams(alpha=(a_lo, a_lo), beta=(b_hi, b_hi)),
        ):
            lo1, hi1 = next_range(d, u, params, stage, dmax)
            assert np.all(lo1 <= lo0 + 1e-9)
            assert np.all(hi1 >= hi0 - 1e-9)

        # (b) close-enough truth is contained before any clamping
        half = (a_lo + 1.0) * np.sqrt(u) + b_lo
        gt = d + rng.uniform(-1.0, 1.0, shape) * half
        raw_lo, raw_hi = range_bounds(d, u, a_lo, b_lo)
        assert np.all(gt >= raw_lo - 1e-12)
        assert np.all(gt <= raw_hi + 1e-12)

        # (c) sampling hits both endpoints with uniform spacing
        n = int(rng.integers(2, 17))
        planes = sample_planes(lo0, hi0, n)
        assert np.array_equal(planes.values[0], lo0)
        assert np.array_equal(planes.values[-1], hi0)
        steps = np.diff(planes.values, axis=0)
        assert np.all(np.abs(steps - steps[0]) < 1e-9)
    _report("criterion 4 (window algebra, 500 trials)")


def test_criterion_5_desk_scale_quality(clean_reports):
    for rep in clean_reports:
        assert rep.median_abs_err <= 1.0, f"seed {rep.seed} median {rep.median_abs_err}"
        assert rep.coverage >= 0.95, f"seed {rep.seed} coverage {rep.coverage}"
        assert rep.bad2 <= rep.oracle_bad2 + 0.05, (
            f"seed {rep.seed} bad2 {rep.bad2} vs oracle {rep.oracle_bad2}"
        )
    worst_gap = max(r.bad2 - r.oracle_bad2 for r in clean_reports)
    _report(
        "criterion 5 (desk-scale quality over "
        f"{len(clean_reports)} scenes, worst bad2 gap {worst_gap:+.4f})"
    )


def test_criterion_6_uncertainty_filtering(scenes):
    cfg = desk_config()
    reductions = []
    for scene in scenes:
        rep, _ = evaluate_scene(add_noise(scene, 0.05), cfg)
        assert rep.filtered.d1_kept <= rep.d1 + 1e-12, (
            f"seed {scene.seed}: filtering raised D1 {rep.d1} -> {rep.filtered.d1_kept}"
        )
        reductions.append((rep.d1 - rep.filtered.d1_kept) / rep.d1 if rep.d1 > 0 else 0.0)
    mean_reduction = float(np.mean(reductions))
    assert mean_reduction > 0.0
    _report(
        f"criterion 6 (sqrt-U >= {SQRT_U_THRESHOLD} filtering, "
        f"mean relative D1 reduction {mean_reduction:.2%})"
    )


def test_criterion_7_thread_determinism(scenes, tmp_path):
    cfg = desk_config()
    previous = os.environ.get("CFSTEREO_THREADS")
    try:
        references = {}
        for threads in ("1", "2", "8"):
            os.environ["CFSTEREO_THREADS"] = threads
            for scene in scenes:
                out = run_pipeline(scene.left, scene.right, cfg)
                disp_path = tmp_path / f"d_{threads}_{scene.seed}.pfm"
                unc_path = tmp_path / f"u_{threads}_{scene.seed}.pfm"
                write_pfm(disp_path, out.disparity)
                write_pfm(unc_path, out.uncertainty)
                payload = disp_path.read_bytes() + unc_path.read_bytes()
                if scene.seed in references:
                    assert payload == references[scene.seed], (
                        f"seed {scene.seed}: outputs differ at {threads} threads"
                    )
                else:
                    references[scene.seed] = payload
    finally:
        if previous is None:
            os.environ.pop("CFSTEREO_THREADS", None)
        else:
            os.environ["CFSTEREO_THREADS"] = previous
    _report("criterion 7 (bitwise-identical outputs at 1/2/8 workers)")


def test_criterion_8_format_fidelity(tmp_path):
    rng = np.random.default_rng(11)
    for k in range(100):
        h = int(rng.integers(1, 9))
        w = int(rng.integers(1, 9))
        pfm_path = tmp_path / f"r{k}.pfm"
        data = rng.normal(scale=100.0, size=(h, w)).astype(np.float32).astype(np.float64)
        write_pfm(pfm_path, data)
        first = pfm_path.read_bytes()
        back = read_pfm(pfm_path)
        assert np.array_equal(back, data)
        write_pfm(pfm_path, back)
        assert pfm_path.read_bytes() == first

        maxval = int(rng.choice([255, 4095, 65535]))
        raw = rng.integers(0, maxval + 1, size=(h, w))
        body = raw.astype(">u2" if maxval > 255 else "u1").tobytes()
        pgm_path = tmp_path / f"r{k}.pgm"
        pgm_path.write_bytes(f"P5\n{w} {h}\n{maxval}\n".encode("ascii") + body)
        original = pgm_path.read_bytes()
        values, mv = read_pgm(pgm_path)
        write_pgm(pgm_path, values, maxval=mv)
        assert pgm_path.read_bytes() == original

    golden = tmp_path / "golden.pfm"
    write_pfm(golden, np.array([[3.5]]))
    assert golden.read_bytes() == b"Pf\n1 1\n-1.0\n" + struct.pack("<f", 3.5)
    _report("criterion 8 (format fidelity, 100 round trips + golden bytes)")
