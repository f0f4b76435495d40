"""End-to-end acceptance criteria, each reported as one PASS/FAIL line."""

import time
from fractions import Fraction

import numpy as np
import pytest

from wncsim import codes
from wncsim.codes import CodeSpec, greedy_construct, separation_vector
from wncsim.detect import DetectorInput, map_detect
from wncsim.mc import SweepConfig, estimate_diversity, mrc_rayleigh_ber, run_sweep, snr_gap
from wncsim.network import validate
from wncsim.sumprod import sumprod_detect

from conftest import NET1_G, NET1_V, G1, G2, REP_G, REP_V, V1, record_acceptance
from oracles import map_oracle, random_rounds, relative_marginal_error

SEED = 20110328


def report(name, ok, detail, started):
    status = "PASS" if ok else "FAIL"
    record_acceptance(f"{name}: {status}  {detail}  ({time.perf_counter() - started:.1f} s)")
    assert ok, detail


def fmt(values):
    return "[" + ", ".join(f"{v:.2f}" for v in values) + "]"


def test_c01_separation_vectors():
    t0 = time.perf_counter()
    got = {
        "net1": separation_vector(NET1_G),
        "rep": separation_vector(REP_G),
        "g1": separation_vector(G1),
        "g2": separation_vector(G2),
    }
    ndo = codes.network_diversity_order(got["g2"])
    ok = got == {"net1": (2, 2, 1), "rep": (2, 2, 2), "g1": (3, 3, 3), "g2": (3, 2, 2)}
    ok = ok and ndo == Fraction(7, 3)
    elapsed = time.perf_counter() - t0
    report("C1 separation vectors", ok and elapsed < 1.0, f"{got} ndo(G2)={ndo}", t0)


def test_c02_greedy_construction():
    t0 = time.perf_counter()
    G = greedy_construct(CodeSpec(6, 3, 3))
    sv = separation_vector(G)
    rate = Fraction(G.nrows, G.ncols)
    elapsed = time.perf_counter() - t0
    report("C2 greedy (6,3,3)", sv == (3, 3, 3) and rate == Fraction(1, 2) and elapsed < 1.0,
           f"sv={sv} rate={rate}", t0)


def test_c03_map_oracle_equivalence():
    t0 = time.perf_counter()
    code = validate(NET1_G, NET1_V)
    rng = np.random.default_rng(SEED)
    worst = 0.0
    count = 0
    for snr in (0.0, 10.0, 20.0):
        batch = 334 if snr < 20 else 332
        _, y, h, n0, rnd = random_rounds(rng, code, batch, snr)
        post = map_detect(DetectorInput(y, h, n0, code, rnd.p_e))
        for b in range(batch):
            ref = map_oracle(NET1_G, y[b], h[b], n0, rnd.p_e[b])
            worst = max(worst, relative_marginal_error(post.log_p0[b], post.log_p1[b], ref))
            count += 1
    elapsed = time.perf_counter() - t0
    report("C3 MAP vs oracle", count == 1000 and worst < 1e-9 and elapsed < 60,
           f"{count} instances, max rel err {worst:.2e}", t0)


def test_c04_tree_exactness():
    t0 = time.perf_counter()
    code = validate(NET1_G, NET1_V)
    rng = np.random.default_rng(SEED + 1)
    worst = 0.0
    for snr in (0.0, 10.0, 20.0):
        batch = 334 if snr < 20 else 332
        _, y, h, n0, rnd = random_rounds(rng, code, batch, snr)
        inp = DetectorInput(y, h, n0, code, rnd.p_e)
        a, b = sumprod_detect(inp), map_detect(inp)
        err = np.maximum(np.abs(np.expm1(a.log_p0 - b.log_p0)), np.abs(np.expm1(a.log_p1 - b.log_p1)))
        worst = max(worst, float(err.max()))
    report("C4 sum-product tree exactness", worst < 1e-9 and time.perf_counter() - t0 < 60,
           f"1000 instances, max rel err {worst:.2e}", t0)


def sweep(code, detector, snr_db, **kw):
    kw.setdefault("seed", SEED)
    return run_sweep(SweepConfig(code=code, detector=detector, snr_db=tuple(snr_db), **kw))


@pytest.mark.slow
def test_c05_diversity_slopes():
    t0 = time.perf_counter()
    code = validate(NET1_G, NET1_V)
    grid = np.arange(0.0, 25.1, 2.5)
    window = (15.0, 25.0)
    m = estimate_diversity(sweep(code, "map", grid), window)
    nv = estimate_diversity(sweep(code, "naive", grid), window)
    ok = all(1.7 <= s <= 2.3 for s in m[:2]) and 0.8 <= m[2] <= 1.2 and all(s <= 1.3 for s in nv[:2])
    report("C5 diversity slopes", ok, f"map {fmt(m)} naive {fmt(nv)} window {window}", t0)


@pytest.mark.slow
def test_c06_snr_gaps():
    t0 = time.perf_counter()
    code = validate(NET1_G, NET1_V)
    grid = list(range(10, 17)) + list(range(22, 31))
    kw = dict(min_errors=1000, max_trials=10**6)
    gaps = snr_gap(sweep(code, "map", grid, **kw), sweep(code, "genie", grid, **kw), 1e-3)
    ok = all(abs(g - 1.5) <= 0.5 for g in gaps[:2]) and abs(gaps[2] - 2.5) <= 0.7
    report("C6 map vs genie gaps @1e-3", ok, f"gaps {fmt(gaps)} dB (targets 1.5, 1.5, 2.5)", t0)


@pytest.mark.slow
def test_c07_coding_gain():
    t0 = time.perf_counter()
    kw = dict(min_errors=300, max_trials=3 * 10**6)
    code1 = sweep(validate(G1, V1), "map", range(10, 16), **kw)
    rep = sweep(validate(REP_G, REP_V), "map", range(13, 19), **kw)
    gaps = snr_gap(rep, code1, 1e-4)
    ok = all(abs(g - 3.0) <= 0.7 for g in gaps)
    report("C7 (6,3,3) code vs repetition @1e-4", ok, f"gaps {fmt(gaps)} dB (target 3.0)", t0)


@pytest.mark.slow
def test_c08_sumprod_near_optimal():
    t0 = time.perf_counter()
    code = validate(G1, V1)
    kw = dict(min_errors=1000, max_trials=10**6)
    grid = range(6, 13)
    gaps = snr_gap(sweep(code, "sumprod", grid, **kw), sweep(code, "map", grid, **kw), 1e-3)
    report("C8 sum-product vs MAP @1e-3", all(g <= 0.2 for g in gaps), f"gaps {fmt(gaps)} dB (limit 0.2)", t0)


@pytest.mark.slow
def test_c09_closed_form_repetition():
    t0 = time.perf_counter()
    curve = sweep(validate(REP_G, REP_V), "genie", np.arange(0.0, 20.1, 2.5), min_errors=200)
    theory = mrc_rayleigh_ber(curve.snr_db, 2)[:, None]
    dev = np.abs(curve.ber - theory) / curve.ci95
    report("C9 genie repetition vs closed form", bool(np.all(dev <= 3.0)),
           f"max |ber - theory| = {dev.max():.2f} ci95", t0)


def test_c10_worker_invariance(tmp_path):
    t0 = time.perf_counter()
    code = validate(NET1_G, NET1_V)
    cfg = SweepConfig(code=code, detector="map", snr_db=(0.0, 5.0, 10.0), min_errors=200,
                      seed=SEED, chunk_size=2048)
    texts = []
    for workers in (1, 2, 4):
        path = tmp_path / f"w{workers}.csv"
        run_sweep(cfg, workers=workers).to_csv(path)
        texts.append(path.read_bytes())
    report("C10 reproducibility", texts[0] == texts[1] == texts[2], "workers 1/2/4 byte-identical CSVs", t0)
