"""End-to-end acceptance checks.  Each test is one criterion; conftest prints
a PASS/FAIL line per criterion with the measured numbers."""

import math
from itertools import product

import numpy as np
import pytest

from aircomp.bp import DecoderState, box_plus, decode, hard_decision, probs_from_llrv
from aircomp.channel import sigma_from_snr
from aircomp.cli import main
from aircomp.codec import unpack_block
from aircomp.demod import codeword_llrs
from aircomp.field import is_prime
from aircomp.ldpc import Encoder
from aircomp.lattice import LatticeConfig, map_point, mod1, segment
from aircomp.sim import JointMapOracle, SimConfig, build_link, fixture_path, recovered_sums, run_sweep, run_trial

TREE = "alist:" + str(fixture_path("tree7.alist"))
INF = float("inf")


def wilson(k, n, z=1.96):
    p = k / n
    d = 1 + z * z / n
    c = (p + z * z / (2 * n)) / d
    h = z * math.sqrt(p * (1 - p) / n + z * z / (4 * n * n)) / d
    return max(0.0, c - h), min(1.0, c + h)


def overlap(a, b):
    (la, ha), (lb, hb) = wilson(a.block_errors, a.trials), wilson(b.block_errors, b.trials)
    return la <= hb and lb <= ha


def separated_below(a, b):
    """a lower than b with 95% confidence: a's interval wholly under b's."""
    return wilson(a.block_errors, a.trials)[1] < wilson(b.block_errors, b.trials)[0]


def sweep(trials=2000, **kw):
    return run_sweep(SimConfig(trials=trials, max_block_errors=None, **kw))


def fmt(recs):
    return " ".join(f"{r.snr_db:g}dB/{r.theta:g}:{r.bler:.4f}" for r in recs)


def test_criterion_01_noiseless_pipeline_identity(record_property):
    bad = []
    for p, K, D in product((2, 3), (2, 3, 4), (1, 2)):
        cfg = SimConfig(p=p, K=K, D=D, snr_db=(INF,), theta_max=(0.0,))
        for t in range(100):
            out = run_trial(cfg, t)
            truth = [sum(v) for v in zip(*(unpack_block(out.info[k], p, cfg.l) for k in range(K)))]
            if not (out.block_correct and recovered_sums(cfg, out.estimate) == truth):
                bad.append((p, K, D, t))
    record_property("detail", f"{12 * 100 - len(bad)}/1200 trials exact")
    assert not bad


def test_criterion_02_lattice_linearity(record_property):
    worst = 0.0
    for D, K in product((1, 2), range(1, 5)):
        cfg = LatticeConfig(D, 3)
        labels = cfg.labels()
        u = labels[np.array(list(product(range(len(labels)), repeat=K)))]
        diff = mod1(map_point(u, cfg).sum(axis=1)) - map_point(u.sum(axis=1) % 3, cfg)
        worst = max(worst, float(np.abs(diff).max()))
    cfg = LatticeConfig(2, 3)
    book = cfg.codebook()
    sums = (book[:, None] + book[None, :]).reshape(-1, 2)
    n_book = len({tuple(x) for x in book.round(12)})
    n_sum = len({tuple(x) for x in sums.round(12)})
    folded = {tuple(x) for x in mod1(sums).round(12)}
    record_property("detail", f"max err {worst:.1e}; {n_book} codes, {n_sum} sums, {len(folded)} folded")
    assert worst < 1e-12
    assert (n_book, n_sum) == (9, 25) and folded == {tuple(x) for x in book.round(12)}


def test_criterion_03_box_plus_oracle(record_property):
    worst = 0.0
    for q in (3, 5, 7):
        rng = np.random.default_rng(q)
        for _ in range(1000):
            L1, L2 = rng.uniform(-12, 12, (2, q - 1))
            a1, a2 = (int(a) for a in rng.integers(1, q, 2))
            P1, P2 = probs_from_llrv(L1), probs_from_llrv(L2)
            ref = np.zeros(q)
            for x, y in product(range(q), repeat=2):
                ref[(a1 * x + a2 * y) % q] += P1[x] * P2[y]
            got = probs_from_llrv(box_plus(L1, L2, a1, a2))
            worst = max(worst, float(np.max(np.abs(got - ref) / ref)))
    record_property("detail", f"max relative error {worst:.1e}")
    assert worst <= 1e-9


def test_criterion_04_tree_exact_map(record_property):
    cfg = SimConfig(code=TREE, l=2, K=2, p=2)
    link = build_link(cfg)
    H, q = link.H, link.q
    cws_all = link.encoder.encode_array(np.array(list(product(range(q), repeat=H.B))))
    rng = np.random.default_rng(44)
    agree = 0
    n = 1000
    for t in range(n):
        snr = rng.uniform(2, 10)
        sigma = sigma_from_snr(snr, 2, q)
        info = rng.integers(0, 2, (2, H.B))
        x = map_point(segment(link.encoder.encode_array(info), 1), link.lattice).sum(axis=0)
        y = x + sigma * rng.standard_normal(x.shape)
        L = codeword_llrs(y, link.profile, sigma, link.lattice)
        res = decode(DecoderState(H, L, max_iterations=20), early_stop=False)
        full = np.concatenate([np.zeros((H.N, 1)), L], axis=1)
        logw = full[np.arange(H.N), cws_all].sum(axis=1)
        w = np.exp(logw - logw.max())
        marg = np.zeros((H.N, q))
        for k in range(H.N):
            np.add.at(marg[k], cws_all[:, k], w)
        agree += np.array_equal(hard_decision(res.posterior), marg.argmax(axis=1))
    record_property("detail", f"{agree}/{n} realizations agree")
    assert agree == n


def test_criterion_05_coding_gain(record_property):
    kw = dict(p=2, K=2, D=1, snr_db=(12,), trials=10_000)
    uncoded = sweep(mode="uncoded", **kw)[0]
    coded = sweep(mode="coded", **kw)[0]
    record_property("detail", f"12 dB uncoded {uncoded.bler:.4f} coded {coded.bler:.4f} (10^4 trials)")
    assert 0.3 <= uncoded.bler <= 0.9
    assert separated_below(coded, uncoded)


def test_criterion_06_field_size_ordering(record_property):
    q3 = sweep(p=2, K=2, snr_db=(7,))[0]
    q5 = sweep(p=2, K=2, q=5, snr_db=(7,))[0]
    ordered = separated_below(q3, q5)
    snrs = (8, 9, 10, 11)
    p3 = sweep(p=3, K=2, snr_db=snrs)
    k3 = _k3_curve(snrs)
    tracks = [overlap(a, b) for a, b in zip(p3, k3)]
    record_property(
        "detail",
        f"7 dB q=3 {q3.bler:.4f} vs q=5 {q5.bler:.4f}; p=3 {fmt(p3)} vs K=3 {fmt(k3)}; overlap {tracks}",
    )
    assert ordered
    assert all(tracks)


_K3 = {}


def _k3_curve(snrs):
    if snrs not in _K3:
        _K3[snrs] = sweep(p=2, K=3, snr_db=snrs)
    return _K3[snrs]


def test_criterion_07_k3_k4_similar(record_property):
    snrs = (8, 9, 10, 11)
    k3 = _k3_curve(snrs)
    k4 = sweep(p=2, K=4, snr_db=snrs)
    tracks = [overlap(a, b) for a, b in zip(k3, k4)]
    record_property("detail", f"K=3 {fmt(k3)}; K=4 {fmt(k4)}; overlap {tracks}")
    assert all(tracks)


def test_criterion_08_phase_degradation(record_property):
    snrs, thetas = (8, 10, 12), (0.0, 0.1, 0.2, 0.3)
    recs = sweep(p=2, K=2, D=2, snr_db=snrs, theta_max=thetas)
    grid = {(r.snr_db, r.theta): r for r in recs}
    # non-decreasing in theta: no step down that is significant at 95%
    mono = all(
        grid[s, a].bler <= grid[s, b].bler or overlap(grid[s, a], grid[s, b])
        for s in snrs
        for a, b in zip(thetas, thetas[1:])
    )
    best = all(grid[snrs[-1], t].bler <= min(grid[s, t].bler for s in snrs) for t in thetas)
    record_property("detail", fmt(recs))
    assert mono and best


def test_criterion_09_complexity_table(capsys, record_property):
    assert main(["complexity", "--p", "2", "--k", "1-7"]) == 0
    rows = [tuple(int(x) for x in line.split(",")) for line in capsys.readouterr().out.splitlines()[1:]]
    expected = [(2, K, next(r for r in range(K + 1, 100) if is_prime(r)), 2**K) for K in range(1, 8)]
    record_property("detail", " ".join(f"K={r[1]}:{r[2]}/{r[3]}" for r in rows))
    assert rows == expected


def test_criterion_10_oracle_consistency(record_property):
    cfg = SimConfig(code=TREE, l=2, K=2, p=2)
    link = build_link(cfg)
    orc = JointMapOracle(link.encoder, 2, 2, link.lattice)
    snr, n = 9.0, 1000
    sigma = sigma_from_snr(snr, 2, link.q)
    rng = np.random.default_rng(10)
    info = rng.integers(0, 2, (n, 2, link.B))
    cws = link.encoder.encode_array(info)
    truth = cws.sum(axis=1) % link.q
    y = map_point(segment(cws, 1), link.lattice).sum(axis=1) + sigma * rng.standard_normal((n, link.H.N, 1))
    bp = link.decoder.decode(codeword_llrs(y, link.profile, sigma, link.lattice)).estimates
    orc_est = np.array([orc.decode(y[t], sigma) for t in range(n)])
    bp_err = int((bp != truth).any(axis=1).sum())
    orc_err = int((orc_est != truth).any(axis=1).sum())
    agree = float((bp == orc_est).all(axis=1).mean())
    record_property("detail", f"{snr:g} dB BP errors {bp_err}/{n}, oracle {orc_err}/{n}, agreement {agree:.3f}")
    assert bp_err / n < 0.1
    assert orc_err <= bp_err and agree >= 0.95


def test_criterion_11_determinism(tmp_path, record_property):
    args = ["sweep", "--dim", "2", "--snr-db", "6,9", "--theta", "0,0.2", "--trials", "400",
            "--max-block-errors", "50", "--seed", "17", "--chunk", "64"]
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert main(args + ["--out", str(a)]) == 0
    assert main(args + ["--out", str(b)]) == 0
    record_property("detail", f"{len(a.read_bytes())} bytes, 4 grid points")
    assert a.read_bytes() == b.read_bytes()
