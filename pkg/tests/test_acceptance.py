"""End-to-end acceptance checks.

One test per criterion; each prints a single PASS/FAIL line (visible
with ``pytest -s`` or in captured output).  Run the whole gate with:

    pytest tests/test_acceptance.py -v -s
"""

import json
import math
import random
import time
from pathlib import Path

import numpy as np
import pytest

from socioscope import cli
from socioscope import embeddings as emb
from socioscope import hawkes as hk
from socioscope import memes
from socioscope import semgraph as sg
from socioscope import trends
from socioscope.synth import generate

from oracles import (
    bfs_ego_nodes,
    brute_force_ks,
    dp_segment_fast,
    naive_dbscan,
    same_partition,
)
from test_memes import brightness, jpeg_reencode, noise_image, smooth_image, ih
from test_semgraph import graph_from_edges, two_cliques
from test_embeddings import make_model


def report(num, name, passed, detail=""):
    status = "PASS" if passed else "FAIL"
    print(f"ACCEPTANCE C{num:02d} {name}: {status}" + (f" ({detail})" if detail else ""))
    assert passed, f"criterion {num} failed: {detail}"


def piecewise_series(rng, n):
    nseg = rng.integers(1, 6)
    cuts = sorted(rng.choice(np.arange(4, n - 3), size=min(nseg - 1, max(n - 8, 0)),
                             replace=False).tolist()) if nseg > 1 and n > 8 else []
    bounds = [0] + cuts + [n]
    parts = []
    for lo, hi in zip(bounds[:-1], bounds[1:]):
        mu = rng.uniform(-3, 3)
        sd = rng.uniform(0.3, 3.0)
        parts.append(rng.normal(mu, sd, hi - lo))
    return np.concatenate(parts)


def test_c01_pelt_oracle_equivalence():
    started = time.monotonic()
    rng = np.random.default_rng(1001)
    exact = 0
    trials = 500
    for _ in range(trials):
        n = int(rng.integers(8, 201))
        x = piecewise_series(rng, n)
        pen = float(rng.choice([1.0, 3.0, 10.0])) * math.log(n)
        got = trends.pelt_segment(x, pen)
        want_cps, want_cost = dp_segment_fast(x, pen)
        if list(got.indices) == want_cps and math.isclose(
            got.total_cost, want_cost, rel_tol=1e-9, abs_tol=1e-9
        ):
            exact += 1
    elapsed = time.monotonic() - started
    report(
        1, "pelt-oracle-equivalence",
        exact == trials and elapsed < 60.0,
        f"{exact}/{trials} exact, {elapsed:.1f}s",
    )


def test_c02_changepoint_recovery():
    hits = 0
    penalty = 3 * math.log(200)
    for seed in range(100):
        rng = np.random.default_rng(2000 + seed)
        x = np.concatenate([rng.normal(0, 1, 100), rng.normal(3, 1, 100)])
        got = trends.pelt_segment(x, penalty)
        if any(abs(i - 100) <= 2 for i in got.indices):
            hits += 1
    report(2, "changepoint-recovery", hits >= 95, f"{hits}/100 within +-2")


def test_c03_penalty_sweep_ranking():
    wins = 0
    for seed in range(100):
        rng = np.random.default_rng(3000 + seed)
        x = np.concatenate([
            rng.normal(0, 1, 70),
            rng.normal(5, 1, 70),   # large shift at 70 (5 sigma)
            rng.normal(6, 1, 60),   # small shift at 140 (1 sigma)
        ])
        out = trends.rank_changepoints(x, trends.default_penalty_schedule(len(x)))
        ranked = out.ranked()
        large = next((r for r, (i, _) in enumerate(ranked) if abs(i - 70) <= 3), None)
        small = next((r for r, (i, _) in enumerate(ranked) if abs(i - 140) <= 3), None)
        if large is not None and (small is None or large < small):
            wins += 1
    report(3, "penalty-sweep-ranking", wins >= 95, f"{wins}/100 large outranks small")


def test_c04_embedding_separation(tmp_path):
    started = time.monotonic()
    rng = random.Random(4)
    topic_a = [f"reda{i}" for i in range(120)]
    topic_b = [f"blub{i}" for i in range(120)]
    records = []
    total_tokens = 0
    i = 0
    while total_tokens < 200_000:
        pool = topic_a if i % 2 == 0 else topic_b
        k = rng.randrange(10, 18)
        records.append({
            "id": str(i), "community": "c", "ts": 1500000000 + i,
            "text": " ".join(rng.choices(pool, k=k)),
        })
        total_tokens += k
        i += 1
    path = tmp_path / "planted.jsonl"
    with open(path, "w") as f:
        for rec in records:
            f.write(json.dumps(rec) + "\n")
    from socioscope import corpus as cpm
    handle = cpm.ingest_posts(path)
    model = emb.train_cbow(
        handle, emb.CbowConfig(dim=64, epochs=3, min_count=5, seed=4)
    )

    normed = model.normalized_inputs()
    ia = [model.index[t] for t in topic_a if t in model.index]
    ib = [model.index[t] for t in topic_b if t in model.index]
    sa = normed[ia] @ normed[ia].T
    sb = normed[ib] @ normed[ib].T
    cross = normed[ia] @ normed[ib].T
    within = 0.5 * (
        (sa.sum() - len(ia)) / (len(ia) ** 2 - len(ia))
        + (sb.sum() - len(ib)) / (len(ib) ** 2 - len(ib))
    )
    margin = float(within - cross.mean())

    rng2 = np.random.default_rng(44)
    sums_ok = True
    for _ in range(100):
        ctx = [model.tokens[j] for j in rng2.integers(0, len(model), size=3)]
        probs = emb.predict_context(model, ctx, len(model))
        if abs(sum(p for _, p in probs) - 1.0) > 1e-6:
            sums_ok = False
            break
    elapsed = time.monotonic() - started
    report(
        4, "embedding-separation",
        margin >= 0.2 and sums_ok and elapsed < 300.0,
        f"{total_tokens} tokens, margin {margin:.3f}, softmax sums ok={sums_ok}, "
        f"{elapsed:.1f}s",
    )


def test_c05_graph_calibration():
    rng = np.random.default_rng(5)
    model = make_model(rng.normal(size=(2000, 32)))
    est = emb.threshold_for_fraction(model, 0.002, sample_pairs=500_000, seed=5)
    normed = model.normalized_inputs()
    sims = normed @ normed.T
    iu = np.triu_indices(2000, k=1)
    realized = float((sims[iu] >= est.threshold).mean())
    rel_err = abs(realized - 0.002) / 0.002
    report(
        5, "graph-calibration", rel_err <= 0.10,
        f"threshold {est.threshold:.4f}, realized {realized:.5f} "
        f"(rel err {rel_err:.1%})",
    )


def test_c06_community_recovery_and_ego_oracle():
    graph, a_nodes, b_nodes = two_cliques()
    clique_wins = 0
    for seed in range(100):
        part = sg.detect_communities(graph, seed=seed)
        if (
            len(set(part.values())) == 2
            and len({part[u] for u in a_nodes}) == 1
            and len({part[u] for u in b_nodes}) == 1
        ):
            clique_wins += 1

    rng = random.Random(6)
    ego_ok = 0
    for _ in range(200):
        n = rng.randrange(5, 80)
        names = [f"n{i}" for i in range(n)]
        edges = []
        for i in range(n):
            for j in range(i + 1, n):
                if rng.random() < 2.5 / n:
                    edges.append((names[i], names[j], rng.uniform(0.5, 1.0)))
        g = graph_from_edges(edges, extra_nodes=names)
        seed_node = rng.choice(names)
        hops = rng.choice([1, 2, 3])
        ego = sg.ego_network(g, seed_node, hops)
        adj = {u: set() for u in names}
        for u, v, _ in edges:
            adj[u].add(v)
            adj[v].add(u)
        want_nodes = bfs_ego_nodes(adj, seed_node, hops)
        want_edges = {k for k in g.edges if k[0] in want_nodes and k[1] in want_nodes}
        if set(ego.nodes) == want_nodes and set(ego.edges) == want_edges:
            ego_ok += 1

    report(
        6, "community-recovery-and-ego",
        clique_wins == 100 and ego_ok == 200,
        f"cliques {clique_wins}/100, ego {ego_ok}/200",
    )


def test_c07_phash_robustness():
    stable = 0
    fixtures = 50
    for seed in range(fixtures):
        img = smooth_image(seed)
        h0 = memes.phash(img)
        ok = memes.hamming(h0, memes.phash(jpeg_reencode(img, 80))) <= 10
        ok = ok and memes.hamming(h0, memes.phash(brightness(img, 1.1))) <= 10
        ok = ok and memes.hamming(h0, memes.phash(brightness(img, 0.9))) <= 10
        if ok:
            stable += 1

    hashes = [memes.phash(noise_image(1000 + s)) for s in range(300)]
    rng = random.Random(7)
    pairs = set()
    while len(pairs) < 1000:
        i, j = rng.sample(range(300), 2)
        pairs.add((min(i, j), max(i, j)))
    far = sum(1 for i, j in pairs if memes.hamming(hashes[i], hashes[j]) >= 20)

    report(
        7, "phash-robustness",
        stable == fixtures and far >= 990,
        f"stable {stable}/{fixtures}, distant {far}/1000",
    )


def test_c08_dbscan_oracle_equivalence():
    rng = random.Random(8)
    exact = 0
    trials = 100
    for _ in range(trials):
        n = rng.randrange(10, 501)
        n_clusters = rng.randrange(1, 7)
        values = []
        for _ in range(n_clusters):
            center = rng.getrandbits(64)
            for _ in range(rng.randrange(2, max(3, n // n_clusters))):
                v = center
                for _ in range(rng.randrange(0, 6)):
                    v ^= 1 << rng.randrange(64)
                values.append(v)
        while len(values) < n:
            values.append(rng.getrandbits(64))
        rng.shuffle(values)
        values = values[:n]

        eps = rng.randrange(3, 13)
        min_pts = rng.randrange(2, 7)
        hashes = [ih(v, ref=f"i{k}") for k, v in enumerate(values)]
        got = memes.labels_for(hashes, memes.cluster_hashes(hashes, eps, min_pts))
        want = naive_dbscan(values, eps, min_pts)
        if same_partition(got, want):
            exact += 1
    report(8, "dbscan-oracle-equivalence", exact == trials, f"{exact}/{trials} exact")


def test_c09_hawkes_recovery():
    kern = hk.ExponentialKernel(tau=1.0, t_max=3.0)
    truth = np.array([[0.0, 0.5], [0.0, 0.0]])
    model = hk.HawkesModel(np.array([0.2, 0.2]), truth, kernel=kern)
    good = 0
    conservation_ok = True
    max_fit_time = 0.0
    n_events = []
    for seed in range(10):
        log = hk.simulate(model, (0.0, 4000.0), seed=seed)
        n_events.append(len(log))
        t0 = time.monotonic()
        fit = hk.fit_gibbs(
            log, hk.FitConfig(draws=1200, burn_in=400, kernel=kern, seed=seed)
        )
        max_fit_time = max(max_fit_time, time.monotonic() - t0)
        if np.abs(fit.w_mean - truth).max() <= 0.15:
            good += 1
        n_by = log.counts()
        for s in range(fit.origin_counts.shape[0]):
            attributed = fit.origin_counts[s].sum(axis=0) + fit.background_counts[s]
            if not (attributed == n_by).all():
                conservation_ok = False
    report(
        9, "hawkes-recovery",
        good >= 9 and conservation_ok and max_fit_time < 300.0,
        f"{good}/10 seeds within +-0.15, ~{int(np.mean(n_events))} events/fit, "
        f"conservation={conservation_ok}, max fit {max_fit_time:.1f}s",
    )


def test_c10_ks_exactness_and_planted_difference():
    rng = random.Random(10)
    ks_exact = 0
    ks_trials = 200
    for trial in range(ks_trials):
        n1 = rng.randrange(5, 201)
        n2 = rng.randrange(5, 201)
        if trial % 3 == 0:
            a = [float(rng.randrange(0, 12)) for _ in range(n1)]
            b = [float(rng.randrange(0, 12)) for _ in range(n2)]
        else:
            a = [rng.gauss(0, 1) for _ in range(n1)]
            b = [rng.gauss(0.4, 1.3) for _ in range(n2)]
        d, _ = hk.ks_test(a, b)
        if d == brute_force_ks(a, b):
            ks_exact += 1

    d0, p0 = hk.ks_test([1.0, 2.0, 3.0, 4.0, 5.0], [1.0, 2.0, 3.0, 4.0, 5.0])
    identical_ok = d0 == 0.0 and p0 == 1.0

    kern = hk.ExponentialKernel(tau=1.0, t_max=3.0)

    def fit_population(w01, n_fits, seed0):
        fits = []
        for i in range(n_fits):
            m = hk.HawkesModel(
                np.array([0.8, 0.5]), np.array([[0.0, w01], [0.0, 0.0]]), kernel=kern
            )
            log = hk.simulate(m, (0.0, 80.0), seed=seed0 + i)
            fits.append(hk.fit_gibbs(
                log, hk.FitConfig(draws=120, burn_in=40, kernel=kern, seed=seed0 + i)
            ))
        return fits

    detected = 0
    experiments = 100
    for e in range(experiments):
        lo = fit_population(0.1, 20, seed0=e * 1000)
        hi = fit_population(0.6, 20, seed0=e * 1000 + 500)
        _, p, sig = hk.compare_influence(lo, hi, (0, 1))
        if sig:
            detected += 1

    report(
        10, "ks-exactness-and-planted-difference",
        ks_exact == ks_trials and identical_ok and detected >= 95,
        f"brute-force {ks_exact}/{ks_trials}, identical D/p ok={identical_ok}, "
        f"detected {detected}/{experiments}",
    )


def test_c11_pipeline_determinism(tmp_path):
    started = time.monotonic()
    data = tmp_path / "data"
    info = generate(data, posts=10_000, days=120, seed=7)

    outs = []
    for name in ("run1", "run2"):
        out = tmp_path / name
        cfg = {
            "inputs": [info["corpus"]],
            "image_dir": info["image_dir"],
            "terms": ["signal", "border", "server"],
            "embedding": {"dim": 48, "epochs": 3, "min_count": 5},
            "graph": {"edge_fraction": 0.002, "sample_pairs": 100_000,
                      "ego_seeds": ["signal"]},
            "memes": {"reference": info["reference"]},
            "hawkes": {"draws": 400, "burn_in": 150, "min_events": 25},
            "out_dir": str(out),
            "seed": 7,
        }
        cfg_path = tmp_path / f"{name}.json"
        cfg_path.write_text(json.dumps(cfg))
        code = cli.main(["run", "--config", str(cfg_path), "--deterministic",
                         "--seed", "7", "-q"])
        assert code == 0
        outs.append(out)

    files1 = sorted(p.relative_to(outs[0]) for p in outs[0].rglob("*") if p.is_file())
    files2 = sorted(p.relative_to(outs[1]) for p in outs[1].rglob("*") if p.is_file())
    identical = files1 == files2
    differing = []
    if identical:
        for rel in files1:
            a, b = outs[0] / rel, outs[1] / rel
            if rel.name == "manifest.json":
                ma = json.loads(a.read_text())
                mb = json.loads(b.read_text())
                ma.pop("timings", None)
                mb.pop("timings", None)
                if json.dumps(ma, sort_keys=True) != json.dumps(mb, sort_keys=True):
                    differing.append(str(rel))
            elif a.read_bytes() != b.read_bytes():
                differing.append(str(rel))
    elapsed = time.monotonic() - started
    report(
        11, "pipeline-determinism",
        identical and not differing and elapsed < 600.0,
        f"{len(files1)} artifacts, differing={differing[:3]}, {elapsed:.1f}s",
    )


def test_c12_trivial_contracts():
    # constant normalized series
    n = 60
    days = tuple(
        __import__("datetime").date(2017, 1, 1) + __import__("datetime").timedelta(days=i)
        for i in range(n)
    )
    totals = np.full(n, 10, dtype=np.int64)
    counts = np.full(n, 2, dtype=np.int64)
    series = trends.TermSeries("t", "c", days, counts, totals, counts / totals)
    ratio = trends.increase_ratio(series, 14)
    cset = trends.rank_changepoints(
        series.fraction, trends.default_penalty_schedule(n)
    )
    series_ok = ratio == 1.0 and cset.indices == ()

    # no excitation: everything attributed to background
    model = hk.HawkesModel(np.array([0.5, 0.5]), np.zeros((2, 2)))
    log = hk.simulate(model, (0.0, 400.0), seed=12)
    fit = hk.fit_gibbs(
        log, hk.FitConfig(draws=200, burn_in=50, fix_w_zero=True, seed=12)
    )
    dest = hk.attribution_matrix(fit, log, "dest_percent")
    hawkes_ok = (
        np.all(dest.matrix == 0.0)
        and np.all(dest.background_percent == 100.0)
    )
    report(
        12, "trivial-contracts", series_ok and hawkes_ok,
        f"ratio={ratio}, cps={len(cset.indices)}, background 100%={hawkes_ok}",
    )
