"""Acceptance gate: one PASS/FAIL line per criterion.

Run with ``pytest tests/test_acceptance.py -v``; the lines are repeated in the
terminal summary.  ``python tests/test_acceptance.py`` prints them directly.
"""
import io
import json
import math
import time

import numpy as np
import pytest

from causumx import Params, generate_synthetic, summarize, synthetic_dag, synthetic_query
from causumx.cli import main as cli_main
from causumx.dag import CausalDag
from causumx.effect import Estimator, Skip
from causumx.errors import Infeasible
from causumx.groupmine import dedup_grouping, mine_grouping_patterns, mining_attributes
from causumx.lpsolve import (IlpInstance, build_ilp, round_indices, solve_ilp_exact,
                             solve_lp_relaxation)
from causumx.oracle import (brute_force_candidates, brute_force_summarize, covered_rows,
                            kendall_tau, naive_frequent_patterns, precision_recall, treated_rows)
from causumx.patterns import MaskCache, Pattern, SimplePredicate
from causumx.report import NO_SOLUTION
from causumx.synthgen import write_synthetic
from causumx.tabular import Dataset, QuerySpec, evaluate_query, partition_attributes
from causumx.treatmine import NEG, POS, TreatmentSearch, build_candidates

RESULTS: list[str] = []


def record(n, ok, detail):
    line = f"ACCEPTANCE {n:>2} {'PASS' if ok else 'FAIL'}: {detail}"
    RESULTS.append(line)
    print(line)
    return ok


def _synthetic(n, i, j, seed):
    d = generate_synthetic(n, i, j, seed)
    return d, synthetic_query(), synthetic_dag(j), [f"G{p}" for p in range(1, i + 1)]


def _candidates(d, q, g, params, grouping_attrs):
    view = evaluate_query(d, q)
    masks = MaskCache(d)
    grouping, treatments = partition_attributes(d, q, grouping_attrs)
    pats = mine_grouping_patterns(d, q, grouping, params.tau, masks)
    pats = dedup_grouping(pats, d, q, view, masks)
    search = TreatmentSearch(Estimator(d, q, g, params, masks), treatments)
    return view, masks, search, pats


def test_1_synthetic_ground_truth():
    t0 = time.perf_counter()
    d, q, g, ga = _synthetic(1000, 3, 3, seed=0)
    params = Params(seed=0)
    view, masks, search, pats = _candidates(d, q, g, params, ga)
    checked, wrong, overlap_only = 0, [], True
    for pg in pats:
        for sigma, (odd, even) in ((POS, ("5", "1")), (NEG, ("1", "5"))):
            node = search.get_top_treatment(pg, sigma)
            checked += 1
            if node is None:
                wrong.append((pg.text, sigma, None))
                continue
            preds = node.pattern.predicates
            if any(p.value != (odd if int(p.attr[1:]) % 2 else even) for p in preds):
                wrong.append((pg.text, sigma, node.pattern.text))
                truth = Pattern(SimplePredicate(p.attr, "=", odd if int(p.attr[1:]) % 2 else even)
                                for p in preds)
                overlap_only &= search.est.estimate(pg, truth) == Skip("overlap")
    elapsed = time.perf_counter() - t0
    ok = not wrong and elapsed < 30
    note = f"; mismatched ground-truth cells all fail overlap (min_arm={params.min_arm})" if wrong and overlap_only else ""
    record(1, ok, f"{checked - len(wrong)}/{checked} (pattern, direction) pairs match ground truth, "
                  f"{elapsed:.1f}s (< 30s){note}; mismatches={wrong}")
    assert ok


def test_2_precision_recall_vs_brute_force():
    t0 = time.perf_counter()
    gp, gr, tp, tr = [], [], [], []
    for seed in range(10):
        d, q, g, ga = _synthetic(1000, 3, 3, seed)
        params = Params(seed=seed)
        ours = summarize(d, q, g, params, "causumx", ga)
        brute = summarize(d, q, g, params, "bruteforce", ga)
        p, r = precision_recall(covered_rows(ours.view, np.flatnonzero(ours.covered_mask)),
                                covered_rows(brute.view, np.flatnonzero(brute.covered_mask)))
        gp.append(p)
        gr.append(r)
        # treated tuples on grouping patterns both methods processed
        view, masks, search, pats = _candidates(d, q, g, params, ga)
        mine = {c.pg: c for c in build_candidates(search, pats, view)}
        _, bc = brute_force_candidates(d, q, g, params, ga, view, masks)
        for c in bc:
            if c.pg not in mine:
                continue
            for side in ("pos", "neg"):
                a, b = getattr(mine[c.pg], side), getattr(c, side)
                if a is None or b is None:
                    continue
                p, r = precision_recall(treated_rows(d, view, c.pg, a.pattern, masks),
                                        treated_rows(d, view, c.pg, b.pattern, masks))
                tp.append(p)
                tr.append(r)
    elapsed = time.perf_counter() - t0
    vals = (np.mean(gp), np.mean(gr), np.mean(tp), np.mean(tr))
    ok = vals[0] >= 0.78 and vals[1] >= 0.78 and vals[2] >= 0.75 and vals[3] >= 0.9 and elapsed < 300
    record(2, ok, "grouping P={:.3f} R={:.3f} (>= 0.78), treated P={:.3f} (>= 0.75) R={:.3f} (>= 0.9) "
                  "over {} pairs, {:.1f}s (< 300s)".format(*vals, len(tp), elapsed))
    assert ok


def test_3_cate_analytic():
    d, q, g, _ = _synthetic(10_000, 0, 2, seed=0)
    est = Estimator(d, q, g, Params())
    a = est.estimate(Pattern(), Pattern.of(("T1", "=", "5")))
    b = est.estimate(Pattern(), Pattern.of(("T1", "=", "5"), ("T2", "=", "1")))
    # treated mean 4; control mean -(1/25 * 4)/(24/25) = -1/6
    closed = 4 + 1 / 6
    ok_a = abs(a.cate - 2.5) <= 0.15
    ok_b = abs(b.cate - closed) <= 3 * b.std_error
    record(3, ok_a and ok_b, f"CATE(T1=5)={a.cate:.4f} (2.5 +/- 0.15); CATE(T1=5,T2=1)={b.cate:.4f} "
                             f"vs {closed:.4f}, |diff|={abs(b.cate - closed):.4f} <= 3*SE={3 * b.std_error:.4f}")
    assert ok_a and ok_b


def test_4_confounder_adjustment():
    rng = np.random.default_rng(0)
    n = 5000
    z = rng.integers(0, 3, n)
    t = (rng.random(n) < np.array([0.2, 0.5, 0.8])[z]).astype(int)
    y = 2 * t + 3 * z + rng.normal(size=n)
    d = Dataset.from_columns({"Z": [str(v) for v in z], "T": [str(v) for v in t], "Y": list(y)},
                             {"Z": "categorical", "T": "categorical"})
    q = QuerySpec(("Z",), "Y")
    pt = Pattern.of(("T", "=", "1"))
    adj = Estimator(d, q, CausalDag([], [("Z", "T"), ("Z", "Y"), ("T", "Y")]), Params()).estimate(Pattern(), pt)
    raw = Estimator(d, q, CausalDag(["Z"], [("T", "Y")]), Params()).estimate(Pattern(), pt)
    ok = abs(adj.cate - 2) <= 3 * adj.std_error and abs(raw.cate - 2) > 5 * raw.std_error
    record(4, ok, f"adjusted {adj.cate:.3f} (|d|={abs(adj.cate - 2):.3f} <= 3sigma={3 * adj.std_error:.3f}); "
                  f"unadjusted {raw.cate:.3f} (|d|={abs(raw.cate - 2):.3f} > 5sigma={5 * raw.std_error:.3f})")
    assert ok


def test_5_apriori_oracle():
    t0 = time.perf_counter()
    rng = np.random.default_rng(0)
    mismatches = 0
    for _ in range(100):
        n_attrs, n = int(rng.integers(1, 9)), int(rng.integers(1, 201))
        cols = {f"a{i}": [f"v{v}" for v in rng.integers(0, int(rng.integers(1, 4)), n)] for i in range(n_attrs)}
        cols["g"] = [f"r{i}" for i in range(n)]
        cols["y"] = list(rng.normal(size=n))
        d = Dataset.from_columns(cols, {a: "categorical" for a in cols if a != "y"})
        q = QuerySpec(("g",), "y")
        tau = float(rng.random() * 0.5)
        grouping, _ = partition_attributes(d, q)
        mined = set(mine_grouping_patterns(d, q, grouping, tau))
        mismatches += mined != naive_frequent_patterns(d, mining_attributes(grouping, q), tau)
    elapsed = time.perf_counter() - t0
    ok = mismatches == 0 and elapsed < 60
    record(5, ok, f"{100 - mismatches}/100 random tables match the naive enumeration, {elapsed:.1f}s (< 60s)")
    assert ok


def test_6_rounding_guarantees():
    rng = np.random.default_rng(0)
    trials, failures, instances = 10_000, [], 0
    while instances < 20:
        m, l, k = int(rng.integers(3, 10)), int(rng.integers(2, 9)), int(rng.integers(1, 4))
        cov = rng.random((l, m)) < 0.35
        ilp = IlpInstance(m, rng.random(l) * 10, cov, k, float(rng.choice([0.5, 0.75])))
        try:
            opt = ilp.weight_of(solve_ilp_exact(ilp))
        except Infeasible:
            continue
        instances += 1
        frac = solve_lp_relaxation(ilp)
        draw_rng = np.random.default_rng(instances)
        cover = np.empty(trials)
        weight = np.empty(trials)
        over_k = 0
        for s in range(trials):
            pick = round_indices(frac.g, k, draw_rng)
            over_k += len(pick) > k
            cover[s] = ilp.covered_count(pick)
            weight[s] = ilp.weight_of(pick)
        se_c = cover.std(ddof=1) / math.sqrt(trials)
        se_w = weight.std(ddof=1) / math.sqrt(trials)
        checks = {
            # 1e-9 relative slack absorbs float summation when a draw is deterministic
            "coverage": cover.mean() >= (1 - 1 / math.e) * ilp.required - 3 * se_c - 1e-9 * m,
            "weight": weight.mean() >= opt / k - 3 * se_w - 1e-9 * max(opt, 1.0),
            "size": over_k == 0,
            "lp>=ilp": frac.objective >= opt - 1e-7,
        }
        failures += [(instances, name) for name, good in checks.items() if not good]
    ok = not failures
    record(6, ok, f"20 feasible instances x {trials} trials: coverage, weight, |sel|<=k and LP>=ILP checks; "
                  f"failures={failures}")
    assert ok


def test_7_sampling_sensitivity():
    j = 6
    d, q, g, _ = _synthetic(200_000, 0, j, seed=0)
    full = Estimator(d, q, g, Params())
    sampled = Estimator(d, q, g, Params(sample_size=20_000))
    rng = np.random.default_rng(0)
    names = [f"T{i}" for i in range(1, j + 1)]
    chosen, f_vals, s_vals, close = [], [], [], 0
    while len(chosen) < 20:
        attrs = sorted(rng.choice(names, int(rng.integers(1, 4)), replace=False))
        pt = Pattern(SimplePredicate(a, "=", str(rng.integers(1, 6))) for a in attrs)
        if pt in chosen:
            continue
        a = full.estimate(Pattern(), pt)
        if isinstance(a, Skip) or abs(a.cate) < 0.5:
            continue  # relative error is meaningless near zero
        b = sampled.estimate(Pattern(), pt)
        chosen.append(pt)
        f_vals.append(a.cate)
        s_vals.append(b.cate)
        close += abs(b.cate - a.cate) / abs(a.cate) <= 0.10
    rank_f = [p.text for _, p in sorted(zip(f_vals, chosen), key=lambda x: x[0])]
    rank_s = [p.text for _, p in sorted(zip(s_vals, chosen), key=lambda x: x[0])]
    tau = kendall_tau(rank_f, rank_s)
    ok = close >= 18 and tau >= 0.9
    record(7, ok, f"{close}/20 treatments within 10% (>= 18), Kendall tau={tau:.3f} (>= 0.9)")
    assert ok


def test_8_determinism_across_threads(tmp_path):
    data, dag = write_synthetic(tmp_path, 1000, 3, 3, seed=0)
    base = ["run", "--data", data, "--dag", dag, "--group-by", "G", "--avg", "O", "--output", "json",
            "--grouping-attrs", "G1,G2,G3", "--categorical", "T1,T2,T3", "--seed", "7"]
    outs = []
    for threads in ("1", "8"):
        buf = io.StringIO()
        assert cli_main(base + ["--threads", threads], stdout=buf, stderr=io.StringIO()) == 0
        outs.append(buf.getvalue())
    ok = outs[0] == outs[1] and json.loads(outs[0])["explanations"]
    record(8, bool(ok), f"threads=1 vs threads=8 structured output byte-identical: {outs[0] == outs[1]} "
                        f"({len(outs[0])} bytes)")
    assert ok


def test_9_feasibility_semantics():
    d, q, g, ga = _synthetic(1000, 1, 2, seed=0)
    params = Params(k=1, theta=0.75)
    ours = summarize(d, q, g, params, "causumx", ga)
    brute = brute_force_summarize(d, q, g, params, ga)
    view, cands = brute_force_candidates(d, q, g, params, ga)
    try:
        solve_ilp_exact(build_ilp(cands, view, params.k, params.theta))
        exact_infeasible = False
    except Infeasible:
        exact_infeasible = True
    ok = ours.status == NO_SOLUTION and not ours.selected and brute.status == NO_SOLUTION and exact_infeasible
    record(9, ok, f"k=1, theta=0.75 with two half-covering patterns: causumx={ours.status}, "
                  f"brute force={brute.status}, exact ILP infeasible={exact_infeasible}")
    assert ok


def test_10_scale_smoke():
    t0 = time.perf_counter()
    d, q, g, ga = _synthetic(100_000, 3, 6, seed=0)
    r = summarize(d, q, g, Params(), "causumx", ga)
    elapsed = time.perf_counter() - t0
    ok = elapsed < 120 and r.size_ok
    record(10, ok, f"100k rows, i=3, j=6: status={r.status}, {len(r.selected)} explanations, "
                   f"coverage={r.coverage_fraction:.2f}, {elapsed:.1f}s (< 120s)")
    assert ok


if __name__ == "__main__":
    import inspect
    import sys
    import tempfile

    for name, fn in sorted(inspect.getmembers(sys.modules[__name__], inspect.isfunction),
                           key=lambda kv: int(kv[0].split("_")[1]) if kv[0].startswith("test_") else 0):
        if not name.startswith("test_"):
            continue
        try:
            if "tmp_path" in inspect.signature(fn).parameters:
                import pathlib
                with tempfile.TemporaryDirectory() as tmp:
                    fn(pathlib.Path(tmp))
            else:
                fn()
        except AssertionError:
            pass
