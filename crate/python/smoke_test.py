#!/usr/bin/env python3
"""Smoke test for the treeim_py extension module.

Builds are produced by cargo (no maturin needed):

    cargo build -p treeim-py --release
    python3 python/smoke_test.py

The script locates the compiled cdylib under target/ and loads it directly.
"""

import importlib.machinery
import importlib.util
import math
import sys
from pathlib import Path


def load_module():
    root = Path(__file__).resolve().parent.parent
    candidates = [
        root / "target" / "release" / "libtreeim_py.so",
        root / "target" / "debug" / "libtreeim_py.so",
    ]
    for path in candidates:
        if path.exists():
            loader = importlib.machinery.ExtensionFileLoader("treeim_py", str(path))
            spec = importlib.util.spec_from_loader("treeim_py", loader)
            module = importlib.util.module_from_spec(spec)
            loader.exec_module(module)
            return module
    sys.exit(
        "libtreeim_py.so not found; run `cargo build -p treeim-py --release` first"
    )


def approx(a, b, tol=1e-9):
    return all(abs(x - y) <= tol for x, y in zip(a, b)) and len(a) == len(b)


def main():
    tm = load_module()
    print(f"loaded treeim_py {tm.__version__}")

    # tree enumeration and bounds
    assert tm.catalan(3) == 5
    assert tm.catalan(0) == 1
    assert tm.catalan(10) == 16796
    assert tm.loose_bound(5) == 16
    assert tm.tight_bounds(9) == [1, 1, 2, 3, 5, 9, 16, 28, 50]
    profiles = {tuple(counts) for counts, _ in tm.reduced_set(3)}
    assert profiles == {(0, 4), (1, 1, 2)}
    trees = dict((tuple(c), t) for c, t in tm.reduced_set(1))
    assert trees[(2,)] == "(..)"

    # feasible set
    assert tm.feasible_class_size(4, 2) == 12
    vectors = tm.feasible_set(4)
    assert len(vectors) == 35
    assert all(abs(sum(v) - 1.0) < 1e-12 for v in vectors)

    # catalog
    catalog = tm.sap_catalog(4, 2)
    assert len(catalog) == 6 and catalog[0] == [1, 2]

    # Huffman and the projection sweep
    assert tm.huffman([0.5, 0.25, 0.125, 0.125]) == [1, 2, 3, 3]
    assert tm.huffman([1.0]) == [0]
    p_relaxed = [0.51, 0.26, 0.18, 0.05]
    assert approx(tm.project(p_relaxed, "euclidean")["winner"], [0.5, 0.25, 0.25, 0.0])
    assert approx(tm.project(p_relaxed, "tv")["winner"], [0.5, 0.25, 0.25, 0.0])
    assert approx(tm.project(p_relaxed, "kl")["winner"], [0.5, 0.25, 0.125, 0.125])
    assert len(tm.project(p_relaxed)["candidates"]) == 4

    # codebook for a dyadic vector
    cb = tm.codebook([0.5, 0.25, 0.125, 0.125])
    codes = dict(cb["entries"])
    assert sorted(len(c) for c in codes.values()) == [1, 2, 3, 3]
    assert cb["dropped"] == []

    # channel helpers
    gains = tm.exp_decay_gains(4, 0.2)
    assert approx(gains, [1.0, 0.2, 0.04, 0.008], 1e-12)
    assert approx(tm.waterfill([1.0, 0.2], 1.0, 2.0), [2.0, 0.0], 1e-9)
    rows = tm.per_sap_powers(4, 2, gains, 10.0)
    assert all(abs(sum(r) - 40.0) < 1e-6 for r in rows)

    # asymptotics: products (2, 1.5) give q = (4/7, 3/7)
    snr_db = 10.0 * math.log10(0.5)
    q = tm.high_snr_probs(2, 1, [1.0, 0.5], snr_db, uniform_power=True)
    assert approx(q, [4.0 / 7.0, 3.0 / 7.0], 1e-9)
    r, i_star = tm.low_snr_probs(4, 2, gains, 0.0)
    assert i_star == 1 and r[0] == 1.0
    mu = tm.upper_bound_mu(4, 2, gains, 10.0)
    bound = tm.jensen_lower_bound(4, 2, gains, 10.0, list(tm.high_snr_probs(4, 2, gains, 10.0)))
    assert bound < mu

    # Monte Carlo mutual information: deterministic, matches the closed
    # form for conventional OFDM (K = N means a single pattern)
    est = tm.mi_monte_carlo(2, 2, [1.0, 0.5], 5.0, [1.0], 20000, seed=7, partitions=2)
    rows = tm.per_sap_powers(2, 2, [1.0, 0.5], 5.0)
    closed = sum(math.log(1.0 + g * p) for g, p in zip([1.0, 0.5], rows[0]))
    assert abs(est["value"] - closed) < 4.0 * est["std_error"]
    again = tm.mi_monte_carlo(2, 2, [1.0, 0.5], 5.0, [1.0], 20000, seed=7, partitions=2)
    assert est == again

    # constrained solvers
    sol = tm.solve_projected(4, 2, gains, 10.0, seed=3, samples=20000, partitions=2)
    assert abs(sum(sol["probs"]) - 1.0) < 1e-12
    assert sol["mi"]["value"] > 0
    en = tm.solve_enumerative(4, 2, gains, 10.0, seed=3, samples=20000, partitions=2)
    assert abs(sum(en["probs"]) - 1.0) < 1e-12

    # Jensen matrix singularity surfaces as ValueError at very low SNR
    try:
        tm.jensen_optimal_probs(4, 2, gains, -20.0)
        raise AssertionError("expected a singular-matrix error")
    except ValueError as e:
        assert "singular" in str(e)

    # BLER sweep: deterministic, monotone over a coarse grid
    curve = tm.bler_curve(
        4, 2, gains, [0.0, 10.0], seed=21, target_errors=300,
        block_cap=200000, objective_samples=2000, partitions=2,
    )
    assert curve[0]["bler"] >= curve[1]["bler"]
    again = tm.bler_curve(
        4, 2, gains, [0.0, 10.0], seed=21, target_errors=300,
        block_cap=200000, objective_samples=2000, partitions=2,
    )
    assert curve == again

    print("smoke test passed")


if __name__ == "__main__":
    main()
