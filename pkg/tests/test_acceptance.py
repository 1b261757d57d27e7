"""End-to-end acceptance checks. Each test records one PASS/FAIL line."""
import json
import math
import subprocess
import sys
import time

import numpy as np
import pytest

from kmsketch.data import write_matrix
from kmsketch.experiment import ExperimentConfig, run_experiment, strip_timings
from kmsketch.ffsvd import fast_frobenius_svd
from kmsketch.kmeans import brute_force_optimum, gamma_approx_kmeans, indicator_from_assignment
from kmsketch.mailman import OpCounter, apply_plan, build_plan, mailman_matmul, universal_matrix
from kmsketch.rng import RngStream, randomized_sampling, sign_matrix

pytestmark = pytest.mark.acceptance


def test_indicator_golden(acceptance_report):
    t0 = time.perf_counter()
    ind = indicator_from_assignment([0, 1, 0, 0, 2, 2], 3)
    X = ind.matrix()
    P = X @ X.T
    a, b = 1 / np.sqrt(3), 1 / np.sqrt(2)
    X_expected = np.array([[a, 0, 0], [0, 1, 0], [a, 0, 0], [a, 0, 0], [0, 0, b], [0, 0, b]])
    P_expected = np.array([
        [1 / 3, 0, 1 / 3, 1 / 3, 0, 0],
        [0, 1, 0, 0, 0, 0],
        [1 / 3, 0, 1 / 3, 1 / 3, 0, 0],
        [1 / 3, 0, 1 / 3, 1 / 3, 0, 0],
        [0, 0, 0, 0, 1 / 2, 1 / 2],
        [0, 0, 0, 0, 1 / 2, 1 / 2],
    ])
    checks = {
        "X": np.allclose(X, X_expected, rtol=0, atol=1e-12),
        "XX^T": np.allclose(P, P_expected, rtol=0, atol=1e-12),
        "X^T X = I": np.allclose(X.T @ X, np.eye(3), rtol=0, atol=1e-12),
        "trace = k": abs(np.trace(P) - 3) <= 1e-10,
        "row 1-norms": np.allclose(np.abs(P).sum(axis=1), 1, rtol=0, atol=1e-10),
        "column 1-norms": np.allclose(np.abs(P).sum(axis=0), 1, rtol=0, atol=1e-10),
        "row supports": np.array_equal(np.count_nonzero(P, axis=1), ind.sizes[ind.assign]),
        "entry sum = n": abs(P.sum() - 6) <= 1e-8,
    }
    elapsed = time.perf_counter() - t0
    failed = [name for name, ok in checks.items() if not ok]
    passed = not failed and elapsed < 1.0
    acceptance_report(1, "indicator golden example", passed,
                      f"{len(checks) - len(failed)}/{len(checks)} checks, {elapsed:.3f}s")
    assert not failed, failed
    assert elapsed < 1.0


def test_oracle_equivalence(acceptance_report):
    t0 = time.perf_counter()
    rng = np.random.default_rng(2024)
    matches = 0
    for t in range(50):
        n = int(rng.integers(4, 11))
        d = int(rng.integers(1, 7))
        k = int(rng.choice([2, 3]))
        A = rng.standard_normal((n, d)) * rng.uniform(0.5, 5.0)
        opt = brute_force_optimum(A, k).cost
        got = gamma_approx_kmeans(A, k, restarts=50, rng=RngStream(2024, t)).cost
        matches += got <= opt * (1 + 1e-8) + 1e-300
    elapsed = time.perf_counter() - t0
    passed = matches >= 48 and elapsed < 30
    acceptance_report(2, "restarted Lloyd vs enumeration", passed,
                      f"{matches}/50 optimal, {elapsed:.1f}s")
    assert matches >= 48
    assert elapsed < 30


def _known_spectrum(n, d, sigma, seed):
    rng = np.random.default_rng(seed)
    U, _ = np.linalg.qr(rng.standard_normal((n, len(sigma))))
    V, _ = np.linalg.qr(rng.standard_normal((d, len(sigma))))
    return (U * sigma) @ V.T


FFSVD_MATRICES = [
    ("diag(5,3,1,0.1) in 8x4", np.vstack([np.diag([5.0, 3.0, 1.0, 0.1]), np.zeros((4, 4))]),
     np.array([5.0, 3.0, 1.0, 0.1])),
    ("power-law 80x60", None, 1 / np.sqrt(np.arange(1.0, 41.0))),
    ("flat tail 60x25", None, np.concatenate([[10.0, 8.0], np.full(18, 1.0)])),
]


def test_ffsvd_expectation(acceptance_report):
    t0 = time.perf_counter()
    k = 2
    worst = 0.0
    details = []
    for idx, (name, A, sigma) in enumerate(FFSVD_MATRICES):
        if A is None:
            n, d = map(int, name.split()[-1].split("x"))
            A = _known_spectrum(n, d, sigma, seed=idx)
        tail = float(np.sum(sigma[k:] ** 2))
        for eps in (0.25, 0.5):
            res = [fast_frobenius_svd(A, k, eps, RngStream(idx, s)).residual_sq for s in range(200)]
            ratio = np.mean(res) / tail
            limit = 1 + eps + 0.15
            worst = max(worst, ratio / limit)
            details.append(f"{name} eps={eps}: {ratio:.4f} <= {limit:.2f}")
    elapsed = time.perf_counter() - t0
    passed = worst <= 1.0 and elapsed < 60
    acceptance_report(3, "randomized SVD expected residual", passed,
                      f"worst mean/bound={worst:.4f}, {elapsed:.1f}s; " + "; ".join(details))
    assert worst <= 1.0
    assert elapsed < 60


MC_SETUP = dict(k=2, eps=0.3, trials=200, n=10, d=32, k_true=2, restarts=10, seed=17,
                data_per_trial=True, oracle="enumeration")


def _run_methods(specs):
    out = {}
    for label, method, extra in specs:
        rep = run_experiment(ExperimentConfig(method=method, **MC_SETUP, **extra))
        out[label] = rep
    return out


def test_selection_bounds(acceptance_report):
    t0 = time.perf_counter()
    # r must stay below d = 32: leverage uses r = 16; sampling uses c1 = 0.05, r = 27
    reps = _run_methods([
        ("leverage", "leverage_select", {"r": 16}),
        ("sampling", "sampling_select", {"c1": 0.05}),
    ])
    elapsed = time.perf_counter() - t0
    need = {"leverage": 0.5, "sampling": 0.2}
    freq = {k: v.aggregate["success_frequency"] for k, v in reps.items()}
    passed = all(freq[k] >= need[k] for k in need) and elapsed < 300
    detail = ", ".join(
        f"{k}: {freq[k]:.3f} >= {need[k]} (r={reps[k].trials[0].r}, mean ratio "
        f"{reps[k].aggregate['mean_ratio']:.3f})" for k in need
    )
    acceptance_report(4, "feature selection bound 1+(2+eps)gamma", passed, f"{detail}, {elapsed:.1f}s")
    for k in need:
        assert freq[k] >= need[k], k
    assert elapsed < 300


def test_extraction_bounds(acceptance_report):
    t0 = time.perf_counter()
    reps = _run_methods([
        ("random_projection", "random_projection", {}),
        ("approx_svd", "approx_svd", {}),
    ])
    elapsed = time.perf_counter() - t0
    freq = {k: v.aggregate["success_frequency"] for k, v in reps.items()}
    passed = all(f >= 0.9 for f in freq.values()) and elapsed < 300
    detail = ", ".join(
        f"{k}: {freq[k]:.3f} >= 0.9 (r={reps[k].trials[0].r}, mean ratio "
        f"{reps[k].aggregate['mean_ratio']:.3f})" for k in reps
    )
    acceptance_report(5, "feature extraction bound 1+(1+eps)gamma", passed, f"{detail}, {elapsed:.1f}s")
    for k, f in freq.items():
        assert f >= 0.9, k
    assert elapsed < 300


def test_mailman_exact_and_linear(acceptance_report):
    t0 = time.perf_counter()
    rng = np.random.default_rng(6)
    worst_err = 0.0
    for t in range(200):
        S = 2 if t % 2 == 0 else 3
        m = int(rng.integers(1, 11))
        alphabet = (0.0, 1.0) if S == 2 else (-1.0, 0.0, 1.0)
        n = int(rng.integers(1, 200))
        A = np.asarray(alphabet)[rng.integers(0, S, size=(m, n))]
        B = rng.standard_normal((n, int(rng.integers(1, 4))))
        ref = A @ B
        got = mailman_matmul(A, B, alphabet)
        err = np.max(np.abs(got - ref)) / max(np.max(np.abs(A) @ np.abs(B)), 1e-300)
        worst_err = max(worst_err, err)
    worst_ops = 0.0
    for m in range(1, 13):
        n = 2**m
        for x in (np.ones(n), rng.standard_normal(n)):
            counter = OpCounter()
            apply_plan(build_plan(universal_matrix((0, 1), m), (0, 1)), x, counter)
            worst_ops = max(worst_ops, counter.universal / (4 * n))
    elapsed = time.perf_counter() - t0
    passed = worst_err <= 1e-12 and worst_ops <= 1.0 and elapsed < 30
    acceptance_report(6, "mailman exactness and operation count", passed,
                      f"max rel error {worst_err:.2e}, max ops/4n {worst_ops:.4f}, {elapsed:.1f}s")
    assert worst_err <= 1e-12
    assert worst_ops <= 1.0
    assert elapsed < 30


def _orthonormal(rows, cols, seed):
    Q, _ = np.linalg.qr(np.random.default_rng(seed).standard_normal((rows, cols)))
    return Q


def test_sketching_concentration(acceptance_report):
    t0 = time.perf_counter()
    trials = 500
    results = {}

    # singular values of V^T Omega S concentrate around 1
    n, k, delta = 200, 4, 0.1
    r = math.ceil(4 * k * math.log(2 * k / delta) / 0.25**2)
    V = _orthonormal(n, k, 1)
    hits = 0
    for t in range(trials):
        op = randomized_sampling(V, r, RngStream(31, t))
        s2 = np.linalg.svd(op.apply(V.T), compute_uv=False) ** 2
        hits += bool(np.all((s2 >= 0.75) & (s2 <= 1.25)))
    results["sampled singular values in [0.75, 1.25]"] = (hits / trials, 0.85, ">=")

    # ||Y Omega S||_F^2 <= (1/delta) ||Y||_F^2
    Y = np.random.default_rng(2).standard_normal((5, n))
    ynorm = np.sum(Y * Y)
    hits = 0
    for t in range(trials):
        op = randomized_sampling(V, 20, RngStream(32, t))
        hits += np.sum(op.apply(Y) ** 2) <= ynorm / delta
    results["Markov bound on sampled norm"] = (hits / trials, 0.85, ">=")

    # ||Y Pi||_F^2 >= (1 + eps) ||Y||_F^2 is rare
    k, eps, d = 2, 0.3, 50
    r = math.ceil(100 * k / eps**2)
    Y = np.random.default_rng(3).standard_normal((5, d))
    ynorm = np.sum(Y * Y)
    bad = 0
    for t in range(trials):
        Pi = sign_matrix(RngStream(33, t), d, r)
        bad += np.sum((Y @ Pi) ** 2) >= (1 + eps) * ynorm
    results["projected norm inflation"] = (bad / trials, 0.04, "<=")

    # singular values of V_k^T Pi within [1 - 2 eps, 1 + 2 eps]
    Vk = _orthonormal(d, k, 4)
    hits = 0
    for t in range(trials):
        Pi = sign_matrix(RngStream(34, t), d, r)
        s2 = np.linalg.svd(Vk.T @ Pi, compute_uv=False) ** 2
        hits += bool(np.all((s2 >= 1 - 2 * eps) & (s2 <= 1 + 2 * eps)))
    results["projected singular values"] = (hits / trials, 0.90, ">=")

    elapsed = time.perf_counter() - t0
    ok = {name: (f >= lim if op == ">=" else f <= lim) for name, (f, lim, op) in results.items()}
    passed = all(ok.values()) and elapsed < 180
    detail = "; ".join(f"{name}: {f:.3f} {op} {lim}" for name, (f, lim, op) in results.items())
    acceptance_report(7, "sketching concentration Monte Carlo", passed, f"{detail}, {elapsed:.1f}s")
    assert all(ok.values()), ok
    assert elapsed < 180


def _cli(*args, cwd):
    proc = subprocess.run([sys.executable, "-m", "kmsketch", *args], capture_output=True,
                          cwd=cwd, env={"PATH": "", "KMSKETCH_SEED": "13"})
    assert proc.returncode == 0, proc.stderr.decode()
    return proc.stdout


def test_cli_determinism(acceptance_report, tmp_path):
    A = np.random.default_rng(8).standard_normal((10, 32))
    A[5:] += 4.0
    write_matrix(A, tmp_path / "a.csv")
    (tmp_path / "exp.cfg").write_text("method = rp\nk = 2\neps = 0.3\ntrials = 5\nn = 8\n")

    commands = {
        "reduce lvg": ["reduce", "--input", "a.csv", "--method", "lvg", "--k", "2", "--r", "8"],
        "reduce sampling": ["reduce", "--input", "a.csv", "--method", "sampling", "--k", "2",
                            "--c1", "0.05"],
        "reduce rp mailman": ["reduce", "--input", "a.csv", "--method", "rp", "--k", "2",
                              "--variant", "achlioptas", "--mailman", "--seed", "4"],
        "reduce asvd": ["reduce", "--input", "a.csv", "--method", "asvd", "--k", "2"],
        "reduce jl": ["reduce", "--input", "a.csv", "--method", "jl", "--k", "2", "--r", "6"],
        "kmeans": ["kmeans", "--input", "a.csv", "--k", "2", "--seed", "4"],
        "eval": ["eval", "--config", "exp.cfg", "--seed", "9"],
        "bench-mailman": ["bench-mailman", "--sizes", "16,256", "--trials", "2"],
    }
    differing = []
    for name, args in commands.items():
        outputs = []
        for run in range(2):
            out = tmp_path / f"out{run}"
            stdout = _cli(*args, "--output", str(out), cwd=tmp_path)
            body = out.read_bytes()
            if name in ("eval", "bench-mailman"):
                body = json.dumps(strip_timings(json.loads(body)), sort_keys=True).encode()
            outputs.append((stdout, body))
        if outputs[0] != outputs[1]:
            differing.append(name)
    passed = not differing
    acceptance_report(8, "CLI determinism", passed,
                      f"{len(commands) - len(differing)}/{len(commands)} commands byte-identical"
                      + (f"; differing: {differing}" if differing else ""))
    assert not differing
