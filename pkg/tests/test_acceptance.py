"""Acceptance criteria, each run at its stated tolerance.

Every test records one pass/fail line that is echoed in the terminal summary.
The experiment-scale criteria are marked ``slow``.
"""

import itertools
import math
import os
import time
from pathlib import Path

import numpy as np
import pytest

from qrgan import baselines, cli, gan, io, qsim, reservoir
from qrgan.baselines import QGANConfig
from qrgan.config import parse_config
from qrgan.data import image_order
from qrgan.gan import QRGANGenerator, disc_backward, disc_forward, loss_d, loss_g, make_discriminator
from qrgan.metrics import swd, wasserstein_1d
from qrgan.mlp import MLP
from qrgan.reservoir import ReservoirConfig
from qrgan.runner import load_pool, run_seed

from acceptance_log import record
from oracles import fd_grads, random_hermitian, rel_err, taylor_expm

ROOT = Path(__file__).resolve().parents[1]
OPTDIGITS = ROOT / "data" / "optdigits.tra"
CIFAR = Path(os.environ.get("QRGAN_CIFAR", ROOT / "data" / "cifar-10-batches-bin" / "data_batch_1.bin"))
FIVE_SEEDS = (1, 2, 3, 4, 5)


def digit_cfg(extra=""):
    return parse_config(f"data.path = {OPTDIGITS}\n" + extra)


def median_curve(runs, key):
    return np.median(np.array([[getattr(r, key) for r in recs] for recs in runs]), axis=0)


# ---------------------------------------------------------------- 1

def test_criterion_1_simulator_validity():
    rng = np.random.default_rng(2024)
    cfg = ReservoirConfig()
    unitaries = [reservoir.Reservoir(reservoir.init_params(cfg, rng), cfg).U for _ in range(3)]
    n = 5
    for _ in range(3):
        unitaries.append(qsim.expm_hermitian(random_hermitian(rng, n), rng.uniform(0.1, 3)))
    rho = qsim.zero_state(n)
    worst_tr = worst_herm = 0.0
    worst_eig = 0.0
    t0 = time.perf_counter()
    for _ in range(10_000):
        op = rng.integers(3)
        if op == 0:
            rho = qsim.evolve(rho, unitaries[rng.integers(len(unitaries))])
        elif op == 1:
            rho = qsim.replace_qubit0(rho, rng.uniform(-1, 1))
        else:
            rho = qsim.reset_qubit0(rho)
        worst_tr = max(worst_tr, abs(np.trace(rho) - 1))
        worst_herm = max(worst_herm, np.max(np.abs(rho - rho.conj().T)))
        worst_eig = min(worst_eig, np.linalg.eigvalsh((rho + rho.conj().T) / 2)[0])
    elapsed = time.perf_counter() - t0
    ok = worst_tr <= 1e-9 and worst_herm <= 1e-9 and worst_eig >= -1e-8 and elapsed < 60
    record(1, ok, f"trace err {worst_tr:.1e}, herm err {worst_herm:.1e}, min eig {worst_eig:.1e}, "
                  f"{elapsed:.1f}s")
    assert ok


# ---------------------------------------------------------------- 2

def _gauss_jordan_solve(V, y):
    M = V.T @ V
    k = M.shape[0]
    aug = np.hstack([M, np.eye(k)])
    for c in range(k):
        piv = c + int(np.argmax(np.abs(aug[c:, c])))
        aug[[c, piv]] = aug[[piv, c]]
        aug[c] /= aug[c, c]
        for r in range(k):
            if r != c:
                aug[r] -= aug[r, c] * aug[c]
    return aug[:, k:] @ (V.T @ y)


def _script_swd(A, B, seed, n_proj):
    rng = np.random.default_rng(seed)
    total = 0.0
    for _ in range(n_proj):
        v = rng.normal(size=A.shape[1])
        v = v / math.sqrt(float(v @ v))
        a = sorted(float(x @ v) for x in A)
        b = sorted(float(x @ v) for x in B)
        total += sum((p - q) ** 2 for p, q in zip(a, b)) / len(a)
    return math.sqrt(total / n_proj)


def test_criterion_2_oracle_equivalence():
    rng = np.random.default_rng(7)
    expm_err = 0.0
    for _ in range(100):
        H = random_hermitian(rng, 3)
        t = rng.uniform(-2, 2)
        # Taylor on 64 sub-steps keeps the series well inside its convergence radius
        oracle = np.linalg.matrix_power(taylor_expm(H, t / 64, order=30), 64)
        expm_err = max(expm_err, np.max(np.abs(qsim.expm_hermitian(H, t) - oracle)))

    ridge_err = 0.0
    for _ in range(100):
        V = rng.uniform(-1, 1, (64, 5))
        V[:, -1] = 1.0
        y = rng.uniform(0, 1, 64)
        ridge_err = max(ridge_err, np.max(np.abs(reservoir.solve_filter(V, y, 0.0) - _gauss_jordan_solve(V, y))))

    swd_err = 0.0
    for seed in range(10):
        A, B = rng.uniform(size=(8, 64)), rng.uniform(size=(8, 64))
        swd_err = max(swd_err, abs(swd(A, B, n_proj=50, rng=np.random.default_rng(seed)) - _script_swd(A, B, seed, 50)))

    w_err = 0.0
    for n in range(1, 7):
        for _ in range(10):
            u, v = rng.normal(size=n), rng.normal(size=n)
            best = min(sum((u[i] - v[j]) ** 2 for i, j in enumerate(p)) / n
                       for p in itertools.permutations(range(n)))
            w_err = max(w_err, abs(wasserstein_1d(u, v) - math.sqrt(best)))

    # "exact" for the permutation search means equal up to summation-order rounding
    ok = expm_err <= 1e-9 and ridge_err <= 1e-8 and swd_err <= 1e-10 and w_err <= 1e-12
    record(2, ok, f"expm {expm_err:.1e}, ridge {ridge_err:.1e}, swd {swd_err:.1e}, w1d {w_err:.1e}")
    assert ok


# ---------------------------------------------------------------- 3

def test_criterion_3_gradient_checks():
    rng = np.random.default_rng(11)
    t0 = time.perf_counter()
    worst = {"disc": 0.0, "cnn": 0.0, "filter": 0.0, "shift": 0.0}

    for _ in range(20):
        dims = [int(rng.integers(3, 9)), int(rng.integers(3, 9)), int(rng.integers(2, 6)), 1]
        D = MLP(dims, rng)
        x = rng.uniform(size=dims[0])
        up = rng.normal()
        grads, gx = disc_backward(D, x, up)
        f = lambda: up * disc_forward(D, x)
        fds = fd_grads(f, D.params + [x], 1e-5)
        for g, fd in zip(grads + [gx], fds):
            worst["disc"] = max(worst["disc"], rel_err(g, fd, floor=1e-6))

    for _ in range(20):
        net = MLP([4, 8, 16, 8, 4], rng)
        z, up = rng.normal(size=4), rng.normal(size=4)
        baselines.cnn_forward(net, z)
        grads, gz = baselines.cnn_backward(net, up)
        f = lambda: float(up @ baselines.cnn_forward(net, z))
        for g, fd in zip(grads + [gz], fd_grads(f, net.params + [z], 1e-5)):
            worst["cnn"] = max(worst["cnn"], rel_err(g, fd, floor=1e-6))

    for k in range(20):
        kind = ("ce", "ls")[k % 2]
        gen = QRGANGenerator(ReservoirConfig(), rng)
        D = make_discriminator(64, (64, 32), rng)
        img = rng.uniform(size=64)
        _, V = gen.propose(img, img, rng)
        W = gen.W + rng.normal(0, 0.05, 5)
        fake = image_order((V @ W)[:64])
        _, g = disc_backward(D, fake, gan.loss_g_grad(kind, disc_forward(D, fake)))
        analytic = gen.filter_grad(V, g)
        (fd,) = fd_grads(lambda: loss_g(kind, disc_forward(D, image_order((V @ W)[:64]))), [W], 1e-5)
        worst["filter"] = max(worst["filter"], rel_err(analytic, fd, floor=1e-6))

    cfg = QGANConfig(n_qubits=3, depth=2)
    for _ in range(20):
        theta = rng.uniform(0, 2 * np.pi, (4, 2, 3))
        z = rng.uniform(0, np.pi / 2, 3)
        up = rng.normal(size=16)
        grad = baselines.qgan_param_shift_grad(cfg, theta, z, up)
        (fd,) = fd_grads(lambda: float(up @ baselines.qgan_generate(cfg, theta, z)), [theta], 1e-6)
        worst["shift"] = max(worst["shift"], rel_err(grad, fd, floor=1e-4))

    elapsed = time.perf_counter() - t0
    ok = (max(worst["disc"], worst["cnn"], worst["filter"]) < 1e-3 and worst["shift"] < 1e-5
          and elapsed < 120)
    record(3, ok, ", ".join(f"{k} {v:.1e}" for k, v in worst.items()) + f", {elapsed:.1f}s")
    assert ok


# ---------------------------------------------------------------- 4

def test_criterion_4_analytic_losses():
    errs = [abs(loss_d("ce", 0.5, 0.5) - 2 * math.log(2)), abs(loss_g("ce", 0.5) - math.log(2)),
            abs(loss_d("ls", 1.0, 0.0)), abs(loss_g("ls", 0.0) - 0.5)]
    ok = max(errs) <= 1e-12
    record(4, ok, f"max error {max(errs):.1e}")
    assert ok


# ---------------------------------------------------------------- 5

@pytest.mark.slow
def test_criterion_5_desk_scale_qrgan():
    cfg = digit_cfg()
    pool = load_pool(cfg)
    assert len(pool) == 375
    t0 = time.perf_counter()
    qr = [run_seed(cfg, pool, s).records for s in FIVE_SEEDS]
    qg = [run_seed(cfg, pool, s, model="qgan", iterations=100).records for s in FIVE_SEEDS]
    elapsed = time.perf_counter() - t0
    m = median_curve(qr, "mse")
    mq = median_curve(qg, "mse")
    ok = m[499] < m[0] and m[99] < mq[99]
    record(5, ok, f"median MSE qrgan it1 {m[0]:.4f} -> it500 {m[499]:.4f}; it100 qrgan {m[99]:.4f} "
                  f"vs qgan {mq[99]:.4f}; {elapsed / 60:.1f} min")
    assert ok


# ---------------------------------------------------------------- 6 and 9

@pytest.fixture(scope="module")
def ls_run(tmp_path_factory):
    out = tmp_path_factory.mktemp("ls")
    cfg = out / "ls.cfg"
    cfg.write_text(f"seeds = 1,2,3,4,5\ndata.path = {OPTDIGITS}\ntrain.loss = ls\n"
                   f"train.iterations = 100\noutput.image_cadence = 0\noutput.dir = {out / 'a'}\n")
    assert cli.main(["train", "--config", str(cfg)]) == 0
    return cfg, out / "a"


@pytest.mark.slow
def test_criterion_6_lsgan_convergence(ls_run):
    _, run = ls_run
    runs = [io.read_records(run / f"seed_{s}.csv") for s in FIVE_SEEDS]
    med = np.median(np.array([[r["L_D"] for r in recs] for recs in runs]), axis=0)
    k = int(np.argmin(med[:100]))
    ratio = med[k] / med[0]
    ok = ratio < 0.1
    record(6, ok, f"median L_D it1 {med[0]:.4f}, lowest by it100 {med[k]:.4f} at it{k + 1} "
                  f"(ratio {ratio:.3f}, need < 0.1)")
    assert ok


@pytest.mark.slow
def test_criterion_9_determinism(ls_run):
    cfg, run = ls_run
    again = run.parent / "b"
    assert cli.main(["train", "--config", str(cfg), "--out", str(again)]) == 0
    names = sorted(p.name for p in run.glob("*.csv"))
    same = [(run / n).read_bytes() == (again / n).read_bytes() for n in names]
    ok = len(names) == 6 and all(same)
    record(9, ok, f"{sum(same)}/{len(names)} CSV files byte-identical on rerun of criterion 6")
    assert ok


# ---------------------------------------------------------------- 7

@pytest.mark.slow
def test_criterion_7_cifar_desk_scale():
    if not CIFAR.exists():
        record(7, False, f"CIFAR-10 batch not found at {CIFAR} (set QRGAN_CIFAR)")
        pytest.fail(f"CIFAR-10 data missing: {CIFAR}")
    cfg = parse_config(f"dataset = cifar10\ndata.path = {CIFAR}\n")
    pool = load_pool(cfg)
    seeds = (1, 2, 3)
    runs = {m: [run_seed(cfg, pool, s, model=m).records for s in seeds] for m in ("qrgan", "qgan", "cnn")}
    mse_end = median_curve(runs["qrgan"], "mse")[499]
    swd_at = {m: np.median([[r.swd for r in recs if r.swd is not None] for recs in rs], axis=0)
              for m, rs in runs.items()}
    below = np.all(swd_at["qrgan"] < swd_at["qgan"]) and np.all(swd_at["qrgan"] < swd_at["cnn"])
    ok = mse_end < 0.1 and bool(below)
    record(7, ok, f"median qrgan MSE it500 {mse_end:.4f}; qrgan SWD below both baselines at all "
                  f"{len(swd_at['qrgan'])} matched iterations: {bool(below)}")
    assert ok


# ---------------------------------------------------------------- 8

@pytest.mark.slow
def test_criterion_8_noise_study_bottom():
    cfg = digit_cfg("metrics.eval = random\n")
    pool = load_pool(cfg)
    parts, ok = [], True
    for r in (0.0, 1 / 6, 1 / 3):
        curves = [[x.swd for x in run_seed(cfg, pool, s, noise_ratio=r).records if x.swd is not None]
                  for s in FIVE_SEEDS]
        med = np.median(np.array(curves), axis=0)
        hit = bool(med.min() < med[0])
        ok &= hit
        parts.append(f"r={r:.3f} first {med[0]:.4f} min {med.min():.4f} {'ok' if hit else 'no bottom'}")
    record(8, ok, "; ".join(parts))
    assert ok
