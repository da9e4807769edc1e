"""Acceptance suite: one test per criterion, each printing a single PASS/FAIL line."""
import time
from pathlib import Path

import numpy as np
import pytest
from conftest import ellipse_points, on_circle

from plateauflow import cli, diagnostics, flow, oracles, spectral, targets
from plateauflow.flow import FlowConfig, FlowState
from plateauflow.spectral import MobiusParams

CIRCLE = targets.SphereTarget(2)
CONFIGS = Path(__file__).resolve().parents[1] / "configs"


@pytest.fixture
def report(capsys):
    def emit(number, title, ok, detail):
        with capsys.disabled():
            print(f"\ncriterion {number:2d} {'PASS' if ok else 'FAIL'}  {title}: {detail}")
        assert ok, detail
    return emit


@pytest.fixture(scope="module")
def convergence_run():
    K = 32
    u0 = spectral.mode_field(1, K) + spectral.constant_field([0.3, 0.0], K)
    cfg = FlowConfig(max_mode=K, t_max=60, residual_tol=1e-7)
    t0 = time.perf_counter()
    traj = flow.run(u0, cfg, CIRCLE)
    return traj, time.perf_counter() - t0


def test_c01_energy_identity(report):
    rng = np.random.default_rng(101)
    t0 = time.perf_counter()
    worst = 0.0
    for _ in range(100):
        u = spectral.random_field(rng, int(rng.integers(1, 5)), int(rng.integers(1, 65)), decay=1.0)
        E, Eh = spectral.dirichlet_energy(u), spectral.half_energy(u)
        worst = max(worst, abs(E - Eh) / E)
    elapsed = time.perf_counter() - t0
    report(1, "energy identity", worst <= 1e-12 and elapsed < 1.0,
           f"max rel gap {worst:.2e} (tol 1e-12), {elapsed:.2f} s (limit 1 s)")


def test_c02_dtn_against_poisson(report):
    u = spectral.random_field(np.random.default_rng(102), 2, 8)
    hs = np.array([1e-2, 1e-3, 1e-4])
    t0 = time.perf_counter()
    errs = []
    for h in hs:
        # the trapezoid rule resolves the kernel at r = 1 - h only when M h is large
        M = 2 ** int(np.ceil(np.log2(40 / h)))
        s = spectral.sample(u, M)
        idx = np.arange(32) * (M // 32)
        fd = oracles.poisson_radial_derivative(s, h, idx)
        exact = spectral.synthesize(spectral.dtn(u), M)[idx]
        errs.append(float(np.max(np.abs(fd - exact))))
    slope = np.polyfit(np.log(hs), np.log(errs), 1)[0]
    elapsed = time.perf_counter() - t0
    report(2, "dtn vs Poisson finite difference", abs(slope - 1) <= 0.2 and elapsed < 5.0,
           f"errors {', '.join(f'{e:.2e}' for e in errs)}, slope {slope:.3f} (want 1 +- 0.2), {elapsed:.2f} s")


def test_c03_trace_identity(report, convergence_run):
    rng = np.random.default_rng(103)
    fields = [spectral.random_field(rng, int(rng.integers(1, 5)), int(rng.integers(1, 65)), decay=1.0)
              for _ in range(50)]
    fields += [s.field for s in convergence_run[0].snapshots]
    worst = max(diagnostics.trace_identity_defect(u) for u in fields)
    report(3, "trace identity", worst <= 1e-12,
           f"max rel gap {worst:.2e} over {len(fields)} fields incl. flow snapshots (tol 1e-12)")


def test_c04_pythagoras(report):
    rng = np.random.default_rng(104)
    worst_sphere = 0.0
    for n in (2, 3, 4):
        sphere = targets.SphereTarget(n)
        for _ in range(5):
            base = spectral.random_field(rng, n, 8, decay=1.0)
            u = spectral.from_function(
                lambda p: (lambda q: q / np.linalg.norm(q, axis=1, keepdims=True))(spectral.eval_trace(base, p)
                                                                                  + 3 * np.eye(n)[0]), 32)
            worst_sphere = max(worst_sphere, diagnostics.pythagoras_check(u, sphere))
    ell = targets.build_curve(ellipse_points())
    L = ell.length
    worst_ell = 0.0
    for shift in rng.uniform(0, L, 5):
        w = spectral.from_function(lambda p: ell.point(np.mod(shift + L * p / (2 * np.pi), L)), 16)
        worst_ell = max(worst_ell, diagnostics.pythagoras_check(w, ell))
    ok = max(worst_sphere, worst_ell) <= 1e-11
    report(4, "Pythagorean split", ok, f"sphere {worst_sphere:.2e}, ellipse {worst_ell:.2e} (tol 1e-11)")


def test_c05_distance_laplacian(report):
    u = spectral.mode_field(1, 2)
    z = np.array([0.8, 0.8j, -0.85 + 0.1j])
    hs = np.array([0.04, 0.02, 0.01, 0.005])
    defects = []
    for h in hs:
        lhs, _, valid = diagnostics.dist_laplace_terms(u, CIRCLE, z, h)
        assert np.all(valid)
        defects.append(float(np.max(np.abs(lhs[:, 0] - 1 / np.abs(z)))))
    slope = np.polyfit(np.log(hs), np.log(defects), 1)[0]
    report(5, "distance Laplacian", slope >= 1.8,
           f"defects {', '.join(f'{d:.2e}' for d in defects)}, slope {slope:.3f} (want >= 1.8)")


def test_c06_energy_dissipation(report):
    K = 64
    u0 = spectral.mode_field(1, K) + spectral.constant_field([0.3, 0.0], K)
    t0 = time.perf_counter()
    defects, jumps, dts = [], [], []
    for dt in (0.5 / K, 0.25 / K):
        cfg = FlowConfig(max_mode=K, dt=dt, t_max=20, residual_tol=1e-300, snapshot_interval=20)
        traj = flow.run(u0, cfg, CIRCLE)
        assert traj.termination == "t_max_reached"
        defects.append(diagnostics.dissipation_report(traj).balance_defect)
        jumps.append(float(np.max(np.diff(traj.column("E")))))
        dts.append(dt)
    elapsed = time.perf_counter() - t0
    ratio = defects[0] / defects[1]
    monotone = all(j <= d * d for j, d in zip(jumps, dts))
    ok = monotone and 1.7 <= ratio <= 2.3 and elapsed < 30
    report(6, "energy monotonicity and balance", ok,
           f"max step increase {max(jumps):.1e} (<= dt^2), balance defects {defects[0]:.3e} / {defects[1]:.3e} "
           f"ratio {ratio:.3f} (want ~2), {elapsed:.1f} s")


def test_c07_stationarity(report):
    K = 16
    cfg = FlowConfig(max_mode=K)
    worst_res, worst_move = 0.0, 0.0
    for k in (1, 2, 3):
        u = spectral.mode_field(k, K)
        worst_res = max(worst_res, diagnostics.residual(u, CIRCLE))
        state = FlowState(0.0, u)
        for _ in range(100):
            state = flow.step(state, cfg, CIRCLE)
        worst_move = max(worst_move, float(np.max(np.abs(state.field.coeffs - u.coeffs))))
    report(7, "stationarity of e^{ik phi}", worst_res <= 1e-12 and worst_move <= 1e-10,
           f"residual {worst_res:.2e} (tol 1e-12), drift after 100 steps {worst_move:.2e} (tol 1e-10)")


def test_c08_convergence(report, convergence_run):
    traj, elapsed = convergence_run
    fin = traj.final
    res = diagnostics.residual(fin.field, CIRCLE)
    E = spectral.dirichlet_energy(fin.field)
    deg = spectral.winding_degree(fin.field)
    conf = diagnostics.conformality_defect(fin.field)
    ok = (traj.termination == "converged" and res < 1e-6 and abs(E - np.pi) <= 1e-3 and deg == 1
          and conf <= 1e-4 and elapsed < 60)
    report(8, "convergence to a half-harmonic map", ok,
           f"{traj.termination} at t = {fin.t:.2f}, residual {res:.1e}, |E - pi| {abs(E - np.pi):.1e}, "
           f"degree {deg}, conformality {conf:.1e}, {elapsed:.1f} s")


def test_c09_conformal_invariance(report):
    rng = np.random.default_rng(109)
    K = 32
    worst = 0.0
    for i in range(20):
        u = spectral.random_field(rng, 2, K, decay=1.0)
        radius = 0.5 if i == 0 else rng.uniform(0, 0.5)
        m = MobiusParams(radius * np.exp(1j * rng.uniform(0, 2 * np.pi)), rng.uniform(0, 2 * np.pi))
        gap = abs(spectral.dirichlet_energy(spectral.compose_with_mobius(u, m, 4 * K)) - spectral.dirichlet_energy(u))
        worst = max(worst, gap)
    report(9, "conformal invariance", worst <= 1e-8, f"max |E(u o Phi) - E(u)| {worst:.2e} (tol 1e-8), K = {K}")


def test_c10_regularization(report):
    K = 32
    u0 = spectral.mode_field(1, K) + spectral.constant_field([0.3, 0.0], K)
    base = dict(max_mode=K, t_max=1.0, residual_tol=1e-300, snapshot_interval=1.0)
    ref = flow.run(u0, FlowConfig(**base), CIRCLE).final.field
    eps = np.array([1e-1, 1e-2, 1e-3])
    errs = [spectral.l2_norm(flow.run(u0, FlowConfig(epsilon=e, **base), CIRCLE).final.field - ref) for e in eps]
    slope = np.polyfit(np.log(eps), np.log(errs), 1)[0]
    report(10, "regularization consistency", abs(slope - 1) <= 0.2,
           f"gaps {', '.join(f'{e:.2e}' for e in errs)}, slope {slope:.3f} (want 1 +- 0.2)")


def test_c11_concentration_pipeline(report):
    u = spectral.compose_with_mobius(spectral.mode_field(1, 1), MobiusParams(0.995), 4096)
    events = diagnostics.detect_concentration([(0.0, u)], 1.0, [0.8, 0.4, 0.2, 0.1])
    ok = len(events) >= 1
    detail = f"{len(events)} event(s)"
    if ok:
        b = diagnostics.extract_bubble(u, events[0], CIRCLE)
        ok = abs(b.energy - np.pi) <= 0.05 * np.pi and b.conformality_defect <= 1e-3
        detail += (f" at z = {events[0].center:.3f}, bubble energy {b.energy:.6f} (pi +- 5%), "
                   f"conformality {b.conformality_defect:.1e} (tol 1e-3)")
    report(11, "concentration pipeline", ok, detail)


def test_c12_determinism(report, tmp_path):
    outs = []
    for name in ("a", "b"):
        out = tmp_path / name
        code = cli.main(["run", str(CONFIGS / "random_sphere.cfg"), "--output", str(out), "--seed", "7"])
        assert code == 0
        outs.append({f: (out / f).read_bytes() for f in ("series.csv", "snapshots.ndjson", "events.ndjson",
                                                            "summary.json")})
    same = outs[0] == outs[1]
    report(12, "determinism", same, "all four output files byte-identical" if same else "outputs differ")
