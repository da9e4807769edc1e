import numpy as np
import pytest
from conftest import ellipse_points, on_circle

from plateauflow import diagnostics, flow, spectral, targets
from plateauflow.diagnostics import ConcentrationEvent, StaleEvent
from plateauflow.flow import FlowConfig, FlowState
from plateauflow.spectral import MobiusParams

CIRCLE = targets.SphereTarget(2)


@pytest.fixture(scope="module")
def converged_run():
    K = 32
    u0 = spectral.mode_field(1, K) + spectral.constant_field([0.3, 0.0], K)
    return flow.run(u0, FlowConfig(max_mode=K, t_max=40, residual_tol=1e-9), CIRCLE)


@pytest.fixture(scope="module")
def concentrated():
    return spectral.compose_with_mobius(spectral.mode_field(1, 1), MobiusParams(0.99), 2048)


# -- residual and Pythagoras --------------------------------------------------

def test_residual_examples():
    for k in (1, 2, 3):
        assert diagnostics.residual(spectral.mode_field(k, 8), CIRCLE) <= 1e-12
    assert diagnostics.residual(spectral.constant_field([0.0, 1.0], 4), CIRCLE) == 0
    u = flow.prepare_initial(spectral.mode_field(1, 16) + spectral.constant_field([0.1, 0.0], 16),
                             FlowConfig(max_mode=16), CIRCLE)
    assert diagnostics.residual(u, CIRCLE) > 1e-3


def test_residual_decreases_along_flow(converged_run):
    res = converged_run.column("residual")
    assert np.all(np.diff(res) <= 1e-12)


def test_pythagoras_identity_map():
    u = spectral.mode_field(1, 4)
    assert diagnostics.pythagoras_check(u, CIRCLE) <= 1e-14
    p = spectral.synthesize(u, 16)
    ur = spectral.synthesize(spectral.dtn(u), 16)
    assert np.max(np.abs(CIRCLE.tangent_project(p, ur))) <= 1e-14


def test_pythagoras_random_on_manifold():
    rng = np.random.default_rng(1)
    for _ in range(10):
        u = on_circle(spectral.mode_field(1, 8) + spectral.random_field(rng, 2, 8, decay=2.0, amplitude=0.2), 32)
        scale = np.max(np.sum(spectral.synthesize(spectral.dtn(u), 128) ** 2, axis=1))
        assert diagnostics.pythagoras_check(u, CIRCLE) <= 1e-12 * scale


def test_trace_identity_on_snapshots(converged_run):
    for s in converged_run.snapshots:
        assert diagnostics.trace_identity_defect(s.field) <= 1e-12


# -- distance Laplacian -------------------------------------------------------

def test_dist_laplace_identity_map_annulus():
    u = spectral.mode_field(1, 2)
    r = np.linspace(0.9, 0.99, 6)
    z = r * np.exp(1j * np.linspace(0, 5, 6))
    lhs, rhs, valid = diagnostics.dist_laplace_terms(u, CIRCLE, z)
    assert np.all(valid)
    assert np.allclose(rhs[:, 0], 1 / np.abs(z), atol=1e-13)
    h = np.minimum(0.01, (1 - np.abs(z)) / 4)
    assert np.all(np.abs(lhs[:, 0] - 1 / np.abs(z)) <= 2 * h**2 / np.abs(z) ** 3)


def test_dist_laplace_constant():
    c = spectral.constant_field([0.0, 1.0], 3)
    lhs, rhs, valid = diagnostics.dist_laplace_terms(c, CIRCLE, [0.2, 0.5j])
    assert np.all(valid)
    assert np.allclose(lhs, 0, atol=1e-12)
    assert np.allclose(rhs, 0)


def test_dist_laplace_rate_for_perturbed_field():
    rng = np.random.default_rng(6)
    u = on_circle(spectral.mode_field(1, 6) + spectral.random_field(rng, 2, 6, decay=2.0, amplitude=0.05), 24)
    z = np.array([0.92, 0.93j, -0.94 + 0.05j])
    hs = np.array([8e-3, 4e-3, 2e-3])
    defects = [diagnostics.dist_laplace_check(u, CIRCLE, z, h) for h in hs]
    assert np.polyfit(np.log(hs), np.log(defects), 1)[0] > 1.8


def test_dist_laplace_skips_far_points():
    u = spectral.mode_field(1, 2)
    _, _, valid = diagnostics.dist_laplace_terms(u, CIRCLE, [0.5, 0.95], h=1e-3)
    assert list(valid) == [False, True]


def test_dist_laplace_on_curve():
    ell = targets.build_curve(ellipse_points())
    L = ell.length
    u = spectral.from_function(lambda p: ell.point(np.mod(L * p / (2 * np.pi), L)), 32)
    z = 0.97 * np.exp(1j * np.array([0.3, 2.0, 4.0]))
    defects = [diagnostics.dist_laplace_check(u, ell, z, h) for h in (4e-3, 2e-3)]
    assert defects[1] < defects[0] / 3


# -- Hopf differential --------------------------------------------------------

def test_hopf_examples():
    pts = diagnostics.interior_lattice()
    assert np.max(np.abs(diagnostics.hopf_differential(spectral.mode_field(1, 3), pts))) <= 1e-14
    cos_only = spectral.from_function(lambda p: np.column_stack([np.cos(p), 0 * p]), 3)
    assert np.allclose(diagnostics.hopf_differential(cos_only, pts), 1.0, atol=1e-14)
    assert diagnostics.conformality_defect(spectral.mode_field(1, 3)) <= 1e-14


def test_hopf_is_holomorphic():
    u = spectral.random_field(np.random.default_rng(4), 3, 8)
    d = [diagnostics.cauchy_riemann_defect(u, h) for h in (1e-2, 5e-3)]
    assert d[0] / d[1] == pytest.approx(4, rel=0.1)


def test_flow_limit_is_conformal(converged_run):
    assert converged_run.termination == "converged"
    assert diagnostics.conformality_defect(converged_run.final.field) <= 1e-4


# -- concentration ------------------------------------------------------------

def test_boundary_lattice():
    pts = diagnostics.boundary_lattice(0.1)
    assert len(pts) % 8 == 0
    assert np.all(np.abs(np.diff(np.angle(pts[:3]))) <= 0.1)
    assert np.allclose(np.abs(pts), 1)


def test_no_events_on_converged_run(converged_run):
    assert diagnostics.detect_concentration(converged_run.snapshots, 0.5, [0.1]) == []


def test_no_events_on_constant():
    c = spectral.constant_field([1.0, 0.0], 8)
    assert diagnostics.detect_concentration([(0.0, c)], 0.5, [0.4, 0.2]) == []


def test_event_for_mobius_concentration(concentrated):
    events = diagnostics.detect_concentration([(0.0, concentrated)], 1.0, [0.8, 0.4, 0.2, 0.1])
    assert len(events) == 1
    ev = events[0]
    assert abs(ev.center - 1.0) <= 0.05
    assert ev.radius == 0.1
    assert ev.local_energy >= 1.0
    assert ev.local_energy == pytest.approx(spectral.local_energy(concentrated, ev.center, 0.1), rel=1e-12)


def test_event_requires_threshold():
    with pytest.raises(ValueError):
        ConcentrationEvent(1.0, 0.1, 0.2, 0.0, 0.5)
    with pytest.raises(ValueError):
        diagnostics.detect_concentration([], 0.0, [0.1])


def test_two_separate_concentrations():
    a = spectral.compose_with_mobius(spectral.mode_field(1, 1), MobiusParams(0.98), 1024)
    b = spectral.rotate(a, np.pi)
    events = diagnostics.detect_concentration([(0.0, a), (1.0, b)], 1.0, [0.1])
    assert [e.t for e in events] == [0.0, 1.0]
    assert abs(events[0].center - 1) < 0.05 and abs(events[1].center + 1) < 0.05


# -- bubbles ------------------------------------------------------------------

def test_extract_bubble(concentrated):
    ev = diagnostics.detect_concentration([(0.0, concentrated)], 1.0, [0.1])[0]
    b = diagnostics.extract_bubble(concentrated, ev, CIRCLE)
    assert b.scale > 0
    assert b.energy == pytest.approx(np.pi, rel=0.05)
    assert b.energy <= spectral.dirichlet_energy(concentrated) * (1 + 1e-9)
    assert b.conformality_defect <= 1e-3
    assert b.residual <= 1e-3
    M = 1024
    dens = np.sum(spectral.synthesize(spectral.angular_derivative(b.field), M) ** 2, axis=1)
    assert int(np.argmax(dens)) == 0


def test_extract_of_extract(concentrated):
    ev = diagnostics.detect_concentration([(0.0, concentrated)], 1.0, [0.1])[0]
    b1 = diagnostics.extract_bubble(concentrated, ev, CIRCLE, out_mode=256)
    ev2 = ConcentrationEvent(1.0 + 0j, 0.8, spectral.local_energy(b1.field, 1.0, 0.8), 0.0, 1.0)
    b2 = diagnostics.extract_bubble(b1.field, ev2, CIRCLE, out_mode=256)
    assert b2.energy == pytest.approx(b1.energy, rel=0.05)


def test_stale_event_on_constant():
    c = spectral.constant_field([1.0, 0.0], 8)
    with pytest.raises(StaleEvent):
        diagnostics.extract_bubble(c, ConcentrationEvent(1.0, 0.1, 2.0, 0.0, 1.0))


# -- dissipation --------------------------------------------------------------

def test_dissipation_report_stationary():
    cfg = FlowConfig(max_mode=8, t_max=0.1, residual_tol=1e-300)
    traj = flow.run(spectral.mode_field(2, 8), cfg, CIRCLE)
    rep = diagnostics.dissipation_report(traj)
    assert np.max(np.abs(rep.delta_E)) <= 1e-12
    assert np.max(np.abs(rep.predicted)) <= 1e-24
    assert rep.holds


def test_dissipation_report_halving():
    K = 16
    u0 = spectral.mode_field(1, K) + spectral.constant_field([0.3, 0.0], K)
    defects = []
    for dt in (0.02, 0.01):
        cfg = FlowConfig(max_mode=K, dt=dt, t_max=2.0, residual_tol=1e-300, snapshot_interval=0.5)
        traj = flow.run(u0, cfg, CIRCLE)
        rep = diagnostics.dissipation_report(traj, target=CIRCLE, cfg=cfg, localized=[(1.0, 0.5, 0.2)])
        assert rep.holds
        assert rep.global_lhs <= rep.global_rhs
        assert np.isfinite(rep.localized[0]["C_required"])
        defects.append(rep.balance_defect)
    assert defects[0] / defects[1] == pytest.approx(2, rel=0.15)


def test_dissipation_report_needs_two_rows():
    traj = flow.run(spectral.mode_field(1, 4), FlowConfig(max_mode=4), CIRCLE)
    with pytest.raises(ValueError):
        diagnostics.dissipation_report(traj)


def test_localized_energy_bounds():
    u = spectral.random_field(np.random.default_rng(2), 2, 8)
    for z0, R in ((0.0, 0.5), (1.0, 0.4)):
        loc = diagnostics.localized_energy(u, z0, R)
        assert 0 <= loc <= spectral.local_energy(u, z0, R) * (1 + 1e-10)


def test_scan_state_reports_events(concentrated):
    cfg = FlowConfig(max_mode=2048, delta_conc=1.0, radius_levels=3)
    mle, events = diagnostics.scan_state(FlowState(0.0, concentrated), cfg)
    assert mle >= 1.0 and len(events) == 1
    cfg = FlowConfig(max_mode=2048)
    mle, events = diagnostics.scan_state(FlowState(0.0, concentrated), cfg)
    assert events == []
