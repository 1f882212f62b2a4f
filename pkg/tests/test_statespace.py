import numpy as np
import pytest

from stirap6.errors import DomainError, NoConvergenceError, PreconditionError
from stirap6.frame import build_U, limit_frame
from stirap6.hamiltonian import PulseConfig, phase_reduction_diagonal
from stirap6.statespace import (
    DesignGrid,
    StateCoords,
    TargetState,
    adjust_phases,
    analytic_final_state,
    compose_final_state,
    coords_to_state,
    design_pulses,
    final_amplitudes,
    state_distance,
    state_to_coords,
)

TWO_PI = 2 * np.pi


def random_cfg(rng, **extra):
    eta, nu = rng.uniform(0, np.pi / 2, 2)
    pa, pb, pc, pd = rng.uniform(0, TWO_PI, 4)
    return PulseConfig(eta=eta, nu=nu, phi_a=pa, phi_b=pb, phi_c=pc, phi_d=pd, **extra)


def circ(a, b):
    return np.abs(np.mod(np.asarray(a) - b + np.pi, TWO_PI) - np.pi)


def test_norm_and_support(rng):
    for _ in range(300):
        psi = analytic_final_state(random_cfg(rng))
        assert np.all(psi[:3] == 0)
        assert np.linalg.norm(psi) == pytest.approx(1.0, abs=1e-12)


def test_matches_matrix_composition(rng):
    for _ in range(300):
        cfg = random_cfg(rng)
        np.testing.assert_allclose(analytic_final_state(cfg), compose_final_state(cfg), atol=1e-10)


def test_composition_oracle_is_independent(rng):
    """Rebuild U1^+ Uf^+ Ui U1 |0,0> from scratch with explicit matrices."""
    cfg = random_cfg(rng)
    u1 = np.diag(phase_reduction_diagonal(*cfg.phases))
    ui, uf = build_U(limit_frame(cfg, "early")), build_U(limit_frame(cfg, "late"))
    ref = np.linalg.solve(u1, np.linalg.solve(uf, ui @ u1 @ np.eye(6)[0]))
    np.testing.assert_allclose(analytic_final_state(cfg), ref, atol=1e-12)


def test_endpoint_polarizations_are_exact():
    for eta in (0.0, np.pi / 2):
        for nu in (0.0, np.pi / 2):
            psi = analytic_final_state(PulseConfig(eta=eta, nu=nu, phi_b=0.9))
            assert np.all(np.isfinite(psi))
            assert np.linalg.norm(psi) == pytest.approx(1.0, abs=1e-12)


def test_single_three_level_channels():
    # A with D and B with C both end in |2,0>.
    for eta, nu in ((0.0, np.pi / 2), (np.pi / 2, 0.0)):
        psi = analytic_final_state(PulseConfig(eta=eta, nu=nu))
        assert abs(psi[4]) == pytest.approx(1.0, abs=1e-12)
    assert abs(analytic_final_state(PulseConfig(eta=0.0, nu=0.0))[3]) == pytest.approx(1.0, abs=1e-12)
    assert abs(analytic_final_state(PulseConfig(eta=np.pi / 2, nu=np.pi / 2))[5]) == pytest.approx(1.0, abs=1e-12)


def test_requires_counterintuitive_order():
    with pytest.raises(PreconditionError):
        analytic_final_state(PulseConfig(pump_center=-1.0, stokes_center=1.0))


def test_phase_dependence(fig2_cfg, fig3_cfg):
    p2 = np.abs(analytic_final_state(fig2_cfg)) ** 2
    p3 = np.abs(analytic_final_state(fig3_cfg)) ** 2
    assert np.max(np.abs(p2 - p3)) > 0.05


def test_final_amplitudes_broadcast(rng):
    eta, nu = rng.uniform(0, np.pi / 2, (2, 5))
    phi = rng.uniform(0, TWO_PI, 5)
    batch = final_amplitudes(eta, nu, phi)
    for i in range(5):
        single = analytic_final_state(PulseConfig(eta=eta[i], nu=nu[i], phi_b=phi[i]))
        np.testing.assert_allclose(batch[i], single[3:], atol=1e-15)


# --- coordinates ---

def test_coords_examples():
    assert state_to_coords([0, 0, 0, 1, 0, 0]) == StateCoords(0.0, 0.0, 0.0, True)
    c = state_to_coords([0, 0, 0, 0, 1, 0])
    assert (c.theta, c.chi) == pytest.approx((np.pi / 2, 0.0))
    assert c.degenerate


def test_coords_reject_j1_weight():
    with pytest.raises(DomainError):
        state_to_coords([0.1, 0, 0, np.sqrt(0.99), 0, 0])
    c = state_to_coords([0.1, 0, 0, np.sqrt(0.99), 0, 0], renormalize=True)
    assert c.theta == pytest.approx(0.0)


def test_coords_round_trip(rng):
    for _ in range(500):
        coords = StateCoords(*rng.uniform(0.01, np.pi / 2 - 0.01, 2), rng.uniform(0, TWO_PI))
        back = state_to_coords(coords_to_state(coords))
        assert back.theta == pytest.approx(coords.theta, abs=1e-12)
        assert back.chi == pytest.approx(coords.chi, abs=1e-12)
        assert circ(back.delta, coords.delta) < 1e-12


def test_state_coords_state_round_trip(rng):
    for _ in range(200):
        psi = analytic_final_state(random_cfg(rng))
        rebuilt = coords_to_state(state_to_coords(psi)).vector()
        inv = lambda v: v[3] * v[5] * np.conj(v[4]) ** 2  # noqa: E731
        np.testing.assert_allclose(np.abs(rebuilt), np.abs(psi), atol=1e-12)
        assert abs(inv(rebuilt) - inv(psi)) < 1e-12


def test_target_validation():
    with pytest.raises(DomainError):
        TargetState(0.5, 0.5, 0.5)
    with pytest.raises(DomainError):
        TargetState(-1.0, 0.0, 0.0)


# --- phase adjustment ---

def compatible_target(base, rng):
    """Same populations and delta as ``base``, with fresh gauge phases."""
    coords = state_to_coords(base)
    return coords_to_state(coords, phi2=rng.uniform(0, TWO_PI))


def test_adjust_self_is_identity(rng):
    for _ in range(50):
        phi = rng.uniform(0, TWO_PI)
        cfg = PulseConfig(eta=rng.uniform(0, np.pi / 2), nu=rng.uniform(0, np.pi / 2), phi_b=phi)
        base = analytic_final_state(cfg)
        target = TargetState.from_vector(base)
        phases = adjust_phases(base, phi, target)
        moved = analytic_final_state(cfg.replace(phi_a=phases[0], phi_b=phases[1], phi_c=phases[2], phi_d=phases[3]))
        np.testing.assert_allclose(moved, base, atol=1e-10)


def test_adjust_reaches_target_phases(rng):
    for _ in range(100):
        phi = rng.uniform(0, TWO_PI)
        cfg = PulseConfig(eta=rng.uniform(0, np.pi / 2), nu=rng.uniform(0, np.pi / 2), phi_b=phi)
        base = analytic_final_state(cfg)
        target = compatible_target(base, rng)
        phases = adjust_phases(base, phi, target)
        moved = cfg.replace(phi_a=phases[0], phi_b=phases[1], phi_c=phases[2], phi_d=phases[3])
        assert circ(moved.phi, phi) < 1e-12
        psi = analytic_final_state(moved)
        np.testing.assert_allclose(np.abs(psi[3:]), target.amplitudes, atol=1e-10)
        assert np.all(circ(np.angle(psi[3:]), target.phases) < 1e-10)
        assert circ(state_to_coords(psi).delta, state_to_coords(base).delta) < 1e-12


def test_adjust_rejects_mismatch():
    cfg = PulseConfig(eta=0.5, nu=1.0, phi_b=2.0)
    base = analytic_final_state(cfg)
    target = TargetState.from_vector(base)
    other = TargetState(target.c1, target.c2, target.c3, target.phi1 + 0.3, target.phi2, target.phi3)
    with pytest.raises(PreconditionError):
        adjust_phases(base, 2.0, other)
    with pytest.raises(PreconditionError):
        adjust_phases(base, 2.0, TargetState(1.0, 0.0, 0.0))


def test_adjust_zero_amplitude_target():
    cfg = PulseConfig(eta=0.0, nu=np.pi / 2)  # pure |2,0>
    base = analytic_final_state(cfg)
    target = TargetState(0.0, 1.0, 0.0, 0.0, 1.3, 0.0)
    phases = adjust_phases(base, 0.0, target)
    psi = analytic_final_state(cfg.replace(phi_a=phases[0], phi_b=phases[1], phi_c=phases[2], phi_d=phases[3]))
    assert np.angle(psi[4]) == pytest.approx(1.3, abs=1e-10)


# --- inverse design ---

@pytest.fixture(scope="module")
def small_grid(tmp_path_factory):
    return DesignGrid.build(41, 41, 81, cache=tmp_path_factory.mktemp("grid") / "g.npz")


def test_design_round_trip(small_grid):
    target = TargetState.from_vector(analytic_final_state(PulseConfig(eta=0.5, nu=1.04, phi_b=3.34)))
    result = design_pulses(target, grid=small_grid)
    assert result.residual < 1e-6
    assert state_distance(analytic_final_state(result.config), target.vector()) < 1e-6


def test_design_pure_middle_level(small_grid):
    result = design_pulses(TargetState(0.0, 1.0, 0.0), grid=small_grid)
    assert result.residual < 1e-6
    ends = np.array([0.0, np.pi / 2])
    assert np.min(np.abs(result.eta - ends)) < 1e-4
    assert np.min(np.abs(result.nu - ends)) < 1e-4


def test_design_balanced_target(small_grid):
    target = coords_to_state(StateCoords(np.pi / 4, np.pi / 4, 0.0))
    assert design_pulses(target, grid=small_grid).residual < 1e-4


def test_design_record_keys(small_grid):
    target = coords_to_state(StateCoords(0.6, 0.9, 2.0))
    rec = design_pulses(target, grid=small_grid).record(target)
    assert {"eta", "nu", "phia", "phib", "residual", "theta", "chi", "delta_target"} <= rec.keys()
    assert rec["delta_target"] == pytest.approx(2.0)


def test_design_reports_best_on_failure(small_grid):
    target = coords_to_state(StateCoords(0.6, 0.9, 2.0))
    with pytest.raises(NoConvergenceError) as info:
        design_pulses(target, grid=small_grid, threshold=0.0)
    assert info.value.best.residual < 1e-6


def test_grid_cache_reused(tmp_path):
    path = tmp_path / "g.npz"
    a = DesignGrid.build(5, 5, 7, cache=path)
    assert path.exists()
    b = DesignGrid.build(5, 5, 7, cache=path)
    np.testing.assert_array_equal(a.features, b.features)
