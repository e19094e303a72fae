"""Window solver oracles.

Implicit Euler on the mirrored Laplacian is exactly diagonal on the discrete
eigenvector cos(k pi x): every step multiplies the mode by 1/(1 + lambda dt)
with lambda = (2/h^2)(1 - cos(k pi h)).  That product formula is the stepper
oracle; the spectral propagator must reproduce exp(-lambda t) instead.

The blow-up surrogate is du/dt = u^2 from the constant state c (the Laplacian
vanishes on constants): the solution c/(1 - c t) hits the threshold M at
t = (1/c)(1 - c/M).  With c = 2, M = 100 the crossing is at 0.49, and the
Picard iteration on a window of length T converges iff T is below the
existence time 1/c = 0.5, which forces the window halvings 1.0 -> 0.5 -> 0.25.
"""

from __future__ import annotations

import numpy as np
import pytest

from parabolab.evolution import (AbstractProblem, ContinuationState,
                                 FixedPointConfig, NonconvergenceError,
                                 StateConstraintError, continue_solution,
                                 fixed_point_solve, graded_times, kappa_shift,
                                 lipschitz_probe, omega_limit, picard_map,
                                 reference_solution)
from parabolab.grids import Grid, GridFunction
from parabolab.operators import eigendecompose, reference_operator
from parabolab.problems import (PolynomialMap, ReactionDiffusionSpec,
                                linear_heat_spec, rd_problem)

MU, P = 0.9, 2.0


def heat_problem(nodes=32):
    grid = Grid(1, nodes)
    return grid, rd_problem(linear_heat_spec(grid))


def square_problem(nodes=17, box=1e6):
    # du/dt = Lap u + u^2; on constants this is the scalar ODE du/dt = u^2
    grid = Grid(1, nodes)
    spec = ReactionDiffusionSpec(
        grid=grid, ncomp=1,
        a=PolynomialMap.constant(np.array([[1.0]])),
        f=PolynomialMap.scalar_series([0.0, 0.0, 1.0], shape=(1,), out_index=(0,)),
        b=PolynomialMap.constant(np.zeros((1, 1, 1))),
        u_box=np.array([[-box, box]]), name="square")
    return grid, rd_problem(spec)


def constant_state(grid, c):
    return GridFunction.from_scalar(grid, np.full(grid.shape, float(c)))


def eigenmode(grid, k, amp=1.0):
    lam = 2.0 / grid.h ** 2 * (1.0 - np.cos(k * np.pi * grid.h))
    u = GridFunction.from_scalar(grid, amp * np.cos(k * np.pi * grid.axis_coords()))
    return u, lam


# ---------------------------------------------------------------- scaffolding

def test_graded_times_values():
    assert np.allclose(graded_times(1.0, 4, 1.0), [0.0, 0.25, 0.5, 0.75, 1.0])
    assert np.allclose(graded_times(1.0, 4, 2.0), [0.0, 1 / 16, 1 / 4, 9 / 16, 1.0])
    assert graded_times(2.0, 10, 2.5)[-1] == 2.0


def test_config_validation():
    with pytest.raises(ValueError):
        FixedPointConfig(window=0.0, time_steps=10, mu=MU, p=P)
    with pytest.raises(ValueError):
        FixedPointConfig(window=0.1, time_steps=1, mu=MU, p=P)
    with pytest.raises(ValueError):
        FixedPointConfig(window=0.1, time_steps=10, mu=0.4, p=2.0)  # mu <= 1/p
    with pytest.raises(ValueError):
        FixedPointConfig(window=0.1, time_steps=10, mu=MU, p=P, propagator="rk4")
    cfg = FixedPointConfig(window=0.1, time_steps=10, mu=MU, p=P)
    assert cfg.gamma() == pytest.approx(1.0 / (MU - 1.0 / P))
    assert FixedPointConfig(window=0.1, time_steps=10, mu=1.0, p=P).gamma() == 2.0
    assert FixedPointConfig(window=0.1, time_steps=10, mu=MU, p=P,
                            grading=1.0).gamma() == 1.0


# ---------------------------------------------------------------- steppers

def test_euler_eigenmode_product_formula():
    grid, prob = heat_problem(32)
    u0, lam = eigenmode(grid, 3)
    cfg = FixedPointConfig(window=0.01, time_steps=16, mu=MU, p=P)
    traj = reference_solution(u0, prob, cfg)
    dts = np.diff(traj.times)
    factor = 1.0
    for m, dt in enumerate(dts, start=1):
        factor /= 1.0 + lam * dt
        assert np.allclose(traj.states[m].values, factor * u0.values,
                           rtol=1e-12, atol=1e-13)
    # initial slope is -A u0 = -lambda u0
    assert np.allclose(traj.derivs[0].values, -lam * u0.values, rtol=1e-9)


def test_spectral_stepper_exact_exponential():
    grid, prob = heat_problem(32)
    u0, lam = eigenmode(grid, 2, amp=0.5)
    cfg = FixedPointConfig(window=0.05, time_steps=10, mu=MU, p=P,
                           propagator="spectral")
    traj = reference_solution(u0, prob, cfg)
    for m, t in enumerate(traj.times):
        assert np.allclose(traj.states[m].values, np.exp(-lam * t) * u0.values,
                           rtol=1e-11, atol=1e-13)


# ---------------------------------------------------------------- picard

def test_linear_problem_converges_immediately():
    # frozen operator equals the true operator, so T(v) is already the fixed
    # point and the first residual vanishes to roundoff
    grid, prob = heat_problem(32)
    u0, _ = eigenmode(grid, 1, amp=0.5)
    cfg = FixedPointConfig(window=0.02, time_steps=12, mu=MU, p=P, tol=1e-8)
    st = fixed_point_solve(u0, prob, cfg)
    assert st.converged
    assert st.halvings == 0
    assert st.iterations <= 2
    assert st.window == cfg.window
    assert st.trajectory is not None
    assert st.residuals[-1] <= cfg.tol
    d = st.summary()
    assert d["converged"] is True and d["halvings"] == 0


def test_picard_map_fixed_point_residual():
    grid, prob = heat_problem(24)
    u0, _ = eigenmode(grid, 1, amp=0.3)
    cfg = FixedPointConfig(window=0.02, time_steps=10, mu=MU, p=P)
    v = reference_solution(u0, prob, cfg)
    u = picard_map(v, u0, u0, prob, cfg)
    gap = max((a - b).sup_norm() for a, b in zip(u.states, v.states))
    assert gap < 1e-10


def test_kappa_shift_equivalence():
    grid, prob = heat_problem(24)
    u0, _ = eigenmode(grid, 2, amp=0.4)
    cfg = FixedPointConfig(window=0.02, time_steps=10, mu=MU, p=P, tol=1e-11)
    base = fixed_point_solve(u0, prob, cfg)
    shifted = fixed_point_solve(u0, kappa_shift(prob, 3.0), cfg)
    assert shifted.converged
    gap = max((a - b).sup_norm() for a, b in
              zip(base.trajectory.states, shifted.trajectory.states))
    assert gap < 1e-6


def test_initial_state_outside_box_raises():
    grid, prob = square_problem(nodes=9, box=2.0)
    with pytest.raises(StateConstraintError):
        fixed_point_solve(constant_state(grid, 3.0),  prob,
                          FixedPointConfig(window=0.01, time_steps=4, mu=MU, p=P))


# ---------------------------------------------------------------- halvings

def test_hostile_window_halves_until_contraction():
    grid, prob = square_problem()
    u0 = constant_state(grid, 2.0)
    cfg = FixedPointConfig(window=1.0, time_steps=20, mu=MU, p=P,
                           max_iter=40, tol=1e-8, blowup_threshold=1e12)
    st = fixed_point_solve(u0, prob, cfg)
    assert st.converged
    assert st.halvings == 2        # 1.0 and 0.5 exceed the existence time 0.5
    assert st.window == pytest.approx(0.25)
    assert all(f < 1.0 for f in st.contraction_factors)


def test_window_collapse_raises_nonconvergence():
    grid, prob = square_problem()
    u0 = constant_state(grid, 2.0)
    cfg = FixedPointConfig(window=1.0, time_steps=20, mu=MU, p=P,
                           max_iter=40, tol=1e-8, max_halvings=0,
                           blowup_threshold=1e12)
    with pytest.raises(NonconvergenceError) as exc:
        fixed_point_solve(u0, prob, cfg)
    assert exc.value.halvings == 0


# ---------------------------------------------------------------- continuation

def test_continuation_glues_windows():
    grid, prob = heat_problem(24)
    u0, _ = eigenmode(grid, 1, amp=0.5)
    cfg = FixedPointConfig(window=0.05, time_steps=8, mu=MU, p=P, tol=1e-9)
    seen = []
    st = continue_solution(u0, prob, cfg, horizon=0.15,
                           on_window=lambda i, t, w: seen.append((i, t)))
    assert not st.blow_up
    assert st.t_plus_estimate == np.inf
    assert len(st.windows) == 3
    traj = st.trajectory
    assert len(traj.times) == 3 * 8 + 1
    assert np.all(np.diff(traj.times) > 0)
    assert traj.times[-1] == pytest.approx(0.15)
    assert [i for i, _ in seen] == [0, 1, 2]
    assert np.allclose([t for _, t in seen], [0.0, 0.05, 0.10])
    assert "inf" == st.summary()["t_plus_estimate"]


def test_continuation_from_interior_start_time():
    grid, prob = heat_problem(24)
    u0, _ = eigenmode(grid, 1, amp=0.5)
    cfg = FixedPointConfig(window=0.05, time_steps=8, mu=MU, p=P)
    seen = []
    st = continue_solution(u0, prob, cfg, horizon=0.2, t0=0.1,
                           on_window=lambda i, t, w: seen.append(t))
    # trajectory time is local, checkpoint times are absolute
    assert st.trajectory.times[0] == 0.0
    assert st.trajectory.times[-1] == pytest.approx(0.1)
    assert np.allclose(seen, [0.1, 0.15])
    with pytest.raises(ValueError):
        continue_solution(u0, prob, cfg, horizon=0.05, t0=0.1)


def test_blow_up_detection_time():
    grid, prob = square_problem()
    u0 = constant_state(grid, 2.0)
    cfg = FixedPointConfig(window=0.02, time_steps=20, mu=MU, p=P,
                           max_iter=40, tol=1e-10, blowup_threshold=100.0)
    st = continue_solution(u0, prob, cfg, horizon=1.0)
    assert st.blow_up
    assert "threshold" in st.reason
    # threshold crossing of c/(1 - c t) at (1/c)(1 - c/M) = 0.49
    assert st.t_plus_estimate == pytest.approx(0.49, abs=0.03)
    assert st.trajectory.states[-1].sup_norm() >= 100.0
    assert len(st.windows) >= 10


def test_constraint_violation_flags_blow_up():
    grid, prob = square_problem(box=10.0)
    u0 = constant_state(grid, 2.0)
    cfg = FixedPointConfig(window=0.02, time_steps=20, mu=MU, p=P,
                           max_iter=40, tol=1e-10, blowup_threshold=1e6)
    st = continue_solution(u0, prob, cfg, horizon=1.0)
    assert st.blow_up
    # the box is hit near c/(1 - c t) = 10 - margin, i.e. t ~ 0.4
    assert 0.3 < st.t_plus_estimate < 0.5


# ---------------------------------------------------------------- diagnostics

def test_omega_limit_heat_reaches_mean():
    grid, prob = heat_problem(64)
    x = grid.axis_coords()
    u0 = GridFunction.from_scalar(grid, 1.0 + 0.5 * np.cos(np.pi * x))
    cfg = FixedPointConfig(window=0.25, time_steps=30, mu=MU, p=P,
                           propagator="spectral", tol=1e-10)
    st = continue_solution(u0, prob, cfg, horizon=1.0)
    proxy = eigendecompose(reference_operator(grid, "second"))
    rep = omega_limit(st.trajectory, np.linspace(0.9, 1.0, 6), proxy, threshold=1e-4)
    assert rep.converged
    assert rep.n_clusters == 1
    assert rep.diameter < 2e-4
    point = rep.cluster_points[0]
    assert np.max(np.abs(point.scalar - 1.0)) < 1e-4
    # early samples are still moving: every sample is its own cluster
    early = omega_limit(st.trajectory, np.linspace(0.05, 0.2, 5), proxy, threshold=1e-4)
    assert not early.converged
    assert early.n_clusters == 5
    with pytest.raises(ValueError):
        omega_limit(st.trajectory, [0.5], proxy)


def test_lipschitz_probe_linear_problem():
    grid, prob = heat_problem(24)
    u0 = constant_state(grid, 1.0)
    cfg = FixedPointConfig(window=0.02, time_steps=8, mu=MU, p=P, tol=1e-9)
    rep = lipschitz_probe(prob, u0, cfg, n_samples=4, seed=1)
    assert rep.L_A == 0.0          # coefficient does not depend on the state
    assert rep.L_F1 == 0.0
    assert rep.n_pairs > 0
    assert np.isfinite(rep.c_dependence)


def test_lipschitz_probe_sees_state_dependence():
    grid = Grid(1, 24)
    spec = ReactionDiffusionSpec(
        grid=grid, ncomp=1,
        a=PolynomialMap.scalar_series([1.0, 0.0, 1.0], shape=(1, 1), out_index=(0, 0)),
        f=PolynomialMap.scalar_series([0.0, 1.0], shape=(1,), out_index=(0,)),
        b=PolynomialMap.constant(np.zeros((1, 1, 1))),
        u_box=np.array([[-2.0, 2.0]]), name="rd")
    prob = rd_problem(spec)
    cfg = FixedPointConfig(window=0.01, time_steps=8, mu=MU, p=P)
    rep = lipschitz_probe(prob, constant_state(grid, 0.5), cfg,
                          n_samples=4, seed=2, with_solutions=False)
    assert rep.L_A > 0.0
    assert rep.L_F1 > 0.0
    assert rep.c_dependence == 0.0
