"""Frozen-coefficient Picard iteration on time windows, window gluing, and
long-time diagnostics.

One window of the solve freezes the leading operator at the window's initial
state u1 and iterates the affine map

    T(v):  du/dt + A(u1) u = F1(v) + F2(v) + (A(u1) - A(v)) v,  u(0) = u1,

whose fixed point solves the quasilinear problem on (0, T].  Residuals are
measured in the weighted solution norm E1mu with window-local time; an
empirical contraction factor >= 1 (or any evaluation failure) halves the
window and restarts.  ``continue_solution`` glues accepted windows until a
horizon, a norm threshold, or window collapse, reporting a lower bound for
the existence time in the latter cases.

Time stepping is implicit Euler on the graded grid t_k = T (k/K)^gamma with
gamma = max(1, 1/(mu - 1/p)); a spectral stepper (exact exponential plus a
phi1 Duhamel term in the frozen operator's eigenbasis) is available for
symmetric scalar operators and makes window gluing exact up to roundoff.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
import scipy.sparse
import scipy.sparse.linalg

from .grids import BoundaryCondition, Grid, GridFunction
from .norms import (E1mu_norm, WeightedTrajectory, difference, lq_norm, proxy_norm,
                    x1_norm)
from .operators import (LinearOperator, SolverError, SpectralProxy, eigendecompose,
                        reference_operator)


class StateConstraintError(ValueError):
    """A state left the admissible region during evaluation."""


class NonconvergenceError(RuntimeError):
    def __init__(self, message: str, halvings: int = 0, residuals=()):
        super().__init__(message)
        self.halvings = halvings
        self.residuals = tuple(residuals)


def _always_admissible(_u: GridFunction) -> bool:
    return True


@dataclass
class AbstractProblem:
    """Quasilinear problem in the split form du/dt + A(u) u = F1(u) + F2(u).

    ``assemble_A`` must return the frozen leading operator as a matrix;
    ``apply_A`` is an optional mat-free version used inside the rhs loop.
    ``state_constraint`` guards coefficient evaluation (the open set U).
    """

    assemble_A: Callable[[GridFunction], LinearOperator]
    F1: Callable[[GridFunction], GridFunction]
    F2: Callable[[GridFunction], GridFunction]
    bc: BoundaryCondition
    state_constraint: Callable[[GridFunction], bool] = _always_admissible
    apply_A: Optional[Callable[[GridFunction, GridFunction], GridFunction]] = None
    order: str = "second"
    ncomp: int = 1
    name: str = ""

    @property
    def order_int(self) -> int:
        return 2 if self.order == "second" else 4

    def apply(self, v: GridFunction, u: GridFunction) -> GridFunction:
        if self.apply_A is not None:
            return self.apply_A(v, u)
        return self.assemble_A(v).apply(u)


@dataclass
class FixedPointConfig:
    """Window solver parameters (see module docstring for semantics)."""

    window: float
    time_steps: int
    mu: float
    p: float
    q: float = 2.0
    radius: float = 1.0
    contraction_target: float = 0.5
    max_iter: int = 25
    tol: float = 1e-9
    grading: Optional[float] = None
    propagator: str = "euler"
    max_halvings: int = 20
    blowup_threshold: float = 1e6

    def __post_init__(self):
        if self.window <= 0:
            raise ValueError(f"window must be positive, got {self.window}")
        if self.time_steps < 2:
            raise ValueError(f"need at least 2 time steps, got {self.time_steps}")
        if not (0.0 < self.mu <= 1.0) or self.p <= 1.0 or self.mu <= 1.0 / self.p:
            raise ValueError(f"need 1/p < mu <= 1, got mu={self.mu}, p={self.p}")
        if self.propagator not in ("euler", "spectral"):
            raise ValueError(f"propagator must be 'euler' or 'spectral', got {self.propagator!r}")

    def gamma(self) -> float:
        if self.grading is not None:
            return self.grading
        return max(1.0, 1.0 / (self.mu - 1.0 / self.p))


def graded_times(T: float, steps: int, gamma: float) -> np.ndarray:
    """t_k = T (k/K)^gamma, k = 0..K; gamma = 1 recovers the uniform grid."""
    k = np.arange(steps + 1, dtype=float)
    return T * (k / steps) ** gamma


class _EulerStepper:
    def __init__(self, A0: LinearOperator, times: np.ndarray):
        self.A0 = A0
        self.times = times
        n = A0.n_active
        eye = scipy.sparse.identity(n, format="csc")
        acsc = A0.matrix.tocsc()
        self.solvers = []
        for dt in np.diff(times):
            try:
                self.solvers.append(scipy.sparse.linalg.factorized(eye + dt * acsc))
            except RuntimeError as exc:
                raise SolverError(f"factorization of I + dt*A failed: {exc}") from exc

    def run(self, u_init: np.ndarray, rhs: Optional[list]) -> list:
        us = [u_init]
        dts = np.diff(self.times)
        for k, solve in enumerate(self.solvers):
            b = us[-1] if rhs is None else us[-1] + dts[k] * rhs[k + 1]
            us.append(solve(b))
        return us


def _phi1(z: np.ndarray) -> np.ndarray:
    out = np.empty_like(z)
    small = np.abs(z) < 1e-8
    out[small] = 1.0 + z[small] / 2.0
    zs = z[~small]
    out[~small] = np.expm1(zs) / zs
    return out


class _SpectralStepper:
    """Exact exponential for the frozen part, phi1 (exponential-integrator)
    treatment of the rhs; exact for rhs = 0 and for constant rhs."""

    def __init__(self, A0: LinearOperator, times: np.ndarray):
        self.A0 = A0
        self.times = times
        self.proxy = eigendecompose(A0, symmetric=True)
        self.lam = self.proxy.eigenvalues
        self.wmodes = self.proxy.modes * A0.weights[:, None]

    def _modal(self, vec: np.ndarray) -> np.ndarray:
        return self.wmodes.T @ vec

    def run(self, u_init: np.ndarray, rhs: Optional[list]) -> list:
        c = self._modal(u_init)
        us = [u_init]
        for k, dt in enumerate(np.diff(self.times)):
            decay = np.exp(-self.lam * dt)
            c = decay * c
            if rhs is not None:
                c = c + dt * _phi1(-self.lam * dt) * self._modal(rhs[k + 1])
            us.append(self.proxy.modes @ c)
        return us


@dataclass
class _Machinery:
    A0: LinearOperator
    times: np.ndarray
    stepper: object


def _build_machinery(prob: AbstractProblem, u_freeze: GridFunction,
                     times: np.ndarray, cfg: FixedPointConfig) -> _Machinery:
    if not prob.state_constraint(u_freeze):
        raise StateConstraintError("freeze state outside the admissible region")
    A0 = prob.assemble_A(u_freeze)
    if cfg.propagator == "spectral":
        stepper = _SpectralStepper(A0, times)
    else:
        stepper = _EulerStepper(A0, times)
    return _Machinery(A0=A0, times=times, stepper=stepper)


def _assemble_trajectory(mach: _Machinery, vecs: list, rhs: Optional[list],
                         cfg: FixedPointConfig) -> WeightedTrajectory:
    A0 = mach.A0
    times = mach.times
    states = [A0.extend(v) for v in vecs]
    dts = np.diff(times)
    derivs = []
    r0 = rhs[0] if rhs is not None else 0.0
    derivs.append(A0.extend(r0 - A0.matrix @ vecs[0]))
    for k in range(1, len(vecs)):
        derivs.append(A0.extend((vecs[k] - vecs[k - 1]) / dts[k - 1]))
    return WeightedTrajectory(times, tuple(states), tuple(derivs), cfg.mu, cfg.p)


def reference_solution(u0: GridFunction, prob: AbstractProblem, cfg: FixedPointConfig,
                       times: Optional[np.ndarray] = None) -> WeightedTrajectory:
    """Trajectory of the frozen homogeneous problem dw/dt + A(u0) w = 0, w(0) = u0."""
    if times is None:
        times = graded_times(cfg.window, cfg.time_steps, cfg.gamma())
    mach = _build_machinery(prob, u0, times, cfg)
    vecs = mach.stepper.run(mach.A0.restrict(u0), None)
    return _assemble_trajectory(mach, vecs, None, cfg)


def _picard_rhs(v: WeightedTrajectory, prob: AbstractProblem,
                A0: LinearOperator) -> list:
    rhs = []
    for state in v.states:
        if not prob.state_constraint(state):
            raise StateConstraintError("iterate left the admissible region")
        f = prob.F1(state) + prob.F2(state) + A0.apply(state) - prob.apply(state, state)
        if not np.all(np.isfinite(f.values)):
            raise StateConstraintError("non-finite right-hand side")
        rhs.append(A0.restrict(f))
    return rhs


def picard_map(v: WeightedTrajectory, u1: GridFunction, u0: GridFunction,
               prob: AbstractProblem, cfg: FixedPointConfig,
               _mach: Optional[_Machinery] = None) -> WeightedTrajectory:
    """One application of the frozen-coefficient solve map T (see module docs)."""
    mach = _mach
    if mach is None:
        mach = _build_machinery(prob, u0, v.times, cfg)
    rhs = _picard_rhs(v, prob, mach.A0)
    vecs = mach.stepper.run(mach.A0.restrict(u1), rhs)
    return _assemble_trajectory(mach, vecs, rhs, cfg)


@dataclass
class SolverWindowState:
    converged: bool
    window: float
    halvings: int
    iterations: int
    residuals: tuple
    contraction_factors: tuple
    trajectory: Optional[WeightedTrajectory]
    message: str = ""

    def summary(self) -> dict:
        return {
            "converged": self.converged,
            "window": self.window,
            "halvings": self.halvings,
            "iterations": self.iterations,
            "residuals": list(self.residuals),
            "contraction_factors": list(self.contraction_factors),
            "message": self.message,
        }


def fixed_point_solve(u1: GridFunction, prob: AbstractProblem,
                      cfg: FixedPointConfig) -> SolverWindowState:
    """Iterate T to tolerance on one window, halving the window on stall."""
    if not prob.state_constraint(u1):
        raise StateConstraintError("initial state outside the admissible region")
    T = cfg.window
    halvings = 0
    last_residuals: tuple = ()
    last_message = ""
    while halvings <= cfg.max_halvings:
        times = graded_times(T, cfg.time_steps, cfg.gamma())
        stalled = False
        residuals: list = []
        factors: list = []
        try:
            mach = _build_machinery(prob, u1, times, cfg)
            v = reference_solution(u1, prob, cfg, times=times)
        except (SolverError, StateConstraintError) as exc:
            last_message = f"reference solve failed: {exc}"
            stalled = True
            v = None
        iterations = 0
        if not stalled:
            for iterations in range(1, cfg.max_iter + 1):
                try:
                    u = picard_map(v, u1, u1, prob, cfg, _mach=mach)
                except (SolverError, StateConstraintError) as exc:
                    last_message = f"iteration failed: {exc}"
                    stalled = True
                    break
                r = E1mu_norm(difference(u, v), q=cfg.q, order=prob.order_int, bc=prob.bc)
                if not math.isfinite(r):
                    last_message = "non-finite residual"
                    stalled = True
                    break
                residuals.append(r)
                if len(residuals) >= 2 and residuals[-2] > 0.0:
                    fac = r / residuals[-2]
                    factors.append(fac)
                    if fac >= 1.0:
                        last_message = f"contraction factor {fac:.3g} >= 1"
                        stalled = True
                        break
                v = u
                if r <= cfg.tol:
                    return SolverWindowState(
                        converged=True, window=T, halvings=halvings,
                        iterations=iterations, residuals=tuple(residuals),
                        contraction_factors=tuple(factors), trajectory=v,
                    )
            else:
                last_message = f"tolerance not reached in {cfg.max_iter} iterations"
        last_residuals = tuple(residuals)
        T /= 2.0
        halvings += 1
    raise NonconvergenceError(
        f"window collapsed after {cfg.max_halvings} halvings: {last_message}",
        halvings=cfg.max_halvings, residuals=last_residuals,
    )


@dataclass
class ContinuationState:
    windows: list
    t_plus_estimate: float
    blow_up: bool
    reason: Optional[str]
    trajectory: Optional[WeightedTrajectory]

    def summary(self) -> dict:
        return {
            "windows": [w.summary() for w in self.windows],
            "t_plus_estimate": (self.t_plus_estimate
                                if math.isfinite(self.t_plus_estimate) else "inf"),
            "blow_up": self.blow_up,
            "reason": self.reason,
        }


def continue_solution(u0: GridFunction, prob: AbstractProblem, cfg: FixedPointConfig,
                      horizon: float, t0: float = 0.0,
                      on_window: Optional[Callable] = None) -> ContinuationState:
    """Glue solver windows from t0 until the horizon or until breakdown.

    Each new window freezes at (and restarts from) the previous endpoint; the
    glued trajectory keeps a single sample at each joint.  On breakdown
    (window collapse, constraint violation, norm threshold), ``blow_up`` is
    set and ``t_plus_estimate`` is the reached time, a certified lower bound
    for the existence time; otherwise it is +inf as far as this run can see.
    ``on_window(index, t_start, window_state)`` fires after each accepted
    window, e.g. for checkpointing.
    """
    if horizon <= t0:
        raise ValueError(f"horizon {horizon} must exceed the start time {t0}")
    t = t0
    u = u0
    windows: list = []
    blow_up = False
    reason = None
    times_all = [t0]
    states_all = [u0]
    derivs_all: Optional[list] = None
    while t < horizon - 1e-12 * max(1.0, horizon):
        wcfg = dataclasses.replace(cfg, window=min(cfg.window, horizon - t))
        try:
            st = fixed_point_solve(u, prob, wcfg)
        except NonconvergenceError as exc:
            blow_up = True
            reason = f"window collapse: {exc}"
            break
        except StateConstraintError as exc:
            blow_up = True
            reason = f"state constraint: {exc}"
            break
        windows.append(st)
        traj = st.trajectory
        joint_gap = (traj.states[0] - u).sup_norm()
        if joint_gap > 1e-8 * max(1.0, u.sup_norm()):
            raise SolverError(f"window joint mismatch {joint_gap:.3e}")
        if derivs_all is None:
            derivs_all = [traj.derivs[0]]
        t_start = t
        times_all.extend((t + traj.times[1:]).tolist())
        states_all.extend(traj.states[1:])
        derivs_all.extend(traj.derivs[1:])
        u = traj.states[-1]
        t = times_all[-1]
        if on_window is not None:
            on_window(len(windows) - 1, t_start, st)
        if u.sup_norm() >= cfg.blowup_threshold:
            blow_up = True
            reason = f"sup norm reached blow-up threshold {cfg.blowup_threshold:g}"
            break
    trajectory = None
    if len(times_all) > 1:
        # trajectory time is local to the start of this continuation run
        trajectory = WeightedTrajectory(np.array(times_all) - t0, tuple(states_all),
                                        tuple(derivs_all), cfg.mu, cfg.p)
    return ContinuationState(
        windows=windows,
        t_plus_estimate=t if blow_up else math.inf,
        blow_up=blow_up,
        reason=reason,
        trajectory=trajectory,
    )


def kappa_shift(prob: AbstractProblem, kappa: float) -> AbstractProblem:
    """Equivalent reformulation A + kappa*I, F1 + kappa*id.

    At the discrete fixed point the shift cancels identically, so converged
    trajectories agree with the unshifted problem to solver tolerance.
    """

    def assemble(v):
        return prob.assemble_A(v).shifted(kappa)

    def apply_shifted(v, u):
        return prob.apply(v, u) + kappa * u

    def f1(v):
        return prob.F1(v) + kappa * v

    return AbstractProblem(
        assemble_A=assemble, F1=f1, F2=prob.F2, bc=prob.bc,
        state_constraint=prob.state_constraint, apply_A=apply_shifted,
        order=prob.order, ncomp=prob.ncomp,
        name=f"{prob.name}+shift" if prob.name else "shifted",
    )


@dataclass(frozen=True)
class LipschitzReport:
    L_A: float
    L_F1: float
    c_dependence: float
    n_pairs: int
    skipped: int

    def as_dict(self) -> dict:
        return dataclasses.asdict(self)


def _smooth_modes(grid: Grid, bc: BoundaryCondition, ncomp: int, k: int) -> GridFunction:
    xs = grid.coords()
    if bc == BoundaryCondition.NEUMANN:
        prof = np.cos(k * np.pi * xs[0])
        for x in xs[1:]:
            prof = prof * np.cos(k * np.pi * x)
    else:
        prof = np.sin(k * np.pi * xs[0]) ** 2
        for x in xs[1:]:
            prof = prof * np.sin(k * np.pi * x) ** 2
    vals = np.repeat(prof[..., None], ncomp, axis=-1)
    return GridFunction(grid, vals)


def lipschitz_probe(prob: AbstractProblem, u_center: GridFunction,
                    cfg: FixedPointConfig, n_samples: int = 6,
                    radius: float = 0.05, seed: int = 0,
                    proxy: Optional[SpectralProxy] = None,
                    with_solutions: bool = True) -> LipschitzReport:
    """Empirical Lipschitz moduli of A and F1, and of the data-to-solution map.

    Ratios are measured between randomly perturbed states near ``u_center``:
    operator differences in L2 against proxy trace-norm distances of the
    states (theta = mu - 1/p), normalized by the top norm of fixed probe
    fields.  Identical pairs are skipped (0/0 guards).
    """
    grid = u_center.grid
    rng = np.random.default_rng(seed)
    if proxy is None:
        proxy = eigendecompose(reference_operator(grid, prob.order))
    theta_low = cfg.mu - 1.0 / cfg.p
    modes = [_smooth_modes(grid, prob.bc, u_center.ncomp, k) for k in (1, 2, 3)]
    samples = []
    skipped = 0
    for _ in range(n_samples):
        pert = GridFunction.zeros(grid, u_center.ncomp)
        for m in modes:
            pert = pert + float(rng.uniform(-1.0, 1.0)) * m
        scale = pert.sup_norm()
        if scale > 0:
            pert = (radius / scale) * pert
        w = u_center + pert
        if prob.state_constraint(w):
            samples.append(w)
        else:
            skipped += 1
    probes = modes[:2]
    L_A = 0.0
    L_F1 = 0.0
    n_pairs = 0
    for i in range(len(samples)):
        for j in range(i + 1, len(samples)):
            d = proxy_norm(samples[i] - samples[j], theta_low, proxy)
            if d <= 0.0:
                skipped += 1
                continue
            n_pairs += 1
            for v in probes:
                num = lq_norm(prob.apply(samples[i], v) - prob.apply(samples[j], v))
                L_A = max(L_A, num / (d * x1_norm(v, 2.0, prob.order_int, prob.bc)))
            L_F1 = max(L_F1, lq_norm(prob.F1(samples[i]) - prob.F1(samples[j])) / d)
    c_dep = 0.0
    if with_solutions and len(samples) >= 2:
        base = fixed_point_solve(u_center, prob, cfg)
        for w in samples[:2]:
            d = proxy_norm(w - u_center, theta_low, proxy)
            if d <= 0.0:
                continue
            other = fixed_point_solve(w, prob, cfg)
            if other.window != base.window:
                continue
            dist = E1mu_norm(difference(other.trajectory, base.trajectory),
                             q=cfg.q, order=prob.order_int, bc=prob.bc)
            c_dep = max(c_dep, dist / d)
    return LipschitzReport(L_A=L_A, L_F1=L_F1, c_dependence=c_dep,
                           n_pairs=n_pairs, skipped=skipped)


@dataclass
class OmegaLimitReport:
    cluster_points: list
    diameter: float
    converged: bool
    n_clusters: int
    distances_to_final: list

    def summary(self) -> dict:
        return {
            "n_clusters": self.n_clusters,
            "diameter": self.diameter,
            "converged": self.converged,
            "distances_to_final": self.distances_to_final,
        }


def omega_limit(traj: WeightedTrajectory, sample_times, proxy: SpectralProxy,
                threshold: float = 1e-4, theta: Optional[float] = None) -> OmegaLimitReport:
    """Cluster late-time states in the trace-proxy metric.

    ``theta`` defaults to 1 - 1/p (the natural unweighted trace scale).
    Clusters come from single-linkage with the given threshold; the run is
    ``converged`` when a single cluster remains and the pairwise spread over
    the later half of the samples does not exceed that of the earlier half.
    """
    sample_times = list(sample_times)
    if len(sample_times) < 2:
        raise ValueError("need at least two sample times")
    if theta is None:
        theta = 1.0 - 1.0 / traj.p
    states = [traj.state_at(t) for t in sample_times]
    m = len(states)
    dist = np.zeros((m, m))
    for i in range(m):
        for j in range(i + 1, m):
            dist[i, j] = dist[j, i] = proxy_norm(states[i] - states[j], theta, proxy)
    parent = list(range(m))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i in range(m):
        for j in range(i + 1, m):
            if dist[i, j] <= threshold:
                parent[find(i)] = find(j)
    labels = [find(i) for i in range(m)]
    roots = sorted(set(labels), key=labels.index)
    clusters = [[i for i in range(m) if find(i) == r] for r in roots]
    half = m // 2
    spread_early = float(np.max(dist[:half or 1, :half or 1])) if half >= 1 else 0.0
    spread_late = float(np.max(dist[half:, half:]))
    final_cluster = next(c for c in clusters if (m - 1) in c)
    diameter = float(np.max(dist[np.ix_(final_cluster, final_cluster)])) if len(final_cluster) > 1 else 0.0
    converged = len(clusters) == 1 and (spread_late <= spread_early + 1e-15
                                        or diameter <= threshold)
    points = []
    for c in clusters:
        acc = states[c[0]].copy()
        for i in c[1:]:
            acc = acc + states[i]
        points.append((1.0 / len(c)) * acc)
    return OmegaLimitReport(
        cluster_points=points, diameter=diameter, converged=converged,
        n_clusters=len(clusters),
        distances_to_final=[float(dist[i, m - 1]) for i in range(m)],
    )
