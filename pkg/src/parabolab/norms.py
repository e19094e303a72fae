"""Time-weighted trajectory norms and interpolation-scale proxies.

A trajectory u on (0, T] belongs to the weighted space when t^(1-mu) u is
p-integrable; the solution norm adds the same weight on the time derivative
and on the top spatial regularity:

    ||u||_E1mu = ||u||_E0mu + ||du/dt||_E0mu + || |u|_X1 ||_{L_{p,mu}}

with |u|_X1 the sum of L_q norms of u and its derivatives up to the problem
order.  Quadrature is the trapezoid rule on the trajectory's own (graded)
time grid; the t = 0 sample carries zero weight whenever 1 - mu > 0.

Fractional interpolation spaces are represented by their q = 2 spectral
surrogate (I + L)^theta in the eigenbasis of a reference operator L
(SpectralProxy); ``verify_interpolation_inequality`` measures the constant in

    |w|_beta <= c |w|_{mu - 1/p}^(1-alpha) |w|_1^alpha,
    alpha = (beta - mu + 1/p) / (1 - mu + 1/p),

which is exactly 1 on the proxy scale (Hoelder on the spectral sums), so any
measured c must come out <= 1 up to rounding.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from itertools import product
from typing import Callable, Optional, Sequence

import numpy as np

from .grids import BoundaryCondition, Grid, GridFunction
from .operators import SpectralProxy, derivative


def weighted_time_factor(T: float, p: float, mu: float) -> float:
    """Weighted norm of a constant unit trajectory on (0, T]:

    sigma(T) = T^(1/p + 1 - mu) / (1 + (1 - mu) p)^(1/p),
    """
    if T < 0:
        raise ValueError(f"T must be >= 0, got {T}")
    return T ** (1.0 / p + 1.0 - mu) / (1.0 + (1.0 - mu) * p) ** (1.0 / p)


def lq_norm(u: GridFunction, q: float = 2.0) -> float:
    """L_q norm over the domain, Euclidean in the components."""
    if q < 1:
        raise ValueError(f"q must be >= 1, got {q}")
    w = u.grid.trapezoid_weights()
    mag = np.sqrt(np.sum(u.values ** 2, axis=-1))
    return float(np.sum(w * mag ** q) ** (1.0 / q))


def _multi_indices(dim: int, order: int):
    out = []
    rng = range(order + 1)
    for sigma in product(rng, repeat=dim):
        if 1 <= sum(sigma) <= order:
            out.append(sigma)
    return out


def x1_norm(u: GridFunction, q: float = 2.0, order: int = 2,
            bc: BoundaryCondition = BoundaryCondition.NEUMANN) -> float:
    """Top-regularity norm: L_q of u plus L_q of every D^sigma u, |sigma| <= order."""
    if order not in (2, 4):
        raise ValueError(f"order must be 2 or 4, got {order}")
    total = lq_norm(u, q)
    for sigma in _multi_indices(u.grid.dim, order):
        total += lq_norm(derivative(u, sigma, bc), q)
    return total


@dataclass(frozen=True)
class WeightedTrajectory:
    """Sampled trajectory with its weight exponents.

    times[0] must be 0 (the trace sample); the rest are strictly increasing.
    ``derivs`` may be None when only state norms are needed.
    """

    times: np.ndarray
    states: tuple
    derivs: Optional[tuple]
    mu: float
    p: float

    def __post_init__(self):
        times = np.asarray(self.times, dtype=float)
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "states", tuple(self.states))
        if self.derivs is not None:
            object.__setattr__(self, "derivs", tuple(self.derivs))
        if times.ndim != 1 or len(times) < 2:
            raise ValueError("need at least two time samples")
        if times[0] != 0.0:
            raise ValueError(f"times[0] must be 0, got {times[0]}")
        if np.any(np.diff(times) <= 0):
            raise ValueError("times must be strictly increasing")
        if len(self.states) != len(times):
            raise ValueError("states length does not match times")
        if self.derivs is not None and len(self.derivs) != len(times):
            raise ValueError("derivs length does not match times")
        grid = self.states[0].grid
        for s in self.states[1:]:
            if s.grid != grid:
                raise ValueError("states live on different grids")
        if not (0.0 < self.mu <= 1.0):
            raise ValueError(f"mu must lie in (0, 1], got {self.mu}")
        if self.p <= 1.0:
            raise ValueError(f"p must exceed 1, got {self.p}")

    @property
    def grid(self) -> Grid:
        return self.states[0].grid

    @property
    def horizon(self) -> float:
        return float(self.times[-1])

    def with_mu(self, mu: float) -> "WeightedTrajectory":
        return dataclasses.replace(self, mu=mu)

    def state_at(self, t: float) -> GridFunction:
        """Piecewise-linear interpolant of the states at time t."""
        times = self.times
        if t < times[0] - 1e-12 or t > times[-1] + 1e-12:
            raise ValueError(f"time {t} outside trajectory range [0, {times[-1]}]")
        i = int(np.searchsorted(times, t))
        if i < len(times) and times[i] == t:
            return self.states[i]
        i = min(max(i, 1), len(times) - 1)
        t0, t1 = times[i - 1], times[i]
        lam = (t - t0) / (t1 - t0)
        return self.states[i - 1] * (1.0 - lam) + self.states[i] * lam


def difference(a: WeightedTrajectory, b: WeightedTrajectory) -> WeightedTrajectory:
    """Samplewise a - b; requires identical time grids."""
    if len(a.times) != len(b.times) or np.any(a.times != b.times):
        raise ValueError("trajectories sampled on different time grids")
    states = tuple(sa - sb for sa, sb in zip(a.states, b.states))
    derivs = None
    if a.derivs is not None and b.derivs is not None:
        derivs = tuple(da - db for da, db in zip(a.derivs, b.derivs))
    return WeightedTrajectory(a.times, states, derivs, a.mu, a.p)


def _weighted_integral(times: np.ndarray, y: np.ndarray, mu: float, p: float,
                       interval) -> float:
    a, b = interval
    if a < times[0] - 1e-12 or b > times[-1] + 1e-12 or a >= b:
        raise ValueError(
            f"interval [{a}, {b}] not covered by trajectory range [{times[0]}, {times[-1]}]"
        )
    a = max(a, times[0])
    b = min(b, times[-1])
    inside = (times > a) & (times < b)
    ts = np.concatenate([[a], times[inside], [b]])
    ys = np.interp(ts, times, y)
    s = (1.0 - mu) * p
    weight = np.where(ts > 0.0, ts, 1.0) ** s
    weight[ts == 0.0] = 1.0 if s == 0.0 else 0.0
    f = weight * ys ** p
    return float(np.trapezoid(f, ts))


def weighted_Lp_norm(traj: WeightedTrajectory, spatial_norm: Callable[[GridFunction], float],
                     interval=None, use_derivs: bool = False) -> float:
    """|| t^(1-mu) N(u(t)) ||_{L_p(interval)} by trapezoid on the sample grid.

    ``spatial_norm`` maps a GridFunction to a scalar (e.g. a partial of
    lq_norm / x1_norm / proxy_norm).  Interval endpoints need not be sample
    points; the nodal norm values are interpolated linearly.
    """
    fields = traj.derivs if use_derivs else traj.states
    if fields is None:
        raise ValueError("trajectory has no stored derivatives")
    y = np.array([spatial_norm(f) for f in fields])
    if interval is None:
        interval = (traj.times[0], traj.times[-1])
    return _weighted_integral(traj.times, y, traj.mu, traj.p, interval) ** (1.0 / traj.p)


def E0mu_norm(traj: WeightedTrajectory, interval=None, q: float = 2.0) -> float:
    return weighted_Lp_norm(traj, lambda u: lq_norm(u, q), interval)


def E1mu_norm(traj: WeightedTrajectory, interval=None, q: float = 2.0,
              order: int = 2, bc: BoundaryCondition = BoundaryCondition.NEUMANN) -> float:
    """Solution-space norm: states + time derivative + top spatial regularity."""
    if traj.derivs is None:
        raise ValueError("E1mu norm needs stored time derivatives")
    part_state = weighted_Lp_norm(traj, lambda u: lq_norm(u, q), interval)
    part_deriv = weighted_Lp_norm(traj, lambda u: lq_norm(u, q), interval, use_derivs=True)
    part_top = weighted_Lp_norm(traj, lambda u: x1_norm(u, q, order, bc), interval)
    return part_state + part_deriv + part_top


def proxy_norm(u: GridFunction, theta: float, proxy: SpectralProxy) -> float:
    """|| (I + L)^theta u ||_{L2} on the spectral surrogate scale, theta in [0, 1]."""
    if not (0.0 <= theta <= 1.0):
        raise ValueError(f"theta must lie in [0, 1], got {theta}")
    if not proxy.orthonormal:
        raise ValueError("proxy norm needs an orthonormal eigenbasis")
    c = proxy.coefficients(u)
    lam = proxy.eigenvalues
    if np.any(lam < -1e-9):
        raise ValueError("proxy operator must be positive semidefinite")
    scale = (1.0 + np.clip(lam, 0.0, None)) ** theta
    return float(np.sqrt(np.sum((scale[:, None] * c) ** 2)))


@dataclass(frozen=True)
class InterpolationReport:
    lhs: float
    rhs_product: float
    alpha: float
    holds_with_c: float

    def as_dict(self) -> dict:
        return dataclasses.asdict(self)


def verify_interpolation_inequality(u: GridFunction, beta: float, mu: float, p: float,
                                    proxy: SpectralProxy) -> InterpolationReport:
    """Measure c in |u|_beta <= c |u|_{mu-1/p}^(1-alpha) |u|_1^alpha (proxy scale)."""
    theta_low = mu - 1.0 / p
    if not (0.0 < theta_low < 1.0):
        raise ValueError(f"mu - 1/p must lie in (0, 1), got {theta_low}")
    if not (theta_low < beta < 1.0):
        raise ValueError(f"beta must lie in (mu - 1/p, 1) = ({theta_low}, 1), got {beta}")
    alpha = (beta - theta_low) / (1.0 - theta_low)
    lhs = proxy_norm(u, beta, proxy)
    low = proxy_norm(u, theta_low, proxy)
    top = proxy_norm(u, 1.0, proxy)
    rhs = low ** (1.0 - alpha) * top ** alpha
    c = lhs / rhs if rhs > 0.0 else 0.0
    return InterpolationReport(lhs=lhs, rhs_product=rhs, alpha=alpha, holds_with_c=c)


@dataclass(frozen=True)
class SmoothingReport:
    delta: float
    weighted: float
    unweighted_tail: float
    inequality_holds: bool

    def as_dict(self) -> dict:
        return dataclasses.asdict(self)


def smoothing_check(traj: WeightedTrajectory, delta: float, q: float = 2.0,
                    order: int = 2,
                    bc: BoundaryCondition = BoundaryCondition.NEUMANN) -> SmoothingReport:
    """Instantaneous-gain inequality on the tail window [delta/2, delta]:

    (delta/2)^(1-mu) ||u||_E1(delta/2, delta) <= ||u||_E1mu(delta/2, delta).

    Discretely this holds panel by panel (the weight t^(1-mu) dominates its
    left-endpoint value), so a violation indicates a bookkeeping bug, not a
    borderline analytic case.
    """
    if not (0.0 < delta <= traj.horizon):
        raise ValueError(f"delta must lie in (0, {traj.horizon}], got {delta}")
    a, b = delta / 2.0, delta
    if not np.any((traj.times > a) & (traj.times < b)):
        raise ValueError(f"interval [{a}, {b}] is not resolved by the time grid")
    weighted = E1mu_norm(traj, (a, b), q=q, order=order, bc=bc)
    unweighted = E1mu_norm(traj.with_mu(1.0), (a, b), q=q, order=order, bc=bc)
    tail = (delta / 2.0) ** (1.0 - traj.mu) * unweighted
    holds = tail <= weighted * (1.0 + 1e-12) + 1e-300
    return SmoothingReport(delta=delta, weighted=weighted, unweighted_tail=tail,
                           inequality_holds=holds)
