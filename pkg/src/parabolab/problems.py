"""Concrete problem families for the window solver.

Two classes are bundled:

* reaction-diffusion systems with state-dependent diffusion,

      du/dt = a(u) Lap u + f(u) + sum_j b(u)[d_j u, d_j u],

  split as A(v) = -a(v) Lap (Neumann), F1 = f, F2 the quadratic gradient
  term; coefficients are polynomial tables in the components of u, and a(u)
  must have spectrum in the open right half plane over the state box U.

* graph-form geometric flows (surface diffusion, Willmore), clamped,

      dh/dt = G(h),   A(h) u = sum_sigma a_sigma(grad h) D^sigma u,

  with the frozen fourth-order coefficient from ``leading_coefficient`` and
  F2 defined as the computable residual F2(h) = A(h) h + G(h), never through
  symbolic expansion of the lower-order coefficients.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from itertools import product
from typing import Optional

import numpy as np

from . import geometry
from .grids import BoundaryCondition, Grid, GridFunction
from .operators import (LinearOperator, assemble_coefficient_operator, derivative,
                        neumann_laplacian, operator_from_full_matrix)
from .evolution import AbstractProblem, StateConstraintError

import scipy.sparse


class ProblemSpecError(ValueError):
    """Raised when a problem specification violates its structural rules."""


@dataclass(frozen=True)
class PolynomialMap:
    """Polynomial map R^nvars -> R^shape given by a flat term list.

    Each term is (out_index, powers, coeff): out_index indexes the output
    array, powers the monomial exponents of the state components.
    """

    shape: tuple
    nvars: int
    terms: tuple

    def __post_init__(self):
        for out_idx, powers, _ in self.terms:
            if len(out_idx) != len(self.shape):
                raise ProblemSpecError(f"output index {out_idx} does not match shape {self.shape}")
            if len(powers) != self.nvars:
                raise ProblemSpecError(f"powers {powers} do not match nvars {self.nvars}")

    def __call__(self, u_values: np.ndarray) -> np.ndarray:
        u = np.asarray(u_values, dtype=float)
        base = u.shape[:-1]
        out = np.zeros(base + self.shape)
        for out_idx, powers, coeff in self.terms:
            mono = np.full(base, float(coeff))
            for a, k in enumerate(powers):
                if k:
                    mono = mono * u[..., a] ** k
            out[(Ellipsis,) + tuple(out_idx)] += mono
        return out

    @classmethod
    def constant(cls, arr) -> "PolynomialMap":
        arr = np.asarray(arr, dtype=float)
        nvars = 1
        terms = []
        for idx in np.ndindex(arr.shape):
            if arr[idx] != 0.0:
                terms.append((idx, (0,), float(arr[idx])))
        return cls(shape=arr.shape, nvars=nvars, terms=tuple(terms))

    @classmethod
    def scalar_series(cls, coeffs, shape=(), out_index=()) -> "PolynomialMap":
        """Univariate series c0 + c1 u + c2 u^2 + ... at one output slot."""
        terms = tuple(
            (tuple(out_index), (k,), float(c)) for k, c in enumerate(coeffs) if c != 0.0
        )
        return cls(shape=tuple(shape), nvars=1, terms=terms)

    @classmethod
    def from_table(cls, table, shape, nvars) -> "PolynomialMap":
        """Build from a JSON-style nested table.

        Leaves may be a number (constant), a list of numbers (univariate
        series, only when nvars == 1), or {"terms": [{"powers": [...],
        "coeff": c}, ...]}.
        """
        shape = tuple(shape)
        terms = []

        def leaf(entry, idx):
            if isinstance(entry, (int, float)):
                if entry != 0:
                    terms.append((idx, (0,) * nvars, float(entry)))
            elif isinstance(entry, dict):
                for t in entry["terms"]:
                    powers = tuple(int(k) for k in t["powers"])
                    if len(powers) != nvars:
                        raise ProblemSpecError(f"powers {powers} do not match nvars {nvars}")
                    terms.append((idx, powers, float(t["coeff"])))
            elif isinstance(entry, list):
                if nvars != 1:
                    raise ProblemSpecError("series leaves need nvars == 1")
                for k, c in enumerate(entry):
                    if c != 0:
                        terms.append((idx, (k,), float(c)))
            else:
                raise ProblemSpecError(f"cannot interpret coefficient leaf {entry!r}")

        def walk(node, idx, depth):
            if depth == len(shape):
                leaf(node, idx)
                return
            if not isinstance(node, list) or len(node) != shape[depth]:
                raise ProblemSpecError(f"table level {depth} does not match shape {shape}")
            for i, sub in enumerate(node):
                walk(sub, idx + (i,), depth + 1)

        walk(table, (), 0)
        return cls(shape=shape, nvars=nvars, terms=tuple(terms))


def _box_samples(u_box: np.ndarray, rng_seed: int = 0, per_axis: int = 5) -> np.ndarray:
    ncomp = u_box.shape[0]
    axes = [np.linspace(lo, hi, per_axis) for lo, hi in u_box]
    if per_axis ** ncomp <= 4096:
        pts = np.array(list(product(*axes)))
    else:
        rng = np.random.default_rng(rng_seed)
        pts = rng.uniform(u_box[:, 0], u_box[:, 1], size=(512, ncomp))
        corners = np.array(list(product(*[(lo, hi) for lo, hi in u_box])))
        pts = np.vstack([pts, corners])
    return pts


@dataclass(frozen=True)
class PositivityReport:
    min_real_part: float
    ok: bool
    worst_state: tuple

    def as_dict(self) -> dict:
        return {
            "min_real_part": self.min_real_part,
            "ok": self.ok,
            "worst_state": list(self.worst_state),
        }


def spectrum_positivity_check(a: PolynomialMap, u_box, seed: int = 0) -> PositivityReport:
    """Minimum real part of the eigenvalues of a(u) over a sample of the box."""
    u_box = np.asarray(u_box, dtype=float)
    pts = _box_samples(u_box, seed)
    mats = a(pts)
    worst = None
    for k in range(len(pts)):
        ev = np.linalg.eigvals(mats[k])
        mn = float(np.min(ev.real))
        if worst is None or mn < worst[0]:
            worst = (mn, tuple(pts[k]))
    return PositivityReport(min_real_part=worst[0], ok=worst[0] > 0.0,
                            worst_state=worst[1])


@dataclass(frozen=True)
class ReactionDiffusionSpec:
    """State box, coefficient tables, and grid of one reaction-diffusion system."""

    grid: Grid
    ncomp: int
    a: PolynomialMap
    f: PolynomialMap
    b: PolynomialMap
    u_box: np.ndarray
    margin: float = 0.0
    name: str = "reaction-diffusion"

    def __post_init__(self):
        object.__setattr__(self, "u_box", np.asarray(self.u_box, dtype=float))
        N = self.ncomp
        if self.a.shape != (N, N) or self.f.shape != (N,) or self.b.shape != (N, N, N):
            raise ProblemSpecError(
                f"coefficient shapes {self.a.shape}, {self.f.shape}, {self.b.shape} "
                f"do not match {N} components"
            )
        if self.u_box.shape != (N, 2) or np.any(self.u_box[:, 0] >= self.u_box[:, 1]):
            raise ProblemSpecError("u_box must be (ncomp, 2) with lo < hi")
        rep = spectrum_positivity_check(self.a, self.u_box)
        if not rep.ok:
            raise ProblemSpecError(
                f"a(u) loses positivity on the state box: min Re eigenvalue "
                f"{rep.min_real_part:.3e} at u = {rep.worst_state}"
            )


def linear_heat_spec(grid: Grid) -> ReactionDiffusionSpec:
    """Scalar heat equation as the degenerate table (a = 1, f = 0, b = 0)."""
    return ReactionDiffusionSpec(
        grid=grid, ncomp=1,
        a=PolynomialMap.constant(np.array([[1.0]])),
        f=PolynomialMap.constant(np.zeros(1)),
        b=PolynomialMap.constant(np.zeros((1, 1, 1))),
        u_box=np.array([[-1e6, 1e6]]),
        name="heat",
    )


def rd_problem(spec: ReactionDiffusionSpec) -> AbstractProblem:
    grid = spec.grid
    N = spec.ncomp
    bc = BoundaryCondition.NEUMANN
    lap_scalar = neumann_laplacian(grid)
    lo = spec.u_box[:, 0] + spec.margin
    hi = spec.u_box[:, 1] - spec.margin

    def in_box(v: GridFunction) -> bool:
        vals = v.values
        return bool(np.all(vals >= lo) and np.all(vals <= hi))

    def require_in_box(v: GridFunction):
        if not in_box(v):
            raise StateConstraintError(f"state left the box of '{spec.name}'")

    def laplacian_fields(u: GridFunction) -> np.ndarray:
        out = np.zeros_like(u.values)
        for axis in range(grid.dim):
            sig = [0] * grid.dim
            sig[axis] = 2
            out += derivative(u, tuple(sig), bc).values
        return out

    def apply_A(v: GridFunction, u: GridFunction) -> GridFunction:
        require_in_box(v)
        av = spec.a(v.values)
        lap = laplacian_fields(u)
        return GridFunction(grid, -np.einsum("...ij,...j->...i", av, lap))

    def assemble_A(v: GridFunction) -> LinearOperator:
        require_in_box(v)
        av = spec.a(v.values).reshape(-1, N, N)
        n_nodes = grid.n_nodes
        blocks = scipy.sparse.bsr_matrix(
            (av, np.arange(n_nodes), np.arange(n_nodes + 1)),
            shape=(n_nodes * N, n_nodes * N),
        )
        big_lap = scipy.sparse.kron(lap_scalar, scipy.sparse.identity(N), format="csr")
        return operator_from_full_matrix(grid, N, bc, -(blocks @ big_lap))

    def F1(v: GridFunction) -> GridFunction:
        require_in_box(v)
        return GridFunction(grid, spec.f(v.values))

    def F2(v: GridFunction) -> GridFunction:
        require_in_box(v)
        bv = spec.b(v.values)
        out = np.zeros_like(v.values)
        for axis in range(grid.dim):
            sig = [0] * grid.dim
            sig[axis] = 1
            dv = derivative(v, tuple(sig), bc).values
            out += np.einsum("...iab,...a,...b->...i", bv, dv, dv)
        return GridFunction(grid, out)

    return AbstractProblem(
        assemble_A=assemble_A, F1=F1, F2=F2, bc=bc, state_constraint=in_box,
        apply_A=apply_A, order="second", ncomp=N, name=spec.name,
    )


def rd_divergence_oracle(spec: ReactionDiffusionSpec, u: GridFunction) -> GridFunction:
    """Conservative-form discretization div(a(u) grad u) for scalar problems.

    Finite-volume fluxes with arithmetic-mean face coefficients and zero
    boundary flux; the trapezoid-weighted total is exactly zero (telescoping),
    which is the mass-conservation yardstick for the nondivergence solver.
    """
    if spec.ncomp != 1:
        raise ProblemSpecError("divergence oracle is scalar-only")
    grid = u.grid
    h = grid.h
    vals = u.scalar
    a_vals = spec.a(u.values)[..., 0, 0]
    out = np.zeros_like(vals)
    w1 = np.full(grid.nodes_per_axis, h)
    w1[0] = w1[-1] = h / 2.0
    for axis in range(grid.dim):
        v = np.moveaxis(vals, axis, 0)
        a = np.moveaxis(a_vals, axis, 0)
        o = np.moveaxis(out, axis, 0)
        a_face = 0.5 * (a[1:] + a[:-1])
        flux = a_face * (v[1:] - v[:-1]) / h
        shape_pad = (1,) + flux.shape[1:]
        flux_ext = np.concatenate([np.zeros(shape_pad), flux, np.zeros(shape_pad)], axis=0)
        vol = w1.reshape((-1,) + (1,) * (flux.ndim - 1))
        o += (flux_ext[1:] - flux_ext[:-1]) / vol
    return GridFunction.from_scalar(grid, out)


@dataclass(frozen=True)
class FlowSpec:
    grid: Grid
    kind: str
    name: str = ""

    def __post_init__(self):
        if self.kind not in ("surface_diffusion", "willmore"):
            raise ProblemSpecError(
                f"kind must be 'surface_diffusion' or 'willmore', got {self.kind!r}"
            )
        if not self.name:
            object.__setattr__(self, "name", self.kind)


def _fourth_order_coeffs(grid: Grid, h: GridFunction) -> dict:
    """Per-multi-index nodal coefficients of A(h) from the rank-4 tensor."""
    g = np.stack(
        [derivative(h, _unit_sigma(i, grid.dim), BoundaryCondition.CLAMPED).scalar
         for i in range(grid.dim)],
        axis=-1,
    )
    a4 = geometry.leading_coefficient(g)
    coeffs: dict = {}
    for idx in product(range(grid.dim), repeat=4):
        sigma = tuple(sum(1 for i in idx if i == ax) for ax in range(grid.dim))
        c = a4[(Ellipsis,) + idx]
        if sigma in coeffs:
            coeffs[sigma] = coeffs[sigma] + c
        else:
            coeffs[sigma] = c.copy()
    return coeffs


def _unit_sigma(axis: int, dim: int) -> tuple:
    sig = [0] * dim
    sig[axis] = 1
    return tuple(sig)


def flow_problem(spec: FlowSpec) -> AbstractProblem:
    grid = spec.grid
    bc = BoundaryCondition.CLAMPED
    rhs_fn = (geometry.surface_diffusion_rhs if spec.kind == "surface_diffusion"
              else geometry.willmore_rhs)

    def apply_A(hfield: GridFunction, u: GridFunction) -> GridFunction:
        coeffs = _fourth_order_coeffs(grid, hfield)
        out = np.zeros(grid.shape)
        for sigma, c in coeffs.items():
            out += c * derivative(u, sigma, bc).scalar
        return GridFunction.from_scalar(grid, out)

    def assemble_A(hfield: GridFunction) -> LinearOperator:
        return assemble_coefficient_operator(grid, _fourth_order_coeffs(grid, hfield), bc)

    def F1(_h: GridFunction) -> GridFunction:
        return GridFunction.zeros(grid, 1)

    def F2(hfield: GridFunction) -> GridFunction:
        return apply_A(hfield, hfield) + rhs_fn(hfield, bc)

    return AbstractProblem(
        assemble_A=assemble_A, F1=F1, F2=F2, bc=bc, apply_A=apply_A,
        order="fourth", ncomp=1, name=spec.name,
    )
