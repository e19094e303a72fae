"""Principal symbol positivity and the boundary (Lopatinskii-Shapiro) check
for the frozen fourth-order graph operator.

Interior: with beta^2 = 1/(1 + |g|^2), g = grad v frozen at a point, the
principal symbol is

    a(g, xi) = (|xi|^2 - beta^2 (g . xi)^2)^2 >= beta^4 |xi|^4,

the right-hand side being the sharp lower bound (attained for xi parallel
to g); the classical coarser bound (1 - |g|/sqrt(1+|g|^2))^2 is also
reported for comparison.

Boundary: after freezing and flattening, the ODE in the normal variable is

    b^2 h - 2 b h'' + h'''' = -lambda h,   Re lambda >= 0,

with characteristic quartic z^4 - 2 b z^2 + (b^2 + lambda) = 0, i.e.
(z^2 - b)^2 = -lambda.  For lambda != 0 exactly two roots have negative real
part and the solvability determinant is |z2 - z1|; at lambda = 0 the stable
root -sqrt(b) is double and the (h, h') initial-value matrix for the basis
{e^{z1 x}, x e^{z1 x}} has determinant 1.
"""

from __future__ import annotations

import cmath
from dataclasses import dataclass

import numpy as np


def principal_symbol(grad_v, xi) -> float:
    """(|xi|^2 - beta^2 (g.xi)^2)^2 with beta^2 = 1/(1+|g|^2)."""
    g = np.asarray(grad_v, dtype=float)
    xi = np.asarray(xi, dtype=float)
    if g.shape != xi.shape:
        raise ValueError(f"gradient shape {g.shape} != direction shape {xi.shape}")
    beta2 = 1.0 / (1.0 + float(np.dot(g, g)))
    val = float(np.dot(xi, xi)) - beta2 * float(np.dot(g, xi)) ** 2
    return val * val


def coarse_ellipticity_bound(grad_norm: float) -> float:
    """(1 - g/sqrt(1+g^2))^2, the coarser pointwise lower bound at |grad| = g."""
    g = float(grad_norm)
    return (1.0 - g / np.sqrt(1.0 + g * g)) ** 2


def sharp_ellipticity_bound(grad_norm: float) -> float:
    """beta^4 = 1/(1+g^2)^2, the sharp lower bound at |grad| = g."""
    g = float(grad_norm)
    return 1.0 / (1.0 + g * g) ** 2


def _directions(dim: int, count: int) -> np.ndarray:
    if dim == 1:
        return np.array([[1.0], [-1.0]])
    if count < 16:
        raise ValueError(f"need at least 16 directions, got {count}")
    ang = np.linspace(0.0, 2.0 * np.pi, count, endpoint=False)
    return np.stack([np.cos(ang), np.sin(ang)], axis=-1)


@dataclass(frozen=True)
class EllipticityReport:
    min_ratio: float
    argmin_sample: int
    argmin_direction: tuple
    max_gradient: float
    coarse_bound: float
    sharp_bound: float

    def as_dict(self) -> dict:
        return {
            "min_ratio": self.min_ratio,
            "argmin_sample": self.argmin_sample,
            "argmin_direction": list(self.argmin_direction),
            "max_gradient": self.max_gradient,
            "coarse_bound": self.coarse_bound,
            "sharp_bound": self.sharp_bound,
        }


def ellipticity_scan(grad_samples, n_directions: int = 64) -> EllipticityReport:
    """Minimum of the symbol over gradient samples x unit directions.

    ``grad_samples`` is (m, dim).  Ratios are a(g, xi)/|xi|^4 = a(g, xi) on
    unit directions; both lower bounds are evaluated at the largest sampled
    gradient so the report can assert min_ratio >= bound.
    """
    g = np.atleast_2d(np.asarray(grad_samples, dtype=float))
    m, dim = g.shape
    dirs = _directions(dim, n_directions)
    gnorm2 = np.sum(g ** 2, axis=1)
    beta2 = 1.0 / (1.0 + gnorm2)
    dots = g @ dirs.T                                 # (m, ndir)
    vals = (1.0 - beta2[:, None] * dots ** 2) ** 2    # |xi| = 1
    idx = np.unravel_index(np.argmin(vals), vals.shape)
    gmax = float(np.sqrt(np.max(gnorm2)))
    return EllipticityReport(
        min_ratio=float(vals[idx]),
        argmin_sample=int(idx[0]),
        argmin_direction=tuple(dirs[idx[1]]),
        max_gradient=gmax,
        coarse_bound=coarse_ellipticity_bound(gmax),
        sharp_bound=sharp_ellipticity_bound(gmax),
    )


@dataclass(frozen=True)
class LSReport:
    b: float
    lam: complex
    roots_neg: tuple
    confluent: bool
    det_abs: float
    residuals: tuple

    def as_dict(self) -> dict:
        return {
            "b": self.b,
            "lambda": [self.lam.real, self.lam.imag],
            "roots_neg": [[z.real, z.imag] for z in self.roots_neg],
            "confluent": self.confluent,
            "det_abs": self.det_abs,
            "residuals": list(self.residuals),
        }


def _quartic_residual(z: complex, b: float, lam: complex) -> float:
    num = abs(z ** 4 - 2.0 * b * z ** 2 + (b * b + lam))
    scale = abs(z) ** 4 + 2.0 * b * abs(z) ** 2 + abs(b * b + lam)
    return num / max(scale, 1e-300)


def ls_roots(b: float, lam: complex) -> LSReport:
    """Stable roots of (z^2 - b)^2 = -lambda for b > 0, Re lambda >= 0.

    Exactly two roots have Re z < 0 when lambda != 0 (no root can touch the
    imaginary axis there, since z purely imaginary forces lambda real
    negative); at lambda = 0 the stable root -sqrt(b) is double.
    """
    b = float(b)
    lam = complex(lam)
    if b <= 0.0:
        raise ValueError(f"b must be positive, got {b}")
    if lam.real < 0.0:
        raise ValueError(f"Re lambda must be >= 0, got {lam}")
    if lam == 0:
        z = -cmath.sqrt(b)
        roots = (z, z)
        confluent = True
    else:
        s = cmath.sqrt(-lam)
        roots = (-cmath.sqrt(b + s), -cmath.sqrt(b - s))
        confluent = False
        for z in roots:
            if z.real >= 0.0:
                raise ArithmeticError(
                    f"stable-root selection failed at b={b}, lambda={lam}: root {z}"
                )
    residuals = tuple(_quartic_residual(z, b, lam) for z in roots)
    report = LSReport(b=b, lam=lam, roots_neg=roots, confluent=confluent,
                      det_abs=0.0, residuals=residuals)
    return LSReport(b=b, lam=lam, roots_neg=roots, confluent=confluent,
                    det_abs=ls_determinant(report), residuals=residuals)


def ls_determinant(report: LSReport) -> float:
    """|det| of the boundary-value matrix for the stable solution basis.

    Distinct roots: basis {e^{z1 x}, e^{z2 x}}, matrix [[1, 1], [z1, z2]],
    |det| = |z2 - z1|.  Confluent: basis {e^{z1 x}, x e^{z1 x}}, matrix
    [[1, 0], [z1, 1]], det = 1.
    """
    if report.confluent:
        return 1.0
    z1, z2 = report.roots_neg
    return abs(z2 - z1)


@dataclass(frozen=True)
class LSScanReport:
    min_normalized: float
    argmin_b: float
    argmin_lambda: complex
    n_evaluated: int
    max_residual: float

    def as_dict(self) -> dict:
        return {
            "min_normalized": self.min_normalized,
            "argmin_b": self.argmin_b,
            "argmin_lambda": [self.argmin_lambda.real, self.argmin_lambda.imag],
            "n_evaluated": self.n_evaluated,
            "max_residual": self.max_residual,
        }


def default_lambda_grid(modulus_min: float = 1e-3, modulus_max: float = 1e6,
                        n_moduli: int = 12, n_phases: int = 9) -> list:
    """Log-spaced moduli x phases in [-pi/2, pi/2], plus lambda = 0."""
    moduli = np.geomspace(modulus_min, modulus_max, n_moduli)
    phases = np.linspace(-np.pi / 2.0, np.pi / 2.0, n_phases)
    grid = [0j]
    for r in moduli:
        for ph in phases:
            grid.append(complex(r * np.cos(ph), r * np.sin(ph)))
    return grid


def ls_scan(b_values, lambda_values) -> LSScanReport:
    """Minimum of |det| / (|z1| + |z2|) over the (b, lambda) grid.

    The normalization makes values comparable across b scales; a positive
    minimum is the numerical Lopatinskii-Shapiro verdict.
    """
    b_values = list(b_values)
    lambda_values = list(lambda_values)
    if not b_values or not lambda_values:
        raise ValueError("empty scan grid")
    best = None
    max_res = 0.0
    n = 0
    for b in b_values:
        for lam in lambda_values:
            rep = ls_roots(b, lam)
            n += 1
            max_res = max(max_res, max(rep.residuals))
            denom = sum(abs(z) for z in rep.roots_neg)
            val = rep.det_abs / denom
            if best is None or val < best[0]:
                best = (val, b, lam)
    return LSScanReport(min_normalized=float(best[0]), argmin_b=float(best[1]),
                        argmin_lambda=complex(best[2]), n_evaluated=n,
                        max_residual=float(max_res))
