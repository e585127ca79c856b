"""Uniform 2D grid, field containers, quadrature and difference operators.

Everything downstream (Hamiltonians, densities, functionals) is assembled
from the pieces here: a square tensor grid on [-L, L]^2, real/complex/vector
valued node fields, trapezoidal quadrature, and second-order finite
differences (central in the interior, one-sided at the boundary).

Fields are immutable value containers; all operators are pure functions of
their inputs, so everything in this module is safe to share across threads.
Array layout is ``values[i, j] = f(x_i, y_j)`` with ``x_i = -L + i*h``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "Grid2D",
    "ScalarField",
    "VectorField",
    "ComplexField",
    "make_grid",
    "grids_match",
    "require_same_grid",
    "integrate",
    "inner_product",
    "norm_l2",
    "normalized",
    "gradient",
    "divergence",
    "curl_z",
    "laplacian",
]

MIN_NODES = 16


def _readonly(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class Grid2D:
    """Uniform n x n node grid on [-L, L]^2 with spacing h = 2L/(n-1).

    Coordinate and quadrature arrays are precomputed once and shared
    read-only by every field living on the grid.
    """

    n: int
    L: float
    h: float
    xs: np.ndarray            # 1d node coordinates, xs[i] = -L + i*h
    X: np.ndarray             # meshgrid with indexing="ij"
    Y: np.ndarray
    quad_weights: np.ndarray  # trapezoidal weights, shape (n, n)

    def r2(self) -> np.ndarray:
        """x^2 + y^2 on the nodes (fresh array)."""
        return self.X**2 + self.Y**2


def make_grid(L: float, n: int) -> Grid2D:
    """Build the computational grid; rejects unusable resolutions."""
    n = int(n)
    L = float(L)
    if n < MIN_NODES:
        raise ValueError(f"need at least {MIN_NODES} nodes per axis, got {n}")
    if not np.isfinite(L) or L <= 0.0:
        raise ValueError(f"half-extent L must be positive, got {L}")
    h = 2.0 * L / (n - 1)
    xs = -L + h * np.arange(n)
    X, Y = np.meshgrid(xs, xs, indexing="ij")
    w = np.full(n, h)
    w[0] = w[-1] = 0.5 * h
    W = np.outer(w, w)
    return Grid2D(n=n, L=L, h=h, xs=_readonly(xs), X=_readonly(X),
                  Y=_readonly(Y), quad_weights=_readonly(W))


def grids_match(a: Grid2D, b: Grid2D) -> bool:
    return a is b or (a.n == b.n and a.L == b.L)


def require_same_grid(*fields) -> Grid2D:
    g = fields[0].grid
    for f in fields[1:]:
        if not grids_match(g, f.grid):
            raise ValueError(
                f"mismatched grids: (n={g.n}, L={g.L}) vs "
                f"(n={f.grid.n}, L={f.grid.L})"
            )
    return g


def _validated(values, dtype, shape) -> np.ndarray:
    v = np.array(values, dtype=dtype, copy=True)
    if v.shape != shape:
        raise ValueError(f"expected values of shape {shape}, got {v.shape}")
    if not np.all(np.isfinite(v.view(np.float64) if dtype is np.complex128 else v)):
        raise ValueError("field contains non-finite entries")
    return _readonly(v)


@dataclass(frozen=True, eq=False)
class ScalarField:
    """Real-valued node field (densities, potentials, gauge functions)."""

    grid: Grid2D
    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(
            self, "values",
            _validated(self.values, np.float64, (self.grid.n, self.grid.n)),
        )

    @classmethod
    def from_callable(cls, grid: Grid2D, fn) -> "ScalarField":
        return cls(grid, np.asarray(fn(grid.X, grid.Y), dtype=np.float64))


@dataclass(frozen=True, eq=False)
class ComplexField:
    """Complex-valued node field (wavefunctions)."""

    grid: Grid2D
    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(
            self, "values",
            _validated(self.values, np.complex128, (self.grid.n, self.grid.n)),
        )

    @classmethod
    def from_callable(cls, grid: Grid2D, fn) -> "ComplexField":
        return cls(grid, np.asarray(fn(grid.X, grid.Y), dtype=np.complex128))


@dataclass(frozen=True, eq=False)
class VectorField:
    """Planar vector field stored as values[c, i, j] with c in {x, y}."""

    grid: Grid2D
    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(
            self, "values",
            _validated(self.values, np.float64, (2, self.grid.n, self.grid.n)),
        )

    @property
    def x(self) -> np.ndarray:
        return self.values[0]

    @property
    def y(self) -> np.ndarray:
        return self.values[1]

    @classmethod
    def from_callable(cls, grid: Grid2D, fn) -> "VectorField":
        vx, vy = fn(grid.X, grid.Y)
        return cls(grid, np.stack([np.broadcast_to(vx, grid.X.shape),
                                   np.broadcast_to(vy, grid.X.shape)]).astype(np.float64))

    @classmethod
    def zero(cls, grid: Grid2D) -> "VectorField":
        return cls(grid, np.zeros((2, grid.n, grid.n)))


# ---------------------------------------------------------------------------
# quadrature
# ---------------------------------------------------------------------------

def integrate(f: ScalarField) -> float:
    """Trapezoidal quadrature of a scalar field over [-L, L]^2.

    Exact for constants (weights sum to the domain area); accumulation is a
    fixed-order numpy reduction, so the result is deterministic.
    """
    return float(np.sum(f.grid.quad_weights * f.values))


def inner_product(a, b) -> complex:
    """Quadrature inner product <a, b> = integral conj(a) * b."""
    g = require_same_grid(a, b)
    return complex(np.sum(g.quad_weights * np.conj(a.values) * b.values))


def norm_l2(f) -> float:
    """Quadrature L2 norm, valid for scalar and complex fields."""
    return float(np.sqrt(np.sum(f.grid.quad_weights * np.abs(f.values) ** 2)))


def normalized(psi: ComplexField) -> ComplexField:
    """Rescale psi so that integral |psi|^2 = 1."""
    nrm = norm_l2(psi)
    if nrm <= 0.0 or not np.isfinite(nrm):
        raise ValueError("cannot normalize a zero or non-finite field")
    return ComplexField(psi.grid, psi.values / nrm)


# ---------------------------------------------------------------------------
# finite differences (second order; one-sided at the boundary)
# ---------------------------------------------------------------------------

def _dx(a: np.ndarray, h: float) -> np.ndarray:
    out = np.empty_like(a)
    out[1:-1, :] = (a[2:, :] - a[:-2, :]) / (2.0 * h)
    out[0, :] = (-3.0 * a[0, :] + 4.0 * a[1, :] - a[2, :]) / (2.0 * h)
    out[-1, :] = (3.0 * a[-1, :] - 4.0 * a[-2, :] + a[-3, :]) / (2.0 * h)
    return out


def _dy(a: np.ndarray, h: float) -> np.ndarray:
    out = np.empty_like(a)
    out[:, 1:-1] = (a[:, 2:] - a[:, :-2]) / (2.0 * h)
    out[:, 0] = (-3.0 * a[:, 0] + 4.0 * a[:, 1] - a[:, 2]) / (2.0 * h)
    out[:, -1] = (3.0 * a[:, -1] - 4.0 * a[:, -2] + a[:, -3]) / (2.0 * h)
    return out


def _d2(a: np.ndarray, h: float, axis: int) -> np.ndarray:
    """Second derivative along one axis, one-sided second order at edges."""
    if axis == 1:
        return _d2(a.T, h, 0).T
    out = np.empty_like(a)
    inv = 1.0 / (h * h)
    out[1:-1, :] = (a[2:, :] - 2.0 * a[1:-1, :] + a[:-2, :]) * inv
    out[0, :] = (2.0 * a[0, :] - 5.0 * a[1, :] + 4.0 * a[2, :] - a[3, :]) * inv
    out[-1, :] = (2.0 * a[-1, :] - 5.0 * a[-2, :] + 4.0 * a[-3, :] - a[-4, :]) * inv
    return out


def gradient(f: ScalarField) -> VectorField:
    """(d/dx f, d/dy f) as a vector field."""
    h = f.grid.h
    return VectorField(f.grid, np.stack([_dx(f.values, h), _dy(f.values, h)]))


def divergence(v: VectorField) -> ScalarField:
    """d/dx v_x + d/dy v_y."""
    h = v.grid.h
    return ScalarField(v.grid, _dx(v.x, h) + _dy(v.y, h))


def curl_z(v: VectorField) -> ScalarField:
    """Scalar curl d/dx v_y - d/dy v_x of a planar field."""
    h = v.grid.h
    return ScalarField(v.grid, _dx(v.y, h) - _dy(v.x, h))


def laplacian(f):
    """Five-point Laplacian; returns the same field kind it was given."""
    h = f.grid.h
    vals = _d2(f.values, h, 0) + _d2(f.values, h, 1)
    if isinstance(f, ComplexField):
        return ComplexField(f.grid, vals)
    return ScalarField(f.grid, vals)
