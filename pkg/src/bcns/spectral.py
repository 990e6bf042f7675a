"""Periodic grid, Fourier transforms, differential operators, dealiased products.

Conventions used throughout the package:

* The domain is the torus ``[0, 2*pi)^d`` with ``d`` in {2, 3}, sampled on a
  uniform grid of ``N`` points per dimension (``N`` even).  Lattice
  frequencies are integers, one component in ``[-N/2, N/2)`` per axis,
  stored in NumPy FFT order (``0, 1, ..., N/2-1, -N/2, ..., -1``).
* Spectral coefficients are "mean-value" normalized: a pure mode
  ``cos(k.x)`` has coefficients 1/2 at ``+-k`` and the constant field 1 has
  coefficient 1 at ``k = 0``.  Consequently ``f(x) = sum_k c_k exp(i k.x)``.
* ``L^p`` norms are mean-value normalized as well,
  ``||f||_p = (mean |f|^p)^(1/p)``, so ``||1||_p = 1`` for every ``p`` and
  Parseval reads ``||f||_2^2 = sum_k |c_k|^2``.
* All arithmetic is in 64-bit floats / 128-bit complex.

Fields are immutable values: every operation returns a new ``SpectralField``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np


class SpectralError(ValueError):
    """Raised when an operation's preconditions are violated."""


@dataclass(frozen=True)
class Grid:
    """Periodic grid on ``[0, 2*pi)^d`` with integer lattice frequencies.

    Precomputed attributes (set in ``__post_init__``):

    * ``k``: tuple of ``d`` broadcastable integer-frequency arrays,
    * ``k2``: ``|k|^2`` per mode, ``kmag``: ``|k|``,
    * ``dealias_mask``: True where every ``|k_i| < N/3`` (2/3 rule),
    * ``dx``: grid spacing ``2*pi/N``.
    """

    d: int
    N: int
    k: tuple = field(init=False, repr=False, compare=False)
    k2: np.ndarray = field(init=False, repr=False, compare=False)
    kmag: np.ndarray = field(init=False, repr=False, compare=False)
    dealias_mask: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        if self.d not in (2, 3):
            raise SpectralError(f"unsupported dimension d={self.d}, need 2 or 3")
        if self.N % 2 != 0 or self.N < 8:
            raise SpectralError(f"mode count N={self.N} must be even and >= 8")
        k1 = np.fft.fftfreq(self.N, d=1.0 / self.N)  # exact integers as floats
        axes = []
        for ax in range(self.d):
            shape = [1] * self.d
            shape[ax] = self.N
            axes.append(k1.reshape(shape))
        k2 = sum(ki**2 for ki in axes)
        cutoff = self.N / 3.0
        mask = np.ones((self.N,) * self.d, dtype=bool)
        for ki in axes:
            mask &= np.abs(ki) < cutoff
        object.__setattr__(self, "k", tuple(axes))
        object.__setattr__(self, "k2", k2)
        object.__setattr__(self, "kmag", np.sqrt(k2))
        object.__setattr__(self, "dealias_mask", mask)

    @property
    def dx(self) -> float:
        return 2.0 * math.pi / self.N

    @property
    def shape(self) -> tuple:
        return (self.N,) * self.d

    def meshes(self) -> tuple:
        """Physical coordinate arrays ``x_1, ..., x_d`` (broadcastable)."""
        x1 = np.arange(self.N) * self.dx
        out = []
        for ax in range(self.d):
            shape = [1] * self.d
            shape[ax] = self.N
            out.append(x1.reshape(shape))
        return tuple(out)


def make_grid(d: int, N: int) -> Grid:
    """Build a periodic grid; rejects odd ``N`` and unsupported ``d``."""
    return Grid(d, N)


@dataclass(frozen=True)
class SpectralField:
    """Complex Fourier coefficients of a real scalar or vector field.

    ``coeffs`` has shape ``grid.shape`` for a scalar and
    ``(ncomp,) + grid.shape`` for a vector (components outermost).  Real
    fields satisfy the Hermitian symmetry ``c(-k) = conj(c(k))``.
    """

    grid: Grid
    coeffs: np.ndarray

    def __post_init__(self) -> None:
        c = np.asarray(self.coeffs, dtype=np.complex128)
        if c.shape != self.grid.shape and c.shape[1:] != self.grid.shape:
            raise SpectralError(
                f"coefficient shape {c.shape} does not match grid {self.grid.shape}"
            )
        object.__setattr__(self, "coeffs", c)

    @property
    def is_vector(self) -> bool:
        return self.coeffs.ndim == self.grid.d + 1

    @property
    def ncomp(self) -> int:
        return self.coeffs.shape[0] if self.is_vector else 1

    def components(self) -> list["SpectralField"]:
        if not self.is_vector:
            return [self]
        return [SpectralField(self.grid, self.coeffs[i]) for i in range(self.ncomp)]

    def samples(self) -> np.ndarray:
        """Physical-space values (real part; imaginary part is roundoff)."""
        return inverse_transform(self)

    def mean(self):
        """Spatial mean: scalar for a scalar field, array for a vector."""
        if self.is_vector:
            idx = (slice(None),) + (0,) * self.grid.d
            return self.coeffs[idx].real.copy()
        return float(self.coeffs[(0,) * self.grid.d].real)

    def hermitian_defect(self) -> float:
        """Max |c(-k) - conj(c(k))|; zero for a genuinely real field."""
        axes = tuple(range(-self.grid.d, 0))
        flipped = self.coeffs
        for ax in axes:
            flipped = np.roll(np.flip(flipped, axis=ax), 1, axis=ax)
        return float(np.max(np.abs(flipped - np.conj(self.coeffs))))

    def copy(self) -> "SpectralField":
        return SpectralField(self.grid, self.coeffs.copy())

    def _binary(self, other, op):
        if isinstance(other, SpectralField):
            if other.grid is not self.grid and other.grid != self.grid:
                raise SpectralError("fields live on different grids")
            return SpectralField(self.grid, op(self.coeffs, other.coeffs))
        # adding a number means adding the constant field: zero mode only
        c = self.coeffs.copy()
        zero = (0,) * self.grid.d
        if self.is_vector:
            c[(slice(None),) + zero] = op(c[(slice(None),) + zero], other)
        else:
            c[zero] = op(c[zero], other)
        return SpectralField(self.grid, c)

    def __add__(self, other):
        return self._binary(other, np.add)

    def __sub__(self, other):
        return self._binary(other, np.subtract)

    def __mul__(self, scalar):
        return SpectralField(self.grid, self.coeffs * scalar)

    __rmul__ = __mul__

    def __neg__(self):
        return SpectralField(self.grid, -self.coeffs)


def zeros(grid: Grid, vector: bool = False) -> SpectralField:
    shape = (grid.d,) + grid.shape if vector else grid.shape
    return SpectralField(grid, np.zeros(shape, dtype=np.complex128))


def forward_transform(samples: np.ndarray, grid: Grid) -> SpectralField:
    """Real samples -> normalized coefficients (``cos(k.x) -> 1/2`` at ``+-k``)."""
    s = np.asarray(samples, dtype=np.float64)
    if s.shape == grid.shape:
        c = np.fft.fftn(s) / s.size
    elif s.ndim == grid.d + 1 and s.shape[1:] == grid.shape:
        c = np.fft.fftn(s, axes=tuple(range(1, grid.d + 1))) / (grid.N**grid.d)
    else:
        raise SpectralError(f"sample shape {s.shape} does not match grid {grid.shape}")
    return SpectralField(grid, c)


def inverse_transform(f: SpectralField) -> np.ndarray:
    """Coefficients -> real samples; inverse of :func:`forward_transform`."""
    g = f.grid
    n = g.N**g.d
    if f.is_vector:
        return np.fft.ifftn(f.coeffs * n, axes=tuple(range(1, g.d + 1))).real
    return np.fft.ifftn(f.coeffs * n).real


def from_samples(samples: np.ndarray, grid: Grid) -> SpectralField:
    """Alias of :func:`forward_transform` reading as a constructor."""
    return forward_transform(samples, grid)


def _apply_multiplier(f: SpectralField, mult: np.ndarray) -> SpectralField:
    return SpectralField(f.grid, f.coeffs * mult)


def derivative(f: SpectralField, axis: int, order: int = 1) -> SpectralField:
    """Spectral derivative: multiplication by ``(i k_axis)^order`` per mode.

    For odd orders the Nyquist plane (``k_axis = -N/2``, which has no
    conjugate partner on the lattice) is zeroed so the result stays a real
    field.
    """
    g = f.grid
    if order not in (1, 2):
        raise SpectralError(f"derivative order must be 1 or 2, got {order}")
    if not 0 <= axis < g.d:
        raise SpectralError(f"axis {axis} out of range for d={g.d}")
    kax = g.k[axis]
    mult = (1j * kax) ** order
    if order % 2 == 1:
        mult = np.where(kax == -g.N // 2, 0.0, mult)
    return _apply_multiplier(f, mult)


def gradient(f: SpectralField) -> SpectralField:
    """Gradient of a scalar field as a vector field."""
    if f.is_vector:
        raise SpectralError("gradient expects a scalar field")
    comps = [derivative(f, ax).coeffs for ax in range(f.grid.d)]
    return SpectralField(f.grid, np.stack(comps))


def divergence(v: SpectralField) -> SpectralField:
    """Divergence of a vector field as a scalar field."""
    if not v.is_vector:
        raise SpectralError("divergence expects a vector field")
    out = sum(derivative(SpectralField(v.grid, v.coeffs[ax]), ax).coeffs
              for ax in range(v.grid.d))
    return SpectralField(v.grid, out)


def laplacian(f: SpectralField) -> SpectralField:
    """Laplacian (componentwise for vectors): multiplication by ``-|k|^2``."""
    return _apply_multiplier(f, -f.grid.k2)


def curl(v: SpectralField) -> SpectralField:
    """Curl: scalar ``d1 v2 - d2 v1`` in 2D, the usual vector in 3D."""
    if not v.is_vector:
        raise SpectralError("curl expects a vector field")
    g = v.grid
    comp = v.components()
    if g.d == 2:
        return derivative(comp[1], 0) - derivative(comp[0], 1)
    c0 = derivative(comp[2], 1) - derivative(comp[1], 2)
    c1 = derivative(comp[0], 2) - derivative(comp[2], 0)
    c2 = derivative(comp[1], 0) - derivative(comp[0], 1)
    return SpectralField(g, np.stack([c0.coeffs, c1.coeffs, c2.coeffs]))


def inv_laplacian(f: SpectralField) -> SpectralField:
    """Inverse of ``-Laplacian``: divide by ``|k|^2``, zero mode set to 0.

    The input must have zero mean; a nonzero-mean input makes the inversion
    ill-posed and raises.
    """
    g = f.grid
    norm = float(np.sqrt(np.sum(np.abs(f.coeffs) ** 2)))
    mean_mag = float(np.max(np.abs(np.atleast_1d(f.mean()))))
    if mean_mag > 1e-12 * max(norm, 1e-300):
        raise SpectralError(
            f"inv_laplacian needs a zero-mean field (|mean| = {mean_mag:.3e})"
        )
    k2 = g.k2.copy()
    k2[(0,) * g.d] = 1.0
    out = f.coeffs / k2
    if f.is_vector:
        out[(slice(None),) + (0,) * g.d] = 0.0
    else:
        out[(0,) * g.d] = 0.0
    return SpectralField(g, out)


def dealias(f: SpectralField) -> SpectralField:
    """Zero every mode with any ``|k_i| >= N/3`` (2/3-rule truncation)."""
    return _apply_multiplier(f, f.grid.dealias_mask)


def product_dealiased(f: SpectralField, g: SpectralField) -> SpectralField:
    """Pointwise product with 2/3-rule truncation before and after.

    Scalar*scalar, scalar*vector and vector*vector (componentwise by the
    scalar, or elementwise for equal ranks) are supported on a shared grid.
    The operation is exactly symmetric and bilinear.
    """
    if f.grid != g.grid:
        raise SpectralError("product_dealiased requires a shared grid")
    ft = dealias(f)
    gt = dealias(g)
    fs = inverse_transform(ft)
    gs = inverse_transform(gt)
    if ft.is_vector and not gt.is_vector:
        prod = fs * gs[None]
    elif gt.is_vector and not ft.is_vector:
        prod = gs * fs[None]
    else:
        prod = fs * gs
    return dealias(forward_transform(prod, f.grid))


def lp_norm(f: SpectralField, p: float) -> float:
    """Mean-value normalized ``L^p`` norm; vectors use the pointwise
    Euclidean magnitude, ``p = inf`` gives the max."""
    s = inverse_transform(f)
    if f.is_vector:
        s = np.sqrt(np.sum(s * s, axis=0))
    else:
        s = np.abs(s)
    if math.isinf(p):
        return float(np.max(s))
    if p < 1:
        raise SpectralError(f"L^p norm needs p >= 1, got {p}")
    return float(np.mean(s**p) ** (1.0 / p))


def l2_norm_spectral(f: SpectralField) -> float:
    """``L^2`` norm evaluated on coefficients (Parseval route)."""
    return float(np.sqrt(np.sum(np.abs(f.coeffs) ** 2)))
